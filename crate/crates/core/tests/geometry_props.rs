mod common;

use common::random_field;
use microcc::geometry::{
    partition_of_unity, positive_part_matrix, volume_density, weighted_sobolev_norm_sq, BundleMetric, MetricField,
};
use microcc::grid::{forward_fourier, weak_pairing, GridField, TorusGrid};
use microcc::linalg::symmetric_eigen;
use microcc::sampling;
use microcc::{Complex64, RMat};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn symmetric(rank: usize, seed: u64) -> RMat {
    let mut rng = sampling::rng(seed);
    let a = DMatrix::from_fn(rank, rank, |_, _| rng.random_range(-2.0..2.0));
    (&a + a.transpose()) * 0.5
}

fn orthogonal(dim: usize, seed: u64) -> RMat {
    let (_, v) = symmetric_eigen(&symmetric(dim, seed));
    v
}

fn nondegenerate(rank: usize, seed: u64) -> Option<RMat> {
    let h = symmetric(rank, seed);
    let (vals, _) = symmetric_eigen(&h);
    vals.iter().all(|v| v.abs() > 1e-3).then_some(h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weighted_norm_is_bracketed_at_order_zero(rank in 1usize..=3, seed in any::<u64>()) {
        let h = nondegenerate(rank, seed);
        prop_assume!(h.is_some());
        let h = h.unwrap();
        let (vals, _) = symmetric_eigen(&h);
        let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v.abs()), b.max(v.abs())));
        let grid = TorusGrid::new(2, 8).unwrap();
        let u = random_field(grid, rank, seed ^ 3);
        let plain = forward_fourier(&u).unwrap().mass();
        let g = MetricField::builtin("euclidean", 2).unwrap();
        let w = weighted_sobolev_norm_sq(&u, &g, &BundleMetric::constant("h", h).unwrap(), 0.0).unwrap();
        prop_assert!(w >= lo * plain * (1.0 - 1e-12) && w <= hi * plain * (1.0 + 1e-12));
    }

    #[test]
    fn weighted_norm_of_a_plane_wave(s in -2.0f64..2.0, k0 in -3i64..=3, k1 in -3i64..=3, seed in any::<u64>()) {
        let hm = nondegenerate(2, seed);
        prop_assume!(hm.is_some());
        let hm = hm.unwrap();
        let gm = {
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 2.0]));
            let o = orthogonal(2, !seed);
            &o * d * o.transpose()
        };
        let v = [Complex64::new(0.3, -1.2), Complex64::new(0.7, 0.4)];
        let grid = TorusGrid::new(2, 8).unwrap();
        let u = GridField::from_fn(grid, 2, |x| {
            let e = Complex64::from_polar(1.0, k0 as f64 * x[0] + k1 as f64 * x[1]);
            vec![v[0] * e, v[1] * e]
        })
        .unwrap();
        let g = MetricField::constant("g", gm.clone()).unwrap();
        let w = weighted_sobolev_norm_sq(&u, &g, &BundleMetric::constant("h", hm.clone()).unwrap(), s).unwrap();
        let k = nalgebra::DVector::from_vec(vec![k0 as f64, k1 as f64]);
        let gkk = (k.transpose() * &gm * &k)[(0, 0)];
        let abs_h = positive_part_matrix(&hm).unwrap();
        let fiber: f64 = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| (v[a].conj() * abs_h[(a, b)] * v[b]).re).sum();
        let want = (1.0 + gkk * gkk).powf(s) * fiber;
        prop_assert!((w - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn positive_part_dominates(rank in 1usize..=4, seed in any::<u64>()) {
        let h = nondegenerate(rank, seed);
        prop_assume!(h.is_some());
        let h = h.unwrap();
        let p = positive_part_matrix(&h).unwrap();
        let (pv, _) = symmetric_eigen(&p);
        prop_assert!(pv.iter().all(|&v| v > 0.0));
        let (dv, _) = symmetric_eigen(&(&p - &h));
        let negatives = symmetric_eigen(&h).0.iter().filter(|&&v| v < 0.0).count();
        let scale = h.norm();
        prop_assert!(dv.iter().all(|&v| v >= -1e-12 * scale));
        prop_assert_eq!(dv.iter().filter(|&&v| v > 1e-10 * scale).count(), negatives);
    }

    #[test]
    fn volume_density_is_orthogonally_invariant(dim in 1usize..=3, seed in any::<u64>()) {
        let m = nondegenerate(dim, seed);
        prop_assume!(m.is_some());
        let m = m.unwrap();
        let o = orthogonal(dim, !seed);
        let x = vec![0.0; dim];
        let a = volume_density(&MetricField::constant("g", m.clone()).unwrap(), &x).unwrap();
        let b = volume_density(&MetricField::constant("g", &o * &m * o.transpose()).unwrap(), &x).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a);
        prop_assert!((a - m.determinant().abs().sqrt()).abs() <= 1e-10 * a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn partitions_localize_pairings(m in 2usize..=4, f in 0.75f64..1.5, seed in any::<u64>()) {
        let grid = TorusGrid::new(2, 16).unwrap();
        let step = 2.0 * std::f64::consts::PI / m as f64;
        let centers: Vec<Vec<f64>> = (0..m * m).map(|i| vec![(i % m) as f64 * step, (i / m) as f64 * step]).collect();
        let pou = partition_of_unity(&grid, &centers, &vec![f * step; centers.len()]).unwrap();
        let u = random_field(grid, 1, seed);
        let psi = GridField::real_scalar_from_fn(grid, |x| x[0].cos() + 0.5).unwrap();
        let whole = weak_pairing(&u, &psi, None).unwrap();
        let summed: Complex64 = pou
            .bumps
            .iter()
            .map(|phi| weak_pairing(&u.multiply_scalar_field(phi).unwrap(), &psi, None).unwrap())
            .sum();
        prop_assert!((whole - summed).norm() <= 1e-12 * (1.0 + whole.norm()));
        for b in &pou.bumps {
            prop_assert!(b.component(0).iter().all(|z| z.re >= 0.0 && z.re <= 1.0 + 1e-15 && z.im == 0.0));
        }
    }
}
