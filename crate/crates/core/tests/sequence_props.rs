use std::f64::consts::PI;

use microcc::cone::QuadraticForm;
use microcc::geometry::partition_of_unity;
use microcc::grid::{weak_pairing, GridField, TorusGrid};
use microcc::sequences::{quadratic_pairing_limit, OscillationMode, OscillatoryFamily, Phase};
use microcc::Complex64;
use proptest::prelude::*;

fn family(dim: usize, n: usize, offset: f64, amp: f64, phase: Phase, axis: usize) -> OscillatoryFamily {
    let grid = TorusGrid::new(dim, n).unwrap();
    let ubar = GridField::real_scalar_from_fn(grid, |x| offset * (1.0 + 0.3 * x[0].cos())).unwrap();
    let mut xi0 = vec![0; dim];
    xi0[axis % dim] = 1;
    let mode = OscillationMode {
        lambda: vec![amp],
        xi0,
        envelope: GridField::real_scalar_from_fn(grid, |x| 1.0 + 0.2 * x[dim - 1].sin()).unwrap(),
        phase,
        decay: 0.0,
    };
    OscillatoryFamily::new("prop", ubar, vec![mode]).unwrap()
}

fn ones(grid: TorusGrid) -> GridField {
    GridField::real_scalar_from_fn(grid, |_| 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn table_norms_stay_below_l_sup(dim in 1usize..=2, offset in -2.0f64..2.0, amp in 0.1f64..3.0, cos in any::<bool>()) {
        let f = family(dim, 32, offset, amp, if cos { Phase::Cos } else { Phase::Sin }, 0);
        let grid = *f.grid();
        let q = QuadraticForm::builtin("square").unwrap();
        let t = quadratic_pairing_limit(&f, &q, &ones(grid), &ones(grid), &[2, 3, 5, 8]).unwrap();
        for row in &t.rows {
            let u = f.member(row.k).unwrap();
            let direct = (grid.cell_volume() * u.component(0).iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
            prop_assert!((row.l2_norm - direct).abs() <= 1e-12 * direct);
            prop_assert!(row.l2_norm <= t.l_sup);
        }
    }

    #[test]
    fn sine_squares_integrate_exactly(dim in 1usize..=3, axis in 0usize..3, k in 1i64..6) {
        let n = if dim == 3 { 16 } else { 32 };
        let grid = TorusGrid::new(dim, n).unwrap();
        let mut xi0 = vec![0; dim];
        xi0[axis % dim] = 1;
        let mode = OscillationMode { lambda: vec![1.0], xi0, envelope: ones(grid), phase: Phase::Sin, decay: 0.0 };
        let f = OscillatoryFamily::new("sin", GridField::zeros(grid, 1), vec![mode]).unwrap();
        let t = quadratic_pairing_limit(&f, &QuadraticForm::builtin("square").unwrap(), &ones(grid), &ones(grid), &[k]).unwrap();
        let want = PI * (2.0 * PI).powi(dim as i32 - 1);
        prop_assert!((t.rows[0].pairing - Complex64::new(want, 0.0)).norm() <= 1e-12 * want);
    }

    #[test]
    fn recentering_splits_the_pairing(offset in -2.0f64..2.0, amp in 0.1f64..3.0, cx in 0.0f64..6.0) {
        let f = family(2, 32, offset, amp, Phase::Sin, 1);
        let grid = *f.grid();
        let psi = GridField::real_scalar_from_fn(grid, |x| (-(x[0] - cx).powi(2)).exp() + 0.1).unwrap();
        let t = quadratic_pairing_limit(&f, &QuadraticForm::builtin("square").unwrap(), &psi, &ones(grid), &[2, 4, 6]).unwrap();
        for row in &t.rows {
            let sum = row.fluctuation + row.mean + row.cross;
            prop_assert!((row.pairing - sum).norm() <= 1e-12 * (1.0 + row.pairing.norm()));
            prop_assert!(row.decomposition_defect <= 1e-12 * (1.0 + offset.abs() + amp).powi(2));
            prop_assert!((row.mean - t.target).norm() <= 1e-12 * (1.0 + t.target.norm()));
        }
    }

    #[test]
    fn localized_pairings_recombine(offset in -2.0f64..2.0, amp in 0.1f64..3.0, k in 2i64..8) {
        let f = family(2, 32, offset, amp, Phase::Cos, 0);
        let grid = *f.grid();
        let q = QuadraticForm::builtin("square").unwrap();
        let qu = q.eval_field(&f.member(k).unwrap()).unwrap();
        let centers = vec![vec![0.0, 0.0], vec![PI, PI], vec![0.0, PI], vec![PI, 0.0]];
        let pou = partition_of_unity(&grid, &centers, &[3.0; 4]).unwrap();
        let whole = weak_pairing(&qu, &ones(grid), None).unwrap();
        let parts: Complex64 = pou.bumps.iter().map(|phi| weak_pairing(&qu, phi, None).unwrap()).sum();
        prop_assert!((whole - parts).norm() <= 1e-12 * (1.0 + whole.norm()));
    }
}
