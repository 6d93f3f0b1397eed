mod common;

use common::{bandlimited_field, random_field};
use microcc::grid::{forward_fourier, GridField, TorusGrid};
use microcc::quantize::{apply, commutator_apply};
use microcc::symbols::registry::builtin;
use microcc::symbols::{MatrixSymbol, Symbol};
use microcc::{CMat, Complex64};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn apply_is_linear(which in 0usize..4, seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let (name, dim) = [("laplace", 2), ("scaled:dx1", 1), ("scaled:grad", 2), ("riesz1", 2)][which];
        let s = builtin(name, dim).unwrap().total;
        let g = TorusGrid::new(dim, 16).unwrap();
        let u = random_field(g, s.in_rank(), seed);
        let v = random_field(g, s.in_rank(), seed ^ 1);
        let (ca, cb) = (Complex64::new(a, 0.3), Complex64::new(b, 0.0));
        let lhs = apply(&s, &u.axpby(ca, &v, cb).unwrap()).unwrap();
        let rhs = apply(&s, &u).unwrap().axpby(ca, &apply(&s, &v).unwrap(), cb).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-10 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn multipliers_diagonalize(which in 0usize..3, seed in any::<u64>()) {
        let (name, dim) = [("laplace", 2), ("grad", 2), ("riesz1", 2)][which];
        let s = builtin(name, dim).unwrap().total;
        let g = TorusGrid::new(dim, 16).unwrap();
        let u = random_field(g, s.in_rank(), seed);
        let (fu, fa) = (forward_fourier(&u).unwrap(), forward_fourier(&apply(&s, &u).unwrap()).unwrap());
        for slot in 0..g.len() {
            let k: Vec<f64> = g.frequency(slot).iter().map(|&c| c as f64).collect();
            let m = s.eval(&[0.0, 0.0], &k);
            for i in 0..s.out_rank() {
                let want: Complex64 = (0..s.in_rank()).map(|j| m[(i, j)] * fu.component(j)[slot]).sum();
                prop_assert!((fa.component(i)[slot] - want).norm() <= 1e-12 * (1.0 + want.norm()));
            }
        }
    }

    #[test]
    fn coordinate_symbol_is_spectral_derivative(dim in 1usize..=3, axis in 0usize..3, seed in any::<u64>()) {
        let axis = axis % dim;
        let s = Symbol::multiplier("d", dim, 1.0, 1, 1, move |xi| CMat::from_element(1, 1, Complex64::new(0.0, xi[axis])));
        let g = TorusGrid::new(dim, if dim == 3 { 8 } else { 16 }).unwrap();
        let u = bandlimited_field(g, 1, 3, seed);
        let got = apply(&s, &u).unwrap();
        let spec = forward_fourier(&u).unwrap();
        // ∂_axis Σ û_k e^{ik·x} evaluated term by term
        let want = GridField::from_fn(g, 1, |x| {
            let v: Complex64 = (0..g.len())
                .map(|slot| {
                    let k = g.frequency(slot);
                    let ph: f64 = k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum();
                    Complex64::new(0.0, k[axis] as f64) * spec.component(0)[slot] * Complex64::from_polar(1.0, ph)
                })
                .sum();
            vec![v]
        })
        .unwrap();
        prop_assert!(got.sub(&want).unwrap().max_abs() <= 1e-12 * (1.0 + want.max_abs()));
    }

    #[test]
    fn constants_commute(which in 0usize..3, c in -3.0f64..3.0, seed in any::<u64>()) {
        let (name, dim) = [("laplace", 2), ("scaled:dx1", 1), ("riesz1", 2)][which];
        let s = builtin(name, dim).unwrap().total;
        let g = TorusGrid::new(dim, 16).unwrap();
        let psi = GridField::real_scalar_from_fn(g, |_| c).unwrap();
        let u = random_field(g, s.in_rank(), seed);
        prop_assert!(commutator_apply(&s, &psi, &u).unwrap().max_abs() <= 1e-12 * (1.0 + c.abs()) * (1.0 + apply(&s, &u).unwrap().max_abs()));
    }

    #[test]
    fn first_order_commutators_follow_leibniz(which in 0usize..3, seed in any::<u64>()) {
        // [c(x) σ(D), ψ]u = c(x) σ(∇ψ)/i · u for first-order polynomial σ = i(ξ-linear)
        let (name, dim) = [("scaled:dx1", 1), ("grad", 2), ("scaled:proj_first", 2)][which];
        let s = builtin(name, dim).unwrap().total;
        let g = TorusGrid::new(dim, 32).unwrap();
        let psi = GridField::real_scalar_from_fn(g, |x| 1.0 + 0.3 * x[0].sin() + 0.2 * x[dim - 1].cos()).unwrap();
        let u = bandlimited_field(g, s.in_rank(), 4, seed);
        let got = commutator_apply(&s, &psi, &u).unwrap();
        let grad_psi = |x: &[f64]| {
            let mut d = vec![0.0; dim];
            d[0] += 0.3 * x[0].cos();
            d[dim - 1] -= 0.2 * x[dim - 1].sin();
            d
        };
        let want = GridField::from_fn(g, s.out_rank(), |x| {
            let m = s.eval(x, &grad_psi(x));
            let j = g.flat_index(&x.iter().map(|t| (t / g.spacing()).round() as usize).collect::<Vec<_>>());
            let ux = u.sample(j);
            (0..s.out_rank())
                .map(|i| (0..s.in_rank()).map(|c| m[(i, c)] * ux[c]).sum::<Complex64>() * Complex64::new(0.0, -1.0))
                .collect()
        })
        .unwrap();
        prop_assert!(got.sub(&want).unwrap().max_abs() <= 1e-8 * (1.0 + want.max_abs()));
    }
}
