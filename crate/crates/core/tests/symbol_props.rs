use microcc::linalg::frobenius;
use microcc::sampling;
use microcc::symbols::registry::{builtin, natural_dim, NAMES};
use microcc::symbols::{
    chart_check_points, freeze, homogeneity_defect, oscillation_radius, pushforward, Diffeomorphism, MatrixSymbol,
    OscillationOptions, PrincipalSymbol,
};
use microcc::CMat;
use proptest::prelude::*;

fn point(dim: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = sampling::real_unit_vectors(dim, 1, seed)[0].iter().map(|c| 3.0 * c).collect();
    let xi = sampling::real_unit_vectors(dim, 1, seed ^ 0xf00d)[0].clone();
    (x, xi)
}

fn diffeo(which: usize, dim: usize) -> Diffeomorphism {
    match which {
        0 => Diffeomorphism::scaling(dim, 1.7).unwrap(),
        1 => Diffeomorphism::plane_rotation(dim, 0.4).unwrap(),
        2 => Diffeomorphism::shear(dim).unwrap(),
        _ => Diffeomorphism::sine_perturbation(dim, 0.2).unwrap(),
    }
}

fn named(i: usize, scaled: bool) -> (PrincipalSymbol, usize) {
    let base = NAMES[i % NAMES.len()];
    let name = if scaled { format!("scaled:{base}") } else { base.to_string() };
    let dim = natural_dim(&name).unwrap_or(2);
    (builtin(&name, dim).unwrap().principal, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn identity_pushforward_is_neutral(i in 0usize..9, scaled in any::<bool>(), seed in any::<u64>()) {
        let (p, dim) = named(i, scaled);
        let q = pushforward(&p, &Diffeomorphism::identity(dim)).unwrap();
        let (x, xi) = point(dim, seed);
        let scale = frobenius(&p.eval(&x, &xi)).max(1.0);
        prop_assert!(frobenius(&(q.eval(&x, &xi) - p.eval(&x, &xi))) <= 1e-12 * scale);
    }

    #[test]
    fn pushforward_composes(i in 0usize..9, scaled in any::<bool>(), a in 0usize..4, b in 0usize..4, seed in any::<u64>()) {
        let (p, dim) = named(i, scaled);
        let (c1, c2) = (diffeo(a, dim), diffeo(b, dim));
        let once = pushforward(&p, &Diffeomorphism::compose(&c2, &c1).unwrap()).unwrap();
        let twice = pushforward(&pushforward(&p, &c1).unwrap(), &c2).unwrap();
        let (y, eta) = point(dim, seed);
        let scale = frobenius(&once.eval(&y, &eta)).max(1.0);
        prop_assert!(frobenius(&(once.eval(&y, &eta) - twice.eval(&y, &eta))) <= 1e-10 * scale);
    }

    #[test]
    fn freeze_is_exact(i in 0usize..9, seed in any::<u64>(), other in any::<u64>()) {
        let name = format!("scaled:{}", NAMES[i]);
        let dim = natural_dim(&name).unwrap_or(2);
        let a = builtin(&name, dim).unwrap().total;
        let (x, xi) = point(dim, seed);
        let (y, _) = point(dim, other);
        prop_assert_eq!(freeze(&a, &x).eval(&y, &xi), a.eval(&x, &xi));
    }

    #[test]
    fn builtins_are_homogeneous(i in 0usize..9, scaled in any::<bool>(), seed in any::<u64>(), mag in 1.0f64..5.0, t in 1.0f64..6.0) {
        let (p, dim) = named(i, scaled);
        let (x, xi) = point(dim, seed);
        let xi: Vec<f64> = xi.iter().map(|c| c * mag).collect();
        let scale = frobenius(&p.eval(&x, &xi)).max(1.0) * t.powf(p.order());
        prop_assert!(homogeneity_defect(&p, &x, &xi, t) <= 1e-10 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oscillation_radius_honours_its_bound(cx in -3.0f64..3.0, cy in -3.0f64..3.0, gamma in 0.05f64..1.0) {
        let coeffs = |x: &[f64]| vec![CMat::from_element(1, 1, microcc::Complex64::new(x[0].sin() * x[1].cos(), 0.0))];
        let opts = OscillationOptions::for_dim(2);
        let center = [cx, cy];
        let r = oscillation_radius(&coeffs, &center, gamma, opts).unwrap();
        prop_assert!(r > 0.0 && r <= opts.max_radius);
        let base = coeffs(&center);
        let fine = sampling::ball_samples(&center, r, 2 * opts.per_axis - 1);
        let worst = fine.iter().map(|y| frobenius(&(&coeffs(y)[0] - &base[0]))).fold(0.0, f64::max);
        prop_assert!(worst < gamma);
    }
}

#[test]
fn chart_points_validate_every_sample_map() {
    for dim in 2..=3 {
        for w in 0..4 {
            diffeo(w, dim).validate(&chart_check_points(dim), 1e-9).unwrap();
        }
    }
}
