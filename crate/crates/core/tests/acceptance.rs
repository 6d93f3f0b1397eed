//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use microcc::cone::{
    cosphere_samples, garding_constant, q_vanishes_on_cone, sample_cone, QuadraticForm,
};
use microcc::experiments::{run_scenario, ExperimentReport, ScenarioConfig, SCENARIOS};
use microcc::grid::{forward_fourier, inverse_fourier, GridField, TorusGrid};
use microcc::quantize::smoothing_order_probe;
use microcc::sampling;
use microcc::symbols::registry::builtin;
use microcc::symbols::MatrixSymbol;
use microcc::Complex64;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run(name: &str) -> Result<ExperimentReport, String> {
    let cfg = ScenarioConfig::builtin(name).map_err(|e| e.to_string())?;
    run_scenario(&cfg).map_err(|e| e.to_string())
}

fn check_value(r: &ExperimentReport, name: &str) -> Result<f64, String> {
    r.check(name).map(|c| c.value).ok_or_else(|| format!("report lacks check {name}"))
}

fn plancherel() -> Outcome {
    let mut rng = sampling::rng(0xacce_0001);
    let mut worst_trip: f64 = 0.0;
    let mut worst_planch: f64 = 0.0;
    for i in 0..50 {
        let dim = 1 + i % 3;
        let n = [4usize, 8, 16, 32][rng.random_range(0..4)];
        let n = if dim == 3 { n.min(16) } else { n };
        let grid = TorusGrid::new(dim, n).unwrap();
        let rank = 1 + rng.random_range(0..2);
        let comps: Vec<Vec<Complex64>> = (0..rank)
            .map(|_| (0..grid.len()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
            .collect();
        let u = GridField::new(grid, comps).unwrap();
        let spec = forward_fourier(&u).unwrap();
        let back = inverse_fourier(&spec).unwrap();
        worst_trip = worst_trip.max(back.sub(&u).unwrap().max_abs() / u.max_abs());
        let coeff_sum: f64 = spec.components().iter().flatten().map(|z| z.norm_sqr()).sum();
        let physical = u.l2_norm_sq();
        worst_planch = worst_planch.max((grid.volume() * coeff_sum - physical).abs() / physical);
    }
    ensure(worst_trip <= 1e-12, format!("round trip {worst_trip:e}"))?;
    ensure(worst_planch <= 1e-12, format!("Plancherel {worst_planch:e}"))?;
    Ok(format!("round trip {worst_trip:.1e}, Plancherel {worst_planch:.1e} over 50 fields"))
}

fn divcurl() -> Outcome {
    let r = run("divcurl3")?;
    let residual = r.hypotheses.cone.as_ref().map(|c| c.max_residual).ok_or("no cone certificate")?;
    ensure(residual <= 1e-10, format!("cone residual {residual:e}"))?;
    let flat = check_value(&r, "constant_test_pairing")?;
    ensure(flat <= 1e-12, format!("ψ≡1 pairing {flat:e}"))?;
    let t = r.table.as_ref().ok_or("no table")?;
    let gaps = t.gaps();
    ensure(gaps.windows(2).all(|w| w[1] < w[0]), format!("gaps not strictly decreasing: {gaps:?}"))?;
    let ratio = gaps[gaps.len() - 1] / (gaps[0] + 1e-16);
    ensure(ratio <= 1e-3, format!("final/initial gap {ratio:e}"))?;
    // ∫ cos(kx₁)cos(kx₂) G dx with G the σ-Gaussian at the origin
    let sigma: f64 = 0.5;
    for row in &t.rows {
        let k = row.k as f64;
        let exact = (2.0 * PI).powf(1.5) * sigma.powi(3) * (-sigma * sigma * k * k).exp();
        ensure(
            (row.pairing.re - exact).abs() <= 1e-10 * exact.max(1e-300) + 1e-15 && row.pairing.im.abs() <= 1e-15,
            format!("k = {}: pairing {} vs {exact}", row.k, row.pairing),
        )?;
    }
    ensure(r.verdict.passed && r.verdict.theorem_reproduced, "verdict")?;
    Ok(format!("residual {residual:.1e}, ψ≡1 pairing {flat:.1e}, gap ratio {ratio:.2e}"))
}

fn counterexample() -> Outcome {
    let r = run("counterexample")?;
    let t = r.table.as_ref().ok_or("no table")?;
    let worst = t.rows.iter().map(|row| (row.pairing - Complex64::new(PI, 0.0)).norm()).fold(0.0, f64::max);
    ensure(worst <= 1e-12, format!("pairing off π by {worst:e}"))?;
    ensure(r.verdict.cone_vanishing == Some(false) && !r.verdict.theorem_reproduced, "cone hypothesis should fail")?;
    ensure(r.verdict.passed, "verdict")?;
    Ok(format!("pairings π within {worst:.1e} for k = 2..8, cone residual {:.1}", check_value(&r, "cone_residual")?))
}

fn tartar() -> Outcome {
    let r = run("tartar-const")?;
    let v = &r.verdict;
    ensure(v.weak_convergence == Some(true) && v.precompactness == Some(true) && v.cone_vanishing == Some(true), "hypotheses")?;
    let fin = check_value(&r, "final_gap")?;
    ensure(fin <= 1e-6, format!("final gap {fin:e}"))?;
    ensure(v.passed && v.theorem_reproduced, "verdict")?;
    Ok(format!("hypotheses hold, final gap {fin:.1e}"))
}

fn pushforward_law() -> Outcome {
    let r = run("pushforward-law")?;
    let mut lin: f64 = 0.0;
    let mut nonlin: f64 = 0.0;
    for c in &r.checks {
        if let Some(rest) = c.name.strip_prefix("defect_") {
            if rest.ends_with("sine:0.1") {
                nonlin = nonlin.max(c.value);
            } else {
                lin = lin.max(c.value);
            }
        }
    }
    ensure(lin <= 1e-12, format!("linear defect {lin:e}"))?;
    ensure(nonlin <= 1e-10, format!("nonlinear defect {nonlin:e}"))?;
    let mism = check_value(&r, "kernel_dimension_mismatches")?;
    ensure(mism == 0.0, format!("{mism} kernel dimension mismatches"))?;
    ensure(r.verdict.passed, "verdict")?;
    Ok(format!("linear {lin:.1e}, nonlinear {nonlin:.1e}, kernel mismatches 0 at 100 points"))
}

fn cones() -> Outcome {
    let p = builtin("divcurl6", 3).unwrap().principal;
    let cone = sample_cone(&p, &[vec![0.0; 3]], 500).map_err(|e| e.to_string())?;
    ensure(cone.len() == 500 && cone.iter().all(|c| c.dim() == 3), "div-curl kernel dimension")?;
    for (name, dim) in [("laplace", 2), ("laplace", 3), ("grad", 2), ("grad", 3)] {
        let s = builtin(name, dim).unwrap().principal;
        ensure(sample_cone(&s, &[vec![0.0; dim]], 200).unwrap().is_empty(), format!("{name} cone in dim {dim} not empty"))?;
    }
    let dot = q_vanishes_on_cone(&QuadraticForm::builtin("dot3").unwrap(), &cone, 8).unwrap();
    ensure(dot.max_residual <= 1e-10, format!("v·w residual {:e}", dot.max_residual))?;
    let q = QuadraticForm::builtin("norm_v").unwrap();
    let norm = q_vanishes_on_cone(&q, &cone, 8).unwrap();
    ensure(norm.max_residual >= 1.0, format!("|v|² residual {}", norm.max_residual))?;
    let w = norm.witness.as_ref().ok_or("no witness")?;
    let again = q.eval(&w.x, &w.lambda);
    ensure((again - w.value).norm() <= 1e-12 && again.norm() >= 1.0 - 1e-12, "witness does not reproduce")?;
    let sv = p.eval(&w.x, &w.xi);
    let image: f64 = (0..sv.nrows())
        .map(|i| (0..sv.ncols()).map(|j| sv[(i, j)] * w.lambda[j]).sum::<Complex64>().norm_sqr())
        .sum::<f64>()
        .sqrt();
    ensure(image <= 1e-10, format!("witness not in the cone: |σλ| = {image:e}"))?;
    let repeat = q_vanishes_on_cone(&q, &cone, 8).unwrap();
    ensure(repeat.max_residual == norm.max_residual, "witness not reproducible")?;
    Ok(format!("500 kernels of dim 3, v·w residual {:.1e}, |v|² residual {:.3}", dot.max_residual, norm.max_residual))
}

fn garding() -> Outcome {
    let q = QuadraticForm::builtin("proj_garding").unwrap();
    let p = builtin("proj_first", 2).unwrap().principal;
    let k = cosphere_samples(&[vec![0.0, 0.0], vec![1.0, 2.0]], 2, 64);
    let mut line = Vec::new();
    for delta in [0.1, 0.3, 0.5] {
        let r = garding_constant(&q, &p, &k, delta, 400).map_err(|e| e.to_string())?;
        let exact = 1.0 - delta;
        let rel = (r.constant - exact).abs() / exact;
        ensure(rel <= 0.05, format!("δ = {delta}: C = {} vs {exact}", r.constant))?;
        ensure(r.violation_on_resample >= -1e-8, format!("δ = {delta}: resample slack {:e}", r.violation_on_resample))?;
        line.push(format!("δ={delta}: C={:.4}", r.constant));
    }
    Ok(line.join(", "))
}

fn order_drop() -> Outcome {
    let grid = TorusGrid::new(1, 128).unwrap();
    let psi = GridField::real_scalar_from_fn(grid, |x| 1.0 + 0.5 * x[0].sin()).unwrap();
    let ks = [4, 8, 16, 32];
    let mut line = Vec::new();
    for (name, s) in [("dx1", 1.0), ("laplace", 2.0)] {
        let a = builtin(name, 1).unwrap().total;
        let r = smoothing_order_probe(&a, &psi, &ks).map_err(|e| e.to_string())?;
        let sa = r.apply_slope.ok_or("degenerate apply slope")?;
        let sc = r.commutator_slope.ok_or("degenerate commutator slope")?;
        ensure((sa - s).abs() <= 0.1, format!("{name}: apply slope {sa}"))?;
        ensure((sc - (s - 1.0)).abs() <= 0.15, format!("{name}: commutator slope {sc}"))?;
        line.push(format!("{name}: {sa:.3}/{sc:.3}"));
    }
    Ok(format!("apply/commutator slopes {}", line.join(", ")))
}

fn manifold() -> Outcome {
    let r = run("manifold-minkowski")?;
    let t = r.table.as_ref().ok_or("no table")?;
    ensure(t.target.norm() > 0.0, "ū should be nonzero")?;
    let cross: Vec<f64> = t.rows.iter().map(|row| row.cross.norm()).collect();
    let cross_ratio = cross[cross.len() - 1] / (cross[0] + 1e-16);
    ensure(cross_ratio <= 1e-4, format!("cross term ratio {cross_ratio:e}"))?;
    let gaps = t.gaps();
    let ratio = gaps[gaps.len() - 1] / (gaps[0] + 1e-16);
    ensure(ratio <= 1e-4, format!("final/initial gap {ratio:e}"))?;
    ensure(r.verdict.passed && r.verdict.theorem_reproduced, "manifold verdict")?;
    let two = run("two-chart")?;
    let loc = check_value(&two, "localization_defect")?;
    ensure(loc <= 1e-10, format!("localization defect {loc:e}"))?;
    let fz = two.diagnostics.freezing.as_ref().ok_or("no freezing diagnostics")?;
    ensure(fz.rows.iter().all(|row| row.measured <= row.total_freeze_error + 1e-10), "freezing bound violated")?;
    ensure(two.verdict.passed, "two-chart verdict")?;
    Ok(format!("gap ratio {ratio:.1e}, cross ratio {cross_ratio:.1e}, localization {loc:.1e}"))
}

fn determinism() -> Outcome {
    for name in SCENARIOS {
        let a = run(name)?;
        let b = run(name)?;
        let (ca, cb) = (a.csv_string().unwrap(), b.csv_string().unwrap());
        ensure(ca == cb, format!("{name}: CSV differs between runs"))?;
        let strip = |r: &ExperimentReport| {
            let mut v = serde_json::to_value(r).unwrap();
            v["timestamp_unix"] = serde_json::Value::Null;
            serde_json::to_string(&v).unwrap()
        };
        ensure(strip(&a) == strip(&b), format!("{name}: JSON differs between runs"))?;
    }
    Ok(format!("{} scenarios, CSV and JSON identical across two runs", SCENARIOS.len()))
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("Plancherel and round trip", 5, plancherel),
        ("div-curl lemma", 60, divcurl),
        ("counterexample sharpness", 5, counterexample),
        ("constant-coefficient Tartar case", 10, tartar),
        ("pushforward law", 5, pushforward_law),
        ("operator cones", 10, cones),
        ("Garding constant", 10, garding),
        ("commutator order drop", 10, order_drop),
        ("manifold and two-chart runs", 60, manifold),
        ("determinism", 120, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed <= Duration::from_secs(*limit) {
                Ok(msg)
            } else {
                Err(format!("took {elapsed:.2?}, limit {limit} s"))
            }
        });
        match result {
            Ok(msg) => println!("PASS criterion {:>2} {name}: {msg} [{elapsed:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {msg} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
