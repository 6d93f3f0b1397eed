//! End-to-end scenario runs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::config::ScenarioConfig;
use super::report::{
    Check, Diagnostics, Expectation, ExperimentReport, FreezeRow, FreezingDiagnostics, Hypotheses, Verdict, SCHEMA_VERSION,
};
use crate::cone::{
    cosphere_samples, garding_constant, kernel_at, q_vanishes_on_cone, sample_cone, GardingReport, QuadraticForm, KERNEL_TOL,
};
use crate::error::{Error, Result};
use crate::geometry::{partition_of_unity, weighted_sobolev_norm_sq_at, BundleMetric, MetricField, PartitionOfUnity};
use crate::grid::{sobolev_norm, weak_pairing, GridField, TorusGrid};
use crate::linalg::frobenius;
use crate::quantize::{apply, commutator_apply};
use crate::sampling;
use crate::sequences::{
    check_precompact_proxy, check_weak_convergence, quadratic_pairing_limit, test_dictionary, ConvergenceTable,
    OscillationMode, OscillatoryFamily, ProxyVerdict,
};
use crate::symbols::{oscillation_radius, OscillationOptions};
use crate::symbols::registry::{self, BuiltinSymbol};
use crate::symbols::{pushforward, Diffeomorphism, MatrixSymbol, PrincipalSymbol, Symbol};
use crate::RMat;

const DEFAULT_SPHERE_SAMPLES: usize = 200;
const DEFAULT_PROBES: usize = 8;
const DEFAULT_N_CUT: &[f64] = &[1.0, 2.0, 4.0, 8.0];

struct Setup {
    grid: TorusGrid,
    symbol: BuiltinSymbol,
    q: QuadraticForm,
    metric: MetricField,
    density: GridField,
    psi: GridField,
    x_points: Vec<Vec<f64>>,
    family: Option<OscillatoryFamily>,
}

struct Outcome {
    expectation: Expectation,
    hypotheses: Hypotheses,
    hyp_flags: [Option<bool>; 3],
    conclusion: Option<bool>,
    garding: Vec<GardingReport>,
    table: Option<ConvergenceTable>,
    diagnostics: Diagnostics,
    checks: Vec<Check>,
}

impl Outcome {
    fn new(expectation: Expectation) -> Self {
        Self {
            expectation,
            hypotheses: Hypotheses::default(),
            hyp_flags: [None; 3],
            conclusion: None,
            garding: Vec::new(),
            table: None,
            diagnostics: Diagnostics::default(),
            checks: Vec::new(),
        }
    }
}

/// Runs a configured scenario and assembles its report.
///
/// Hypotheses are evaluated before the conclusion is measured.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let s = setup(cfg)?;
    let out = match cfg.scenario.as_str() {
        "divcurl3" => divcurl3(cfg, &s)?,
        "counterexample" => counterexample(cfg, &s)?,
        "tartar-const" => tartar_const(cfg, &s)?,
        "variable-q" => variable_q(cfg, &s)?,
        "variable-symbol" => variable_symbol(cfg, &s)?,
        "manifold-minkowski" => manifold_minkowski(cfg, &s)?,
        "garding" => garding(cfg, &s)?,
        "pushforward-law" => pushforward_law(cfg, &s)?,
        "two-chart" => two_chart(cfg, &s)?,
        other => return Err(Error::Config(format!("unknown scenario {other:?}"))),
    };
    let verdict = Verdict::decide(out.expectation, out.hyp_flags, out.conclusion, &out.checks);
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION.into(),
        scenario: cfg.scenario.clone(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        config: cfg.clone(),
        hypotheses: out.hypotheses,
        garding: out.garding,
        table: out.table,
        diagnostics: out.diagnostics,
        checks: out.checks,
        verdict,
    })
}

fn setup(cfg: &ScenarioConfig) -> Result<Setup> {
    let grid = TorusGrid::new(cfg.grid.dim, cfg.grid.n).map_err(|e| Error::Config(e.to_string()))?;
    let dim = grid.dim();
    let symbol = registry::builtin(&cfg.symbol, dim)?;
    let q = QuadraticForm::builtin(&cfg.quadform)?;
    if q.rank() != symbol.total.in_rank() {
        return Err(Error::Config(format!(
            "quadratic form {} has rank {}, symbol {} acts on rank {}",
            cfg.quadform,
            q.rank(),
            cfg.symbol,
            symbol.total.in_rank()
        )));
    }
    let metric = MetricField::builtin(&cfg.metric, dim)?;
    metric.validate(&crate::symbols::chart_check_points(dim))?;
    let density = metric.density_field(&grid)?;
    let psi = cfg.test_function.build(&grid)?;
    let x_points = cfg.params.x_points.clone().unwrap_or_else(|| vec![vec![0.0; dim]]);
    if x_points.iter().any(|x| x.len() != dim) {
        return Err(Error::Config("x_points must match the grid dimension".into()));
    }
    let family = if cfg.family.modes.is_empty() { None } else { Some(build_family(cfg, &grid, q.rank())?) };
    Ok(Setup { grid, symbol, q, metric, density, psi, x_points, family })
}

fn build_family(cfg: &ScenarioConfig, grid: &TorusGrid, rank: usize) -> Result<OscillatoryFamily> {
    let ubar = if cfg.family.ubar.is_empty() {
        GridField::zeros(*grid, rank)
    } else {
        if cfg.family.ubar.len() != rank {
            return Err(Error::Config(format!("ubar has {} components, fiber rank is {rank}", cfg.family.ubar.len())));
        }
        let comps = cfg
            .family
            .ubar
            .iter()
            .map(|f| f.build(grid).map(|g| g.into_components().remove(0)))
            .collect::<Result<Vec<_>>>()?;
        GridField::new(*grid, comps)?
    };
    let modes = cfg
        .family
        .modes
        .iter()
        .map(|m| {
            Ok(OscillationMode {
                lambda: m.lambda.clone(),
                xi0: m.xi0.clone(),
                envelope: m.envelope.build(grid)?,
                phase: m.phase,
                decay: m.decay,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let f = OscillatoryFamily::new(cfg.scenario.clone(), ubar, modes)?;
    for &k in &cfg.family.k_list {
        f.check_admissible(k)?;
    }
    Ok(f)
}

fn family(s: &Setup) -> Result<&OscillatoryFamily> {
    s.family.as_ref().ok_or_else(|| Error::Config("scenario needs an oscillatory family".into()))
}

/// Weak convergence, precompactness proxy and cone certificate, in that order.
fn hypotheses(cfg: &ScenarioConfig, s: &Setup, out: &mut Outcome) -> Result<()> {
    let f = family(s)?;
    let ks = &cfg.family.k_list;
    let dictionary = test_dictionary(&s.grid)?;
    let weak = check_weak_convergence(f, &dictionary, ks, cfg.tolerance("weak_gap")?)?;
    let n_cut = cfg.params.n_cut.clone().unwrap_or_else(|| DEFAULT_N_CUT.to_vec());
    let pre = check_precompact_proxy(f, &s.symbol.total, &n_cut, ks)?;
    let samples = sample_cone(
        &s.symbol.principal,
        &s.x_points,
        cfg.params.sphere_samples.unwrap_or(DEFAULT_SPHERE_SAMPLES),
    )?;
    let cone = q_vanishes_on_cone(&s.q, &samples, cfg.params.probe_count.unwrap_or(DEFAULT_PROBES))?;
    out.hyp_flags = [
        Some(weak.passes),
        Some(pre.verdict == ProxyVerdict::ConsistentWithPrecompactness),
        Some(cone.vanishes(cfg.tolerance("cone_residual")?)),
    ];
    out.diagnostics.n_cut = n_cut;
    out.hypotheses = Hypotheses {
        weak_convergence: Some(weak),
        precompactness: Some(pre),
        cone: Some(cone),
    };
    Ok(())
}

/// Adds one check per hypothesis, each expected to hold.
fn require_hypotheses(cfg: &ScenarioConfig, out: &mut Outcome) -> Result<()> {
    let h = &out.hypotheses;
    let weak = h.weak_convergence.as_ref().expect("hypotheses evaluated");
    let pre = h.precompactness.as_ref().expect("hypotheses evaluated");
    let cone = h.cone.as_ref().expect("hypotheses evaluated");
    out.checks.push(Check::holds("weak_convergence", weak.passes));
    out.checks.push(Check::holds(
        "precompactness_proxy",
        pre.verdict == ProxyVerdict::ConsistentWithPrecompactness,
    ));
    out.checks.push(Check::at_most("cone_residual", cone.max_residual, cfg.tolerance("cone_residual")?));
    Ok(())
}

fn table(cfg: &ScenarioConfig, s: &Setup, psi: &GridField) -> Result<ConvergenceTable> {
    quadratic_pairing_limit(family(s)?, &s.q, psi, &s.density, &cfg.family.k_list)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Gap decreases strictly and drops to a fraction of the first gap.
fn gap_checks(cfg: &ScenarioConfig, t: &ConvergenceTable, out: &mut Outcome) -> Result<bool> {
    let gaps = t.gaps();
    let ratio = gaps.last().copied().unwrap_or(0.0) / (gaps.first().copied().unwrap_or(0.0) + 1e-16);
    let dec = Check::holds("gap_strictly_decreasing", strictly_decreasing(&gaps));
    let fin = Check::at_most("final_gap_ratio", ratio, cfg.tolerance("final_gap_ratio")?);
    let ok = dec.passed && fin.passed;
    out.checks.push(dec);
    out.checks.push(fin);
    Ok(ok)
}

fn decomposition_check(t: &ConvergenceTable, out: &mut Outcome) {
    let defect = t.rows.iter().map(|r| r.decomposition_defect).fold(0.0, f64::max);
    out.checks.push(Check::at_most("decomposition_defect", defect, 1e-12));
}

fn theorem_run(cfg: &ScenarioConfig, s: &Setup) -> Result<(Outcome, ConvergenceTable)> {
    let mut out = Outcome::new(Expectation::Theorem);
    hypotheses(cfg, s, &mut out)?;
    require_hypotheses(cfg, &mut out)?;
    let t = table(cfg, s, &s.psi)?;
    out.diagnostics.l_sup = Some(t.l_sup);
    decomposition_check(&t, &mut out);
    Ok((out, t))
}

fn divcurl3(cfg: &ScenarioConfig, s: &Setup) -> Result<Outcome> {
    let (mut out, t) = theorem_run(cfg, s)?;
    let one = GridField::real_scalar_from_fn(s.grid, |_| 1.0)?;
    let flat = table(cfg, s, &one)?;
    let flat_max = flat.rows.iter().map(|r| r.pairing.norm()).fold(0.0, f64::max);
    out.checks.push(Check::at_most("constant_test_pairing", flat_max, cfg.tolerance("constant_test_pairing")?));
    out.diagnostics.extras.insert(
        "constant_test_pairings".into(),
        json!(flat.rows.iter().map(|r| r.pairing.norm()).collect::<Vec<_>>()),
    );
    out.conclusion = Some(gap_checks(cfg, &t, &mut out)?);
    out.table = Some(t);
    Ok(out)
}

fn counterexample(cfg: &ScenarioConfig, s: &Setup) -> Result<Outcome> {
    let mut out = Outcome::new(Expectation::Counterexample);
    hypotheses(cfg, s, &mut out)?;
    let h = &out.hypotheses;
    let weak_ok = h.weak_convergence.as_ref().is_some_and(|w| w.passes);
    let pre_ok = h.precompactness.as_ref().is_some_and(|p| p.verdict == ProxyVerdict::ConsistentWithPrecompactness);
    let residual = h.cone.as_ref().map_or(0.0, |c| c.max_residual);
    out.checks.push(Check::holds("weak_convergence", weak_ok));
    out.checks.push(Check::holds("precompactness_proxy", pre_ok));
    // the cone hypothesis must fail: the residual is far above the vanishing tolerance
    out.checks.push(Check::at_least("cone_residual", residual, 1e3 * cfg.tolerance("cone_residual")?));
    let t = table(cfg, s, &s.psi)?;
    out.diagnostics.l_sup = Some(t.l_sup);
    let exact = PI * (2.0 * PI).powi(s.grid.dim() as i32 - 1);
    let worst = t.rows.iter().map(|r| (r.pairing - Complex64::new(exact, 0.0)).norm()).fold(0.0, f64::max);
    out.checks.push(Check::at_most("pairing_exactness", worst, cfg.tolerance("pairing_exactness")?));
    let final_gap = t.gaps().last().copied().unwrap_or(0.0);
    out.checks.push(Check::at_least("final_gap_stalls", final_gap, 0.5 * exact));
    out.conclusion = Some(false);
    out.table = Some(t);
    Ok(out)
}

fn tartar_const(cfg: &ScenarioConfig, s: &Setup) -> Result<Outcome> {
    let (mut out, t) = theorem_run(cfg, s)?;
    let final_gap = t.gaps().last().copied().unwrap_or(0.0);
    let fin = Check::at_most("final_gap", final_gap, cfg.tolerance("final_gap")?);
    out.conclusion = Some(fin.passed);
    out.checks.push(fin);
    for &delta in cfg.params.deltas.as_deref().unwrap_or(&[]) {
        let k = cosphere_samples(&s.x_points, s.grid.dim(), cfg.params.sphere_samples.unwrap_or(32));
        let r = garding_constant(&s.q, &s.symbol.principal, &k, delta, cfg.params.vector_samples.unwrap_or(200))?;
        out.checks.push(Check::at_least(format!("garding_resample_slack_{delta}"), r.violation_on_resample, -1e-8));
        out.garding.push(r);
    }
    out.table = Some(t);
    Ok(out)
}

fn lattice_centers(dim: usize, m: usize) -> Vec<Vec<f64>> {
    let total = m.pow(dim as u32);
    (0..total)
        .map(|flat| {
            let mut rem = flat;
            let mut c = vec![0.0; dim];
            for d in (0..dim).rev() {
                c[d] = 2.0 * PI * (rem % m) as f64 / m as f64;
                rem /= m;
            }
            c
        })
        .collect()
}

/// Coarsest lattice of balls, each with the largest radius keeping the
/// coefficients of `q` within `γ`, that covers every grid node.
fn freezing_cover(grid: &TorusGrid, q: &QuadraticForm, gamma: f64, seed: f64) -> Result<PartitionOfUnity> {
    let opts = OscillationOptions {
        max_radius: seed,
        ..OscillationOptions::for_dim(grid.dim())
    };
    let coeffs = |x: &[f64]| vec![q.coeff(x)];
    for m in 1..=16 {
        let centers = lattice_centers(grid.dim(), m);
        let radii = centers
            .par_iter()
            .map(|c| oscillation_radius(&coeffs, c, gamma, opts))
            .collect::<Result<Vec<_>>>()?;
        match partition_of_unity(grid, &centers, &radii) {
            Ok(p) => return Ok(p),
            Err(Error::CoverFailure { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidParameter(format!("no lattice cover with oscillation below {gamma}")))
}

/// Freezing error of `Q` against the partition, with `γ` either given or
/// measured on the grid nodes of each ball.
fn freezing(
    cfg: &ScenarioConfig,
    s: &Setup,
    pou: &PartitionOfUnity,
    gamma: Option<f64>,
    l_sup: f64,
) -> Result<FreezingDiagnostics> {
    let f = family(s)?;
    let grid = s.grid;
    let grid_oscillation: Vec<f64> = pou
        .bumps
        .par_iter()
        .zip(&pou.supports)
        .map(|(b, ball)| {
            let base = s.q.coeff(&ball.center);
            (0..grid.len())
                .filter(|&j| b.component(0)[j].re > 0.0)
                .map(|j| frobenius(&(s.q.coeff(&grid.point(j)) - &base)))
                .fold(0.0, f64::max)
        })
        .collect();
    let gamma = gamma.unwrap_or_else(|| grid_oscillation.iter().copied().fold(0.0, f64::max));
    let roots = pou.sqrt_bumps();
    let frozen: Vec<QuadraticForm> = pou.supports.iter().map(|b| s.q.freeze(&b.center)).collect();
    let one = GridField::real_scalar_from_fn(grid, |_| 1.0)?;
    let total_freeze_error = gamma * l_sup * l_sup;
    let per_k = cfg
        .family
        .k_list
        .par_iter()
        .map(|&k| {
            let u = f.member(k)?;
            let whole = weak_pairing(&s.q.eval_field(&u)?, &one, None)?;
            let mut pieces = Complex64::new(0.0, 0.0);
            let mut norms = Vec::with_capacity(roots.len());
            for (root, qf) in roots.iter().zip(&frozen) {
                let local = u.multiply_scalar_field(root)?;
                norms.push(local.l2_norm());
                pieces += weak_pairing(&qf.eval_field(&local)?, &one, None)?;
            }
            Ok((FreezeRow { k, measured: (whole - pieces).norm(), total_freeze_error }, norms))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut l_nu = vec![0.0f64; roots.len()];
    for (_, norms) in &per_k {
        for (a, b) in l_nu.iter_mut().zip(norms) {
            *a = a.max(*b);
        }
    }
    Ok(FreezingDiagnostics {
        gamma,
        balls: pou.supports.clone(),
        grid_oscillation,
        l_nu,
        rows: per_k.into_iter().map(|(r, _)| r).collect(),
    })
}

fn freeze_check(cfg: &ScenarioConfig, fz: &FreezingDiagnostics, out: &mut Outcome) -> Result<()> {
    let excess = fz
        .rows
        .iter()
        .map(|r| r.measured - r.total_freeze_error)
        .fold(f64::NEG_INFINITY, f64::max);
    out.checks.push(Check::at_most("freeze_bound_excess", excess, cfg.tolerance("freeze_slack")?));
    Ok(())
}

fn params_gamma(cfg: &ScenarioConfig) -> Result<f64> {
    cfg.params
        .gamma
        .ok_or_else(|| Error::Config(format!("scenario {} needs params.gamma", cfg.scenario)))
}

fn variable_q(cfg: &ScenarioConfig, s: &Setup) -> Result<Outcome> {
    let (mut out, t) = theorem_run(cfg, s)?;
    out.conclusion = Some(gap_checks(cfg, &t, &mut out)?);
    let gamma = params_gamma(cfg)?;
    let pou = freezing_cover(&s.grid, &s.q, gamma, cfg.params.seed_radius.unwrap_or(1.0))?;
    let fz = freezing(cfg, s, &pou, Some(gamma), t.l_sup)?;
    let worst = fz.grid_oscillation.iter().copied().fold(0.0, f64::max);
    out.checks.push(Check::at_most("grid_oscillation", worst, gamma));
    freeze_check(cfg, &fz, &mut out)?;
    out.diagnostics.freezing = Some(fz);
    out.table = Some(t);
    Ok(out)
}

fn charts(cfg: &ScenarioConfig, grid: &TorusGrid) -> Result<PartitionOfUnity> {
    let charts = cfg
        .params
        .charts
        .as_ref()
        .ok_or_else(|| Error::Config(format!("scenario {} needs params.charts", cfg.scenario)))?;
    let centers: Vec<Vec<f64>> = charts.iter().map(|c| c.center.clone()).collect();
    let radii: Vec<f64> = charts.iter().map(|c| c.radius).collect();
    partition_of_unity(grid, &centers, &radii)
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

fn variable_symbol(cfg: &ScenarioConfig, s: &Setup) -> Result<Outcome> {
    let (mut out, t) = theorem_run(cfg, s)?;
    out.conclusion = Some(gap_checks(cfg, &t, &mut out)?);
    let pou = charts(cfg, &s.grid)?;
    let roots = pou.sqrt_bumps();
    let f = family(s)?;
    let a = &s.symbol.total;
    let order = a.order();
    let sums = cfg
        .family
        .k_list
        .par_iter()
        .map(|&k| {
            let u = f.member(k)?;
            roots
                .iter()
                .map(|r| sobolev_norm(&commutator_apply(a, r, &u)?, -order))
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<f64>>>()?;
    let ks: Vec<f64> = cfg.family.k_list.iter().map(|&k| k as f64).collect();
    let slope = log_slope(&ks, &sums);
    out.checks.push(Check::at_most("commutator_slope", slope, cfg.tolerance("commutator_slope_max")?));
    out.diagnostics.extras.insert("commutator_h_minus_s".into(), json!(sums));
    out.diagnostics.extras.insert("commutator_slope".into(), json!(slope));
    out.diagnostics.extras.insert("charts".into(), json!(pou.supports));
    out.table = Some(t);
    Ok(out)
}

fn manifold_minkowski(cfg: &ScenarioConfig, s: &Setup) -> Result<Outcome> {
    let (mut out, t) = theorem_run(cfg, s)?;
    let mut ok = gap_checks(cfg, &t, &mut out)?;
    let cross: Vec<f64> = t.rows.iter().map(|r| r.cross.norm()).collect();
    let ratio = cross.last().copied().unwrap_or(0.0) / (cross.first().copied().unwrap_or(0.0) + 1e-16);
    let c = Check::at_most("final_cross_ratio", ratio, cfg.tolerance("final_cross_ratio")?);
    ok &= c.passed;
    out.checks.push(c);
    let ubar_norm = family(s)?.weak_limit().l2_norm();
    out.checks.push(Check::at_least("ubar_nonzero", ubar_norm, 1e-8));
    out.conclusion = Some(ok);

    let bundle_name = cfg
        .bundle_metric
        .as_deref()
        .ok_or_else(|| Error::Config("manifold scenario needs bundle_metric".into()))?;
    let h = BundleMetric::builtin(bundle_name)?;
    let neg = h.signature().iter().filter(|&&v| v < 0).count();
    out.checks.push(Check::at_least("bundle_metric_negative_directions", neg as f64, 1.0));
    let g_index = s.metric.validate(&crate::symbols::chart_check_points(s.grid.dim()))?;
    let f = family(s)?;
    let origin = vec![0.0; s.grid.dim()];
    let weighted = cfg
        .family
        .k_list
        .iter()
        .map(|&k| weighted_sobolev_norm_sq_at(&f.member(k)?, &s.metric, &h, 0.0, &origin).map(f64::sqrt))
        .collect::<Result<Vec<_>>>()?;
    let rho: Vec<f64> = s.density.component(0).iter().map(|z| z.re).collect();
    let extras = &mut out.diagnostics.extras;
    extras.insert("metric_index".into(), json!(g_index));
    extras.insert("bundle_signature".into(), json!(h.signature()));
    extras.insert("weighted_l2_norms".into(), json!(weighted));
    extras.insert(
        "density_range".into(),
        json!([rho.iter().copied().fold(f64::INFINITY, f64::min), rho.iter().copied().fold(0.0, f64::max)]),
    );
    extras.insert("cross_abs".into(), json!(cross));
    out.table = Some(t);
    Ok(out)
}

fn garding(cfg: &ScenarioConfig, s: &Setup) -> Result<Outcome> {
    let mut out = Outcome::new(Expectation::Identity);
    let deltas = cfg
        .params
        .deltas
        .clone()
        .ok_or_else(|| Error::Config("garding scenario needs params.deltas".into()))?;
    let k = cosphere_samples(&s.x_points, s.grid.dim(), cfg.params.sphere_samples.unwrap_or(64));
    let closed_form = cfg.symbol == "proj_first" && cfg.quadform == "proj_garding";
    let slack_tol = cfg.tolerance("resample_slack")?;
    for delta in deltas {
        let r = garding_constant(&s.q, &s.symbol.principal, &k, delta, cfg.params.vector_samples.unwrap_or(400))?;
        if closed_form {
            let exact = 1.0 - delta;
            out.checks.push(Check::at_most(
                format!("relative_error_delta_{delta}"),
                (r.constant - exact).abs() / exact,
                cfg.tolerance("relative_error")?,
            ));
        }
        out.checks.push(Check::at_least(format!("resample_slack_delta_{delta}"), r.violation_on_resample, slack_tol));
        out.garding.push(r);
    }
    out.diagnostics.extras.insert("closed_form".into(), json!(closed_form));
    Ok(out)
}

/// Jacobian of a named map, written out independently of [`Diffeomorphism`].
fn reference_jacobian(name: &str, dim: usize, x: &[f64]) -> Result<(RMat, bool)> {
    let bad = || Error::Config(format!("unknown diffeomorphism {name:?}"));
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    if let Some(c) = name.strip_prefix("scale:") {
        return Ok((RMat::identity(dim, dim) * num(c)?, true));
    }
    if let Some(a) = name.strip_prefix("rotation:") {
        let (sn, cs) = num(a)?.sin_cos();
        let mut m = RMat::identity(dim, dim);
        m[(0, 0)] = cs;
        m[(0, 1)] = -sn;
        m[(1, 0)] = sn;
        m[(1, 1)] = cs;
        return Ok((m, true));
    }
    if name == "shear" {
        let mut m = RMat::identity(dim, dim);
        m[(0, 1)] = 1.0;
        return Ok((m, true));
    }
    if let Some(a) = name.strip_prefix("sine:") {
        let a = num(a)?;
        return Ok((RMat::from_fn(dim, dim, |i, j| if i == j { 1.0 + a * x[i].cos() } else { 0.0 }), false));
    }
    Err(bad())
}

fn diffeomorphism(name: &str, dim: usize) -> Result<Diffeomorphism> {
    let bad = || Error::Config(format!("unknown diffeomorphism {name:?}"));
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    if let Some(c) = name.strip_prefix("scale:") {
        return Diffeomorphism::scaling(dim, num(c)?);
    }
    if let Some(a) = name.strip_prefix("rotation:") {
        return Diffeomorphism::plane_rotation(dim, num(a)?);
    }
    if name == "shear" {
        return Diffeomorphism::shear(dim);
    }
    if let Some(a) = name.strip_prefix("sine:") {
        return Diffeomorphism::sine_perturbation(dim, num(a)?);
    }
    Err(bad())
}

fn sample_pairs(dim: usize, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = sampling::rng(sampling::DEFAULT_SEED ^ 0x0b0b);
    let dirs = sampling::real_unit_vectors(dim, count, sampling::DEFAULT_SEED ^ 0x0c0c);
    dirs.into_iter()
        .enumerate()
        .map(|(i, d)| {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-PI..PI)).collect();
            let mag = 1.0 + (i % 3) as f64;
            (x, d.into_iter().map(|c| c * mag).collect())
        })
        .collect()
}

fn apply_transpose(m: &RMat, v: &[f64]) -> Vec<f64> {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)] * v[i]).sum()).collect()
}

/// Worst relative defect of `q(χ(x), η) = p(x, ᵗDχ(x) η)` over the samples.
fn symbol_defect(p: &PrincipalSymbol, name: &str, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<(f64, bool)> {
    let chi = diffeomorphism(name, p.dim())?;
    let q = pushforward(p, &chi)?;
    let mut worst: f64 = 0.0;
    let mut linear = true;
    for (x, eta) in pairs {
        let (jac, lin) = reference_jacobian(name, p.dim(), x)?;
        linear &= lin;
        let lhs = q.eval(&chi.forward(x), eta);
        let rhs = p.eval(x, &apply_transpose(&jac, eta));
        worst = worst.max(frobenius(&(lhs - &rhs)) / frobenius(&rhs).max(1.0));
    }
    Ok((worst, linear))
}

fn kernel_mismatches(p: &PrincipalSymbol, name: &str, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<usize> {
    let chi = diffeomorphism(name, p.dim())?;
    let q = pushforward(p, &chi)?;
    let mut bad = 0;
    for (x, eta) in pairs {
        let xi = apply_transpose(&chi.jacobian(x), eta);
        let a = kernel_at(&q, &chi.forward(x), eta, KERNEL_TOL)?.dim();
        let b = kernel_at(p, x, &xi, KERNEL_TOL)?.dim();
        if a != b {
            bad += 1;
        }
    }
    Ok(bad)
}

/// `Op(χ_*p)(u∘χ⁻¹)` against `(Op(p)u)∘χ⁻¹` for the integer shear, which
/// permutes grid nodes.
fn shear_operator_defect(p: &PrincipalSymbol, grid: &TorusGrid) -> Result<f64> {
    let n = grid.points_per_axis();
    let chi = Diffeomorphism::shear(grid.dim())?;
    let q = pushforward(p, &chi)?;
    let origin = vec![0.0; grid.dim()];
    let (pp, qq) = (p.clone(), q.clone());
    let (o1, o2) = (origin.clone(), origin);
    let op_p = Symbol::multiplier("p", grid.dim(), p.order(), p.in_rank(), p.out_rank(), move |xi| pp.eval(&o1, xi));
    let op_q = Symbol::multiplier("q", grid.dim(), q.order(), q.in_rank(), q.out_rank(), move |xi| qq.eval(&o2, xi));

    let mut rng = sampling::rng(sampling::DEFAULT_SEED ^ 0x0d0d);
    let band = (n / 8) as i64;
    let waves: Vec<(Vec<i64>, f64, f64)> = (0..6)
        .map(|_| {
            let k = (0..grid.dim()).map(|_| rng.random_range(-band..=band)).collect();
            (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    let u = GridField::from_fn(*grid, p.in_rank(), |x| {
        let v: f64 = waves
            .iter()
            .map(|(k, c, ph)| c * (k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum::<f64>() + ph).cos())
            .sum();
        vec![Complex64::new(v, 0.0); p.in_rank()]
    })?;
    let pull = |f: &GridField| -> Result<GridField> {
        let comps = f
            .components()
            .iter()
            .map(|c| {
                (0..grid.len())
                    .map(|j| {
                        let mut idx = grid.multi_index(j);
                        idx[0] = (idx[0] + n - idx[1]) % n;
                        c[grid.flat_index(&idx)]
                    })
                    .collect()
            })
            .collect();
        GridField::new(*grid, comps)
    };
    let lhs = apply(&op_q, &pull(&u)?)?;
    let rhs = pull(&apply(&op_p, &u)?)?;
    Ok(lhs.sub(&rhs)?.max_abs() / rhs.max_abs().max(1.0))
}

fn pushforward_law(cfg: &ScenarioConfig, s: &Setup) -> Result<Outcome> {
    let mut out = Outcome::new(Expectation::Identity);
    let names = cfg
        .params
        .diffeomorphisms
        .clone()
        .ok_or_else(|| Error::Config("pushforward scenario needs params.diffeomorphisms".into()))?;
    let count = cfg.params.sample_points.unwrap_or(100);
    let dim = s.grid.dim();
    let pairs = sample_pairs(dim, count);
    let mut defects = BTreeMap::new();
    let scaled = registry::builtin(&format!("scaled:{}", cfg.symbol), dim)?.principal;
    for p in [&s.symbol.principal, &scaled] {
        for name in &names {
            let (defect, linear) = symbol_defect(p, name, &pairs)?;
            let tol = if linear { cfg.tolerance("linear_defect")? } else { cfg.tolerance("nonlinear_defect")? };
            out.checks.push(Check::at_most(format!("defect_{}_{name}", p.name()), defect, tol));
            defects.insert(format!("{}|{name}", p.name()), defect);
        }
    }
    if let Some(ks) = &cfg.params.kernel_symbol {
        let kdim = registry::natural_dim(ks).unwrap_or(dim);
        let kp = registry::builtin(ks, kdim)?.principal;
        let kpairs = sample_pairs(kdim, count);
        let mut total = 0;
        for name in &names {
            total += kernel_mismatches(&kp, name, &kpairs)?;
        }
        out.checks.push(Check::at_most("kernel_dimension_mismatches", total as f64, 0.0));
    }
    if dim >= 2 && s.symbol.total.is_multiplier() {
        let d = shear_operator_defect(&s.symbol.principal, &s.grid)?;
        out.checks.push(Check::at_most("operator_defect_shear", d, cfg.tolerance("operator_defect")?));
    }
    out.diagnostics.extras.insert("defects".into(), json!(defects));
    out.diagnostics.extras.insert("sample_points".into(), json!(count));
    Ok(out)
}

fn two_chart(cfg: &ScenarioConfig, s: &Setup) -> Result<Outcome> {
    let (mut out, t) = theorem_run(cfg, s)?;
    let final_gap = t.gaps().last().copied().unwrap_or(0.0);
    let first_gap = t.gaps().first().copied().unwrap_or(0.0);
    out.conclusion = Some(final_gap <= first_gap);
    let pou = charts(cfg, &s.grid)?;
    let roots = pou.sqrt_bumps();
    let f = family(s)?;
    let defects = cfg
        .family
        .k_list
        .par_iter()
        .map(|&k| {
            let u = f.member(k)?;
            let whole = weak_pairing(&s.q.eval_field(&u)?, &s.psi, None)?;
            let mut sum = Complex64::new(0.0, 0.0);
            for r in &roots {
                sum += weak_pairing(&s.q.eval_field(&u.multiply_scalar_field(r)?)?, &s.psi, None)?;
            }
            Ok((whole - sum).norm() / whole.norm().max(1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = defects.iter().copied().fold(0.0, f64::max);
    out.checks.push(Check::at_most("localization_defect", worst, cfg.tolerance("localization")?));
    let fz = freezing(cfg, s, &pou, None, t.l_sup)?;
    freeze_check(cfg, &fz, &mut out)?;
    out.diagnostics.extras.insert("localization_defects".into(), json!(defects));
    out.diagnostics.freezing = Some(fz);
    out.table = Some(t);
    Ok(out)
}
