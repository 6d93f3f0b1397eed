//! Oscillatory families `u_k = ū + Σ a(x) λ sin(k ξ₀·x)` and the
//! convergence measurements run on them.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::QuadraticForm;
use crate::error::{Error, Result};
use crate::grid::{forward_fourier, frequency_split, weak_pairing, GridField, TorusGrid};
use crate::quantize::apply;
use crate::symbols::{MatrixSymbol, Symbol};

/// Relative magnitude below which Fourier coefficients do not count toward bandwidth.
const BANDWIDTH_FLOOR: f64 = 1e-13;
/// Gaps at or below this are treated as converged.
pub const GAP_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Sin,
    Cos,
}

/// One oscillating term `k^{−decay} a(x) λ φ(k ξ₀·x)` with `φ ∈ {sin, cos}`.
#[derive(Debug, Clone)]
pub struct OscillationMode {
    pub lambda: Vec<f64>,
    pub xi0: Vec<i64>,
    pub envelope: GridField,
    pub phase: Phase,
    /// Amplitude factor `k^{−decay}`; zero for a fixed amplitude.
    pub decay: f64,
}

/// Largest `|k|_∞` carrying non-negligible Fourier mass.
pub fn bandwidth(f: &GridField) -> Result<i64> {
    let spec = forward_fourier(f)?;
    let grid = spec.grid();
    let peak = spec
        .components()
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let mut bw = 0;
    for slot in 0..grid.len() {
        if spec.components().iter().any(|c| c[slot].norm() > BANDWIDTH_FLOOR * peak) {
            bw = bw.max(grid.frequency(slot).iter().map(|c| c.abs()).max().unwrap_or(0));
        }
    }
    Ok(bw)
}

/// `φ(k ξ₀·x_j)` with the phase reduced modulo `N` in integers.
fn carrier(grid: &TorusGrid, xi0: &[i64], k: i64, phase: Phase) -> Vec<f64> {
    let n = grid.points_per_axis() as i64;
    (0..grid.len())
        .map(|j| {
            let idx = grid.multi_index(j);
            let p: i64 = xi0.iter().zip(&idx).map(|(a, &i)| a * i as i64).sum::<i64>() * k;
            let t = 2.0 * PI * p.rem_euclid(n) as f64 / n as f64;
            match phase {
                Phase::Sin => t.sin(),
                Phase::Cos => t.cos(),
            }
        })
        .collect()
}

fn check_mode(grid: &TorusGrid, ubar_rank: usize, m: &OscillationMode) -> Result<()> {
    if m.lambda.len() != ubar_rank {
        return Err(Error::Shape(format!(
            "amplitude has {} entries, fiber rank is {ubar_rank}",
            m.lambda.len()
        )));
    }
    if m.xi0.len() != grid.dim() {
        return Err(Error::Shape(format!("direction has {} entries, grid dimension is {}", m.xi0.len(), grid.dim())));
    }
    if m.envelope.grid() != grid {
        return Err(Error::Shape("envelope lives on a different grid".into()));
    }
    m.envelope.ensure_scalar("envelope")
}

fn overflow_check(grid: &TorusGrid, xi0: &[i64], k: i64, bw: i64) -> Result<()> {
    let top = k.abs() * xi0.iter().map(|c| c.abs()).max().unwrap_or(0) + bw;
    if top >= grid.half() as i64 {
        return Err(Error::FrequencyOverflow(format!(
            "k = {k} along {xi0:?} with envelope bandwidth {bw} reaches frequency {top} ≥ N/2 = {}",
            grid.half()
        )));
    }
    Ok(())
}

fn add_mode(components: &mut [Vec<Complex64>], m: &OscillationMode, k: i64) {
    let grid = m.envelope.grid();
    let wave = carrier(grid, &m.xi0, k, m.phase);
    let amp = if m.decay == 0.0 { 1.0 } else { (k as f64).powf(-m.decay) };
    let env = m.envelope.component(0);
    for (comp, &l) in components.iter_mut().zip(&m.lambda) {
        if l == 0.0 {
            continue;
        }
        for ((c, w), e) in comp.iter_mut().zip(&wave).zip(env) {
            *c += e * (amp * l * w);
        }
    }
}

/// `ū + a(x) λ sin(k ξ₀·x)` sampled on the grid.
pub fn plane_oscillation(ubar: &GridField, lambda: &[f64], xi0: &[i64], envelope: &GridField, k: i64) -> Result<GridField> {
    let mode = OscillationMode {
        lambda: lambda.to_vec(),
        xi0: xi0.to_vec(),
        envelope: envelope.clone(),
        phase: Phase::Sin,
        decay: 0.0,
    };
    check_mode(ubar.grid(), ubar.rank(), &mode)?;
    overflow_check(ubar.grid(), xi0, k, bandwidth(envelope)?)?;
    let mut comps = ubar.components().to_vec();
    add_mode(&mut comps, &mode, k);
    GridField::new(*ubar.grid(), comps)
}

/// A weakly convergent family indexed by integers `k` (`ε_k = 1/k`).
#[derive(Debug, Clone)]
pub struct OscillatoryFamily {
    pub name: String,
    ubar: GridField,
    modes: Vec<OscillationMode>,
    bandwidths: Vec<i64>,
}

impl OscillatoryFamily {
    pub fn new(name: impl Into<String>, ubar: GridField, modes: Vec<OscillationMode>) -> Result<Self> {
        let mut bandwidths = Vec::with_capacity(modes.len());
        for m in &modes {
            check_mode(ubar.grid(), ubar.rank(), m)?;
            bandwidths.push(bandwidth(&m.envelope)?);
        }
        Ok(Self {
            name: name.into(),
            ubar,
            modes,
            bandwidths,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        self.ubar.grid()
    }

    pub fn rank(&self) -> usize {
        self.ubar.rank()
    }

    pub fn weak_limit(&self) -> &GridField {
        &self.ubar
    }

    pub fn modes(&self) -> &[OscillationMode] {
        &self.modes
    }

    /// Highest frequency reached by `u_k`, excluding `ū`.
    pub fn max_frequency(&self, k: i64) -> i64 {
        self.modes
            .iter()
            .zip(&self.bandwidths)
            .map(|(m, bw)| k.abs() * m.xi0.iter().map(|c| c.abs()).max().unwrap_or(0) + bw)
            .max()
            .unwrap_or(0)
    }

    /// Rejects `k` whose oscillation would alias.
    pub fn check_admissible(&self, k: i64) -> Result<()> {
        for (m, &bw) in self.modes.iter().zip(&self.bandwidths) {
            overflow_check(self.grid(), &m.xi0, k, bw)?;
        }
        Ok(())
    }

    /// `u_k`.
    pub fn member(&self, k: i64) -> Result<GridField> {
        if k <= 0 {
            return Err(Error::InvalidParameter(format!("family index must be positive, got {k}")));
        }
        self.check_admissible(k)?;
        let mut comps = self.ubar.components().to_vec();
        for m in &self.modes {
            add_mode(&mut comps, m, k);
        }
        GridField::new(*self.grid(), comps)
    }

    pub fn members(&self, k_list: &[i64]) -> Result<Vec<GridField>> {
        k_list.par_iter().map(|&k| self.member(k)).collect()
    }
}

fn gaussian_images(sigma: f64) -> i32 {
    (6.0 * sigma / (2.0 * PI)).ceil() as i32 + 1
}

/// Periodized 1-D Gaussian and its derivative at offset `t = x − c`.
fn periodic_gaussian_1d(t: f64, sigma: f64, images: i32) -> (f64, f64) {
    (-images..=images).fold((0.0, 0.0), |(g, dg), m| {
        let d = t + 2.0 * PI * m as f64;
        let e = (-d * d / (2.0 * sigma * sigma)).exp();
        (g + e, dg - d / (sigma * sigma) * e)
    })
}

fn check_bump(grid: &TorusGrid, center: &[f64], sigma: f64) -> Result<()> {
    if center.len() != grid.dim() || !(sigma > 0.0) {
        return Err(Error::InvalidParameter("bump needs a center in the grid dimension and σ > 0".into()));
    }
    Ok(())
}

/// `Π_d Σ_m exp(−(x_d − c_d + 2πm)²/(2σ²))`, smooth and periodic.
pub fn periodic_gaussian(grid: &TorusGrid, center: &[f64], sigma: f64) -> Result<GridField> {
    check_bump(grid, center, sigma)?;
    let images = gaussian_images(sigma);
    GridField::real_scalar_from_fn(*grid, |x| {
        x.iter()
            .zip(center)
            .map(|(&xd, &cd)| periodic_gaussian_1d(xd - cd, sigma, images).0)
            .product()
    })
}

/// `Σ_d ∂_d` of [`periodic_gaussian`]; odd about the center.
pub fn periodic_gaussian_divergence(grid: &TorusGrid, center: &[f64], sigma: f64) -> Result<GridField> {
    check_bump(grid, center, sigma)?;
    let images = gaussian_images(sigma);
    GridField::real_scalar_from_fn(*grid, |x| {
        let parts: Vec<(f64, f64)> = x
            .iter()
            .zip(center)
            .map(|(&xd, &cd)| periodic_gaussian_1d(xd - cd, sigma, images))
            .collect();
        (0..parts.len())
            .map(|d| {
                parts
                    .iter()
                    .enumerate()
                    .map(|(e, &(g, dg))| if e == d { dg } else { g })
                    .product::<f64>()
            })
            .sum()
    })
}

/// Test dictionary: `1`, `sin x_d`, `cos x_d`, an even bump at the origin and
/// an odd bump at `(π, …, π)`.
///
/// The bumps sit at centers where every `cos(k ξ₀·x)` (resp. `sin`) has
/// modulus one or zero, so pairings against plane waves decay monotonically.
pub fn test_dictionary(grid: &TorusGrid) -> Result<Vec<GridField>> {
    let mut out = vec![GridField::real_scalar_from_fn(*grid, |_| 1.0)?];
    for d in 0..grid.dim() {
        out.push(GridField::real_scalar_from_fn(*grid, |x| x[d].sin())?);
        out.push(GridField::real_scalar_from_fn(*grid, |x| x[d].cos())?);
    }
    out.push(periodic_gaussian(grid, &vec![0.0; grid.dim()], 0.5)?);
    out.push(periodic_gaussian_divergence(grid, &vec![PI; grid.dim()], 0.7)?);
    Ok(out)
}

/// Whether a gap sequence is non-increasing, ignoring noise below [`GAP_FLOOR`].
pub fn non_increasing(gaps: &[f64]) -> bool {
    gaps.windows(2).all(|w| w[1] <= w[0] || w[1] <= GAP_FLOOR)
}

/// Gaps below this fraction of `‖u_k − ū‖‖ψ‖` are roundoff.
pub const GAP_RELATIVE_FLOOR: f64 = 1e-10;

fn non_increasing_scaled(gaps: &[f64], scales: &[f64]) -> bool {
    gaps.windows(2)
        .zip(&scales[1..])
        .all(|(w, &sc)| w[1] <= w[0] || w[1] <= GAP_FLOOR.max(GAP_RELATIVE_FLOOR * sc))
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakConvergenceReport {
    pub k_list: Vec<i64>,
    /// `max_j |⟨u_k^j − ū^j, ψ⟩|` per test function (rows) and k (columns).
    pub gaps: Vec<Vec<f64>>,
    pub max_gap: Vec<f64>,
    pub monotone: bool,
    pub final_gap: f64,
    pub tolerance: f64,
    pub passes: bool,
}

/// Pairs `u_k − ū` against every test function.
pub fn check_weak_convergence(f: &OscillatoryFamily, tests: &[GridField], k_list: &[i64], tolerance: f64) -> Result<WeakConvergenceReport> {
    let members = f.members(k_list)?;
    let mut gaps = vec![vec![0.0; k_list.len()]; tests.len()];
    let mut scales = vec![vec![0.0; k_list.len()]; tests.len()];
    for (col, u) in members.iter().enumerate() {
        let d = u.sub(f.weak_limit())?;
        for (row, psi) in tests.iter().enumerate() {
            scales[row][col] = d.l2_norm() * psi.l2_norm();
            let mut worst: f64 = 0.0;
            for j in 0..d.rank() {
                let c = GridField::from_parts(*d.grid(), vec![d.component(j).to_vec()]);
                worst = worst.max(weak_pairing(&c, psi, None)?.norm());
            }
            gaps[row][col] = worst;
        }
    }
    let max_gap: Vec<f64> = (0..k_list.len())
        .map(|c| gaps.iter().map(|r| r[c]).fold(0.0, f64::max))
        .collect();
    let monotone = gaps.iter().zip(&scales).all(|(r, sc)| non_increasing_scaled(r, sc));
    let final_gap = max_gap.last().copied().unwrap_or(0.0);
    Ok(WeakConvergenceReport {
        k_list: k_list.to_vec(),
        gaps,
        max_gap,
        monotone,
        final_gap,
        tolerance,
        passes: monotone && final_gap <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxyVerdict {
    ConsistentWithPrecompactness,
    NotPrecompact,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrecompactReport {
    pub order: f64,
    pub n_cut: Vec<f64>,
    /// `sup_k ‖(Op(a)u_k)_{|k| > N_cut}‖_{H^{−s}}` per cutoff.
    pub tails: Vec<f64>,
    /// Cutoffs below the family's top frequency; only these carry information.
    pub informative: Vec<bool>,
    pub verdict: ProxyVerdict,
}

/// Tails below this count as vanished.
pub const TAIL_FLOOR: f64 = 1e-10;
/// The last informative tail must drop below this fraction of the first.
pub const TAIL_DECAY: f64 = 0.25;

/// High-frequency tail proxy for precompactness of `{Op(a)u_k}` in `H^{−s}`.
pub fn check_precompact_proxy(f: &OscillatoryFamily, a: &Symbol, n_cut_list: &[f64], k_list: &[i64]) -> Result<PrecompactReport> {
    if n_cut_list.is_empty() || k_list.is_empty() {
        return Err(Error::InvalidParameter("need cutoffs and family indices".into()));
    }
    let s = a.order();
    let images: Vec<_> = f
        .members(k_list)?
        .par_iter()
        .map(|u| apply(a, u).and_then(|v| forward_fourier(&v)))
        .collect::<Result<_>>()?;
    let mut tails = Vec::with_capacity(n_cut_list.len());
    for &cut in n_cut_list {
        let mut worst: f64 = 0.0;
        for spec in &images {
            let (_, high) = frequency_split(spec, cut)?;
            worst = worst.max(high.sobolev_norm_sq(-s).sqrt());
        }
        tails.push(worst);
    }
    let top = k_list.iter().map(|&k| f.max_frequency(k)).max().unwrap_or(0) as f64;
    let informative: Vec<bool> = n_cut_list.iter().map(|&c| c < top).collect();
    let used: Vec<f64> = tails.iter().zip(&informative).filter(|(_, &i)| i).map(|(&t, _)| t).collect();
    let verdict = match (used.first(), used.last()) {
        (Some(&first), Some(&last)) => {
            if last <= TAIL_FLOOR || (used.len() > 1 && last <= TAIL_DECAY * first) {
                ProxyVerdict::ConsistentWithPrecompactness
            } else {
                ProxyVerdict::NotPrecompact
            }
        }
        _ => ProxyVerdict::Inconclusive,
    };
    Ok(PrecompactReport {
        order: s,
        n_cut: n_cut_list.to_vec(),
        tails,
        informative,
        verdict,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub k: i64,
    pub epsilon: f64,
    pub pairing: Complex64,
    pub gap: f64,
    /// `⟨Q(u_k − ū), ψρ⟩`.
    pub fluctuation: Complex64,
    /// `⟨Q(ū), ψρ⟩`.
    pub mean: Complex64,
    /// `⟨q(u_k − ū, ū) + q(ū, u_k − ū), ψρ⟩`.
    pub cross: Complex64,
    /// Max pointwise defect of the three-term decomposition.
    pub decomposition_defect: f64,
    pub l2_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub target: Complex64,
    /// `sup_k ‖u_k‖_{L²}`.
    pub l_sup: f64,
}

#[derive(Serialize)]
struct CsvRow {
    k: i64,
    epsilon: f64,
    pairing_re: f64,
    pairing_im: f64,
    target_re: f64,
    target_im: f64,
    gap_abs: f64,
}

impl ConvergenceTable {
    pub fn gaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gap).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file)
            .map_err(|e| match e {
                Error::Serialization(m) => Error::Serialization(format!("{}: {m}", path.display())),
                other => other,
            })
    }

    pub fn write_csv_to<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(CsvRow {
                k: r.k,
                epsilon: r.epsilon,
                pairing_re: r.pairing.re,
                pairing_im: r.pairing.im,
                target_re: self.target.re,
                target_im: self.target.im,
                gap_abs: r.gap,
            })
            .map_err(|e| Error::Serialization(e.to_string()))?;
        }
        wr.flush().map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// `⟨Q^ℂ(u_k), ψρ⟩` against `⟨Q^ℂ(ū), ψρ⟩`, with the recentered split
/// `Q(u_k) = Q(u_k − ū) + Q(ū) + q(u_k − ū, ū) + q(ū, u_k − ū)`.
pub fn quadratic_pairing_limit(
    f: &OscillatoryFamily,
    q: &QuadraticForm,
    psi: &GridField,
    density: &GridField,
    k_list: &[i64],
) -> Result<ConvergenceTable> {
    if k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("k list must be increasing".into()));
    }
    let ubar = f.weak_limit();
    let pair = |field: &GridField| weak_pairing(field, psi, Some(density));
    let q_bar = q.eval_field(ubar)?;
    let target = pair(&q_bar)?;
    let rows: Vec<ConvergenceRow> = k_list
        .par_iter()
        .map(|&k| {
            let u = f.member(k)?;
            let d = u.sub(ubar)?;
            let q_u = q.eval_field(&u)?;
            let q_d = q.eval_field(&d)?;
            let cross = q.polar_field(&d, ubar)?.add(&q.polar_field(ubar, &d)?)?;
            let recombined = q_d.add(&q_bar)?.add(&cross)?;
            let pairing = pair(&q_u)?;
            Ok(ConvergenceRow {
                k,
                epsilon: 1.0 / k as f64,
                pairing,
                gap: (pairing - target).norm(),
                fluctuation: pair(&q_d)?,
                mean: target,
                cross: pair(&cross)?,
                decomposition_defect: q_u.sub(&recombined)?.max_abs(),
                l2_norm: u.l2_norm(),
            })
        })
        .collect::<Result<_>>()?;
    let l_sup = rows.iter().map(|r| r.l2_norm).fold(0.0, f64::max);
    Ok(ConvergenceTable { rows, target, l_sup })
}
