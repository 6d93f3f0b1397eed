//! Kohn–Nirenberg quantization `Op(a)u(x_j) = Σ_k e^{ik·x_j} a(x_j, k) û_k` on the torus.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{forward_fourier, inverse_fourier, GridField, SpectrumField, TorusGrid};
use crate::symbols::{MatrixSymbol, MultiplierFn, Symbol};

/// Largest `N^{2n}` accepted by the direct double sum.
pub const DIRECT_SUM_LIMIT: u64 = 1 << 31;

fn frequency_vector(grid: &TorusGrid, slot: usize) -> Vec<f64> {
    grid.frequency(slot).iter().map(|&k| k as f64).collect()
}

fn check_ranks(a: &Symbol, u: &GridField) -> Result<()> {
    if a.in_rank() != u.rank() {
        return Err(Error::Shape(format!(
            "symbol {} takes fiber rank {}, field has rank {}",
            a.name(),
            a.in_rank(),
            u.rank()
        )));
    }
    if a.dim() != u.grid().dim() {
        return Err(Error::Shape(format!(
            "symbol {} has dimension {}, grid has dimension {}",
            a.name(),
            a.dim(),
            u.grid().dim()
        )));
    }
    Ok(())
}

/// `b(k) û_k` at every admissible frequency.
fn multiply_spectrum(b: &MultiplierFn, spec: &SpectrumField, out_rank: usize) -> SpectrumField {
    let grid = *spec.grid();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; out_rank];
    for slot in 0..grid.len() {
        let m = b(&frequency_vector(&grid, slot));
        for (i, row) in out.iter_mut().enumerate() {
            row[slot] = (0..spec.rank()).map(|j| m[(i, j)] * spec.component(j)[slot]).sum();
        }
    }
    SpectrumField::from_parts(grid, out)
}

fn apply_separable(a: &Symbol, terms: &[crate::symbols::SeparableTerm], u: &GridField) -> Result<GridField> {
    let grid = *u.grid();
    let spec = forward_fourier(u)?;
    let mut acc = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; a.out_rank()];
    for term in terms {
        let v = inverse_fourier(&multiply_spectrum(&term.multiplier, &spec, a.out_rank()))?;
        let coeff: Vec<Complex64> = (0..grid.len()).map(|j| (term.coefficient)(&grid.point(j))).collect();
        for (dst, src) in acc.iter_mut().zip(v.components()) {
            for ((d, s), c) in dst.iter_mut().zip(src).zip(&coeff) {
                *d += c * s;
            }
        }
    }
    GridField::new(grid, acc)
}

fn apply_direct(a: &Symbol, u: &GridField) -> Result<GridField> {
    let grid = *u.grid();
    let cost = (grid.len() as u64).saturating_mul(grid.len() as u64);
    if cost > DIRECT_SUM_LIMIT {
        return Err(Error::InvalidInput(format!(
            "direct quantization of {} needs N^(2n) = {cost} > 2^31 operations; \
             supply a multiplier or separable symbol",
            a.name()
        )));
    }
    let spec = forward_fourier(u)?;
    let n = grid.points_per_axis() as i64;
    let freqs: Vec<Vec<i64>> = grid.frequencies();
    let out_rank = a.out_rank();
    let rows: Vec<Vec<Complex64>> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let x = grid.point(j);
            let idx = grid.multi_index(j);
            let mut acc = vec![Complex64::new(0.0, 0.0); out_rank];
            for (slot, k) in freqs.iter().enumerate() {
                let xi: Vec<f64> = k.iter().map(|&c| c as f64).collect();
                let m = a.eval(&x, &xi);
                // phase k·x_j = 2π (k·j mod N) / N, reduced in integers
                let p: i64 = k.iter().zip(&idx).map(|(&kc, &ic)| kc * ic as i64).sum::<i64>().rem_euclid(n);
                let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * p as f64 / n as f64);
                for (i, out) in acc.iter_mut().enumerate() {
                    let mut s = Complex64::new(0.0, 0.0);
                    for c in 0..spec.rank() {
                        s += m[(i, c)] * spec.component(c)[slot];
                    }
                    *out += phase * s;
                }
            }
            acc
        })
        .collect();
    let mut comps = vec![Vec::with_capacity(grid.len()); out_rank];
    for row in rows {
        for (c, v) in comps.iter_mut().zip(row) {
            c.push(v);
        }
    }
    GridField::new(grid, comps)
}

/// Applies `Op(a)` to `u`.
///
/// Multipliers cost one transform pair, separable symbols one pair per term;
/// anything else falls back to the `O(N^{2n})` direct sum.
pub fn apply(a: &Symbol, u: &GridField) -> Result<GridField> {
    check_ranks(a, u)?;
    let traits = a.traits();
    if traits.is_multiplier {
        let sym = a.clone();
        let origin = vec![0.0; a.dim()];
        let b: MultiplierFn = std::sync::Arc::new(move |xi| sym.eval(&origin, xi));
        let spec = forward_fourier(u)?;
        return inverse_fourier(&multiply_spectrum(&b, &spec, a.out_rank()));
    }
    if let Some(terms) = &traits.separable_terms {
        return apply_separable(a, terms, u);
    }
    apply_direct(a, u)
}

/// `[Op(a), ψ]u = Op(a)(ψu) − ψ Op(a)u`.
pub fn commutator_apply(a: &Symbol, psi: &GridField, u: &GridField) -> Result<GridField> {
    psi.ensure_scalar("commutator cutoff")?;
    let left = apply(a, &u.multiply_scalar_field(psi)?)?;
    let right = apply(a, u)?.multiply_scalar_field(psi)?;
    left.sub(&right)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderProbeReport {
    pub k_list: Vec<i64>,
    pub apply_norms: Vec<f64>,
    pub commutator_norms: Vec<f64>,
    /// Least-squares slope of `ln‖Op(a)u_k‖` against `ln k`; `None` when degenerate.
    pub apply_slope: Option<f64>,
    pub commutator_slope: Option<f64>,
    pub apply_degenerate: bool,
    pub commutator_degenerate: bool,
}

/// Norms below this fraction of `‖u_k‖` are treated as zero.
const NORM_FLOOR: f64 = 1e-12;

fn log_slope(ks: &[i64], norms: &[f64], floor: f64) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = ks
        .iter()
        .zip(norms)
        .filter(|(_, &v)| v > floor)
        .map(|(&k, &v)| ((k as f64).ln(), v.ln()))
        .unzip();
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx)
}

/// Growth rates of `Op(a)` and `[Op(a), ψ]` on `u_k = J^{-1/2}(1,…,1) e^{ik x₁}`.
pub fn smoothing_order_probe(a: &Symbol, psi: &GridField, k_list: &[i64]) -> Result<OrderProbeReport> {
    let grid = *psi.grid();
    if k_list.is_empty() {
        return Err(Error::InvalidParameter("empty k list".into()));
    }
    if k_list.windows(2).any(|w| w[0] >= w[1]) || k_list[0] <= 0 {
        return Err(Error::InvalidParameter("k list must be positive and increasing".into()));
    }
    let max_k = *k_list.last().unwrap();
    if 4 * max_k > grid.points_per_axis() as i64 {
        return Err(Error::FrequencyOverflow(format!(
            "largest k = {max_k} needs N ≥ {}, grid has N = {}",
            4 * max_k,
            grid.points_per_axis()
        )));
    }
    let rank = a.in_rank();
    let amp = 1.0 / (rank as f64).sqrt();
    let mut apply_norms = Vec::new();
    let mut commutator_norms = Vec::new();
    let mut floor = 0.0;
    for &k in k_list {
        let u = GridField::from_fn(grid, rank, |x| vec![Complex64::from_polar(amp, k as f64 * x[0]); rank])?;
        floor = NORM_FLOOR * u.l2_norm();
        apply_norms.push(apply(a, &u)?.l2_norm());
        commutator_norms.push(commutator_apply(a, psi, &u)?.l2_norm());
    }
    let apply_slope = log_slope(k_list, &apply_norms, floor);
    let commutator_slope = log_slope(k_list, &commutator_norms, floor);
    Ok(OrderProbeReport {
        k_list: k_list.to_vec(),
        apply_degenerate: apply_slope.is_none(),
        commutator_degenerate: commutator_slope.is_none(),
        apply_norms,
        commutator_norms,
        apply_slope,
        commutator_slope,
    })
}
