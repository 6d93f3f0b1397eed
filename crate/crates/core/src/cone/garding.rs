//! Sampled constants for `Re Q^ℂ(v) ≥ −δ|v|² − C|σ(x, ξ)v|²`.

use num_complex::Complex64;
use serde::Serialize;

use super::{kernel_at, restricted_form, QuadraticForm, KERNEL_TOL};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_part};
use crate::sampling;
use crate::symbols::{MatrixSymbol, PrincipalSymbol};
use crate::CMat;

/// Factor applied to the estimated constant on the verification resample.
pub const SAFETY_FACTOR: f64 = 1.1;

#[derive(Debug, Clone, Serialize)]
pub struct GardingReport {
    pub delta: f64,
    pub constant: f64,
    pub safety_factor: f64,
    /// Most negative `Re Q + δ|v|² + C|σv|²` on the estimation sample.
    pub estimation_slack: f64,
    /// Most negative `Re Q + δ|v|² + 1.1·C|σv|²` on a 10× denser resample.
    pub violation_on_resample: f64,
    /// Smallest `Re Q` over unit cone vectors (the hypothesis check).
    pub min_cone_re_q: f64,
    pub covector_samples: usize,
    pub vector_samples: usize,
    /// One extra probe per covector: the maximizer of `(−Re Q − δ|v|²)/|σv|²`.
    pub extremal_probes: usize,
    pub resample_vectors: usize,
}

/// `(x, ±ξ)` pairs with `ξ` on the unit sphere, for every `x` in `x_points`.
pub fn cosphere_samples(x_points: &[Vec<f64>], dim: usize, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut dirs = sampling::sphere_directions(dim, count);
    let neg: Vec<Vec<f64>> = dirs.iter().map(|d| d.iter().map(|c| -c).collect()).collect();
    dirs.extend(neg);
    x_points
        .iter()
        .flat_map(|x| dirs.iter().map(move |xi| (x.clone(), xi.clone())))
        .collect()
}

/// `e_j`, `(e_j ± e_k)/√2`, `(e_j ± i e_k)/√2`.
fn structured_vectors(rank: usize) -> Vec<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::new();
    for j in 0..rank {
        let mut e = vec![zero; rank];
        e[j] = Complex64::new(1.0, 0.0);
        out.push(e);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..rank {
        for k in j + 1..rank {
            for w in [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)] {
                let mut v = vec![zero; rank];
                v[j] = Complex64::new(h, 0.0);
                v[k] = w;
                out.push(v);
            }
        }
    }
    out
}

/// Unit vector maximizing `(−Re Q − δ|v|²)/|σv|²` at one covector.
///
/// Bisects on the smallest `C` with `Re Q + δ|v|² + C|σv|² ≥ 0` for all `v`
/// and returns the top eigenvector of `−(H + δ) − C S` there.
fn extremal_vector(qm: &CMat, sigma: &CMat, delta: f64) -> Option<Vec<Complex64>> {
    let h = hermitian_part(&qm.transpose());
    let s = sigma.adjoint() * sigma;
    let rank = h.nrows();
    let a = -(h + CMat::identity(rank, rank) * Complex64::new(delta, 0.0));
    let top = |c: f64| {
        let (vals, vecs) = hermitian_eigen(&(&a - &s * Complex64::new(c, 0.0)));
        (vals[rank - 1], vecs.column(rank - 1).iter().copied().collect::<Vec<_>>())
    };
    if top(0.0).0 <= 0.0 {
        return None;
    }
    let mut hi = 1.0;
    while top(hi).0 > 0.0 {
        hi *= 2.0;
        if hi > 1e15 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if top(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(top(lo).1)
}

struct Terms {
    re_q: f64,
    norm_sq: f64,
    sigma_sq: f64,
}

fn terms(qm: &CMat, sigma: &CMat, v: &[Complex64]) -> Terms {
    let re_q = super::quadform::polar_with(qm, v, v).re;
    let norm_sq = v.iter().map(|z| z.norm_sqr()).sum();
    let sigma_sq = (0..sigma.nrows())
        .map(|i| {
            v.iter()
                .enumerate()
                .map(|(j, z)| sigma[(i, j)] * z)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum();
    Terms { re_q, norm_sq, sigma_sq }
}

/// Estimates the smallest `C` with `Re Q^ℂ(v) ≥ −δ|v|² − C|σ(x, ξ)v|²` over
/// the sampled `(x, ξ)` and unit complex `v`.
///
/// The hypothesis `Re Q ≥ 0` on the cone is checked first, exactly on each
/// sampled kernel (smallest eigenvalue of the restricted Hermitian form).
pub fn garding_constant(
    q: &QuadraticForm,
    p: &PrincipalSymbol,
    k_samples: &[(Vec<f64>, Vec<f64>)],
    delta: f64,
    vector_samples: usize,
) -> Result<GardingReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("δ must be positive, got {delta}")));
    }
    if q.rank() != p.in_rank() {
        return Err(Error::Shape(format!(
            "quadratic form of rank {} with a symbol acting on rank {}",
            q.rank(),
            p.in_rank()
        )));
    }
    if k_samples.is_empty() {
        return Err(Error::InvalidParameter("empty covector sample".into()));
    }

    let mut min_cone = f64::INFINITY;
    let mut prepared = Vec::with_capacity(k_samples.len());
    for (x, xi) in k_samples {
        let qm = q.coeff(x);
        let sigma = p.evaluate(x, xi)?;
        let cone = kernel_at(p, x, xi, KERNEL_TOL)?;
        if cone.dim() > 0 {
            let basis = crate::RMat::from_fn(q.rank(), cone.dim(), |i, j| cone.real_kernel_basis[j][i]);
            let h = restricted_form(&qm, &basis);
            let lo = hermitian_eigen(&hermitian_part(&h)).0[0];
            let scale = qm.iter().map(|z| z.norm()).fold(1.0, f64::max);
            if lo < -1e-10 * scale {
                return Err(Error::HypothesisViolation(format!(
                    "Re Q = {lo:e} < 0 on the cone at x = {x:?}, ξ = {xi:?}"
                )));
            }
            min_cone = min_cone.min(lo);
        }
        prepared.push((qm, sigma));
    }

    let mut vectors = structured_vectors(q.rank());
    vectors.extend(sampling::complex_unit_vectors(q.rank(), vector_samples, sampling::DEFAULT_SEED));
    let extremal: Vec<Option<Vec<Complex64>>> = prepared.iter().map(|(qm, sigma)| extremal_vector(qm, sigma, delta)).collect();
    let mut constant: f64 = 0.0;
    for ((qm, sigma), extra) in prepared.iter().zip(&extremal) {
        for v in vectors.iter().chain(extra) {
            let t = terms(qm, sigma, v);
            if t.sigma_sq > 1e-14 * t.norm_sq {
                constant = constant.max((-t.re_q - delta * t.norm_sq) / t.sigma_sq);
            }
        }
    }

    let none = vec![None; prepared.len()];
    let slack = |vs: &[Vec<Complex64>], extra: &[Option<Vec<Complex64>>], c: f64| {
        let mut worst = f64::INFINITY;
        for ((qm, sigma), e) in prepared.iter().zip(extra) {
            for v in vs.iter().chain(e) {
                let t = terms(qm, sigma, v);
                worst = worst.min(t.re_q + delta * t.norm_sq + c * t.sigma_sq);
            }
        }
        worst
    };
    let estimation_slack = slack(&vectors, &extremal, constant);
    let resample = sampling::complex_unit_vectors(q.rank(), 10 * vector_samples.max(1), sampling::DEFAULT_SEED ^ 0xa5a5);
    let violation_on_resample = slack(&resample, &none, SAFETY_FACTOR * constant);

    Ok(GardingReport {
        delta,
        constant,
        safety_factor: SAFETY_FACTOR,
        estimation_slack,
        violation_on_resample,
        min_cone_re_q: if min_cone.is_finite() { min_cone } else { 0.0 },
        covector_samples: k_samples.len(),
        vector_samples: vectors.len(),
        extremal_probes: extremal.iter().flatten().count(),
        resample_vectors: resample.len(),
    })
}
