//! Pointwise operator cones `Λ_A(x) = ⋃_{ξ≠0} ker σ(x, ξ)`, vanishing
//! certificates for quadratic forms, and Gårding constants.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{complex_null_space, hermitian_eigen, hermitian_part, real_null_space};
use crate::sampling;
use crate::symbols::{MatrixSymbol, PrincipalSymbol};
use crate::{CMat, RMat};

mod garding;
mod quadform;

pub use garding::{cosphere_samples, garding_constant, GardingReport};
pub use quadform::{QuadraticForm, QUADFORM_NAMES};

/// Default kernel tolerance relative to the largest singular value.
pub const KERNEL_TOL: f64 = 1e-8;

/// Kernel of `σ(x, ξ)` at one covector.
#[derive(Debug, Clone, Serialize)]
pub struct ConeSample {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub kernel_basis: Vec<Vec<Complex64>>,
    pub real_kernel_basis: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
}

impl ConeSample {
    pub fn dim(&self) -> usize {
        self.real_kernel_basis.len()
    }

    /// Real kernel basis as the columns of a `J × r` matrix.
    fn basis_matrix(&self, rank: usize) -> RMat {
        RMat::from_fn(rank, self.dim(), |i, j| self.real_kernel_basis[j][i])
    }
}

/// Complex and real kernels of `σ(x, ξ)` by SVD.
pub fn kernel_at(p: &PrincipalSymbol, x: &[f64], xi: &[f64], tol: f64) -> Result<ConeSample> {
    if xi.iter().all(|&c| c == 0.0) {
        return Err(Error::InvalidCovector("cone kernels need ξ ≠ 0".into()));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("kernel tolerance {tol} outside (0, 1)")));
    }
    let m = p.evaluate(x, xi)?;
    let (singular_values, complex) = complex_null_space(&m, tol);
    let real = real_null_space(&m, tol);
    Ok(ConeSample {
        x: x.to_vec(),
        xi: xi.to_vec(),
        kernel_basis: complex.iter().map(|v| v.iter().copied().collect()).collect(),
        real_kernel_basis: real.iter().map(|v| v.iter().copied().collect()).collect(),
        singular_values,
    })
}

/// Kernels over `x_points` × a deterministic half-sphere of covectors; only
/// samples with a nontrivial real kernel are kept.
pub fn sample_cone(p: &PrincipalSymbol, x_points: &[Vec<f64>], sphere_samples: usize) -> Result<Vec<ConeSample>> {
    let n = p.dim();
    if sphere_samples < 2 * n {
        return Err(Error::InvalidParameter(format!(
            "need at least {} sphere samples in dimension {n}",
            2 * n
        )));
    }
    let dirs = sampling::sphere_directions(n, sphere_samples);
    let mut out = Vec::new();
    for x in x_points {
        for xi in &dirs {
            let s = kernel_at(p, x, xi, KERNEL_TOL)?;
            if s.dim() > 0 {
                out.push(s);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeWitness {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub lambda: Vec<Complex64>,
    pub value: Complex64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeCertificate {
    pub max_residual: f64,
    pub witness: Option<ConeWitness>,
    pub cone_samples: usize,
    pub probe_vectors: usize,
    /// No sampled covector has a nontrivial kernel.
    pub cone_empty: bool,
    /// Smallest `Re Q^ℂ` over unit vectors of the sampled cones.
    pub min_re_q: f64,
}

impl ConeCertificate {
    pub fn vanishes(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }
}

fn check_rank(q: &QuadraticForm, samples: &[ConeSample]) -> Result<()> {
    if let Some(s) = samples.first() {
        let r = s.singular_values.len();
        if s.real_kernel_basis.first().map_or(r, Vec::len) != q.rank() {
            return Err(Error::Shape(format!(
                "quadratic form of rank {} on a cone of rank {}",
                q.rank(),
                s.real_kernel_basis.first().map_or(r, Vec::len)
            )));
        }
    }
    Ok(())
}

/// `H` with `Q^ℂ(Bc) = c^H H c` for the real kernel basis `B`.
pub(crate) fn restricted_form(q_matrix: &CMat, basis: &RMat) -> CMat {
    let b = basis.map(|v| Complex64::new(v, 0.0));
    (b.transpose() * q_matrix * &b).transpose()
}

/// Unit coefficient vectors probing the restricted form: coordinate axes,
/// eigenvectors of its Hermitian and skew parts, and seeded combinations.
fn probe_coefficients(h: &CMat, probe_count: usize, seed: u64) -> Vec<DVector<Complex64>> {
    let r = h.nrows();
    let mut out: Vec<DVector<Complex64>> = (0..r)
        .map(|i| DVector::from_fn(r, |j, _| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)))
        .collect();
    let herm = hermitian_part(h);
    let skew = (h - h.adjoint()) * Complex64::new(0.0, -0.5);
    for m in [herm, skew] {
        let (_, vecs) = hermitian_eigen(&m);
        out.extend(vecs.column_iter().map(|c| c.into_owned()));
    }
    for v in sampling::complex_unit_vectors(r, probe_count, seed) {
        out.push(DVector::from_vec(v));
    }
    for v in sampling::real_unit_vectors(r, probe_count, seed ^ 1) {
        out.push(DVector::from_iterator(r, v.into_iter().map(|a| Complex64::new(a, 0.0))));
    }
    out
}

/// Replaces a numerically-in-span cone vector by the exact coordinate
/// vector it approximates, so residuals at axis-aligned kernels are exact.
fn snap(lambda: Vec<Complex64>) -> Vec<Complex64> {
    let mut best = 0;
    for (i, z) in lambda.iter().enumerate() {
        if z.norm() > lambda[best].norm() {
            best = i;
        }
    }
    let phase = lambda[best] / lambda[best].norm();
    let off: f64 = lambda.iter().enumerate().filter(|(i, _)| *i != best).map(|(_, z)| z.norm_sqr()).sum();
    if off.sqrt() <= 1e-13 && (lambda[best].norm() - 1.0).abs() <= 1e-13 {
        let mut e = vec![Complex64::new(0.0, 0.0); lambda.len()];
        e[best] = phase;
        e
    } else {
        lambda
    }
}

/// Sup of `|Q^ℂ(x, λ)|` over sampled unit vectors of the complexified cones.
pub fn q_vanishes_on_cone(q: &QuadraticForm, samples: &[ConeSample], probe_count: usize) -> Result<ConeCertificate> {
    check_rank(q, samples)?;
    let mut cert = ConeCertificate {
        max_residual: 0.0,
        witness: None,
        cone_samples: samples.len(),
        probe_vectors: 0,
        cone_empty: samples.is_empty(),
        min_re_q: 0.0,
    };
    let mut min_re = f64::INFINITY;
    for (idx, s) in samples.iter().enumerate() {
        let basis = s.basis_matrix(q.rank());
        let qm = q.coeff(&s.x);
        let h = restricted_form(&qm, &basis);
        min_re = min_re.min(hermitian_eigen(&hermitian_part(&h)).0[0]);
        for c in probe_coefficients(&h, probe_count, sampling::DEFAULT_SEED.wrapping_add(idx as u64)) {
            let lambda: Vec<Complex64> = (basis.map(|v| Complex64::new(v, 0.0)) * &c).iter().copied().collect();
            let lambda = snap(lambda);
            let value = quadform::polar_with(&qm, &lambda, &lambda);
            cert.probe_vectors += 1;
            if cert.witness.is_none() || value.norm() > cert.max_residual {
                cert.max_residual = value.norm();
                cert.witness = Some(ConeWitness {
                    x: s.x.clone(),
                    xi: s.xi.clone(),
                    lambda,
                    value,
                });
            }
        }
    }
    if min_re.is_finite() {
        cert.min_re_q = min_re;
    }
    Ok(cert)
}
