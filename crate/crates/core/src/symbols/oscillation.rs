//! Radii of balls on which coefficients oscillate less than a threshold `γ`.

use super::{MatrixSymbol, PrincipalSymbol};
use crate::error::{Error, Result};
use crate::linalg::frobenius;
use crate::sampling;
use crate::CMat;

#[derive(Debug, Clone, Copy)]
pub struct OscillationOptions {
    /// Seed radius; returned unchanged when the oscillation over it is already below `γ`.
    pub max_radius: f64,
    /// Lattice resolution of the ball sample, per axis.
    pub per_axis: usize,
}

impl OscillationOptions {
    pub fn for_dim(dim: usize) -> Self {
        let per_axis = match dim {
            1 => 65,
            2 => 17,
            _ => 9,
        };
        Self { max_radius: 1.0, per_axis }
    }
}

/// `sup_{y ∈ B(center, r)} max_i ‖C_i(y) − C_i(center)‖_F` on a lattice sample.
fn oscillation(coeffs: &dyn Fn(&[f64]) -> Vec<CMat>, center: &[f64], base: &[CMat], r: f64, per_axis: usize) -> f64 {
    sampling::ball_samples(center, r, per_axis)
        .iter()
        .map(|y| {
            coeffs(y)
                .iter()
                .zip(base)
                .map(|(a, b)| frobenius(&(a - b)))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Largest radius (up to `opts.max_radius`) with sampled oscillation `< γ`.
///
/// `coeffs` returns a list of matrices per point, e.g. a principal symbol at
/// fixed unit covectors or the coefficients `Q_{jk}`. The result is verified
/// again on a sample twice as fine and shrunk until it passes there too.
pub fn oscillation_radius(
    coeffs: &dyn Fn(&[f64]) -> Vec<CMat>,
    center: &[f64],
    gamma: f64,
    opts: OscillationOptions,
) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("γ must be positive, got {gamma}")));
    }
    if !(opts.max_radius > 0.0) {
        return Err(Error::InvalidParameter("seed radius must be positive".into()));
    }
    let base = coeffs(center);
    let osc = |r: f64, per_axis: usize| oscillation(coeffs, center, &base, r, per_axis);

    let mut r = if osc(opts.max_radius, opts.per_axis) < gamma {
        opts.max_radius
    } else {
        let (mut lo, mut hi) = (0.0, opts.max_radius);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if osc(mid, opts.per_axis) < gamma {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let fine = 2 * opts.per_axis - 1;
    for _ in 0..400 {
        if r > 0.0 && osc(r, fine) < gamma {
            return Ok(r);
        }
        r *= 0.9;
    }
    Err(Error::InvalidParameter(format!(
        "no positive radius keeps the oscillation below {gamma} around {center:?}"
    )))
}

/// Principal symbol at `count` quasi-uniform unit covectors and their negatives.
pub fn principal_sphere_coefficients(p: &PrincipalSymbol, count: usize) -> impl Fn(&[f64]) -> Vec<CMat> + Send + Sync {
    let mut dirs = sampling::sphere_directions(p.dim(), count);
    let neg: Vec<Vec<f64>> = dirs.iter().map(|d| d.iter().map(|c| -c).collect()).collect();
    dirs.extend(neg);
    let p = p.clone();
    move |x| dirs.iter().map(|xi| p.eval(x, xi)).collect()
}
