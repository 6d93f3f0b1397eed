//! Finite-difference probe of the symbol-class estimates
//! `|∂_x^α ∂_ξ^β a(x, ξ)| ≤ C (1 + |ξ|)^{m − |β|}`.

use serde::Serialize;

use super::{MatrixSymbol, Symbol};
use crate::linalg::frobenius;
use crate::sampling;
use crate::CMat;

/// Dyadic frequency magnitudes at which ratios are recorded.
const SCALES: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
/// Ratios below this are treated as exact zeros (finite-difference noise).
const ZERO_FLOOR: f64 = 1e-6;
/// Largest log-log growth slope still read as "bounded".
const GROWTH_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeBound {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    /// Maximum observed ratio at each dyadic scale.
    pub per_scale: Vec<f64>,
    pub max_ratio: f64,
    /// Least-squares slope of `ln ratio` against `ln(1 + |ξ|)`.
    pub growth_slope: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolClassReport {
    pub order: f64,
    pub scales: Vec<f64>,
    pub bounds: Vec<DerivativeBound>,
    pub passes: bool,
}

impl SymbolClassReport {
    pub fn bound(&self, alpha: &[usize], beta: &[usize]) -> Option<&DerivativeBound> {
        self.bounds.iter().find(|b| b.alpha == alpha && b.beta == beta)
    }
}

fn multi_indices(dim: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; dim]];
    let mut frontier = out.clone();
    for _ in 0..max_order {
        let mut next = Vec::new();
        for idx in &frontier {
            for d in 0..dim {
                let mut n = idx.clone();
                n[d] += 1;
                if !out.contains(&n) && !next.contains(&n) {
                    next.push(n);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Nested central differences; `steps` lists `(is_xi, axis)` pairs.
fn derivative(a: &Symbol, x: &[f64], xi: &[f64], steps: &[(bool, usize)]) -> CMat {
    match steps.split_first() {
        None => a.eval(x, xi),
        Some((&(is_xi, axis), rest)) => {
            let h = if is_xi {
                1e-3 * (1.0 + xi.iter().map(|c| c * c).sum::<f64>().sqrt())
            } else {
                1e-3
            };
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            let (mut kp, mut km) = (xi.to_vec(), xi.to_vec());
            if is_xi {
                kp[axis] += h;
                km[axis] -= h;
            } else {
                xp[axis] += h;
                xm[axis] -= h;
            }
            (derivative(a, &xp, &kp, rest) - derivative(a, &xm, &km, rest)) / num_complex::Complex64::new(2.0 * h, 0.0)
        }
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Estimates the symbol-class constants over `sample_points` and dyadic
/// frequency shells, for all `|α| + |β| ≤ max_order`.
///
/// A multi-index passes when its per-scale maximum shows no growth trend.
pub fn symbol_class_probe(a: &Symbol, sample_points: &[Vec<f64>], max_order: usize) -> SymbolClassReport {
    let dim = a.dim();
    let mut directions = sampling::sphere_directions(dim, 2 * dim);
    let negated: Vec<Vec<f64>> = directions.iter().map(|d| d.iter().map(|c| -c).collect()).collect();
    directions.extend(negated);
    let indices = multi_indices(dim, max_order);
    let mut bounds = Vec::new();
    for alpha in &indices {
        for beta in &indices {
            let total: usize = alpha.iter().sum::<usize>() + beta.iter().sum::<usize>();
            if total > max_order {
                continue;
            }
            let mut steps = Vec::new();
            for (d, &k) in alpha.iter().enumerate() {
                steps.extend(std::iter::repeat_n((false, d), k));
            }
            for (d, &k) in beta.iter().enumerate() {
                steps.extend(std::iter::repeat_n((true, d), k));
            }
            let weight_order = a.order() - beta.iter().sum::<usize>() as f64;
            let per_scale: Vec<f64> = SCALES
                .iter()
                .map(|&t| {
                    let mut worst: f64 = 0.0;
                    for x in sample_points {
                        for dir in &directions {
                            let xi: Vec<f64> = dir.iter().map(|c| c * t).collect();
                            let r = frobenius(&derivative(a, x, &xi, &steps)) / (1.0 + t).powf(weight_order);
                            worst = worst.max(r);
                        }
                    }
                    worst
                })
                .collect();
            let (xs, ys): (Vec<f64>, Vec<f64>) = SCALES
                .iter()
                .zip(&per_scale)
                .filter(|(_, &r)| r > ZERO_FLOOR)
                .map(|(&t, &r)| ((1.0 + t).ln(), r.ln()))
                .unzip();
            let growth_slope = if xs.len() >= 2 { slope(&xs, &ys) } else { 0.0 };
            bounds.push(DerivativeBound {
                alpha: alpha.clone(),
                beta: beta.clone(),
                max_ratio: per_scale.iter().copied().fold(0.0, f64::max),
                per_scale,
                growth_slope,
                bounded: growth_slope <= GROWTH_TOLERANCE,
            });
        }
    }
    SymbolClassReport {
        order: a.order(),
        scales: SCALES.to_vec(),
        passes: bounds.iter().all(|b| b.bounded),
        bounds,
    }
}
