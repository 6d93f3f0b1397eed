//! Deterministic sample sets: covector spheres, balls, and seeded unit vectors.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Seed shared by every sampled probe in the crate.
pub const DEFAULT_SEED: u64 = 0x5eed_cc01;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Quasi-uniform unit covectors, one per antipodal pair.
///
/// `n = 1` yields the single direction `+1`; `n = 2` an angle grid on the
/// half circle; `n = 3` a Fibonacci spiral on the upper hemisphere; higher
/// dimensions fall back to seeded Gaussian directions folded to a half space.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0]],
        2 => (0..count)
            .map(|i| {
                let t = PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = rng(DEFAULT_SEED ^ dim as u64);
            (0..count)
                .map(|_| {
                    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    let sign = if v[dim - 1] < 0.0 { -1.0 } else { 1.0 };
                    v.iter_mut().for_each(|a| *a *= sign / norm);
                    v
                })
                .collect()
        }
    }
}

/// Lattice points of the ball `B(center, radius)` with `per_axis` points per
/// axis, plus the axis endpoints on its boundary.
pub fn ball_samples(center: &[f64], radius: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let per_axis = per_axis.max(2);
    let mut out = vec![center.to_vec()];
    let total = per_axis.pow(dim as u32);
    for flat in 0..total {
        let mut rem = flat;
        let mut offset = vec![0.0; dim];
        for d in (0..dim).rev() {
            let i = rem % per_axis;
            rem /= per_axis;
            offset[d] = -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64;
        }
        let r2: f64 = offset.iter().map(|a| a * a).sum();
        if r2 <= 1.0 + 1e-12 {
            out.push(center.iter().zip(&offset).map(|(c, o)| c + radius * o).collect());
        }
    }
    for d in 0..dim {
        for s in [-1.0, 1.0] {
            let mut p = center.to_vec();
            p[d] += s * radius;
            out.push(p);
        }
    }
    out
}

/// Seeded unit vectors of `C^J`, uniform on the real `2J`-sphere of `(Re v, Im v)`.
pub fn complex_unit_vectors(rank: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let v: Vec<Complex64> = (0..rank)
                .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                .collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / norm).collect()
        })
        .collect()
}

/// Seeded unit vectors of `R^d`.
pub fn real_unit_vectors(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.into_iter().map(|a| a / norm).collect()
        })
        .collect()
}
