#![allow(dead_code)]

use microcc::grid::{GridField, TorusGrid};
use microcc::sampling;
use microcc::Complex64;
use rand::Rng;

pub fn random_field(grid: TorusGrid, rank: usize, seed: u64) -> GridField {
    let mut rng = sampling::rng(seed);
    let comps = (0..rank)
        .map(|_| {
            (0..grid.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    GridField::new(grid, comps).unwrap()
}

/// Real field built from a few plane waves with `|k|_∞ ≤ band`.
pub fn bandlimited_field(grid: TorusGrid, rank: usize, band: i64, seed: u64) -> GridField {
    let mut rng = sampling::rng(seed);
    let waves: Vec<Vec<(Vec<i64>, f64, f64)>> = (0..rank)
        .map(|_| {
            (0..5)
                .map(|_| {
                    let k = (0..grid.dim()).map(|_| rng.random_range(-band..=band)).collect();
                    (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..6.3))
                })
                .collect()
        })
        .collect();
    GridField::from_fn(grid, rank, |x| {
        waves
            .iter()
            .map(|ws| {
                let v: f64 = ws
                    .iter()
                    .map(|(k, c, ph)| c * (k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum::<f64>() + ph).cos())
                    .sum();
                Complex64::new(v, 0.0)
            })
            .collect()
    })
    .unwrap()
}

pub fn grid_for(dim: usize, n_pow: u32) -> TorusGrid {
    let n = 2usize.pow(n_pow);
    let n = if dim == 3 { n.min(8) } else { n };
    TorusGrid::new(dim, n).unwrap()
}
