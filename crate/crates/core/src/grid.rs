//! Periodic sampling grids on `[0, 2π)^n` and discrete Fourier analysis.
//!
//! Conventions, fixed throughout the crate:
//!
//! * nodes are `x_j = 2π j / N` componentwise, flat index with axis 0 slowest;
//! * admissible integer frequencies have every component in `[-N/2, N/2)`;
//! * the forward transform is normalized, `û_k = N^{-n} Σ_j u(x_j) e^{-i k·x_j}`,
//!   so a plane wave `e^{i k·x}` has a unit coefficient at `k`;
//! * pairings use the physical measure `(2π/N)^n`, Sobolev norms use the
//!   normalized spectral mass `Σ_k (1+|k|²)^s |û_k|²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid with `N` points per axis and period `2π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    points_per_axis: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("grid dimension must be positive".into()));
        }
        if points_per_axis == 0 || !points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "points per axis must be a positive even integer, got {points_per_axis}"
            )));
        }
        let total = (points_per_axis as u128).checked_pow(dim as u32);
        if total.is_none_or(|t| t > u32::MAX as u128) {
            return Err(Error::InvalidParameter("grid too large".into()));
        }
        Ok(Self {
            dim,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// `N / 2`, the first non-admissible positive frequency.
    pub fn half(&self) -> usize {
        self.points_per_axis / 2
    }

    /// Total number of nodes, `N^n`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points_per_axis as f64
    }

    /// Quadrature weight `(2π/N)^n` of a single node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Measure of the whole torus, `(2π)^n`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let n = self.points_per_axis;
        let mut idx = vec![0; self.dim];
        let mut rem = flat;
        for d in (0..self.dim).rev() {
            idx[d] = rem % n;
            rem /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .fold(0, |acc, &i| acc * self.points_per_axis + i % self.points_per_axis)
    }

    /// Coordinates of node `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(flat)
            .into_iter()
            .map(|i| i as f64 * h)
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|j| self.point(j)).collect()
    }

    /// Admissible frequency stored at spectral slot `flat`.
    pub fn frequency(&self, flat: usize) -> Vec<i64> {
        let n = self.points_per_axis as i64;
        self.multi_index(flat)
            .into_iter()
            .map(|i| {
                let i = i as i64;
                if i < n / 2 {
                    i
                } else {
                    i - n
                }
            })
            .collect()
    }

    pub fn frequencies(&self) -> Vec<Vec<i64>> {
        (0..self.len()).map(|j| self.frequency(j)).collect()
    }

    /// Spectral slot of frequency `k`, or `None` if `k` is not admissible.
    pub fn frequency_slot(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let n = self.points_per_axis as i64;
        let mut flat = 0usize;
        for &kd in k {
            if kd < -n / 2 || kd >= n / 2 {
                return None;
            }
            flat = flat * self.points_per_axis + kd.rem_euclid(n) as usize;
        }
        Some(flat)
    }

    /// Whether the frequency at `flat` has a component on the Nyquist row `-N/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let h = -(self.half() as i64);
        self.frequency(flat).contains(&h)
    }

    fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!(
                "grid mismatch: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}

fn check_finite(data: &[Vec<Complex64>], what: &str) -> Result<()> {
    if data.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} contain non-finite values")))
    }
}

/// Vector-valued samples on a [`TorusGrid`]; stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: TorusGrid,
    components: Vec<Vec<Complex64>>,
}

impl GridField {
    /// Builds a field from per-component sample vectors.
    pub fn new(grid: TorusGrid, components: Vec<Vec<Complex64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Shape("fiber rank must be positive".into()));
        }
        if let Some(c) = components.iter().find(|c| c.len() != grid.len()) {
            return Err(Error::Shape(format!(
                "component has {} samples, grid has {}",
                c.len(),
                grid.len()
            )));
        }
        check_finite(&components, "samples")?;
        Ok(Self { grid, components })
    }

    pub(crate) fn from_parts(grid: TorusGrid, components: Vec<Vec<Complex64>>) -> Self {
        Self { grid, components }
    }

    pub fn zeros(grid: TorusGrid, rank: usize) -> Self {
        Self::from_parts(grid, vec![vec![Complex64::new(0.0, 0.0); grid.len()]; rank])
    }

    pub fn constant(grid: TorusGrid, values: &[Complex64]) -> Self {
        Self::from_parts(
            grid,
            values.iter().map(|&v| vec![v; grid.len()]).collect(),
        )
    }

    /// Samples `f(x)` at every node; `f` returns one value per component.
    pub fn from_fn<F>(grid: TorusGrid, rank: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<Complex64>,
    {
        let mut components = vec![Vec::with_capacity(grid.len()); rank];
        for j in 0..grid.len() {
            let v = f(&grid.point(j));
            if v.len() != rank {
                return Err(Error::Shape(format!(
                    "generator returned {} values, expected {rank}",
                    v.len()
                )));
            }
            for (c, z) in components.iter_mut().zip(v) {
                c.push(z);
            }
        }
        Self::new(grid, components)
    }

    pub fn scalar_from_fn<F>(grid: TorusGrid, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let samples = (0..grid.len()).map(|j| f(&grid.point(j))).collect();
        Self::new(grid, vec![samples])
    }

    pub fn real_scalar_from_fn<F>(grid: TorusGrid, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        Self::scalar_from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, j: usize) -> &[Complex64] {
        &self.components[j]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    /// Fiber vector at node `flat`.
    pub fn sample(&self, flat: usize) -> Vec<Complex64> {
        self.components.iter().map(|c| c[flat]).collect()
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.components
    }

    pub fn ensure_scalar(&self, what: &str) -> Result<()> {
        if self.rank() != 1 {
            return Err(Error::Shape(format!(
                "{what} must be scalar (fiber rank 1), got rank {}",
                self.rank()
            )));
        }
        Ok(())
    }

    pub(crate) fn ensure_compatible(&self, other: &GridField) -> Result<()> {
        self.grid.check_same(&other.grid)
    }

    /// Pointwise product of every component with the scalar field `psi`.
    pub fn multiply_scalar_field(&self, psi: &GridField) -> Result<GridField> {
        self.ensure_compatible(psi)?;
        psi.ensure_scalar("multiplier")?;
        let p = psi.component(0);
        let components = self
            .components
            .iter()
            .map(|c| c.iter().zip(p).map(|(a, b)| a * b).collect())
            .collect();
        Ok(Self::from_parts(self.grid, components))
    }

    pub fn scale(&self, factor: Complex64) -> GridField {
        let components = self
            .components
            .iter()
            .map(|c| c.iter().map(|z| z * factor).collect())
            .collect();
        Self::from_parts(self.grid, components)
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: Complex64, other: &GridField, b: Complex64) -> Result<GridField> {
        self.ensure_compatible(other)?;
        if self.rank() != other.rank() {
            return Err(Error::Shape(format!(
                "rank mismatch: {} vs {}",
                self.rank(),
                other.rank()
            )));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        Ok(Self::from_parts(self.grid, components))
    }

    pub fn add(&self, other: &GridField) -> Result<GridField> {
        self.axpby(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        self.axpby(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Physical `L²` norm squared, `(2π/N)^n Σ_j |u(x_j)|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.cell_volume()
            * self
                .components
                .iter()
                .flatten()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Normalized mean square `N^{-n} Σ_j |u(x_j)|²`.
    pub fn mean_square(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            / self.grid.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }
}

/// Normalized discrete Fourier coefficients of a [`GridField`], slot order
/// matching [`TorusGrid::frequency`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumField {
    grid: TorusGrid,
    components: Vec<Vec<Complex64>>,
}

impl SpectrumField {
    pub fn new(grid: TorusGrid, components: Vec<Vec<Complex64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Shape("fiber rank must be positive".into()));
        }
        if components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Shape("coefficient array does not match grid".into()));
        }
        Ok(Self { grid, components })
    }

    pub(crate) fn from_parts(grid: TorusGrid, components: Vec<Vec<Complex64>>) -> Self {
        Self { grid, components }
    }

    pub fn zeros(grid: TorusGrid, rank: usize) -> Self {
        Self::from_parts(grid, vec![vec![Complex64::new(0.0, 0.0); grid.len()]; rank])
    }

    /// Spectrum with a single nonzero coefficient `value` at frequency `k` in component `j`.
    pub fn delta(grid: TorusGrid, rank: usize, j: usize, k: &[i64], value: Complex64) -> Result<Self> {
        let slot = grid
            .frequency_slot(k)
            .ok_or_else(|| Error::InvalidInput(format!("frequency {k:?} not admissible")))?;
        let mut s = Self::zeros(grid, rank);
        s.components[j][slot] = value;
        Ok(s)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, j: usize) -> &[Complex64] {
        &self.components[j]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn coefficient(&self, j: usize, k: &[i64]) -> Option<Complex64> {
        self.grid.frequency_slot(k).map(|s| self.components[j][s])
    }

    /// Plancherel mass `Σ_k |û_k|²` summed over components.
    pub fn mass(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// `Σ_k (1+|k|²)^s |û_k|²` with Euclidean fiber norm.
    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        let mut total = 0.0;
        for slot in 0..self.grid.len() {
            let k = self.grid.frequency(slot);
            let k2: f64 = k.iter().map(|&c| (c * c) as f64).sum();
            let weight = (1.0 + k2).powf(s);
            let mass: f64 = self.components.iter().map(|c| c[slot].norm_sqr()).sum();
            total += weight * mass;
        }
        total
    }
}

/// Direction of a multidimensional transform.
#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

/// Unnormalized n-dimensional DFT in place; one plan per call.
fn transform_in_place(grid: &TorusGrid, data: &mut [Vec<Complex64>], dir: Direction) {
    let n = grid.points_per_axis();
    let mut planner = FftPlanner::<f64>::new();
    let fft: std::sync::Arc<dyn Fft<f64>> = match dir {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let total = grid.len();
    for comp in data.iter_mut() {
        for axis in 0..grid.dim() {
            let stride = n.pow((grid.dim() - 1 - axis) as u32);
            let block = stride * n;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = comp[base + i * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (i, v) in line.iter().enumerate() {
                        comp[base + i * stride] = *v;
                    }
                }
            }
        }
    }
}

/// Normalized forward transform, `û_k = N^{-n} Σ_j u(x_j) e^{-i k·x_j}`.
pub fn forward_fourier(u: &GridField) -> Result<SpectrumField> {
    check_finite(&u.components, "samples")?;
    let mut data = u.components.clone();
    transform_in_place(&u.grid, &mut data, Direction::Forward);
    let scale = 1.0 / u.grid.len() as f64;
    for z in data.iter_mut().flatten() {
        *z *= scale;
    }
    Ok(SpectrumField::from_parts(u.grid, data))
}

/// Inverse transform, `u(x_j) = Σ_k û_k e^{i k·x_j}`.
pub fn inverse_fourier(s: &SpectrumField) -> Result<GridField> {
    check_finite(&s.components, "coefficients")?;
    let mut data = s.components.clone();
    transform_in_place(&s.grid, &mut data, Direction::Inverse);
    Ok(GridField::from_parts(s.grid, data))
}

/// Quadrature pairing `(2π/N)^n Σ_j u(x_j) ψ(x_j) ρ(x_j)` of scalar fields.
///
/// Bilinear (no conjugation). `density` defaults to 1.
pub fn weak_pairing(u: &GridField, psi: &GridField, density: Option<&GridField>) -> Result<Complex64> {
    u.ensure_compatible(psi)?;
    u.ensure_scalar("paired field")?;
    psi.ensure_scalar("test function")?;
    let uc = u.component(0);
    let pc = psi.component(0);
    let sum: Complex64 = match density {
        Some(rho) => {
            u.ensure_compatible(rho)?;
            rho.ensure_scalar("density")?;
            let rc = rho.component(0);
            uc.iter()
                .zip(pc)
                .zip(rc)
                .map(|((a, b), c)| a * b * c)
                .sum()
        }
        None => uc.iter().zip(pc).map(|(a, b)| a * b).sum(),
    };
    Ok(sum * u.grid.cell_volume())
}

/// Squared Sobolev norm `Σ_k (1+|k|²)^s |û_k|²`.
pub fn sobolev_norm_sq(u: &GridField, s: f64) -> Result<f64> {
    Ok(forward_fourier(u)?.sobolev_norm_sq(s))
}

pub fn sobolev_norm(u: &GridField, s: f64) -> Result<f64> {
    sobolev_norm_sq(u, s).map(f64::sqrt)
}

/// Splits a spectrum into `|k| ≤ cutoff` and the rest.
///
/// Frequencies on the Nyquist row always go to the high part.
pub fn frequency_split(s: &SpectrumField, cutoff: f64) -> Result<(SpectrumField, SpectrumField)> {
    let grid = s.grid;
    if !(cutoff > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cutoff must be positive, got {cutoff}"
        )));
    }
    if cutoff >= grid.half() as f64 {
        return Err(Error::CutoffTooLarge {
            cutoff,
            half: grid.half(),
        });
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut low = s.components.clone();
    let mut high = s.components.clone();
    for slot in 0..grid.len() {
        let k = grid.frequency(slot);
        let norm = k.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
        let is_low = norm <= cutoff && !grid.is_nyquist(slot);
        for j in 0..s.rank() {
            if is_low {
                high[j][slot] = zero;
            } else {
                low[j][slot] = zero;
            }
        }
    }
    Ok((
        SpectrumField::from_parts(grid, low),
        SpectrumField::from_parts(grid, high),
    ))
}
