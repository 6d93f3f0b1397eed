//! Semi-Riemannian chart data: metrics, volume densities, positivized bundle
//! metrics, partitions of unity, and weighted Sobolev norms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{forward_fourier, GridField, TorusGrid};
use crate::linalg::symmetric_eigen;
use crate::RMat;

pub type MatrixFn = Arc<dyn Fn(&[f64]) -> RMat + Send + Sync>;

/// Smallest `|det g|` accepted as nondegenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Metric registry names; `diag:`, `conformal:` and `conformal-minkowski:` take parameters.
pub const METRIC_NAMES: &[&str] = &["euclidean", "minkowski", "diag:<entries>", "conformal:<amp>", "conformal-minkowski:<amp>"];

/// Symmetric `n × n` metric field `g(x)` on a chart.
#[derive(Clone)]
pub struct MetricField {
    name: String,
    dim: usize,
    eval: MatrixFn,
    constant: bool,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

fn minkowski_diag(dim: usize) -> RMat {
    let mut m = RMat::identity(dim, dim);
    m[(0, 0)] = -1.0;
    m
}

fn parse_entries(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number {t:?} in {spec:?}"))))
        .collect()
}

fn parse_amplitude(name: &str, spec: &str) -> Result<f64> {
    spec.parse::<f64>()
        .ok()
        .filter(|a| a.is_finite())
        .ok_or_else(|| Error::Config(format!("bad amplitude in metric {name:?}")))
}

impl MetricField {
    pub fn new<F>(name: impl Into<String>, dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> RMat + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            constant: false,
        }
    }

    pub fn constant(name: impl Into<String>, matrix: RMat) -> Result<Self> {
        check_symmetric(&matrix)?;
        let dim = matrix.nrows();
        Ok(Self {
            name: name.into(),
            dim,
            eval: Arc::new(move |_| matrix.clone()),
            constant: true,
        })
    }

    /// Resolves a registry name in dimension `dim`.
    pub fn builtin(name: &str, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("metric dimension must be positive".into()));
        }
        if let Some(spec) = name.strip_prefix("diag:") {
            let entries = parse_entries(spec)?;
            if entries.len() != dim {
                return Err(Error::Config(format!("{name:?} has {} entries, dimension is {dim}", entries.len())));
            }
            return Self::constant(name, RMat::from_diagonal(&DVector::from_vec(entries)));
        }
        if let Some(spec) = name.strip_prefix("conformal-minkowski:") {
            let a = parse_amplitude(name, spec)?;
            let base = minkowski_diag(dim);
            return Ok(Self::new(name, dim, move |x| &base * (2.0 * a * x[0].cos()).exp()));
        }
        if let Some(spec) = name.strip_prefix("conformal:") {
            let a = parse_amplitude(name, spec)?;
            return Ok(Self::new(name, dim, move |x| RMat::identity(dim, dim) * (2.0 * a * x[0].cos()).exp()));
        }
        match name {
            "euclidean" => Self::constant(name, RMat::identity(dim, dim)),
            "minkowski" => Self::constant(name, minkowski_diag(dim)),
            _ => Err(Error::Config(format!("unknown metric {name:?}"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn eval(&self, x: &[f64]) -> RMat {
        (self.eval)(x)
    }

    /// Symmetry, nondegeneracy, and constant index on the sample points.
    pub fn validate(&self, points: &[Vec<f64>]) -> Result<usize> {
        let mut index = None;
        for x in points {
            let g = self.eval(x);
            check_symmetric(&g)?;
            let (i, _) = signature_of(&g, x)?;
            match index {
                None => index = Some(i),
                Some(j) if j != i => {
                    return Err(Error::InvalidInput(format!(
                        "metric {} changes index from {j} to {i} at {x:?}",
                        self.name
                    )))
                }
                _ => {}
            }
        }
        Ok(index.unwrap_or(0))
    }

    /// `√|det g(x_j)|` at every node.
    pub fn density_field(&self, grid: &TorusGrid) -> Result<GridField> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.len() {
            values.push(Complex64::new(volume_density(self, &grid.point(j))?, 0.0));
        }
        GridField::new(*grid, vec![values])
    }
}

fn check_symmetric(m: &RMat) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Shape("metric must be a nonempty square matrix".into()));
    }
    let scale = m.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if (m - m.transpose()).iter().any(|v| v.abs() > 1e-12 * scale) {
        return Err(Error::InvalidInput("metric is not symmetric".into()));
    }
    Ok(())
}

fn signature_of(g: &RMat, x: &[f64]) -> Result<(usize, Vec<i8>)> {
    let det = g.determinant();
    if !(det.abs() > DEGENERACY_TOL) {
        return Err(Error::DegenerateMetric { x: x.to_vec(), det });
    }
    let (values, _) = symmetric_eigen(g);
    let signs: Vec<i8> = values.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect();
    Ok((signs.iter().filter(|&&s| s < 0).count(), signs))
}

/// Index (number of negative eigenvalues) and signs ordered by eigenvalue.
pub fn signature(g: &MetricField, x: &[f64]) -> Result<(usize, Vec<i8>)> {
    signature_of(&g.eval(x), x)
}

/// `√|det g(x)|`.
pub fn volume_density(g: &MetricField, x: &[f64]) -> Result<f64> {
    let m = g.eval(x);
    let det = m.determinant();
    if !(det.abs() > DEGENERACY_TOL) {
        return Err(Error::DegenerateMetric { x: x.to_vec(), det });
    }
    Ok(det.abs().sqrt())
}

/// Fiber metric on a bundle of rank `J`, with a signature constant on the chart.
#[derive(Clone)]
pub struct BundleMetric {
    name: String,
    rank: usize,
    eval: MatrixFn,
    signature: Vec<i8>,
    constant: bool,
}

impl fmt::Debug for BundleMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BundleMetric")
            .field("name", &self.name)
            .field("rank", &self.rank)
            .field("signature", &self.signature)
            .finish()
    }
}

impl BundleMetric {
    pub fn new<F>(name: impl Into<String>, rank: usize, signature: Vec<i8>, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> RMat + Send + Sync + 'static,
    {
        if signature.len() != rank || signature.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput(format!("signature {signature:?} does not match rank {rank}")));
        }
        Ok(Self {
            name: name.into(),
            rank,
            eval: Arc::new(eval),
            signature,
            constant: false,
        })
    }

    pub fn constant(name: impl Into<String>, matrix: RMat) -> Result<Self> {
        check_symmetric(&matrix)?;
        let (_, signature) = signature_of(&matrix, &[])?;
        Ok(Self {
            name: name.into(),
            rank: matrix.nrows(),
            eval: Arc::new(move |_| matrix.clone()),
            signature,
            constant: true,
        })
    }

    /// `identity:<J>` or `diag:<entries>`.
    pub fn builtin(name: &str) -> Result<Self> {
        if let Some(j) = name.strip_prefix("identity:") {
            let rank: usize = j
                .parse()
                .ok()
                .filter(|&r| r > 0)
                .ok_or_else(|| Error::Config(format!("bad rank in {name:?}")))?;
            return Self::constant(name, RMat::identity(rank, rank));
        }
        if let Some(spec) = name.strip_prefix("diag:") {
            return Self::constant(name, RMat::from_diagonal(&DVector::from_vec(parse_entries(spec)?)));
        }
        Err(Error::Config(format!("unknown bundle metric {name:?}")))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn eval(&self, x: &[f64]) -> RMat {
        (self.eval)(x)
    }
}

/// `U|Λ|ᵗU` for `h = UΛᵗU`.
pub fn positive_part_matrix(h: &RMat) -> Result<RMat> {
    check_symmetric(h)?;
    let det = h.determinant();
    if !(det.abs() > DEGENERACY_TOL) {
        return Err(Error::DegenerateMetric { x: Vec::new(), det });
    }
    let (values, u) = symmetric_eigen(h);
    let abs = RMat::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|v| v.abs())));
    let p = &u * abs * u.transpose();
    Ok((&p + p.transpose()) * 0.5)
}

/// Positive definite part `|h|(x)` of a bundle metric.
pub fn positive_part(h: &BundleMetric, x: &[f64]) -> Result<RMat> {
    positive_part_matrix(&h.eval(x)).map_err(|e| match e {
        Error::DegenerateMetric { det, .. } => Error::DegenerateMetric { x: x.to_vec(), det },
        other => other,
    })
}

/// `Σ_k |h|(û_k, û_k) (1 + |g(k, k)|²)^s` with `g`, `h` frozen at `x_nu`.
pub fn weighted_sobolev_norm_sq_at(u: &GridField, g: &MetricField, h: &BundleMetric, s: f64, x_nu: &[f64]) -> Result<f64> {
    let grid = u.grid();
    if g.dim() != grid.dim() || h.rank() != u.rank() {
        return Err(Error::Shape(format!(
            "metric of dimension {} and bundle metric of rank {} on a field of dimension {} and rank {}",
            g.dim(),
            h.rank(),
            grid.dim(),
            u.rank()
        )));
    }
    let gm = g.eval(x_nu);
    signature_of(&gm, x_nu)?;
    let hp = positive_part(h, x_nu)?;
    let spec = forward_fourier(u)?;
    let mut total = 0.0;
    for slot in 0..grid.len() {
        let k = DVector::from_iterator(grid.dim(), grid.frequency(slot).iter().map(|&c| c as f64));
        let gkk = (k.transpose() * &gm * &k)[(0, 0)];
        let weight = (1.0 + gkk * gkk).powf(s);
        let mut fiber = 0.0;
        for a in 0..u.rank() {
            for b in 0..u.rank() {
                fiber += (spec.component(a)[slot].conj() * hp[(a, b)] * spec.component(b)[slot]).re;
            }
        }
        total += weight * fiber;
    }
    Ok(total)
}

/// Weighted norm for chartwise-constant `g` and `h`.
pub fn weighted_sobolev_norm_sq(u: &GridField, g: &MetricField, h: &BundleMetric, s: f64) -> Result<f64> {
    if !g.is_constant() || !h.is_constant() {
        return Err(Error::InvalidInput(
            "weighted norms need constant metrics; freeze them at a chart point first".into(),
        ));
    }
    weighted_sobolev_norm_sq_at(u, g, h, s, &vec![0.0; g.dim()])
}

pub fn weighted_sobolev_norm(u: &GridField, g: &MetricField, h: &BundleMetric, s: f64) -> Result<f64> {
    weighted_sobolev_norm_sq(u, g, h, s).map(f64::sqrt)
}

#[derive(Debug, Clone, Serialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Smooth nonnegative bumps summing to one at every grid node.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub bumps: Vec<GridField>,
    pub supports: Vec<Ball>,
}

impl PartitionOfUnity {
    /// `√φ_ν` for each bump.
    pub fn sqrt_bumps(&self) -> Vec<GridField> {
        self.bumps
            .iter()
            .map(|b| {
                let g = *b.grid();
                GridField::from_parts(g, vec![b.component(0).iter().map(|z| Complex64::new(z.re.sqrt(), 0.0)).collect()])
            })
            .collect()
    }
}

/// Euclidean distance on the torus `(R/2πZ)^n`.
pub fn periodic_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// `exp(−1/(1 − (d/r)²))` inside the ball, zero outside.
fn bump(d: f64, r: f64) -> f64 {
    let t = d / r;
    if t < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Partition subordinate to the balls `B(centers[ν], radii[ν])`, normalized by `Σ_μ b_μ`.
pub fn partition_of_unity(grid: &TorusGrid, centers: &[Vec<f64>], radii: &[f64]) -> Result<PartitionOfUnity> {
    if centers.len() != radii.len() || centers.is_empty() {
        return Err(Error::InvalidInput("need one radius per center and at least one ball".into()));
    }
    if centers.iter().any(|c| c.len() != grid.dim()) || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidInput("ball centers must match the grid dimension and radii be positive".into()));
    }
    let raw: Vec<Vec<f64>> = centers
        .iter()
        .zip(radii)
        .map(|(c, &r)| (0..grid.len()).map(|j| bump(periodic_distance(&grid.point(j), c), r)).collect())
        .collect();
    let mut total = vec![0.0; grid.len()];
    for b in &raw {
        for (t, v) in total.iter_mut().zip(b) {
            *t += v;
        }
    }
    if let Some(j) = total.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::CoverFailure { index: j, point: grid.point(j) });
    }
    let bumps = raw
        .into_iter()
        .map(|b| {
            let vals = b.iter().zip(&total).map(|(v, t)| Complex64::new(v / t, 0.0)).collect();
            GridField::from_parts(*grid, vec![vals])
        })
        .collect();
    let supports = centers
        .iter()
        .zip(radii)
        .map(|(c, &r)| Ball { center: c.clone(), radius: r })
        .collect();
    Ok(PartitionOfUnity { bumps, supports })
}
