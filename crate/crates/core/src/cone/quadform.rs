//! Quadratic forms `Q(x, v) = Σ_{jk} Q_{jk}(x) v^j conj(v^k)` on fibers of rank `J`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::symbols::registry::scaled_coefficient;
use crate::CMat;

pub type QuadCoeffFn = Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>;

#[derive(Clone)]
pub struct QuadraticForm {
    name: String,
    rank: usize,
    coeff: QuadCoeffFn,
    is_constant: bool,
}

impl fmt::Debug for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadraticForm")
            .field("name", &self.name)
            .field("rank", &self.rank)
            .field("is_constant", &self.is_constant)
            .finish()
    }
}

/// Names accepted by [`QuadraticForm::builtin`], besides `identity:<J>` and `scaled:<name>`.
pub const QUADFORM_NAMES: &[&str] = &["dot3", "norm_v", "square", "tartar", "proj_garding"];

impl QuadraticForm {
    pub fn new<F>(name: impl Into<String>, rank: usize, coeff: F) -> Self
    where
        F: Fn(&[f64]) -> CMat + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            rank,
            coeff: Arc::new(coeff),
            is_constant: false,
        }
    }

    pub fn constant(name: impl Into<String>, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Shape("quadratic form needs a nonempty square matrix".into()));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite quadratic form coefficient".into()));
        }
        let rank = matrix.nrows();
        Ok(Self {
            name: name.into(),
            rank,
            coeff: Arc::new(move |_| matrix.clone()),
            is_constant: true,
        })
    }

    fn real_constant(name: &str, rank: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut m = CMat::zeros(rank, rank);
        for &(j, k, v) in entries {
            m[(j, k)] = Complex64::new(v, 0.0);
        }
        Self::constant(name, m).expect("registry forms are well formed")
    }

    /// Resolves a registry name.
    pub fn builtin(name: &str) -> Result<Self> {
        if let Some(base) = name.strip_prefix("scaled:") {
            let inner = Self::builtin(base)?;
            let c = inner.coeff.clone();
            return Ok(Self::new(name, inner.rank, move |x| c(x) * Complex64::new(scaled_coefficient(x), 0.0)));
        }
        if let Some(j) = name.strip_prefix("identity:") {
            let rank: usize = j
                .parse()
                .ok()
                .filter(|&r| r > 0)
                .ok_or_else(|| Error::Config(format!("bad rank in {name:?}")))?;
            return Self::constant(name, CMat::identity(rank, rank));
        }
        Ok(match name {
            // (v, w) ↦ v·w on R³ ⊕ R³
            "dot3" => Self::real_constant(
                name,
                6,
                &[(0, 3, 0.5), (3, 0, 0.5), (1, 4, 0.5), (4, 1, 0.5), (2, 5, 0.5), (5, 2, 0.5)],
            ),
            "norm_v" => Self::real_constant(name, 6, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]),
            "square" => Self::real_constant(name, 1, &[(0, 0, 1.0)]),
            // λ₁² + λ₁λ₂
            "tartar" => Self::real_constant(name, 2, &[(0, 0, 1.0), (0, 1, 0.5), (1, 0, 0.5)]),
            "proj_garding" => Self::real_constant(name, 2, &[(0, 0, -1.0), (1, 1, 1.0)]),
            _ => return Err(Error::Config(format!("unknown quadratic form {name:?}"))),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_constant(&self) -> bool {
        self.is_constant
    }

    pub fn coeff(&self, x: &[f64]) -> CMat {
        (self.coeff)(x)
    }

    /// `q(x; v, w) = Σ Q_{jk}(x) v^j conj(w^k)`.
    pub fn polar(&self, x: &[f64], v: &[Complex64], w: &[Complex64]) -> Complex64 {
        polar_with(&self.coeff(x), v, w)
    }

    /// `Q^ℂ(x, v) = q(x; v, v)`.
    pub fn eval(&self, x: &[f64], v: &[Complex64]) -> Complex64 {
        self.polar(x, v, v)
    }

    /// Constant form `Q(x_ν, ·)`.
    pub fn freeze(&self, x_nu: &[f64]) -> QuadraticForm {
        let m = self.coeff(x_nu);
        Self {
            name: format!("frozen:{}", self.name),
            rank: self.rank,
            coeff: Arc::new(move |_| m.clone()),
            is_constant: true,
        }
    }

    fn check_field(&self, u: &GridField) -> Result<()> {
        if u.rank() != self.rank {
            return Err(Error::Shape(format!(
                "quadratic form {} has rank {}, field has rank {}",
                self.name,
                self.rank,
                u.rank()
            )));
        }
        Ok(())
    }

    /// Pointwise `q(x_j; u(x_j), w(x_j))` as a scalar field.
    pub fn polar_field(&self, u: &GridField, w: &GridField) -> Result<GridField> {
        self.check_field(u)?;
        self.check_field(w)?;
        u.ensure_compatible(w)?;
        let grid = *u.grid();
        let constant = self.is_constant.then(|| self.coeff(&vec![0.0; grid.dim()]));
        let values = (0..grid.len())
            .map(|j| {
                let (a, b) = (u.sample(j), w.sample(j));
                match &constant {
                    Some(m) => polar_with(m, &a, &b),
                    None => polar_with(&self.coeff(&grid.point(j)), &a, &b),
                }
            })
            .collect();
        GridField::new(grid, vec![values])
    }

    /// Pointwise `Q^ℂ(x_j, u(x_j))`.
    pub fn eval_field(&self, u: &GridField) -> Result<GridField> {
        self.polar_field(u, u)
    }
}

pub(crate) fn polar_with(m: &CMat, v: &[Complex64], w: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, vj) in v.iter().enumerate() {
        for (k, wk) in w.iter().enumerate() {
            acc += m[(j, k)] * vj * wk.conj();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dot3_is_inner_product_of_halves() {
        let q = QuadraticForm::builtin("dot3").unwrap();
        let v: Vec<Complex64> = [1.0, 2.0, 3.0, -1.0, 0.5, 2.0].iter().map(|&a| c(a, 0.0)).collect();
        assert_eq!(q.eval(&[0.0; 3], &v), c(-1.0 + 1.0 + 6.0, 0.0));
    }

    #[test]
    fn sesquilinear_on_complex_vectors() {
        let q = QuadraticForm::builtin("square").unwrap();
        assert_eq!(q.eval(&[0.0], &[c(0.0, 1.0)]), c(1.0, 0.0));
        let t = QuadraticForm::builtin("tartar").unwrap();
        // λ₁ = 1, λ₂ = i: |λ₁|² + ½(λ₁ conj λ₂ + λ₂ conj λ₁) = 1
        assert_eq!(t.eval(&[0.0], &[c(1.0, 0.0), c(0.0, 1.0)]), c(1.0, 0.0));
    }

    #[test]
    fn scaled_and_identity_entries() {
        let q = QuadraticForm::builtin("scaled:square").unwrap();
        assert!(!q.is_constant());
        assert!((q.eval(&[0.0], &[c(2.0, 0.0)]).re - 6.0).abs() < 1e-15);
        let id = QuadraticForm::builtin("identity:3").unwrap();
        assert_eq!(id.rank(), 3);
        assert!(QuadraticForm::builtin("identity:0").is_err());
        assert!(QuadraticForm::builtin("nope").is_err());
    }

    #[test]
    fn field_evaluation_matches_pointwise() {
        let g = TorusGrid::new(1, 8).unwrap();
        let q = QuadraticForm::builtin("scaled:tartar").unwrap();
        let u = GridField::from_fn(g, 2, |x| vec![c(x[0].cos(), 0.0), c(x[0].sin(), 0.0)]).unwrap();
        let f = q.eval_field(&u).unwrap();
        for j in 0..g.len() {
            let x = g.point(j);
            let (a, b) = (x[0].cos(), x[0].sin());
            let want = (1.0 + 0.5 * x[0].cos()) * (a * a + a * b);
            assert!((f.component(0)[j].re - want).abs() < 1e-14);
        }
        assert!(q.eval_field(&GridField::zeros(g, 3)).is_err());
    }
}
