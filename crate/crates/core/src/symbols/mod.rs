//! Pseudodifferential symbols and their calculus.
//!
//! A [`Symbol`] is a total symbol `a(x, ξ)` used to apply operators; a
//! [`PrincipalSymbol`] is its degree-`s` homogeneous part, used for cones and
//! Gårding estimates. Both are closures over evaluation. Built-in operators
//! ship with both (see [`registry`]); principal symbols are never extracted
//! automatically.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::frobenius;
use crate::{CMat, RMat};

mod oscillation;
mod probe;
pub mod registry;

pub use oscillation::{oscillation_radius, principal_sphere_coefficients, OscillationOptions};
pub use probe::{symbol_class_probe, DerivativeBound, SymbolClassReport};

pub type SymbolFn = Arc<dyn Fn(&[f64], &[f64]) -> CMat + Send + Sync>;
pub type CoefficientFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;
pub type MultiplierFn = Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>;
pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> RMat + Send + Sync>;

/// One term `c(x) · b(ξ)` of a separable symbol.
#[derive(Clone)]
pub struct SeparableTerm {
    pub coefficient: CoefficientFn,
    pub multiplier: MultiplierFn,
}

/// Flags that unlock fast quantization paths.
#[derive(Clone, Default)]
pub struct SymbolTraits {
    pub is_multiplier: bool,
    pub is_polynomial: bool,
    pub separable_terms: Option<Vec<SeparableTerm>>,
}

/// Common read access to total and principal symbols.
pub trait MatrixSymbol {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn order(&self) -> f64;
    fn in_rank(&self) -> usize;
    fn out_rank(&self) -> usize;
    /// Raw evaluation, no domain checks.
    fn eval(&self, x: &[f64], xi: &[f64]) -> CMat;
    /// Checked evaluation returning the `out_rank × in_rank` matrix.
    fn evaluate(&self, x: &[f64], xi: &[f64]) -> Result<CMat>;
}

fn check_point(dim: usize, x: &[f64], xi: &[f64]) -> Result<()> {
    if x.len() != dim || xi.len() != dim {
        return Err(Error::Shape(format!(
            "symbol of dimension {dim} evaluated at x of length {} and ξ of length {}",
            x.len(),
            xi.len()
        )));
    }
    Ok(())
}

/// Total symbol `a(x, ξ)` of order `s`.
#[derive(Clone)]
pub struct Symbol {
    name: String,
    dim: usize,
    order: f64,
    in_rank: usize,
    out_rank: usize,
    eval: SymbolFn,
    traits: SymbolTraits,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("order", &self.order)
            .field("in_rank", &self.in_rank)
            .field("out_rank", &self.out_rank)
            .field("is_multiplier", &self.traits.is_multiplier)
            .finish()
    }
}

impl Symbol {
    /// General `x`-dependent symbol; quantized by direct summation.
    pub fn new<F>(name: impl Into<String>, dim: usize, order: f64, in_rank: usize, out_rank: usize, eval: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> CMat + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            order,
            in_rank,
            out_rank,
            eval: Arc::new(eval),
            traits: SymbolTraits::default(),
        }
    }

    /// Fourier multiplier `b(ξ)`.
    pub fn multiplier<F>(name: impl Into<String>, dim: usize, order: f64, in_rank: usize, out_rank: usize, b: F) -> Self
    where
        F: Fn(&[f64]) -> CMat + Send + Sync + 'static,
    {
        let b: MultiplierFn = Arc::new(b);
        let eval_b = b.clone();
        Self {
            name: name.into(),
            dim,
            order,
            in_rank,
            out_rank,
            eval: Arc::new(move |_x, xi| eval_b(xi)),
            traits: SymbolTraits {
                is_multiplier: true,
                is_polynomial: false,
                separable_terms: Some(vec![SeparableTerm {
                    coefficient: Arc::new(|_| Complex64::new(1.0, 0.0)),
                    multiplier: b,
                }]),
            },
        }
    }

    /// `Σ_m c_m(x) b_m(ξ)`; quantized with one transform pair per term.
    pub fn separable(name: impl Into<String>, dim: usize, order: f64, in_rank: usize, out_rank: usize, terms: Vec<SeparableTerm>) -> Self {
        let eval_terms = terms.clone();
        Self {
            name: name.into(),
            dim,
            order,
            in_rank,
            out_rank,
            eval: Arc::new(move |x, xi| {
                let mut acc = CMat::zeros(out_rank, in_rank);
                for t in &eval_terms {
                    acc += (t.multiplier)(xi) * (t.coefficient)(x);
                }
                acc
            }),
            traits: SymbolTraits {
                is_multiplier: false,
                is_polynomial: false,
                separable_terms: Some(terms),
            },
        }
    }

    pub fn with_polynomial(mut self, is_polynomial: bool) -> Self {
        self.traits.is_polynomial = is_polynomial;
        self
    }

    pub fn traits(&self) -> &SymbolTraits {
        &self.traits
    }

    pub fn is_multiplier(&self) -> bool {
        self.traits.is_multiplier
    }

    /// Spot-checks the multiplier flag: `a(x, ξ) = a(0, ξ)` on the samples.
    pub fn multiplier_flag_consistent(&self, samples: &[(Vec<f64>, Vec<f64>)], tol: f64) -> bool {
        if !self.traits.is_multiplier {
            return true;
        }
        let origin = vec![0.0; self.dim];
        samples.iter().all(|(x, xi)| {
            frobenius(&(self.eval(x, xi) - self.eval(&origin, xi))) <= tol
        })
    }
}

impl MatrixSymbol for Symbol {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn order(&self) -> f64 {
        self.order
    }
    fn in_rank(&self) -> usize {
        self.in_rank
    }
    fn out_rank(&self) -> usize {
        self.out_rank
    }
    fn eval(&self, x: &[f64], xi: &[f64]) -> CMat {
        (self.eval)(x, xi)
    }
    fn evaluate(&self, x: &[f64], xi: &[f64]) -> Result<CMat> {
        check_point(self.dim, x, xi)?;
        Ok((self.eval)(x, xi))
    }
}

/// Degree-`s` positively homogeneous principal symbol `σ(x, ξ)`.
#[derive(Clone)]
pub struct PrincipalSymbol {
    name: String,
    dim: usize,
    order: f64,
    in_rank: usize,
    out_rank: usize,
    eval: SymbolFn,
    polynomial: bool,
}

impl fmt::Debug for PrincipalSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrincipalSymbol")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("order", &self.order)
            .field("in_rank", &self.in_rank)
            .field("out_rank", &self.out_rank)
            .finish()
    }
}

impl PrincipalSymbol {
    pub fn new<F>(name: impl Into<String>, dim: usize, order: f64, in_rank: usize, out_rank: usize, polynomial: bool, eval: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> CMat + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            order,
            in_rank,
            out_rank,
            eval: Arc::new(eval),
            polynomial,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.polynomial
    }

    pub(crate) fn eval_fn(&self) -> SymbolFn {
        self.eval.clone()
    }
}

impl MatrixSymbol for PrincipalSymbol {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn order(&self) -> f64 {
        self.order
    }
    fn in_rank(&self) -> usize {
        self.in_rank
    }
    fn out_rank(&self) -> usize {
        self.out_rank
    }
    fn eval(&self, x: &[f64], xi: &[f64]) -> CMat {
        (self.eval)(x, xi)
    }
    fn evaluate(&self, x: &[f64], xi: &[f64]) -> Result<CMat> {
        check_point(self.dim, x, xi)?;
        if xi.iter().all(|&c| c == 0.0) && !(self.polynomial && self.order >= 0.0) {
            return Err(Error::UndefinedAtZero);
        }
        Ok((self.eval)(x, xi))
    }
}

/// `‖p(x, tξ) − t^s p(x, ξ)‖_F`; zero for a valid principal symbol.
///
/// Meaningful for `|ξ| ≥ 1` and `t ≥ 1`.
pub fn homogeneity_defect(p: &PrincipalSymbol, x: &[f64], xi: &[f64], t: f64) -> f64 {
    let scaled: Vec<f64> = xi.iter().map(|c| c * t).collect();
    frobenius(&(p.eval(x, &scaled) - p.eval(x, xi) * Complex64::new(t.powf(p.order), 0.0)))
}

/// Freezes the `x`-dependence at `x_nu`, producing the multiplier `b(ξ) = a(x_ν, ξ)`.
pub fn freeze<S: MatrixSymbol + Clone + Send + Sync + 'static>(a: &S, x_nu: &[f64]) -> Symbol {
    let frozen = a.clone();
    let at = x_nu.to_vec();
    Symbol::multiplier(
        format!("frozen:{}", a.name()),
        a.dim(),
        a.order(),
        a.in_rank(),
        a.out_rank(),
        move |xi| frozen.eval(&at, xi),
    )
}

/// A smooth change of coordinates `χ` with its inverse and jacobian.
#[derive(Clone)]
pub struct Diffeomorphism {
    name: String,
    dim: usize,
    forward: MapFn,
    inverse: MapFn,
    jacobian: JacobianFn,
}

impl fmt::Debug for Diffeomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diffeomorphism")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl Diffeomorphism {
    pub fn new<F, G, J>(name: impl Into<String>, dim: usize, forward: F, inverse: G, jacobian: J) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64]) -> RMat + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            jacobian: Arc::new(jacobian),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new("identity", dim, |x| x.to_vec(), |y| y.to_vec(), move |_| RMat::identity(dim, dim))
    }

    /// `χ(x) = A x`.
    pub fn linear(matrix: RMat) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::Shape("linear diffeomorphism needs a square matrix".into()));
        }
        let inv = matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateChart("singular linear map".into()))?;
        let a = matrix.clone();
        let j = matrix.clone();
        Ok(Self::new(
            "linear",
            dim,
            move |x| (&a * DVector::from_column_slice(x)).iter().copied().collect(),
            move |y| (&inv * DVector::from_column_slice(y)).iter().copied().collect(),
            move |_| j.clone(),
        ))
    }

    pub fn scaling(dim: usize, factor: f64) -> Result<Self> {
        let mut d = Self::linear(RMat::identity(dim, dim) * factor)?;
        d.name = format!("scale:{factor}");
        Ok(d)
    }

    /// Rotation by `angle` in the `(0, 1)` coordinate plane.
    pub fn plane_rotation(dim: usize, angle: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter("rotation needs dimension ≥ 2".into()));
        }
        let mut m = RMat::identity(dim, dim);
        let (s, c) = angle.sin_cos();
        m[(0, 0)] = c;
        m[(0, 1)] = -s;
        m[(1, 0)] = s;
        m[(1, 1)] = c;
        let mut d = Self::linear(m)?;
        d.name = format!("rotation:{angle}");
        Ok(d)
    }

    /// Unimodular integer shear `x_0 ↦ x_0 + x_1`; maps the torus lattice onto itself.
    pub fn shear(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter("shear needs dimension ≥ 2".into()));
        }
        let mut m = RMat::identity(dim, dim);
        m[(0, 1)] = 1.0;
        let mut d = Self::linear(m)?;
        d.name = "shear".into();
        Ok(d)
    }

    /// Componentwise `x_d ↦ x_d + amplitude · sin(x_d)`, `|amplitude| < 1`.
    pub fn sine_perturbation(dim: usize, amplitude: f64) -> Result<Self> {
        if !(amplitude.abs() < 1.0) {
            return Err(Error::DegenerateChart(format!(
                "sine perturbation with amplitude {amplitude} is not invertible"
            )));
        }
        let a = amplitude;
        Ok(Self::new(
            format!("sine:{amplitude}"),
            dim,
            move |x| x.iter().map(|&t| t + a * t.sin()).collect(),
            move |y| y.iter().map(|&v| invert_sine(v, a)).collect(),
            move |x| RMat::from_diagonal(&DVector::from_iterator(dim, x.iter().map(|&t| 1.0 + a * t.cos()))),
        ))
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &Diffeomorphism, inner: &Diffeomorphism) -> Result<Self> {
        if outer.dim != inner.dim {
            return Err(Error::Shape("composed diffeomorphisms differ in dimension".into()));
        }
        let (of, inf) = (outer.forward.clone(), inner.forward.clone());
        let (oi, ii) = (outer.inverse.clone(), inner.inverse.clone());
        let (oj, ij, inf2) = (outer.jacobian.clone(), inner.jacobian.clone(), inner.forward.clone());
        Ok(Self::new(
            format!("{}∘{}", outer.name, inner.name),
            outer.dim,
            move |x| of(&inf(x)),
            move |y| ii(&oi(y)),
            move |x| oj(&inf2(x)) * ij(x),
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        (self.forward)(x)
    }

    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        (self.inverse)(y)
    }

    pub fn jacobian(&self, x: &[f64]) -> RMat {
        (self.jacobian)(x)
    }

    /// Verifies `χ(χ^{-1}(y)) = y` and a nonsingular jacobian at every sample.
    pub fn validate(&self, points: &[Vec<f64>], tol: f64) -> Result<()> {
        for p in points {
            let back = self.forward(&self.inverse(p));
            let err = back
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if err > tol {
                return Err(Error::DegenerateChart(format!(
                    "{}: forward∘inverse misses {p:?} by {err:e}",
                    self.name
                )));
            }
            let det = self.jacobian(p).determinant();
            if !(det.abs() > 1e-12) {
                return Err(Error::DegenerateChart(format!(
                    "{}: singular jacobian at {p:?}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn invert_sine(y: f64, a: f64) -> f64 {
    // Newton on t + a sin t = y; the map is strictly increasing for |a| < 1
    let mut t = y;
    for _ in 0..100 {
        let f = t + a * t.sin() - y;
        let step = f / (1.0 + a * t.cos());
        t -= step;
        if step.abs() <= 1e-16 * (1.0 + t.abs()) {
            break;
        }
    }
    t
}

/// Deterministic check points in `[-π, π]^n` used to validate charts.
pub fn chart_check_points(dim: usize) -> Vec<Vec<f64>> {
    let per_axis: usize = match dim {
        1 => 17,
        2 => 7,
        _ => 4,
    };
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|flat| {
            let mut rem = flat;
            let mut p = vec![0.0; dim];
            for d in (0..dim).rev() {
                let i = rem % per_axis;
                rem /= per_axis;
                p[d] = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / per_axis as f64;
            }
            p
        })
        .collect()
}

/// Principal symbol of `χ_* A`: `q(y, η) = p(χ^{-1}(y), ᵗDχ(χ^{-1}(y)) η)`.
pub fn pushforward(p: &PrincipalSymbol, chi: &Diffeomorphism) -> Result<PrincipalSymbol> {
    if chi.dim() != p.dim() {
        return Err(Error::Shape(format!(
            "diffeomorphism of dimension {} applied to a symbol of dimension {}",
            chi.dim(),
            p.dim()
        )));
    }
    chi.validate(&chart_check_points(p.dim()), 1e-9)?;
    let inner = p.eval_fn();
    let chi2 = chi.clone();
    Ok(PrincipalSymbol::new(
        format!("{}_*{}", chi.name(), p.name()),
        p.dim(),
        p.order(),
        p.in_rank(),
        p.out_rank(),
        p.is_polynomial(),
        move |y, eta| {
            let x = chi2.inverse(y);
            let jt = chi2.jacobian(&x).transpose();
            let xi = jt * DVector::from_column_slice(eta);
            inner(&x, xi.as_slice())
        },
    ))
}
