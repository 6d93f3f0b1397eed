//! Built-in operators addressable by name from config files.
//!
//! Every entry provides both the total symbol (for application) and the
//! principal symbol (for cones and Gårding estimates).

use std::sync::Arc;

use num_complex::Complex64;

use super::{MultiplierFn, PrincipalSymbol, SeparableTerm, Symbol};
use crate::error::{Error, Result};
use crate::CMat;

/// Total and principal symbol of a named operator.
#[derive(Clone, Debug)]
pub struct BuiltinSymbol {
    pub total: Symbol,
    pub principal: PrincipalSymbol,
}

/// Names accepted by [`builtin`]; any of them may be prefixed with `scaled:`.
pub const NAMES: &[&str] = &[
    "div3",
    "curl3",
    "divcurl6",
    "grad",
    "laplace",
    "dx1",
    "proj_first",
    "riesz1",
    "zero",
];

fn ci(v: f64) -> Complex64 {
    Complex64::new(0.0, v)
}

fn div_block(xi: &[f64]) -> CMat {
    CMat::from_fn(1, 3, |_, j| ci(xi[j]))
}

/// `w ↦ i ξ × w`.
fn curl_block(xi: &[f64]) -> CMat {
    let (a, b, c) = (xi[0], xi[1], xi[2]);
    CMat::from_row_slice(
        3,
        3,
        &[
            ci(0.0),
            ci(-c),
            ci(b),
            ci(c),
            ci(0.0),
            ci(-a),
            ci(-b),
            ci(a),
            ci(0.0),
        ],
    )
}

struct Spec {
    order: f64,
    in_rank: usize,
    out_rank: usize,
    polynomial: bool,
    total: MultiplierFn,
    principal: MultiplierFn,
}

fn require_dim(name: &str, dim: usize, want: usize) -> Result<()> {
    if dim != want {
        return Err(Error::Config(format!(
            "symbol {name} needs dimension {want}, got {dim}"
        )));
    }
    Ok(())
}

fn base_spec(name: &str, dim: usize) -> Result<Spec> {
    let same = |order, in_rank, out_rank, polynomial, f: MultiplierFn| Spec {
        order,
        in_rank,
        out_rank,
        polynomial,
        total: f.clone(),
        principal: f,
    };
    Ok(match name {
        "div3" => {
            require_dim(name, dim, 3)?;
            same(1.0, 3, 1, true, Arc::new(div_block))
        }
        "curl3" => {
            require_dim(name, dim, 3)?;
            same(1.0, 3, 3, true, Arc::new(curl_block))
        }
        "divcurl6" => {
            require_dim(name, dim, 3)?;
            same(
                1.0,
                6,
                4,
                true,
                Arc::new(|xi| {
                    let mut m = CMat::zeros(4, 6);
                    m.view_mut((0, 0), (1, 3)).copy_from(&div_block(xi));
                    m.view_mut((1, 3), (3, 3)).copy_from(&curl_block(xi));
                    m
                }),
            )
        }
        "grad" => same(1.0, 1, dim, true, Arc::new(move |xi| CMat::from_fn(dim, 1, |i, _| ci(xi[i])))),
        "laplace" => same(
            2.0,
            1,
            1,
            true,
            Arc::new(|xi| {
                CMat::from_element(1, 1, Complex64::new(-xi.iter().map(|a| a * a).sum::<f64>(), 0.0))
            }),
        ),
        "dx1" => same(1.0, 1, 1, true, Arc::new(|xi| CMat::from_element(1, 1, ci(xi[0])))),
        "proj_first" => same(
            1.0,
            2,
            dim,
            true,
            Arc::new(move |xi| CMat::from_fn(dim, 2, |i, j| if j == 0 { ci(xi[i]) } else { ci(0.0) })),
        ),
        "zero" => same(1.0, 1, 1, true, Arc::new(|_| CMat::zeros(1, 1))),
        "riesz1" => {
            // total symbol smoothly cut off near ξ = 0; principal part ξ₁/|ξ|
            let total: MultiplierFn = Arc::new(|xi| {
                let r2: f64 = xi.iter().map(|a| a * a).sum();
                let v = if r2 == 0.0 {
                    0.0
                } else {
                    xi[0] / r2.sqrt() * (1.0 - (-r2).exp())
                };
                CMat::from_element(1, 1, Complex64::new(v, 0.0))
            });
            let principal: MultiplierFn = Arc::new(|xi| {
                let r = xi.iter().map(|a| a * a).sum::<f64>().sqrt();
                let v = if r == 0.0 { 0.0 } else { xi[0] / r };
                CMat::from_element(1, 1, Complex64::new(v, 0.0))
            });
            Spec {
                order: 0.0,
                in_rank: 1,
                out_rank: 1,
                polynomial: false,
                total,
                principal,
            }
        }
        _ => return Err(Error::Config(format!("unknown symbol {name:?}"))),
    })
}

/// Smooth coefficient `1 + ½ cos(x₁)` used by `scaled:` symbols.
pub fn scaled_coefficient(x: &[f64]) -> f64 {
    1.0 + 0.5 * x[0].cos()
}

/// Resolves a registry name in dimension `dim`.
pub fn builtin(name: &str, dim: usize) -> Result<BuiltinSymbol> {
    if dim == 0 {
        return Err(Error::Config("symbol dimension must be positive".into()));
    }
    if let Some(base) = name.strip_prefix("scaled:") {
        let spec = base_spec(base, dim)?;
        let term = SeparableTerm {
            coefficient: Arc::new(|x| Complex64::new(scaled_coefficient(x), 0.0)),
            multiplier: spec.total.clone(),
        };
        let total = Symbol::separable(name, dim, spec.order, spec.in_rank, spec.out_rank, vec![term])
            .with_polynomial(spec.polynomial);
        let p = spec.principal.clone();
        let principal = PrincipalSymbol::new(
            name,
            dim,
            spec.order,
            spec.in_rank,
            spec.out_rank,
            spec.polynomial,
            move |x, xi| p(xi) * Complex64::new(scaled_coefficient(x), 0.0),
        );
        return Ok(BuiltinSymbol { total, principal });
    }
    let spec = base_spec(name, dim)?;
    let total = Symbol::multiplier(name, dim, spec.order, spec.in_rank, spec.out_rank, {
        let f = spec.total.clone();
        move |xi| f(xi)
    })
    .with_polynomial(spec.polynomial);
    let p = spec.principal.clone();
    let principal = PrincipalSymbol::new(
        name,
        dim,
        spec.order,
        spec.in_rank,
        spec.out_rank,
        spec.polynomial,
        move |_, xi| p(xi),
    );
    Ok(BuiltinSymbol { total, principal })
}

/// Natural dimension of a registry entry, if it has one.
pub fn natural_dim(name: &str) -> Option<usize> {
    let base = name.strip_prefix("scaled:").unwrap_or(name);
    matches!(base, "div3" | "curl3" | "divcurl6").then_some(3)
}

#[cfg(test)]
mod tests {
    use super::super::{homogeneity_defect, MatrixSymbol};
    use super::*;
    use crate::sampling;

    #[test]
    fn every_builtin_is_homogeneous() {
        let pts = sampling::real_unit_vectors(3, 100, 3);
        for name in NAMES.iter().map(|s| s.to_string()).chain(NAMES.iter().map(|s| format!("scaled:{s}"))) {
            let dim = natural_dim(&name).unwrap_or(2);
            let b = builtin(&name, dim).unwrap();
            let xis = sampling::real_unit_vectors(dim, 100, 17);
            for (i, xi) in xis.iter().enumerate() {
                let mag = 1.0 + (i % 7) as f64;
                let xi: Vec<f64> = xi.iter().map(|a| a * mag).collect();
                let x: Vec<f64> = pts[i][..dim].iter().map(|a| 3.0 * a).collect();
                let t = 1.0 + (i % 5) as f64 * 0.75;
                let p = &b.principal;
                let scale = p.eval(&x, &xi).iter().map(|z| z.norm()).fold(1.0, f64::max);
                assert!(
                    homogeneity_defect(p, &x, &xi, t) <= 1e-10 * scale * t.powf(p.order()),
                    "{name} fails homogeneity"
                );
            }
        }
    }

    #[test]
    fn shapes_and_dims() {
        let b = builtin("divcurl6", 3).unwrap();
        assert_eq!((b.total.in_rank(), b.total.out_rank()), (6, 4));
        assert!(builtin("divcurl6", 2).is_err());
        let g = builtin("grad", 4).unwrap();
        assert_eq!((g.principal.in_rank(), g.principal.out_rank()), (1, 4));
        let p = builtin("proj_first", 2).unwrap();
        assert_eq!((p.principal.in_rank(), p.principal.out_rank()), (2, 2));
        assert!(builtin("nope", 2).is_err());
        assert!(builtin("scaled:nope", 2).is_err());
    }

    #[test]
    fn scaled_symbol_is_separable_not_multiplier() {
        let s = builtin("scaled:dx1", 1).unwrap().total;
        assert!(!s.is_multiplier());
        assert_eq!(s.traits().separable_terms.as_ref().map(Vec::len), Some(1));
        let v = s.eval(&[0.0], &[2.0])[(0, 0)];
        assert!((v - Complex64::new(0.0, 3.0)).norm() < 1e-15);
    }
}
