//! User-defined systems on flat pseudo-Euclidean spaces.
//!
//! Each component of the forward and inverse maps is a polynomial given as
//! a coefficient table: one row `[c, k₁, …, k_d]` per monomial c·x₁^k₁⋯x_d^k_d.
//! The differential is the exact derivative of the polynomials.

use std::sync::Arc;

use pseudohyp_core::checker::InvariantSetSample;
use pseudohyp_core::dynamics::DiscreteSystem;
use pseudohyp_core::splitting::SplittingField;
use pseudohyp_core::{Manifold, MetricSignature, Point, Vector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    pub terms: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSystemSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub signature: Vec<i8>,
    pub forward: Vec<PolynomialSpec>,
    pub inverse: Vec<PolynomialSpec>,
    /// A finite invariant set (fixed points or periodic orbits).
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub stable: Vec<Vec<f64>>,
    #[serde(default)]
    pub unstable: Vec<Vec<f64>>,
    #[serde(default)]
    pub null_part: Vec<Vec<f64>>,
}

fn default_name() -> String {
    "user".into()
}

#[derive(Debug, Clone, PartialEq)]
struct Monomial {
    coef: f64,
    powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

impl Polynomial {
    fn parse(spec: &PolynomialSpec, dim: usize, label: &str) -> CliResult<Self> {
        let mut terms = Vec::with_capacity(spec.terms.len());
        for (i, row) in spec.terms.iter().enumerate() {
            if row.len() != dim + 1 {
                return Err(CliError::Config(format!(
                    "{label} term {i}: expected {} entries (coefficient and {dim} exponents), got {}",
                    dim + 1,
                    row.len()
                )));
            }
            let mut powers = Vec::with_capacity(dim);
            for &k in &row[1..] {
                if !(k >= 0.0 && k.fract() == 0.0 && k <= 64.0) {
                    return Err(CliError::Config(format!("{label} term {i}: exponent {k} is not an integer in 0..=64")));
                }
                powers.push(k as u32);
            }
            if !row[0].is_finite() {
                return Err(CliError::Config(format!("{label} term {i}: coefficient is not finite")));
            }
            terms.push(Monomial { coef: row[0], powers });
        }
        Ok(Self { terms })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.powers.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// ∂/∂x_j.
    pub fn partial(&self, x: &[f64], j: usize) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.powers[j] > 0)
            .map(|t| {
                let rest: f64 = t
                    .powers
                    .iter()
                    .zip(x)
                    .enumerate()
                    .map(|(i, (&k, &xi))| if i == j { xi.powi(k as i32 - 1) } else { xi.powi(k as i32) })
                    .product();
                t.coef * f64::from(t.powers[j]) * rest
            })
            .sum()
    }
}

fn parse_map(specs: &[PolynomialSpec], dim: usize, label: &str) -> CliResult<Arc<Vec<Polynomial>>> {
    if specs.len() != dim {
        return Err(CliError::Config(format!("{label}: expected {dim} components, got {}", specs.len())));
    }
    let polys = specs
        .iter()
        .enumerate()
        .map(|(i, s)| Polynomial::parse(s, dim, &format!("{label}[{i}]")))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Arc::new(polys))
}

fn check_vectors(vs: &[Vec<f64>], dim: usize, label: &str) -> CliResult<Vec<Vector>> {
    vs.iter()
        .map(|v| {
            if v.len() == dim {
                Ok(Vector::from_column_slice(v))
            } else {
                Err(CliError::Config(format!("{label}: vector of length {} in dimension {dim}", v.len())))
            }
        })
        .collect()
}

/// A parsed user system with its invariant set and constant splitting.
pub struct UserSystem {
    pub system: DiscreteSystem,
    pub invariant_set: InvariantSetSample,
    pub field: SplittingField,
}

impl UserSystemSpec {
    pub fn build(&self) -> CliResult<UserSystem> {
        let signature = MetricSignature::new(self.signature.clone())?;
        let dim = signature.dimension();
        let m = Manifold::flat(signature);
        let fwd = parse_map(&self.forward, dim, "forward")?;
        let inv = parse_map(&self.inverse, dim, "inverse")?;
        let eval = |map: Arc<Vec<Polynomial>>| {
            Arc::new(move |p: &Vector| Ok(Vector::from_iterator(p.len(), map.iter().map(|q| q.eval(p.as_slice())))))
        };
        let jac = fwd.clone();
        let system = DiscreteSystem::new(self.name.clone(), m.clone(), eval(fwd), eval(inv)).with_differential(Arc::new(
            move |p: &Vector, v: &Vector| {
                Ok(Vector::from_iterator(
                    p.len(),
                    jac.iter().map(|q| (0..p.len()).map(|j| q.partial(p.as_slice(), j) * v[j]).sum::<f64>()),
                ))
            },
        ));
        let points: Vec<Point> = check_vectors(&self.points, dim, "points")?.into_iter().map(Point).collect();
        if points.is_empty() {
            return Err(CliError::Config("system.points must list at least one point".into()));
        }
        let invariant_set = InvariantSetSample::finite(&system, points)?;
        let field = SplittingField::constant(
            m,
            check_vectors(&self.stable, dim, "stable")?,
            check_vectors(&self.unstable, dim, "unstable")?,
            check_vectors(&self.null_part, dim, "null_part")?,
            format!("{} constant splitting", self.name),
        );
        Ok(UserSystem { system, invariant_set, field })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(rows: &[&[f64]]) -> PolynomialSpec {
        PolynomialSpec { terms: rows.iter().map(|r| r.to_vec()).collect() }
    }

    #[test]
    fn polynomial_value_and_partials() {
        // 3x²y − z + 2
        let p = Polynomial::parse(&poly(&[&[3.0, 2.0, 1.0, 0.0], &[-1.0, 0.0, 0.0, 1.0], &[2.0, 0.0, 0.0, 0.0]]), 3, "p")
            .unwrap();
        let x = [1.5, -2.0, 0.5];
        assert_eq!(p.eval(&x), 3.0 * 2.25 * -2.0 - 0.5 + 2.0);
        assert_eq!(p.partial(&x, 0), 6.0 * 1.5 * -2.0);
        assert_eq!(p.partial(&x, 1), 3.0 * 2.25);
        assert_eq!(p.partial(&x, 2), -1.0);
    }

    #[test]
    fn rejects_fractional_exponents_and_wrong_arity() {
        assert!(Polynomial::parse(&poly(&[&[1.0, 0.5, 0.0]]), 2, "p").is_err());
        assert!(Polynomial::parse(&poly(&[&[1.0, 1.0]]), 2, "p").is_err());
    }

    #[test]
    fn linear_user_system_builds() {
        let spec = UserSystemSpec {
            name: "diag".into(),
            signature: vec![1, 1, -1],
            forward: vec![poly(&[&[0.5, 1.0, 0.0, 0.0]]), poly(&[&[1.0, 0.0, 1.0, 0.0]]), poly(&[&[2.0, 0.0, 0.0, 1.0]])],
            inverse: vec![poly(&[&[2.0, 1.0, 0.0, 0.0]]), poly(&[&[1.0, 0.0, 1.0, 0.0]]), poly(&[&[0.5, 0.0, 0.0, 1.0]])],
            points: vec![vec![0.0; 3]],
            stable: vec![vec![1.0, 0.0, 0.0]],
            unstable: vec![vec![0.0, 0.0, 1.0]],
            null_part: vec![vec![0.0, 1.0, 1.0]],
        };
        let u = spec.build().unwrap();
        assert_eq!(u.invariant_set.closure_residual, 0.0);
        assert!(u.field.at(&Point::new(vec![0.0; 3])).is_ok());
    }
}
