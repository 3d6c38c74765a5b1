//! Indefinite metrics on flat spaces and on level-set hypersurfaces.
//!
//! Points and tangent vectors are stored in ambient coordinates. The metric
//! of a hypersurface is the ambient form restricted to its tangent spaces.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;

/// Band for calling a vector null, relative to its squared Euclidean norm.
pub const DEFAULT_EPS_NULL: f64 = 1e-9;
pub const TOL_SURFACE: f64 = 1e-9;
pub const TOL_TANGENT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSignature {
    signs: Vec<i8>,
}

impl MetricSignature {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Usage("signature must have dimension >= 1".into()));
        }
        if let Some(s) = signs.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::Usage(format!("signature entries must be +1 or -1, got {s}")));
        }
        Ok(Self { signs })
    }

    /// Minkowski signature (+, ..., +, -) on R^n.
    pub fn lorentz(n: usize) -> Self {
        assert!(n >= 1);
        let mut signs = vec![1; n];
        signs[n - 1] = -1;
        Self { signs }
    }

    /// Neutral signature (+, +, -, -) on R^4.
    pub fn split4() -> Self {
        Self { signs: vec![1, 1, -1, -1] }
    }

    pub fn dimension(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    #[inline]
    pub fn form(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.signs.len());
        debug_assert_eq!(v.len(), self.signs.len());
        self.signs
            .iter()
            .zip(u.iter().zip(v))
            .map(|(s, (a, b))| f64::from(*s) * a * b)
            .sum()
    }

    /// Index raising: the diagonal metric is its own inverse.
    pub fn raise(&self, covector: &Vector) -> Vector {
        Vector::from_iterator(
            covector.len(),
            covector.iter().zip(&self.signs).map(|(c, s)| c * f64::from(*s)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatPseudoSpace {
    pub signature: MetricSignature,
}

impl FlatPseudoSpace {
    pub fn new(signature: MetricSignature) -> Self {
        Self { signature }
    }

    pub fn dimension(&self) -> usize {
        self.signature.dimension()
    }

    pub fn inner(&self, u: &Vector, v: &Vector) -> f64 {
        self.signature.form(u.as_slice(), v.as_slice())
    }
}

pub type ScalarField = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type DomainPredicate = Arc<dyn Fn(&Vector) -> bool + Send + Sync>;
/// Directional derivative of the unit normal: (p, v) -> dν_p(v).
pub type NormalDerivative = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;

/// Step of the central difference used for normal derivatives when no
/// closed form is available.
pub const H_CURVE: f64 = 1e-6;

/// Level set {F = c} of a flat pseudo-Euclidean space, optionally restricted
/// to an open subset.
#[derive(Clone)]
pub struct Hypersurface {
    name: String,
    ambient: FlatPseudoSpace,
    constraint: ScalarField,
    level: f64,
    /// Euclidean gradient of the constraint.
    gradient: VectorField,
    domain: Option<DomainPredicate>,
    normal_sign: f64,
    normal_derivative: Option<NormalDerivative>,
}

impl fmt::Debug for Hypersurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypersurface")
            .field("name", &self.name)
            .field("ambient", &self.ambient)
            .field("level", &self.level)
            .field("normal_sign", &self.normal_sign)
            .finish_non_exhaustive()
    }
}

impl Hypersurface {
    pub fn new(
        name: impl Into<String>,
        ambient: FlatPseudoSpace,
        constraint: ScalarField,
        level: f64,
        gradient: VectorField,
        normal_sign: f64,
    ) -> Result<Self> {
        if normal_sign != 1.0 && normal_sign != -1.0 {
            return Err(Error::Usage("normal_sign must be +1 or -1".into()));
        }
        Ok(Self {
            name: name.into(),
            ambient,
            constraint,
            level,
            gradient,
            domain: None,
            normal_sign,
            normal_derivative: None,
        })
    }

    pub fn with_domain(mut self, domain: DomainPredicate) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_normal_derivative(mut self, d: NormalDerivative) -> Self {
        self.normal_derivative = Some(d);
        self
    }

    /// The upper sheet of x² + y² − z² = −1 in Minkowski space (H²(1)).
    pub fn hyperboloid() -> Self {
        let ambient = FlatPseudoSpace::new(MetricSignature::lorentz(3));
        Self::new(
            "H2(1)",
            ambient,
            Arc::new(|p: &Vector| p[0] * p[0] + p[1] * p[1] - p[2] * p[2]),
            -1.0,
            Arc::new(|p: &Vector| Vector::from_vec(vec![2.0 * p[0], 2.0 * p[1], -2.0 * p[2]])),
            -1.0,
        )
        .expect("static hyperboloid data")
        .with_domain(Arc::new(|p: &Vector| p[2] > 0.0))
        // ν(p) = p, so dν(v) = v.
        .with_normal_derivative(Arc::new(|_p: &Vector, v: &Vector| v.clone()))
    }

    /// H²(1) with the apex (0, 0, 1) removed.
    pub fn punctured_hyperboloid() -> Self {
        let mut h = Self::hyperboloid();
        h.name = "H2(1) minus apex".into();
        h.domain = Some(Arc::new(|p: &Vector| {
            let apex_dist = (p[0] * p[0] + p[1] * p[1] + (p[2] - 1.0).powi(2)).sqrt();
            p[2] > 0.0 && apex_dist > 1e-12
        }));
        h
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient(&self) -> &FlatPseudoSpace {
        &self.ambient
    }

    pub fn normal_sign(&self) -> f64 {
        self.normal_sign
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn constraint_value(&self, p: &Vector) -> f64 {
        (self.constraint)(p)
    }

    pub fn in_domain(&self, p: &Vector) -> bool {
        self.domain.as_ref().is_none_or(|d| d(p))
    }

    /// Unit normal ν(p) with g(ν, ν) = normal_sign. Defined off the surface
    /// as well, wherever the gradient is non-null.
    pub fn normal(&self, p: &Vector) -> Result<Vector> {
        let raised = self.ambient.signature.raise(&(self.gradient)(p));
        let gg = self.ambient.inner(&raised, &raised);
        if !(gg.abs() > 0.0) || !gg.is_finite() {
            return Err(Error::Degenerate(format!("null or vanishing normal on {}", self.name)));
        }
        if gg.signum() != self.normal_sign {
            return Err(Error::Domain(format!(
                "normal of {} has causal sign {} but {} was declared",
                self.name,
                gg.signum(),
                self.normal_sign
            )));
        }
        Ok(raised / gg.abs().sqrt())
    }

    /// Directional derivative of ν at p along v.
    pub fn normal_derivative(&self, p: &Vector, v: &Vector) -> Result<Vector> {
        if let Some(d) = &self.normal_derivative {
            return Ok(d(p, v));
        }
        let plus = self.normal(&(p + v * H_CURVE))?;
        let minus = self.normal(&(p - v * H_CURVE))?;
        Ok((plus - minus) / (2.0 * H_CURVE))
    }
}

#[derive(Debug, Clone)]
pub enum Manifold {
    Flat(FlatPseudoSpace),
    Hypersurface(Hypersurface),
}

impl From<FlatPseudoSpace> for Manifold {
    fn from(f: FlatPseudoSpace) -> Self {
        Manifold::Flat(f)
    }
}

impl From<Hypersurface> for Manifold {
    fn from(h: Hypersurface) -> Self {
        Manifold::Hypersurface(h)
    }
}

impl Manifold {
    pub fn flat(signature: MetricSignature) -> Self {
        Manifold::Flat(FlatPseudoSpace::new(signature))
    }

    pub fn ambient(&self) -> &FlatPseudoSpace {
        match self {
            Manifold::Flat(f) => f,
            Manifold::Hypersurface(h) => h.ambient(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient().dimension()
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self {
            Manifold::Flat(f) => f.dimension(),
            Manifold::Hypersurface(h) => h.ambient().dimension() - 1,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Manifold::Flat(f) => format!("R^n signature {:?}", f.signature.signs()),
            Manifold::Hypersurface(h) => h.name().to_string(),
        }
    }

    /// Ambient bilinear form; callers are responsible for tangency.
    #[inline]
    pub fn inner(&self, u: &Vector, v: &Vector) -> f64 {
        self.ambient().inner(u, v)
    }

    pub fn membership_residual(&self, p: &Vector) -> f64 {
        match self {
            Manifold::Flat(_) => 0.0,
            Manifold::Hypersurface(h) => {
                let scale = p.norm_squared().max(1.0);
                (h.constraint_value(p) - h.level()).abs() / scale
            }
        }
    }

    pub fn contains(&self, p: &Vector) -> bool {
        if p.len() != self.ambient_dim() || p.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match self {
            Manifold::Flat(_) => true,
            Manifold::Hypersurface(h) => {
                h.in_domain(p) && self.membership_residual(p) <= TOL_SURFACE
            }
        }
    }

    pub fn check_point(&self, p: &Vector) -> Result<()> {
        if p.len() != self.ambient_dim() {
            return Err(Error::Usage(format!(
                "point has {} coordinates, manifold ambient dimension is {}",
                p.len(),
                self.ambient_dim()
            )));
        }
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "point {:?} is not on {} (residual {:e})",
                p.as_slice(),
                self.label(),
                self.membership_residual(p)
            )))
        }
    }

    pub fn normal(&self, p: &Vector) -> Result<Option<Vector>> {
        match self {
            Manifold::Flat(_) => Ok(None),
            Manifold::Hypersurface(h) => h.normal(p).map(Some),
        }
    }

    /// |g(ν, v)| relative to the Euclidean norm of v; zero on flat spaces.
    pub fn tangency_residual(&self, p: &Vector, v: &Vector) -> Result<f64> {
        match self.normal(p)? {
            None => Ok(0.0),
            Some(nu) => {
                let n = v.norm();
                if n == 0.0 {
                    Ok(0.0)
                } else {
                    Ok(self.inner(&nu, v).abs() / n)
                }
            }
        }
    }

    pub fn is_tangent(&self, p: &Vector, v: &Vector) -> bool {
        self.tangency_residual(p, v).is_ok_and(|r| r <= TOL_TANGENT)
    }

    /// Orthogonal projection (with respect to g) onto T_pM.
    pub fn project(&self, p: &Vector, w: &Vector) -> Result<Vector> {
        match self {
            Manifold::Flat(_) => Ok(w.clone()),
            Manifold::Hypersurface(h) => {
                let nu = h.normal(p)?;
                Ok(w - &nu * (h.normal_sign() * self.inner(w, &nu)))
            }
        }
    }

    /// A Euclidean-orthonormal basis of T_pM, as ambient vectors.
    pub fn tangent_basis(&self, p: &Vector) -> Result<Vec<Vector>> {
        let n = self.ambient_dim();
        let target = self.dim();
        let mut basis: Vec<Vector> = Vec::with_capacity(target);
        let mut candidates: Vec<Vector> = (0..n)
            .map(|i| self.project(p, &Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })))
            .collect::<Result<_>>()?;
        // Largest projections first keeps the Gram-Schmidt well conditioned.
        candidates.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        for mut c in candidates {
            for b in &basis {
                let d = c.dot(b);
                c -= b * d;
            }
            let norm = c.norm();
            if norm > 1e-8 {
                basis.push(c / norm);
            }
            if basis.len() == target {
                break;
            }
        }
        if basis.len() != target {
            return Err(Error::Rank(format!("could not build a tangent basis at {:?}", p.as_slice())));
        }
        Ok(basis)
    }
}

/// A point in ambient coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vector);

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Point(Vector::from_vec(coords.into()))
    }

    pub fn coords(&self) -> &Vector {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.as_slice().to_vec()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// Same base point up to rounding.
    pub fn same_as(&self, other: &Point) -> bool {
        self.0.len() == other.0.len()
            && self.distance(other) <= 1e-9 * (1.0 + self.0.norm().max(other.0.norm()))
    }
}

impl From<Vector> for Point {
    fn from(v: Vector) -> Self {
        Point(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: Point,
    pub components: Vector,
}

impl TangentVector {
    /// Validates that `components` is tangent at `base`.
    pub fn new(m: &Manifold, base: Point, components: Vector) -> Result<Self> {
        m.check_point(base.coords())?;
        if components.len() != m.ambient_dim() {
            return Err(Error::Usage(format!(
                "vector has {} components, expected {}",
                components.len(),
                m.ambient_dim()
            )));
        }
        let r = m.tangency_residual(base.coords(), &components)?;
        if r > TOL_TANGENT {
            return Err(Error::Domain(format!(
                "vector {:?} is not tangent at {:?} (residual {r:e})",
                components.as_slice(),
                base.coords().as_slice()
            )));
        }
        Ok(Self { base, components })
    }

    /// Skips validation; for vectors produced by the crate's own projections.
    pub fn new_unchecked(base: Point, components: Vector) -> Self {
        Self { base, components }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|x| *x == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Causal {
    Spacelike,
    Timelike,
    Null,
}

pub fn metric_eval(m: &Manifold, p: &Point, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    if !u.base.same_as(p) || !v.base.same_as(p) {
        return Err(Error::Usage("metric_eval: vectors are attached to different base points".into()));
    }
    if u.components.len() != m.ambient_dim() || v.components.len() != m.ambient_dim() {
        return Err(Error::Usage("metric_eval: dimension mismatch".into()));
    }
    Ok(m.inner(&u.components, &v.components))
}

/// Classifies by the sign of g(v, v); |g(v,v)| within `eps_null`·|v|² counts
/// as null, and so does the zero vector.
pub fn causal_character(m: &Manifold, v: &TangentVector, eps_null: f64) -> Causal {
    classify(m, &v.components, eps_null)
}

pub fn classify(m: &Manifold, v: &Vector, eps_null: f64) -> Causal {
    let g = m.inner(v, v);
    if g.abs() <= eps_null * v.norm_squared() {
        Causal::Null
    } else if g > 0.0 {
        Causal::Spacelike
    } else {
        Causal::Timelike
    }
}

/// w − s·g(w, ν)·ν, with s = g(ν, ν).
pub fn tangent_project(h: &Hypersurface, p: &Point, w: &Vector) -> Result<TangentVector> {
    let m = Manifold::Hypersurface(h.clone());
    m.check_point(p.coords())?;
    if w.len() != m.ambient_dim() {
        return Err(Error::Usage("tangent_project: dimension mismatch".into()));
    }
    let projected = m.project(p.coords(), w)?;
    Ok(TangentVector::new_unchecked(p.clone(), projected))
}

/// Uniformly random point of H²(1) with |x|, |y| ≤ `extent`.
pub fn random_hyperboloid_point<R: Rng + ?Sized>(rng: &mut R, extent: f64) -> Point {
    let x = rng.random_range(-extent..extent);
    let y = rng.random_range(-extent..extent);
    Point::new(vec![x, y, (1.0 + x * x + y * y).sqrt()])
}

/// Random tangent vector at p with standard-normal-ish coordinates in a
/// Euclidean tangent basis.
pub fn random_tangent<R: Rng + ?Sized>(m: &Manifold, p: &Point, rng: &mut R) -> Result<TangentVector> {
    let basis = m.tangent_basis(p.coords())?;
    let mut v = Vector::zeros(m.ambient_dim());
    for b in &basis {
        v += b * rng.random_range(-1.0..1.0);
    }
    Ok(TangentVector::new_unchecked(p.clone(), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn lorentz3() -> Manifold {
        Manifold::flat(MetricSignature::lorentz(3))
    }

    #[test]
    fn signature_rejects_bad_entries() {
        assert!(MetricSignature::new(vec![]).is_err());
        assert!(MetricSignature::new(vec![1, 0]).is_err());
        assert_eq!(MetricSignature::new(vec![1, -1]).unwrap().dimension(), 2);
    }

    #[test]
    fn metric_eval_examples() {
        let r4 = Manifold::flat(MetricSignature::split4());
        let p = Point::new(vec![0.0; 4]);
        let e1 = TangentVector::new(&r4, p.clone(), v(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(metric_eval(&r4, &p, &e1, &e1).unwrap(), 1.0);

        let m = lorentz3();
        let q = Point::new(vec![0.0; 3]);
        let null = TangentVector::new(&m, q.clone(), v(&[1.0, 1.0, 2f64.sqrt()])).unwrap();
        assert_abs_diff_eq!(metric_eval(&m, &q, &null, &null).unwrap(), 0.0, epsilon = 1e-15);
        let zero = TangentVector::new(&m, q.clone(), Vector::zeros(3)).unwrap();
        assert_eq!(metric_eval(&m, &q, &zero, &null).unwrap(), 0.0);
    }

    #[test]
    fn metric_eval_base_mismatch() {
        let m = lorentz3();
        let p = Point::new(vec![0.0; 3]);
        let q = Point::new(vec![1.0, 0.0, 0.0]);
        let u = TangentVector::new(&m, p.clone(), v(&[1.0, 0.0, 0.0])).unwrap();
        let w = TangentVector::new(&m, q, v(&[1.0, 0.0, 0.0])).unwrap();
        assert!(matches!(metric_eval(&m, &p, &u, &w), Err(Error::Usage(_))));
    }

    #[test]
    fn causal_examples() {
        let m = lorentz3();
        let p = Point::new(vec![0.0; 3]);
        let tv = |xs: &[f64]| TangentVector::new(&m, p.clone(), v(xs)).unwrap();
        assert_eq!(causal_character(&m, &tv(&[1.0, 0.0, 0.0]), DEFAULT_EPS_NULL), Causal::Spacelike);
        assert_eq!(causal_character(&m, &tv(&[0.0, 0.0, 1.0]), DEFAULT_EPS_NULL), Causal::Timelike);
        assert_eq!(
            causal_character(&m, &tv(&[1.0, 1.0, 2f64.sqrt()]), DEFAULT_EPS_NULL),
            Causal::Null
        );
        let zero = tv(&[0.0, 0.0, 0.0]);
        assert!(zero.is_zero());
        assert_eq!(causal_character(&m, &zero, DEFAULT_EPS_NULL), Causal::Null);
    }

    #[test]
    fn diagonal_null_line_in_split_signature() {
        let r4 = Manifold::flat(MetricSignature::split4());
        for a in [-3.0, -0.1, 1e-4, 1.0, 250.0] {
            assert_eq!(classify(&r4, &v(&[a, a, a, a]), DEFAULT_EPS_NULL), Causal::Null);
        }
    }

    #[test]
    fn hyperboloid_projection() {
        let h = Hypersurface::hyperboloid();
        let apex = Point::new(vec![0.0, 0.0, 1.0]);
        let t = tangent_project(&h, &apex, &v(&[0.3, -0.7, 5.0])).unwrap();
        assert_abs_diff_eq!(t.components, v(&[0.3, -0.7, 0.0]), epsilon = 1e-15);

        let p = Point::new(vec![1.0, 0.0, 2f64.sqrt()]);
        let killed = tangent_project(&h, &p, p.coords()).unwrap();
        assert!(killed.components.norm() < 1e-14);
        let already = tangent_project(&h, &p, &v(&[0.0, 1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(already.components, v(&[0.0, 1.0, 0.0]), epsilon = 1e-15);
    }

    #[test]
    fn projection_off_manifold_is_domain_error() {
        let h = Hypersurface::hyperboloid();
        let off = Point::new(vec![0.0, 0.0, 2.0]);
        assert!(matches!(tangent_project(&h, &off, &v(&[1.0, 0.0, 0.0])), Err(Error::Domain(_))));
        let lower = Point::new(vec![0.0, 0.0, -1.0]);
        assert!(tangent_project(&h, &lower, &v(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn projection_idempotent_and_normal_free() {
        let h = Hypersurface::hyperboloid();
        let m = Manifold::Hypersurface(h.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_hyperboloid_point(&mut rng, 3.0);
            let w = v(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            let once = tangent_project(&h, &p, &w).unwrap();
            let twice = tangent_project(&h, &p, &once.components).unwrap();
            assert!((&once.components - &twice.components).norm() <= 1e-12 * (1.0 + w.norm()));
            assert!(m.is_tangent(p.coords(), &once.components));
            let nu = h.normal(p.coords()).unwrap();
            assert_abs_diff_eq!(m.inner(&nu, &nu), -1.0, epsilon = 1e-12);
            assert_abs_diff_eq!((&nu - p.coords()).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn generic_normal_derivative_matches_closed_form() {
        let h = Hypersurface::hyperboloid();
        let generic = Hypersurface::new(
            "generic H2",
            h.ambient().clone(),
            Arc::new(|p: &Vector| p[0] * p[0] + p[1] * p[1] - p[2] * p[2]),
            -1.0,
            Arc::new(|p: &Vector| v(&[2.0 * p[0], 2.0 * p[1], -2.0 * p[2]])),
            -1.0,
        )
        .unwrap();
        let p = v(&[0.5, -1.0, (1.0f64 + 0.25 + 1.0).sqrt()]);
        // The closed form is only valid along tangent directions.
        let w = v(&[0.2, 0.1, 0.3]);
        let dir = &w + &p * h.ambient().inner(&w, &p);
        let exact = h.normal_derivative(&p, &dir).unwrap();
        let fd = generic.normal_derivative(&p, &dir).unwrap();
        assert!((exact - fd).norm() < 1e-6);
    }

    #[test]
    fn tangent_basis_spans_tangent_plane() {
        let m = Manifold::Hypersurface(Hypersurface::hyperboloid());
        let p = v(&[1.0, 0.0, 2f64.sqrt()]);
        let b = m.tangent_basis(&p).unwrap();
        assert_eq!(b.len(), 2);
        for x in &b {
            assert!(m.is_tangent(&p, x));
            assert_abs_diff_eq!(x.norm(), 1.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(b[0].dot(&b[1]), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn punctured_hyperboloid_excludes_apex() {
        let m = Manifold::Hypersurface(Hypersurface::punctured_hyperboloid());
        assert!(!m.contains(&v(&[0.0, 0.0, 1.0])));
        assert!(m.contains(&v(&[1.0, 0.0, 2f64.sqrt()])));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vec3() -> impl Strategy<Value = Vector> {
            prop::array::uniform3(-10.0f64..10.0).prop_map(|a| Vector::from_column_slice(&a))
        }

        proptest! {
            #[test]
            fn metric_symmetric_bilinear(u in vec3(), w in vec3(), z in vec3(), lam in -5.0f64..5.0) {
                let m = lorentz3();
                let guv = m.inner(&u, &w);
                prop_assert_eq!(guv, m.inner(&w, &u));
                let lhs = m.inner(&(&u + &z * lam), &w);
                let rhs = guv + lam * m.inner(&z, &w);
                let scale = 1.0 + u.norm() * w.norm() + lam.abs() * z.norm() * w.norm();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
            }
        }
    }
}
