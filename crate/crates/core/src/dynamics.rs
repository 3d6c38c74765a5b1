//! Discrete systems and the derivative cocycle.
//!
//! Iterated differentials grow or shrink geometrically (16ⁿ is typical), so
//! cocycle states are kept as a Euclidean-unit direction plus the natural
//! log of the magnitude.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point, TangentVector, Vector, DEFAULT_EPS_NULL};

pub type PointMap = Arc<dyn Fn(&Vector) -> Result<Vector> + Send + Sync>;
/// (p, v) ↦ Df_p(v) in ambient coordinates.
pub type DifferentialMap = Arc<dyn Fn(&Vector, &Vector) -> Result<Vector> + Send + Sync>;

#[derive(Clone)]
pub struct DiscreteSystem {
    name: String,
    manifold: Manifold,
    forward: PointMap,
    inverse: PointMap,
    differential: Option<DifferentialMap>,
}

impl fmt::Debug for DiscreteSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteSystem")
            .field("name", &self.name)
            .field("manifold", &self.manifold.label())
            .field("analytic_differential", &self.differential.is_some())
            .finish()
    }
}

impl DiscreteSystem {
    pub fn new(name: impl Into<String>, manifold: Manifold, forward: PointMap, inverse: PointMap) -> Self {
        Self { name: name.into(), manifold, forward, inverse, differential: None }
    }

    pub fn with_differential(mut self, d: DifferentialMap) -> Self {
        self.differential = Some(d);
        self
    }

    /// Drops the analytic differential so [`differential_at`] falls back to
    /// finite differences.
    pub fn without_differential(mut self) -> Self {
        self.differential = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn has_analytic_differential(&self) -> bool {
        self.differential.is_some()
    }

    pub fn forward(&self, p: &Point) -> Result<Point> {
        self.apply(&self.forward, p, "forward")
    }

    pub fn inverse(&self, p: &Point) -> Result<Point> {
        self.apply(&self.inverse, p, "inverse")
    }

    fn apply(&self, map: &PointMap, p: &Point, which: &str) -> Result<Point> {
        self.manifold.check_point(p.coords())?;
        let q = map(p.coords())?;
        if !self.manifold.contains(&q) {
            return Err(Error::Domain(format!(
                "{which} image {:?} of {:?} left {}",
                q.as_slice(),
                p.coords().as_slice(),
                self.manifold.label()
            )));
        }
        Ok(Point(q))
    }
}

/// n-fold composition of the forward map, or of the inverse for n < 0.
pub fn iterate(s: &DiscreteSystem, p: &Point, n: i64) -> Result<Point> {
    s.manifold().check_point(p.coords())?;
    let mut q = p.clone();
    for _ in 0..n.unsigned_abs() {
        q = if n > 0 { s.forward(&q)? } else { s.inverse(&q)? };
    }
    Ok(q)
}

pub fn differential_at(s: &DiscreteSystem, p: &Point, v: &TangentVector) -> Result<TangentVector> {
    if !v.base.same_as(p) {
        return Err(Error::Usage("differential_at: vector is attached elsewhere".into()));
    }
    let image = s.forward(p)?;
    let components = match &s.differential {
        Some(d) => d(p.coords(), &v.components)?,
        None => central_difference(s, p.coords(), &v.components)?,
    };
    let components = s.manifold().project(image.coords(), &components)?;
    Ok(TangentVector::new_unchecked(image, components))
}

/// Finite-difference differential, regardless of whether an analytic one is
/// available.
pub fn finite_difference_differential(s: &DiscreteSystem, p: &Point, v: &TangentVector) -> Result<TangentVector> {
    let image = s.forward(p)?;
    let d = central_difference(s, p.coords(), &v.components)?;
    let d = s.manifold().project(image.coords(), &d)?;
    Ok(TangentVector::new_unchecked(image, d))
}

fn central_difference(s: &DiscreteSystem, p: &Vector, v: &Vector) -> Result<Vector> {
    let norm = v.norm();
    if norm == 0.0 {
        return Ok(Vector::zeros(v.len()));
    }
    let unit = v / norm;
    let h = f64::EPSILON.cbrt() * p.norm().max(1.0);
    let plus = (s.forward)(&(p + &unit * h))?;
    let minus = (s.forward)(&(p - &unit * h))?;
    let d = (plus - minus) * (norm / (2.0 * h));
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!("finite-difference differential overflowed at {:?}", p.as_slice())));
    }
    Ok(d)
}

/// Direction (unit Euclidean norm) and natural-log magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledVector {
    pub direction: Vector,
    pub log_scale: f64,
}

impl ScaledVector {
    pub fn from_vector(v: &Vector) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Rank("cannot scale a zero or non-finite vector".into()));
        }
        Ok(Self { direction: v / n, log_scale: n.ln() })
    }

    /// Materializes the vector; overflows for large log scales.
    pub fn to_vector(&self) -> Vector {
        &self.direction * self.log_scale.exp()
    }

    /// Replace by the image of the direction under a linear map, folding
    /// the norm of the image into the log scale.
    fn advance(&mut self, image: Vector) -> Result<()> {
        let n = image.norm();
        if !(n > f64::MIN_POSITIVE) || !n.is_finite() {
            return Err(Error::Rank("differential collapsed a direction".into()));
        }
        self.direction = image / n;
        self.log_scale += n.ln();
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

/// Signed value stored as sign and natural log of the magnitude;
/// `log_abs = -inf` exactly when `sign` is `Zero`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEntry {
    pub n: usize,
    pub log_abs: f64,
    pub sign: Sign,
}

impl GrowthEntry {
    fn from_parts(n: usize, log_scale: f64, g_unit: f64, eps_null: f64) -> Self {
        if g_unit.abs() <= eps_null {
            GrowthEntry { n, log_abs: f64::NEG_INFINITY, sign: Sign::Zero }
        } else {
            GrowthEntry {
                n,
                log_abs: log_scale + g_unit.abs().ln(),
                sign: if g_unit > 0.0 { Sign::Positive } else { Sign::Negative },
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    pub fn value(&self) -> f64 {
        match self.sign {
            Sign::Zero => 0.0,
            Sign::Positive => self.log_abs.exp(),
            Sign::Negative => -self.log_abs.exp(),
        }
    }
}

/// |g(Dfⁿv, Dfⁿv)| for n = 0..=N, in log form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub entries: Vec<GrowthEntry>,
}

impl GrowthRecord {
    pub fn horizon(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    /// log(r_n / r_0); NaN if the seed is null.
    pub fn log_ratio(&self, n: usize) -> f64 {
        let e0 = self.entries[0];
        if e0.is_zero() {
            return f64::NAN;
        }
        self.entries[n].log_abs - e0.log_abs
    }

    /// r_n / r_0 as plain numbers (0 for exact-null entries).
    pub fn ratios(&self) -> Vec<f64> {
        (0..self.entries.len()).map(|n| self.log_ratio(n).exp()).collect()
    }

    pub fn finite_count(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_zero()).count()
    }

    pub fn all_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }
}

/// Several vectors pushed along one orbit: `states[n][k]` is Dfⁿ of seed k
/// at `points[n]`.
#[derive(Debug, Clone)]
pub struct CocycleEnsemble {
    pub points: Vec<Point>,
    pub states: Vec<Vec<ScaledVector>>,
}

impl CocycleEnsemble {
    pub fn horizon(&self) -> usize {
        self.points.len() - 1
    }

    pub fn growth(&self, m: &Manifold, k: usize, eps_null: f64) -> GrowthRecord {
        let entries = self
            .states
            .iter()
            .enumerate()
            .map(|(n, st)| {
                let sv = &st[k];
                GrowthEntry::from_parts(n, 2.0 * sv.log_scale, m.inner(&sv.direction, &sv.direction), eps_null)
            })
            .collect();
        GrowthRecord { entries }
    }

    /// g(Dfⁿ v_i, Dfⁿ v_j) at step n, signed-log form.
    pub fn cross(&self, m: &Manifold, n: usize, i: usize, j: usize, eps_null: f64) -> GrowthEntry {
        let (a, b) = (&self.states[n][i], &self.states[n][j]);
        GrowthEntry::from_parts(n, a.log_scale + b.log_scale, m.inner(&a.direction, &b.direction), eps_null)
    }
}

/// Iterates the differential on all `seeds` along the forward orbit of p.
pub fn cocycle_ensemble(s: &DiscreteSystem, p: &Point, seeds: &[Vector], horizon: usize) -> Result<CocycleEnsemble> {
    let m = s.manifold();
    m.check_point(p.coords())?;
    let mut states: Vec<Vec<ScaledVector>> = Vec::with_capacity(horizon + 1);
    let mut points = Vec::with_capacity(horizon + 1);
    let first: Vec<ScaledVector> = seeds.iter().map(ScaledVector::from_vector).collect::<Result<_>>()?;
    states.push(first);
    points.push(p.clone());
    for _ in 0..horizon {
        let here = points.last().expect("non-empty");
        let next = s.forward(here)?;
        let mut row = states.last().expect("non-empty").clone();
        for sv in row.iter_mut() {
            let image = match &s.differential {
                Some(d) => d(here.coords(), &sv.direction)?,
                None => central_difference(s, here.coords(), &sv.direction)?,
            };
            let image = m.project(next.coords(), &image)?;
            sv.advance(image)?;
        }
        states.push(row);
        points.push(next);
    }
    Ok(CocycleEnsemble { points, states })
}

pub fn cocycle_growth(s: &DiscreteSystem, p: &Point, v: &TangentVector, horizon: usize) -> Result<GrowthRecord> {
    if horizon < 1 {
        return Err(Error::Usage("cocycle_growth needs a horizon >= 1".into()));
    }
    let ens = cocycle_ensemble(s, p, std::slice::from_ref(&v.components), horizon)?;
    Ok(ens.growth(s.manifold(), 0, DEFAULT_EPS_NULL))
}

/// g(Dfⁿv, Dfⁿw) for n = 0..=N.
pub fn cross_growth(
    s: &DiscreteSystem,
    p: &Point,
    v: &TangentVector,
    w: &TangentVector,
    horizon: usize,
) -> Result<Vec<GrowthEntry>> {
    if horizon < 1 {
        return Err(Error::Usage("cross_growth needs a horizon >= 1".into()));
    }
    let ens = cocycle_ensemble(s, p, &[v.components.clone(), w.components.clone()], horizon)?;
    Ok((0..=horizon).map(|n| ens.cross(s.manifold(), n, 0, 1, DEFAULT_EPS_NULL)).collect())
}

/// Matrix of Df_p restricted to tangent spaces, in Euclidean-orthonormal
/// tangent bases at p (columns) and f(p) (rows).
pub fn tangent_matrix(s: &DiscreteSystem, p: &Point) -> Result<(DMatrix<f64>, Vec<Vector>, Vec<Vector>)> {
    let m = s.manifold();
    let q = s.forward(p)?;
    let src = m.tangent_basis(p.coords())?;
    let dst = m.tangent_basis(q.coords())?;
    let k = src.len();
    let mut a = DMatrix::zeros(k, k);
    for (j, b) in src.iter().enumerate() {
        let img = differential_at(s, p, &TangentVector::new_unchecked(p.clone(), b.clone()))?;
        for (i, d) in dst.iter().enumerate() {
            a[(i, j)] = d.dot(&img.components);
        }
    }
    Ok((a, src, dst))
}

/// |g(Df⁻ⁿ v, Df⁻ⁿ v)| along the backward orbit, via the inverse map and
/// linear solves against the forward differential.
pub fn backward_cocycle_growth(s: &DiscreteSystem, p: &Point, v: &TangentVector, horizon: usize) -> Result<GrowthRecord> {
    let m = s.manifold();
    let mut here = p.clone();
    let mut sv = ScaledVector::from_vector(&v.components)?;
    let mut entries = Vec::with_capacity(horizon + 1);
    entries.push(GrowthEntry::from_parts(0, 2.0 * sv.log_scale, m.inner(&sv.direction, &sv.direction), DEFAULT_EPS_NULL));
    for n in 1..=horizon {
        let pre = s.inverse(&here)?;
        let (a, src, dst) = tangent_matrix(s, &pre)?;
        let rhs = Vector::from_iterator(dst.len(), dst.iter().map(|d| d.dot(&sv.direction)));
        let coeffs = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Rank("differential is singular on the backward orbit".into()))?;
        let mut image = Vector::zeros(m.ambient_dim());
        for (c, b) in coeffs.iter().zip(&src) {
            image += b * *c;
        }
        sv.advance(image)?;
        entries.push(GrowthEntry::from_parts(n, 2.0 * sv.log_scale, m.inner(&sv.direction, &sv.direction), DEFAULT_EPS_NULL));
        here = pre;
    }
    Ok(GrowthRecord { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricSignature;
    use approx::assert_abs_diff_eq;

    fn diag_system() -> DiscreteSystem {
        let m = Manifold::flat(MetricSignature::split4());
        let scale = [0.5, 1.0 / 3.0, 1.0, 4.0];
        DiscreteSystem::new(
            "diag",
            m,
            Arc::new(move |p: &Vector| Ok(Vector::from_fn(4, |i, _| p[i] * scale[i]))),
            Arc::new(move |p: &Vector| Ok(Vector::from_fn(4, |i, _| p[i] / scale[i]))),
        )
        .with_differential(Arc::new(move |_p: &Vector, v: &Vector| Ok(Vector::from_fn(4, |i, _| v[i] * scale[i]))))
    }

    fn e(i: usize) -> Vector {
        Vector::from_fn(4, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    fn at_origin(v: Vector) -> TangentVector {
        TangentVector::new_unchecked(Point::new(vec![0.0; 4]), v)
    }

    #[test]
    fn iterate_zero_is_identity() {
        let s = diag_system();
        let p = Point::new(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(iterate(&s, &p, 0).unwrap(), p);
        let q = iterate(&s, &p, 3).unwrap();
        let back = iterate(&s, &q, -3).unwrap();
        assert!(back.distance(&p) < 1e-12);
    }

    #[test]
    fn expanding_axis_growth() {
        let s = diag_system();
        let origin = Point::new(vec![0.0; 4]);
        let rec = cocycle_growth(&s, &origin, &at_origin(e(3)), 10).unwrap();
        assert_abs_diff_eq!(rec.entries[10].log_abs, 10.0 * 16f64.ln(), epsilon = 1e-12);
        assert_eq!(rec.entries[10].sign, Sign::Negative);
        let neutral = cocycle_growth(&s, &origin, &at_origin(e(2)), 10).unwrap();
        assert!(neutral.entries.iter().all(|x| x.log_abs.abs() < 1e-15));
    }

    #[test]
    fn growth_does_not_overflow() {
        let s = diag_system();
        let origin = Point::new(vec![0.0; 4]);
        let rec = cocycle_growth(&s, &origin, &at_origin(e(3)), 400).unwrap();
        assert_abs_diff_eq!(rec.entries[400].log_abs, 400.0 * 16f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn cross_terms_on_axes() {
        let s = diag_system();
        let origin = Point::new(vec![0.0; 4]);
        let orth = cross_growth(&s, &origin, &at_origin(e(0)), &at_origin(e(1)), 12).unwrap();
        assert!(orth.iter().all(|g| g.is_zero() && g.value() == 0.0));
        let same = cross_growth(&s, &origin, &at_origin(e(0)), &at_origin(e(0)), 12).unwrap();
        for g in &same {
            assert_abs_diff_eq!(g.value(), 4f64.powi(-(g.n as i32)), epsilon = 1e-15);
        }
    }

    #[test]
    fn finite_difference_fallback() {
        let s = diag_system();
        let p = Point::new(vec![0.3, -2.0, 1.0, 5.0]);
        let v = TangentVector::new_unchecked(p.clone(), Vector::from_vec(vec![1.0, 1.0, -1.0, 0.5]));
        let exact = differential_at(&s, &p, &v).unwrap();
        let fd = finite_difference_differential(&s, &p, &v).unwrap();
        assert!((&exact.components - &fd.components).norm() < 1e-8);
        let no_d = s.clone().without_differential();
        let fd2 = differential_at(&no_d, &p, &v).unwrap();
        assert!((fd2.components - fd.components).norm() == 0.0);
    }

    #[test]
    fn zero_seed_is_rank_error() {
        let s = diag_system();
        let origin = Point::new(vec![0.0; 4]);
        assert!(matches!(cocycle_growth(&s, &origin, &at_origin(Vector::zeros(4)), 3), Err(Error::Rank(_))));
    }

    #[test]
    fn singular_differential_is_rank_error() {
        let m = Manifold::flat(MetricSignature::lorentz(2));
        let s = DiscreteSystem::new(
            "squash",
            m,
            Arc::new(|p: &Vector| Ok(Vector::from_vec(vec![p[0], 0.0]))),
            Arc::new(|p: &Vector| Ok(p.clone())),
        )
        .with_differential(Arc::new(|_p: &Vector, v: &Vector| Ok(Vector::from_vec(vec![v[0], 0.0]))));
        let o = Point::new(vec![0.0, 0.0]);
        let v = TangentVector::new_unchecked(o.clone(), Vector::from_vec(vec![0.0, 1.0]));
        assert!(matches!(cocycle_growth(&s, &o, &v, 3), Err(Error::Rank(_))));
    }

    #[test]
    fn backward_growth_inverts_rates() {
        let s = diag_system();
        let origin = Point::new(vec![0.0; 4]);
        let rec = backward_cocycle_growth(&s, &origin, &at_origin(e(0)), 5).unwrap();
        assert_abs_diff_eq!(rec.log_ratio(5), 5.0 * 4f64.ln(), epsilon = 1e-10);
    }

    #[test]
    fn scaled_vector_consistent_with_direct_evaluation() {
        let s = diag_system();
        let origin = Point::new(vec![0.0; 4]);
        let seed = Vector::from_vec(vec![0.3, -1.2, 0.7, 2.0]);
        let rec = cocycle_growth(&s, &origin, &at_origin(seed.clone()), 5).unwrap();
        let mut direct = seed;
        let m = s.manifold();
        for n in 0..=5 {
            let g = m.inner(&direct, &direct);
            assert!((rec.entries[n].value() - g).abs() <= 1e-10 * g.abs().max(1.0));
            direct = Vector::from_fn(4, |i, _| direct[i] * [0.5, 1.0 / 3.0, 1.0, 4.0][i]);
        }
    }
}
