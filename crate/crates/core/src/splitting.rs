//! Tangent subspaces, splittings E^s ⊕ E^u ⊕ E^n, and distances between
//! subspaces at different points of a curve.
//!
//! The transport-based distance compares P(u) with pseudo-unit vectors w of
//! the target subspace, minimizing |g(P(u) − w, P(u) − w)|. The pseudo-unit
//! set {|g(w,w)| = 1} is only compact when g restricted to the subspace is
//! definite, so indefinite or degenerate subspaces are rejected with
//! [`Error::NoncompactUnitSet`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{differential_at, DiscreteSystem};
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::geometry::{Manifold, Point, TangentVector, Vector, TOL_TANGENT};
use crate::transport::{transport_many, Curve, TransportOptions};

/// Threshold on the Gram determinant of unit-normalized basis vectors.
pub const EPS_INDEPENDENT: f64 = 1e-12;
/// Threshold on |det| of the g-Gram matrix of unit-normalized basis vectors.
pub const EPS_DEGENERATE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    base: Point,
    basis: Vec<Vector>,
}

impl Subspace {
    pub fn new(m: &Manifold, base: Point, basis: Vec<Vector>) -> Result<Self> {
        m.check_point(base.coords())?;
        for b in &basis {
            if b.len() != m.ambient_dim() {
                return Err(Error::Usage("subspace basis vector has the wrong dimension".into()));
            }
            let r = m.tangency_residual(base.coords(), b)?;
            if r > TOL_TANGENT {
                return Err(Error::Domain(format!("basis vector {:?} is not tangent (residual {r:e})", b.as_slice())));
            }
        }
        if !independent(&basis) {
            return Err(Error::Rank("subspace basis vectors are linearly dependent".into()));
        }
        Ok(Self { base, basis })
    }

    pub fn zero(base: Point) -> Self {
        Self { base, basis: Vec::new() }
    }

    pub(crate) fn new_unchecked(base: Point, basis: Vec<Vector>) -> Self {
        Self { base, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn vectors(&self) -> impl Iterator<Item = TangentVector> + '_ {
        self.basis.iter().map(|b| TangentVector::new_unchecked(self.base.clone(), b.clone()))
    }

    /// Ambient matrix with Euclidean-orthonormal columns spanning the subspace.
    fn orthonormal_columns(&self) -> DMatrix<f64> {
        let n = self.base.coords().len();
        let a = DMatrix::from_fn(n, self.dim(), |i, j| self.basis[j][i]);
        a.qr().q().columns(0, self.dim()).into_owned()
    }
}

fn independent(vs: &[Vector]) -> bool {
    if vs.is_empty() {
        return true;
    }
    if vs.iter().any(|v| !(v.norm() > 0.0)) {
        return false;
    }
    let units: Vec<Vector> = vs.iter().map(|v| v.normalize()).collect();
    let k = units.len();
    let gram = DMatrix::from_fn(k, k, |i, j| units[i].dot(&units[j]));
    gram.determinant() > EPS_INDEPENDENT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Splitting {
    pub stable: Subspace,
    pub unstable: Subspace,
    pub null_part: Subspace,
}

impl Splitting {
    /// Checks the common base point and that the three parts form a direct
    /// sum equal to the tangent space. Causal conditions are left to the
    /// checker, which reports rather than rejects them.
    pub fn new(m: &Manifold, stable: Subspace, unstable: Subspace, null_part: Subspace) -> Result<Self> {
        if !stable.base.same_as(&unstable.base) || !stable.base.same_as(&null_part.base) {
            return Err(Error::Usage("splitting parts are attached at different points".into()));
        }
        let total = stable.dim() + unstable.dim() + null_part.dim();
        if total != m.dim() {
            return Err(Error::Usage(format!(
                "splitting dimensions sum to {total}, tangent space has dimension {}",
                m.dim()
            )));
        }
        let all: Vec<Vector> = stable.basis.iter().chain(&unstable.basis).chain(&null_part.basis).cloned().collect();
        if !independent(&all) {
            return Err(Error::Rank("stable, unstable and null parts do not form a direct sum".into()));
        }
        Ok(Self { stable, unstable, null_part })
    }

    pub fn base(&self) -> &Point {
        &self.stable.base
    }
}

pub type SplittingAssign = Arc<dyn Fn(&Point) -> Result<Splitting> + Send + Sync>;

/// A splitting at every point of an invariant set.
#[derive(Clone)]
pub struct SplittingField {
    description: String,
    assign: SplittingAssign,
}

impl fmt::Debug for SplittingField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SplittingField").field("description", &self.description).finish()
    }
}

impl SplittingField {
    pub fn new(description: impl Into<String>, assign: SplittingAssign) -> Self {
        Self { description: description.into(), assign }
    }

    /// The same ambient vectors at every point (meaningful on flat spaces).
    pub fn constant(
        m: Manifold,
        stable: Vec<Vector>,
        unstable: Vec<Vector>,
        null_part: Vec<Vector>,
        description: impl Into<String>,
    ) -> Self {
        Self::new(
            description,
            Arc::new(move |p: &Point| {
                Splitting::new(
                    &m,
                    Subspace::new(&m, p.clone(), stable.clone())?,
                    Subspace::new(&m, p.clone(), unstable.clone())?,
                    Subspace::new(&m, p.clone(), null_part.clone())?,
                )
            }),
        )
    }

    /// Splittings known at finitely many points.
    pub fn from_table(entries: Vec<Splitting>, description: impl Into<String>) -> Self {
        Self::new(
            description,
            Arc::new(move |p: &Point| {
                entries
                    .iter()
                    .find(|s| s.base().same_as(p))
                    .cloned()
                    .ok_or_else(|| Error::Domain(format!("no splitting recorded at {:?}", p.coords().as_slice())))
            }),
        )
    }

    pub fn at(&self, p: &Point) -> Result<Splitting> {
        let s = (self.assign)(p)?;
        if !s.base().same_as(p) {
            return Err(Error::Usage("splitting field returned a splitting at another point".into()));
        }
        Ok(s)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

/// A basis with |g(e_i, e_j)| = δ_ij and the signs g(e_i, e_i).
#[derive(Debug, Clone)]
pub struct PseudoOrthonormalFrame {
    pub subspace: Subspace,
    pub signs: Vec<f64>,
}

impl PseudoOrthonormalFrame {
    /// Common sign of g on the subspace, if g is definite there.
    pub fn definite_sign(&self) -> Option<f64> {
        let first = *self.signs.first()?;
        self.signs.iter().all(|s| *s == first).then_some(first)
    }
}

pub fn pseudo_orthonormalize(m: &Manifold, e: &Subspace) -> Result<Subspace> {
    pseudo_orthonormal_frame(m, e).map(|f| f.subspace)
}

/// Sign-aware Gram-Schmidt, pivoting on the least null remaining direction.
pub fn pseudo_orthonormal_frame(m: &Manifold, e: &Subspace) -> Result<PseudoOrthonormalFrame> {
    let k = e.dim();
    if k == 0 {
        return Ok(PseudoOrthonormalFrame { subspace: e.clone(), signs: Vec::new() });
    }
    let units: Vec<Vector> = e.basis.iter().map(|v| v.normalize()).collect();
    let gram = DMatrix::from_fn(k, k, |i, j| m.inner(&units[i], &units[j]));
    if gram.determinant().abs() <= EPS_DEGENERATE {
        return Err(Error::Degenerate(format!(
            "metric restricted to the {k}-dimensional subspace is degenerate (|det| = {:e})",
            gram.determinant().abs()
        )));
    }

    let mut remaining = units;
    let mut out: Vec<Vector> = Vec::with_capacity(k);
    let mut signs = Vec::with_capacity(k);
    while !remaining.is_empty() {
        let ratio = |r: &Vector| m.inner(r, r).abs() / r.norm_squared().max(f64::MIN_POSITIVE);
        let (mut idx, mut best) = (0, -1.0);
        for (i, r) in remaining.iter().enumerate() {
            let q = ratio(r);
            if q > best {
                idx = i;
                best = q;
            }
        }
        if best <= 1e-10 {
            // Every remaining direction is null; a pair with g(r_i, r_j) ≠ 0
            // sums to a non-null vector.
            let mut fixed = false;
            'pairs: for i in 0..remaining.len() {
                for j in (i + 1)..remaining.len() {
                    let gij = m.inner(&remaining[i], &remaining[j]);
                    if gij.abs() > 1e-8 * remaining[i].norm() * remaining[j].norm() {
                        let rj = remaining[j].clone();
                        remaining[i] += rj;
                        idx = i;
                        fixed = true;
                        break 'pairs;
                    }
                }
            }
            if !fixed {
                return Err(Error::Degenerate("subspace contains a null direction orthogonal to itself".into()));
            }
        }
        let r = remaining.swap_remove(idx);
        let grr = m.inner(&r, &r);
        let sign = grr.signum();
        let e_new = r / grr.abs().sqrt();
        for x in remaining.iter_mut() {
            let c = m.inner(x, &e_new) * sign;
            *x -= &e_new * c;
        }
        out.push(e_new);
        signs.push(sign);
    }
    Ok(PseudoOrthonormalFrame { subspace: Subspace::new_unchecked(e.base.clone(), out), signs })
}

/// Pushes the basis of E through Df and re-checks independence.
pub fn subspace_image(s: &DiscreteSystem, e: &Subspace) -> Result<Subspace> {
    let target = s.forward(&e.base)?;
    let images: Vec<Vector> = e
        .vectors()
        .map(|v| differential_at(s, &e.base, &v).map(|w| w.components))
        .collect::<Result<_>>()?;
    if !independent(&images) {
        return Err(Error::Rank("differential collapsed the subspace".into()));
    }
    Ok(Subspace::new_unchecked(target, images))
}

/// Largest principal angle between two equal-dimensional subspaces at the
/// same point, under the Euclidean inner product of the ambient space.
pub fn grassmann_distance(e: &Subspace, f: &Subspace) -> Result<f64> {
    if !e.base.same_as(&f.base) {
        return Err(Error::Usage("grassmann_distance: subspaces live at different points".into()));
    }
    if e.dim() != f.dim() {
        return Err(Error::Usage(format!("grassmann_distance: dimensions {} and {} differ", e.dim(), f.dim())));
    }
    if e.dim() == 0 {
        return Ok(0.0);
    }
    let qe = e.orthonormal_columns();
    let qf = f.orthonormal_columns();
    let c = qe.transpose() * &qf;
    let residual = &qf - &qe * &c;
    let cos_min = c.singular_values().min().clamp(0.0, 1.0);
    let sin_max = residual.singular_values().max().clamp(0.0, 1.0);
    Ok(sin_max.atan2(cos_min))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceOptions {
    /// Grid samples per parameter of the pseudo-unit sphere.
    pub grid: usize,
    /// Pattern-search step (in sphere parameters) at which refinement stops.
    pub stationarity: f64,
    /// Number of best grid seeds that get refined.
    pub refine_seeds: usize,
    pub transport: TransportOptions,
    pub execution: Execution,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self {
            grid: 64,
            stationarity: 1e-8,
            refine_seeds: 4,
            transport: TransportOptions::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceDistance {
    pub value: f64,
    /// max over pseudo-unit v ∈ E of d(v, F).
    pub from_first: f64,
    /// max over pseudo-unit u ∈ F of d(u, E).
    pub from_second: f64,
    pub evaluations: u64,
}

struct DefiniteFrame {
    vectors: Vec<Vector>,
}

fn definite_frame(m: &Manifold, e: &Subspace) -> Result<DefiniteFrame> {
    if e.dim() == 0 {
        return Err(Error::Usage("the zero subspace has no pseudo-unit vectors".into()));
    }
    if e.dim() > 3 {
        return Err(Error::Unsupported(format!(
            "pseudo-unit sets are parametrized up to dimension 3, got {}",
            e.dim()
        )));
    }
    let frame = match pseudo_orthonormal_frame(m, e) {
        Ok(f) => f,
        Err(Error::Degenerate(msg)) => return Err(Error::NoncompactUnitSet(msg)),
        Err(other) => return Err(other),
    };
    if frame.definite_sign().is_none() {
        return Err(Error::NoncompactUnitSet("metric is indefinite on the subspace".into()));
    }
    Ok(DefiniteFrame { vectors: frame.subspace.basis })
}

/// Coefficients on the unit sphere S^{k-1} for the given angles.
fn sphere_point(k: usize, params: &[f64]) -> [f64; 3] {
    match k {
        2 => [params[0].cos(), params[0].sin(), 0.0],
        3 => {
            let (st, ct) = params[0].sin_cos();
            let (sp, cp) = params[1].sin_cos();
            [st * cp, st * sp, ct]
        }
        _ => unreachable!("k = 1 is handled as two points"),
    }
}

fn combine(vectors: &[Vector], coeffs: &[f64]) -> Vector {
    let mut out = Vector::zeros(vectors[0].len());
    for (v, c) in vectors.iter().zip(coeffs) {
        out += v * *c;
    }
    out
}

struct Extremum {
    value: f64,
    evaluations: u64,
}

/// Grid-seeded pattern search over the unit sphere of coefficient space.
/// Returns the best objective value found (min, or max when `maximize`).
fn optimize_on_sphere<F>(k: usize, objective: F, maximize: bool, opts: &DistanceOptions, exec: Execution) -> Extremum
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    if k == 1 {
        let a = objective(&[1.0]);
        let b = objective(&[-1.0]);
        return Extremum { value: if better(b, a) { b } else { a }, evaluations: 2 };
    }
    let g = opts.grid.max(4);
    let (seeds, spacing): (Vec<Vec<f64>>, Vec<f64>) = match k {
        2 => ((0..g).map(|i| vec![2.0 * PI * i as f64 / g as f64]).collect(), vec![2.0 * PI / g as f64]),
        _ => (
            (0..g)
                .flat_map(|i| (0..g).map(move |j| vec![PI * (i as f64 + 0.5) / g as f64, 2.0 * PI * j as f64 / g as f64]))
                .collect(),
            vec![PI / g as f64, 2.0 * PI / g as f64],
        ),
    };
    let eval = |p: &[f64]| objective(&sphere_point(k, p)[..k]);
    let values = map_range(exec, seeds.len(), |i| eval(&seeds[i]));
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (values[a], values[b]);
        if maximize { y.total_cmp(&x) } else { x.total_cmp(&y) }.then(a.cmp(&b))
    });
    let starts: Vec<usize> = order.into_iter().take(opts.refine_seeds.max(1)).collect();
    let refined = map_range(exec, starts.len(), |s| {
        let mut x = seeds[starts[s]].clone();
        let mut fx = values[starts[s]];
        let mut step = spacing.clone();
        let mut evals = 0u64;
        let mut iters = 0;
        while step.iter().any(|h| *h >= opts.stationarity) && iters < 10_000 {
            iters += 1;
            let mut moved = false;
            for d in 0..x.len() {
                for dir in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[d] += dir * step[d];
                    let fy = eval(&y);
                    evals += 1;
                    if better(fy, fx) {
                        x = y;
                        fx = fy;
                        moved = true;
                    }
                }
            }
            if !moved {
                for h in step.iter_mut() {
                    *h *= 0.5;
                }
            }
        }
        (fx, evals)
    });
    let mut best = values[starts[0]];
    let mut evaluations = seeds.len() as u64;
    for (v, e) in refined {
        evaluations += e;
        if better(v, best) {
            best = v;
        }
    }
    Extremum { value: best, evaluations }
}

fn check_on_curve(curve: &Curve, p: &Point, t: f64, what: &str) -> Result<()> {
    if p.same_as(&curve.position(t)) {
        Ok(())
    } else {
        Err(Error::Usage(format!("{what} is not attached at the curve point for parameter {t}")))
    }
}

/// inf over pseudo-unit w ∈ frame of |g(x − w, x − w)|.
fn inner_min(m: &Manifold, x: &Vector, frame: &DefiniteFrame, opts: &DistanceOptions) -> Extremum {
    let k = frame.vectors.len();
    optimize_on_sphere(
        k,
        |c| {
            let d = x - combine(&frame.vectors, c);
            m.inner(&d, &d).abs()
        },
        false,
        opts,
        Execution::Sequential,
    )
}

/// d(u, E): transport u from α(t) to α(s), then minimize over the
/// pseudo-unit set of E.
pub fn d_point(
    m: &Manifold,
    curve: &Curve,
    u: &TangentVector,
    t: f64,
    e: &Subspace,
    s: f64,
    opts: &DistanceOptions,
) -> Result<f64> {
    check_on_curve(curve, &u.base, t, "vector")?;
    check_on_curve(curve, &e.base, s, "subspace")?;
    let frame = definite_frame(m, e)?;
    let moved = transport_many(m, curve, std::slice::from_ref(u), t, s, &opts.transport, false)?;
    Ok(inner_min(m, &moved.vectors[0].components, &frame, opts).value)
}

/// max{a, b} with a = max over pseudo-unit v ∈ E of d(v, F) and b the same
/// with E and F exchanged. E sits at α(s), F at α(t).
pub fn d_subspace(
    m: &Manifold,
    curve: &Curve,
    e: &Subspace,
    s: f64,
    f: &Subspace,
    t: f64,
    opts: &DistanceOptions,
) -> Result<SubspaceDistance> {
    check_on_curve(curve, &e.base, s, "first subspace")?;
    check_on_curve(curve, &f.base, t, "second subspace")?;
    if e.dim() != f.dim() {
        return Err(Error::Usage(format!("d_subspace: dimensions {} and {} differ", e.dim(), f.dim())));
    }
    if e.dim() == 0 {
        return Ok(SubspaceDistance { value: 0.0, from_first: 0.0, from_second: 0.0, evaluations: 0 });
    }
    let fe = definite_frame(m, e)?;
    let ff = definite_frame(m, f)?;
    // Transport is linear, so moving the frames once covers every vector.
    let as_tangent = |fr: &DefiniteFrame, base: &Point| -> Vec<TangentVector> {
        fr.vectors.iter().map(|v| TangentVector::new_unchecked(base.clone(), v.clone())).collect()
    };
    let e_moved: Vec<Vector> = transport_many(m, curve, &as_tangent(&fe, &e.base), s, t, &opts.transport, false)?
        .vectors
        .into_iter()
        .map(|v| v.components)
        .collect();
    let f_moved: Vec<Vector> = transport_many(m, curve, &as_tangent(&ff, &f.base), t, s, &opts.transport, false)?
        .vectors
        .into_iter()
        .map(|v| v.components)
        .collect();

    let one_side = |moved: &[Vector], target: &DefiniteFrame| -> Extremum {
        let counter = std::sync::atomic::AtomicU64::new(0);
        let ext = optimize_on_sphere(
            moved.len(),
            |c| {
                let x = combine(moved, c);
                let inner = inner_min(m, &x, target, opts);
                counter.fetch_add(inner.evaluations, std::sync::atomic::Ordering::Relaxed);
                inner.value
            },
            true,
            opts,
            opts.execution,
        );
        Extremum { value: ext.value, evaluations: counter.into_inner() }
    };
    let a = one_side(&e_moved, &ff);
    let b = one_side(&f_moved, &fe);
    Ok(SubspaceDistance {
        value: a.value.max(b.value),
        from_first: a.value,
        from_second: b.value,
        evaluations: a.evaluations + b.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FlatPseudoSpace, MetricSignature};
    use crate::transport::curve_line;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn lorentz3() -> Manifold {
        Manifold::flat(MetricSignature::lorentz(3))
    }

    fn origin3() -> Point {
        Point::new(vec![0.0; 3])
    }

    fn constant_curve() -> Curve {
        let space = FlatPseudoSpace::new(MetricSignature::lorentz(3));
        curve_line(&space, &origin3(), &origin3()).unwrap()
    }

    #[test]
    fn subspace_validation() {
        let m = lorentz3();
        assert!(Subspace::new(&m, origin3(), vec![v(&[1.0, 0.0, 0.0]), v(&[2.0, 0.0, 0.0])]).is_err());
        assert!(Subspace::new(&m, origin3(), vec![v(&[0.0, 0.0, 0.0])]).is_err());
        assert_eq!(Subspace::new(&m, origin3(), vec![]).unwrap().dim(), 0);
    }

    #[test]
    fn orthonormalize_examples() {
        let m = lorentz3();
        let e = Subspace::new(&m, origin3(), vec![v(&[2.0, 0.0, 0.0])]).unwrap();
        let r = pseudo_orthonormalize(&m, &e).unwrap();
        assert_abs_diff_eq!(r.basis()[0], v(&[1.0, 0.0, 0.0]), epsilon = 1e-15);

        let e = Subspace::new(&m, origin3(), vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 0.0, 2.0])]).unwrap();
        let f = pseudo_orthonormal_frame(&m, &e).unwrap();
        let mut signs = f.signs.clone();
        signs.sort_by(f64::total_cmp);
        assert_eq!(signs, vec![-1.0, 1.0]);
        assert_eq!(f.definite_sign(), None);

        let e = Subspace::new(&m, origin3(), vec![v(&[1.0, 0.0, 1.0])]).unwrap();
        assert!(matches!(pseudo_orthonormalize(&m, &e), Err(Error::Degenerate(_))));
    }

    #[test]
    fn orthonormalize_handles_null_basis_vectors() {
        // Both vectors are null, but the plane they span is Lorentzian.
        let m = lorentz3();
        let e = Subspace::new(&m, origin3(), vec![v(&[1.0, 0.0, 1.0]), v(&[1.0, 0.0, -1.0])]).unwrap();
        let f = pseudo_orthonormal_frame(&m, &e).unwrap();
        let b = f.subspace.basis();
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(m.inner(&b[i], &b[j]).abs(), target, epsilon = 1e-10);
            }
        }
        assert!(grassmann_distance(&e, &f.subspace).unwrap() < 1e-9);
    }

    #[test]
    fn grassmann_examples() {
        let m = lorentz3();
        let line = |x: &[f64]| Subspace::new(&m, origin3(), vec![v(x)]).unwrap();
        let e1 = line(&[1.0, 0.0, 0.0]);
        assert_eq!(grassmann_distance(&e1, &e1).unwrap(), 0.0);
        assert_abs_diff_eq!(grassmann_distance(&e1, &line(&[0.0, 1.0, 0.0])).unwrap(), PI / 2.0, epsilon = 1e-14);
        let th: f64 = 0.1;
        assert_abs_diff_eq!(
            grassmann_distance(&e1, &line(&[th.cos(), th.sin(), 0.0])).unwrap(),
            th,
            epsilon = 1e-10
        );
        let plane = Subspace::new(&m, origin3(), vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])]).unwrap();
        assert!(matches!(grassmann_distance(&e1, &plane), Err(Error::Usage(_))));
    }

    #[test]
    fn splitting_requires_direct_sum() {
        let m = Manifold::flat(MetricSignature::split4());
        let o = Point::new(vec![0.0; 4]);
        let sub = |vs: Vec<Vector>| Subspace::new(&m, o.clone(), vs).unwrap();
        let e = |i: usize| Vector::from_fn(4, |r, _| if r == i { 1.0 } else { 0.0 });
        let ok = Splitting::new(&m, sub(vec![e(0), e(1)]), sub(vec![e(3)]), sub(vec![v(&[1.0, 1.0, 1.0, 1.0])]));
        assert!(ok.is_ok());
        let s2 = 2f64.sqrt();
        let bad = Splitting::new(&m, sub(vec![e(0), e(1)]), sub(vec![e(3)]), sub(vec![v(&[1.0, 1.0, 0.0, s2])]));
        assert!(matches!(bad, Err(Error::Rank(_))));
        let short = Splitting::new(&m, sub(vec![e(0)]), sub(vec![e(3)]), sub(vec![]));
        assert!(matches!(short, Err(Error::Usage(_))));
    }

    #[test]
    fn d_point_examples() {
        let m = lorentz3();
        let c = constant_curve();
        let opts = DistanceOptions::default();
        let e = Subspace::new(&m, origin3(), vec![v(&[1.0, 0.0, 0.0])]).unwrap();
        let inside = TangentVector::new_unchecked(origin3(), v(&[1.0, 0.0, 0.0]));
        assert_eq!(d_point(&m, &c, &inside, 0.0, &e, 1.0, &opts).unwrap(), 0.0);
        let u = TangentVector::new_unchecked(origin3(), v(&[0.0, 1.0, 0.0]));
        assert_abs_diff_eq!(d_point(&m, &c, &u, 0.0, &e, 0.5, &opts).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn d_point_rejects_indefinite_targets() {
        let m = lorentz3();
        let c = constant_curve();
        let opts = DistanceOptions::default();
        let u = TangentVector::new_unchecked(origin3(), v(&[0.0, 1.0, 0.0]));
        let lorentzian = Subspace::new(&m, origin3(), vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 0.0, 1.0])]).unwrap();
        assert!(matches!(d_point(&m, &c, &u, 0.0, &lorentzian, 0.0, &opts), Err(Error::NoncompactUnitSet(_))));
        let null = Subspace::new(&m, origin3(), vec![v(&[1.0, 0.0, 1.0])]).unwrap();
        assert!(matches!(d_point(&m, &c, &u, 0.0, &null, 0.0, &opts), Err(Error::NoncompactUnitSet(_))));
    }

    #[test]
    fn flat_line_speed_does_not_matter() {
        let m = lorentz3();
        let space = FlatPseudoSpace::new(MetricSignature::lorentz(3));
        let p = origin3();
        let q = Point::new(vec![1.0, 2.0, 0.5]);
        let slow = curve_line(&space, &p, &q).unwrap();
        let far = Point::new(vec![2.0, 4.0, 1.0]);
        let fast = curve_line(&space, &p, &far).unwrap();
        let opts = DistanceOptions::default();
        let u = TangentVector::new_unchecked(p.clone(), v(&[0.3, 1.0, 0.2]));
        let e_at = |pt: &Point| Subspace::new(&m, pt.clone(), vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.1])]).unwrap();
        let a = d_point(&m, &slow, &u, 0.0, &e_at(&q), 1.0, &opts).unwrap();
        let b = d_point(&m, &fast, &u, 0.0, &e_at(&q), 0.5, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn d_subspace_self_and_mismatch() {
        let m = lorentz3();
        let c = constant_curve();
        let opts = DistanceOptions::default();
        let plane = Subspace::new(&m, origin3(), vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])]).unwrap();
        let d = d_subspace(&m, &c, &plane, 0.0, &plane, 1.0, &opts).unwrap();
        assert!(d.value <= 1e-9, "{d:?}");
        let line = Subspace::new(&m, origin3(), vec![v(&[1.0, 0.0, 0.0])]).unwrap();
        assert!(matches!(d_subspace(&m, &c, &plane, 0.0, &line, 0.0, &opts), Err(Error::Usage(_))));
        let z = Subspace::zero(origin3());
        assert_eq!(d_subspace(&m, &c, &z, 0.0, &z, 0.0, &opts).unwrap().value, 0.0);
    }

    #[test]
    fn d_subspace_base_must_match_curve() {
        let m = lorentz3();
        let c = constant_curve();
        let elsewhere = Point::new(vec![1.0, 0.0, 0.0]);
        let e = Subspace::new(&m, elsewhere, vec![v(&[1.0, 0.0, 0.0])]).unwrap();
        let f = Subspace::new(&m, origin3(), vec![v(&[1.0, 0.0, 0.0])]).unwrap();
        assert!(matches!(
            d_subspace(&m, &c, &e, 0.0, &f, 0.0, &DistanceOptions::default()),
            Err(Error::Usage(_))
        ));
    }
}
