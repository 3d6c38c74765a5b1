//! Built-in systems: a diagonal map on R⁴ with signature (+,+,−,−), a
//! horseshoe crossed with a line in Minkowski R³, and two maps of the
//! hyperboloid H²(1). Also ω-limit and attractor-distance tools.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checker::{
    check_splitting, eigen_splitting_search, CheckerConfig, EigenSearchOutcome, FailureWitness, HyperbolicityReport,
    InvariantSetSample, RejectedCandidate, Verdict,
};
use crate::dynamics::{iterate, DiscreteSystem};
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::geometry::{random_hyperboloid_point, Hypersurface, Manifold, MetricSignature, Point, Vector};
use crate::splitting::{Splitting, SplittingField, Subspace};
use crate::transport::Curve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExampleName {
    #[serde(rename = "ex3_1")]
    Ex3_1,
    #[serde(rename = "ex3_2")]
    Ex3_2,
    #[serde(rename = "ex3_3")]
    Ex3_3,
    #[serde(rename = "ex4_1")]
    Ex4_1,
}

impl ExampleName {
    pub const ALL: [ExampleName; 4] = [ExampleName::Ex3_1, ExampleName::Ex3_2, ExampleName::Ex3_3, ExampleName::Ex4_1];

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleName::Ex3_1 => "ex3_1",
            ExampleName::Ex3_2 => "ex3_2",
            ExampleName::Ex3_3 => "ex3_3",
            ExampleName::Ex4_1 => "ex4_1",
        }
    }
}

impl fmt::Display for ExampleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleName::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown example {s:?}; expected one of ex3_1, ex3_2, ex3_3, ex4_1")))
    }
}

/// A constant null distribution given by ambient spanning vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub name: String,
    pub vectors: Vec<Vector>,
    pub expected: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleParams {
    /// Cylinder depth of the horseshoe sample.
    pub depth: usize,
    /// Fiber values per planar horseshoe point.
    pub fiber_points: usize,
    /// Sample points on the invariant circle of ex4_1.
    pub circle_points: usize,
}

impl Default for ExampleParams {
    fn default() -> Self {
        Self { depth: 6, fiber_points: 5, circle_points: 16 }
    }
}

/// How a bundle is checked.
#[derive(Debug, Clone)]
pub enum Method {
    /// Check a shipped splitting field over the invariant-set sample.
    Field(SplittingField),
    /// Search eigen-splittings at a fixed point for each distribution.
    EigenSearch { point: Point },
}

#[derive(Debug, Clone)]
pub struct ExampleBundle {
    pub name: ExampleName,
    pub system: DiscreteSystem,
    pub invariant_set: InvariantSetSample,
    pub distributions: Vec<NullDistribution>,
    pub method: Method,
    /// A second splitting with the same null part, for the uniqueness probe.
    pub alternate_field: Option<SplittingField>,
}

impl ExampleBundle {
    pub fn distribution(&self, name: Option<&str>) -> Result<&NullDistribution> {
        match name {
            None => Ok(&self.distributions[0]),
            Some(n) => self.distributions.iter().find(|d| d.name == n).ok_or_else(|| {
                let known: Vec<&str> = self.distributions.iter().map(|d| d.name.as_str()).collect();
                Error::Usage(format!("{} has no distribution {n:?}; known: {}", self.name, known.join(", ")))
            }),
        }
    }

    pub fn candidate_field(&self) -> Option<&SplittingField> {
        match &self.method {
            Method::Field(f) => Some(f),
            Method::EigenSearch { .. } => None,
        }
    }
}

fn vec3(x: f64, y: f64, z: f64) -> Vector {
    Vector::from_vec(vec![x, y, z])
}

pub fn build_example(name: ExampleName, params: &ExampleParams) -> Result<ExampleBundle> {
    match name {
        ExampleName::Ex3_1 => Ok(ex3_1()),
        ExampleName::Ex3_2 => ex3_2(params),
        ExampleName::Ex3_3 => ex3_3(),
        ExampleName::Ex4_1 => ex4_1(params),
    }
}

const EX3_1_DIAG: [f64; 4] = [0.5, 1.0 / 3.0, 1.0, 4.0];

pub fn ex3_1_system() -> DiscreteSystem {
    let d = EX3_1_DIAG;
    DiscreteSystem::new(
        "ex3_1",
        Manifold::flat(MetricSignature::split4()),
        Arc::new(move |p: &Vector| Ok(Vector::from_fn(4, |i, _| p[i] * d[i]))),
        Arc::new(move |p: &Vector| Ok(Vector::from_fn(4, |i, _| p[i] / d[i]))),
    )
    .with_differential(Arc::new(move |_p: &Vector, v: &Vector| Ok(Vector::from_fn(4, |i, _| v[i] * d[i]))))
}

fn ex3_1() -> ExampleBundle {
    let system = ex3_1_system();
    let origin = Point::new(vec![0.0; 4]);
    let invariant_set = InvariantSetSample::new(vec![origin.clone()], 0.0);
    ExampleBundle {
        name: ExampleName::Ex3_1,
        system,
        invariant_set,
        distributions: vec![
            NullDistribution {
                name: "A".into(),
                vectors: vec![Vector::from_vec(vec![1.0, 1.0, 1.0, 1.0])],
                expected: Verdict::Hyperbolic,
            },
            NullDistribution {
                name: "B".into(),
                vectors: vec![Vector::from_vec(vec![1.0, 1.0, 0.0, SQRT_2])],
                expected: Verdict::NotHyperbolic,
            },
        ],
        method: Method::EigenSearch { point: origin },
        alternate_field: None,
    }
}

/// Inputs this close to Λ have their images snapped back onto Λ.
const LAMBDA_SNAP: f64 = 1e-9;

/// Affine horseshoe: branch 0 on y ≤ 1/3, branch 1 on y ≥ 2/3, fiber z ↦ 4z.
///
/// The map expands one coordinate by 3, so rounding grows like 3ⁿ·ε along an
/// orbit and leaves the strips after about 25 steps. Λ is invariant, so for
/// inputs on Λ the image is projected onto Λ, which removes the drift. The
/// differential only depends on the branch and is unaffected.
pub fn horseshoe_system() -> DiscreteSystem {
    const EDGE: f64 = 1e-12;
    let snap = |on_lambda: bool, x: f64, y: f64, z: f64| {
        if on_lambda {
            vec3(cantor_nearest(x), cantor_nearest(y), z)
        } else {
            vec3(x, y, z)
        }
    };
    let forward = move |p: &Vector| -> Result<Vector> {
        let (x, y, z) = (p[0], p[1], p[2]);
        if !(-EDGE..=1.0 + EDGE).contains(&x) {
            return Err(Error::Domain(format!("horseshoe: x = {x} outside [0, 1]")));
        }
        let on = lambda_distance(x, y) <= LAMBDA_SNAP;
        if (-EDGE..=1.0 / 3.0 + EDGE).contains(&y) {
            Ok(snap(on, x / 3.0, 3.0 * y, 4.0 * z))
        } else if (2.0 / 3.0 - EDGE..=1.0 + EDGE).contains(&y) {
            Ok(snap(on, 1.0 - x / 3.0, 3.0 - 3.0 * y, 4.0 * z))
        } else {
            Err(Error::Domain(format!("horseshoe: y = {y} is in neither horizontal strip")))
        }
    };
    let inverse = move |p: &Vector| -> Result<Vector> {
        let (x, y, z) = (p[0], p[1], p[2]);
        if !(-EDGE..=1.0 + EDGE).contains(&y) {
            return Err(Error::Domain(format!("horseshoe inverse: y = {y} outside [0, 1]")));
        }
        let on = lambda_distance(x, y) <= LAMBDA_SNAP;
        if (-EDGE..=1.0 / 3.0 + EDGE).contains(&x) {
            Ok(snap(on, 3.0 * x, y / 3.0, z / 4.0))
        } else if (2.0 / 3.0 - EDGE..=1.0 + EDGE).contains(&x) {
            Ok(snap(on, 3.0 * (1.0 - x), 1.0 - y / 3.0, z / 4.0))
        } else {
            Err(Error::Domain(format!("horseshoe inverse: x = {x} is in neither vertical strip")))
        }
    };
    let differential = |p: &Vector, v: &Vector| -> Result<Vector> {
        let s = if p[1] <= 0.5 { 1.0 } else { -1.0 };
        Ok(vec3(s * v[0] / 3.0, s * 3.0 * v[1], 4.0 * v[2]))
    };
    DiscreteSystem::new("ex3_2", Manifold::flat(MetricSignature::lorentz(3)), Arc::new(forward), Arc::new(inverse))
        .with_differential(Arc::new(differential))
}

/// Finite word over {0, 1} indexing a cylinder of the Cantor set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorseshoeCode {
    pub word: Vec<u8>,
}

impl HorseshoeCode {
    pub fn new(word: Vec<u8>) -> Result<Self> {
        if word.iter().any(|d| *d > 1) {
            return Err(Error::Usage("horseshoe code digits must be 0 or 1".into()));
        }
        Ok(Self { word })
    }

    pub fn depth(&self) -> usize {
        self.word.len()
    }

    /// All 2^depth words in lexicographic order.
    pub fn all(depth: usize) -> Vec<HorseshoeCode> {
        (0..1usize << depth)
            .map(|k| HorseshoeCode { word: (0..depth).map(|i| ((k >> (depth - 1 - i)) & 1) as u8).collect() })
            .collect()
    }

    /// Left endpoint of the cylinder: Σ 2·w_i·3^{-(i+1)}, a point of the
    /// middle-thirds Cantor set.
    pub fn left_endpoint(&self) -> f64 {
        let mut x = 0.0;
        let mut scale = 1.0 / 3.0;
        for d in &self.word {
            x += 2.0 * f64::from(*d) * scale;
            scale /= 3.0;
        }
        x
    }
}

/// Euclidean distance from x to the middle-thirds Cantor set.
pub fn cantor_distance(x: f64) -> f64 {
    if x < 0.0 {
        return -x;
    }
    if x > 1.0 {
        return x - 1.0;
    }
    let mut y = x;
    let mut scale = 1.0;
    for _ in 0..60 {
        if y <= 1.0 / 3.0 {
            y *= 3.0;
        } else if y >= 2.0 / 3.0 {
            y = 3.0 * y - 2.0;
        } else {
            return scale * (y - 1.0 / 3.0).min(2.0 / 3.0 - y);
        }
        scale /= 3.0;
    }
    0.0
}

/// Nearest point of the middle-thirds Cantor set.
pub fn cantor_nearest(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    // x = offset + scale·y throughout.
    let (mut y, mut offset, mut scale) = (x, 0.0, 1.0);
    for _ in 0..60 {
        if y <= 1.0 / 3.0 {
            y *= 3.0;
        } else if y >= 2.0 / 3.0 {
            offset += 2.0 * scale / 3.0;
            y = 3.0 * y - 2.0;
        } else {
            let end = if y - 1.0 / 3.0 <= 2.0 / 3.0 - y { 1.0 / 3.0 } else { 2.0 / 3.0 };
            return offset + scale * end;
        }
        scale /= 3.0;
    }
    offset + scale * y
}

/// Λ = K × K for the middle-thirds Cantor set K, so the distance of a planar
/// point to Λ is the hypot of the coordinate distances.
pub fn lambda_distance(x: f64, y: f64) -> f64 {
    cantor_distance(x).hypot(cantor_distance(y))
}

/// 4^depth planar points of Λ crossed with `fiber_points` values in [−1, 1].
/// The closure residual is measured against Λ itself (ignoring the fiber,
/// which leaves the truncation under z ↦ 4z).
pub fn horseshoe_lambda_sample(depth: usize, fiber_points: usize) -> Result<InvariantSetSample> {
    if depth < 1 {
        return Err(Error::Usage("horseshoe depth must be at least 1".into()));
    }
    if fiber_points < 1 {
        return Err(Error::Usage("need at least one fiber point".into()));
    }
    let coords: Vec<f64> = HorseshoeCode::all(depth).iter().map(HorseshoeCode::left_endpoint).collect();
    let zs: Vec<f64> = if fiber_points == 1 {
        vec![0.0]
    } else {
        (0..fiber_points).map(|i| -1.0 + 2.0 * i as f64 / (fiber_points - 1) as f64).collect()
    };
    let s = horseshoe_system();
    let mut points = Vec::with_capacity(coords.len() * coords.len() * zs.len());
    let mut residual: f64 = 0.0;
    for &x in &coords {
        for &y in &coords {
            let p = Point::new(vec![x, y, 0.0]);
            for q in [s.forward(&p)?, s.inverse(&p)?] {
                residual = residual.max(lambda_distance(q.coords()[0], q.coords()[1]));
            }
            for &z in &zs {
                points.push(Point::new(vec![x, y, z]));
            }
        }
    }
    Ok(InvariantSetSample::new(points, residual).with_caveat(format!(
        "Λ×R is not compact; the fiber is truncated to [-1, 1] with {fiber_points} points and z ↦ 4z leaves the truncation"
    )))
}

/// The shipped horseshoe splitting: E^s = span{e₁}, E^u = span{e₃} (or
/// span{e₂} for the alternate), E^n = span{(1, 1, √2)}.
pub fn horseshoe_field(unstable_axis: usize) -> SplittingField {
    let e = |i: usize| Vector::from_fn(3, |r, _| if r == i { 1.0 } else { 0.0 });
    let label = if unstable_axis == 2 { "E^s = e1, E^u = e3, E^n = (1,1,sqrt2)" } else { "E^s = e1, E^u = e2, E^n = (1,1,sqrt2)" };
    SplittingField::constant(
        Manifold::flat(MetricSignature::lorentz(3)),
        vec![e(0)],
        vec![e(unstable_axis)],
        vec![vec3(1.0, 1.0, SQRT_2)],
        label,
    )
}

fn ex3_2(params: &ExampleParams) -> Result<ExampleBundle> {
    Ok(ExampleBundle {
        name: ExampleName::Ex3_2,
        system: horseshoe_system(),
        invariant_set: horseshoe_lambda_sample(params.depth, params.fiber_points)?,
        distributions: vec![NullDistribution {
            name: "diagonal".into(),
            vectors: vec![vec3(1.0, 1.0, SQRT_2)],
            expected: Verdict::Hyperbolic,
        }],
        method: Method::Field(horseshoe_field(2)),
        alternate_field: Some(horseshoe_field(1)),
    })
}

/// f(x, y, z) = (x/2, y/2, √(z²/4 + 3/4)) on H²(1).
pub fn ex3_3_system() -> DiscreteSystem {
    let m = Manifold::Hypersurface(Hypersurface::hyperboloid());
    DiscreteSystem::new(
        "ex3_3",
        m,
        Arc::new(|p: &Vector| Ok(vec3(p[0] / 2.0, p[1] / 2.0, (p[2] * p[2] / 4.0 + 0.75).sqrt()))),
        Arc::new(|p: &Vector| {
            let r = 4.0 * p[2] * p[2] - 3.0;
            if r < 0.0 {
                return Err(Error::Domain(format!("ex3_3 inverse undefined at z = {}", p[2])));
            }
            Ok(vec3(2.0 * p[0], 2.0 * p[1], r.sqrt()))
        }),
    )
    .with_differential(Arc::new(|p: &Vector, v: &Vector| {
        let dz = (p[2] / 4.0) / (p[2] * p[2] / 4.0 + 0.75).sqrt();
        Ok(vec3(v[0] / 2.0, v[1] / 2.0, dz * v[2]))
    }))
}

/// E^s = T_pM, E^u = E^n = {0}.
fn full_stable_field(m: Manifold, basis: fn(&Vector) -> Vec<Vector>, label: &str) -> SplittingField {
    SplittingField::new(
        label,
        Arc::new(move |p: &Point| {
            let st = Subspace::new(&m, p.clone(), basis(p.coords()))?;
            Splitting::new(&m, st, Subspace::zero(p.clone()), Subspace::zero(p.clone()))
        }),
    )
}

fn ex3_3() -> Result<ExampleBundle> {
    let system = ex3_3_system();
    let apex = Point::new(vec![0.0, 0.0, 1.0]);
    let invariant_set = InvariantSetSample::finite(&system, vec![apex])?;
    let m = system.manifold().clone();
    let field = full_stable_field(m, |p| vec![vec3(1.0, 0.0, p[0] / p[2]), vec3(0.0, 1.0, p[1] / p[2])], "E^s = T_pM");
    Ok(ExampleBundle {
        name: ExampleName::Ex3_3,
        system,
        invariant_set,
        distributions: vec![NullDistribution { name: "zero".into(), vectors: Vec::new(), expected: Verdict::Hyperbolic }],
        method: Method::Field(field),
        alternate_field: None,
    })
}

/// The common radial factor R(z) = √((z² + 2√2z − 2)/(4z² − 4)) and R'(z).
fn ex4_1_radial(z: f64) -> Result<(f64, f64)> {
    let num = z * z + 2.0 * SQRT_2 * z - 2.0;
    let den = 4.0 * z * z - 4.0;
    if !(z > 1.0) || !(num > 0.0) {
        return Err(Error::Domain(format!("ex4_1 is undefined at z = {z}")));
    }
    let q = num / den;
    let dq = ((2.0 * z + 2.0 * SQRT_2) * den - num * 8.0 * z) / (den * den);
    let r = q.sqrt();
    Ok((r, dq / (2.0 * r)))
}

/// h(x, y, z) = (R(z)x, R(z)y, (z + √2)/2) on H²(1) minus the apex.
pub fn ex4_1_system() -> DiscreteSystem {
    let m = Manifold::Hypersurface(Hypersurface::punctured_hyperboloid());
    DiscreteSystem::new(
        "ex4_1",
        m,
        Arc::new(|p: &Vector| {
            let (r, _) = ex4_1_radial(p[2])?;
            Ok(vec3(r * p[0], r * p[1], (p[2] + SQRT_2) / 2.0))
        }),
        Arc::new(|p: &Vector| {
            let z = 2.0 * p[2] - SQRT_2;
            let (r, _) = ex4_1_radial(z)
                .map_err(|_| Error::Domain(format!("ex4_1 inverse: z = {} is outside the image of h", p[2])))?;
            Ok(vec3(p[0] / r, p[1] / r, z))
        }),
    )
    .with_differential(Arc::new(|p: &Vector, v: &Vector| {
        let (r, dr) = ex4_1_radial(p[2])?;
        Ok(vec3(r * v[0] + p[0] * dr * v[2], r * v[1] + p[1] * dr * v[2], v[2] / 2.0))
    }))
}

/// The invariant circle x² + y² = 1, z = √2.
pub fn ex4_1_circle(points: usize) -> Vec<Point> {
    (0..points)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / points as f64;
            Point::new(vec![th.cos(), th.sin(), SQRT_2])
        })
        .collect()
}

fn ex4_1(params: &ExampleParams) -> Result<ExampleBundle> {
    let system = ex4_1_system();
    let invariant_set = InvariantSetSample::finite(&system, ex4_1_circle(params.circle_points.max(1)))?;
    let m = system.manifold().clone();
    // Tangential (−y, x, 0) and radial (xz, yz, x² + y²) directions.
    let field = full_stable_field(
        m,
        |p| vec![vec3(-p[1], p[0], 0.0), vec3(p[0] * p[2], p[1] * p[2], p[0] * p[0] + p[1] * p[1])],
        "E^s = T_pM (tangential, radial)",
    );
    Ok(ExampleBundle {
        name: ExampleName::Ex4_1,
        system,
        invariant_set,
        distributions: vec![NullDistribution { name: "zero".into(), vectors: Vec::new(), expected: Verdict::NotHyperbolic }],
        method: Method::Field(field),
        alternate_field: None,
    })
}

/// Iterates `n_transient` steps, then returns the next `n_keep` iterates.
pub fn omega_limit(s: &DiscreteSystem, p: &Point, n_transient: usize, n_keep: usize) -> Result<Vec<Point>> {
    let mut q = iterate(s, p, n_transient as i64)?;
    let mut out = Vec::with_capacity(n_keep);
    for _ in 0..n_keep {
        q = s.forward(&q)?;
        out.push(q.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractorSet {
    Points(Vec<Point>),
    /// Circle of the given radius in the plane z = height, centered on the z axis.
    Circle { radius: f64, height: f64 },
}

impl AttractorSet {
    pub fn for_example(name: ExampleName) -> Result<Self> {
        match name {
            ExampleName::Ex3_3 => Ok(AttractorSet::Points(vec![Point::new(vec![0.0, 0.0, 1.0])])),
            ExampleName::Ex4_1 => Ok(AttractorSet::Circle { radius: 1.0, height: SQRT_2 }),
            other => Err(Error::Usage(format!("{other} has no built-in attractor"))),
        }
    }

    pub fn distance(&self, p: &Point) -> f64 {
        match self {
            AttractorSet::Points(ps) => ps.iter().map(|q| q.distance(p)).fold(f64::INFINITY, f64::min),
            AttractorSet::Circle { radius, height } => {
                let c = p.coords();
                (c[0].hypot(c[1]) - radius).hypot(c[2] - height)
            }
        }
    }
}

/// max over the cloud of the distance to the set.
pub fn attractor_distance(set: &AttractorSet, cloud: &[Point]) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::Usage("attractor_distance needs a non-empty cloud".into()));
    }
    Ok(cloud.iter().map(|p| set.distance(p)).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorRow {
    pub start: usize,
    pub initial: Vec<f64>,
    pub last: Vec<f64>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub example: ExampleName,
    pub n_transient: usize,
    pub n_keep: usize,
    pub seed: u64,
    pub rows: Vec<AttractorRow>,
    pub max_distance: f64,
}

/// ω-limit clouds from random starts on H²(1), one seeded stream per start.
pub fn attractor_experiment(
    name: ExampleName,
    starts: usize,
    n_transient: usize,
    n_keep: usize,
    seed: u64,
    exec: Execution,
) -> Result<AttractorReport> {
    let system = match name {
        ExampleName::Ex3_3 => ex3_3_system(),
        ExampleName::Ex4_1 => ex4_1_system(),
        other => return Err(Error::Usage(format!("{other} has no built-in attractor"))),
    };
    let set = AttractorSet::for_example(name)?;
    let rows = map_range(exec, starts, |i| -> Result<AttractorRow> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let p = random_hyperboloid_point(&mut rng, 3.0);
        let cloud = omega_limit(&system, &p, n_transient, n_keep.max(1))?;
        Ok(AttractorRow {
            start: i,
            initial: p.to_vec(),
            last: cloud.last().expect("n_keep >= 1").to_vec(),
            distance: attractor_distance(&set, &cloud)?,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max_distance = rows.iter().map(|r| r.distance).fold(0.0, f64::max);
    Ok(AttractorReport { example: name, n_transient, n_keep, seed, rows, max_distance })
}

/// Result of running one bundle with one distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRun {
    pub example: ExampleName,
    pub distribution: String,
    pub expected: Verdict,
    pub observed: Verdict,
    pub matches: bool,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub stable_factor: Option<f64>,
    pub unstable_factor: Option<f64>,
    pub caveats: Vec<String>,
    pub witnesses: Vec<FailureWitness>,
    pub rejected: Vec<RejectedCandidate>,
    pub report: Option<HyperbolicityReport>,
    pub eigen: Option<EigenSearchOutcome>,
}

pub fn run_bundle(bundle: &ExampleBundle, distribution: Option<&str>, cfg: &CheckerConfig) -> Result<ExampleRun> {
    let dist = bundle.distribution(distribution)?;
    let (report, eigen) = match &bundle.method {
        Method::Field(field) => (Some(check_splitting(&bundle.system, &bundle.invariant_set, field, cfg)?), None),
        Method::EigenSearch { point } => {
            let en = Subspace::new(bundle.system.manifold(), point.clone(), dist.vectors.clone())?;
            let out = eigen_splitting_search(&bundle.system, point, &en, cfg)?;
            (out.report.clone(), Some(out))
        }
    };
    let observed = report.as_ref().map_or(Verdict::NotHyperbolic, |r| r.verdict);
    let mut caveats = bundle.invariant_set.caveats.clone();
    if let Some(r) = &report {
        for c in &r.caveats {
            if !caveats.contains(c) {
                caveats.push(c.clone());
            }
        }
    }
    Ok(ExampleRun {
        example: bundle.name,
        distribution: dist.name.clone(),
        expected: dist.expected,
        observed,
        matches: observed == dist.expected,
        a: report.as_ref().and_then(|r| r.a),
        b: report.as_ref().and_then(|r| r.b),
        stable_factor: report.as_ref().and_then(|r| r.stable_factor),
        unstable_factor: report.as_ref().and_then(|r| r.unstable_factor),
        caveats,
        witnesses: report.as_ref().map(|r| r.failure_witnesses.clone()).unwrap_or_default(),
        rejected: eigen.as_ref().map(|e| e.rejected.clone()).unwrap_or_default(),
        report,
        eigen,
    })
}

/// Flat Minkowski R³ along α(t) = (t, 0, 0) with
/// E^s(α(t)) = span{cos t·e₁ + sin t·e₂}, E^u = span{e₃},
/// E^n = span{(−sin t, cos t, 1)}.
pub fn rotating_field() -> (Manifold, Curve, SplittingField) {
    let m = Manifold::flat(MetricSignature::lorentz(3));
    let curve = Curve::new(0.0, 1.0, Arc::new(|t: f64| vec3(t, 0.0, 0.0))).with_velocity(Arc::new(|_t: f64| vec3(1.0, 0.0, 0.0)));
    let mm = m.clone();
    let field = SplittingField::new(
        "rotating E^s along (t, 0, 0)",
        Arc::new(move |p: &Point| {
            let t = p.coords()[0];
            let (s, c) = t.sin_cos();
            Splitting::new(
                &mm,
                Subspace::new(&mm, p.clone(), vec![vec3(c, s, 0.0)])?,
                Subspace::new(&mm, p.clone(), vec![vec3(0.0, 0.0, 1.0)])?,
                Subspace::new(&mm, p.clone(), vec![vec3(-s, c, 1.0)])?,
            )
        }),
    );
    (m, curve, field)
}

/// Points of H²(1) on a polar grid, for plotting the surface.
pub fn hyperboloid_mesh(radial: usize, angular: usize, r_max: f64) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity((radial + 1) * angular);
    for i in 0..=radial {
        let r = r_max * i as f64 / radial.max(1) as f64;
        for j in 0..angular {
            let th = 2.0 * PI * j as f64 / angular as f64;
            out.push([r * th.cos(), r * th.sin(), (1.0 + r * r).sqrt()]);
        }
    }
    out
}
