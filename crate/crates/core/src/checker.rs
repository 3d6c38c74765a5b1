//! Numerical verification of hyperbolicity up to a null distribution.
//!
//! For every sampled point the checker tests the four defining conditions:
//! (i) causal character of the splitting, (ii) Df-invariance of E^s and E^u,
//! (iii) exponential |g|-decay on E^s together with decay of cross terms, and
//! (iv) exponential |g|-growth on E^u. A single pair (a, b) must witness the
//! bounds at every point.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{cocycle_ensemble, cocycle_growth, tangent_matrix, DiscreteSystem, GrowthRecord};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::geometry::{classify, Causal, Manifold, Point, TangentVector, Vector, DEFAULT_EPS_NULL};
use crate::splitting::{
    d_subspace, grassmann_distance, pseudo_orthonormal_frame, subspace_image, DistanceOptions, Splitting,
    SplittingField, Subspace,
};
use crate::transport::Curve;

/// Minimum number of finite entries for a rate fit.
pub const MIN_FIT_ENTRIES: usize = 5;
/// Maximum number of failure witnesses kept in a report.
pub const WITNESS_LIMIT: usize = 32;
/// Relative slack when comparing measured log ratios with a bound.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constant {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckerConfig {
    pub horizon: usize,
    pub a: Constant,
    pub b: Constant,
    pub tol_cross: f64,
    pub tol_invariance: f64,
    pub samples_per_subspace: usize,
    pub eps_null: f64,
    pub seed: u64,
    /// With AUTO b, contraction is accepted only if b·(1 + headroom) < 1.
    pub headroom: f64,
    pub execution: Execution,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        Self {
            horizon: 30,
            a: Constant::Auto,
            b: Constant::Auto,
            tol_cross: 1e-6,
            tol_invariance: 1e-7,
            samples_per_subspace: 8,
            eps_null: DEFAULT_EPS_NULL,
            seed: 0,
            headroom: 0.01,
            execution: Execution::default(),
        }
    }
}

impl CheckerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 5 {
            return Err(Error::Usage(format!("horizon must be at least 5, got {}", self.horizon)));
        }
        if let Constant::Fixed(a) = self.a {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Usage(format!("a must be positive, got {a}")));
            }
        }
        if let Constant::Fixed(b) = self.b {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::Usage(format!("b must lie in (0, 1), got {b}")));
            }
        }
        for (name, v) in [
            ("tol_cross", self.tol_cross),
            ("tol_invariance", self.tol_invariance),
            ("eps_null", self.eps_null),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.headroom >= 0.0 && self.headroom.is_finite()) {
            return Err(Error::Usage(format!("headroom must be non-negative, got {}", self.headroom)));
        }
        Ok(())
    }
}

/// Finite sample of an invariant set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSetSample {
    pub points: Vec<Point>,
    /// Max distance of forward and inverse images to the represented set.
    pub closure_residual: f64,
    /// Known ways in which the sample falls short of a compact invariant set.
    pub caveats: Vec<String>,
}

impl InvariantSetSample {
    pub fn new(points: Vec<Point>, closure_residual: f64) -> Self {
        Self { points, closure_residual, caveats: Vec::new() }
    }

    /// For finite invariant sets (fixed points, periodic orbits): the
    /// residual is measured against the points themselves.
    pub fn finite(s: &DiscreteSystem, points: Vec<Point>) -> Result<Self> {
        let mut worst: f64 = 0.0;
        for p in &points {
            for q in [s.forward(p)?, s.inverse(p)?] {
                let d = points.iter().map(|r| r.distance(&q)).fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
        Ok(Self::new(points, worst))
    }

    pub fn with_caveat(mut self, caveat: impl Into<String>) -> Self {
        self.caveats.push(caveat.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Hyperbolic,
    NotHyperbolic,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Hyperbolic => "hyperbolic",
            Verdict::NotHyperbolic => "not_hyperbolic",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// (i): causal character of E^s, E^u and E^n.
    CausalCharacter,
    /// (ii): Df E(p) = E(f(p)).
    Invariance,
    /// (iii): |g| decay on E^s.
    StableDecay,
    /// (iii): decay of g(Dfⁿv, Dfⁿw).
    CrossDecay,
    /// (iv): |g| growth on E^u.
    UnstableGrowth,
    /// The splitting could not be processed at this point.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub a_fit: f64,
    pub b_fit: f64,
    /// Max deviation of log(r_n / r_0) from the fitted line.
    pub residual: f64,
    /// Entries skipped because they were exactly null.
    pub excluded: usize,
}

/// Least squares of log(r_n / r_0) against n: slope log b, intercept log a.
pub fn fit_rates(rec: &GrowthRecord) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = (0..rec.entries.len())
        .map(|n| (n as f64, rec.log_ratio(n)))
        .filter(|(_, y)| y.is_finite())
        .collect();
    if pts.len() < MIN_FIT_ENTRIES {
        return Err(Error::InsufficientData { finite: pts.len(), required: MIN_FIT_ENTRIES });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = pts.iter().map(|p| (p.1 - intercept - slope * p.0).abs()).fold(0.0, f64::max);
    Ok(RateFit {
        a_fit: intercept.exp(),
        b_fit: slope.exp(),
        residual,
        excluded: rec.entries.len() - pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub point: Vec<f64>,
    pub cond_i: bool,
    pub cond_ii: bool,
    pub cond_iii: bool,
    pub cond_iv: bool,
    /// Smallest a making this point's bounds hold for the common b.
    pub fitted_a: Option<f64>,
    /// Worst per-step factor at this point, stable or reciprocal unstable.
    pub fitted_b: Option<f64>,
    pub stable_fit: Option<RateFit>,
    pub unstable_fit: Option<RateFit>,
    pub worst_cross_tail: f64,
    pub stable_invariance: f64,
    pub unstable_invariance: f64,
    pub error: Option<String>,
    /// Growth records of the stable and unstable samples, for replay.
    #[serde(skip)]
    pub stable_records: Vec<GrowthRecord>,
    #[serde(skip)]
    pub unstable_records: Vec<GrowthRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureWitness {
    pub point: Vec<f64>,
    pub vector: Vec<f64>,
    pub condition: Condition,
    pub b_fit: Option<f64>,
    /// r_n / r_0 for decay and growth failures, |g(Dfⁿv, Dfⁿw)| for cross
    /// terms, the Grassmann distance for invariance failures.
    pub measured: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityReport {
    pub system: String,
    pub field: String,
    pub verdict: Verdict,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Largest fitted per-step |g| factor over all stable samples.
    pub stable_factor: Option<f64>,
    /// Smallest fitted per-step |g| factor over all unstable samples.
    pub unstable_factor: Option<f64>,
    pub horizon: usize,
    pub closure_residual: f64,
    pub per_point: Vec<PointReport>,
    pub failure_witnesses: Vec<FailureWitness>,
    pub witnesses_total: usize,
    pub caveats: Vec<String>,
    pub probe_note: String,
}

impl HyperbolicityReport {
    /// Re-checks the stored growth records against the reported (a, b).
    pub fn replay(&self) -> bool {
        let (Some(a), Some(b)) = (self.a, self.b) else {
            return false;
        };
        let (la, lb) = (a.ln(), b.ln());
        self.per_point.iter().all(|p| {
            p.stable_records.iter().all(|r| stable_bound_holds(r, la, lb))
                && p.unstable_records.iter().all(|r| unstable_bound_holds(r, la, lb))
        })
    }
}

const PROBE_NOTE: &str = "cross terms probed against the pseudo-orthonormal stable basis, the random stable \
samples, and null-part basis vectors whose own |g| decays; other decaying directions are not examined";

fn slack(x: f64) -> f64 {
    BOUND_SLACK * x.abs().max(1.0)
}

/// r_n ≤ a·bⁿ·r_0 for all n, in logs.
fn stable_bound_holds(r: &GrowthRecord, la: f64, lb: f64) -> bool {
    (0..r.entries.len()).all(|n| {
        let y = r.log_ratio(n);
        let bound = la + n as f64 * lb;
        y == f64::NEG_INFINITY || y <= bound + slack(bound)
    })
}

/// r_n ≥ a⁻¹·b⁻ⁿ·r_0 for all n, in logs. Null entries fail.
fn unstable_bound_holds(r: &GrowthRecord, la: f64, lb: f64) -> bool {
    (0..r.entries.len()).all(|n| {
        let y = r.log_ratio(n);
        let bound = -la - n as f64 * lb;
        y.is_finite() && y >= bound - slack(bound)
    })
}

/// Smallest log a for which the record meets its bound with the given log b.
fn needed_log_a(r: &GrowthRecord, lb: f64, stable: bool) -> f64 {
    (0..r.entries.len())
        .map(|n| {
            let y = r.log_ratio(n);
            if stable {
                if y == f64::NEG_INFINITY {
                    0.0
                } else {
                    y - n as f64 * lb
                }
            } else if y.is_finite() {
                -(n as f64) * lb - y
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

struct Sample {
    vector: Vector,
    record: GrowthRecord,
    fit: Option<RateFit>,
}

struct PointData {
    point: Point,
    cond_i: bool,
    cond_i_witness: Option<(Vector, String)>,
    stable_inv: f64,
    unstable_inv: f64,
    inv_witness: Option<(Vector, f64, &'static str)>,
    stable: Vec<Sample>,
    unstable: Vec<Sample>,
    cross_tail: f64,
    cross_witness: Option<(Vector, Vec<f64>)>,
    numeric_error: Option<String>,
    fatal_error: Option<String>,
}

impl PointData {
    fn empty(point: Point) -> Self {
        Self {
            point,
            cond_i: true,
            cond_i_witness: None,
            stable_inv: 0.0,
            unstable_inv: 0.0,
            inv_witness: None,
            stable: Vec::new(),
            unstable: Vec::new(),
            cross_tail: 0.0,
            cross_witness: None,
            numeric_error: None,
            fatal_error: None,
        }
    }
}

fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Pseudo-orthonormal basis plus random unit-|g| combinations. Also reports
/// whether g is definite on the subspace.
fn subspace_samples(
    m: &Manifold,
    e: &Subspace,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Vector>, bool)> {
    if e.dim() == 0 {
        return Ok((Vec::new(), true));
    }
    let frame = pseudo_orthonormal_frame(m, e)?;
    let definite = frame.definite_sign().is_some();
    let basis = frame.subspace.basis().to_vec();
    let mut out = basis.clone();
    // In a line every combination is ±(basis vector), with the same record.
    let count = if basis.len() == 1 { 0 } else { count };
    for _ in 0..count {
        let mut v = Vector::zeros(m.ambient_dim());
        for b in &basis {
            v += b * rng.random_range(-1.0..1.0);
        }
        let g = m.inner(&v, &v).abs();
        let scale = if g > 1e-12 * v.norm_squared() { g.sqrt() } else { v.norm() };
        if scale > 0.0 {
            out.push(v / scale);
        }
    }
    Ok((out, definite))
}

fn examine_point(
    s: &DiscreteSystem,
    field: &SplittingField,
    p: &Point,
    index: usize,
    cfg: &CheckerConfig,
) -> Result<PointData> {
    let m = s.manifold();
    let split = field.at(p)?;
    let mut data = PointData::empty(p.clone());
    let mut rng = point_rng(cfg.seed, index);

    let sampled = subspace_samples(m, &split.stable, cfg.samples_per_subspace, &mut rng).and_then(|st| {
        subspace_samples(m, &split.unstable, cfg.samples_per_subspace, &mut rng).map(|un| (st, un))
    });
    let ((stable_vs, stable_def), (unstable_vs, unstable_def)) = match sampled {
        Ok(x) => x,
        Err(Error::Degenerate(msg)) => {
            data.cond_i = false;
            data.fatal_error = Some(format!("degenerate splitting: {msg}"));
            return Ok(data);
        }
        Err(e) => return Err(e),
    };

    // (i)
    if !stable_def || !unstable_def {
        data.cond_i = false;
        let which = if !stable_def { &split.stable } else { &split.unstable };
        data.cond_i_witness =
            Some((which.basis()[0].clone(), "metric is indefinite on the subspace, so it contains null vectors".into()));
    }
    for v in stable_vs.iter().chain(&unstable_vs) {
        if classify(m, v, cfg.eps_null) == Causal::Null {
            data.cond_i = false;
            data.cond_i_witness.get_or_insert((v.clone(), "null vector in a stable or unstable subspace".into()));
        }
    }
    for v in split.null_part.basis() {
        if classify(m, v, cfg.eps_null) != Causal::Null {
            data.cond_i = false;
            data.cond_i_witness.get_or_insert((v.clone(), "null-part basis vector is not null".into()));
        }
    }

    // (ii)
    let q = s.forward(p)?;
    let split_q = field.at(&q)?;
    for (e, eq, label) in [(&split.stable, &split_q.stable, "stable"), (&split.unstable, &split_q.unstable, "unstable")]
    {
        if e.dim() != eq.dim() {
            data.inv_witness.get_or_insert((Vector::zeros(m.ambient_dim()), f64::INFINITY, label));
            if label == "stable" {
                data.stable_inv = f64::INFINITY;
            } else {
                data.unstable_inv = f64::INFINITY;
            }
            continue;
        }
        let d = match subspace_image(s, e) {
            Ok(img) => grassmann_distance(&img, eq)?,
            Err(err) if err.is_numeric() => {
                data.numeric_error = Some(err.to_string());
                return Ok(data);
            }
            Err(err) => return Err(err),
        };
        if label == "stable" {
            data.stable_inv = d;
        } else {
            data.unstable_inv = d;
        }
        if d > cfg.tol_invariance && e.dim() > 0 {
            data.inv_witness.get_or_insert((e.basis()[0].clone(), d, label));
        }
    }

    // Growth along the orbit, all samples at once.
    let null_vs: Vec<Vector> = split.null_part.basis().iter().map(|v| v.normalize()).collect();
    let seeds: Vec<Vector> = stable_vs.iter().chain(&unstable_vs).chain(&null_vs).cloned().collect();
    let ens = match cocycle_ensemble(s, p, &seeds, cfg.horizon) {
        Ok(e) => e,
        Err(err) if err.is_numeric() => {
            data.numeric_error = Some(err.to_string());
            return Ok(data);
        }
        Err(err) => return Err(err),
    };
    let ns = stable_vs.len();
    let nu = unstable_vs.len();
    let mut fit_error = None;
    let mut sample = |k: usize, v: &Vector| {
        let record = ens.growth(m, k, cfg.eps_null);
        let fit = match fit_rates(&record) {
            Ok(f) => Some(f),
            Err(e) => {
                fit_error.get_or_insert(e.to_string());
                None
            }
        };
        Sample { vector: v.clone(), record, fit }
    };
    data.stable = stable_vs.iter().enumerate().map(|(k, v)| sample(k, v)).collect();
    data.unstable = unstable_vs.iter().enumerate().map(|(k, v)| sample(ns + k, v)).collect();
    if let Some(e) = fit_error {
        data.numeric_error = Some(e);
    }

    // Cross-term probes: stable samples and decaying null-part vectors.
    let mut probes: Vec<usize> = (0..ns).collect();
    for k in 0..null_vs.len() {
        let rec = ens.growth(m, ns + nu + k, cfg.eps_null);
        let decays = rec.all_zero()
            || fit_rates(&rec).is_ok_and(|f| f.b_fit * (1.0 + cfg.headroom) < 1.0 && stable_bound_holds(&rec, f.a_fit.ln().max(0.0), f.b_fit.ln()));
        if decays {
            probes.push(ns + nu + k);
        }
    }
    let n_max = cfg.horizon;
    for i in 0..ns {
        for &j in &probes {
            let seq: Vec<f64> = (0..=n_max).map(|n| ens.cross(m, n, i, j, 0.0).value().abs()).collect();
            let tail = seq[n_max / 2..].iter().copied().fold(0.0, f64::max);
            if tail > data.cross_tail {
                data.cross_tail = tail;
                data.cross_witness = Some((stable_vs[i].clone(), seq));
            }
        }
    }
    Ok(data)
}

fn worst_fit(samples: &[Sample], stable: bool) -> Option<RateFit> {
    let fits = samples.iter().filter_map(|s| s.fit);
    if stable {
        fits.max_by(|x, y| x.b_fit.total_cmp(&y.b_fit))
    } else {
        fits.min_by(|x, y| x.b_fit.total_cmp(&y.b_fit))
    }
}

/// Checks conditions (i)-(iv) at every sample point with a common (a, b).
pub fn check_splitting(
    s: &DiscreteSystem,
    c: &InvariantSetSample,
    field: &SplittingField,
    cfg: &CheckerConfig,
) -> Result<HyperbolicityReport> {
    cfg.validate()?;
    let m = s.manifold();
    let results = map_indexed(cfg.execution, &c.points, |i, p| examine_point(s, field, p, i, cfg));
    let data: Vec<PointData> = results.into_iter().collect::<Result<_>>()?;

    // Common b.
    let stable_worst = data.iter().filter_map(|d| worst_fit(&d.stable, true)).map(|f| f.b_fit).fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    let unstable_weakest = data.iter().filter_map(|d| worst_fit(&d.unstable, false)).map(|f| f.b_fit).fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))));
    let b = match cfg.b {
        Constant::Fixed(b) => Some(b),
        Constant::Auto => match (stable_worst, unstable_weakest) {
            (None, None) => None,
            (st, un) => Some(st.unwrap_or(0.0).max(un.map_or(0.0, |u| 1.0 / u))),
        },
    };
    let contraction_ok = match (cfg.b, b) {
        (Constant::Fixed(_), _) => true,
        (Constant::Auto, Some(b)) => b * (1.0 + cfg.headroom) < 1.0,
        (Constant::Auto, None) => true,
    };
    // ln b for bounds; with no samples any b works.
    let lb = b.filter(|b| *b > 0.0).map_or(0.0, f64::ln);

    let point_log_a: Vec<f64> = data
        .iter()
        .map(|d| {
            let st = d.stable.iter().map(|x| needed_log_a(&x.record, lb, true));
            let un = d.unstable.iter().map(|x| needed_log_a(&x.record, lb, false));
            st.chain(un).fold(0.0, f64::max)
        })
        .collect();
    let a = match cfg.a {
        Constant::Fixed(a) => Some(a),
        Constant::Auto => {
            let la = point_log_a.iter().copied().fold(0.0, f64::max);
            la.is_finite().then(|| la.exp())
        }
    };
    let la = a.map_or(f64::INFINITY, f64::ln);

    let mut per_point = Vec::with_capacity(data.len());
    let mut witnesses = Vec::new();
    let mut witnesses_total = 0usize;
    let mut any_fail = !contraction_ok || a.is_none();
    let mut any_numeric = false;
    let mut push = |w: FailureWitness| {
        witnesses_total += 1;
        if witnesses.len() < WITNESS_LIMIT {
            witnesses.push(w);
        }
    };

    for (d, log_a_here) in data.iter().zip(&point_log_a) {
        let pt = d.point.to_vec();
        let stable_fit = worst_fit(&d.stable, true);
        let unstable_fit = worst_fit(&d.unstable, false);
        let numeric = d.numeric_error.is_some();
        any_numeric |= numeric;

        if let Some(msg) = &d.fatal_error {
            any_fail = true;
            push(FailureWitness {
                point: pt.clone(),
                vector: Vec::new(),
                condition: Condition::Degenerate,
                b_fit: None,
                measured: Vec::new(),
                detail: msg.clone(),
            });
            per_point.push(PointReport {
                point: pt,
                cond_i: false,
                cond_ii: false,
                cond_iii: false,
                cond_iv: false,
                fitted_a: None,
                fitted_b: None,
                stable_fit: None,
                unstable_fit: None,
                worst_cross_tail: f64::NAN,
                stable_invariance: f64::NAN,
                unstable_invariance: f64::NAN,
                error: Some(msg.clone()),
                stable_records: Vec::new(),
                unstable_records: Vec::new(),
            });
            continue;
        }

        let cond_i = d.cond_i;
        if let Some((v, detail)) = &d.cond_i_witness {
            push(FailureWitness {
                point: pt.clone(),
                vector: v.as_slice().to_vec(),
                condition: Condition::CausalCharacter,
                b_fit: None,
                measured: vec![m.inner(v, v)],
                detail: detail.clone(),
            });
        }
        let cond_ii = d.stable_inv <= cfg.tol_invariance && d.unstable_inv <= cfg.tol_invariance;
        if let Some((v, dist, label)) = &d.inv_witness {
            push(FailureWitness {
                point: pt.clone(),
                vector: v.as_slice().to_vec(),
                condition: Condition::Invariance,
                b_fit: None,
                measured: vec![*dist],
                detail: format!("image of the {label} subspace is {dist:e} away from the {label} subspace at f(p)"),
            });
        }

        // (iii)
        let local_contract = |f: &RateFit| match cfg.b {
            Constant::Auto => f.b_fit * (1.0 + cfg.headroom) < 1.0,
            Constant::Fixed(_) => true,
        };
        let stable_bad = d
            .stable
            .iter()
            .filter(|x| x.fit.is_some_and(|f| !local_contract(&f)) || !stable_bound_holds(&x.record, la, lb))
            .max_by(|x, y| {
                let key = |s: &Sample| s.fit.map_or(f64::NEG_INFINITY, |f| f.b_fit);
                key(x).total_cmp(&key(y))
            });
        let cross_ok = d.cross_tail <= cfg.tol_cross;
        let cond_iii = stable_bad.is_none() && cross_ok;
        if let Some(x) = stable_bad {
            push(FailureWitness {
                point: pt.clone(),
                vector: x.vector.as_slice().to_vec(),
                condition: Condition::StableDecay,
                b_fit: x.fit.map(|f| f.b_fit),
                measured: x.record.ratios(),
                detail: "|g(Dfⁿv, Dfⁿv)| does not decay exponentially".into(),
            });
        }
        if !cross_ok {
            if let Some((v, seq)) = &d.cross_witness {
                push(FailureWitness {
                    point: pt.clone(),
                    vector: v.as_slice().to_vec(),
                    condition: Condition::CrossDecay,
                    b_fit: None,
                    measured: seq.clone(),
                    detail: format!(
                        "max |g(Dfⁿv, Dfⁿw)| over the second half of the horizon is {:e}",
                        d.cross_tail
                    ),
                });
            }
        }

        // (iv)
        let local_expand = |f: &RateFit| match cfg.b {
            Constant::Auto => f.b_fit > 1.0 + cfg.headroom,
            Constant::Fixed(_) => true,
        };
        let unstable_bad = d
            .unstable
            .iter()
            .filter(|x| x.fit.is_some_and(|f| !local_expand(&f)) || !unstable_bound_holds(&x.record, la, lb))
            .min_by(|x, y| {
                let key = |s: &Sample| s.fit.map_or(f64::NEG_INFINITY, |f| f.b_fit);
                key(x).total_cmp(&key(y))
            });
        let cond_iv = unstable_bad.is_none();
        if let Some(x) = unstable_bad {
            push(FailureWitness {
                point: pt.clone(),
                vector: x.vector.as_slice().to_vec(),
                condition: Condition::UnstableGrowth,
                b_fit: x.fit.map(|f| f.b_fit),
                measured: x.record.ratios(),
                detail: "|g(Dfⁿv, Dfⁿv)| does not grow exponentially".into(),
            });
        }

        any_fail |= !(cond_i && cond_ii && cond_iii && cond_iv);
        let fitted_b = match (stable_fit, unstable_fit) {
            (None, None) => None,
            (st, un) => Some(st.map_or(0.0, |f| f.b_fit).max(un.map_or(0.0, |f| 1.0 / f.b_fit))),
        };
        per_point.push(PointReport {
            point: pt,
            cond_i,
            cond_ii,
            cond_iii,
            cond_iv,
            fitted_a: log_a_here.is_finite().then(|| log_a_here.exp()),
            fitted_b,
            stable_fit,
            unstable_fit,
            worst_cross_tail: d.cross_tail,
            stable_invariance: d.stable_inv,
            unstable_invariance: d.unstable_inv,
            error: d.numeric_error.clone(),
            stable_records: d.stable.iter().map(|x| x.record.clone()).collect(),
            unstable_records: d.unstable.iter().map(|x| x.record.clone()).collect(),
        });
    }

    let verdict = if any_fail {
        Verdict::NotHyperbolic
    } else if any_numeric {
        Verdict::Inconclusive
    } else {
        Verdict::Hyperbolic
    };
    let mut caveats = c.caveats.clone();
    if c.closure_residual > 1e-6 {
        caveats.push(format!(
            "invariant-set sample is closed only up to {:e} under the map and its inverse",
            c.closure_residual
        ));
    }
    if !contraction_ok {
        if let Some(b) = b {
            caveats.push(format!("fitted b = {b} is not a contraction"));
        }
    }
    Ok(HyperbolicityReport {
        system: s.name().to_string(),
        field: field.description().to_string(),
        verdict,
        a,
        b,
        stable_factor: stable_worst,
        unstable_factor: unstable_weakest,
        horizon: cfg.horizon,
        closure_residual: c.closure_residual,
        per_point,
        failure_witnesses: witnesses,
        witnesses_total,
        caveats,
        probe_note: PROBE_NOTE.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    /// The eigendirections together with E_n do not span the tangent space.
    NotDirectSum,
    /// |λ| = 1: |g| neither decays nor grows, so (iii) and (iv) both fail.
    NeutralDirection,
    /// A chosen stable or unstable subspace contains null vectors.
    NullDirection,
    /// The candidate passed the structural checks but not the checker.
    BoundViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedCandidate {
    /// |λ| of the eigenvalue clusters making up the candidate.
    pub magnitudes: Vec<f64>,
    pub reason: Rejection,
    pub vector: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSearchOutcome {
    /// Real eigenvalues of Df_p sorted by magnitude.
    pub eigenvalues: Vec<f64>,
    pub splitting: Option<Splitting>,
    pub report: Option<HyperbolicityReport>,
    pub rejected: Vec<RejectedCandidate>,
}

struct Cluster {
    magnitude: f64,
    vectors: Vec<Vector>,
}

/// Groups real eigenvalues by magnitude and returns ambient eigenvectors.
/// Complex and defective spectra are not supported.
fn eigen_clusters(a: &DMatrix<f64>, basis: &[Vector]) -> Result<(Vec<f64>, Vec<Cluster>)> {
    let k = a.nrows();
    let scale = a.norm().max(1.0);
    let mut vals: Vec<f64> = Vec::with_capacity(k);
    for z in a.complex_eigenvalues().iter() {
        if z.im.abs() > 1e-9 * scale {
            return Err(Error::Unsupported(format!("complex eigenvalue {z} at the fixed point")));
        }
        vals.push(z.re);
    }
    vals.sort_by(|x, y| x.abs().total_cmp(&y.abs()).then(x.total_cmp(y)));
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0);
    let mut clusters: Vec<(f64, Vec<f64>)> = Vec::new();
    for &v in &vals {
        match clusters.last_mut() {
            Some((mag, members)) if close(*mag, v.abs()) => members.push(v),
            _ => clusters.push((v.abs(), vec![v])),
        }
    }
    let mut out = Vec::new();
    for (mag, members) in clusters {
        let mut distinct: Vec<f64> = Vec::new();
        for v in &members {
            if !distinct.iter().any(|d| close(*d, *v)) {
                distinct.push(*v);
            }
        }
        let mut vectors = Vec::new();
        for lambda in distinct {
            let shifted = a - DMatrix::identity(k, k) * lambda;
            let svd = shifted.svd(false, true);
            let vt = svd.v_t.expect("requested");
            for (i, sv) in svd.singular_values.iter().enumerate() {
                if *sv <= 1e-8 * scale {
                    let coeffs = vt.row(i);
                    let mut amb = Vector::zeros(basis[0].len());
                    for (c, b) in coeffs.iter().zip(basis) {
                        amb += b * *c;
                    }
                    vectors.push(amb);
                }
            }
        }
        if vectors.len() != members.len() {
            return Err(Error::Unsupported(format!(
                "eigenvalue magnitude {mag} has multiplicity {} but only {} eigenvectors",
                members.len(),
                vectors.len()
            )));
        }
        out.push(Cluster { magnitude: mag, vectors });
    }
    Ok((vals, out))
}

fn combinations(n: usize, pick: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>, want: &dyn Fn(&[usize]) -> bool, done: &dyn Fn(&[usize]) -> bool) {
    if done(pick) {
        if want(pick) {
            out.push(pick.clone());
        }
        return;
    }
    for i in start..n {
        pick.push(i);
        combinations(n, pick, i + 1, out, want, done);
        pick.pop();
    }
}

/// Looks for a splitting at a fixed point built from eigendirections of
/// Df_p: E^s from |λ| < 1, E^u from |λ| > 1, completing E_n to T_pM.
/// Candidates are enumerated as sets of eigenvalue clusters in
/// lexicographic order of ascending |λ|.
pub fn eigen_splitting_search(
    s: &DiscreteSystem,
    p: &Point,
    e_n: &Subspace,
    cfg: &CheckerConfig,
) -> Result<EigenSearchOutcome> {
    cfg.validate()?;
    let m = s.manifold();
    let q = s.forward(p)?;
    if !q.same_as(p) {
        return Err(Error::Usage(format!("{:?} is not a fixed point", p.coords().as_slice())));
    }
    if !e_n.base().same_as(p) {
        return Err(Error::Usage("null distribution is attached at another point".into()));
    }
    let (a, src, _dst) = tangent_matrix(s, p)?;
    let (eigenvalues, clusters) = eigen_clusters(&a, &src)?;
    let need = m.dim().checked_sub(e_n.dim()).ok_or_else(|| Error::Usage("E_n is larger than the tangent space".into()))?;

    let dims: Vec<usize> = clusters.iter().map(|c| c.vectors.len()).collect();
    let mut picks = Vec::new();
    let total = |pk: &[usize]| pk.iter().map(|&i| dims[i]).sum::<usize>();
    combinations(
        clusters.len(),
        &mut Vec::new(),
        0,
        &mut picks,
        &|pk| total(pk) == need,
        &|pk| total(pk) >= need,
    );

    let mut rejected = Vec::new();
    for pick in picks {
        let magnitudes: Vec<f64> = pick.iter().map(|&i| clusters[i].magnitude).collect();
        let neutral = |mag: f64| (mag - 1.0).abs() <= 1e-9;
        let mut stable = Vec::new();
        let mut unstable = Vec::new();
        let mut neutral_vs = Vec::new();
        for &i in &pick {
            let c = &clusters[i];
            let bucket = if neutral(c.magnitude) {
                &mut neutral_vs
            } else if c.magnitude < 1.0 {
                &mut stable
            } else {
                &mut unstable
            };
            bucket.extend(c.vectors.iter().cloned());
        }
        let all: Vec<Vector> = stable.iter().chain(&unstable).chain(&neutral_vs).chain(e_n.basis()).cloned().collect();
        let sub = |vs: Vec<Vector>| Subspace::new(m, p.clone(), vs);
        let direct = Subspace::new(m, p.clone(), all).is_ok();
        if !direct {
            rejected.push(RejectedCandidate {
                magnitudes,
                reason: Rejection::NotDirectSum,
                vector: e_n.basis().first().map(|v| v.as_slice().to_vec()).unwrap_or_default(),
                detail: "E_n lies in the span of the chosen eigendirections".into(),
            });
            continue;
        }
        if let Some(v) = neutral_vs.first() {
            let rec = cocycle_growth(s, p, &TangentVector::new_unchecked(p.clone(), v.clone()), cfg.horizon)?;
            let b_fit = fit_rates(&rec).map(|f| f.b_fit).unwrap_or(f64::NAN);
            rejected.push(RejectedCandidate {
                magnitudes,
                reason: Rejection::NeutralDirection,
                vector: v.as_slice().to_vec(),
                detail: format!("|g| ratio has fitted factor {b_fit}: fails both decay (iii) and growth (iv)"),
            });
            continue;
        }
        let splitting = Splitting::new(m, sub(stable)?, sub(unstable)?, e_n.clone())?;
        let null_in = [&splitting.stable, &splitting.unstable].into_iter().find_map(|e| {
            if e.dim() == 0 {
                return None;
            }
            match pseudo_orthonormal_frame(m, e) {
                Ok(f) if f.definite_sign().is_some() => None,
                _ => Some(e.basis()[0].clone()),
            }
        });
        if let Some(v) = null_in {
            rejected.push(RejectedCandidate {
                magnitudes,
                reason: Rejection::NullDirection,
                vector: v.as_slice().to_vec(),
                detail: "stable or unstable part contains null vectors".into(),
            });
            continue;
        }
        let sample = InvariantSetSample::new(vec![p.clone()], q.distance(p));
        let field = SplittingField::from_table(vec![splitting.clone()], "eigen-splitting at the fixed point");
        let report = check_splitting(s, &sample, &field, cfg)?;
        if report.verdict == Verdict::Hyperbolic {
            return Ok(EigenSearchOutcome { eigenvalues, splitting: Some(splitting), report: Some(report), rejected });
        }
        rejected.push(RejectedCandidate {
            magnitudes,
            reason: Rejection::BoundViolation,
            vector: report.failure_witnesses.first().map(|w| w.vector.clone()).unwrap_or_default(),
            detail: format!("checker verdict {}", report.verdict.as_str()),
        });
    }
    Ok(EigenSearchOutcome { eigenvalues, splitting: None, report: None, rejected })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessRow {
    pub point: Vec<f64>,
    pub stable_distance: f64,
    pub unstable_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub first: HyperbolicityReport,
    pub second: HyperbolicityReport,
    pub both_pass: bool,
    pub rows: Vec<UniquenessRow>,
    pub max_stable_distance: f64,
    pub max_unstable_distance: f64,
    /// Both fields pass yet differ by more than tol_invariance somewhere.
    pub counterexample: bool,
    pub note: String,
}

/// Checks two splitting fields sharing E^n and compares them when both pass.
pub fn uniqueness_probe(
    s: &DiscreteSystem,
    c: &InvariantSetSample,
    field1: &SplittingField,
    field2: &SplittingField,
    cfg: &CheckerConfig,
) -> Result<UniquenessReport> {
    let mut pairs = Vec::with_capacity(c.points.len());
    for p in &c.points {
        let (s1, s2) = (field1.at(p)?, field2.at(p)?);
        let same_null = s1.null_part.dim() == s2.null_part.dim()
            && grassmann_distance(&s1.null_part, &s2.null_part)? <= cfg.tol_invariance;
        if !same_null {
            return Err(Error::Usage(format!(
                "the two fields have different null parts at {:?}",
                p.coords().as_slice()
            )));
        }
        pairs.push((s1, s2));
    }
    let first = check_splitting(s, c, field1, cfg)?;
    let second = check_splitting(s, c, field2, cfg)?;
    let both_pass = first.verdict == Verdict::Hyperbolic && second.verdict == Verdict::Hyperbolic;
    let mut rows = Vec::new();
    if both_pass {
        for (p, (s1, s2)) in c.points.iter().zip(&pairs) {
            let dist = |x: &Subspace, y: &Subspace| {
                if x.dim() == y.dim() {
                    grassmann_distance(x, y)
                } else {
                    Ok(std::f64::consts::FRAC_PI_2)
                }
            };
            rows.push(UniquenessRow {
                point: p.to_vec(),
                stable_distance: dist(&s1.stable, &s2.stable)?,
                unstable_distance: dist(&s1.unstable, &s2.unstable)?,
            });
        }
    }
    let max_stable_distance = rows.iter().map(|r| r.stable_distance).fold(0.0, f64::max);
    let max_unstable_distance = rows.iter().map(|r| r.unstable_distance).fold(0.0, f64::max);
    let counterexample = both_pass && max_stable_distance.max(max_unstable_distance) > cfg.tol_invariance;
    let note = if counterexample {
        "two distinct splittings with the same null part both pass; uniqueness of the decomposition fails here".into()
    } else if both_pass {
        "both splittings pass and coincide".into()
    } else {
        "at most one splitting passes, so there is no uniqueness conflict".into()
    };
    Ok(UniquenessReport {
        first,
        second,
        both_pass,
        rows,
        max_stable_distance,
        max_unstable_distance,
        counterexample,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub n: usize,
    pub t: f64,
    pub d_stable: f64,
    pub d_unstable: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub rows: Vec<ContinuityRow>,
    pub non_increasing: bool,
    pub final_stable: f64,
    pub final_unstable: f64,
    pub converged: bool,
    pub tol_continuity: f64,
}

pub const TOL_CONTINUITY: f64 = 1e-3;

/// d between the splitting at α(t_n) and at α(0) for each t_n.
pub fn continuity_experiment(
    m: &Manifold,
    field: &SplittingField,
    curve: &Curve,
    t_seq: &[f64],
    opts: &DistanceOptions,
    tol_continuity: f64,
) -> Result<ContinuityReport> {
    if t_seq.is_empty() {
        return Err(Error::Usage("continuity_experiment needs at least one parameter value".into()));
    }
    let base = field.at(&curve.position(0.0))?;
    let dist = |e: &Subspace, e0: &Subspace, t: f64| -> Result<f64> {
        if e.dim() == 0 && e0.dim() == 0 {
            Ok(0.0)
        } else {
            Ok(d_subspace(m, curve, e, t, e0, 0.0, opts)?.value)
        }
    };
    let mut rows = Vec::with_capacity(t_seq.len());
    for (n, &t) in t_seq.iter().enumerate() {
        let here = field.at(&curve.position(t))?;
        rows.push(ContinuityRow {
            n: n + 1,
            t,
            d_stable: dist(&here.stable, &base.stable, t)?,
            d_unstable: dist(&here.unstable, &base.unstable, t)?,
        });
    }
    let mono = |f: fn(&ContinuityRow) -> f64| rows.windows(2).all(|w| f(&w[1]) <= f(&w[0]) + 1e-12);
    let non_increasing = mono(|r| r.d_stable) && mono(|r| r.d_unstable);
    let last = rows.last().expect("non-empty");
    let (final_stable, final_unstable) = (last.d_stable, last.d_unstable);
    Ok(ContinuityReport {
        converged: non_increasing && final_stable <= tol_continuity && final_unstable <= tol_continuity,
        rows,
        non_increasing,
        final_stable,
        final_unstable,
        tol_continuity,
    })
}
