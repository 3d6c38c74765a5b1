//! Levi-Civita parallel transport along curves.
//!
//! On a flat space the Christoffel symbols vanish in the ambient
//! coordinates and transport is the identity on components. On a level-set
//! hypersurface with unit normal ν (g(ν,ν) = s), a tangent field Z along α
//! is parallel iff its ambient derivative is purely normal, which together
//! with g(Z, ν) = 0 gives
//!
//! ```text
//! Z'(t) = -s · g(Z, ν'(α(t))) · ν(α(t))
//! ```
//!
//! This is integrated with fixed-step RK4, projecting back onto the tangent
//! plane after every step.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{FlatPseudoSpace, Manifold, Point, TangentVector, Vector, H_CURVE, TOL_SURFACE};

pub type CurveMap = Arc<dyn Fn(f64) -> Vector + Send + Sync>;

#[derive(Clone)]
pub struct Curve {
    start: f64,
    end: f64,
    position: CurveMap,
    velocity: Option<CurveMap>,
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Curve")
            .field("domain", &(self.start, self.end))
            .field("analytic_velocity", &self.velocity.is_some())
            .finish()
    }
}

impl Curve {
    pub fn new(start: f64, end: f64, position: CurveMap) -> Self {
        Self { start, end, position, velocity: None }
    }

    pub fn with_velocity(mut self, velocity: CurveMap) -> Self {
        self.velocity = Some(velocity);
        self
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn position(&self, t: f64) -> Point {
        Point((self.position)(t))
    }

    /// Analytic velocity when available, otherwise a central difference.
    pub fn velocity(&self, t: f64) -> Vector {
        match &self.velocity {
            Some(v) => v(t),
            None => ((self.position)(t + H_CURVE) - (self.position)(t - H_CURVE)) / (2.0 * H_CURVE),
        }
    }

    /// The same trace traversed backwards: β(τ) = α(start + end − τ).
    pub fn reversed(&self) -> Curve {
        let (a, b) = (self.start, self.end);
        let pos = self.position.clone();
        let reversed = Curve::new(a, b, Arc::new(move |t| pos(a + b - t)));
        match &self.velocity {
            Some(vel) => {
                let vel = vel.clone();
                reversed.with_velocity(Arc::new(move |t| -vel(a + b - t)))
            }
            None => reversed,
        }
    }
}

/// t ↦ p + t(q − p) on [0, 1].
pub fn curve_line(space: &FlatPseudoSpace, p: &Point, q: &Point) -> Result<Curve> {
    let n = space.dimension();
    if p.coords().len() != n || q.coords().len() != n {
        return Err(Error::Usage("curve_line: point dimension does not match the space".into()));
    }
    let p0 = p.coords().clone();
    let dir = q.coords() - p.coords();
    let dir2 = dir.clone();
    Ok(Curve::new(0.0, 1.0, Arc::new(move |t| &p0 + &dir * t)).with_velocity(Arc::new(move |_| dir2.clone())))
}

/// The circle of H²(1) at height z₀, with the angle moving affinely from
/// θ₀ to θ₁ as t runs over [0, 1].
pub fn curve_on_circle(z0: f64, theta0: f64, theta1: f64) -> Result<Curve> {
    if !(z0 > 1.0) {
        return Err(Error::Domain(format!("circle height must exceed 1, got {z0}")));
    }
    let r = (z0 * z0 - 1.0).sqrt();
    let dtheta = theta1 - theta0;
    let position = move |t: f64| {
        let th = theta0 + t * dtheta;
        Vector::from_vec(vec![r * th.cos(), r * th.sin(), z0])
    };
    let velocity = move |t: f64| {
        let th = theta0 + t * dtheta;
        Vector::from_vec(vec![-r * dtheta * th.sin(), r * dtheta * th.cos(), 0.0])
    };
    Ok(Curve::new(0.0, 1.0, Arc::new(position)).with_velocity(Arc::new(velocity)))
}

/// The geodesic t ↦ (cos φ sinh t, sin φ sinh t, cosh t) of H²(1) through the apex.
pub fn curve_meridian(phi: f64, t_max: f64) -> Curve {
    let (s, c) = phi.sin_cos();
    Curve::new(
        0.0,
        t_max,
        Arc::new(move |t: f64| Vector::from_vec(vec![c * t.sinh(), s * t.sinh(), t.cosh()])),
    )
    .with_velocity(Arc::new(move |t: f64| Vector::from_vec(vec![c * t.cosh(), s * t.cosh(), t.sinh()])))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransportOptions {
    pub initial_step: f64,
    pub tolerance: f64,
    pub max_refinements: u32,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { initial_step: 1e-3, tolerance: 1e-8, max_refinements: 12 }
    }
}

#[derive(Debug, Clone)]
pub struct TransportResult {
    pub vector: TangentVector,
    /// |g(Z,Z) at the end − g(Z,Z) at the start|.
    pub g_drift: f64,
    pub steps_used: usize,
}

/// Transported vectors of one accepted run, plus the samples of the path
/// when a trace was requested.
#[derive(Debug, Clone)]
pub struct TransportBundle {
    pub vectors: Vec<TangentVector>,
    pub g_drift: Vec<f64>,
    pub steps_used: usize,
    pub trace: Vec<(f64, Vec<Vector>)>,
}

pub fn transport(m: &Manifold, curve: &Curve, v: &TangentVector, t0: f64, t1: f64, step: f64) -> Result<TransportResult> {
    let opts = TransportOptions { initial_step: step, ..TransportOptions::default() };
    transport_with(m, curve, v, t0, t1, &opts)
}

pub fn transport_with(
    m: &Manifold,
    curve: &Curve,
    v: &TangentVector,
    t0: f64,
    t1: f64,
    opts: &TransportOptions,
) -> Result<TransportResult> {
    let mut bundle = transport_many(m, curve, std::slice::from_ref(v), t0, t1, opts, false)?;
    Ok(TransportResult {
        vector: bundle.vectors.pop().expect("one vector in, one out"),
        g_drift: bundle.g_drift[0],
        steps_used: bundle.steps_used,
    })
}

/// Transports several vectors over the same steps, which is what makes the
/// result linear in the inputs.
pub fn transport_many(
    m: &Manifold,
    curve: &Curve,
    vs: &[TangentVector],
    t0: f64,
    t1: f64,
    opts: &TransportOptions,
    record_trace: bool,
) -> Result<TransportBundle> {
    if !(opts.initial_step > 0.0) || !(opts.tolerance > 0.0) {
        return Err(Error::Usage("transport step and tolerance must be positive".into()));
    }
    let start = curve.position(t0);
    m.check_point(start.coords()).map_err(|e| Error::Integration(format!("curve start: {e}")))?;
    for v in vs {
        if !v.base.same_as(&start) {
            return Err(Error::Usage("transport: vector is not attached at the curve start".into()));
        }
        if v.components.len() != m.ambient_dim() {
            return Err(Error::Usage("transport: dimension mismatch".into()));
        }
    }
    let end = curve.position(t1);

    let h = match m {
        Manifold::Flat(_) => {
            m.check_point(end.coords()).map_err(|e| Error::Integration(format!("curve end: {e}")))?;
            let trace = if record_trace {
                vec![(t0, vs.iter().map(|v| v.components.clone()).collect()), (t1, vs.iter().map(|v| v.components.clone()).collect())]
            } else {
                Vec::new()
            };
            return Ok(TransportBundle {
                vectors: vs.iter().map(|v| TangentVector::new_unchecked(end.clone(), v.components.clone())).collect(),
                g_drift: vec![0.0; vs.len()],
                steps_used: 0,
                trace,
            });
        }
        Manifold::Hypersurface(h) => h,
    };

    let initial: Vec<Vector> = vs.iter().map(|v| v.components.clone()).collect();
    let g0: Vec<f64> = initial.iter().map(|z| m.inner(z, z)).collect();
    let drift = |zs: &[Vector]| -> Vec<f64> { zs.iter().zip(&g0).map(|(z, g)| (m.inner(z, z) - g).abs()).collect() };
    let max_of = |d: &[f64]| d.iter().copied().fold(0.0, f64::max);

    let mut step = opts.initial_step;
    let mut prev = integrate(m, h, curve, &initial, t0, t1, step, record_trace)?;
    let mut prev_drift = drift(&prev.0);
    for _ in 0..opts.max_refinements {
        step /= 2.0;
        let next = integrate(m, h, curve, &initial, t0, t1, step, record_trace)?;
        let next_drift = drift(&next.0);
        let (a, b) = (max_of(&prev_drift), max_of(&next_drift));
        if (a - b).abs() < 0.1 * opts.tolerance && b <= opts.tolerance {
            return Ok(TransportBundle {
                vectors: next.0.into_iter().map(|z| TangentVector::new_unchecked(end.clone(), z)).collect(),
                g_drift: next_drift,
                steps_used: next.1,
                trace: next.2,
            });
        }
        prev = next;
        prev_drift = next_drift;
    }
    let _ = prev;
    Err(Error::Tolerance {
        what: "parallel transport metric drift".into(),
        achieved: max_of(&prev_drift),
        required: opts.tolerance,
    })
}

type Integration = (Vec<Vector>, usize, Vec<(f64, Vec<Vector>)>);

#[allow(clippy::too_many_arguments)]
fn integrate(
    m: &Manifold,
    h: &crate::geometry::Hypersurface,
    curve: &Curve,
    initial: &[Vector],
    t0: f64,
    t1: f64,
    max_step: f64,
    record_trace: bool,
) -> Result<Integration> {
    let span = t1 - t0;
    let steps = if span == 0.0 { 0 } else { (span.abs() / max_step).ceil().max(1.0) as usize };
    let mut zs: Vec<Vector> = initial.to_vec();
    let mut trace = Vec::new();
    if record_trace {
        trace.push((t0, zs.clone()));
    }
    if steps == 0 {
        return Ok((zs, 0, trace));
    }
    let dt = span / steps as f64;
    let s = h.normal_sign();

    // (ν, ν') at a curve parameter.
    let frame = |t: f64| -> Result<(Vector, Vector)> {
        let p = curve.position(t);
        if m.membership_residual(p.coords()) > TOL_SURFACE || !h.in_domain(p.coords()) {
            return Err(Error::Integration(format!(
                "curve left {} at t = {t} (point {:?})",
                h.name(),
                p.coords().as_slice()
            )));
        }
        let nu = h.normal(p.coords())?;
        let dnu = h.normal_derivative(p.coords(), &curve.velocity(t))?;
        Ok((nu, dnu))
    };
    let rhs = |z: &Vector, (nu, dnu): &(Vector, Vector)| -> Vector { nu * (-s * m.inner(z, dnu)) };

    let mut t = t0;
    let mut f_start = frame(t)?;
    for k in 0..steps {
        let t_next = if k + 1 == steps { t1 } else { t0 + dt * (k + 1) as f64 };
        let f_mid = frame(t + 0.5 * dt)?;
        let f_end = frame(t_next)?;
        for z in zs.iter_mut() {
            let k1 = rhs(z, &f_start);
            let k2 = rhs(&(&*z + &k1 * (0.5 * dt)), &f_mid);
            let k3 = rhs(&(&*z + &k2 * (0.5 * dt)), &f_mid);
            let k4 = rhs(&(&*z + &k3 * dt), &f_end);
            *z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            let nu = &f_end.0;
            let correction = m.inner(z, nu) * s;
            *z -= nu * correction;
        }
        t = t_next;
        f_start = f_end;
        if record_trace {
            trace.push((t, zs.clone()));
        }
    }
    Ok((zs, steps, trace))
}

/// Signed rotation angle (in the oriented tangent plane at the start of a
/// closed loop on a 2-dimensional Riemannian hypersurface) carrying `from`
/// into `to`.
pub fn rotation_angle(m: &Manifold, from: &TangentVector, to: &TangentVector) -> Result<f64> {
    if m.dim() != 2 {
        return Err(Error::Usage("rotation_angle needs a 2-dimensional manifold".into()));
    }
    let nu = m
        .normal(from.base.coords())?
        .ok_or_else(|| Error::Usage("rotation_angle needs a hypersurface".into()))?;
    let e1 = &from.components / m.inner(&from.components, &from.components).abs().sqrt();
    // Second axis: Euclidean cross product with the raised normal, projected.
    let n3 = nu.fixed_rows::<3>(0).into_owned();
    let c = e1.fixed_rows::<3>(0).cross(&n3);
    let e2 = m.project(from.base.coords(), &Vector::from_column_slice(c.as_slice()))?;
    let e2 = &e2 / m.inner(&e2, &e2).abs().sqrt();
    let e2 = {
        let corr = m.inner(&e2, &e1);
        let e = &e2 - &e1 * corr;
        &e / m.inner(&e, &e).abs().sqrt()
    };
    Ok(m.inner(&to.components, &e2).atan2(m.inner(&to.components, &e1)))
}
