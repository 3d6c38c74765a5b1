use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use pseudohyp_core::catalog::{build_example, rotating_field, ExampleName, ExampleParams};
use pseudohyp_core::checker::{
    check_splitting, continuity_experiment, fit_rates, CheckerConfig, InvariantSetSample, Verdict, TOL_CONTINUITY,
};
use pseudohyp_core::dynamics::{DiscreteSystem, GrowthEntry, GrowthRecord, Sign};
use pseudohyp_core::geometry::{FlatPseudoSpace, Hypersurface};
use pseudohyp_core::splitting::{
    d_point, d_subspace, grassmann_distance, pseudo_orthonormal_frame, DistanceOptions, SplittingField, Subspace,
};
use pseudohyp_core::transport::{curve_line, curve_on_circle, rotation_angle, transport_many, Curve, TransportOptions};
use pseudohyp_core::{Manifold, MetricSignature, Point, TangentVector, Vector};

fn h2() -> Manifold {
    Manifold::Hypersurface(Hypersurface::hyperboloid())
}

/// A smooth curve on H²(1) through the lift of (x, y) ↦ (x, y, √(1+x²+y²)).
fn surface_curve(x0: f64, y0: f64, vx: f64, vy: f64, bend: f64) -> Curve {
    Curve::new(
        0.0,
        1.0,
        Arc::new(move |t: f64| {
            let x = x0 + vx * t;
            let y = y0 + vy * t + bend * t * t;
            Vector::from_vec(vec![x, y, (1.0 + x * x + y * y).sqrt()])
        }),
    )
}

fn tangent_at(m: &Manifold, p: &Point, a: f64, b: f64) -> TangentVector {
    let basis = m.tangent_basis(p.coords()).unwrap();
    TangentVector::new_unchecked(p.clone(), &basis[0] * a + &basis[1] * b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transport_preserves_metric_and_is_linear_and_reversible(
        x0 in -1.5f64..1.5, y0 in -1.5f64..1.5, vx in -1.0f64..1.0, vy in -1.0f64..1.0, bend in -0.5f64..0.5,
        a1 in -2.0f64..2.0, b1 in -2.0f64..2.0, a2 in -2.0f64..2.0, b2 in -2.0f64..2.0,
        c1 in -3.0f64..3.0, c2 in -3.0f64..3.0,
    ) {
        let m = h2();
        let curve = surface_curve(x0, y0, vx, vy, bend);
        let p = curve.position(0.0);
        let u = tangent_at(&m, &p, a1, b1);
        let w = tangent_at(&m, &p, a2, b2);
        let combo = TangentVector::new_unchecked(p.clone(), &u.components * c1 + &w.components * c2);
        let opts = TransportOptions::default();
        let out = transport_many(&m, &curve, &[u.clone(), w.clone(), combo], 0.0, 1.0, &opts, false).unwrap();
        for (v, z) in [&u, &w].iter().zip(&out.vectors) {
            let g0 = m.inner(&v.components, &v.components);
            prop_assert!((m.inner(&z.components, &z.components) - g0).abs() <= 1e-8 * g0.abs().max(1.0));
        }
        let lin = &out.vectors[0].components * c1 + &out.vectors[1].components * c2;
        prop_assert!((&out.vectors[2].components - lin).norm() <= 1e-8 * (1.0 + c1.abs() + c2.abs()));
        let back = transport_many(&m, &curve, &out.vectors[..1], 1.0, 0.0, &opts, false).unwrap();
        prop_assert!((&back.vectors[0].components - &u.components).norm() <= 1e-7 * u.components.norm().max(1.0));
    }
}

/// Closed form of inf over pseudo-unit w ∈ span(frame) of |g(x − w, x − w)|
/// for a pseudo-orthonormal frame with common sign σ.
fn closed_form_inner(m: &Manifold, x: &Vector, frame: &[Vector], sigma: f64) -> f64 {
    let a = m.inner(x, x) + sigma;
    let b: Vec<f64> = frame.iter().map(|e| m.inner(x, e)).collect();
    if frame.len() == 1 {
        (a - 2.0 * b[0]).abs().min((a + 2.0 * b[0]).abs())
    } else {
        let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        (a.abs() - 2.0 * nb).max(0.0)
    }
}

fn space_plus3() -> MetricSignature {
    MetricSignature::new(vec![1, 1, 1, -1]).unwrap()
}

fn constant_curve(dim: usize, sig: MetricSignature) -> Curve {
    let o = Point::new(vec![0.0; dim]);
    curve_line(&FlatPseudoSpace::new(sig), &o, &o).unwrap()
}

fn vec4() -> impl Strategy<Value = Vector> {
    prop::collection::vec(-2.0f64..2.0, 4).prop_map(Vector::from_vec)
}

/// Spacelike vectors of R⁴ with signature (+,+,+,−): small last component.
fn spacelike4() -> impl Strategy<Value = Vector> {
    (prop::collection::vec(-2.0f64..2.0, 3), -0.3f64..0.3)
        .prop_map(|(v, t)| Vector::from_vec(vec![v[0], v[1], v[2], t * (v[0].abs() + v[1].abs() + v[2].abs())]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn d_point_matches_closed_form(p in vec4(), e1 in spacelike4(), e2 in spacelike4(), two in any::<bool>()) {
        let m = Manifold::flat(space_plus3());
        let o = Point::new(vec![0.0; 4]);
        let basis = if two { vec![e1, e2] } else { vec![e1] };
        let Ok(e) = Subspace::new(&m, o.clone(), basis) else { return Ok(()) };
        let Ok(frame) = pseudo_orthonormal_frame(&m, &e) else { return Ok(()) };
        let Some(sigma) = frame.definite_sign() else { return Ok(()) };
        let curve = constant_curve(4, space_plus3());
        let u = TangentVector::new_unchecked(o.clone(), p.clone());
        let got = d_point(&m, &curve, &u, 0.0, &e, 1.0, &DistanceOptions::default()).unwrap();
        let want = closed_form_inner(&m, &p, frame.subspace.basis(), sigma);
        prop_assert!((got - want).abs() <= 1e-6 * want.max(1.0), "got {got}, want {want}");
    }

    #[test]
    fn pseudo_orthonormal_frames_are_orthonormal(a in vec4(), b in vec4()) {
        let m = Manifold::flat(MetricSignature::split4());
        let o = Point::new(vec![0.0; 4]);
        let Ok(e) = Subspace::new(&m, o, vec![a, b]) else { return Ok(()) };
        let Ok(f) = pseudo_orthonormal_frame(&m, &e) else { return Ok(()) };
        let vs = f.subspace.basis();
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((m.inner(&vs[i], &vs[j]).abs() - target).abs() < 1e-8);
            }
        }
        prop_assert!(grassmann_distance(&e, &f.subspace).unwrap() < 1e-7);
    }

    #[test]
    fn grassmann_is_symmetric_and_basis_free(a in vec4(), b in vec4(), c in vec4(), d in vec4(), s in 0.1f64..3.0) {
        let m = Manifold::flat(MetricSignature::split4());
        let o = Point::new(vec![0.0; 4]);
        let (Ok(e), Ok(f)) = (
            Subspace::new(&m, o.clone(), vec![a.clone(), b.clone()]),
            Subspace::new(&m, o.clone(), vec![c, d]),
        ) else { return Ok(()) };
        let d1 = grassmann_distance(&e, &f).unwrap();
        prop_assert!((d1 - grassmann_distance(&f, &e).unwrap()).abs() < 1e-10);
        prop_assert!((0.0..=PI / 2.0 + 1e-12).contains(&d1));
        let Ok(e2) = Subspace::new(&m, o, vec![&a * s + &b, &b * 2.0]) else { return Ok(()) };
        prop_assert!((d1 - grassmann_distance(&e2, &f).unwrap()).abs() < 1e-7);
        prop_assert!(grassmann_distance(&e, &e2).unwrap() < 1e-7);
    }

    #[test]
    fn d_subspace_zero_on_self_and_symmetric(e1 in spacelike4(), e2 in spacelike4(), f1 in spacelike4(), f2 in spacelike4()) {
        let m = Manifold::flat(space_plus3());
        let o = Point::new(vec![0.0; 4]);
        let (Ok(e), Ok(f)) = (Subspace::new(&m, o.clone(), vec![e1, e2]), Subspace::new(&m, o.clone(), vec![f1, f2])) else {
            return Ok(());
        };
        let definite = |s: &Subspace| pseudo_orthonormal_frame(&m, s).ok().and_then(|f| f.definite_sign()).is_some();
        prop_assume!(definite(&e) && definite(&f));
        let curve = constant_curve(4, space_plus3());
        let opts = DistanceOptions::default();
        prop_assert!(d_subspace(&m, &curve, &e, 0.0, &e, 0.0, &opts).unwrap().value <= 1e-9);
        let ef = d_subspace(&m, &curve, &e, 0.0, &f, 0.0, &opts).unwrap().value;
        let fe = d_subspace(&m, &curve, &f, 0.0, &e, 0.0, &opts).unwrap().value;
        prop_assert!((ef - fe).abs() <= 1e-7 * ef.max(1.0));
    }

    #[test]
    fn fit_recovers_geometric_rates(a in 0.1f64..10.0, b in 0.05f64..20.0) {
        let entries = (0..=30)
            .map(|n| GrowthEntry { n, log_abs: a.ln() * f64::from(n > 0) + n as f64 * b.ln(), sign: Sign::Positive })
            .collect();
        // log(r_n/r_0) = log a + n log b for n ≥ 1, 0 at n = 0.
        let rec = GrowthRecord { entries };
        let f = fit_rates(&rec).unwrap();
        let exact: Vec<GrowthEntry> = (0..=30).map(|n| GrowthEntry { n, log_abs: n as f64 * b.ln(), sign: Sign::Positive }).collect();
        let g = fit_rates(&GrowthRecord { entries: exact }).unwrap();
        prop_assert!((g.b_fit / b - 1.0).abs() < 1e-9);
        prop_assert!((g.a_fit - 1.0).abs() < 1e-9);
        prop_assert!(f.residual >= 0.0);
    }

    #[test]
    // Stable rates below 0.6 so the cross-term tail over n ∈ [15, 30] clears tol_cross.
    fn diagonal_systems_give_expected_constants(l1 in 0.2f64..0.6, l2 in 0.2f64..0.6, mu in 1.2f64..5.0, scale in 0.1f64..10.0) {
        let d = [l1, l2, 1.0, mu];
        let m = Manifold::flat(MetricSignature::split4());
        let s = DiscreteSystem::new(
            "diag",
            m.clone(),
            Arc::new(move |p: &Vector| Ok(Vector::from_fn(4, |i, _| p[i] * d[i]))),
            Arc::new(move |p: &Vector| Ok(Vector::from_fn(4, |i, _| p[i] / d[i]))),
        )
        .with_differential(Arc::new(move |_p: &Vector, v: &Vector| Ok(Vector::from_fn(4, |i, _| v[i] * d[i]))));
        let e = |i: usize| Vector::from_fn(4, |r, _| if r == i { 1.0 } else { 0.0 });
        let field = SplittingField::constant(m, vec![e(0) * scale, e(1)], vec![e(3)], vec![Vector::from_vec(vec![1.0, 1.0, 1.0, 1.0])], "eigen");
        let sample = InvariantSetSample::new(vec![Point::new(vec![0.0; 4])], 0.0);
        let rep = check_splitting(&s, &sample, &field, &CheckerConfig::default()).unwrap();
        let expected_b = (l1 * l1).max(l2 * l2).max(1.0 / (mu * mu));
        prop_assert_eq!(rep.verdict, Verdict::Hyperbolic, "{:?}", rep.failure_witnesses.first());
        prop_assert!((rep.b.unwrap() / expected_b - 1.0).abs() < 1e-6);
        prop_assert!(rep.replay());
    }
}

fn loop_angle(z0: f64, step: f64) -> f64 {
    let m = h2();
    let curve = curve_on_circle(z0, 0.0, 2.0 * PI).unwrap();
    let x = TangentVector::new(&m, curve.position(0.0), Vector::from_vec(vec![0.0, 1.0, 0.0])).unwrap();
    let opts = TransportOptions { initial_step: step, ..Default::default() };
    let out = transport_many(&m, &curve, std::slice::from_ref(&x), 0.0, 1.0, &opts, false).unwrap();
    rotation_angle(&m, &x, &out.vectors[0]).unwrap()
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[test]
fn loop_holonomy_converges_to_enclosed_area() {
    for z0 in [1.2, 1.5, 2.5] {
        let area = 2.0 * PI * (z0 - 1.0);
        let (coarse, fine) = (loop_angle(z0, 1e-3), loop_angle(z0, 5e-4));
        let reference = loop_angle(z0, 1e-5);
        assert!(angle_gap(coarse, fine) <= 1e-6, "z0 {z0}");
        assert!(angle_gap(fine, reference) <= 1e-5, "z0 {z0}");
        assert!(angle_gap(reference.abs(), area) <= 1e-6, "z0 {z0}: {reference} vs {area}");
    }
}

/// max over a dense grid of unit v ∈ E of the closed-form inner minimum.
fn dense_grid_distance(m: &Manifold, e: &[Vector], f: &[Vector], points: usize) -> f64 {
    (0..points)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / points as f64;
            let v = &e[0] * phi.cos() + &e[1] * phi.sin();
            closed_form_inner(m, &v, f, 1.0)
        })
        .fold(0.0, f64::max)
}

#[test]
fn rotating_planes_match_dense_grid_and_shrink_to_zero() {
    let m = Manifold::flat(space_plus3());
    let o = Point::new(vec![0.0; 4]);
    let curve = constant_curve(4, space_plus3());
    let e = |i: usize| Vector::from_fn(4, |r, _| if r == i { 1.0 } else { 0.0 });
    let base = vec![e(0), e(1)];
    let f = Subspace::new(&m, o.clone(), base.clone()).unwrap();
    let mut last = f64::INFINITY;
    for k in 0..10 {
        let theta = 0.8 * 0.5f64.powi(k);
        let tilted = vec![&e(0) * theta.cos() + &e(2) * theta.sin(), e(1)];
        let et = Subspace::new(&m, o.clone(), tilted.clone()).unwrap();
        let got = d_subspace(&m, &curve, &et, 0.0, &f, 0.0, &DistanceOptions::default()).unwrap().value;
        let oracle = dense_grid_distance(&m, &tilted, &base, 10_000).max(dense_grid_distance(&m, &base, &tilted, 10_000));
        assert!((got - oracle).abs() <= 1e-6, "theta {theta}: {got} vs {oracle}");
        assert!((got - 2.0 * (1.0 - theta.cos())).abs() <= 1e-9);
        assert!(got < last);
        last = got;
    }
    assert!(last < 1e-5);
}

#[test]
fn rotating_field_is_continuous_with_quadratic_rate() {
    let (m, curve, field) = rotating_field();
    let ts: Vec<f64> = (1..=10).map(|n| 0.5f64.powi(n)).collect();
    let rep = continuity_experiment(&m, &field, &curve, &ts, &DistanceOptions::default(), TOL_CONTINUITY).unwrap();
    assert!(rep.non_increasing);
    assert!(rep.converged);
    assert!(rep.final_stable <= TOL_CONTINUITY);
    for row in &rep.rows {
        let ratio = row.d_stable / (row.t * row.t);
        assert!((0.25..=4.0).contains(&ratio), "t {} ratio {ratio}", row.t);
        assert!(row.d_unstable <= 1e-12);
    }
}

#[test]
fn constant_field_has_zero_continuity_distance() {
    let m = Manifold::flat(MetricSignature::lorentz(3));
    let curve = curve_line(&FlatPseudoSpace::new(MetricSignature::lorentz(3)), &Point::new(vec![0.0; 3]), &Point::new(vec![1.0, 0.5, 0.2])).unwrap();
    let e = |i: usize| Vector::from_fn(3, |r, _| if r == i { 1.0 } else { 0.0 });
    let field = SplittingField::constant(m.clone(), vec![e(0)], vec![e(2)], vec![Vector::from_vec(vec![0.0, 1.0, 1.0])], "constant");
    let ts: Vec<f64> = (1..=10).map(|n| 0.5f64.powi(n)).collect();
    let rep = continuity_experiment(&m, &field, &curve, &ts, &DistanceOptions::default(), TOL_CONTINUITY).unwrap();
    assert!(rep.rows.iter().all(|r| r.d_stable <= 1e-9 && r.d_unstable <= 1e-9));
}

#[test]
fn horseshoe_field_is_continuous_along_a_vertical_segment() {
    let bundle = build_example(ExampleName::Ex3_2, &ExampleParams::default()).unwrap();
    let m = bundle.system.manifold().clone();
    let space = FlatPseudoSpace::new(MetricSignature::lorentz(3));
    let curve = curve_line(&space, &Point::new(vec![0.0, 0.0, -1.0]), &Point::new(vec![0.0, 0.0, 1.0])).unwrap();
    let ts: Vec<f64> = (1..=10).map(|n| 0.5f64.powi(n)).collect();
    let field = bundle.candidate_field().unwrap();
    let rep = continuity_experiment(&m, field, &curve, &ts, &DistanceOptions::default(), TOL_CONTINUITY).unwrap();
    assert!(rep.rows.iter().all(|r| r.d_stable == 0.0 && r.d_unstable == 0.0), "{:?}", rep.rows.first());
}
