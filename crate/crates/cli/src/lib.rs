//! Command implementations behind the `pseudohyp` binary.
//!
//! Each `cmd_*` function writes `report.json` plus CSV tables into an output
//! directory and returns an [`Outcome`] carrying the exit status.

pub mod config;
pub mod error;
pub mod report;
pub mod user_system;

use std::fmt::Write as _;
use std::path::Path;

use pseudohyp_core::catalog::{
    attractor_distance, attractor_experiment, build_example, ex3_3_system, ex4_1_system, omega_limit, rotating_field,
    run_bundle, AttractorSet, ExampleName, ExampleRun,
};
use pseudohyp_core::checker::{
    check_splitting, continuity_experiment, FailureWitness, HyperbolicityReport, RejectedCandidate, Verdict,
    TOL_CONTINUITY,
};
use pseudohyp_core::geometry::Hypersurface;
use pseudohyp_core::splitting::{d_subspace, DistanceOptions, Subspace};
use pseudohyp_core::transport::{
    curve_line, curve_meridian, curve_on_circle, rotation_angle, transport_many, Curve,
};
use pseudohyp_core::{Manifold, MetricSignature, Point, TangentVector, Vector};
use serde::Serialize;

pub use config::RunConfig;
pub use error::{CliError, CliResult, Exit};
use report::{
    circle_table, coords_header, growth_table, mesh_table, num, opt, per_point_table, witness_table, write_outputs,
    Table,
};

/// Exit status with a human-readable summary (stdout) or diagnostic (stderr).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub exit: Exit,
    pub message: String,
}

fn finish(res: CliResult<Outcome>) -> Outcome {
    res.unwrap_or_else(|e| Outcome { exit: e.exit(), message: format!("error: {e}") })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub system: String,
    pub field: Option<String>,
    pub example: Option<ExampleName>,
    pub distribution: Option<String>,
    pub expected: Option<Verdict>,
    pub observed: Verdict,
    pub matches: Option<bool>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub stable_factor: Option<f64>,
    pub unstable_factor: Option<f64>,
    pub horizon: Option<usize>,
    pub closure_residual: Option<f64>,
    pub points: usize,
    pub caveats: Vec<String>,
    pub probe_note: Option<String>,
    pub witnesses: Vec<FailureWitness>,
    pub witnesses_total: usize,
    pub eigenvalues: Vec<f64>,
    pub rejected: Vec<RejectedCandidate>,
}

impl CheckSummary {
    fn from_report(r: &HyperbolicityReport, expected: Option<Verdict>) -> Self {
        Self {
            system: r.system.clone(),
            field: Some(r.field.clone()),
            example: None,
            distribution: None,
            expected,
            observed: r.verdict,
            matches: expected.map(|e| e == r.verdict),
            a: r.a,
            b: r.b,
            stable_factor: r.stable_factor,
            unstable_factor: r.unstable_factor,
            horizon: Some(r.horizon),
            closure_residual: Some(r.closure_residual),
            points: r.per_point.len(),
            caveats: r.caveats.clone(),
            probe_note: Some(r.probe_note.clone()),
            witnesses: r.failure_witnesses.clone(),
            witnesses_total: r.witnesses_total,
            eigenvalues: Vec::new(),
            rejected: Vec::new(),
        }
    }

    fn from_run(run: &ExampleRun, expected: Verdict) -> Self {
        let report = example_report(run);
        let mut s = match report {
            Some(r) => Self::from_report(r, Some(expected)),
            None => Self {
                system: run.example.to_string(),
                field: None,
                example: None,
                distribution: None,
                expected: Some(expected),
                observed: run.observed,
                matches: None,
                a: None,
                b: None,
                stable_factor: None,
                unstable_factor: None,
                horizon: None,
                closure_residual: None,
                points: 0,
                caveats: Vec::new(),
                probe_note: None,
                witnesses: Vec::new(),
                witnesses_total: 0,
                eigenvalues: Vec::new(),
                rejected: Vec::new(),
            },
        };
        s.example = Some(run.example);
        s.distribution = Some(run.distribution.clone());
        s.observed = run.observed;
        s.matches = Some(run.observed == expected);
        s.a = run.a;
        s.b = run.b;
        s.stable_factor = run.stable_factor;
        s.unstable_factor = run.unstable_factor;
        s.caveats = run.caveats.clone();
        s.witnesses = run.witnesses.clone();
        s.witnesses_total = s.witnesses_total.max(run.witnesses.len());
        s.rejected = run.rejected.clone();
        s.eigenvalues = run.eigen.as_ref().map(|e| e.eigenvalues.clone()).unwrap_or_default();
        s
    }

    fn exit(&self) -> Exit {
        match (self.matches, self.observed) {
            (Some(false), Verdict::Inconclusive) => Exit::Numeric,
            (Some(false), _) => Exit::Mismatch,
            _ => Exit::Success,
        }
    }

    fn line(&self) -> String {
        let name = self.example.map_or(self.system.clone(), |e| e.to_string());
        format!(
            "{name:<6} {:<12} expected {:<15} observed {:<15} a={:<12} b={:<12} {}",
            self.distribution.as_deref().unwrap_or("-"),
            self.expected.map_or("-", Verdict::as_str),
            self.observed.as_str(),
            short(self.a),
            short(self.b),
            match self.matches {
                Some(true) => "MATCH",
                Some(false) => "MISMATCH",
                None => "",
            }
        )
    }
}

fn short(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.6}"))
}

fn example_report(run: &ExampleRun) -> Option<&HyperbolicityReport> {
    run.report.as_ref().or_else(|| run.eigen.as_ref().and_then(|e| e.report.as_ref()))
}

fn run_example(cfg: &RunConfig, name: ExampleName) -> CliResult<ExampleRun> {
    cfg.validate()?;
    let bundle = build_example(name, &cfg.params.into())?;
    Ok(run_bundle(&bundle, cfg.distribution.as_deref(), &cfg.checker_config())?)
}

fn report_tables(prefix: &str, report: Option<&HyperbolicityReport>, witnesses: &[FailureWitness]) -> Vec<Table> {
    let mut tables = Vec::new();
    if let Some(r) = report {
        tables.push(per_point_table(&format!("{prefix}per_point.csv"), r));
        tables.push(growth_table(&format!("{prefix}growth.csv"), r));
    }
    tables.push(witness_table(&format!("{prefix}witnesses.csv"), witnesses));
    tables
}

/// Checks one built-in example or a user system from the config.
pub fn cmd_check(cfg: &RunConfig, out: &Path) -> Outcome {
    finish(check_inner(cfg, out))
}

fn check_inner(cfg: &RunConfig, out: &Path) -> CliResult<Outcome> {
    cfg.validate()?;
    let (summary, tables) = if let Some(spec) = &cfg.system {
        if cfg.example.is_some() {
            return Err(CliError::Config("give either an example or a [system] section, not both".into()));
        }
        let user = spec.build()?;
        let report = check_splitting(&user.system, &user.invariant_set, &user.field, &cfg.checker_config())?;
        let summary = CheckSummary::from_report(&report, cfg.expected_verdict);
        let tables = report_tables("", Some(&report), &report.failure_witnesses);
        (summary, tables)
    } else {
        let name = cfg
            .example
            .ok_or_else(|| CliError::Config("check needs an example name or a [system] section".into()))?;
        let run = run_example(cfg, name)?;
        let expected = cfg.expected_verdict.unwrap_or(run.expected);
        let summary = CheckSummary::from_run(&run, expected);
        let tables = report_tables("", example_report(&run), &run.witnesses);
        (summary, tables)
    };
    write_outputs(out, "check", cfg, &tables, &summary)?;
    let mut message = summary.line();
    for c in &summary.caveats {
        let _ = write!(message, "\n  caveat: {c}");
    }
    for r in &summary.rejected {
        let _ = write!(message, "\n  rejected {:?}: {}", r.reason, r.detail);
    }
    for w in summary.witnesses.iter().take(3) {
        let _ = write!(message, "\n  witness: {:?} at {:?} along {:?}", w.condition, w.point, w.vector);
    }
    Ok(Outcome { exit: summary.exit(), message })
}

#[derive(Debug, Serialize)]
struct ExamplesResult {
    matches: usize,
    total: usize,
    rows: Vec<CheckSummary>,
}

/// Runs the four built-in examples with their default distributions.
pub fn cmd_examples_all(cfg: &RunConfig, out: &Path) -> Outcome {
    finish(examples_inner(cfg, out))
}

fn examples_inner(cfg: &RunConfig, out: &Path) -> CliResult<Outcome> {
    if cfg.distribution.is_some() || cfg.example.is_some() || cfg.expected_verdict.is_some() {
        return Err(CliError::Config(
            "examples runs every example with its default distribution; use check for a single one".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut tables = vec![mesh_table(), circle_table()];
    for name in ExampleName::ALL {
        let run = run_example(cfg, name)?;
        let summary = CheckSummary::from_run(&run, run.expected);
        tables.extend(report_tables(&format!("{name}_"), example_report(&run), &run.witnesses));
        rows.push(summary);
    }
    let mut summary = Table::new(
        "summary.csv",
        &["example", "distribution", "expected", "observed", "matches", "a", "b", "stable_factor", "unstable_factor"],
    );
    for r in &rows {
        summary.push(vec![
            r.example.map(|e| e.to_string()).unwrap_or_default(),
            r.distribution.clone().unwrap_or_default(),
            r.expected.map(|v| v.as_str().to_string()).unwrap_or_default(),
            r.observed.as_str().into(),
            r.matches.unwrap_or(false).to_string(),
            opt(r.a),
            opt(r.b),
            opt(r.stable_factor),
            opt(r.unstable_factor),
        ]);
    }
    tables.insert(0, summary);
    let matches = rows.iter().filter(|r| r.matches == Some(true)).count();
    let total = rows.len();
    let mut message = String::new();
    for r in &rows {
        let _ = writeln!(message, "{}", r.line());
        for c in &r.caveats {
            let _ = writeln!(message, "  caveat: {c}");
        }
    }
    let _ = write!(message, "{matches}/{total} examples match their expected verdict");
    write_outputs(out, "examples", cfg, &tables, ExamplesResult { matches, total, rows })?;
    Ok(Outcome { exit: if matches == total { Exit::Success } else { Exit::Mismatch }, message })
}

fn build_manifold(spec: &config::ManifoldSpec) -> CliResult<Manifold> {
    Ok(match spec {
        config::ManifoldSpec::Hyperboloid => Manifold::Hypersurface(Hypersurface::hyperboloid()),
        config::ManifoldSpec::Flat { signature } => Manifold::flat(MetricSignature::new(signature.clone())?),
    })
}

fn build_curve(m: &Manifold, spec: &config::CurveSpec) -> CliResult<Curve> {
    let curve = match spec {
        config::CurveSpec::Line { from, to } => match m {
            Manifold::Flat(space) => curve_line(space, &Point::new(from.clone()), &Point::new(to.clone()))?,
            _ => return Err(CliError::Config("line curves need a flat manifold".into())),
        },
        config::CurveSpec::Circle { z0, theta0, theta1 } => curve_on_circle(*z0, *theta0, *theta1)?,
        config::CurveSpec::Meridian { phi, t_max } => curve_meridian(*phi, *t_max),
    };
    let (a, b) = curve.domain();
    for t in [a, b] {
        m.check_point(curve.position(t).coords())?;
    }
    Ok(curve)
}

#[derive(Debug, Serialize)]
struct TransportSummary {
    t0: f64,
    t1: f64,
    steps_used: usize,
    vectors_in: Vec<Vec<f64>>,
    vectors_out: Vec<Vec<f64>>,
    g_in: Vec<f64>,
    g_out: Vec<f64>,
    g_drift: Vec<f64>,
    /// Rotation angle of each vector for closed loops on a surface.
    holonomy_angle: Option<Vec<f64>>,
}

/// Parallel transport of the configured vectors along the configured curve.
pub fn cmd_transport(cfg: &RunConfig, out: &Path) -> Outcome {
    finish(transport_inner(cfg, out))
}

fn transport_inner(cfg: &RunConfig, out: &Path) -> CliResult<Outcome> {
    cfg.validate()?;
    let job = cfg.transport.clone().unwrap_or_default();
    let m = build_manifold(&job.manifold)?;
    let curve = build_curve(&m, &job.curve)?;
    let start = curve.position(job.t0);
    if job.vectors.is_empty() {
        return Err(CliError::Config("transport.vectors is empty".into()));
    }
    let vs = job
        .vectors
        .iter()
        .map(|v| TangentVector::new(&m, start.clone(), Vector::from_column_slice(v)))
        .collect::<pseudohyp_core::Result<Vec<_>>>()?;
    let bundle = transport_many(&m, &curve, &vs, job.t0, job.t1, &job.options, true)?;
    let closed = curve.position(job.t1).distance(&start) < 1e-12;
    let holonomy_angle = if closed && m.dim() == 2 && matches!(m, Manifold::Hypersurface(_)) {
        Some(vs.iter().zip(&bundle.vectors).map(|(a, b)| rotation_angle(&m, a, b)).collect::<Result<Vec<_>, _>>()?)
    } else {
        None
    };
    let dim = m.ambient_dim();
    let mut header = vec!["step".to_string(), "t".into(), "vector".into()];
    header.extend(coords_header("v", dim));
    header.push("g".into());
    let mut trace = Table { name: "transport_trace.csv".into(), header, rows: Vec::new() };
    for (k, (t, vecs)) in bundle.trace.iter().enumerate() {
        for (j, v) in vecs.iter().enumerate() {
            let mut row = vec![k.to_string(), num(*t), j.to_string()];
            row.extend(v.iter().copied().map(num));
            row.push(num(m.inner(v, v)));
            trace.push(row);
        }
    }
    let g = |v: &TangentVector| m.inner(&v.components, &v.components);
    let summary = TransportSummary {
        t0: job.t0,
        t1: job.t1,
        steps_used: bundle.steps_used,
        vectors_in: vs.iter().map(|v| v.components.iter().copied().collect()).collect(),
        vectors_out: bundle.vectors.iter().map(|v| v.components.iter().copied().collect()).collect(),
        g_in: vs.iter().map(g).collect(),
        g_out: bundle.vectors.iter().map(g).collect(),
        g_drift: bundle.g_drift.clone(),
        holonomy_angle,
    };
    let mut message = format!("transported {} vector(s) in {} steps", vs.len(), bundle.steps_used);
    for (i, (v, d)) in summary.vectors_out.iter().zip(&summary.g_drift).enumerate() {
        let _ = write!(message, "\n  [{i}] {v:?}  g_drift={d:e}");
    }
    if let Some(angles) = &summary.holonomy_angle {
        let _ = write!(message, "\n  holonomy angle {angles:?}");
    }
    write_outputs(out, "transport", cfg, &[trace], &summary)?;
    Ok(Outcome { exit: Exit::Success, message })
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DistanceResult {
    Pair {
        value: f64,
        from_first: f64,
        from_second: f64,
        evaluations: u64,
    },
    Rotating {
        non_increasing: bool,
        converged: bool,
        final_stable: f64,
        final_unstable: f64,
        tol_continuity: f64,
    },
}

/// d(E, F) between two subspaces, or the continuity sweep of the rotating field.
pub fn cmd_distance(cfg: &RunConfig, out: &Path) -> Outcome {
    finish(distance_inner(cfg, out))
}

fn distance_inner(cfg: &RunConfig, out: &Path) -> CliResult<Outcome> {
    cfg.validate()?;
    let exec = cfg.checker.execution;
    match cfg.distance.clone().unwrap_or_default() {
        config::DistanceJob::Pair { manifold, curve, first, second, grid } => {
            let m = build_manifold(&manifold)?;
            let curve = build_curve(&m, &curve)?;
            let subspace = |s: &config::SubspaceSpec| {
                Subspace::new(&m, curve.position(s.t), s.basis.iter().map(|v| Vector::from_column_slice(v)).collect())
            };
            let (e, f) = (subspace(&first)?, subspace(&second)?);
            let mut opts = DistanceOptions { execution: exec, ..Default::default() };
            if let Some(g) = grid {
                opts.grid = g.max(2);
            }
            let d = d_subspace(&m, &curve, &e, first.t, &f, second.t, &opts)?;
            let mut t = Table::new(
                "distance.csv",
                &["t_first", "t_second", "value", "from_first", "from_second", "evaluations"],
            );
            t.push(vec![
                num(first.t),
                num(second.t),
                num(d.value),
                num(d.from_first),
                num(d.from_second),
                d.evaluations.to_string(),
            ]);
            let message = format!("d(E, F) = {:e} ({} evaluations)", d.value, d.evaluations);
            let result = DistanceResult::Pair {
                value: d.value,
                from_first: d.from_first,
                from_second: d.from_second,
                evaluations: d.evaluations,
            };
            write_outputs(out, "distance", cfg, &[t], result)?;
            Ok(Outcome { exit: Exit::Success, message })
        }
        config::DistanceJob::Rotating { steps } => {
            if steps == 0 {
                return Err(CliError::Config("distance.steps must be positive".into()));
            }
            let (m, curve, field) = rotating_field();
            let ts: Vec<f64> = (1..=steps).map(|n| 0.5f64.powi(n as i32)).collect();
            let opts = DistanceOptions { execution: exec, ..Default::default() };
            let rep = continuity_experiment(&m, &field, &curve, &ts, &opts, TOL_CONTINUITY)?;
            let mut t = Table::new("continuity.csv", &["n", "t", "d_stable", "d_unstable"]);
            for r in &rep.rows {
                t.push(vec![r.n.to_string(), num(r.t), num(r.d_stable), num(r.d_unstable)]);
            }
            let message = format!(
                "rotating field: final d_stable {:e}, non-increasing {}, converged {}",
                rep.final_stable, rep.non_increasing, rep.converged
            );
            let ok = rep.non_increasing && rep.converged;
            let result = DistanceResult::Rotating {
                non_increasing: rep.non_increasing,
                converged: rep.converged,
                final_stable: rep.final_stable,
                final_unstable: rep.final_unstable,
                tol_continuity: rep.tol_continuity,
            };
            write_outputs(out, "distance", cfg, &[t], result)?;
            Ok(Outcome { exit: if ok { Exit::Success } else { Exit::Mismatch }, message })
        }
    }
}

#[derive(Debug, Serialize)]
struct AttractorSummary {
    example: ExampleName,
    n_transient: usize,
    n_keep: usize,
    starts: usize,
    max_distance: f64,
    tolerance: f64,
    within_tolerance: bool,
}

/// ω-limit clouds of ex3_3 or ex4_1 and their distance to the known attractor.
pub fn cmd_attractor(cfg: &RunConfig, out: &Path) -> Outcome {
    finish(attractor_inner(cfg, out))
}

fn attractor_inner(cfg: &RunConfig, out: &Path) -> CliResult<Outcome> {
    cfg.validate()?;
    let name = cfg.example.unwrap_or(ExampleName::Ex4_1);
    let job = cfg.attractor.clone().unwrap_or_default();
    let mut tables = vec![mesh_table(), circle_table()];
    let (max_distance, starts) = if let Some(start) = &job.start {
        let system = match name {
            ExampleName::Ex3_3 => ex3_3_system(),
            ExampleName::Ex4_1 => ex4_1_system(),
            other => return Err(CliError::Config(format!("{other} has no built-in attractor"))),
        };
        let p = Point::new(start.clone());
        system.manifold().check_point(p.coords())?;
        let cloud = omega_limit(&system, &p, job.n_transient, job.n_keep.max(1))?;
        let set = AttractorSet::for_example(name)?;
        let mut t = Table::new("omega_limit.csv", &["n", "x", "y", "z", "distance"]);
        for (k, q) in cloud.iter().enumerate() {
            let c = q.coords();
            t.push(vec![(job.n_transient + k).to_string(), num(c[0]), num(c[1]), num(c[2]), num(set.distance(q))]);
        }
        tables.push(t);
        (attractor_distance(&set, &cloud)?, 1)
    } else {
        let rep = attractor_experiment(name, job.starts, job.n_transient, job.n_keep, cfg.seed, cfg.checker.execution)?;
        let mut header = vec!["start".to_string()];
        header.extend(coords_header("initial_", 3));
        header.extend(coords_header("last_", 3));
        header.push("distance".into());
        let mut t = Table { name: "starts.csv".into(), header, rows: Vec::new() };
        for r in &rep.rows {
            let mut row = vec![r.start.to_string()];
            row.extend(r.initial.iter().chain(&r.last).copied().map(num));
            row.push(num(r.distance));
            t.push(row);
        }
        tables.push(t);
        (rep.max_distance, job.starts)
    };
    let within = max_distance <= job.tolerance;
    let summary = AttractorSummary {
        example: name,
        n_transient: job.n_transient,
        n_keep: job.n_keep,
        starts,
        max_distance,
        tolerance: job.tolerance,
        within_tolerance: within,
    };
    let message = format!(
        "{name}: {starts} start(s), {} transient steps, max distance to the attractor {max_distance:e}",
        job.n_transient
    );
    write_outputs(out, "attractor", cfg, &tables, &summary)?;
    Ok(Outcome { exit: if within { Exit::Success } else { Exit::Mismatch }, message })
}
