//! The TOML run configuration.
//!
//! Every file must carry `schema_version = 1`. All other fields are
//! optional; the command decides which sections it reads.

use std::path::Path;

use pseudohyp_core::catalog::{ExampleName, ExampleParams};
use pseudohyp_core::checker::{CheckerConfig, Constant, Verdict};
use pseudohyp_core::transport::TransportOptions;
use pseudohyp_core::Execution;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::user_system::UserSystemSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<ExampleName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_verdict: Option<Verdict>,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub checker: CheckerSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<UserSystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport: Option<TransportJob>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceJob>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attractor: Option<AttractorJob>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            example: None,
            distribution: None,
            expected_verdict: None,
            params: ParamsSection::default(),
            checker: CheckerSection::default(),
            system: None,
            transport: None,
            distance: None,
            attractor: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub depth: usize,
    pub fiber_points: usize,
    pub circle_points: usize,
}

impl Default for ParamsSection {
    fn default() -> Self {
        let p = ExampleParams::default();
        Self { depth: p.depth, fiber_points: p.fiber_points, circle_points: p.circle_points }
    }
}

impl From<ParamsSection> for ExampleParams {
    fn from(p: ParamsSection) -> Self {
        ExampleParams { depth: p.depth, fiber_points: p.fiber_points, circle_points: p.circle_points }
    }
}

/// Checker settings. `a` and `b` are fitted when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckerSection {
    pub horizon: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub tol_cross: f64,
    pub tol_invariance: f64,
    pub samples_per_subspace: usize,
    pub eps_null: f64,
    pub headroom: f64,
    pub execution: Execution,
}

impl Default for CheckerSection {
    fn default() -> Self {
        let c = CheckerConfig::default();
        Self {
            horizon: c.horizon,
            a: None,
            b: None,
            tol_cross: c.tol_cross,
            tol_invariance: c.tol_invariance,
            samples_per_subspace: c.samples_per_subspace,
            eps_null: c.eps_null,
            headroom: c.headroom,
            execution: c.execution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Hyperboloid,
    Flat { signature: Vec<i8> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    /// Straight segment from `from` to `to` over t ∈ [0, 1]; flat spaces only.
    Line { from: Vec<f64>, to: Vec<f64> },
    /// Circle of H²(1) at height z0, angle θ0 + t(θ1 − θ0).
    Circle { z0: f64, theta0: f64, theta1: f64 },
    /// Geodesic of H²(1) from the apex in direction φ, t ∈ [0, t_max].
    Meridian { phi: f64, t_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportJob {
    pub manifold: ManifoldSpec,
    pub curve: CurveSpec,
    pub vectors: Vec<Vec<f64>>,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "one")]
    pub t1: f64,
    #[serde(default)]
    pub options: TransportOptions,
}

impl Default for TransportJob {
    /// One loop around the circle z = √2 of H²(1).
    fn default() -> Self {
        Self {
            manifold: ManifoldSpec::Hyperboloid,
            curve: CurveSpec::Circle { z0: std::f64::consts::SQRT_2, theta0: 0.0, theta1: 2.0 * std::f64::consts::PI },
            vectors: vec![vec![0.0, 1.0, 0.0]],
            t0: 0.0,
            t1: 1.0,
            options: TransportOptions::default(),
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceSpec {
    pub t: f64,
    pub basis: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistanceJob {
    /// d(E, F) for two explicit subspaces on one curve.
    Pair {
        manifold: ManifoldSpec,
        curve: CurveSpec,
        first: SubspaceSpec,
        second: SubspaceSpec,
        #[serde(default)]
        grid: Option<usize>,
    },
    /// The rotating splitting field of flat R³₁ sampled at t_n = 2⁻ⁿ.
    Rotating {
        #[serde(default = "ten")]
        steps: usize,
    },
}

fn ten() -> usize {
    10
}

impl Default for DistanceJob {
    fn default() -> Self {
        DistanceJob::Rotating { steps: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttractorJob {
    pub starts: usize,
    pub n_transient: usize,
    pub n_keep: usize,
    /// Explicit start point; overrides the random starts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    /// Exit with a mismatch when the final distance exceeds this.
    pub tolerance: f64,
}

impl Default for AttractorJob {
    fn default() -> Self {
        Self { starts: 20, n_transient: 60, n_keep: 10, start: None, tolerance: 1e-6 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        // Check the version before the full parse so old files get a clear message.
        let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        match raw.get("schema_version") {
            None => return Err(CliError::Config("missing mandatory field schema_version".into())),
            Some(toml::Value::Integer(v)) if *v == i64::from(SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(CliError::Config(format!("unsupported schema_version {v}; this tool reads {SCHEMA_VERSION}")))
            }
        }
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!("unsupported schema_version {}", self.schema_version)));
        }
        let c = &self.checker;
        let positive = [
            ("checker.tol_cross", c.tol_cross),
            ("checker.tol_invariance", c.tol_invariance),
            ("checker.eps_null", c.eps_null),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(t) = &self.transport {
            if !(t.options.tolerance > 0.0 && t.options.initial_step > 0.0) {
                return Err(CliError::Config("transport.options tolerance and initial_step must be positive".into()));
            }
        }
        if let Some(a) = &self.attractor {
            if !(a.tolerance > 0.0) {
                return Err(CliError::Config("attractor.tolerance must be positive".into()));
            }
        }
        self.checker_config().validate()?;
        Ok(())
    }

    pub fn checker_config(&self) -> CheckerConfig {
        let c = &self.checker;
        let constant = |v: Option<f64>| v.map_or(Constant::Auto, Constant::Fixed);
        CheckerConfig {
            horizon: c.horizon,
            a: constant(c.a),
            b: constant(c.b),
            tol_cross: c.tol_cross,
            tol_invariance: c.tol_invariance,
            samples_per_subspace: c.samples_per_subspace,
            eps_null: c.eps_null,
            seed: self.seed,
            headroom: c.headroom,
            execution: c.execution,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_version_is_mandatory() {
        let err = RunConfig::from_toml("seed = 3\n").unwrap_err();
        assert!(err.to_string().contains("schema_version"));
        assert!(RunConfig::from_toml("schema_version = 2\n").is_err());
        assert_eq!(RunConfig::from_toml("schema_version = 1\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn full_config_round_trips() {
        let text = r#"
schema_version = 1
seed = 9
example = "ex3_2"
expected_verdict = "hyperbolic"

[params]
depth = 3

[checker]
horizon = 24
b = 0.5

[transport]
vectors = [[0.0, 1.0, 0.0]]
manifold = { kind = "hyperboloid" }
curve = { kind = "meridian", phi = 0.3, t_max = 1.0 }

[distance]
kind = "rotating"
steps = 4

[attractor]
starts = 3
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.example, Some(ExampleName::Ex3_2));
        assert_eq!(cfg.params.depth, 3);
        assert_eq!(cfg.checker_config().b, Constant::Fixed(0.5));
        assert_eq!(cfg.checker_config().a, Constant::Auto);
        assert_eq!(cfg.checker_config().seed, 9);
        assert_eq!(cfg.attractor.as_ref().unwrap().n_transient, 60);
        let back = RunConfig::from_toml(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_tolerances_and_unknown_keys() {
        assert!(RunConfig::from_toml("schema_version = 1\n[checker]\ntol_cross = 0.0\n").is_err());
        assert!(RunConfig::from_toml("schema_version = 1\n[checker]\nhorizon = 2\n").is_err());
        assert!(RunConfig::from_toml("schema_version = 1\ncolour = 1\n").is_err());
    }
}
