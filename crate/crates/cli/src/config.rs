//! Experiment configuration documents.
//!
//! ```json
//! {
//!   "model": "data/q_chain.json",
//!   "estimator": "plugin-rate",
//!   "schedule": {"kind": "main1", "alpha": 0.5},
//!   "n_grid": [4096, 16384],
//!   "t_grid": [0.01, 0.02, 0.03],
//!   "replicas": 1000,
//!   "seed": 7
//! }
//! ```
//!
//! `model` is a path (relative to the config file) or an inline potential.
//! Optional keys: `k` (fixed block length), `center`, `horizon`, `bounds`,
//! `sides`.

use std::path::{Path, PathBuf};

use gibbs_entropy_core::estimators::ScheduleParams;
use gibbs_entropy_core::gibbs::Potential;
use gibbs_entropy_core::lab::{BlockLength, BoundKind, Center, EstimatorKind, TailSide};
use gibbs_entropy_core::Error;
use serde::{Deserialize, Serialize};

use crate::formats::{ParseError, PotentialFile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Path(PathBuf),
    Inline(PotentialFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl ScheduleSpec {
    /// `theta` falls back to the potential's metric parameter.
    pub fn build(&self, potential: &Potential) -> anyhow::Result<ScheduleParams> {
        let theta = self.theta.or(Some(potential.theta()));
        schedule_params(&self.kind, self.alpha, theta, potential.alphabet().size())
    }
}

/// Build a schedule from its command-line name (`main1`, `main2`, `ow`).
pub fn schedule_params(
    kind: &str,
    alpha: Option<f64>,
    theta: Option<f64>,
    alphabet_size: usize,
) -> anyhow::Result<ScheduleParams> {
    let missing = |what: &str| Error::InvalidInput(format!("the {kind} schedule needs {what}"));
    let p = match kind {
        "main1" => ScheduleParams::main1(alpha.ok_or_else(|| missing("alpha"))?, alphabet_size)?,
        "main2" => ScheduleParams::main2(theta.ok_or_else(|| missing("theta"))?, alphabet_size)?,
        "ow" | "ornstein-weiss" => ScheduleParams::ornstein_weiss(alphabet_size)?,
        other => return Err(Error::InvalidInput(format!("unknown schedule {other:?} (main1, main2, ow)")).into()),
    };
    Ok(p)
}

/// An experiment document as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelRef,
    pub estimator: String,
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub k: Option<usize>,
    pub n_grid: Vec<usize>,
    pub t_grid: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    #[serde(default)]
    pub center: Option<String>,
    #[serde(default)]
    pub horizon: Option<u64>,
    #[serde(default)]
    pub bounds: Option<Vec<String>>,
    #[serde(default)]
    pub sides: Option<Vec<String>>,
}

impl ExperimentConfig {
    pub fn parse(text: &str, source_name: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| {
            let mut msg = e.to_string();
            if let Some(i) = msg.find(" at line ") {
                msg.truncate(i);
            }
            ParseError { source_name: source_name.into(), line: Some(e.line()), column: Some(e.column()), message: msg }
        })
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Ok(Self::parse(&text, &path.display().to_string())?)
    }

    /// Load the referenced potential; relative paths are taken from `base`.
    pub fn potential(&self, base: Option<&Path>) -> anyhow::Result<Potential> {
        match &self.model {
            ModelRef::Path(p) => {
                let full = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                crate::formats::load_potential(&full)
            }
            ModelRef::Inline(f) => f.to_potential("inline model"),
        }
    }

    /// Fill defaults and check theorem hypotheses against `potential`.
    pub fn resolve(&self, potential: &Potential) -> anyhow::Result<ResolvedConfig> {
        let estimator: EstimatorKind = self.estimator.parse()?;
        let schedule = self.schedule.as_ref().map(|s| s.build(potential)).transpose()?;
        let block_length = match (self.k, schedule) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidInput("give either \"k\" or \"schedule\", not both".into()).into())
            }
            (Some(k), None) => Some(BlockLength::Fixed(k)),
            (None, Some(s)) => Some(BlockLength::Schedule(s)),
            (None, None) => None,
        };
        if estimator.needs_block_length() && block_length.is_none() {
            return Err(Error::InvalidInput(format!("{estimator} needs \"k\" or \"schedule\"")).into());
        }
        let center = match &self.center {
            Some(c) => c.parse()?,
            None => Center::EmpiricalMean,
        };
        let sides = match &self.sides {
            Some(s) => s.iter().map(|x| x.parse()).collect::<Result<Vec<TailSide>, _>>()?,
            None => estimator.default_sides(),
        };
        let bounds = match &self.bounds {
            Some(b) => b.iter().map(|x| x.parse()).collect::<Result<Vec<BoundKind>, _>>()?,
            None => default_bounds(estimator, schedule.as_ref()),
        };
        for &b in &bounds {
            check_bound(b, estimator, schedule.as_ref())?;
        }
        Ok(ResolvedConfig {
            model: self.model.clone(),
            estimator,
            schedule,
            block_length,
            n_grid: self.n_grid.clone(),
            t_grid: self.t_grid.clone(),
            replicas: self.replicas,
            seed: self.seed,
            center,
            horizon: self.horizon,
            bounds,
            sides,
        })
    }
}

fn default_bounds(estimator: EstimatorKind, schedule: Option<&ScheduleParams>) -> Vec<BoundKind> {
    let sched = schedule.map(|s| s.name());
    match (estimator, sched) {
        (EstimatorKind::PluginRate, Some("main1")) => vec![BoundKind::Main1Tail, BoundKind::Main1Variance],
        (EstimatorKind::Conditional, Some("main2")) => vec![BoundKind::Main2Tail],
        (EstimatorKind::Birkhoff, _) => vec![BoundKind::Phiphi],
        (EstimatorKind::HittingRate, _) => vec![BoundKind::WaitingUpper, BoundKind::WaitingLower],
        _ => Vec::new(),
    }
}

fn check_bound(b: BoundKind, estimator: EstimatorKind, schedule: Option<&ScheduleParams>) -> anyhow::Result<()> {
    let need = match b {
        BoundKind::Main1Tail | BoundKind::Main1Variance => Some("main1"),
        BoundKind::Main2Tail => Some("main2"),
        _ => None,
    };
    if let Some(theorem) = need {
        if schedule.map(|s| s.name()) != Some(theorem) {
            return Err(Error::Hypothesis {
                theorem,
                detail: format!("bound {b} needs the {theorem} schedule"),
            }
            .into());
        }
    }
    if matches!(b, BoundKind::WaitingUpper | BoundKind::WaitingLower) && estimator != EstimatorKind::HittingRate {
        return Err(Error::InvalidInput(format!("bound {b} applies to the hitting-rate estimator only")).into());
    }
    Ok(())
}

/// A fully specified experiment, echoed into every summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub model: ModelRef,
    pub estimator: EstimatorKind,
    pub schedule: Option<ScheduleParams>,
    pub block_length: Option<BlockLength>,
    pub n_grid: Vec<usize>,
    pub t_grid: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub center: Center,
    pub horizon: Option<u64>,
    pub bounds: Vec<BoundKind>,
    pub sides: Vec<TailSide>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use gibbs_entropy_core::{Alphabet, MetricParams};

    fn uniform() -> Potential {
        Potential::uniform(Alphabet::binary(), MetricParams::default()).unwrap()
    }

    fn cfg(extra: &str) -> ExperimentConfig {
        let text = format!(
            r#"{{"model": {{"alphabet": 2, "range": 1, "values": {{"00": 0, "01": 0, "10": 0, "11": 0}}}},
                "n_grid": [1024], "t_grid": [0.1], "replicas": 100, "seed": 1, {extra}}}"#
        );
        ExperimentConfig::parse(&text, "c").unwrap()
    }

    #[test]
    fn defaults_follow_estimator() {
        let c = cfg(r#""estimator": "plugin-rate", "schedule": {"kind": "main1", "alpha": 0.5}"#);
        let r = c.resolve(&c.potential(None).unwrap()).unwrap();
        assert_eq!(r.bounds, vec![BoundKind::Main1Tail, BoundKind::Main1Variance]);
        assert_eq!(r.sides, vec![TailSide::TwoSided]);
        let c = cfg(r#""estimator": "hitting-rate""#);
        let r = c.resolve(&uniform()).unwrap();
        assert_eq!(r.sides, vec![TailSide::Upper, TailSide::Lower]);
    }

    #[test]
    fn main2_hypothesis_names_theorem() {
        let c = cfg(r#""estimator": "conditional", "schedule": {"kind": "main2"}"#);
        let err = c.resolve(&uniform()).unwrap_err();
        assert!(matches!(err.downcast_ref::<Error>(), Some(Error::Hypothesis { theorem: "main2", .. })), "{err}");
        let c = cfg(r#""estimator": "conditional", "schedule": {"kind": "main2", "theta": 0.25}"#);
        assert!(c.resolve(&uniform()).is_ok());
    }

    #[test]
    fn bound_must_match_schedule() {
        let c = cfg(r#""estimator": "plugin-rate", "k": 3, "bounds": ["main1-tail"]"#);
        let err = c.resolve(&uniform()).unwrap_err();
        assert!(matches!(err.downcast_ref::<Error>(), Some(Error::Hypothesis { theorem: "main1", .. })));
    }

    #[test]
    fn rejects_unknown_keys_and_missing_block_length() {
        assert!(ExperimentConfig::parse(r#"{"estimator": "x", "colour": 1}"#, "c").is_err());
        let c = cfg(r#""estimator": "plugin-rate""#);
        assert!(c.resolve(&uniform()).is_err());
    }
}
