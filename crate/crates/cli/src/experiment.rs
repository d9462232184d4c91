//! Running a configured experiment and rendering its CSV and summary.

use gibbs_entropy_core::estimators::ScheduleKind;
use gibbs_entropy_core::gibbs::GibbsModel;
use gibbs_entropy_core::lab::{
    compare_tail_shapes, evaluate_bound, expectation_gap_report, fit_constants, fit_variance_constant, BatchSummary,
    BoundKind, Constants, DeviationExperiment, FitResult, GapReport, Provenance, ShapeComparison, TailEstimate,
    TailSide, VarianceFit,
};
use serde::Serialize;

use crate::config::ResolvedConfig;

/// CSV header of the tail table.
pub const CSV_COLUMNS: [&str; 15] = [
    "n",
    "k",
    "side",
    "t",
    "p_hat",
    "ci_low",
    "ci_high",
    "exceedances",
    "trials",
    "saturated",
    "undecided",
    "usable",
    "estimable",
    "bound_kind",
    "bound",
];

/// Tolerance added to `ci_width` in the domination check.
const DOMINATION_SLACK: f64 = 1e-12;

/// The tail side a bound kind speaks about.
pub fn side_for(kind: BoundKind) -> TailSide {
    match kind {
        BoundKind::WaitingUpper => TailSide::Upper,
        BoundKind::WaitingLower => TailSide::Lower,
        _ => TailSide::TwoSided,
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Attempt<T> {
    Ok(T),
    Failed { error: String },
}

impl<T> Attempt<T> {
    fn from_result<E: std::fmt::Display>(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Attempt::Ok(v),
            Err(e) => Attempt::Failed { error: e.to_string() },
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Attempt::Ok(v) => Some(v),
            Attempt::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitEntry {
    pub kind: BoundKind,
    pub side: TailSide,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeEntry {
    pub side: TailSide,
    pub n: usize,
    #[serde(flatten)]
    pub result: Attempt<ShapeComparison>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Invariant {
    pub name: &'static str,
    pub passed: bool,
    /// `(n, side, t)` of every offending row.
    pub violations: Vec<(usize, TailSide, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnusablePoint {
    pub n: usize,
    pub side: TailSide,
    pub t: f64,
    pub saturated: u64,
    pub trials: u64,
}

/// Everything an experiment produced apart from the CSV rows.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub seed: u64,
    pub config: ResolvedConfig,
    /// Exact limit of the estimator (`h` or `∫φ dμ`).
    pub exact: f64,
    pub batches: Vec<BatchSummary>,
    pub fits: Vec<FitEntry>,
    pub variance_fit: Option<Attempt<VarianceFit>>,
    pub gap: Option<Attempt<GapReport>>,
    /// `−ln p̂` against `t` and `t²`, per side and `n`.
    pub shapes: Vec<ShapeEntry>,
    pub invariants: Vec<Invariant>,
    pub unusable: Vec<UnusablePoint>,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub summary: ExperimentSummary,
    pub tails: Vec<TailEstimate>,
    /// Per tail row, the bound kind and value evaluated at its `(n, t)`.
    pub bounds: Vec<Option<(BoundKind, f64)>>,
}

impl ExperimentRun {
    pub fn csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        for (e, b) in self.tails.iter().zip(&self.bounds) {
            let opt = |v: Option<String>| v.unwrap_or_default();
            w.write_record([
                e.n.to_string(),
                opt(e.k.map(|k| k.to_string())),
                e.side.name().to_string(),
                e.t.to_string(),
                e.p_hat.to_string(),
                e.ci_low.to_string(),
                e.ci_high.to_string(),
                e.exceedances.to_string(),
                e.trials.to_string(),
                e.saturated.to_string(),
                e.undecided.to_string(),
                e.usable.to_string(),
                gibbs_entropy_core::lab::is_estimable(e).to_string(),
                opt(b.map(|(k, _)| k.name().to_string())),
                opt(b.map(|(_, v)| v.to_string())),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn summary_json(&self) -> anyhow::Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)? + "\n")
    }

    /// The fit for `kind`, if it succeeded.
    pub fn fit(&self, kind: BoundKind) -> Option<&FitResult> {
        self.summary.fits.iter().find(|f| f.kind == kind).and_then(|f| f.fit.as_ref())
    }
}

fn main1_alpha(cfg: &ResolvedConfig) -> Option<f64> {
    match cfg.schedule.map(|s| s.kind()) {
        Some(ScheduleKind::Main1 { alpha }) => Some(alpha),
        _ => None,
    }
}

/// Run the experiment described by `cfg` on `model`.
pub fn run_experiment(cfg: &ResolvedConfig, model: &GibbsModel) -> anyhow::Result<ExperimentRun> {
    let mut e = DeviationExperiment::new(model, cfg.estimator);
    e.block_length = cfg.block_length;
    e.n_grid = cfg.n_grid.clone();
    e.t_grid = cfg.t_grid.clone();
    e.replicas = cfg.replicas;
    e.base_seed = cfg.seed;
    e.center = cfg.center;
    e.horizon = cfg.horizon;
    e.sides = Some(cfg.sides.clone());
    let outcome = e.run()?;
    let tails = outcome.tails;

    let gap = if cfg.bounds.contains(&BoundKind::Main2Tail) {
        let s = cfg.schedule.expect("main2-tail is checked against the schedule");
        Some(Attempt::from_result(expectation_gap_report(model, &s, &cfg.n_grid, cfg.replicas, cfg.seed)))
    } else {
        None
    };

    let mut fits = Vec::new();
    let mut variance_fit = None;
    for &kind in &cfg.bounds {
        if kind == BoundKind::Main1Variance {
            let alpha = main1_alpha(cfg).expect("main1-variance is checked against the schedule");
            let vars: Vec<(usize, f64)> = outcome.batches.iter().map(|b| (b.n, b.variance)).collect();
            variance_fit = Some(Attempt::from_result(fit_variance_constant(&vars, alpha)));
            continue;
        }
        let side = side_for(kind);
        let rows: Vec<TailEstimate> = tails.iter().filter(|t| t.side == side).cloned().collect();
        let params = match kind {
            BoundKind::Main1Tail => Ok(Constants::main1(main1_alpha(cfg).expect("checked"))),
            BoundKind::Main2Tail => match (cfg.schedule.map(|s| s.kind()), gap.as_ref().and_then(|g| g.ok())) {
                (Some(ScheduleKind::Main2 { theta }), Some(g)) => {
                    Ok(Constants::main2(theta, model.alphabet().size()).with("c", g.fitted_c, Provenance::Fitted))
                }
                _ => Err("the expectation gap (offset c) could not be computed".to_string()),
            },
            _ => Ok(Constants::new()),
        };
        let result = params.and_then(|p| fit_constants(&rows, kind, &p).map_err(|e| e.to_string()));
        let (fit, error) = match result {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e)),
        };
        fits.push(FitEntry { kind, side, fit, error });
    }

    let bounds: Vec<Option<(BoundKind, f64)>> = tails
        .iter()
        .map(|e| {
            fits.iter()
                .filter(|f| f.side == e.side)
                .find_map(|f| f.fit.as_ref().map(|r| (f.kind, r)))
                .and_then(|(kind, r)| evaluate_bound(kind, e.n, e.t, &r.constants).ok().map(|v| (kind, v)))
        })
        .collect();

    let mut shapes = Vec::new();
    for &side in &cfg.sides {
        for &n in &cfg.n_grid {
            let rows: Vec<TailEstimate> = tails
                .iter()
                .filter(|e| e.side == side && e.n == n && gibbs_entropy_core::lab::is_estimable(e))
                .cloned()
                .collect();
            let result = if rows.len() >= 3 {
                Attempt::from_result(compare_tail_shapes(&rows))
            } else {
                Attempt::Failed { error: format!("{} estimable points, need 3", rows.len()) }
            };
            shapes.push(ShapeEntry { side, n, result });
        }
    }

    let invariants = vec![monotone_invariant(&tails), domination_invariant(&tails, &bounds)];
    let unusable = tails
        .iter()
        .filter(|e| !e.usable)
        .map(|e| UnusablePoint { n: e.n, side: e.side, t: e.t, saturated: e.saturated, trials: e.trials })
        .collect();

    let summary = ExperimentSummary {
        seed: cfg.seed,
        config: cfg.clone(),
        exact: outcome.exact,
        batches: outcome.batches,
        fits,
        variance_fit,
        gap,
        shapes,
        invariants,
        unusable,
    };
    Ok(ExperimentRun { summary, tails, bounds })
}

/// `p̂` nonincreasing in `t` at each `(n, side)` over usable rows.
fn monotone_invariant(tails: &[TailEstimate]) -> Invariant {
    let mut violations = Vec::new();
    for w in tails.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.n == b.n && a.side == b.side && a.usable && b.usable && b.p_hat > a.p_hat {
            violations.push((b.n, b.side, b.t));
        }
    }
    Invariant { name: "tails-monotone-in-t", passed: violations.is_empty(), violations }
}

/// `p̂ ≤ bound + ci_width` wherever a fitted bound exists.
fn domination_invariant(tails: &[TailEstimate], bounds: &[Option<(BoundKind, f64)>]) -> Invariant {
    let violations: Vec<_> = tails
        .iter()
        .zip(bounds)
        .filter_map(|(e, b)| b.map(|(_, v)| (e, v)))
        .filter(|(e, v)| e.usable && e.p_hat > v + e.ci_width() + DOMINATION_SLACK)
        .map(|(e, _)| (e.n, e.side, e.t))
        .collect();
    Invariant { name: "fitted-bound-dominates", passed: violations.is_empty(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn q_chain_run(extra: &str) -> ExperimentRun {
        let text = format!(
            r#"{{"model": {{"alphabet": 2, "transition": [[0.9, 0.1], [0.2, 0.8]]}},
                "replicas": 400, "seed": 5, {extra}}}"#
        );
        let cfg = ExperimentConfig::parse(&text, "c").unwrap();
        let p = cfg.potential(None).unwrap();
        let r = cfg.resolve(&p).unwrap();
        run_experiment(&r, &GibbsModel::build(p).unwrap()).unwrap()
    }

    #[test]
    fn birkhoff_fit_dominates() {
        let t: Vec<String> = (1..=16).map(|i| format!("{}", 0.004 * i as f64)).collect();
        let run = q_chain_run(&format!(r#""estimator": "birkhoff", "n_grid": [2048], "t_grid": [{}]"#, t.join(",")));
        let fit = run.fit(BoundKind::Phiphi).expect("phiphi fit");
        assert!(fit.constants.get("B").unwrap() > 0.0);
        assert!(run.summary.invariants.iter().all(|i| i.passed), "{:?}", run.summary.invariants);
        let csv = run.csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(csv.lines().count(), 17);
        assert!(csv.lines().nth(1).unwrap().contains(",phiphi,"));
    }

    #[test]
    fn hitting_run_has_both_tables() {
        let run = q_chain_run(r#""estimator": "hitting-rate", "n_grid": [10], "t_grid": [0.05, 0.1, 0.2]"#);
        let sides: Vec<TailSide> = run.tails.iter().map(|t| t.side).collect();
        assert_eq!(sides.iter().filter(|s| **s == TailSide::Upper).count(), 3);
        assert_eq!(sides.iter().filter(|s| **s == TailSide::Lower).count(), 3);
        assert_eq!(run.summary.fits.len(), 2);
    }

    #[test]
    fn csv_is_deterministic() {
        let cfg = r#""estimator": "plugin-rate", "k": 3, "n_grid": [2048], "t_grid": [0.005, 0.01]"#;
        assert_eq!(q_chain_run(cfg).csv().unwrap(), q_chain_run(cfg).csv().unwrap());
    }
}
