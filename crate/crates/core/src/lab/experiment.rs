//! Monte Carlo deviation experiments.
//!
//! Replica `i` at the `g`-th sample length draws from the generator seeded
//! with `replica_seed(base_seed, g·R + i)`, so every draw in an experiment
//! is independent and reproducible in isolation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::estimators::hitting::{default_horizon, PatternAutomaton};
use crate::estimators::{conditional_entropy, plugin_rate, ScheduleParams};
use crate::gibbs::GibbsModel;
use crate::math;
use crate::rng;
use crate::shift::Word;

/// Tail experiments need at least this many replicas.
pub const MIN_REPLICAS: usize = 100;

/// Fraction of saturated replicas above which a grid point is unusable.
pub const MAX_SATURATION: f64 = 0.01;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum EstimatorKind {
    /// `Ĥ_k / k`.
    PluginRate,
    /// `ĥ_k = Ĥ_k − Ĥ_{k−1}`.
    Conditional,
    /// `(1/n) ln W_n(x, y)` with `x`, `y` independent.
    HittingRate,
    /// `(1/n) Σ φ(σ^j x)` over the complete windows.
    Birkhoff,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::PluginRate => "plugin-rate",
            EstimatorKind::Conditional => "conditional",
            EstimatorKind::HittingRate => "hitting-rate",
            EstimatorKind::Birkhoff => "birkhoff",
        }
    }

    pub fn needs_block_length(self) -> bool {
        matches!(self, EstimatorKind::PluginRate | EstimatorKind::Conditional)
    }

    /// Tails reported by default: one-sided pair for hitting times,
    /// two-sided otherwise.
    pub fn default_sides(self) -> Vec<TailSide> {
        match self {
            EstimatorKind::HittingRate => vec![TailSide::Upper, TailSide::Lower],
            _ => vec![TailSide::TwoSided],
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            EstimatorKind::PluginRate,
            EstimatorKind::Conditional,
            EstimatorKind::HittingRate,
            EstimatorKind::Birkhoff,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| invalid!("unknown estimator {s:?}"))
    }
}

/// What deviations are measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Center {
    /// Mean of the replica values at the same `n`.
    EmpiricalMean,
    /// The exact limit: `h(μ)` for entropy estimators, `∫φ dμ` for the
    /// Birkhoff average.
    ExactEntropy,
}

impl FromStr for Center {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "empirical-mean" => Ok(Center::EmpiricalMean),
            "exact-entropy" => Ok(Center::ExactEntropy),
            _ => Err(invalid!("unknown center {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TailSide {
    /// `|v − c| ≥ t`.
    TwoSided,
    /// `v − c > t`.
    Upper,
    /// `v − c < −t`.
    Lower,
}

impl TailSide {
    pub fn name(self) -> &'static str {
        match self {
            TailSide::TwoSided => "two-sided",
            TailSide::Upper => "upper",
            TailSide::Lower => "lower",
        }
    }

    fn exceeds(self, dev: f64, t: f64) -> bool {
        match self {
            TailSide::TwoSided => dev.abs() >= t,
            TailSide::Upper => dev > t,
            TailSide::Lower => dev < -t,
        }
    }

    /// Verdict for a censored value known only to exceed `floor`.
    fn censored(self, floor: f64, center: f64, t: f64) -> Option<bool> {
        let up = floor >= center + t;
        match self {
            TailSide::TwoSided | TailSide::Upper if up => Some(true),
            TailSide::Lower if floor >= center - t => Some(false),
            _ => None,
        }
    }
}

impl fmt::Display for TailSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TailSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [TailSide::TwoSided, TailSide::Upper, TailSide::Lower]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid!("unknown tail side {s:?}"))
    }
}

/// How `k` is chosen at each `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BlockLength {
    Fixed(usize),
    Schedule(ScheduleParams),
}

impl BlockLength {
    pub fn at(&self, n: usize) -> Result<usize> {
        match self {
            BlockLength::Fixed(k) => Ok(*k),
            BlockLength::Schedule(p) => p.k(n),
        }
    }
}

/// A tail or variance experiment over a grid of sample lengths.
#[derive(Debug, Clone)]
pub struct DeviationExperiment<'m> {
    pub model: &'m GibbsModel,
    pub estimator: EstimatorKind,
    /// Required by the block-entropy estimators.
    pub block_length: Option<BlockLength>,
    pub n_grid: Vec<usize>,
    pub t_grid: Vec<f64>,
    pub replicas: usize,
    pub base_seed: u64,
    pub center: Center,
    /// Hitting-time horizon; defaults to `min(e^{n(h+3)}, 10⁹)`.
    pub horizon: Option<u64>,
    /// Defaults to [`EstimatorKind::default_sides`].
    pub sides: Option<Vec<TailSide>>,
}

impl<'m> DeviationExperiment<'m> {
    pub fn new(model: &'m GibbsModel, estimator: EstimatorKind) -> Self {
        Self {
            model,
            estimator,
            block_length: None,
            n_grid: Vec::new(),
            t_grid: Vec::new(),
            replicas: MIN_REPLICAS,
            base_seed: 0,
            center: Center::EmpiricalMean,
            horizon: None,
            sides: None,
        }
    }

    pub fn sides(&self) -> Vec<TailSide> {
        self.sides.clone().unwrap_or_else(|| self.estimator.default_sides())
    }

    fn validate(&self, tails: bool) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(invalid!("n_grid is empty"));
        }
        let min_n = if self.estimator == EstimatorKind::HittingRate { 1 } else { 2 };
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < min_n) {
            return Err(invalid!("sample length {n} is too small"));
        }
        if self.replicas < MIN_REPLICAS {
            return Err(invalid!("need at least {MIN_REPLICAS} replicas, got {}", self.replicas));
        }
        if self.estimator.needs_block_length() && self.block_length.is_none() {
            return Err(invalid!("{} needs a block length or schedule", self.estimator));
        }
        if tails {
            if self.t_grid.is_empty() {
                return Err(invalid!("t_grid is empty"));
            }
            if !self.t_grid.iter().all(|t| *t > 0.0 && t.is_finite()) {
                return Err(invalid!("t_grid must be strictly positive"));
            }
            if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid!("t_grid must be strictly increasing"));
            }
            if matches!(self.sides, Some(ref s) if s.is_empty()) {
                return Err(invalid!("no tail sides requested"));
            }
        }
        if self.horizon == Some(0) {
            return Err(invalid!("horizon must be at least 1"));
        }
        Ok(())
    }

    /// The exact value the estimator converges to.
    pub fn exact_center(&self) -> Result<f64> {
        match self.estimator {
            EstimatorKind::Birkhoff => Ok(self.model.potential_integral()),
            _ => self.model.exact_entropy(),
        }
    }

    fn horizon_for(&self, n: usize, h: f64) -> u64 {
        self.horizon.unwrap_or_else(|| default_horizon(n, h))
    }

    /// Run all replicas at the `g`-th grid length.
    pub fn run_batch(&self, g: usize) -> Result<ReplicaBatch> {
        let n = *self.n_grid.get(g).ok_or_else(|| invalid!("grid index {g} out of range"))?;
        let k = match (&self.block_length, self.estimator.needs_block_length()) {
            (Some(b), true) => Some(b.at(n)?),
            _ => None,
        };
        if let Some(k) = k {
            if k == 0 || k > n {
                return Err(invalid!("block length {k} out of range for n = {n}"));
            }
        }
        let h = self.model.exact_entropy()?;
        let horizon = self.horizon_for(n, h);
        let mut values = Vec::with_capacity(self.replicas);
        for i in 0..self.replicas {
            let mut rng = rng::from_seed(rng::replica_seed(self.base_seed, g * self.replicas + i));
            let x = self.model.sample_path_with(n, &mut rng)?;
            let v = match self.estimator {
                EstimatorKind::PluginRate => Some(plugin_rate(&x, k.expect("k"))?),
                EstimatorKind::Conditional => Some(conditional_entropy(&x, k.expect("k"))?),
                EstimatorKind::Birkhoff => Some(self.model.potential().birkhoff_average(&x)?),
                EstimatorKind::HittingRate => {
                    let w = Word::new(x.alphabet(), x.symbols().to_vec())?;
                    let mut y = self.model.sampler(&mut rng);
                    PatternAutomaton::new(&w)
                        .first_hit(|| y.next_symbol(), horizon)
                        .value()
                        .map(|v| math::ln(v as f64) / n as f64)
                }
            };
            values.push(v);
        }
        let horizon = (self.estimator == EstimatorKind::HittingRate).then_some(horizon);
        Ok(ReplicaBatch { n, k, horizon, values })
    }

    /// Every batch, in grid order.
    pub fn run_batches(&self) -> Result<Vec<ReplicaBatch>> {
        self.validate(false)?;
        (0..self.n_grid.len()).map(|g| self.run_batch(g)).collect()
    }

    /// Both tails and variances from a single pass over the replicas.
    pub fn run(&self) -> Result<ExperimentOutcome> {
        self.validate(true)?;
        let exact = self.exact_center()?;
        let sides = self.sides();
        let mut batches = Vec::with_capacity(self.n_grid.len());
        let mut tails = Vec::new();
        for g in 0..self.n_grid.len() {
            let b = self.run_batch(g)?;
            let center = match self.center {
                Center::ExactEntropy => exact,
                Center::EmpiricalMean => b.mean(),
            };
            for &side in &sides {
                for &t in &self.t_grid {
                    tails.push(b.tail(side, t, center));
                }
            }
            batches.push(BatchSummary::of(&b, center));
        }
        Ok(ExperimentOutcome { exact, batches, tails })
    }
}

/// Estimator values of all replicas at one sample length.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaBatch {
    pub n: usize,
    pub k: Option<usize>,
    /// Set for hitting-rate batches.
    pub horizon: Option<u64>,
    /// `None` marks a saturated hitting time.
    pub values: Vec<Option<f64>>,
}

impl ReplicaBatch {
    pub fn finite(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }

    pub fn saturated(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn saturation_rate(&self) -> f64 {
        self.saturated() as f64 / self.values.len() as f64
    }

    pub fn usable(&self) -> bool {
        self.saturation_rate() <= MAX_SATURATION
    }

    /// Mean over non-saturated replicas.
    pub fn mean(&self) -> f64 {
        let v: Vec<f64> = self.finite().collect();
        math::mean_var(&v).0
    }

    /// Unbiased sample variance over non-saturated replicas.
    pub fn variance(&self) -> f64 {
        let v: Vec<f64> = self.finite().collect();
        math::mean_var(&v).1
    }

    /// Empirical tail at threshold `t` around `center`. A saturated value is
    /// only known to exceed `ln(horizon)/n`; it is counted when that decides
    /// the event and dropped from the denominator otherwise.
    pub fn tail(&self, side: TailSide, t: f64, center: f64) -> TailEstimate {
        let floor = self.horizon.map(|h| math::ln(h as f64) / self.n as f64).unwrap_or(f64::INFINITY);
        let mut hits = 0u64;
        let mut trials = 0u64;
        let mut undecided = 0u64;
        for v in &self.values {
            let verdict = match v {
                Some(v) => Some(side.exceeds(v - center, t)),
                None => side.censored(floor, center, t),
            };
            match verdict {
                Some(e) => {
                    trials += 1;
                    hits += e as u64;
                }
                None => undecided += 1,
            }
        }
        let mut est = TailEstimate::from_counts(self.n, t, side, hits, trials);
        est.k = self.k;
        est.saturated = self.saturated() as u64;
        est.undecided = undecided;
        est.usable = self.usable() && trials > 0;
        est
    }
}

/// One row of a tail table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TailEstimate {
    pub n: usize,
    pub k: Option<usize>,
    pub t: f64,
    pub side: TailSide,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub exceedances: u64,
    pub trials: u64,
    pub saturated: u64,
    pub undecided: u64,
    pub usable: bool,
}

impl TailEstimate {
    pub fn from_counts(n: usize, t: f64, side: TailSide, hits: u64, trials: u64) -> Self {
        let p_hat = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let (ci_low, ci_high) = wilson_interval(hits as f64, trials as f64);
        Self {
            n,
            k: None,
            t,
            side,
            p_hat,
            ci_low,
            ci_high,
            exceedances: hits,
            trials,
            saturated: 0,
            undecided: 0,
            usable: trials > 0,
        }
    }

    /// A row for a known probability, as if observed over `trials` draws.
    pub fn from_probability(n: usize, t: f64, side: TailSide, p: f64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(p * trials as f64, trials as f64);
        Self {
            n,
            k: None,
            t,
            side,
            p_hat: p,
            ci_low,
            ci_high,
            exceedances: math::floor(p * trials as f64 + 0.5) as u64,
            trials,
            saturated: 0,
            undecided: 0,
            usable: true,
        }
    }

    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

/// 95% Wilson score interval for `hits` successes in `trials`.
pub fn wilson_interval(hits: f64, trials: f64) -> (f64, f64) {
    if trials <= 0.0 {
        return (0.0, 1.0);
    }
    let p = hits / trials;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / trials;
    let mid = (p + z2 / (2.0 * trials)) / denom;
    let half = Z95 / denom * math::sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials));
    let lo = if hits <= 0.0 { 0.0 } else { (mid - half).clamp(0.0, p) };
    let hi = if hits >= trials { 1.0 } else { (mid + half).clamp(p, 1.0) };
    (lo, hi)
}

/// Per-`n` moments of an experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BatchSummary {
    pub n: usize,
    pub k: Option<usize>,
    pub center: f64,
    pub mean: f64,
    pub variance: f64,
    pub replicas: usize,
    pub saturated: usize,
    pub horizon: Option<u64>,
    pub usable: bool,
}

impl BatchSummary {
    pub fn of(b: &ReplicaBatch, center: f64) -> Self {
        Self {
            n: b.n,
            k: b.k,
            center,
            mean: b.mean(),
            variance: b.variance(),
            replicas: b.values.len(),
            saturated: b.saturated(),
            horizon: b.horizon,
            usable: b.usable(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExperimentOutcome {
    /// The exact limit of the estimator.
    pub exact: f64,
    pub batches: Vec<BatchSummary>,
    /// Grid order: `n`, then side, then `t`.
    pub tails: Vec<TailEstimate>,
}

/// Empirical tail probabilities on the experiment's grid.
pub fn run_tail_experiment(e: &DeviationExperiment<'_>) -> Result<Vec<TailEstimate>> {
    Ok(e.run()?.tails)
}

/// `n ↦` unbiased sample variance of the estimator.
pub fn estimate_variance(e: &DeviationExperiment<'_>) -> Result<Vec<(usize, f64)>> {
    Ok(e.run_batches()?.iter().map(|b| (b.n, b.variance())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::Potential;
    use crate::shift::{Alphabet, MetricParams};

    fn q_chain() -> GibbsModel {
        GibbsModel::build(
            Potential::from_transition_matrix(&[vec![0.9, 0.1], vec![0.2, 0.8]], MetricParams::default()).unwrap(),
        )
        .unwrap()
    }

    fn constant_model() -> GibbsModel {
        GibbsModel::build(Potential::uniform(Alphabet::binary(), MetricParams::default()).unwrap()).unwrap()
    }

    #[test]
    fn wilson_brackets_estimate() {
        for (h, n) in [(0.0, 100.0), (1.0, 100.0), (50.0, 100.0), (100.0, 100.0), (3.0, 5000.0)] {
            let (lo, hi) = wilson_interval(h, n);
            let p = h / n;
            assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        }
        let (lo, hi) = wilson_interval(50.0, 100.0);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn birkhoff_on_constant_potential_never_deviates() {
        let m = constant_model();
        let mut e = DeviationExperiment::new(&m, EstimatorKind::Birkhoff);
        e.n_grid = vec![64, 256];
        e.t_grid = vec![1e-9, 1e-3, 0.1];
        e.center = Center::ExactEntropy;
        let out = e.run().unwrap();
        assert!(out.tails.iter().all(|t| t.p_hat == 0.0));
        assert!(out.batches.iter().all(|b| b.variance < 1e-28));
        assert_eq!(estimate_variance(&e).unwrap().len(), 2);
    }

    #[test]
    fn tails_monotone_in_t() {
        let m = q_chain();
        let mut e = DeviationExperiment::new(&m, EstimatorKind::PluginRate);
        e.block_length = Some(BlockLength::Fixed(3));
        e.n_grid = vec![512];
        e.t_grid = (1..=20).map(|i| i as f64 * 0.004).collect();
        e.replicas = 200;
        let tails = run_tail_experiment(&e).unwrap();
        assert!(tails.windows(2).all(|w| w[1].p_hat <= w[0].p_hat));
        assert!(tails[0].p_hat > 0.0);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let m = q_chain();
        let mut e = DeviationExperiment::new(&m, EstimatorKind::Conditional);
        e.block_length = Some(BlockLength::Schedule(ScheduleParams::ornstein_weiss(2).unwrap()));
        e.n_grid = vec![128, 256];
        e.t_grid = vec![0.01, 0.05];
        let a = e.run().unwrap();
        assert_eq!(a, e.run().unwrap());
        assert_eq!(a.batches[1].k, Some(8));
        e.base_seed = 99;
        assert_ne!(a, e.run().unwrap());
    }

    #[test]
    fn hitting_rate_sides_and_saturation() {
        let m = q_chain();
        let mut e = DeviationExperiment::new(&m, EstimatorKind::HittingRate);
        e.n_grid = vec![8];
        e.t_grid = vec![0.1, 0.2];
        e.center = Center::ExactEntropy;
        let out = e.run().unwrap();
        assert_eq!(out.tails.len(), 4);
        assert_eq!(out.tails[0].side, TailSide::Upper);
        assert_eq!(out.tails[2].side, TailSide::Lower);
        assert_eq!(out.batches[0].saturated, 0);

        // A tiny horizon saturates most replicas and the grid point is flagged.
        e.horizon = Some(2);
        let out = e.run().unwrap();
        assert!(out.batches[0].saturated > 1);
        assert!(out.tails.iter().all(|t| !t.usable));
    }

    #[test]
    fn censored_values_decide_upper_tail() {
        let b = ReplicaBatch { n: 10, k: None, horizon: Some(1000), values: vec![None, Some(0.1), Some(0.5)] };
        // ln(1000)/10 ≈ 0.69 ≥ 0.3 + 0.15, so the saturated replica counts.
        let up = b.tail(TailSide::Upper, 0.15, 0.3);
        assert_eq!((up.exceedances, up.trials, up.undecided), (2, 3, 0));
        let lo = b.tail(TailSide::Lower, 0.1, 0.3);
        assert_eq!((lo.exceedances, lo.trials), (1, 3));
        let far = b.tail(TailSide::Upper, 0.5, 0.3);
        assert_eq!((far.trials, far.undecided), (2, 1));
    }

    #[test]
    fn validation() {
        let m = q_chain();
        let mut e = DeviationExperiment::new(&m, EstimatorKind::PluginRate);
        e.n_grid = vec![100];
        e.t_grid = vec![0.1];
        assert!(e.run().is_err(), "missing k");
        e.block_length = Some(BlockLength::Fixed(2));
        e.replicas = 99;
        assert!(e.run().is_err());
        e.replicas = 100;
        e.t_grid = vec![0.2, 0.1];
        assert!(e.run().is_err());
        e.t_grid = vec![0.0, 0.1];
        assert!(e.run().is_err());
    }

    #[test]
    fn names_parse() {
        for k in ["plugin-rate", "conditional", "hitting-rate", "birkhoff"] {
            assert_eq!(k.parse::<EstimatorKind>().unwrap().name(), k);
        }
        assert!("lz".parse::<EstimatorKind>().is_err());
        assert_eq!("exact-entropy".parse::<Center>().unwrap(), Center::ExactEntropy);
        assert_eq!("lower".parse::<TailSide>().unwrap(), TailSide::Lower);
        assert!("both".parse::<TailSide>().is_err());
    }
}
