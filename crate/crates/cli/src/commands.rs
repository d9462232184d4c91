//! Subcommand implementations. Each returns the process exit code on
//! success; errors are mapped by [`crate::exit_code`].

use std::path::{Path, PathBuf};

use anyhow::Context as _;
use gibbs_entropy_core::estimators::{
    conditional_entropy, default_horizon, plugin_rate, PatternAutomaton, ScheduleParams,
};
use gibbs_entropy_core::lab::{exp_law_test, oscillation_oracle, oscillation_sweep, OscillationReport};
use gibbs_entropy_core::{rng, Alphabet, Error, GibbsModel, SymbolSequence, Word};
use serde::Serialize;

use crate::cli::{EstimateArgs, ExperimentArgs, ExplawArgs, ModelArgs, OracleArgs, SampleArgs};
use crate::config::{schedule_params, ExperimentConfig};
use crate::experiment::run_experiment;
use crate::formats::{format_sequence, load_potential, load_sequence};
use crate::{EXIT_OK, EXIT_SATURATED, EXIT_VIOLATION};

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> anyhow::Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"), out)
}

fn build_model(path: &Path) -> anyhow::Result<GibbsModel> {
    Ok(GibbsModel::build(load_potential(path)?)?)
}

#[derive(Serialize)]
struct ModelReport {
    config: ModelConfig,
    alphabet: usize,
    range: usize,
    theta: f64,
    pressure: f64,
    entropy: f64,
    /// `∫φ dμ`.
    potential_integral: f64,
    /// `|φ − P + ln h − ln h∘σ|_θ`.
    normalized_seminorm: f64,
    ratio_report: gibbs_entropy_core::CylinderMeasureReport,
    gibbs_constant: f64,
    eigen_diagnostics: gibbs_entropy_core::gibbs::EigenDiagnostics,
}

#[derive(Serialize)]
struct ModelConfig {
    model: PathBuf,
    depth: usize,
}

pub fn model(a: &ModelArgs) -> anyhow::Result<u8> {
    let m = build_model(&a.model)?;
    let ratio = m.gibbs_ratio_report(a.depth)?;
    let p = m.potential();
    let report = ModelReport {
        config: ModelConfig { model: a.model.clone(), depth: a.depth },
        alphabet: p.alphabet().size(),
        range: p.range(),
        theta: p.theta(),
        pressure: m.pressure(),
        entropy: m.exact_entropy()?,
        potential_integral: m.potential_integral(),
        normalized_seminorm: m.normalized_seminorm(),
        gibbs_constant: ratio.constant(),
        ratio_report: ratio,
        eigen_diagnostics: m.diagnostics(),
    };
    emit_json(&report, a.out.as_deref())?;
    Ok(EXIT_OK)
}

pub fn sample(a: &SampleArgs) -> anyhow::Result<u8> {
    let m = build_model(&a.model)?;
    let x = m.sample_path(a.n, a.seed)?;
    let note = format!("n={} seed={} model={}", a.n, a.seed, a.model.display());
    emit(&format_sequence(&x, &note), a.out.as_deref())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct EstimateConfig {
    sample: Option<PathBuf>,
    model: Option<PathBuf>,
    n: usize,
    k: usize,
    schedule: Option<ScheduleParams>,
    hitting: bool,
    seed: u64,
}

#[derive(Serialize)]
struct EstimatorRecord {
    estimator: &'static str,
    n: usize,
    k: usize,
    value: f64,
    seed: u64,
}

#[derive(Serialize)]
struct HittingRecord {
    estimator: &'static str,
    n: usize,
    /// `W_n`, absent when saturated.
    w: Option<u64>,
    /// `(1/n) ln W_n`, absent when saturated.
    value: Option<f64>,
    horizon: u64,
    saturated: bool,
    seed: u64,
}

#[derive(Serialize)]
struct EstimateReport {
    config: EstimateConfig,
    seed: u64,
    records: Vec<EstimatorRecord>,
    hitting: Option<HittingRecord>,
}

pub fn estimate(a: &EstimateArgs) -> anyhow::Result<u8> {
    let model = a.model.as_deref().map(build_model).transpose()?;
    let mut rng = rng::from_seed(a.seed);
    let x: SymbolSequence = match (&a.sample, &model, a.n) {
        (Some(path), _, _) => {
            let alphabet = a.alphabet.map(Alphabet::new).transpose()?;
            let alphabet = alphabet.or(model.as_ref().map(|m| m.alphabet()));
            load_sequence(path, alphabet)?
        }
        (None, Some(m), Some(n)) => m.sample_path_with(n, &mut rng)?,
        _ => return Err(Error::InvalidInput("give --sample FILE, or --model FILE with --n".into()).into()),
    };
    let n = x.len();
    let schedule = match &a.schedule {
        Some(kind) => {
            let theta = a.theta.or(model.as_ref().map(|m| m.potential().theta()));
            Some(schedule_params(kind, a.alpha, theta, x.alphabet().size())?)
        }
        None => None,
    };
    let k = match (a.k, &schedule) {
        (Some(k), Some(s)) => {
            let limit = s.k(n)?;
            if k > limit {
                return Err(Error::Hypothesis {
                    theorem: s.name(),
                    detail: format!("k = {k} exceeds k(n) = {limit} of the {} schedule at n = {n}", s.name()),
                }
                .into());
            }
            k
        }
        (Some(k), None) => k,
        (None, Some(s)) => s.k(n)?,
        (None, None) => return Err(Error::InvalidInput("give --k or --schedule".into()).into()),
    };
    let records = vec![
        EstimatorRecord { estimator: "plugin-rate", n, k, value: plugin_rate(&x, k)?, seed: a.seed },
        EstimatorRecord { estimator: "conditional", n, k, value: conditional_entropy(&x, k)?, seed: a.seed },
    ];
    let hitting = if a.hitting {
        let m = model.as_ref().ok_or_else(|| Error::InvalidInput("--hitting needs --model".into()))?;
        if m.alphabet() != x.alphabet() {
            return Err(Error::InvalidInput("sample and model alphabets differ".into()).into());
        }
        let horizon = match a.horizon {
            Some(0) => return Err(Error::InvalidInput("horizon must be at least 1".into()).into()),
            Some(h) => h,
            None => default_horizon(n, m.exact_entropy()?),
        };
        let pattern = Word::new(x.alphabet(), x.symbols().to_vec())?;
        let mut y = m.sampler(&mut rng);
        let w = PatternAutomaton::new(&pattern).first_hit(|| y.next_symbol(), horizon).value();
        Some(HittingRecord {
            estimator: "hitting-rate",
            n,
            w,
            value: w.map(|w| (w as f64).ln() / n as f64),
            horizon,
            saturated: w.is_none(),
            seed: a.seed,
        })
    } else {
        None
    };
    let saturated = hitting.as_ref().is_some_and(|h| h.saturated);
    let report = EstimateReport {
        config: EstimateConfig {
            sample: a.sample.clone(),
            model: a.model.clone(),
            n,
            k,
            schedule,
            hitting: a.hitting,
            seed: a.seed,
        },
        seed: a.seed,
        records,
        hitting,
    };
    emit_json(&report, a.out.as_deref())?;
    Ok(if saturated { EXIT_SATURATED } else { EXIT_OK })
}

pub fn experiment(a: &ExperimentArgs) -> anyhow::Result<u8> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.replicas {
        cfg.replicas = r;
    }
    if a.horizon.is_some() {
        cfg.horizon = a.horizon;
    }
    let potential = cfg.potential(a.config.parent())?;
    let resolved = cfg.resolve(&potential)?;
    let model = GibbsModel::build(potential)?;
    let run = run_experiment(&resolved, &model)?;
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            emit(&run.csv()?, Some(&dir.join("tails.csv")))?;
            emit(&run.summary_json()?, Some(&dir.join("summary.json")))?;
        }
        None => emit(&run.summary_json()?, None)?,
    }
    Ok(if run.summary.unusable.is_empty() { EXIT_OK } else { EXIT_SATURATED })
}

#[derive(Serialize)]
struct OracleOutput {
    config: OracleConfig,
    reports: Vec<OscillationReport>,
    violations: usize,
}

#[derive(Serialize)]
struct OracleConfig {
    n: usize,
    k: Option<usize>,
    alphabet: usize,
    sweep: bool,
}

pub fn oracle(a: &OracleArgs) -> anyhow::Result<u8> {
    let alphabet = Alphabet::new(a.alphabet)?;
    let reports = if a.sweep {
        oscillation_sweep(a.n, alphabet)?
    } else {
        let ks: Vec<usize> = match a.k {
            Some(k) => vec![k],
            None => (1..=a.n).collect(),
        };
        ks.into_iter().map(|k| oscillation_oracle(a.n, k, alphabet)).collect::<Result<_, _>>()?
    };
    let violations = reports.iter().filter(|r| !r.holds()).count();
    let out = OracleOutput {
        config: OracleConfig { n: a.n, k: a.k, alphabet: a.alphabet, sweep: a.sweep },
        reports,
        violations,
    };
    emit_json(&out, a.out.as_deref())?;
    Ok(if violations == 0 { EXIT_OK } else { EXIT_VIOLATION })
}

#[derive(Serialize)]
struct ExplawOutput {
    config: ExplawConfig,
    seed: u64,
    report: gibbs_entropy_core::lab::ExpLawReport,
    batch_spread: f64,
}

#[derive(Serialize)]
struct ExplawConfig {
    model: PathBuf,
    word: String,
    replicas: usize,
    seed: u64,
}

pub fn explaw(a: &ExplawArgs) -> anyhow::Result<u8> {
    let m = build_model(&a.model)?;
    let w = Word::parse(m.alphabet(), &a.word)?;
    let report = exp_law_test(&m, &w, a.replicas, a.seed)?;
    let valid = report.valid;
    let out = ExplawOutput {
        config: ExplawConfig { model: a.model.clone(), word: a.word.clone(), replicas: a.replicas, seed: a.seed },
        seed: a.seed,
        batch_spread: report.batch_spread(),
        report,
    };
    emit_json(&out, a.out.as_deref())?;
    Ok(if valid { EXIT_OK } else { EXIT_SATURATED })
}
