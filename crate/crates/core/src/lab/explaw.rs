//! Exponential law of rescaled hitting times `τ_w · μ([w])`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::estimators::hitting::{PatternAutomaton, HORIZON_CAP};
use crate::gibbs::GibbsModel;
use crate::math;
use crate::rng;
use crate::shift::Word;

pub const MIN_EXPLAW_REPLICAS: usize = 1000;

/// Scales `c` at which `−ln P(τ > v)/(v μ)` is read, with `v = ⌈c/μ⌉`.
const BRACKET_SCALES: [f64; 10] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5];

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExpLawReport {
    pub word: String,
    pub replicas: usize,
    pub saturated: usize,
    pub horizon: u64,
    /// `μ([w])`.
    pub measure: f64,
    /// `mean(τ μ)` over non-saturated replicas.
    pub mean_scaled: f64,
    /// `1 / mean(τ μ)`.
    pub lambda_hat: f64,
    /// `λ̂` of the first and second halves of the replicas.
    pub batch_lambdas: [f64; 2],
    /// `sup_u |P̂(λ̂ τ μ > u) − e^{−u}|`.
    pub sup_distance: f64,
    /// `(v, −ln P̂(τ > v) / (v μ))` for `v μ ≤ 1/2`.
    pub short_time_rates: Vec<(u64, f64)>,
    /// `[min, max]` of the short-time rates.
    pub lambda_bracket: (f64, f64),
    /// False when more than 1% of replicas saturate.
    pub valid: bool,
}

impl ExpLawReport {
    /// `|λ̂₁ − λ̂₂| / λ̂`.
    pub fn batch_spread(&self) -> f64 {
        (self.batch_lambdas[0] - self.batch_lambdas[1]).abs() / self.lambda_hat
    }
}

fn lambda_of(scaled: &[f64]) -> f64 {
    scaled.len() as f64 / scaled.iter().sum::<f64>()
}

/// Kolmogorov distance between the empirical survival of sorted `u` and `e^{−u}`.
fn sup_distance(sorted: &[f64]) -> f64 {
    let r = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let u = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == u {
            j += 1;
        }
        let tail = math::exp(-u);
        // Survival just before and at `u`.
        d = d.max(((sorted.len() - i) as f64 / r - tail).abs());
        d = d.max(((sorted.len() - j) as f64 / r - tail).abs());
        i = j;
    }
    d.min(1.0)
}

/// Draw `replicas` stationary streams and test `λ̂ τ_w μ([w])` against `Exp(1)`.
pub fn exp_law_test(m: &GibbsModel, w: &Word, replicas: usize, seed: u64) -> Result<ExpLawReport> {
    if replicas < MIN_EXPLAW_REPLICAS {
        return Err(invalid!("need at least {MIN_EXPLAW_REPLICAS} replicas, got {replicas}"));
    }
    if w.alphabet() != m.alphabet() {
        return Err(invalid!("word alphabet does not match the model"));
    }
    let mu = m.cylinder_measure(w)?;
    if !(mu > 0.0) {
        return Err(invalid!("word {w} has zero measure"));
    }
    let horizon = if 1000.0 / mu >= HORIZON_CAP as f64 { HORIZON_CAP } else { math::ceil(1000.0 / mu) as u64 };
    let automaton = PatternAutomaton::new(w);
    let mut taus: Vec<Option<u64>> = Vec::with_capacity(replicas);
    for i in 0..replicas {
        let mut s = m.sampler(rng::from_seed(rng::replica_seed(seed, i)));
        taus.push(automaton.first_hit(|| s.next_symbol(), horizon).value());
    }
    let saturated = taus.iter().filter(|t| t.is_none()).count();
    let scaled: Vec<f64> = taus.iter().flatten().map(|&t| t as f64 * mu).collect();
    if scaled.len() < 2 {
        return Err(invalid!("every replica saturated at horizon {horizon}"));
    }
    let lambda_hat = lambda_of(&scaled);
    let half = replicas / 2;
    let first: Vec<f64> = taus[..half].iter().flatten().map(|&t| t as f64 * mu).collect();
    let second: Vec<f64> = taus[half..].iter().flatten().map(|&t| t as f64 * mu).collect();
    let batch_lambdas = [lambda_of(&first), lambda_of(&second)];

    let mut u: Vec<f64> = scaled.iter().map(|s| s * lambda_hat).collect();
    u.sort_by(f64::total_cmp);
    let sup = sup_distance(&u);

    let used = scaled.len() as f64;
    let mut rates = Vec::new();
    let mut last_v = 0;
    for c in BRACKET_SCALES {
        let v = math::ceil(c / mu) as u64;
        if v == last_v || v as f64 * mu > 0.5 {
            continue;
        }
        last_v = v;
        let surv = taus.iter().flatten().filter(|&&t| t > v).count() as f64 / used;
        if surv > 0.0 && surv < 1.0 {
            rates.push((v, -math::ln(surv) / (v as f64 * mu)));
        }
    }
    let bracket = rates
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, r)| (lo.min(r), hi.max(r)));

    Ok(ExpLawReport {
        word: alloc::format!("{w}"),
        replicas,
        saturated,
        horizon,
        measure: mu,
        mean_scaled: scaled.iter().sum::<f64>() / scaled.len() as f64,
        lambda_hat,
        batch_lambdas,
        sup_distance: sup,
        short_time_rates: rates,
        lambda_bracket: bracket,
        valid: saturated as f64 <= 0.01 * replicas as f64,
    })
}
