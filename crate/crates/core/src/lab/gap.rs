//! Bias of the conditional estimator under the `main2` schedule.

use alloc::vec::Vec;

use super::bounds::main2_gamma;
use crate::error::{invalid, Error, Result};
use crate::estimators::{conditional_entropy, delta_hat, ScheduleKind, ScheduleParams};
use crate::gibbs::GibbsModel;
use crate::math;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GapRow {
    pub n: usize,
    pub k: usize,
    /// `mean(ĥ_k)`.
    pub mean: f64,
    /// `mean(ĥ_k) − h`.
    pub bias: f64,
    /// `|bias|`.
    pub gap: f64,
    /// Standard error of `mean(ĥ_k)`.
    pub std_err: f64,
    /// `gap · n^γ`.
    pub scaled_gap: f64,
    /// `mean(Δ̂_k)`.
    pub mean_delta: f64,
    /// `mean(|Δ̂_k|) · n / |A|^k`.
    pub effective_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GapReport {
    pub entropy: f64,
    pub gamma: f64,
    pub rows: Vec<GapRow>,
    /// `max scaled_gap`: smallest `c` with `gap ≤ c/n^γ` on the grid.
    pub fitted_c: f64,
    /// `max effective_m`.
    pub fitted_m: f64,
}

/// Monte Carlo `|E ĥ_{k(n)} − h|` and the effective `M` of `E|Δ̂|` per `n`.
pub fn expectation_gap_report(
    m: &GibbsModel,
    schedule: &ScheduleParams,
    n_grid: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<GapReport> {
    let theta = match schedule.kind() {
        ScheduleKind::Main2 { theta } => theta,
        _ => {
            return Err(Error::Hypothesis {
                theorem: "main2",
                detail: alloc::format!("expectation gap needs the main2 schedule, got {}", schedule.name()),
            })
        }
    };
    if replicas < 2 {
        return Err(invalid!("need at least 2 replicas"));
    }
    if schedule.alphabet_size() != m.alphabet().size() {
        return Err(invalid!("schedule alphabet size does not match the model"));
    }
    let asz = m.alphabet().size();
    let h = m.exact_entropy()?;
    let gamma = main2_gamma(theta, asz);
    let mut rows = Vec::with_capacity(n_grid.len());
    for (g, &n) in n_grid.iter().enumerate() {
        let k = schedule.k(n)?;
        let mut hs = Vec::with_capacity(replicas);
        let mut deltas = Vec::with_capacity(replicas);
        for i in 0..replicas {
            let x = m.sample_path(n, rng::replica_seed(seed, g * replicas + i))?;
            hs.push(conditional_entropy(&x, k)?);
            deltas.push(delta_hat(&x, k, m)?);
        }
        let (mean, var) = math::mean_var(&hs);
        let bias = mean - h;
        let mean_delta = deltas.iter().sum::<f64>() / replicas as f64;
        let mean_abs = deltas.iter().map(|d| d.abs()).sum::<f64>() / replicas as f64;
        rows.push(GapRow {
            n,
            k,
            mean,
            bias,
            gap: bias.abs(),
            std_err: math::sqrt(var / replicas as f64),
            scaled_gap: bias.abs() * math::powf(n as f64, gamma),
            mean_delta,
            effective_m: mean_abs * n as f64 / math::powi(asz as f64, k as i32),
        });
    }
    let fitted_c = rows.iter().map(|r| r.scaled_gap).fold(0.0, f64::max);
    let fitted_m = rows.iter().map(|r| r.effective_m).fold(0.0, f64::max);
    Ok(GapReport { entropy: h, gamma, rows, fitted_c, fitted_m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::Potential;
    use crate::shift::{Alphabet, MetricParams};

    #[test]
    fn uniform_gap_is_mean_delta() {
        let m = GibbsModel::build(Potential::uniform(Alphabet::binary(), MetricParams::default()).unwrap()).unwrap();
        let s = ScheduleParams::main2(0.25, 2).unwrap();
        let rep = expectation_gap_report(&m, &s, &[1 << 10, 1 << 12], 40, 3).unwrap();
        for r in &rep.rows {
            // For constant φ, ĥ_k − ln 2 equals Δ̂_k sample by sample.
            assert!((r.bias - r.mean_delta).abs() < 1e-12, "{r:?}");
            assert!(r.effective_m >= 0.0);
        }
        assert!((rep.gamma - 2.0 / 3.0).abs() < 1e-15);
        assert!(rep.fitted_c >= rep.rows[0].scaled_gap);
    }

    #[test]
    fn requires_main2() {
        let m = GibbsModel::build(Potential::uniform(Alphabet::binary(), MetricParams::default()).unwrap()).unwrap();
        let s = ScheduleParams::ornstein_weiss(2).unwrap();
        assert!(matches!(
            expectation_gap_report(&m, &s, &[1024], 10, 0),
            Err(Error::Hypothesis { theorem: "main2", .. })
        ));
    }
}
