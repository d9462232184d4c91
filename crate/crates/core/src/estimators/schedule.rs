//! Block-length schedules `k(n)`.

use crate::error::{invalid, Error, Result};
use crate::math;

/// Guard against `floor` landing one below an exact integer after rounding
/// (e.g. `30 · (1/3)`).
const FLOOR_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum ScheduleKind {
    /// `k = ⌊α ln n / (2 ln|A|)⌋`, `α ∈ (0,1)`.
    Main1 { alpha: f64 },
    /// `k = ⌊q ln n / ln|A|⌋` with `q = 1/(1 + ln θ⁻¹/ln|A|)`; needs `θ < 1/|A|`.
    Main2 { theta: f64 },
    /// `k = ⌊ln n / ln|A|⌋`.
    OrnsteinWeiss,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ScheduleParams {
    #[cfg_attr(feature = "serde", serde(flatten))]
    kind: ScheduleKind,
    alphabet_size: usize,
}

impl ScheduleParams {
    pub fn new(kind: ScheduleKind, alphabet_size: usize) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(invalid!("alphabet size must be at least 2"));
        }
        match kind {
            ScheduleKind::Main1 { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                return Err(Error::Hypothesis {
                    theorem: "main1",
                    detail: alloc::format!("alpha must lie in (0,1), got {alpha}"),
                });
            }
            ScheduleKind::Main2 { theta } if !(theta > 0.0 && theta * (alphabet_size as f64) < 1.0) => {
                return Err(Error::Hypothesis {
                    theorem: "main2",
                    detail: alloc::format!("requires 0 < theta < 1/|A| = {}, got {theta}", 1.0 / alphabet_size as f64),
                });
            }
            _ => {}
        }
        Ok(Self { kind, alphabet_size })
    }

    pub fn main1(alpha: f64, alphabet_size: usize) -> Result<Self> {
        Self::new(ScheduleKind::Main1 { alpha }, alphabet_size)
    }

    pub fn main2(theta: f64, alphabet_size: usize) -> Result<Self> {
        Self::new(ScheduleKind::Main2 { theta }, alphabet_size)
    }

    pub fn ornstein_weiss(alphabet_size: usize) -> Result<Self> {
        Self::new(ScheduleKind::OrnsteinWeiss, alphabet_size)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ScheduleKind::Main1 { .. } => "main1",
            ScheduleKind::Main2 { .. } => "main2",
            ScheduleKind::OrnsteinWeiss => "ornstein-weiss",
        }
    }

    fn log_a(&self) -> f64 {
        math::ln(self.alphabet_size as f64)
    }

    /// `q = 1/(1 + ln θ⁻¹ / ln|A|)` for the `main2` schedule.
    pub fn q(&self) -> Option<f64> {
        match self.kind {
            ScheduleKind::Main2 { theta } => Some(1.0 / (1.0 + math::ln(1.0 / theta) / self.log_a())),
            _ => None,
        }
    }

    /// Real-valued `k(n)` before flooring.
    pub fn raw(&self, n: usize) -> f64 {
        let ln_n = math::ln(n as f64);
        match self.kind {
            ScheduleKind::Main1 { alpha } => alpha * ln_n / (2.0 * self.log_a()),
            ScheduleKind::Main2 { .. } => self.q().expect("main2") * ln_n / self.log_a(),
            ScheduleKind::OrnsteinWeiss => ln_n / self.log_a(),
        }
    }

    /// `k(n)`, clamped to at least 1.
    pub fn k(&self, n: usize) -> Result<usize> {
        if n < 2 {
            return Err(invalid!("schedules need n ≥ 2, got {n}"));
        }
        Ok((math::floor(self.raw(n) + FLOOR_EPS) as usize).max(1))
    }
}

/// `k(n)` for the given schedule.
pub fn schedule(n: usize, p: &ScheduleParams) -> Result<usize> {
    p.k(n)
}
