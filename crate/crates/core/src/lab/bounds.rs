//! Evaluable right-hand sides of the concentration inequalities.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::math;

/// Which inequality a curve or fit refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BoundKind {
    /// `2 exp(−n^{1−α} t² / (16 D (ln n)²))`.
    Main1Tail,
    /// `8 D (ln n)² / n^{1−α}`.
    Main1Variance,
    /// `2 exp(−Γ n^ξ t² / (ln n)⁴)` for the event `≥ t + c/n^γ`.
    Main2Tail,
    /// `C₁ exp(−C₂ n t²)`.
    WaitingUpper,
    /// `C₁ exp(−C₂ n t)`.
    WaitingLower,
    /// `2 exp(−B n t²)`, the two-sided ergodic-average bound.
    Phiphi,
}

impl BoundKind {
    pub const ALL: [BoundKind; 6] = [
        BoundKind::Main1Tail,
        BoundKind::Main1Variance,
        BoundKind::Main2Tail,
        BoundKind::WaitingUpper,
        BoundKind::WaitingLower,
        BoundKind::Phiphi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Main1Tail => "main1-tail",
            BoundKind::Main1Variance => "main1-variance",
            BoundKind::Main2Tail => "main2-tail",
            BoundKind::WaitingUpper => "waiting-upper",
            BoundKind::WaitingLower => "waiting-lower",
            BoundKind::Phiphi => "phiphi",
        }
    }

    /// Whether the bound is a probability (as opposed to a variance).
    pub fn is_tail(self) -> bool {
        self != BoundKind::Main1Variance
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid!("unknown bound kind {s:?}"))
    }
}

/// Where a constant's value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Provenance {
    /// Chosen by the experimenter (schedule parameters, alphabet size).
    Parameter,
    /// Computed in closed form from other constants.
    Derived,
    /// Fitted to Monte Carlo data.
    Fitted,
    /// Supplied by the user as a hypothesis.
    Hypothesized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Constant {
    pub value: f64,
    pub provenance: Provenance,
}

/// Named constants feeding a bound, each tagged with its provenance.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Constants(BTreeMap<String, Constant>);

impl Constants {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64, provenance: Provenance) -> Self {
        self.set(name, value, provenance);
        self
    }

    pub fn set(&mut self, name: &str, value: f64, provenance: Provenance) {
        self.0.insert(name.to_string(), Constant { value, provenance });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).map(|c| c.value)
    }

    pub fn provenance(&self, name: &str) -> Option<Provenance> {
        self.0.get(name).map(|c| c.provenance)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Constant)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn require(&self, name: &str, kind: BoundKind) -> Result<f64> {
        let v = self.get(name).ok_or_else(|| invalid!("{kind} needs constant {name:?}"))?;
        if !v.is_finite() {
            return Err(invalid!("constant {name:?} is not finite"));
        }
        Ok(v)
    }

    fn positive(&self, name: &str, kind: BoundKind) -> Result<f64> {
        let v = self.require(name, kind)?;
        if v <= 0.0 {
            return Err(invalid!("constant {name:?} must be positive, got {v}"));
        }
        Ok(v)
    }

    /// Parameters for `main1`: `α` as a parameter.
    pub fn main1(alpha: f64) -> Self {
        Self::new().with("alpha", alpha, Provenance::Parameter)
    }

    /// Parameters for `main2`: `θ`, `|A|`, and the derived `γ`, `ξ`.
    pub fn main2(theta: f64, alphabet_size: usize) -> Self {
        Self::new()
            .with("theta", theta, Provenance::Parameter)
            .with("alphabet_size", alphabet_size as f64, Provenance::Parameter)
            .with("gamma", main2_gamma(theta, alphabet_size), Provenance::Derived)
            .with("xi", main2_xi(theta, alphabet_size), Provenance::Derived)
    }
}

/// `γ = 1/(1 + ln|A| / ln θ⁻¹)`.
pub fn main2_gamma(theta: f64, alphabet_size: usize) -> f64 {
    1.0 / (1.0 + math::ln(alphabet_size as f64) / math::ln(1.0 / theta))
}

/// `ξ = 1 − 2/(1 + ln θ⁻¹ / ln|A|)`.
pub fn main2_xi(theta: f64, alphabet_size: usize) -> f64 {
    1.0 - 2.0 / (1.0 + math::ln(1.0 / theta) / math::ln(alphabet_size as f64))
}

/// `Γ = (ln|A|)² / (16 D)`.
pub fn main2_big_gamma(alphabet_size: usize, d: f64) -> f64 {
    let l = math::ln(alphabet_size as f64);
    l * l / (16.0 * d)
}

/// Cap applied to tail bounds whose fitted prefactor could exceed it.
pub const TAIL_CAP: f64 = 2.0;

/// The right-hand side of `kind` at `(n, t)`.
///
/// `t` is the threshold of the deviation event being bounded. For
/// `main2-tail` the theorem's event is `≥ t' + c/n^γ`, so the bound is
/// evaluated at `t' = t − c/n^γ` (and is `2` when `t' ≤ 0`). The variance
/// kind ignores `t`.
pub fn evaluate_bound(kind: BoundKind, n: usize, t: f64, constants: &Constants) -> Result<f64> {
    if n < 2 {
        return Err(invalid!("bounds need n ≥ 2, got {n}"));
    }
    if kind.is_tail() && !(t > 0.0 && t.is_finite()) {
        return Err(invalid!("t must be positive and finite, got {t}"));
    }
    let nf = n as f64;
    let ln_n = math::ln(nf);
    let v = match kind {
        BoundKind::Main1Tail => {
            let alpha = constants.require("alpha", kind)?;
            let d = constants.positive("D", kind)?;
            2.0 * math::exp(-main1_exponent(n, t, alpha) / d)
        }
        BoundKind::Main1Variance => {
            let alpha = constants.require("alpha", kind)?;
            let d = constants.positive("D", kind)?;
            8.0 * d * ln_n * ln_n / math::powf(nf, 1.0 - alpha)
        }
        BoundKind::Main2Tail => {
            let theta = constants.require("theta", kind)?;
            let asz = constants.require("alphabet_size", kind)? as usize;
            let gamma = main2_gamma(theta, asz);
            let c = constants.require("c", kind)?;
            let big_gamma = match constants.get("Gamma") {
                Some(g) => g,
                None => main2_big_gamma(asz, constants.positive("D", kind)?),
            };
            let t_eff = t - c / math::powf(nf, gamma);
            if t_eff <= 0.0 {
                TAIL_CAP
            } else {
                2.0 * math::exp(-big_gamma * main2_exponent(n, t_eff, theta, asz))
            }
        }
        BoundKind::WaitingUpper => {
            let c1 = constants.positive("C1", kind)?;
            let c2 = constants.positive("C2", kind)?;
            (c1 * math::exp(-c2 * nf * t * t)).min(TAIL_CAP)
        }
        BoundKind::WaitingLower => {
            let c1 = constants.positive("C1", kind)?;
            let c2 = constants.positive("C2", kind)?;
            (c1 * math::exp(-c2 * nf * t)).min(TAIL_CAP)
        }
        BoundKind::Phiphi => {
            let b = constants.positive("B", kind)?;
            2.0 * math::exp(-b * nf * t * t)
        }
    };
    Ok(v)
}

/// `n^{1−α} t² / (16 (ln n)²)`.
pub(crate) fn main1_exponent(n: usize, t: f64, alpha: f64) -> f64 {
    let nf = n as f64;
    let ln_n = math::ln(nf);
    math::powf(nf, 1.0 - alpha) * t * t / (16.0 * ln_n * ln_n)
}

/// `n^ξ t² / (ln n)⁴`.
pub(crate) fn main2_exponent(n: usize, t: f64, theta: f64, alphabet_size: usize) -> f64 {
    let nf = n as f64;
    let l2 = math::ln(nf) * math::ln(nf);
    math::powf(nf, main2_xi(theta, alphabet_size)) * t * t / (l2 * l2)
}

/// A bound evaluated on a grid, with the constants that produced it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub constants: Constants,
    /// `(n, t, value)`.
    pub values: Vec<(usize, f64, f64)>,
}

impl BoundCurve {
    pub fn evaluate(kind: BoundKind, constants: Constants, points: &[(usize, f64)]) -> Result<Self> {
        let values = points
            .iter()
            .map(|&(n, t)| evaluate_bound(kind, n, t, &constants).map(|v| (n, t, v)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind, constants, values })
    }

    pub fn value(&self, n: usize, t: f64) -> Option<f64> {
        self.values.iter().find(|&&(m, s, _)| m == n && s == t).map(|&(_, _, v)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in BoundKind::ALL {
            assert_eq!(k.name().parse::<BoundKind>().unwrap(), k);
            assert_eq!(k.to_string(), k.name());
        }
        assert!("main3-tail".parse::<BoundKind>().is_err());
    }

    #[test]
    fn main1_plug_in() {
        let c = Constants::main1(0.5).with("D", 1.0, Provenance::Hypothesized);
        let v = evaluate_bound(BoundKind::Main1Tail, 1024, 0.1, &c).unwrap();
        assert!((v - 1.9991676256674291).abs() < 1e-12, "{v}");
    }

    #[test]
    fn main1_variance_plug_in() {
        let c = Constants::main1(0.5).with("D", 2.0, Provenance::Hypothesized);
        let v = evaluate_bound(BoundKind::Main1Variance, 1024, 1.0, &c).unwrap();
        let ln = (1024f64).ln();
        assert!((v - 16.0 * ln * ln / 32.0).abs() < 1e-12);
    }

    #[test]
    fn main2_remark_constants() {
        assert!((main2_gamma(0.25, 2) - 2.0 / 3.0).abs() < 1e-15);
        assert!((main2_xi(0.25, 2) - 1.0 / 3.0).abs() < 1e-15);
        let l = 2f64.ln();
        assert!((main2_big_gamma(2, 3.0) - l * l / 48.0).abs() < 1e-15);
    }

    #[test]
    fn main2_offset_shifts_threshold() {
        let c = Constants::main2(0.25, 2).with("D", 1.0, Provenance::Hypothesized);
        let n = 1 << 12;
        let off = 0.5 / (n as f64).powf(2.0 / 3.0);
        let with_c = c.clone().with("c", 0.5, Provenance::Fitted);
        let no_c = c.with("c", 0.0, Provenance::Fitted);
        let a = evaluate_bound(BoundKind::Main2Tail, n, 0.3 + off, &with_c).unwrap();
        let b = evaluate_bound(BoundKind::Main2Tail, n, 0.3, &no_c).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert_eq!(evaluate_bound(BoundKind::Main2Tail, n, off / 2.0, &with_c).unwrap(), 2.0);
    }

    #[test]
    fn tails_vanish_monotonically() {
        let c = Constants::main2(0.25, 2)
            .with("D", 1.0, Provenance::Hypothesized)
            .with("c", 0.1, Provenance::Hypothesized)
            .with("alpha", 0.5, Provenance::Parameter)
            .with("B", 0.7, Provenance::Hypothesized)
            .with("C1", 5.0, Provenance::Hypothesized)
            .with("C2", 0.4, Provenance::Hypothesized);
        for kind in BoundKind::ALL.into_iter().filter(|k| k.is_tail()) {
            let mut last = f64::INFINITY;
            for i in 1..200 {
                let v = evaluate_bound(kind, 4096, 0.05 * 1.2f64.powi(i), &c).unwrap();
                assert!((0.0..=2.0).contains(&v));
                assert!(v <= last, "{kind}");
                last = v;
            }
            assert!(last < 1e-12, "{kind}: {last}");
        }
    }

    #[test]
    fn missing_constant_is_reported() {
        let err = evaluate_bound(BoundKind::Phiphi, 100, 0.1, &Constants::new()).unwrap_err();
        assert!(err.to_string().contains("\"B\""));
        assert!(evaluate_bound(BoundKind::Phiphi, 1, 0.1, &Constants::new()).is_err());
    }

    #[test]
    fn curve_lookup() {
        let c = Constants::new().with("B", 1.0, Provenance::Fitted);
        let curve = BoundCurve::evaluate(BoundKind::Phiphi, c, &[(10, 0.1), (20, 0.1)]).unwrap();
        assert_eq!(curve.value(20, 0.1), Some(2.0 * (-0.2f64).exp()));
        assert_eq!(curve.value(30, 0.1), None);
    }
}
