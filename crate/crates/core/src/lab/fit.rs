//! Envelope fits of the unknown constants.
//!
//! Single-slope kinds (`main1-tail`, `main2-tail`, `phiphi`) have the form
//! `2 e^{−s x}` with `x` known from `(n, t)`; the smallest admissible
//! constant is `s* = min y/x` over the data, `y = −ln(p̂/2)`. The waiting
//! kinds `C₁ e^{−C₂ x}` take `C₂` from least squares of `−ln p̂` on `x` and
//! then the smallest `C₁` that dominates every point. R² always refers to
//! the unconstrained affine fit on the estimable window.

use alloc::format;
use alloc::vec::Vec;

use super::bounds::{main1_exponent, main2_exponent, main2_gamma, BoundKind, Constants, Provenance};
use super::experiment::TailEstimate;
use crate::error::{Error, Result};
use crate::math;

/// Minimum number of points with `0 < p̂ < 1` for a fit.
pub const MIN_FIT_POINTS: usize = 6;

/// Ordinary least squares `y ≈ a + b x`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AffineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
    pub points: usize,
}

pub fn affine_fit(xs: &[f64], ys: &[f64]) -> Result<AffineFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::FitImpossible(format!("affine fit needs ≥ 2 paired points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::FitImpossible("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| { let r = y - intercept - slope * x; r * r }).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(AffineFit { intercept, slope, r2, points: n })
}

/// Whether `p̂` lies in `[10/R, 0.5]`, the range resolvable with `R` replicas.
pub fn is_estimable(e: &TailEstimate) -> bool {
    e.usable && e.trials > 0 && e.p_hat >= 10.0 / e.trials as f64 && e.p_hat <= 0.5
}

/// Outcome of [`fit_constants`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FitResult {
    pub kind: BoundKind,
    /// Parameters passed in plus the fitted constants.
    pub constants: Constants,
    /// Unconstrained affine fit of the transformed data on the estimable
    /// window (or on every fitted point if the window has fewer than 3).
    pub unconstrained: AffineFit,
    pub r2: f64,
    /// Points with `0 < p̂ < 1` that entered the fit.
    pub points: usize,
    /// `[t_min, t_max]` over the fitted points.
    pub t_range: (f64, f64),
}

struct Point {
    x: f64,
    y: f64,
    t: f64,
    interior: bool,
    estimable: bool,
}

fn transform(tails: &[TailEstimate], kind: BoundKind, params: &Constants) -> Result<Vec<Point>> {
    let offset = |n: usize| -> Result<f64> {
        let theta = params.require("theta", kind)?;
        let asz = params.require("alphabet_size", kind)? as usize;
        let c = params.require("c", kind)?;
        Ok(c / math::powf(n as f64, main2_gamma(theta, asz)))
    };
    let mut out = Vec::new();
    for e in tails.iter().filter(|e| e.usable && e.p_hat > 0.0) {
        let nf = e.n as f64;
        let (x, prefactor) = match kind {
            BoundKind::Main1Tail => (main1_exponent(e.n, e.t, params.require("alpha", kind)?), 2.0),
            BoundKind::Main2Tail => {
                let t_eff = e.t - offset(e.n)?;
                if t_eff <= 0.0 {
                    continue;
                }
                let theta = params.require("theta", kind)?;
                let asz = params.require("alphabet_size", kind)? as usize;
                (main2_exponent(e.n, t_eff, theta, asz), 2.0)
            }
            BoundKind::Phiphi => (nf * e.t * e.t, 2.0),
            BoundKind::WaitingUpper => (nf * e.t * e.t, 1.0),
            BoundKind::WaitingLower => (nf * e.t, 1.0),
            BoundKind::Main1Variance => {
                return Err(Error::FitImpossible("use fit_variance_constant for main1-variance".into()))
            }
        };
        out.push(Point {
            x,
            y: -math::ln(e.p_hat / prefactor),
            t: e.t,
            interior: e.p_hat < 1.0,
            estimable: is_estimable(e),
        });
    }
    Ok(out)
}

/// Fit the unknown constants of `kind` to empirical tails.
///
/// `params` carries the non-fitted inputs: `alpha` for `main1-tail`;
/// `theta`, `alphabet_size` and the offset `c` for `main2-tail`.
pub fn fit_constants(tails: &[TailEstimate], kind: BoundKind, params: &Constants) -> Result<FitResult> {
    let pts = transform(tails, kind, params)?;
    let interior: Vec<&Point> = pts.iter().filter(|p| p.interior).collect();
    if interior.len() < MIN_FIT_POINTS {
        return Err(Error::FitImpossible(format!(
            "{kind}: {} grid points with 0 < p_hat < 1, need {MIN_FIT_POINTS}",
            interior.len()
        )));
    }
    let window: Vec<&Point> = pts.iter().filter(|p| p.estimable).collect();
    let r2_set = if window.len() >= 3 { window } else { interior.clone() };
    let xs: Vec<f64> = r2_set.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = r2_set.iter().map(|p| p.y).collect();
    let unconstrained = affine_fit(&xs, &ys)?;

    let mut constants = params.clone();
    match kind {
        BoundKind::WaitingUpper | BoundKind::WaitingLower => {
            let xs: Vec<f64> = interior.iter().map(|p| p.x).collect();
            let ys: Vec<f64> = interior.iter().map(|p| p.y).collect();
            let c2 = affine_fit(&xs, &ys)?.slope;
            if !(c2 > 0.0) {
                return Err(Error::FitImpossible(format!("{kind}: fitted decay rate {c2} is not positive")));
            }
            let log_c1 = pts.iter().map(|p| c2 * p.x - p.y).fold(f64::NEG_INFINITY, f64::max);
            constants.set("C2", c2, Provenance::Fitted);
            constants.set("C1", math::exp(log_c1), Provenance::Fitted);
        }
        _ => {
            let s = pts
                .iter()
                .filter(|p| p.x > 0.0)
                .map(|p| p.y / p.x)
                .fold(f64::INFINITY, f64::min);
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::FitImpossible(format!("{kind}: no dominating positive rate (min y/x = {s})")));
            }
            match kind {
                BoundKind::Main1Tail => constants.set("D", 1.0 / s, Provenance::Fitted),
                BoundKind::Main2Tail => {
                    let l = math::ln(params.require("alphabet_size", kind)?);
                    constants.set("Gamma", s, Provenance::Fitted);
                    constants.set("D", l * l / (16.0 * s), Provenance::Fitted);
                }
                _ => constants.set("B", s, Provenance::Fitted),
            }
        }
    }
    let t_range = interior
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.t), hi.max(p.t)));
    Ok(FitResult { kind, constants, r2: unconstrained.r2, unconstrained, points: interior.len(), t_range })
}

/// Envelope constant for the variance bound `8 D (ln n)² / n^{1−α}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VarianceFit {
    pub alpha: f64,
    pub d: f64,
    /// `(n, Var · n^{1−α} / (ln n)²)`.
    pub ratios: Vec<(usize, f64)>,
    /// `max ratio / min ratio`.
    pub spread: f64,
}

pub fn fit_variance_constant(variances: &[(usize, f64)], alpha: f64) -> Result<VarianceFit> {
    if variances.is_empty() {
        return Err(Error::FitImpossible("no variance estimates".into()));
    }
    let ratios: Vec<(usize, f64)> = variances
        .iter()
        .map(|&(n, v)| {
            let l = math::ln(n as f64);
            (n, v * math::powf(n as f64, 1.0 - alpha) / (l * l))
        })
        .collect();
    let hi = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    if !(lo > 0.0) {
        return Err(Error::FitImpossible("a variance estimate is zero".into()));
    }
    Ok(VarianceFit { alpha, d: hi / 8.0, ratios, spread: hi / lo })
}

/// Goodness of fit of `−ln p̂` against `t` and against `t²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ShapeComparison {
    pub linear: AffineFit,
    pub quadratic: AffineFit,
}

impl ShapeComparison {
    pub fn prefers_linear(&self) -> bool {
        self.linear.r2 > self.quadratic.r2
    }
}

/// Compare linear and quadratic exponents on tails with `p̂ > 0`.
pub fn compare_tail_shapes(tails: &[TailEstimate]) -> Result<ShapeComparison> {
    let pts: Vec<&TailEstimate> = tails.iter().filter(|e| e.usable && e.p_hat > 0.0).collect();
    let ys: Vec<f64> = pts.iter().map(|e| -math::ln(e.p_hat)).collect();
    let lin: Vec<f64> = pts.iter().map(|e| e.t).collect();
    let quad: Vec<f64> = pts.iter().map(|e| e.t * e.t).collect();
    Ok(ShapeComparison { linear: affine_fit(&lin, &ys)?, quadratic: affine_fit(&quad, &ys)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::bounds::evaluate_bound;
    use crate::lab::experiment::TailSide;

    fn tail(n: usize, t: f64, p: f64) -> TailEstimate {
        TailEstimate::from_probability(n, t, TailSide::TwoSided, p, 1_000_000)
    }

    fn synth(kind: BoundKind, c: &Constants) -> Vec<TailEstimate> {
        let mut out = Vec::new();
        for &n in &[1usize << 10, 1 << 12, 1 << 14] {
            for i in 1..=8 {
                let t = 1.5 * i as f64;
                let p = evaluate_bound(kind, n, t, c).unwrap();
                if p > 0.0 && p < 1.0 {
                    out.push(tail(n, t, p));
                }
            }
        }
        out
    }

    #[test]
    fn affine_exact_line() {
        let f = affine_fit(&[1.0, 2.0, 3.0], &[5.0, 7.0, 9.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 3.0).abs() < 1e-12);
        assert_eq!(f.r2, 1.0);
        assert!(affine_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn main1_round_trip() {
        let truth = Constants::main1(0.5).with("D", 2.0, Provenance::Hypothesized);
        let data = synth(BoundKind::Main1Tail, &truth);
        let fit = fit_constants(&data, BoundKind::Main1Tail, &Constants::main1(0.5)).unwrap();
        assert!((fit.constants.get("D").unwrap() - 2.0).abs() < 1e-6);
        assert_eq!(fit.constants.provenance("D"), Some(Provenance::Fitted));
    }

    #[test]
    fn phiphi_round_trip() {
        let data: Vec<_> = (1..=8)
            .map(|i| {
                let t = 0.05 * i as f64;
                tail(1000, t, 2.0 * (-0.8 * 1000.0 * t * t).exp())
            })
            .collect();
        let fit = fit_constants(&data, BoundKind::Phiphi, &Constants::new()).unwrap();
        assert!((fit.constants.get("B").unwrap() - 0.8).abs() < 1e-9);
        assert!(fit.r2 > 0.999999);
    }

    #[test]
    fn main2_round_trip() {
        let params = Constants::main2(0.25, 2).with("c", 0.3, Provenance::Fitted);
        let truth = params.clone().with("D", 5e-4, Provenance::Hypothesized);
        let mut data = Vec::new();
        for &n in &[1usize << 12, 1 << 16, 1 << 20] {
            for i in 1..=8 {
                let t = 0.5 * i as f64;
                let p = evaluate_bound(BoundKind::Main2Tail, n, t, &truth).unwrap();
                if p > 0.0 && p < 1.0 {
                    data.push(tail(n, t, p));
                }
            }
        }
        let fit = fit_constants(&data, BoundKind::Main2Tail, &params).unwrap();
        assert!((fit.constants.get("D").unwrap() / 5e-4 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn waiting_lower_round_trip() {
        let data: Vec<_> = (1..=10)
            .map(|i| {
                let t = 0.01 * i as f64;
                tail(20, t, (-3.0 * 20.0 * t).exp())
            })
            .collect();
        let fit = fit_constants(&data, BoundKind::WaitingLower, &Constants::new()).unwrap();
        assert!((fit.constants.get("C2").unwrap() - 3.0).abs() < 1e-6);
        assert!((fit.constants.get("C1").unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn waiting_upper_round_trip() {
        let data: Vec<_> = (1..=10)
            .map(|i| {
                let t = 0.05 * i as f64;
                tail(20, t, 1.5 * (-0.7 * 20.0 * t * t).exp())
            })
            .filter(|e| e.p_hat < 1.0)
            .collect();
        let fit = fit_constants(&data, BoundKind::WaitingUpper, &Constants::new()).unwrap();
        assert!((fit.constants.get("C2").unwrap() - 0.7).abs() < 1e-6);
        assert!((fit.constants.get("C1").unwrap() - 1.5).abs() < 1e-6);
    }

    #[test]
    fn envelope_dominates_noisy_points() {
        let noise = [1.3, 0.7, 1.1, 0.9, 1.4, 0.6, 1.0, 1.2];
        let data: Vec<_> = noise
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let t = 0.03 * (i + 1) as f64;
                tail(400, t, (z * 2.0 * (-0.5 * 400.0 * t * t).exp()).min(0.99))
            })
            .collect();
        let fit = fit_constants(&data, BoundKind::Phiphi, &Constants::new()).unwrap();
        for e in &data {
            let b = evaluate_bound(BoundKind::Phiphi, e.n, e.t, &fit.constants).unwrap();
            assert!(e.p_hat <= b * (1.0 + 1e-12), "{} > {b}", e.p_hat);
        }
    }

    #[test]
    fn degenerate_grid_is_refused() {
        let data: Vec<_> = (1..=10).map(|i| tail(100, 0.1 * i as f64, if i < 5 { 1.0 } else { 0.0 })).collect();
        assert!(matches!(
            fit_constants(&data, BoundKind::Phiphi, &Constants::new()),
            Err(Error::FitImpossible(_))
        ));
    }

    #[test]
    fn variance_ratio_spread() {
        let alpha = 0.5;
        let pts: Vec<(usize, f64)> = [1usize << 12, 1 << 14]
            .iter()
            .map(|&n| {
                let l = (n as f64).ln();
                (n, 3.0 * l * l / (n as f64).powf(1.0 - alpha))
            })
            .collect();
        let f = fit_variance_constant(&pts, alpha).unwrap();
        assert!((f.spread - 1.0).abs() < 1e-12);
        assert!((f.d - 3.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn shape_comparison_separates_linear_from_quadratic() {
        let lin: Vec<_> = (1..=10).map(|i| tail(20, 0.05 * i as f64, (-20.0 * 0.05 * i as f64).exp())).collect();
        assert!(compare_tail_shapes(&lin).unwrap().prefers_linear());
        let quad: Vec<_> = (1..=10)
            .map(|i| tail(20, 0.05 * i as f64, (-20.0 * (0.05 * i as f64).powi(2)).exp()))
            .collect();
        assert!(!compare_tail_shapes(&quad).unwrap().prefers_linear());
    }
}
