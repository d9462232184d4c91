//! Plug-in entropies and the exact decomposition of the conditional
//! estimator into an ergodic average, a relative-entropy term and a
//! remainder controlled by the Lipschitz seminorm.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::estimators::empirical::EmpiricalBlockDistribution;
use crate::gibbs::GibbsModel;
use crate::math;
use crate::shift::{Symbol, SymbolSequence, Word};

/// Agreement required between the two routes to `Δ̂_k`.
pub const DELTA_HAT_TOL: f64 = 1e-10;

/// Slack added to the remainder bound to absorb rounding.
pub const RESIDUAL_SLACK: f64 = 1e-10;

/// `Ĥ_k = H_k(𝓔_k)`, with `0 ln 0 = 0`.
pub fn block_entropy(d: &EmpiricalBlockDistribution) -> f64 {
    d.entropy()
}

/// `Ĥ_k(x)/k`.
pub fn plugin_rate(x: &SymbolSequence, k: usize) -> Result<f64> {
    Ok(EmpiricalBlockDistribution::new(x, k)?.entropy() / k as f64)
}

/// `ĥ_k(x) = Ĥ_k(x) − Ĥ_{k−1}(x)`, and `ĥ_1 = Ĥ_1`.
///
/// `𝓔_{k−1}` is obtained by marginalizing `𝓔_k`, which is exact because the
/// periodic family is consistent.
pub fn conditional_entropy(x: &SymbolSequence, k: usize) -> Result<f64> {
    let d = EmpiricalBlockDistribution::new(x, k)?;
    Ok(conditional_from(&d))
}

pub(crate) fn conditional_from(d: &EmpiricalBlockDistribution) -> f64 {
    if d.k() == 1 {
        return d.entropy();
    }
    let n = d.n() as f64;
    let joint: f64 = d.atoms().iter().map(|&(_, c)| math::xlogx(c as f64)).sum();
    let marginal: f64 = d.marginal_counts(false).iter().map(|&(_, c)| math::xlogx(c as f64)).sum();
    (marginal - joint) / n
}

/// `H_k(𝓔 | μ) = Σ_w f(w) ln(f(w)/μ([w]))`, with exact model cylinders.
pub fn relative_block_entropy(d: &EmpiricalBlockDistribution, m: &GibbsModel) -> Result<f64> {
    if d.alphabet() != m.alphabet() {
        return Err(invalid!("distribution and model use different alphabets"));
    }
    Ok(d.iter().map(|(w, f)| f * (math::ln(f) - m.log_cylinder(&w))).sum())
}

fn relative_from_counts(counts: &[(u64, u64)], k: usize, n: f64, m: &GibbsModel) -> f64 {
    let a = m.alphabet();
    counts
        .iter()
        .map(|&(code, c)| {
            let f = c as f64 / n;
            f * (math::ln(f) - m.log_cylinder(&a.decode(code as usize, k)))
        })
        .sum()
}

/// `Δ̂_k(x) = −H_k(𝓔_k|μ) + H_{k−1}(𝓔_{k−1}|μ)`.
///
/// Also evaluated through its defining sum
/// `−Σ 𝓔_k ln(𝓔_k/𝓔_{k−1}) + Σ 𝓔_k ln(μ[a₀^{k−1}]/μ[a₁^{k−1}])`; the two
/// agree only because the empirical family is consistent and locally
/// shift-invariant, so a disagreement is reported as an identity error.
pub fn delta_hat(x: &SymbolSequence, k: usize, m: &GibbsModel) -> Result<f64> {
    let d = EmpiricalBlockDistribution::new(x, k)?;
    delta_hat_from(&d, m)
}

pub(crate) fn delta_hat_from(d: &EmpiricalBlockDistribution, m: &GibbsModel) -> Result<f64> {
    let k = d.k();
    if k < 2 {
        return Err(invalid!("Δ̂_k needs k ≥ 2"));
    }
    if d.alphabet() != m.alphabet() {
        return Err(invalid!("sample and model use different alphabets"));
    }
    let n = d.n() as f64;
    let a = m.alphabet();
    let asz = a.size() as u64;
    let prefix_counts = d.marginal_counts(false);

    let via_relative = -relative_from_counts(d.atoms(), k, n, m) + relative_from_counts(&prefix_counts, k - 1, n, m);

    let prefix_count = |code: u64| {
        let idx = prefix_counts
            .binary_search_by_key(&code, |&(c, _)| c)
            .expect("prefix of an atom is an atom");
        prefix_counts[idx].1 as f64
    };
    let mut definitional = 0.0;
    for &(code, c) in d.atoms() {
        let f = c as f64 / n;
        let w = a.decode(code as usize, k);
        let conditional = math::ln(c as f64 / prefix_count(code / asz));
        definitional += -f * conditional + f * (m.log_cylinder(&w) - m.log_cylinder(&w[1..]));
    }

    if (via_relative - definitional).abs() > DELTA_HAT_TOL {
        return Err(Error::Identity(alloc::format!(
            "Δ̂_{k}: relative-entropy form {via_relative} vs defining sum {definitional}"
        )));
    }
    Ok(via_relative)
}

/// `φ_k(w) = ln μ([w₀^{k−1}]) − ln μ([w₁^{k−1}])`, `|w| = k ≥ 2`.
pub fn phi_k_value(m: &GibbsModel, w: &Word) -> Result<f64> {
    if w.len() < 2 {
        return Err(invalid!("φ_k needs a word of length at least 2"));
    }
    if w.alphabet() != m.alphabet() {
        return Err(invalid!("word alphabet does not match the model"));
    }
    Ok(m.log_cylinder(w.symbols()) - m.log_cylinder(&w.symbols()[1..]))
}

/// `sup |φ_k − φ̄|` over all points, `φ̄` the normalized potential.
///
/// `φ_k` reads `k` coordinates and `φ̄` reads `r+1`; words of length
/// `max(k, r+1)` cover every combination.
pub fn phi_k_deviation(m: &GibbsModel, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(invalid!("φ_k needs k ≥ 2"));
    }
    let a = m.alphabet();
    let r = m.range();
    let len = k.max(r + 1);
    let count = a
        .block_count(len)
        .filter(|&c| c <= 1 << 24)
        .ok_or_else(|| invalid!("|A|^{len} words exceed the enumeration budget"))?;
    let normalized = m.normalized_potential();
    let mut sup: f64 = 0.0;
    let mut w: Vec<Symbol>;
    for code in 0..count {
        w = a.decode(code, len);
        let phi_k = m.log_cylinder(&w[..k]) - m.log_cylinder(&w[1..k]);
        sup = sup.max((phi_k - normalized.value(&w[..=r])).abs());
    }
    Ok(sup)
}

/// Bound on `‖φ̄ − φ_k‖_∞`: `|φ̄|_θ θ^k`.
pub fn remainder_bound(m: &GibbsModel, k: usize) -> f64 {
    m.normalized_seminorm() * math::powi(m.potential().theta(), k as i32)
}

/// The terms of `ĥ_k = (1/n)Σ −(φ−P)(σʲx̃) + Δ̂_k + remainder`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Decomposition {
    pub k: usize,
    pub conditional: f64,
    /// `−(1/n) Σ_j (φ − P)(σʲx̃)` on the periodic extension.
    pub ergodic_term: f64,
    pub delta_hat: f64,
    pub residual: f64,
    pub bound: f64,
}

/// Evaluate every term of the decomposition. Errors if the remainder
/// exceeds `|φ̄|_θ θ^k` (plus rounding slack).
pub fn decomposition(x: &SymbolSequence, k: usize, m: &GibbsModel) -> Result<Decomposition> {
    if k < 2 {
        return Err(invalid!("the decomposition needs k ≥ 2"));
    }
    let d = EmpiricalBlockDistribution::new(x, k)?;
    let conditional = conditional_from(&d);
    let delta = delta_hat_from(&d, m)?;
    let ergodic_term = -(m.potential().periodic_birkhoff_average(x)? - m.pressure());
    let residual = conditional - ergodic_term - delta;
    let bound = remainder_bound(m, k);
    if residual.abs() > bound + RESIDUAL_SLACK {
        return Err(Error::Identity(alloc::format!(
            "decomposition remainder {residual:e} exceeds |φ̄|_θ θ^{k} = {bound:e}"
        )));
    }
    Ok(Decomposition { k, conditional, ergodic_term, delta_hat: delta, residual, bound })
}

/// `ĥ_k − ergodic term − Δ̂_k`.
pub fn decomposition_residual(x: &SymbolSequence, k: usize, m: &GibbsModel) -> Result<f64> {
    decomposition(x, k, m).map(|d| d.residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::Potential;
    use crate::shift::{Alphabet, MetricParams};
    use alloc::vec;

    fn seq(s: &str) -> SymbolSequence {
        SymbolSequence::parse(Alphabet::binary(), s).unwrap()
    }

    fn uniform() -> GibbsModel {
        GibbsModel::build(Potential::uniform(Alphabet::binary(), MetricParams::default()).unwrap()).unwrap()
    }

    fn q_chain() -> GibbsModel {
        let p = Potential::from_transition_matrix(&[vec![0.9, 0.1], vec![0.2, 0.8]], MetricParams::default()).unwrap();
        GibbsModel::build(p).unwrap()
    }

    #[test]
    fn block_entropy_cases() {
        let ln2 = core::f64::consts::LN_2;
        let d = EmpiricalBlockDistribution::new(&seq("0101"), 2).unwrap();
        assert!((block_entropy(&d) - ln2).abs() < 1e-15);
        let point = EmpiricalBlockDistribution::new(&seq("1111"), 2).unwrap();
        assert_eq!(block_entropy(&point), 0.0);
        // De Bruijn cycle 0011 covers each 2-block once.
        let uni = EmpiricalBlockDistribution::new(&seq("0011"), 2).unwrap();
        assert!((block_entropy(&uni) - 2.0 * ln2).abs() < 1e-15);
    }

    #[test]
    fn conditional_entropy_cases() {
        let ln2 = core::f64::consts::LN_2;
        assert!(conditional_entropy(&seq("0101"), 2).unwrap().abs() < 1e-15);
        assert!((conditional_entropy(&seq("0110"), 2).unwrap() - ln2).abs() < 1e-15);
        assert_eq!(conditional_entropy(&seq("0000000"), 3).unwrap(), 0.0);
        assert!((conditional_entropy(&seq("0110"), 1).unwrap() - ln2).abs() < 1e-15);
        assert!(conditional_entropy(&seq("01"), 3).is_err());
    }

    #[test]
    fn relative_entropy_cases() {
        let m = uniform();
        let d = EmpiricalBlockDistribution::new(&seq("0000"), 2).unwrap();
        assert!((relative_block_entropy(&d, &m).unwrap() - math::ln(4.0)).abs() < 1e-14);
        let own = EmpiricalBlockDistribution::new(&seq("0011"), 2).unwrap();
        assert!(relative_block_entropy(&own, &m).unwrap().abs() < 1e-14);
    }

    #[test]
    fn delta_hat_vanishes_on_matching_marginals() {
        let m = uniform();
        // 00010111 is a de Bruijn cycle: every 3-block once, every 2-block twice.
        assert!(delta_hat(&seq("00010111"), 3, &m).unwrap().abs() < 1e-14);
    }

    #[test]
    fn phi_k_cases() {
        let u = uniform();
        let w = Word::parse(Alphabet::binary(), "01101").unwrap();
        assert!((phi_k_value(&u, &w).unwrap() + core::f64::consts::LN_2).abs() < 1e-14);
        let q = q_chain();
        let zeros = Word::parse(Alphabet::binary(), "0000").unwrap();
        assert!((phi_k_value(&q, &zeros).unwrap() - math::ln(0.9)).abs() < 1e-12);
        for k in 2..=8 {
            assert!(phi_k_deviation(&q, k).unwrap() < 1e-12);
        }
    }

    #[test]
    fn decomposition_on_uniform_is_exact() {
        let m = uniform();
        let x = m.sample_path(5000, 9).unwrap();
        for k in 2..=6 {
            assert!(decomposition_residual(&x, k, &m).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_on_q_chain() {
        let m = q_chain();
        let x = m.sample_path(20_000, 4).unwrap();
        let dec = decomposition(&x, 8, &m).unwrap();
        assert!(dec.residual.abs() <= remainder_bound(&m, 8) + RESIDUAL_SLACK);
        assert!((dec.conditional - dec.ergodic_term - dec.delta_hat - dec.residual).abs() < 1e-15);
    }
}
