//! Exhaustive oscillation of the block entropy under one-symbol changes.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;
use crate::shift::Alphabet;

/// Largest `|A|^n` enumerated.
pub const OSCILLATION_BUDGET: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OscillationReport {
    pub n: usize,
    pub k: usize,
    pub alphabet_size: usize,
    /// `max |Ĥ_k(s) − Ĥ_k(s')|` over samples `s` and one-symbol changes `s'`.
    pub exact_max_delta: f64,
    /// `2k|A|^k ln n / n`.
    pub bound: f64,
}

impl OscillationReport {
    pub fn holds(&self) -> bool {
        self.exact_max_delta <= self.bound
    }
}

/// `2k|A|^k ln n / n`.
pub fn oscillation_bound(n: usize, k: usize, alphabet_size: usize) -> f64 {
    2.0 * k as f64 * math::powi(alphabet_size as f64, k as i32) * math::ln(n as f64) / n as f64
}

/// `Ĥ_k` of every sample of length `n`, indexed by the sample's code.
fn all_entropies(n: usize, k: usize, asz: usize, total: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(total);
    let mut symbols = vec![0usize; n];
    let mut codes = vec![0usize; n];
    let top = math::checked_pow(asz, k - 1).expect("within budget");
    let ln_n = math::ln(n as f64);
    for code in 0..total {
        let mut c = code;
        for s in symbols.iter_mut().rev() {
            *s = c % asz;
            c /= asz;
        }
        let mut w = symbols[..k].iter().fold(0usize, |a, &s| a * asz + s);
        for (j, slot) in codes.iter_mut().enumerate() {
            *slot = w;
            w = (w % top) * asz + symbols[(j + k) % n];
        }
        codes.sort_unstable();
        let mut s = 0.0;
        let mut run = 1usize;
        for j in 1..=n {
            if j < n && codes[j] == codes[j - 1] {
                run += 1;
            } else {
                s += math::xlogx(run as f64);
                run = 1;
            }
        }
        out.push(ln_n - s / n as f64);
    }
    out
}

/// Exhaustive `max_j δ_j(Ĥ_k)` on samples of length `n` over `a`.
pub fn oscillation_oracle(n: usize, k: usize, a: Alphabet) -> Result<OscillationReport> {
    let asz = a.size();
    if n == 0 || k == 0 || k > n {
        return Err(invalid!("need 1 ≤ k ≤ n, got n = {n}, k = {k}"));
    }
    let total = a
        .block_count(n)
        .filter(|&t| t <= OSCILLATION_BUDGET)
        .ok_or_else(|| invalid!("|A|^n exceeds the enumeration budget of 2^20 samples"))?;
    let h = all_entropies(n, k, asz, total);
    let mut max_delta: f64 = 0.0;
    for (code, &hs) in h.iter().enumerate() {
        let mut place = 1usize;
        for _ in 0..n {
            let digit = (code / place) % asz;
            // Each unordered pair is visited once: only substitute upwards.
            for b in digit + 1..asz {
                let other = code + (b - digit) * place;
                max_delta = max_delta.max((hs - h[other]).abs());
            }
            place *= asz;
        }
    }
    Ok(OscillationReport { n, k, alphabet_size: asz, exact_max_delta: max_delta, bound: oscillation_bound(n, k, asz) })
}

/// Reports for every `1 ≤ k ≤ n ≤ n_max` within the enumeration budget.
pub fn oscillation_sweep(n_max: usize, a: Alphabet) -> Result<Vec<OscillationReport>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        if a.block_count(n).filter(|&t| t <= OSCILLATION_BUDGET).is_none() {
            break;
        }
        for k in 1..=n {
            out.push(oscillation_oracle(n, k, a)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{block_entropy, EmpiricalBlockDistribution};
    use crate::shift::SymbolSequence;

    #[test]
    fn bound_value() {
        assert!((oscillation_bound(4, 2, 2) - 4.0 * 4f64.ln()).abs() < 1e-12);
        assert!((oscillation_bound(4, 2, 2) - 5.545177444479562).abs() < 1e-12);
    }

    #[test]
    fn small_case_by_hand() {
        // n = 2, k = 1: "00" → 0, "01" → ln 2; one change moves between them.
        let r = oscillation_oracle(2, 1, Alphabet::binary()).unwrap();
        assert!((r.exact_max_delta - 2f64.ln()).abs() < 1e-12);
        assert!(r.holds());
        assert!((r.bound - 2f64.ln() * 2.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_matches_estimator() {
        let (n, k) = (7, 3);
        let h = all_entropies(n, k, 2, 1 << n);
        for code in [0usize, 5, 77, 127] {
            let s: alloc::string::String =
                (0..n).map(|i| if (code >> (n - 1 - i)) & 1 == 1 { '1' } else { '0' }).collect();
            let x = SymbolSequence::parse(Alphabet::binary(), &s).unwrap();
            let want = block_entropy(&EmpiricalBlockDistribution::new(&x, k).unwrap());
            assert!((h[code] - want).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn full_block_case_respects_bound() {
        let r = oscillation_oracle(6, 6, Alphabet::binary()).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn ternary_sweep() {
        for r in oscillation_sweep(5, Alphabet::new(3).unwrap()).unwrap() {
            assert!(r.holds(), "{r:?}");
        }
    }

    #[test]
    fn budget_enforced() {
        assert!(oscillation_oracle(21, 2, Alphabet::binary()).is_err());
        assert!(oscillation_oracle(4, 5, Alphabet::binary()).is_err());
    }
}
