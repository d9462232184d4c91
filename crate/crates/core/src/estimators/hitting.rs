//! First occurrence of a pattern in a sampled stream.
//!
//! `W_n(x, y) = inf{ j ≥ 1 : y_j … y_{j+n−1} = x₀ … x_{n−1} }`. The stream is
//! generated lazily and scanned with a failure-function automaton, so the
//! cost is one table lookup per symbol and no memory beyond the pattern.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::gibbs::GibbsModel;
use crate::math;
use crate::rng::{self, RngCore};
use crate::shift::{Alphabet, Symbol, Word};

/// Largest horizon ever used by default.
pub const HORIZON_CAP: u64 = 1_000_000_000;

/// Outcome of a bounded search: the first index, or saturation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HittingResult {
    value: Option<u64>,
    horizon: u64,
}

impl HittingResult {
    pub fn hit(value: u64, horizon: u64) -> Self {
        debug_assert!(value >= 1 && value <= horizon);
        Self { value: Some(value), horizon }
    }

    pub fn saturated(horizon: u64) -> Self {
        Self { value: None, horizon }
    }

    pub fn value(&self) -> Option<u64> {
        self.value
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn is_saturated(&self) -> bool {
        self.value.is_none()
    }
}

/// Deterministic automaton recognising one pattern (Knuth–Morris–Pratt with
/// the failure links compiled into a full transition table).
#[derive(Debug, Clone)]
pub struct PatternAutomaton {
    alphabet: Alphabet,
    len: usize,
    /// `(len+1) × |A|`; state = length of the longest pattern prefix that is
    /// a suffix of the text read so far.
    table: Vec<u32>,
}

impl PatternAutomaton {
    pub fn new(pattern: &Word) -> Self {
        let p = pattern.symbols();
        let a = pattern.alphabet();
        let asz = a.size();
        let len = p.len();
        let mut failure = vec![0usize; len + 1];
        let mut table = vec![0u32; (len + 1) * asz];
        table[p[0] as usize] = 1;
        for q in 1..=len {
            for b in 0..asz {
                table[q * asz + b] = if q < len && p[q] as usize == b {
                    (q + 1) as u32
                } else {
                    table[failure[q] * asz + b]
                };
            }
            if q < len {
                failure[q + 1] = table[failure[q] * asz + p[q] as usize] as usize;
            }
        }
        Self { alphabet: a, len, table }
    }

    pub fn pattern_len(&self) -> usize {
        self.len
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    pub fn step(&self, state: u32, b: Symbol) -> u32 {
        self.table[state as usize * self.alphabet.size() + b as usize]
    }

    #[inline]
    pub fn is_match(&self, state: u32) -> bool {
        state as usize == self.len
    }

    /// Scan a stream `y₀ y₁ …` for the first match starting at `j ≥ 1`,
    /// giving up once `j` would exceed `horizon`.
    pub fn first_hit(&self, mut stream: impl FnMut() -> Symbol, horizon: u64) -> HittingResult {
        let _y0 = stream();
        let mut state = 0u32;
        let n = self.len as u64;
        // A match ending at stream index e starts at j = e − n + 1.
        let last = horizon + n - 1;
        let mut e = 1u64;
        while e <= last {
            state = self.step(state, stream());
            if self.is_match(state) {
                return HittingResult::hit(e + 1 - n, horizon);
            }
            e += 1;
        }
        HittingResult::saturated(horizon)
    }
}

/// `W_n` of `pattern` in a fresh stationary stream from `m` seeded by `seed`.
pub fn hitting_time(pattern: &Word, m: &GibbsModel, seed: u64, horizon: u64) -> Result<HittingResult> {
    hitting_time_with(pattern, m, &mut rng::from_seed(seed), horizon)
}

pub fn hitting_time_with<R: RngCore>(
    pattern: &Word,
    m: &GibbsModel,
    rng: &mut R,
    horizon: u64,
) -> Result<HittingResult> {
    if horizon == 0 {
        return Err(invalid!("horizon must be at least 1"));
    }
    if pattern.alphabet() != m.alphabet() {
        return Err(invalid!("pattern alphabet does not match the model"));
    }
    let automaton = PatternAutomaton::new(pattern);
    let mut sampler = m.sampler(rng);
    Ok(automaton.first_hit(|| sampler.next_symbol(), horizon))
}

/// `(1/n) ln W_n`.
pub fn hitting_rate(pattern_len: usize, w: &HittingResult) -> Result<f64> {
    if pattern_len == 0 {
        return Err(invalid!("pattern length must be positive"));
    }
    match w.value() {
        Some(v) => Ok(math::ln(v as f64) / pattern_len as f64),
        None => Err(invalid!("hitting time saturated at horizon {}", w.horizon())),
    }
}

/// `min(e^{n(h+3)}, 10⁹)`, rounded up.
pub fn default_horizon(pattern_len: usize, entropy: f64) -> u64 {
    let e = pattern_len as f64 * (entropy + 3.0);
    if e >= math::ln(HORIZON_CAP as f64) {
        HORIZON_CAP
    } else {
        (math::ceil(math::exp(e)) as u64).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn word(s: &str) -> Word {
        Word::parse(Alphabet::binary(), s).unwrap()
    }

    fn run(pattern: &str, stream: &str, horizon: u64) -> HittingResult {
        let w = word(pattern);
        let mut it = stream.bytes().map(|c| c - b'0').chain(core::iter::repeat(1));
        PatternAutomaton::new(&w).first_hit(|| it.next().unwrap(), horizon)
    }

    fn naive(pattern: &[Symbol], stream: &[Symbol], horizon: u64) -> Option<u64> {
        let n = pattern.len();
        (1..=horizon as usize)
            .take_while(|j| j + n <= stream.len())
            .find(|&j| &stream[j..j + n] == pattern)
            .map(|j| j as u64)
    }

    #[test]
    fn hit_at_one() {
        assert_eq!(run("00", "0000", 10).value(), Some(1));
    }

    #[test]
    fn window_at_zero_does_not_count() {
        // "01" sits at j = 0 and next at j = 3.
        assert_eq!(run("01", "011011", 10).value(), Some(3));
        assert_eq!(run("01", "1101011", 10).value(), Some(2));
    }

    #[test]
    fn saturation() {
        let r = run("000", "0111111111", 5);
        assert!(r.is_saturated());
        assert!(hitting_rate(3, &r).is_err());
    }

    #[test]
    fn rate_of_one_is_zero() {
        assert_eq!(hitting_rate(5, &HittingResult::hit(1, 10)).unwrap(), 0.0);
    }

    #[test]
    fn automaton_matches_naive_scan_on_overlapping_patterns() {
        let stream: Vec<Symbol> = "0100100010101101001001000111010"
            .bytes()
            .map(|c| c - b'0')
            .collect();
        for p in ["0", "1", "00", "010", "0100", "1010", "0010001", "111"] {
            let w = word(p);
            let mut it = stream.iter().copied().chain(core::iter::repeat(1));
            let got = PatternAutomaton::new(&w).first_hit(|| it.next().unwrap(), 20);
            let want = naive(w.symbols(), &stream, 20);
            if let Some(v) = want {
                assert_eq!(got.value(), Some(v), "pattern {p}");
            }
        }
    }

    #[test]
    fn default_horizon_caps() {
        assert_eq!(default_horizon(30, 0.5), HORIZON_CAP);
        assert_eq!(default_horizon(1, 0.0), 21);
    }
}
