use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;
use crate::shift::{Alphabet, Symbol, SymbolSequence};

/// Dense counting is used while `|A|^k` stays below this many cells.
const DENSE_LIMIT: usize = 1 << 22;

/// The empirical `k`-block measure of a sample, counted on its periodic
/// extension: `freq(w) = #{0 ≤ j < n : x̃_j … x̃_{j+k−1} = w} / n`.
///
/// Counting `n` windows on the periodic point makes the family exactly
/// consistent in `k` and locally shift-invariant, and its counts sum to
/// exactly `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalBlockDistribution {
    alphabet: Alphabet,
    k: usize,
    n: usize,
    /// `(code, count)` sorted by code, counts > 0.
    atoms: Vec<(u64, u64)>,
}

impl EmpiricalBlockDistribution {
    pub fn new(x: &SymbolSequence, k: usize) -> Result<Self> {
        let n = x.len();
        let alphabet = x.alphabet();
        if k == 0 || k > n {
            return Err(invalid!("block length k = {k} must satisfy 1 ≤ k ≤ n = {n}"));
        }
        let asz = alphabet.size() as u64;
        // Codes must fit in u64: |A|^k ≤ 2^63.
        let top = (0..k - 1)
            .try_fold(1u64, |acc, _| acc.checked_mul(asz))
            .filter(|t| t.checked_mul(asz).is_some_and(|c| c <= 1 << 63))
            .ok_or_else(|| invalid!("|A|^k overflows block codes (k = {k})"))?;

        let symbols = x.symbols();
        let at = |j: usize| symbols[j % n] as u64;
        let mut code = (0..k).fold(0u64, |acc, i| acc * asz + at(i));
        let mut codes = Vec::with_capacity(n);
        for j in 0..n {
            codes.push(code);
            code = (code % top) * asz + at(j + k);
        }

        let cells = alphabet.block_count(k).filter(|&c| c <= DENSE_LIMIT && c <= (4 * n).max(1024));
        let atoms = match cells {
            Some(cells) => {
                let mut counts = vec![0u64; cells];
                for c in codes {
                    counts[c as usize] += 1;
                }
                counts
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, c)| c > 0)
                    .map(|(i, c)| (i as u64, c))
                    .collect()
            }
            _ => {
                codes.sort_unstable();
                let mut atoms: Vec<(u64, u64)> = Vec::new();
                for c in codes {
                    match atoms.last_mut() {
                        Some((last, count)) if *last == c => *count += 1,
                        _ => atoms.push((c, 1)),
                    }
                }
                atoms
            }
        };
        Ok(Self { alphabet, k, n, atoms })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct blocks seen.
    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    /// `(code, count)` pairs with positive count, sorted by code.
    pub fn atoms(&self) -> &[(u64, u64)] {
        &self.atoms
    }

    /// `(block, frequency)` pairs with positive frequency.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<Symbol>, f64)> + '_ {
        let n = self.n as f64;
        self.atoms
            .iter()
            .map(move |&(code, count)| (self.alphabet.decode(code as usize, self.k), count as f64 / n))
    }

    pub fn count_of_code(&self, code: u64) -> u64 {
        self.atoms
            .binary_search_by_key(&code, |&(c, _)| c)
            .map(|i| self.atoms[i].1)
            .unwrap_or(0)
    }

    pub fn count(&self, block: &[Symbol]) -> u64 {
        if block.len() != self.k {
            return 0;
        }
        let code = block.iter().fold(0u64, |acc, &s| acc * self.alphabet.size() as u64 + s as u64);
        self.count_of_code(code)
    }

    pub fn frequency(&self, block: &[Symbol]) -> f64 {
        self.count(block) as f64 / self.n as f64
    }

    /// Sum of all counts (always `n`).
    pub fn total_count(&self) -> u64 {
        self.atoms.iter().map(|&(_, c)| c).sum()
    }

    /// `H_k = −Σ f ln f`, computed as `ln n − (1/n) Σ c ln c`.
    pub fn entropy(&self) -> f64 {
        let n = self.n as f64;
        let s: f64 = self.atoms.iter().map(|&(_, c)| math::xlogx(c as f64)).sum();
        (math::ln(n) - s / n).max(0.0)
    }

    /// Counts of the `(k−1)`-blocks obtained by dropping the first symbol
    /// (`drop_first`) or the last one, as a sorted `(code, count)` list.
    pub fn marginal_counts(&self, drop_first: bool) -> Vec<(u64, u64)> {
        let asz = self.alphabet.size() as u64;
        let top = (0..self.k.saturating_sub(1)).fold(1u64, |acc, _| acc * asz);
        let mut out: Vec<(u64, u64)> = self
            .atoms
            .iter()
            .map(|&(code, c)| (if drop_first { code % top } else { code / asz }, c))
            .collect();
        out.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(out.len());
        for (code, c) in out {
            match merged.last_mut() {
                Some((last, count)) if *last == code => *count += c,
                _ => merged.push((code, c)),
            }
        }
        merged
    }
}
