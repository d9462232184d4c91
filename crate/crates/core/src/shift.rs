//! Symbolic primitives on the one-sided full shift `A^ℕ`.
//!
//! Symbols are dense integers `0..|A|`. Finite blocks are indexed
//! big-endian: the block `a₀a₁…a_{k−1}` has code `Σ aᵢ |A|^{k−1−i}`, so the
//! first symbol is the most significant digit. Every table in the crate uses
//! this convention.
//!
//! Text form: for alphabets with at most ten symbols a word is written as
//! its digits with no separator (`"0110"`); for larger alphabets the
//! indices are separated by commas (`"3,11,0"`).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Result};
use crate::math;

pub type Symbol = u8;

/// A finite alphabet `{0, …, size−1}` with `2 ≤ size ≤ 256`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if !(2..=256).contains(&size) {
            return Err(invalid!("alphabet size must be in 2..=256, got {size}"));
        }
        Ok(Self { size })
    }

    pub const fn binary() -> Self {
        Self { size: 2 }
    }

    #[inline]
    pub fn size(self) -> usize {
        self.size
    }

    #[inline]
    pub fn contains(self, s: Symbol) -> bool {
        (s as usize) < self.size
    }

    /// `ln |A|`.
    pub fn log_size(self) -> f64 {
        math::ln(self.size as f64)
    }

    /// Number of blocks of length `k`, if it fits in `usize`.
    pub fn block_count(self, k: usize) -> Option<usize> {
        math::checked_pow(self.size, k)
    }

    fn check(self, symbols: &[Symbol]) -> Result<()> {
        match symbols.iter().position(|&s| !self.contains(s)) {
            Some(i) => Err(invalid!(
                "symbol {} at position {i} is outside an alphabet of size {}",
                symbols[i],
                self.size
            )),
            None => Ok(()),
        }
    }

    fn parse_symbols(self, text: &str) -> Result<Vec<Symbol>> {
        let text = text.trim();
        let symbols: Vec<Symbol> = if self.size <= 10 && !text.contains(',') {
            text.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as Symbol)
                        .ok_or_else(|| invalid!("unexpected character {c:?} in word {text:?}"))
                })
                .collect::<Result<_>>()?
        } else {
            text.split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<u16>()
                        .ok()
                        .filter(|&v| v < 256)
                        .map(|v| v as Symbol)
                        .ok_or_else(|| invalid!("bad symbol {tok:?} in word {text:?}"))
                })
                .collect::<Result<_>>()?
        };
        if symbols.is_empty() {
            return Err(invalid!("empty word"));
        }
        self.check(&symbols)?;
        Ok(symbols)
    }

    pub(crate) fn write_symbols(self, f: &mut fmt::Formatter<'_>, symbols: &[Symbol]) -> fmt::Result {
        if self.size <= 10 {
            for s in symbols {
                write!(f, "{s}")?;
            }
        } else {
            for (i, s) in symbols.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }

    /// Code of a block (big-endian).
    #[inline]
    pub fn encode(self, block: &[Symbol]) -> usize {
        block.iter().fold(0usize, |acc, &s| acc * self.size + s as usize)
    }

    /// Inverse of [`Alphabet::encode`] for blocks of length `k`.
    pub fn decode(self, mut code: usize, k: usize) -> Vec<Symbol> {
        let mut out = alloc::vec![0; k];
        for slot in out.iter_mut().rev() {
            *slot = (code % self.size) as Symbol;
            code /= self.size;
        }
        out
    }

    /// Text form of a block, following the module's formatting rule.
    pub fn format_block(self, block: &[Symbol]) -> String {
        struct Show<'a>(Alphabet, &'a [Symbol]);
        impl fmt::Display for Show<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.write_symbols(f, self.1)
            }
        }
        alloc::format!("{}", Show(self, block))
    }

    /// Parse one block of exactly `k` symbols.
    pub fn parse_block(self, text: &str, k: usize) -> Result<Vec<Symbol>> {
        let symbols = self.parse_symbols(text)?;
        if symbols.len() != k {
            return Err(invalid!("block {text:?} has length {}, expected {k}", symbols.len()));
        }
        Ok(symbols)
    }
}

/// A nonempty finite word (cylinder base, pattern).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet: Alphabet,
    symbols: Vec<Symbol>,
}

impl Word {
    pub fn new(alphabet: Alphabet, symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(invalid!("a word has length at least 1"));
        }
        alphabet.check(&symbols)?;
        Ok(Self { alphabet, symbols })
    }

    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self> {
        Ok(Self { alphabet, symbols: alphabet.parse_symbols(text)? })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `a₀…a_{k−1}b`.
    pub fn extended(&self, b: Symbol) -> Result<Self> {
        let mut symbols = self.symbols.clone();
        symbols.push(b);
        Self::new(self.alphabet, symbols)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.alphabet.write_symbols(f, &self.symbols)
    }
}

/// A finite sample `x₀…x_{n−1}`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolSequence {
    alphabet: Alphabet,
    symbols: Vec<Symbol>,
}

impl SymbolSequence {
    pub fn new(alphabet: Alphabet, symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(invalid!("a sample has length at least 1"));
        }
        alphabet.check(&symbols)?;
        Ok(Self { alphabet, symbols })
    }

    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self> {
        Ok(Self { alphabet, symbols: alphabet.parse_symbols(text)? })
    }

    pub(crate) fn from_trusted(alphabet: Alphabet, symbols: Vec<Symbol>) -> Self {
        debug_assert!(!symbols.is_empty() && symbols.iter().all(|&s| alphabet.contains(s)));
        Self { alphabet, symbols }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `x̃_j = x_{j mod n}`: the periodic point of period `n` built from the
    /// sample. Negative indices wrap as well.
    #[inline]
    pub fn periodic_index(&self, j: i64) -> Symbol {
        let n = self.symbols.len() as i64;
        self.symbols[j.rem_euclid(n) as usize]
    }

    /// The first `k` symbols as a word.
    pub fn prefix(&self, k: usize) -> Result<Word> {
        if k == 0 || k > self.len() {
            return Err(invalid!("prefix length {k} out of range for a sample of length {}", self.len()));
        }
        Word::new(self.alphabet, self.symbols[..k].to_vec())
    }
}

impl fmt::Display for SymbolSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.alphabet.write_symbols(f, &self.symbols)
    }
}

/// The metric parameter `θ ∈ (0,1)`. Defaults to `1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MetricParams {
    theta: f64,
}

impl MetricParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(invalid!("theta must lie in (0,1), got {theta}"));
        }
        Ok(Self { theta })
    }

    #[inline]
    pub fn theta(self) -> f64 {
        self.theta
    }
}

impl Default for MetricParams {
    fn default() -> Self {
        Self { theta: 0.5 }
    }
}

/// `d_θ(x, y) = θ^N`, `N` the length of the longest common prefix.
///
/// Finite sequences are compared on their common length; sequences that
/// agree on all compared coordinates are at distance 0.
pub fn d_theta(x: &SymbolSequence, y: &SymbolSequence, p: MetricParams) -> Result<f64> {
    if x.alphabet != y.alphabet {
        return Err(invalid!(
            "sequences over alphabets of size {} and {}",
            x.alphabet.size(),
            y.alphabet.size()
        ));
    }
    let common = x.symbols.iter().zip(&y.symbols).take_while(|(a, b)| a == b).count();
    if common == x.len().min(y.len()) {
        return Ok(0.0);
    }
    Ok(math::powi(p.theta(), common as i32))
}

/// A real function of `x₀…x_r` given as a table over all `(r+1)`-blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFunction {
    alphabet: Alphabet,
    range: usize,
    values: Vec<f64>,
}

impl BlockFunction {
    /// `values[code]` is the value on the block with that big-endian code.
    pub fn new(alphabet: Alphabet, range: usize, values: Vec<f64>) -> Result<Self> {
        let expected = alphabet
            .block_count(range + 1)
            .filter(|&c| c <= 1 << 26)
            .ok_or_else(|| invalid!("range {range} is too large for alphabet size {}", alphabet.size()))?;
        if values.len() != expected {
            return Err(invalid!("table has {} entries, expected |A|^(r+1) = {expected}", values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid!(
                "non-finite value on block {}",
                alphabet.format_block(&alphabet.decode(i, range + 1))
            ));
        }
        Ok(Self { alphabet, range, values })
    }

    pub fn from_fn(alphabet: Alphabet, range: usize, mut f: impl FnMut(&[Symbol]) -> f64) -> Result<Self> {
        let count = alphabet
            .block_count(range + 1)
            .filter(|&c| c <= 1 << 26)
            .ok_or_else(|| invalid!("range {range} is too large for alphabet size {}", alphabet.size()))?;
        let values = (0..count).map(|code| f(&alphabet.decode(code, range + 1))).collect();
        Self::new(alphabet, range, values)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value_at(&self, code: usize) -> f64 {
        self.values[code]
    }

    /// Value on a block of length `range + 1`.
    pub fn value(&self, block: &[Symbol]) -> f64 {
        debug_assert_eq!(block.len(), self.range + 1);
        self.values[self.alphabet.encode(block)]
    }

    /// `var_m(f) = sup |f(x) − f(y)|` over `x, y` agreeing on coordinates
    /// `0..=m`. Exact: blocks are grouped by their first `m+1` symbols.
    pub fn var_m(&self, m: usize) -> f64 {
        if m >= self.range {
            return 0.0;
        }
        // Codes sharing the first m+1 symbols form a contiguous run.
        let group = self.alphabet.block_count(self.range - m).expect("checked at construction");
        self.values
            .chunks(group)
            .map(|chunk| {
                let (lo, hi) = chunk
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// `|f|_θ = max_m var_m(f)/θ^m` (the sup is attained at `m < range`).
    pub fn lipschitz_seminorm(&self, p: MetricParams) -> f64 {
        (0..self.range)
            .map(|m| self.var_m(m) / math::powi(p.theta(), m as i32))
            .fold(0.0, f64::max)
    }

    /// `c·f`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.alphabet, self.range, self.values.iter().map(|v| c * v).collect())
    }

    /// `(1/n) Σ_j f(x̃_j … x̃_{j+r})` over all `n` windows of the periodic
    /// extension of `x`.
    pub fn periodic_average(&self, x: &SymbolSequence) -> Result<f64> {
        if x.alphabet() != self.alphabet {
            return Err(invalid!("sample and function use different alphabets"));
        }
        let n = x.len();
        let a = self.alphabet.size();
        let top = self.alphabet.block_count(self.range).expect("checked at construction");
        let mut code = 0usize;
        for i in 0..=self.range {
            code = code * a + x.periodic_index(i as i64) as usize;
        }
        let mut sum = 0.0;
        for j in 0..n {
            sum += self.values[code];
            code = (code % top) * a + x.periodic_index((j + self.range + 1) as i64) as usize;
        }
        Ok(sum / n as f64)
    }

    /// `(1/(n−r)) Σ_j f(x_j … x_{j+r})` over the complete windows of `x`.
    pub fn window_average(&self, x: &SymbolSequence) -> Result<f64> {
        if x.alphabet() != self.alphabet {
            return Err(invalid!("sample and function use different alphabets"));
        }
        let n = x.len();
        if n < self.range + 1 {
            return Err(invalid!("sample of length {n} is shorter than range + 1 = {}", self.range + 1));
        }
        let a = self.alphabet.size();
        let top = self.alphabet.block_count(self.range).expect("checked at construction");
        let s = x.symbols();
        let mut code = self.alphabet.encode(&s[..self.range]);
        let mut sum = 0.0;
        for &next in &s[self.range..] {
            code = (code % top) * a + next as usize;
            sum += self.values[code];
        }
        Ok(sum / (n - self.range) as f64)
    }
}
