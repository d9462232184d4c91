//! Gibbs measures of finite-range potentials.
//!
//! A potential of range `r` depends on `x₀…x_r`. Its transfer matrix acts on
//! the `|A|^r` states `s = a₀…a_{r−1}`:
//!
//! ```text
//! L[s, s'] = exp φ(s·b)      for s' = a₁…a_{r−1}b
//! ```
//!
//! With `λ` the Perron eigenvalue and `h`, `ℓ` the right and left Perron
//! vectors, the Gibbs measure is the stationary `r`-step Markov chain
//!
//! ```text
//! p(s → b) = exp φ(s·b) h(s') / (λ h(s)),    π(s) ∝ ℓ(s) h(s),
//! ```
//!
//! and the pressure is `P = ln λ`. Cylinder masses are exact products of
//! these quantities, which is what makes every estimator in the crate
//! checkable against ground truth.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::rng::{self, RngCore};
use crate::shift::{Alphabet, BlockFunction, MetricParams, Symbol, SymbolSequence, Word};

const POWER_TOL: f64 = 1e-13;
const POWER_MAX_ITER: usize = 1_000_000;
const ENTROPY_IDENTITY_TOL: f64 = 1e-9;
const STATIONARITY_TOL: f64 = 1e-10;
const MAX_STATES: usize = 1 << 20;

/// A finite-range potential together with its metric parameter.
///
/// Range-0 potentials (functions of one symbol) are stored lifted to range
/// 1 by ignoring the first coordinate: `φ(a, b) = g(b)`. Both define the same
/// i.i.d. measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    table: BlockFunction,
    metric: MetricParams,
}

impl Potential {
    /// `values[code]` is `φ` on the `(range+1)`-block with that code.
    pub fn new(alphabet: Alphabet, range: usize, values: Vec<f64>, metric: MetricParams) -> Result<Self> {
        let table = BlockFunction::new(alphabet, range, values)?;
        Ok(Self::from_table(table, metric))
    }

    pub fn from_fn(
        alphabet: Alphabet,
        range: usize,
        metric: MetricParams,
        f: impl FnMut(&[Symbol]) -> f64,
    ) -> Result<Self> {
        Ok(Self::from_table(BlockFunction::from_fn(alphabet, range, f)?, metric))
    }

    pub fn from_table(table: BlockFunction, metric: MetricParams) -> Self {
        let table = if table.range() == 0 {
            let a = table.alphabet();
            let values = (0..a.size() * a.size()).map(|code| table.value_at(code % a.size())).collect();
            BlockFunction::new(a, 1, values).expect("lifted table has the right shape")
        } else {
            table
        };
        Self { table, metric }
    }

    /// `φ(a, b) = ln Q(a, b)` for a row-stochastic matrix with positive
    /// entries. The Gibbs measure is the stationary Markov chain `Q`.
    pub fn from_transition_matrix(rows: &[Vec<f64>], metric: MetricParams) -> Result<Self> {
        let alphabet = Alphabet::new(rows.len())?;
        let mut values = Vec::with_capacity(rows.len() * rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != rows.len() {
                return Err(invalid!("row {i} has {} entries, expected {}", row.len(), rows.len()));
            }
            for &q in row {
                if !(q > 0.0) {
                    return Err(invalid!("transition probabilities must be positive (row {i})"));
                }
                values.push(math::ln(q));
            }
        }
        Self::new(alphabet, 1, values, metric)
    }

    /// The i.i.d. measure with the given symbol probabilities.
    pub fn bernoulli(probs: &[f64], metric: MetricParams) -> Result<Self> {
        let alphabet = Alphabet::new(probs.len())?;
        if probs.iter().any(|&p| !(p > 0.0)) {
            return Err(invalid!("symbol probabilities must be positive"));
        }
        Self::new(alphabet, 0, probs.iter().map(|&p| math::ln(p)).collect(), metric)
    }

    /// `φ ≡ −ln|A|`: the uniform Bernoulli measure.
    pub fn uniform(alphabet: Alphabet, metric: MetricParams) -> Result<Self> {
        let v = -alphabet.log_size();
        Self::new(alphabet, 0, vec![v; alphabet.size()], metric)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.table.alphabet()
    }

    pub fn range(&self) -> usize {
        self.table.range()
    }

    pub fn metric(&self) -> MetricParams {
        self.metric
    }

    pub fn theta(&self) -> f64 {
        self.metric.theta()
    }

    pub fn table(&self) -> &BlockFunction {
        &self.table
    }

    pub fn value(&self, block: &[Symbol]) -> f64 {
        self.table.value(block)
    }

    /// `|φ|_θ`.
    pub fn lipschitz_seminorm(&self) -> f64 {
        self.table.lipschitz_seminorm(self.metric)
    }

    /// `φ + c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        let values = self.table.values().iter().map(|v| v + c).collect();
        Self::new(self.alphabet(), self.range(), values, self.metric)
    }

    /// Ergodic average of `φ` over the complete windows of `x`:
    /// `(1/(n−r)) Σ_j φ(x_j…x_{j+r})`.
    pub fn birkhoff_average(&self, x: &SymbolSequence) -> Result<f64> {
        self.table.window_average(x)
    }

    /// Ergodic average over the `n` windows of the periodic extension of `x`.
    pub fn periodic_birkhoff_average(&self, x: &SymbolSequence) -> Result<f64> {
        self.table.periodic_average(x)
    }
}

/// Convergence data of the eigen-solver.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EigenDiagnostics {
    pub states: usize,
    pub right_iterations: usize,
    pub left_iterations: usize,
    /// `max_s |(Lh)(s) − λ h(s)| / max h`.
    pub eigen_residual: f64,
    /// `max_s |(πK)(s) − π(s)|`.
    pub stationarity_residual: f64,
}

/// Extremes of `μ([x₀^{m−1}]) / exp(−Pm + Σ_{k<m} φ(σᵏx))` over all
/// cylinders up to a depth, and over all continuations the potential sees.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CylinderMeasureReport {
    pub depth: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl CylinderMeasureReport {
    /// Smallest `C` with `C⁻¹ ≤ ratio ≤ C` on the enumerated cylinders.
    pub fn constant(&self) -> f64 {
        self.max_ratio.max(1.0 / self.min_ratio)
    }
}

/// The Gibbs measure of a finite-range potential, solved exactly.
#[derive(Debug, Clone)]
pub struct GibbsModel {
    potential: Potential,
    /// `ln |A|^r`-state count.
    states: usize,
    pressure: f64,
    right: Vec<f64>,
    left: Vec<f64>,
    stationary: Vec<f64>,
    /// Row-major `states × |A|`.
    kernel: Vec<f64>,
    log_kernel: Vec<f64>,
    kernel_thresholds: Vec<u64>,
    stationary_thresholds: Vec<u64>,
    normalized: BlockFunction,
    diagnostics: EigenDiagnostics,
}

impl GibbsModel {
    /// Solve the transfer matrix of `potential` by power iteration.
    pub fn build(potential: Potential) -> Result<Self> {
        let a = potential.alphabet();
        let asz = a.size();
        let r = potential.range();
        let states = a
            .block_count(r)
            .filter(|&s| s <= MAX_STATES)
            .ok_or_else(|| invalid!("|A|^r exceeds {MAX_STATES} states"))?;

        // Work with exp(φ − max φ) to stay clear of overflow; the shift is
        // added back to the pressure.
        let shift = potential.table.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = potential.table.values().iter().map(|v| math::exp(v - shift)).collect();
        let next = |s: usize, b: usize| (s * asz + b) % states;

        // Right vector: (Lh)(s) = Σ_b w(s·b) h(s').
        let apply_right = |v: &[f64], out: &mut [f64]| {
            for s in 0..states {
                let mut acc = 0.0;
                for b in 0..asz {
                    acc += weights[s * asz + b] * v[next(s, b)];
                }
                out[s] = acc;
            }
        };
        // Left vector: (ℓL)(s') = Σ_{s→s'} ℓ(s) w(s·b).
        let apply_left = |v: &[f64], out: &mut [f64]| {
            out.iter_mut().for_each(|o| *o = 0.0);
            for s in 0..states {
                for b in 0..asz {
                    out[next(s, b)] += v[s] * weights[s * asz + b];
                }
            }
        };

        let (right, lambda, right_iterations) = power_iterate(states, apply_right)?;
        let (left, _, left_iterations) = power_iterate(states, apply_left)?;
        if right.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Numerical("right Perron vector is not strictly positive".into()));
        }

        let mut scratch = vec![0.0; states];
        apply_right(&right, &mut scratch);
        let eigen_residual = scratch
            .iter()
            .zip(&right)
            .map(|(lh, h)| (lh - lambda * h).abs())
            .fold(0.0, f64::max);

        let mut kernel = vec![0.0; states * asz];
        for s in 0..states {
            let row = &mut kernel[s * asz..(s + 1) * asz];
            for (b, p) in row.iter_mut().enumerate() {
                *p = weights[s * asz + b] * right[next(s, b)] / (lambda * right[s]);
            }
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= total);
        }

        // π ∝ ℓh, then polished against the kernel actually used.
        let mut stationary: Vec<f64> = left.iter().zip(&right).map(|(l, h)| l * h).collect();
        normalize_sum(&mut stationary);
        let step = |pi: &[f64], out: &mut [f64]| {
            out.iter_mut().for_each(|o| *o = 0.0);
            for s in 0..states {
                for b in 0..asz {
                    out[next(s, b)] += pi[s] * kernel[s * asz + b];
                }
            }
        };
        for _ in 0..10_000 {
            step(&stationary, &mut scratch);
            normalize_sum(&mut scratch);
            let change = sup_diff(&scratch, &stationary);
            stationary.copy_from_slice(&scratch);
            if change < 1e-16 {
                break;
            }
        }
        step(&stationary, &mut scratch);
        let stationarity_residual = sup_diff(&scratch, &stationary);
        if !(stationarity_residual <= STATIONARITY_TOL) {
            return Err(Error::Numerical(alloc::format!(
                "stationary vector residual {stationarity_residual:e} exceeds {STATIONARITY_TOL:e}"
            )));
        }

        let log_kernel = kernel.iter().map(|&p| math::ln(p)).collect();
        let kernel_thresholds = kernel.chunks(asz).flat_map(rng::cumulative_thresholds).collect();
        let stationary_thresholds = rng::cumulative_thresholds(&stationary);

        let pressure = math::ln(lambda) + shift;

        // Normalized potential: φ̄(s·b) = ln(π(s) p(s→b) / π(s')).
        let normalized_values = (0..states * asz)
            .map(|code| {
                let (s, b) = (code / asz, code % asz);
                math::ln(stationary[s] * kernel[code] / stationary[next(s, b)])
            })
            .collect();
        let normalized = BlockFunction::new(a, r, normalized_values)?;

        Ok(Self {
            potential,
            states,
            pressure,
            right,
            left,
            stationary,
            kernel,
            log_kernel,
            kernel_thresholds,
            stationary_thresholds,
            normalized,
            diagnostics: EigenDiagnostics {
                states,
                right_iterations,
                left_iterations,
                eigen_residual,
                stationarity_residual,
            },
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn alphabet(&self) -> Alphabet {
        self.potential.alphabet()
    }

    pub fn range(&self) -> usize {
        self.potential.range()
    }

    /// Number of Markov states, `|A|^r`.
    pub fn state_count(&self) -> usize {
        self.states
    }

    /// Topological pressure `P = ln λ` of the raw potential.
    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    pub fn right_eigvec(&self) -> &[f64] {
        &self.right
    }

    pub fn left_eigvec(&self) -> &[f64] {
        &self.left
    }

    /// `π` over `r`-blocks (big-endian codes).
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// `p(s → b)` at `kernel()[s·|A| + b]`.
    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn diagnostics(&self) -> EigenDiagnostics {
        self.diagnostics
    }

    /// `φ̄ = ln μ(x₀ | x₁…x_r)`: the normalized potential cohomologous to
    /// `φ − P`. It has the same Gibbs measure and satisfies
    /// `Σ_a exp φ̄(a·w) = 1`.
    pub fn normalized_potential(&self) -> &BlockFunction {
        &self.normalized
    }

    /// `|φ̄|_θ`, using the potential's `θ`.
    pub fn normalized_seminorm(&self) -> f64 {
        self.normalized.lipschitz_seminorm(self.potential.metric())
    }

    #[inline]
    pub(crate) fn next_state(&self, s: usize, b: Symbol) -> usize {
        (s * self.alphabet().size() + b as usize) % self.states
    }

    /// `ln μ([w])` for a block of symbols (assumed in the alphabet).
    pub fn log_cylinder(&self, w: &[Symbol]) -> f64 {
        let r = self.range();
        let a = self.alphabet();
        if w.len() < r {
            // Sum π over all states extending w.
            let span = a.block_count(r - w.len()).expect("below state count");
            let start = a.encode(w) * span;
            let mass: f64 = self.stationary[start..start + span].iter().sum();
            return math::ln(mass);
        }
        let mut s = a.encode(&w[..r]);
        let mut acc = math::ln(self.stationary[s]);
        for &b in &w[r..] {
            acc += self.log_kernel[s * a.size() + b as usize];
            s = self.next_state(s, b);
        }
        acc
    }

    /// `μ([w])`.
    pub fn cylinder_probability(&self, w: &[Symbol]) -> f64 {
        math::exp(self.log_cylinder(w))
    }

    /// `μ([w])`, checking the word's alphabet.
    pub fn cylinder_measure(&self, w: &Word) -> Result<f64> {
        if w.alphabet() != self.alphabet() {
            return Err(invalid!("word alphabet does not match the model"));
        }
        Ok(self.cylinder_probability(w.symbols()))
    }

    /// All `k`-block masses, indexed by block code.
    pub fn block_marginal(&self, k: usize) -> Result<Vec<f64>> {
        let a = self.alphabet();
        let count = a
            .block_count(k)
            .filter(|&c| c <= 1 << 26)
            .ok_or_else(|| invalid!("|A|^{k} blocks is too many to tabulate"))?;
        Ok((0..count).map(|code| self.cylinder_probability(&a.decode(code, k))).collect())
    }

    /// Entropy `h(μ) = −Σ_s π(s) Σ_b p(s→b) ln p(s→b)`.
    ///
    /// Cross-checked against `−∫(φ−P) dμ = P − Σ_blocks μ([block]) φ(block)`;
    /// disagreement beyond `1e−9` means the eigendata are broken.
    pub fn exact_entropy(&self) -> Result<f64> {
        let asz = self.alphabet().size();
        let mut h = 0.0;
        let mut integral = 0.0;
        for s in 0..self.states {
            for b in 0..asz {
                let code = s * asz + b;
                let mass = self.stationary[s] * self.kernel[code];
                h -= self.stationary[s] * math::xlogx(self.kernel[code]);
                integral += mass * self.potential.table.value_at(code);
            }
        }
        let via_potential = self.pressure - integral;
        if (h - via_potential).abs() > ENTROPY_IDENTITY_TOL {
            return Err(Error::Numerical(alloc::format!(
                "entropy {h} disagrees with −∫(φ−P)dμ = {via_potential}"
            )));
        }
        Ok(h)
    }

    /// `∫ φ dμ`.
    pub fn potential_integral(&self) -> f64 {
        let asz = self.alphabet().size();
        (0..self.states * asz)
            .map(|code| self.stationary[code / asz] * self.kernel[code] * self.potential.table.value_at(code))
            .sum()
    }

    /// A stationary stream driven by `rng`.
    pub fn sampler<R: RngCore>(&self, rng: R) -> Sampler<'_, R> {
        Sampler::new(self, rng)
    }

    /// `n` symbols of a stationary path; deterministic in `seed`.
    pub fn sample_path(&self, n: usize, seed: u64) -> Result<SymbolSequence> {
        self.sample_path_with(n, &mut rng::from_seed(seed))
    }

    pub fn sample_path_with<R: RngCore>(&self, n: usize, rng: &mut R) -> Result<SymbolSequence> {
        if n == 0 {
            return Err(invalid!("sample length must be at least 1"));
        }
        let symbols: Vec<Symbol> = self.sampler(rng).take(n).collect();
        Ok(SymbolSequence::from_trusted(self.alphabet(), symbols))
    }

    /// Bracket the Gibbs constant by enumerating every cylinder of length
    /// `1..=depth` together with the `r` symbols beyond it that the
    /// potential reads. Ratios are computed in log space.
    pub fn gibbs_ratio_report(&self, depth: usize) -> Result<CylinderMeasureReport> {
        let r = self.range();
        let a = self.alphabet();
        if depth == 0 || depth > 14 {
            return Err(invalid!("depth must be in 1..=14, got {depth}"));
        }
        let max_len = depth + r;
        if a.block_count(max_len).filter(|&c| c <= 1 << 26).is_none() {
            return Err(invalid!("|A|^(depth+r) exceeds the enumeration budget of 2^26 words"));
        }
        let mut word: Vec<Symbol> = vec![0; max_len];
        // log_mu[l] = ln μ of the prefix of length l; birk[l] = Σ φ over the
        // windows fully inside the prefix of length l.
        let mut log_mu = vec![0.0; max_len + 1];
        let mut birk = vec![0.0; max_len + 1];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        self.ratio_dfs(0, &mut word, &mut log_mu, &mut birk, depth, &mut lo, &mut hi);
        Ok(CylinderMeasureReport { depth, min_ratio: math::exp(lo), max_ratio: math::exp(hi) })
    }

    #[allow(clippy::too_many_arguments)]
    fn ratio_dfs(
        &self,
        len: usize,
        word: &mut [Symbol],
        log_mu: &mut [f64],
        birk: &mut [f64],
        depth: usize,
        lo: &mut f64,
        hi: &mut f64,
    ) {
        let r = self.range();
        let asz = self.alphabet().size();
        if len > r {
            let m = len - r;
            let log_ratio = log_mu[m] - (birk[len] - self.pressure * m as f64);
            *lo = lo.min(log_ratio);
            *hi = hi.max(log_ratio);
        }
        if len == depth + r {
            return;
        }
        for b in 0..asz {
            word[len] = b as Symbol;
            let l = len + 1;
            log_mu[l] = if l <= r {
                self.log_cylinder(&word[..l])
            } else {
                let s = self.alphabet().encode(&word[l - 1 - r..l - 1]);
                log_mu[l - 1] + self.log_kernel[s * asz + b]
            };
            birk[l] = if l > r { birk[l - 1] + self.potential.value(&word[l - 1 - r..l]) } else { 0.0 };
            self.ratio_dfs(l, word, log_mu, birk, depth, lo, hi);
        }
    }
}

/// An infinite stationary stream of symbols from a [`GibbsModel`].
///
/// The first `r` symbols are the initial state drawn from `π`; each later
/// symbol is drawn from the kernel, so the stream is stationary from its
/// first symbol.
#[derive(Debug)]
pub struct Sampler<'m, R> {
    model: &'m GibbsModel,
    rng: R,
    state: usize,
    pending: Vec<Symbol>,
}

impl<'m, R: RngCore> Sampler<'m, R> {
    fn new(model: &'m GibbsModel, mut rng: R) -> Self {
        let r = model.range();
        let state = rng::draw_index(&model.stationary_thresholds, rng.next_u64());
        let mut pending = model.alphabet().decode(state, r);
        pending.reverse();
        Self { model, rng, state, pending }
    }

    /// Current Markov state (the last `r` symbols emitted or pending).
    pub fn state(&self) -> usize {
        self.state
    }

    #[inline]
    pub fn next_symbol(&mut self) -> Symbol {
        if let Some(s) = self.pending.pop() {
            return s;
        }
        let asz = self.model.alphabet().size();
        let row = &self.model.kernel_thresholds[self.state * asz..(self.state + 1) * asz];
        let b = rng::draw_index(row, self.rng.next_u64()) as Symbol;
        self.state = self.model.next_state(self.state, b);
        b
    }
}

impl<R: RngCore> Iterator for Sampler<'_, R> {
    type Item = Symbol;

    #[inline]
    fn next(&mut self) -> Option<Symbol> {
        Some(self.next_symbol())
    }
}

fn power_iterate(n: usize, apply: impl Fn(&[f64], &mut [f64])) -> Result<(Vec<f64>, f64, usize)> {
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut last_change = f64::INFINITY;
    for it in 1..=POWER_MAX_ITER {
        apply(&v, &mut w);
        let norm = w.iter().copied().fold(0.0, f64::max);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numerical("transfer matrix iterate vanished or overflowed".into()));
        }
        w.iter_mut().for_each(|x| *x /= norm);
        last_change = sup_diff(&v, &w);
        core::mem::swap(&mut v, &mut w);
        if last_change < POWER_TOL {
            apply(&v, &mut w);
            let lambda = w.iter().sum::<f64>() / v.iter().sum::<f64>();
            return Ok((v, lambda, it));
        }
    }
    Err(Error::NoConvergence { iterations: POWER_MAX_ITER, last_change })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn normalize_sum(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
}
