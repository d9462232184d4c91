//! Seeded generators. Replica `i` of an experiment with base seed `s` always
//! uses seed `s + i` (wrapping), so replicas can be run in any order.

use rand_core::SeedableRng;
pub use rand_core::RngCore;
use rand_xoshiro::Xoshiro256PlusPlus;

/// The generator used everywhere in the crate.
pub type Rng = Xoshiro256PlusPlus;

pub fn from_seed(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn replica_seed(base_seed: u64, replica: usize) -> u64 {
    base_seed.wrapping_add(replica as u64)
}

/// Convert a probability to a threshold on a uniform `u64` draw.
#[inline]
pub(crate) fn threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else if p <= 0.0 {
        0
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

/// Cumulative thresholds for a discrete law; the last entry is forced to
/// `u64::MAX` so rounding can never lose mass.
pub(crate) fn cumulative_thresholds(probs: &[f64]) -> alloc::vec::Vec<u64> {
    let mut acc = 0.0;
    let mut out: alloc::vec::Vec<u64> = probs
        .iter()
        .map(|p| {
            acc += p;
            threshold(acc)
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = u64::MAX;
    }
    out
}

/// Index of the first cumulative threshold exceeding `u`.
#[inline]
pub(crate) fn draw_index(cumulative: &[u64], u: u64) -> usize {
    let last = cumulative.len() - 1;
    let mut i = 0;
    while i < last && u >= cumulative[i] {
        i += 1;
    }
    i
}
