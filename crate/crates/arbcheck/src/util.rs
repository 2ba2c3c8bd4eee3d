//! Small deterministic PRNG used for seeded demonstrations and test suites.

use crate::num::{ratio, Rat};

/// SplitMix64. Deterministic, seedable, no external dependency.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        self.next_u64() % n
    }

    /// Rational `k / denom` with `k` uniform in `[lo*denom, hi*denom]`.
    pub fn rat_between(&mut self, lo: i64, hi: i64, denom: i64) -> Rat {
        let span = (hi - lo) as u64 * denom as u64 + 1;
        let k = self.below(span) as i64;
        ratio(lo * denom + k, denom)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len() as u64) as usize]
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }
}
