//! Seeded pseudo-random numbers.
//!
//! All generators draw from SplitMix64 (Steele, Lea, Flood 2014) and a fixed
//! set of derived samplers defined below, so a given seed produces the same
//! stream on every platform and in any reimplementation that follows these
//! definitions:
//!
//! * `next_u64`: `state += 0x9E3779B97F4A7C15`, then the SplitMix64 finalizer.
//! * `below(n)`: rejection sampling; draws `x` until `x >= (2^64 - n) mod n`,
//!   returns `x mod n`.
//! * `unit()`: `((x >> 11) + 0.5) * 2^-53`, an open interval `(0, 1)`.
//! * `bernoulli(p)`: `unit() < p`.
//! * `geometric(p)`: number of Bernoulli(p) trials up to and including the
//!   first success (support `{1, 2, ...}`).

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent sub-stream of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index.wrapping_add(1).wrapping_mul(GAMMA)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform integer in `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }

    /// Uniform integer in the inclusive range `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.below(hi - lo + 1)
    }

    pub fn unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn geometric(&mut self, p: f64) -> u64 {
        assert!(p > 0.0 && p <= 1.0);
        let mut k = 1;
        while !self.bernoulli(p) {
            k += 1;
        }
        k
    }

    /// `k` distinct values from `[0, n)`, in draw order. Draws `below(n)`
    /// repeatedly and discards repeats.
    pub fn distinct(&mut self, k: usize, n: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let x = self.below(n as u64) as usize;
            if !out.contains(&x) {
                out.push(x);
            }
        }
        out
    }

    /// Fisher-Yates, swapping position `i` (from the end) with `below(i + 1)`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
