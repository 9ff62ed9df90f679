//! Deterministic random-number machinery for the simulators.
//!
//! Two generators, matching the two dynamics:
//!
//! * [`CounterRng`] for checkerboard half-sweeps. Every Gaussian variate is a
//!   pure function of `(seed, round, site)`, so a sweep can be split across
//!   any number of workers without changing a single bit of the output. The
//!   construction is a chain of SplitMix64 finalizers ([`mix64`]): a key is
//!   derived as `mix64(seed ^ mix64(round ^ mix64(site ^ TAG)))`, and two
//!   64-bit words `mix64(key ^ TAG_A)`, `mix64(key ^ TAG_B)` feed the
//!   Box-Muller transform.
//! * [`StreamRng`] for strictly sequential consumers (random-sequential
//!   dynamics and the equilibrium sampler): a ChaCha12 stream seeded from a
//!   64-bit seed, identical on every platform.
//!
//! Gaussian variates use the cosine branch of the Box-Muller transform,
//!
//! ```text
//! z = sqrt(-2 ln u1) * cos(2 pi u2),   u1 in (0, 1], u2 in [0, 1),
//! ```
//!
//! one variate per pair of uniform words. Uniforms come from the top 53 bits
//! of a 64-bit word; `u1` is shifted into `(0, 1]` so the logarithm is always
//! finite. Uniform site indices reduce a 64-bit word modulo the site count
//! (the bias is below `n / 2^64`, irrelevant at any lattice size used here).

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// SplitMix64 finalizer: a fixed 64-bit avalanche permutation.
#[inline]
pub const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed for an independent stream (replicas, initial condition).
pub const fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ tag)
}

/// Domain-separation tags (arbitrary fixed constants).
pub const TAG_INIT: u64 = 0x496e_6974_4669_656c; // initial condition
pub const TAG_SWEEP: u64 = 0x5377_6565_7052_6e67; // checkerboard sweeps
pub const TAG_SEQ: u64 = 0x5365_7155_7064_6174; // sequential stream
pub const TAG_REPLICA: u64 = 0x5265_706c_6963_6131; // replica splitting

const TAG_SITE: u64 = 0x9e37_79b9_7f4a_7c15;
const TAG_WORD_A: u64 = 0xd1b5_4a32_d192_ed03;
const TAG_WORD_B: u64 = 0x8cb9_2ba7_2f3d_8dd7;

#[inline]
fn unit_open(x: u64) -> f64 {
    // (0, 1]: top 53 bits, then +1 before scaling.
    ((x >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

#[inline]
fn unit_half_open(x: u64) -> f64 {
    // [0, 1)
    (x >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Box-Muller cosine branch: one standard normal from two 64-bit words.
#[inline]
pub fn normal_from_words(a: u64, b: u64) -> f64 {
    let u1 = unit_open(a);
    let u2 = unit_half_open(b);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Counter-based generator keyed by `(seed, round, site)`.
#[derive(Clone, Copy, Debug)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// The standard normal assigned to `site` in update round `round`.
    #[inline]
    pub fn site_normal(&self, round: u64, site: u64) -> f64 {
        let key = mix64(self.seed ^ mix64(round ^ mix64(site ^ TAG_SITE)));
        normal_from_words(mix64(key ^ TAG_WORD_A), mix64(key ^ TAG_WORD_B))
    }
}

/// Sequential ChaCha12 stream with the uniform/normal draws used here.
pub struct StreamRng {
    inner: ChaCha12Rng,
}

impl StreamRng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self {
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform site index in `0..n` by modulo reduction.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        (self.inner.next_u64() % n as u64) as usize
    }

    /// Standard normal, consuming two words of the stream.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        let a = self.inner.next_u64();
        let b = self.inner.next_u64();
        normal_from_words(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_rng_is_a_pure_function() {
        let rng = CounterRng::new(42);
        let x = rng.site_normal(7, 1000);
        assert_eq!(x, CounterRng::new(42).site_normal(7, 1000));
        assert_ne!(x, rng.site_normal(8, 1000));
        assert_ne!(x, rng.site_normal(7, 1001));
    }

    #[test]
    fn stream_is_reproducible() {
        let mut a = StreamRng::seed_from_u64(3);
        let mut b = StreamRng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn normals_have_sane_moments() {
        let rng = CounterRng::new(1);
        let n = 200_000u64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for site in 0..n {
            let z = rng.site_normal(0, site);
            s1 += z;
            s2 += z * z;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        // 4 sigma bounds for n = 2e5 samples
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean = {mean}");
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(), "var = {var}");
    }

    #[test]
    fn normals_are_always_finite() {
        // The shifted uniform keeps ln away from zero even for word 0.
        assert!(normal_from_words(0, 0).is_finite());
        assert!(normal_from_words(u64::MAX, u64::MAX).is_finite());
    }
}
