//! Seedable pseudo-random numbers and weighted sampling.
//!
//! Search results must be reproducible from a single 64-bit seed on any
//! platform, so this module carries its own generator (xoshiro256** seeded
//! through splitmix64) instead of pulling in an external RNG. Discrete
//! sampling walks the cumulative distribution, which keeps draws stable
//! across platforms for identical weight vectors.

/// xoshiro256** generator; the state is expanded from a 64-bit seed.
#[derive(Debug, Clone)]
pub struct SeededRng {
    state: [u64; 4],
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let mut state = [0u64; 4];
        for slot in &mut state {
            *slot = splitmix64(&mut sm);
        }
        // An all-zero state would be a fixed point; splitmix64 cannot
        // produce four zeros from any seed, but guard anyway.
        if state == [0; 4] {
            state[0] = 0x9e37_79b9_7f4a_7c15;
        }
        SeededRng { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound) via rejection-free modulo reduction on
    /// the high 53 bits; bias is negligible for the small bounds used here.
    pub fn next_below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.next_f64() * bound as f64) as usize % bound
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Inverse-CDF draw from a discrete distribution.
///
/// `weights` must be nonnegative with a positive sum; they do not need to be
/// normalized. Returns the index of the sampled entry.
pub fn sample_weighted(rng: &mut SeededRng, weights: &[f64]) -> usize {
    debug_assert!(!weights.is_empty());
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0);
    let target = rng.next_f64() * total;
    let mut cumulative = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cumulative += w;
        if target < cumulative {
            return i;
        }
    }
    // Floating-point spill: the target landed beyond the accumulated sum.
    weights.len() - 1
}

/// Derives a child seed from a run seed, a stage label, and an index, so
/// that independent pipeline stages consume independent streams.
pub fn derive_seed(run_seed: u64, stage: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325; // FNV-1a offset basis
    for byte in run_seed
        .to_le_bytes()
        .iter()
        .chain(stage.as_bytes())
        .chain(index.to_le_bytes().iter())
    {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    // Scramble once more so adjacent indices do not yield adjacent states.
    let mut s = h;
    splitmix64(&mut s)
}

/// Partial Fisher-Yates draw of `k` distinct indices out of `0..n`,
/// in draw order.
pub fn sample_indices(rng: &mut SeededRng, n: usize, k: usize) -> alloc::vec::Vec<usize> {
    let mut pool: alloc::vec::Vec<usize> = (0..n).collect();
    let k = k.min(n);
    for i in 0..k {
        let j = i + rng.next_below(n - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

/// FNV-1a hash of a string, used by the fallback embedder's token buckets.
pub fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Convenience for deriving per-card seeds from string identifiers.
pub fn derive_seed_str(run_seed: u64, stage: &str, key: &str) -> u64 {
    derive_seed(run_seed, stage, fnv1a(key))
}
