//! Seedable, splittable random streams and chain executors.
//!
//! Splitting rule: chain `c` of a run seeded with `seed` uses ChaCha8 keyed by
//! `seed_from_u64(seed)` on stream `c + 1`; stream 0 is the run's own stream.
//! Per-chain streams therefore do not depend on how many chains are run or on
//! the order in which they execute.

use alloc::vec::Vec;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};

use crate::math::TAU;

#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn for_chain(seed: u64, chain: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chain.wrapping_add(1));
        Self { rng }
    }

    /// Child stream seeded from this stream's next output.
    pub fn split(&mut self) -> Self {
        Self::new(self.rng.next_u64())
    }

    /// Uniform on [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on (0, 1].
    #[inline]
    pub fn uniform_open_closed(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Collision angle, uniform on (0, 2π].
    #[inline]
    pub fn angle(&mut self) -> f64 {
        TAU * self.uniform_open_closed()
    }

    /// Uniform index in `0..n`.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        let e: f64 = Exp1.sample(&mut self.rng);
        e / rate
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        let d = Poisson::new(mean).expect("finite positive Poisson mean");
        let x: f64 = d.sample(&mut self.rng);
        x as u64
    }

    /// Uniformly random ordered pair `(i, j)` with `i < j`.
    #[inline]
    pub fn pair(&mut self, n: usize) -> (usize, usize) {
        let i = self.index(n);
        let mut j = self.index(n - 1);
        if j >= i {
            j += 1;
        }
        if i < j {
            (i, j)
        } else {
            (j, i)
        }
    }

    /// Fills the first `k` slots of `idx` with a uniform random k-subset
    /// (partial Fisher–Yates); `idx` must hold a permutation of `0..idx.len()`.
    pub fn partial_shuffle(&mut self, idx: &mut [usize], k: usize) {
        let n = idx.len();
        for a in 0..k.min(n) {
            let b = a + self.index(n - a);
            idx.swap(a, b);
        }
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Mixes a run seed with a tag (an N value, a sub-experiment id) so that
/// sub-experiments of one run draw from unrelated keys.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs independent chains; implementations may execute them concurrently but
/// must return results in chain order.
pub trait ChainExecutor: Sync {
    fn map_chains<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs chains one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ChainExecutor for Sequential {
    fn map_chains<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}
