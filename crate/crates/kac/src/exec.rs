use kac_core::rng::ChainExecutor;
use rayon::prelude::*;

/// Spreads chains over the rayon pool. Results come back in chain order and
/// each chain owns its stream, so output does not depend on thread count.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl ChainExecutor for Rayon {
    fn map_chains<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).into_par_iter().map(f).collect()
    }
}
