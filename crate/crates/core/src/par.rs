//! Deterministic block-parallel execution.
//!
//! Monte Carlo work is cut into fixed-size blocks of proposals. Block `b`
//! draws from its own ChaCha stream keyed by `(seed, b)`, and blocks are
//! consumed in waves whose sizes do not depend on the thread count, so every
//! result is identical whether it ran on one worker or many.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Proposals per block unless a caller overrides it.
pub const DEFAULT_BLOCK: u64 = 4096;

/// Largest number of blocks in one wave.
const MAX_WAVE: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is on, otherwise runs sequentially.
    #[default]
    Parallel,
}

impl Exec {
    /// Order-preserving map.
    pub fn map<I, T, F>(self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    fn map_range<T, F>(self, lo: u64, hi: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (lo..hi).into_par_iter().map(f).collect()
            }
            _ => (lo..hi).map(f).collect(),
        }
    }
}

/// RNG for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Complete,
    /// The probe budget passed without a single acceptance.
    Exhausted,
    /// The hard proposal cap was reached before the target count.
    BudgetSpent,
}

#[derive(Debug, Clone)]
pub struct BlockRun<T> {
    /// Accepted items in block order, truncated to the requested count.
    pub items: Vec<T>,
    /// Proposals in every consumed block.
    pub proposals: u64,
    /// Acceptances in every consumed block, before truncation.
    pub accepted: u64,
    pub status: RunStatus,
}

impl<T> BlockRun<T> {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunLimits {
    pub block_size: u64,
    /// Give up with [`RunStatus::Exhausted`] if this many proposals yield nothing.
    pub probe_budget: u64,
    /// Hard cap on proposals; `None` runs until the target is met.
    pub max_proposals: Option<u64>,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            block_size: DEFAULT_BLOCK,
            probe_budget: 1_000_000,
            max_proposals: None,
        }
    }
}

/// Runs proposal blocks until `target` items are accepted.
///
/// `block` receives the block's RNG and its proposal count and returns the
/// accepted items in draw order.
pub fn collect_accepted<T, F>(
    exec: Exec,
    seed: u64,
    target: usize,
    limits: RunLimits,
    block: F,
) -> BlockRun<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> Vec<T> + Sync + Send,
{
    let block_size = limits.block_size.max(1);
    let mut items = Vec::with_capacity(target);
    let mut proposals = 0u64;
    let mut accepted = 0u64;
    let mut next_block = 0u64;
    let mut wave = 1u64;

    while items.len() < target {
        if accepted == 0 && proposals >= limits.probe_budget {
            return BlockRun { items, proposals, accepted, status: RunStatus::Exhausted };
        }
        if let Some(cap) = limits.max_proposals {
            if proposals >= cap {
                return BlockRun { items, proposals, accepted, status: RunStatus::BudgetSpent };
            }
        }
        let batches = exec.map_range(next_block, next_block + wave, |b| {
            let mut rng = stream_rng(seed, b);
            block(&mut rng, block_size)
        });
        for batch in batches {
            proposals += block_size;
            accepted += batch.len() as u64;
            items.extend(batch);
        }
        next_block += wave;
        wave = (wave * 2).min(MAX_WAVE);
    }
    items.truncate(target);
    BlockRun { items, proposals, accepted, status: RunStatus::Complete }
}
