//! Reproducible random streams.
//!
//! Every random quantity in the crate is drawn from a [`RngStream`], a
//! `(master seed, stream index)` pair. The seed keys a ChaCha8 generator and
//! the index selects its stream counter, so distinct indices give independent
//! streams and the same pair always reproduces the same output regardless of
//! how work is scheduled across threads.
//!
//! Index layout used by the experiment and validation drivers:
//!
//! ```text
//! bits 63..48  task id       (one per check / experiment phase)
//! bits 47..32  sweep point   (0 when not sweeping)
//! bits 31..0   replicate
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

impl RngStream {
    pub const fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// Stream for replicate `replicate` of sweep point `point` of task `task`.
    pub const fn for_replicate(seed: u64, task: u16, point: u16, replicate: u32) -> Self {
        Self::new(seed, stream_index(task, point, replicate))
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }

    /// Sibling stream for replicate `replicate` under the same task and point.
    pub const fn replicate(&self, replicate: u32) -> Self {
        Self::new(self.seed, (self.index & !0xFFFF_FFFF) | replicate as u64)
    }

    /// Stream with a different task id, keeping point and replicate.
    pub const fn task(&self, task: u16) -> Self {
        Self::new(
            self.seed,
            (self.index & 0x0000_FFFF_FFFF_FFFF) | ((task as u64) << 48),
        )
    }

    /// Stream with a different sweep point, keeping task and replicate.
    pub const fn point(&self, point: u16) -> Self {
        Self::new(
            self.seed,
            (self.index & 0xFFFF_0000_FFFF_FFFF) | ((point as u64) << 32),
        )
    }
}

pub const fn stream_index(task: u16, point: u16, replicate: u32) -> u64 {
    ((task as u64) << 48) | ((point as u64) << 32) | replicate as u64
}

/// Runs `f` once per replicate `0..reps`, each on its own sibling stream of
/// `base`, in parallel. Output order is replicate order, so reductions over
/// the result are deterministic.
pub fn replicates<T, F>(base: RngStream, reps: u32, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u32, &mut StreamRng) -> T + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .map(|i| f(i, &mut base.replicate(i).rng()))
        .collect()
}
