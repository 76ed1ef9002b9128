//! Deterministic parallel Monte Carlo plumbing.
//!
//! Every trial draws from its own ChaCha8 stream keyed by
//! `(master_seed, trial_index)`, so the random inputs of a trial do not
//! depend on which worker runs it. Trials are grouped into fixed-size chunks
//! whose partial results are merged in chunk order, which keeps floating
//! point sums bit-identical for any thread count.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Trials per chunk. Changing it changes the summation order, and with it
/// the last bits of every reported mean.
pub const CHUNK_TRIALS: u64 = 4096;

/// Counter-based generator for one trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Runs `f` over consecutive chunks of `0..total` in parallel and returns the
/// per-chunk results in chunk order.
pub fn map_chunks<T, F>(total: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    let chunks = total.div_ceil(CHUNK_TRIALS);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_TRIALS;
            f(start..(start + CHUNK_TRIALS).min(total))
        })
        .collect()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
