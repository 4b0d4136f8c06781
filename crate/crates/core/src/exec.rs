//! Data-parallel execution with a sequential fallback.
//!
//! Every parallel loop in the crate goes through [`Execution`]. Work is cut
//! into fixed, index-addressed shards, so the result of a computation never
//! depends on how many threads ran it. With the `parallel` feature disabled,
//! [`Execution::Parallel`] silently runs sequentially.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier of the random generator used throughout the crate. Recorded in
/// every experiment report.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64+stream";

/// The crate-wide deterministic generator for `(seed, stream)`.
///
/// Streams are independent ChaCha8 keystreams under the same key, which gives
/// a cheap splittable generator: shard `i` of a Monte Carlo run, or retry `i`
/// of a construction, uses stream `i`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Evaluates `f(0), …, f(n-1)` and returns the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Returns the smallest index `i < n` for which `f(i)` is `Some`, together
    /// with its value. Indices are examined in batches of `batch`; within a
    /// batch all candidates are evaluated, so the winner is the same in both
    /// execution modes.
    pub fn first_some<T, F>(self, n: usize, batch: usize, f: F) -> Option<(usize, T)>
    where
        T: Send,
        F: Fn(usize) -> Option<T> + Sync + Send,
    {
        let batch = batch.max(1);
        let mut start = 0;
        while start < n {
            let end = (start + batch).min(n);
            let found = match self {
                #[cfg(feature = "parallel")]
                Execution::Parallel => {
                    use rayon::prelude::*;
                    (start..end)
                        .into_par_iter()
                        .filter_map(|i| f(i).map(|v| (i, v)))
                        .min_by_key(|(i, _)| *i)
                }
                _ => (start..end).find_map(|i| f(i).map(|v| (i, v))),
            };
            if found.is_some() {
                return found;
            }
            start = end;
        }
        None
    }
}
