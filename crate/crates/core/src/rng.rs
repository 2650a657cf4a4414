//! Seeded random streams and deterministic replica fan-out.
//!
//! Every replica draws from its own ChaCha20 stream selected by
//! `(seed, replicate)`, so results do not depend on scheduling or on the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha20Rng;

/// Independent stream number `replicate` under the root `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Runs `f(0..replicas)` on up to `threads` workers (all cores when `None`)
/// and returns the results in replicate order.
pub fn run_replicas<T, F>(replicas: usize, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let work = || (0..replicas as u64).into_par_iter().map(&f).collect();
    match threads {
        Some(1) => (0..replicas as u64).map(&f).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    }
}
