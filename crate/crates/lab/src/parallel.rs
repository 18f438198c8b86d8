//! Deterministic parallel map over sample indices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::LabError;

/// The generator for sample `index`: ChaCha8 keyed by `seed`, on stream
/// `stream_base + index`. Streams never overlap, so every sample sees the
/// same numbers whichever thread runs it.
pub fn sample_rng(seed: u64, stream_base: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_base.wrapping_add(index as u64));
    rng
}

/// Evaluate `f(i, rng_i)` for `i in 0..n` on `workers` threads and return
/// the results in index order.
pub fn run_parallel<T, F>(n: usize, seed: u64, stream_base: u64, workers: usize, f: F) -> Result<Vec<T>, LabError>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::Io(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        (0..n)
            .into_par_iter()
            .with_min_len(64)
            .map(|i| {
                let mut rng = sample_rng(seed, stream_base, i);
                f(i, &mut rng)
            })
            .collect()
    }))
}
