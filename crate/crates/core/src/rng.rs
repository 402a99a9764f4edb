//! Seeding and deterministic parallel fan-out.
//!
//! A single master seed drives everything. Work is split into a fixed
//! number of chunks; chunk `k` draws from ChaCha stream `k` of the master
//! seed, so results do not depend on how many threads rayon happens to use.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type Rng = ChaCha8Rng;

/// Number of independent chunks used by [`par_chunks`].
pub const CHUNKS: usize = 64;

/// RNG for the master seed, stream 0.
pub fn master(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `total` work items into [`CHUNKS`] contiguous pieces, runs `work`
/// on each in parallel with its own substream and returns the per-chunk
/// results in chunk order.
pub fn par_chunks<T, F>(seed: u64, total: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut Rng) -> T + Sync,
{
    let chunks = CHUNKS.min(total.max(1));
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let lo = total * k / chunks;
            let hi = total * (k + 1) / chunks;
            let mut rng = substream(seed, k as u64 + 1);
            work(hi - lo, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn chunk_results_are_thread_count_independent() {
        let run = || par_chunks(9, 1000, |n, rng| (0..n).map(|_| rng.random::<u32>() as u64).sum::<u64>());
        let a = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(run);
        assert_eq!(a, b);
        assert_eq!(a.len(), CHUNKS);
    }

    #[test]
    fn substreams_differ() {
        let x: u64 = substream(1, 1).random();
        let y: u64 = substream(1, 2).random();
        assert_ne!(x, y);
    }
}
