//! Reproducible partitioned Monte Carlo.
//!
//! Trials are split into a fixed number of partitions; partition `i` draws
//! from ChaCha stream `i` of the run seed. Results depend only on
//! `(seed, partitions, trials)`, never on the number of worker threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type McRng = ChaCha8Rng;

pub const DEFAULT_PARTITIONS: u64 = 16;

pub fn stream_rng(seed: u64, stream: u64) -> McRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Trial counts per partition; the first `trials % partitions` get one extra.
pub fn partition_sizes(trials: u64, partitions: u64) -> Vec<u64> {
    let partitions = partitions.max(1);
    let base = trials / partitions;
    let extra = trials % partitions;
    (0..partitions).map(|i| base + u64::from(i < extra)).collect()
}

/// Run `work(rng, n_trials)` for each partition in parallel; results are
/// returned in partition order.
pub fn run_partitioned<T, F>(trials: u64, seed: u64, partitions: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut McRng, u64) -> T + Sync,
{
    partition_sizes(trials, partitions)
        .into_par_iter()
        .enumerate()
        .map(|(i, n)| {
            let mut rng = stream_rng(seed, i as u64);
            work(&mut rng, n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn sizes_cover_all_trials() {
        let s = partition_sizes(10, 4);
        assert_eq!(s, vec![3, 3, 2, 2]);
        assert_eq!(partition_sizes(5, 0), vec![5]);
    }

    #[test]
    fn independent_of_thread_count() {
        let draw = |rng: &mut McRng, n: u64| (0..n).map(|_| rng.random::<u64>()).fold(0u64, u64::wrapping_add);
        let a = run_partitioned(1000, 7, 8, draw);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_partitioned(1000, 7, 8, draw));
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }
}
