//! Deterministic batch parallelism for Monte Carlo loops.
//!
//! Work splits into a fixed number of batches, each owning a seed stream
//! derived from `(seed, role, batch index)`, so results are identical for any
//! worker count. `QOTSIM_THREADS` caps the number of worker threads.

/// Fixed batch count for Monte Carlo simulations.
pub const MC_BATCHES: usize = 16;

/// Worker cap: `QOTSIM_THREADS` when set (minimum 1), else the machine's
/// available parallelism.
pub fn worker_count() -> usize {
    if let Ok(value) = std::env::var("QOTSIM_THREADS") {
        if let Ok(n) = value.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Splits `total` into [`MC_BATCHES`] near-equal sizes.
pub fn batch_sizes(total: usize) -> Vec<usize> {
    let base = total / MC_BATCHES;
    let extra = total % MC_BATCHES;
    (0..MC_BATCHES)
        .map(|b| base + usize::from(b < extra))
        .collect()
}

/// Runs one closure per batch index across at most [`worker_count`] threads;
/// results come back in batch order.
pub fn map_batches<T, F>(batches: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = worker_count().min(batches).max(1);
    if workers == 1 {
        return (0..batches).map(f).collect();
    }
    let mut results: Vec<Option<T>> = (0..batches).map(|_| None).collect();
    let chunk = batches.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slot_chunk) in results.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (offset, slot) in slot_chunk.iter_mut().enumerate() {
                    *slot = Some(f(w * chunk + offset));
                }
            });
        }
    });
    results.into_iter().map(Option::unwrap).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_sizes_cover_total() {
        for total in [0, 1, 15, 16, 17, 100_000] {
            let sizes = batch_sizes(total);
            assert_eq!(sizes.len(), MC_BATCHES);
            assert_eq!(sizes.iter().sum::<usize>(), total);
            let max = sizes.iter().max().unwrap();
            let min = sizes.iter().min().unwrap();
            assert!(max - min <= 1);
        }
    }

    #[test]
    fn map_batches_is_order_stable() {
        let out = map_batches(16, |b| b * b);
        assert_eq!(out, (0..16).map(|b| b * b).collect::<Vec<_>>());
    }

    #[test]
    fn results_are_thread_count_independent() {
        let run = || map_batches(MC_BATCHES, |b| b as u64 * 31);
        let baseline = run();
        std::env::set_var("QOTSIM_THREADS", "1");
        let single = run();
        std::env::set_var("QOTSIM_THREADS", "4");
        let quad = run();
        std::env::remove_var("QOTSIM_THREADS");
        assert_eq!(baseline, single);
        assert_eq!(baseline, quad);
    }
}
