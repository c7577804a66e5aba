//! Order-preserving parallel map with a bounded number of concurrent calls.

use rayon::prelude::*;

/// Applies `f` to every item with at most `max_inflight` calls running at
/// once. Results come back in input order whatever the completion order.
pub(crate) fn ordered_parallel_map<T, R, F>(items: &[T], max_inflight: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    if max_inflight <= 1 || items.len() <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(max_inflight.min(items.len())).build() {
        Ok(pool) => pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()),
        Err(_) => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}
