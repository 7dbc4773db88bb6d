//! Batch execution helpers.
//!
//! With the `parallel` feature (on by default) batches run on rayon; without
//! it every helper degrades to a plain sequential loop with identical
//! results and ordering.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving input order.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

pub fn map_sequential<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Like [`map`], but never runs more than `workers` tasks at once. Used for
/// network batches where the bound matters more than throughput.
pub fn map_bounded<T, U, F>(items: &[T], workers: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers > 1 && items.len() > 1 {
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => return pool.install(|| map_parallel(items, f)),
                Err(e) => log::warn!("could not start {workers} workers ({e}); running sequentially"),
            }
        }
    }
    let _ = workers;
    map_sequential(items, f)
}

/// Folds every item into an accumulator and merges the partial
/// accumulators. `merge` must be associative and commutative, otherwise the
/// parallel and sequential builds disagree.
pub fn fold_merge<T, A, F, M>(items: &[T], init: impl Fn() -> A + Sync + Send, fold: F, merge: M) -> A
where
    T: Sync,
    A: Send,
    F: Fn(A, &T) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .fold(&init, &fold)
            .reduce(&init, &merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = &merge;
        items.iter().fold(init(), fold)
    }
}

/// True when this build runs batches on multiple threads.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Caps the worker threads used by [`map`] and [`fold_merge`]. Only the
/// first call takes effect; returns false when the cap could not be set.
pub fn set_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let items: Vec<u32> = (0..1000).collect();
        let out = map(&items, |x| x * 2);
        assert_eq!(out, map_sequential(&items, |x| x * 2));
        assert_eq!(map_bounded(&items, 3, |x| x + 1)[999], 1000);
    }

    #[test]
    fn fold_merge_sums() {
        let items: Vec<u64> = (1..=100).collect();
        let total = fold_merge(&items, || 0u64, |a, x| a + x, |a, b| a + b);
        assert_eq!(total, 5050);
    }
}
