//! Worker-pool bridge.
//!
//! With the default `parallel` feature the per-cube loops fan out over a
//! rayon pool; without it everything runs sequentially through the same
//! entry points. Results are collected in input order and reduced
//! deterministically, so both paths produce identical bytes.

/// Maps `f` over `items` sequentially. Always available; the criterion
/// benches use it as the baseline.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Maps `f` over `items` on the current rayon pool, preserving order.
#[cfg(feature = "parallel")]
pub fn map_items<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Sequential fallback when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn map_items<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_sequential(items, f)
}

/// Runs `job` on a pool with `workers` threads (rayon default when `None`).
#[cfg(feature = "parallel")]
pub fn with_workers<R, F>(workers: Option<usize>, job: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match workers {
        Some(w) if w >= 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .expect("worker pool");
            pool.install(job)
        }
        _ => job(),
    }
}

/// Without the `parallel` feature the worker count is ignored.
#[cfg(not(feature = "parallel"))]
pub fn with_workers<R, F>(_workers: Option<usize>, job: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    job()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_in_order() {
        let items: Vec<u64> = (0..257).collect();
        let seq = map_sequential(&items, |x| x * x + 1);
        let par = with_workers(Some(4), || map_items(&items, |x| x * x + 1));
        assert_eq!(seq, par);
    }
}
