//! Bounded worker pool shared by the per-n computations.

use rayon::prelude::*;
use rayon::ThreadPool;

/// Environment variable bounding the number of worker threads.
pub const THREADS_ENV: &str = "HILL_THREADS";

fn configured_threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

pub fn pool() -> &'static ThreadPool {
    static POOL: std::sync::OnceLock<ThreadPool> = std::sync::OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new().thread_name(|i| format!("hill-{i}"));
        if let Some(n) = configured_threads() {
            b = b.num_threads(n);
        }
        b.build().expect("thread pool")
    })
}

/// Maps `f` over `items` on the pool; results come back in input order.
pub fn ordered_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    pool().install(|| items.par_iter().map(&f).collect())
}

#[cfg(test)]
mod tests {
    #[test]
    fn keeps_input_order() {
        let xs: Vec<u64> = (0..200).collect();
        let ys = super::ordered_map(&xs, |x| x * x);
        assert_eq!(ys, xs.iter().map(|x| x * x).collect::<Vec<_>>());
    }
}
