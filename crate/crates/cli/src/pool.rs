//! Bounded image-level worker pool.

use anyhow::{Context, Result};
use rayon::prelude::*;

/// Applies `f` to every item on `workers` threads and returns the results
/// in input order. Each call is independent, so the output does not depend
/// on the worker count.
pub fn map_ordered<T, R, F>(workers: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    if workers <= 1 {
        return Ok(items.iter().enumerate().map(|(i, t)| f(i, t)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("starting the worker pool")?;
    Ok(pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_kept() {
        let items: Vec<u64> = (0..50).collect();
        let one = map_ordered(1, &items, |i, v| v * 3 + i as u64).unwrap();
        let many = map_ordered(8, &items, |i, v| v * 3 + i as u64).unwrap();
        assert_eq!(one, many);
        assert_eq!(one[10], 40);
    }
}
