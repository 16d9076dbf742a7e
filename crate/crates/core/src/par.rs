//! Deterministic data-parallel primitives.
//!
//! All reductions chunk the index range at a fixed size, sum each chunk in
//! index order and combine the chunk results in chunk order, so the floating
//! point result is bitwise identical whether chunks run sequentially or on a
//! rayon pool of any size. The `parallel` feature gates rayon; without it
//! every helper degrades to the sequential fallback with the same chunking.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fixed reduction chunk size. Changing it changes summation order and thus
/// the low bits of results; it is part of the reproducibility contract.
pub const CHUNK: usize = 1024;

/// Name of the environment variable capping worker threads.
pub const THREADS_ENV: &str = "SURVCOP_THREADS";

/// Cap the rayon worker pool from `SURVCOP_THREADS` if set. Call once at
/// process start; later calls are no-ops. Without the `parallel` feature
/// this does nothing.
pub fn init_thread_pool_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var(THREADS_ENV) {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    }
}

/// Sum f(i) for i in 0..n with fixed chunking.
pub fn chunked_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    #[cfg(feature = "parallel")]
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| chunk_sum(c, n, &f))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<f64> = (0..chunks).map(|c| chunk_sum(c, n, &f)).collect();
    partials.iter().sum()
}

/// Sequential twin of [`chunked_sum`]; identical arithmetic, never parallel.
pub fn chunked_sum_seq<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks).map(|c| chunk_sum(c, n, &f)).sum()
}

fn chunk_sum<F: Fn(usize) -> f64>(c: usize, n: usize, f: &F) -> f64 {
    let lo = c * CHUNK;
    let hi = n.min(lo + CHUNK);
    let mut s = 0.0;
    for i in lo..hi {
        s += f(i);
    }
    s
}

/// Map f over 0..n preserving index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential twin of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_sums_are_bitwise_equal() {
        // Values with wildly different magnitudes make reordering visible.
        let f = |i: usize| ((i % 97) as f64 - 48.0) * (1.1f64).powi((i % 61) as i32 - 30);
        let n = 10_123;
        let a = chunked_sum(n, f);
        let b = chunked_sum_seq(n, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn map_preserves_order() {
        let v = map_indexed(1000, |i| i * 2);
        assert_eq!(v[0], 0);
        assert_eq!(v[999], 1998);
        assert_eq!(v, map_indexed_seq(1000, |i| i * 2));
    }
}
