//! Thread-count independent reductions.
//!
//! Parallel loops only ever produce per-chunk partial results; the partials
//! are combined sequentially in index order, so a reduction gives the same
//! bits for any pool size.

use rayon::prelude::*;

/// Sum of `f(i)` over `0..len`, chunked by `chunk` and combined in order.
pub fn ordered_sum<F>(len: usize, chunk: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunk = chunk.max(1);
    let parts: Vec<f64> = (0..len.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(len);
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            s
        })
        .collect();
    parts.iter().sum()
}

/// Maximum of `f(i)` over `0..len`; order does not matter for max but the
/// partials are still combined sequentially.
pub fn ordered_max<F>(len: usize, chunk: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunk = chunk.max(1);
    let parts: Vec<f64> = (0..len.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(len);
            let mut m = f64::NEG_INFINITY;
            for i in lo..hi {
                m = m.max(f(i));
            }
            m
        })
        .collect();
    parts.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Configure the global pool from `NSFORGE_THREADS` (if set). Returns the
/// thread count in effect. Safe to call more than once.
pub fn init_from_env() -> usize {
    if let Ok(v) = std::env::var("NSFORGE_THREADS") {
        if let Ok(t) = v.trim().parse::<usize>() {
            if t > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
        }
    }
    rayon::current_num_threads()
}
