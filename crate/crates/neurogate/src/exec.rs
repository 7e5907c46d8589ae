//! Deterministic batch execution.
//!
//! Batch reductions are split into fixed-size chunks. Each chunk is
//! accumulated sequentially in index order and the chunk partials are folded
//! by the caller in chunk order, so the arithmetic graph does not depend on
//! thread count or on whether the `parallel` feature is enabled at all.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk size used by batch gradient and metric reductions.
pub const CHUNK: usize = 16;

pub fn chunk_count(n: usize, chunk: usize) -> usize {
    assert!(chunk > 0);
    n.div_ceil(chunk)
}

/// Applies `f` to every chunk range of `0..n` and returns the results in
/// chunk order.
pub fn map_chunks<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let ranges = |i: usize| {
        let lo = i * chunk;
        let hi = (lo + chunk).min(n);
        lo..hi
    };
    let m = chunk_count(n, chunk);
    #[cfg(feature = "parallel")]
    {
        (0..m).into_par_iter().map(|i| f(ranges(i))).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..m).map(|i| f(ranges(i))).collect()
    }
}

/// Applies `f` to every index of `0..n` and returns results in index order.
pub fn map_items<T, F>(n: usize, f: F) -> Vec<T>
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
