//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature disabled every helper runs sequentially and
//! [`Execution::Parallel`] is treated as [`Execution::Sequential`]. Results
//! never depend on the execution mode.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How data-parallel loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when loops actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Chunk length for grid-sized loops.
pub(crate) const GRID_CHUNK: usize = 1 << 14;

fn chunk_ranges(len: usize, chunk: usize) -> impl Iterator<Item = Range<usize>> + Clone {
    (0..len.div_ceil(chunk)).map(move |c| c * chunk..((c + 1) * chunk).min(len))
}

/// `(value, index)` minimum where ties go to the smaller index.
#[inline]
pub(crate) fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Reduces per-chunk `(value, index)` minima over `0..len`. `scan` must return
/// the first minimum within the range it is given.
pub(crate) fn argmin_by_chunks<F>(exec: Execution, len: usize, scan: F) -> (f64, usize)
where
    F: Fn(Range<usize>) -> (f64, usize) + Sync + Send,
{
    let init = (f64::INFINITY, usize::MAX);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        let ranges: Vec<_> = chunk_ranges(len, GRID_CHUNK).collect();
        return ranges.into_par_iter().map(&scan).reduce(|| init, better);
    }
    let _ = exec;
    chunk_ranges(len, GRID_CHUNK).map(scan).fold(init, better)
}

/// Applies `f(offset, chunk)` to consecutive mutable chunks of `data`.
pub(crate) fn for_each_chunk_mut<F>(exec: Execution, data: &mut [f64], f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(GRID_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| f(c * GRID_CHUNK, chunk));
        return;
    }
    let _ = exec;
    for (c, chunk) in data.chunks_mut(GRID_CHUNK).enumerate() {
        f(c * GRID_CHUNK, chunk);
    }
}

/// `(0..n).map(f).collect()`, in index order regardless of execution mode.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}
