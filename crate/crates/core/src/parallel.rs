//! Minimal deterministic data parallelism over scoped threads.
//!
//! The heavy loops here (eigenfunction tabulation, Gram products, probe
//! sweeps) are embarrassingly parallel over an index range. Work is split
//! into contiguous chunks, each thread fills its own disjoint slice, and
//! results are identical to the sequential run bit for bit — no reduction
//! order ever changes.
//!
//! Thread count: `NUM_THREADS` env var if set, else available parallelism.

use std::sync::OnceLock;

pub fn num_threads() -> usize {
    static N: OnceLock<usize> = OnceLock::new();
    *N.get_or_init(|| {
        std::env::var("NUM_THREADS")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            })
            .min(64)
    })
}

/// `out[i] = f(i)` for `i in 0..n`, computed on up to `num_threads()` threads.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = num_threads().min(n.max(1));
    if threads <= 1 || n < 2 {
        return (0..n).map(f).collect();
    }
    let mut out: Vec<Option<T>> = Vec::with_capacity(n);
    out.resize_with(n, || None);
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        for (t, slice) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                let base = t * chunk;
                for (j, slot) in slice.iter_mut().enumerate() {
                    *slot = Some(f(base + j));
                }
            });
        }
    });
    out.into_iter()
        .map(|x| x.expect("par_map slot filled"))
        .collect()
}

/// Fills `out` chunkwise: `fill(start, chunk_slice)` writes values for the
/// index range `start .. start + chunk_slice.len()`. Useful when each row of
/// a flat matrix buffer is produced independently.
pub fn par_fill<T, F>(out: &mut [T], fill: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    let n = out.len();
    let threads = num_threads().min(n.max(1));
    if threads <= 1 || n < 2 {
        fill(0, out);
        return;
    }
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        for (t, slice) in out.chunks_mut(chunk).enumerate() {
            let fill = &fill;
            scope.spawn(move || fill(t * chunk, slice));
        }
    });
}

/// Like `par_fill` but chunk boundaries land on whole rows of a row-major
/// buffer: `fill(first_row, slice)` receives complete rows starting at
/// `first_row`. Lets matrix kernels keep row-contiguous inner loops.
pub fn par_fill_rows<T, F>(out: &mut [T], row_len: usize, fill: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    if out.is_empty() || row_len == 0 {
        return;
    }
    debug_assert_eq!(out.len() % row_len, 0);
    let rows = out.len() / row_len;
    let threads = num_threads().min(rows);
    if threads <= 1 || rows < 2 {
        fill(0, out);
        return;
    }
    let rows_per = rows.div_ceil(threads);
    let chunk = rows_per * row_len;
    std::thread::scope(|scope| {
        for (t, slice) in out.chunks_mut(chunk).enumerate() {
            let fill = &fill;
            scope.spawn(move || fill(t * rows_per, slice));
        }
    });
}

/// Maximum of `f(i)` over `i in 0..n` with the smallest attaining index.
/// Ties and floating comparisons resolve identically to the sequential scan.
pub fn par_max_by_index<F>(n: usize, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync,
{
    if n == 0 {
        return None;
    }
    let vals = par_map(n, f);
    let mut best = (0usize, vals[0]);
    for (i, &v) in vals.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (i, v);
        }
    }
    Some(best)
}
