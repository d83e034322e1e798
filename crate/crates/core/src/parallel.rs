//! Deterministic fork-join over independent indexed tasks.
//!
//! Results are collected by index and reduced in index order by the callers,
//! so output never depends on how many workers ran. The worker count is
//! capped by the `INTERVAL_STATS_THREADS` environment variable.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

/// Worker cap: `INTERVAL_STATS_THREADS` if set, else available parallelism.
pub fn thread_cap() -> usize {
    if let Ok(v) = std::env::var("INTERVAL_STATS_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Applies `f` to `0..n`, returning results ordered by index.
///
/// `threads = None` uses [`thread_cap`]. The schedule is work-stealing over
/// an atomic counter; the returned vector is identical for every worker
/// count because each slot is written exactly once by its own index.
pub fn map_indexed<T, F>(n: usize, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = threads.unwrap_or_else(thread_cap).max(1).min(n.max(1));
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, T)>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let f = &f;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                if tx.send((i, f(i))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
    });

    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    for (i, v) in rx {
        slots[i] = Some(v);
    }
    slots
        .into_iter()
        .map(|s| s.expect("every index produced"))
        .collect()
}
