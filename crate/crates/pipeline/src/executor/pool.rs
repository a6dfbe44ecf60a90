//! Bounded worker pool with index-ordered results.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

/// Runs `job(0..n_jobs)` on at most `parallelism` threads and returns the
/// results in index order, independent of scheduling.
///
/// The first `Err` stops workers from picking up new jobs; jobs already
/// running finish. The lowest-indexed error is returned.
pub fn run_indexed<T, E, F>(n_jobs: usize, parallelism: usize, job: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync,
{
    let workers = parallelism.max(1).min(n_jobs.max(1));
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let slots: Mutex<Vec<Option<Result<T, E>>>> = Mutex::new((0..n_jobs).map(|_| None).collect());

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= n_jobs {
                    break;
                }
                let out = job(idx);
                if out.is_err() {
                    abort.store(true, Ordering::Relaxed);
                }
                slots.lock().unwrap()[idx] = Some(out);
            });
        }
    });

    let mut results = Vec::with_capacity(n_jobs);
    for slot in slots.into_inner().unwrap() {
        match slot {
            Some(Ok(v)) => results.push(v),
            Some(Err(e)) => return Err(e),
            // only reachable after an abort, which the loop above returns on
            None => continue,
        }
    }
    Ok(results)
}
