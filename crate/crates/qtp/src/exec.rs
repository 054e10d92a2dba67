//! Worker pool for independent proof obligations.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use qtp_core::verify::{Executor, Job, JobOutput, Sequential};

/// Runs jobs on `threads` scoped worker threads. Results come back in job
/// order whatever the completion order.
#[derive(Debug, Clone, Copy)]
pub struct Threads(pub usize);

impl Executor for Threads {
    fn map<'a>(&self, jobs: Vec<Job<'a>>) -> Vec<JobOutput> {
        if self.0 <= 1 || jobs.len() <= 1 {
            return Sequential.map(jobs);
        }
        let n = jobs.len();
        let queue: Vec<Mutex<Option<Job<'a>>>> = jobs.into_iter().map(|j| Mutex::new(Some(j))).collect();
        let results: Vec<Mutex<Option<JobOutput>>> = (0..n).map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for _ in 0..self.0.min(n) {
                s.spawn(|| loop {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    if k >= n {
                        break;
                    }
                    let job = queue[k].lock().expect("job lock").take().expect("each job runs once");
                    let out = job();
                    *results[k].lock().expect("result lock") = Some(out);
                });
            }
        });
        results
            .into_iter()
            .map(|m| m.into_inner().expect("result lock").expect("every job ran"))
            .collect()
    }
}
