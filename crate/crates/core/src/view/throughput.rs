use std::time::Instant;

use serde::Serialize;

use super::{ViewCollection, ViewDef};
use crate::ledger::Store;
use crate::norm::NowPolicy;

/// Cold materialization figures for one view.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputStats {
    pub norm: String,
    pub state: String,
    #[serde(rename = "docsProcessed")]
    pub docs_processed: usize,
    /// Seconds.
    pub elapsed: f64,
    #[serde(rename = "changesPerSecond")]
    pub changes_per_second: f64,
    pub rows: usize,
    /// Predicate atoms checked over the whole run.
    pub atoms: u64,
}

/// Builds each view from scratch over every document in `store`, timing
/// each one separately. `threads > 1` evaluates documents on a pool of that
/// size, `batch_size` documents per parallel step.
pub fn measure_throughput(
    views: &[ViewDef],
    store: &Store,
    batch_size: usize,
    threads: usize,
    now: NowPolicy,
) -> Vec<ThroughputStats> {
    let pool = (threads > 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    });
    views
        .iter()
        .map(|view| {
            let mut coll = ViewCollection::new(view.clone(), now);
            let start = Instant::now();
            let stats = coll.refresh_batched(store, batch_size, pool.as_ref());
            let elapsed = start.elapsed().as_secs_f64();
            let changes_per_second = if stats.evaluated == 0 || elapsed <= 0.0 {
                0.0
            } else {
                stats.evaluated as f64 / elapsed
            };
            let rows = coll.rows().len();
            ThroughputStats {
                norm: view.norm.clone(),
                state: view.state.clone(),
                docs_processed: stats.evaluated,
                elapsed,
                changes_per_second,
                rows,
                atoms: stats.atoms,
            }
        })
        .collect()
}
