//! Order-independent execution of independent trials.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How a batch of independent trials is scheduled. Both modes produce the
/// same results because every trial derives its own seed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Evaluate `f(0..count)`, returning results in trial order.
pub(crate) fn map_trials<T, F>(count: u64, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match execution {
        Execution::Serial => (0..count).map(f).collect(),
        Execution::Parallel => (0..count).into_par_iter().map(f).collect(),
    }
}
