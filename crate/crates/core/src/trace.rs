//! Run traces shared by the pair-IG solver and the baseline methods.

use crate::scalar::Scalar;

/// Which epochs get a trace record.
#[derive(Debug, Clone, Copy)]
pub enum LogSchedule {
    EveryEpoch,
    /// Every epoch up to `dense_until`, then geometrically strided; the
    /// final epoch is always logged. Keeps files bounded for million
    /// epoch runs.
    Strided { dense_until: usize, growth: f64 },
}

impl LogSchedule {
    pub fn default_stride() -> Self {
        LogSchedule::Strided {
            dense_until: 100,
            growth: 1.1,
        }
    }

    /// Sorted epochs to record in `0..=n`, always including `0` and `n`.
    pub fn epochs_to_log(&self, n: usize) -> Vec<usize> {
        match *self {
            LogSchedule::EveryEpoch => (0..=n).collect(),
            LogSchedule::Strided {
                dense_until,
                growth,
            } => {
                let mut out: Vec<usize> = (0..=n.min(dense_until)).collect();
                let mut next = dense_until as f64;
                while (next as usize) < n {
                    next = (next * growth).max(next + 1.0);
                    let e = next as usize;
                    if e < n {
                        out.push(e);
                    }
                }
                if n > dense_until {
                    out.push(n);
                }
                out.dedup();
                out
            }
        }
    }
}

/// Per-agent values at a logged epoch.
#[derive(Debug, Clone)]
pub struct AgentSample<T> {
    /// Global objective at this agent's averaged iterate.
    pub objective: T,
    /// Value of the configured infeasibility metric, when one is set.
    pub infeasibility: Option<T>,
    /// Distance to the last agent's averaged iterate.
    pub consensus_dist: T,
    /// The averaged iterate itself.
    pub average: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct EpochRecord<T> {
    pub epoch: usize,
    pub gamma: T,
    pub eta: T,
    pub agents: Vec<AgentSample<T>>,
    /// Largest signed invariant residual observed since the previous
    /// logged epoch (positive = violation), when instrumentation is on.
    pub invariant_max_residual: Option<T>,
}

/// Immutable log of a solver run.
#[derive(Debug, Clone)]
pub struct RunTrace<T> {
    pub records: Vec<EpochRecord<T>>,
    pub epochs_requested: usize,
    pub num_agents: usize,
    /// Set when the run aborted early; the records up to that point are
    /// kept so partial traces can still be persisted.
    pub truncated: Option<String>,
    /// Number of instrumented invariant checks that exceeded their
    /// slack over the whole run.
    pub invariant_failures: usize,
}

impl<T: Scalar> RunTrace<T> {
    pub fn completed(&self) -> bool {
        self.truncated.is_none()
    }

    pub fn last_record(&self) -> &EpochRecord<T> {
        self.records.last().expect("trace has at least one record")
    }

    /// Record for an exact epoch, if that epoch was logged.
    pub fn record_at(&self, epoch: usize) -> Option<&EpochRecord<T>> {
        self.records.iter().find(|r| r.epoch == epoch)
    }
}
