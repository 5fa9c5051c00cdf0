use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsSample;
use crate::stepper::IntegrationState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
    Aborted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRef {
    pub t: f64,
    pub path: PathBuf,
}

/// Everything a run produced, minus the field itself.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    /// Echo of the configuration that produced the run (filled in by the caller).
    pub config: serde_json::Value,
    pub samples: Vec<DiagnosticsSample>,
    pub snapshots: Vec<SnapshotRef>,
    pub status: RunStatus,
    pub abort_reason: Option<String>,
    pub final_t: f64,
    pub n_steps: u64,
    pub n_rejects: u64,
    pub wall_time: f64,
}

impl Default for RunRecord {
    fn default() -> Self {
        Self::new()
    }
}

impl RunRecord {
    pub fn new() -> Self {
        Self {
            config: serde_json::Value::Null,
            samples: Vec::new(),
            snapshots: Vec::new(),
            status: RunStatus::Running,
            abort_reason: None,
            final_t: 0.0,
            n_steps: 0,
            n_rejects: 0,
            wall_time: 0.0,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }

    pub fn last_sample(&self) -> Option<&DiagnosticsSample> {
        self.samples.last()
    }

    /// The sample closest to time `t`.
    pub fn sample_near(&self, t: f64) -> Option<&DiagnosticsSample> {
        self.samples
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    pub(crate) fn finalize(&mut self, state: &IntegrationState, wall_time: f64) {
        self.final_t = state.t;
        self.n_steps = state.n_steps;
        self.n_rejects = state.n_rejects;
        self.wall_time = wall_time;
    }
}
