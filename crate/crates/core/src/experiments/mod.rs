//! Initial data, persisted runs, parameter sweeps and transition detection.

mod initial;
mod run;
mod snapshot;
mod sweep;

pub use initial::{load_initial, make_initial, IcKind, InitialCondition, InitialData};
pub use run::{execute, run_experiment, write_series_csv, RunConfig, RunOutput, SERIES_HEADER};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotHeader, Snapshotter, SNAPSHOT_MAGIC};
pub use sweep::{detect_transition, sweep, transition_bracket, SweepConfig, SweepPoint, SweepRecord, Transition};
