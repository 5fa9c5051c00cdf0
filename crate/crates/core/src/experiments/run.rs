use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::initial::{load_initial, InitialCondition};
use super::snapshot::Snapshotter;
use crate::diagnostics::{DiagnosticsSample, Sampler};
use crate::dynamics::{k_star, Model, ModelParams};
use crate::error::{FksError, Result};
use crate::record::RunRecord;
use crate::spectral::Grid;
use crate::stepper::{integrate, IntegrationState, ObserverSet, StepperConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid_n: usize,
    #[serde(default)]
    pub stepper: StepperConfig,
    pub t_end: f64,
    #[serde(default)]
    pub ic: InitialCondition,
    pub sample_interval: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Nothing is written when absent.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn new(params: ModelParams, grid_n: usize, t_end: f64) -> Self {
        Self {
            params,
            grid_n,
            stepper: StepperConfig::default(),
            t_end,
            ic: InitialCondition::default(),
            sample_interval: 0.5,
            snapshot_times: Vec::new(),
            out_dir: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.stepper.validate()?;
        Grid::new(self.grid_n)?;
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(FksError::param(format!(
                "t_end must be finite and non-negative, got {}",
                self.t_end
            )));
        }
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return Err(FksError::param(format!(
                "sample_interval must be positive, got {}",
                self.sample_interval
            )));
        }
        Ok(())
    }
}

/// A finished (or aborted) run together with its final state.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub record: RunRecord,
    pub state: IntegrationState,
    pub mean_removed: f64,
}

pub fn run_experiment(cfg: &RunConfig) -> Result<RunRecord> {
    execute(cfg).map(|o| o.record)
}

/// Integrate `cfg`, sampling diagnostics and writing outputs to `cfg.out_dir`.
/// An aborted integration is reported through the record's status.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = Grid::new(cfg.grid_n)?;
    let model = Model::new(cfg.params, &grid)?;
    let ks = k_star(&cfg.params);
    if ks > 0.5 * grid.dealias_cutoff() as f64 {
        log::warn!(
            "k* = {ks:.1} exceeds half the dealias cutoff {}; the dissipative range is not resolved",
            grid.dealias_cutoff()
        );
    }
    let init = load_initial(&cfg.ic, &grid, cfg.seed)?;
    if cfg.t_end < init.t0 {
        return Err(FksError::param(format!(
            "t_end = {} precedes the initial time {}",
            cfg.t_end, init.t0
        )));
    }
    let dt = init.dt.unwrap_or_else(|| cfg.stepper.initial_dt());
    let state = IntegrationState::new(init.field, init.t0, dt);

    let mut observers: ObserverSet = vec![Box::new(Sampler::new(
        cfg.params,
        init.t0,
        cfg.sample_interval,
        cfg.t_end,
    )?)];
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir)?;
        observers.push(Box::new(Snapshotter::new(
            dir.join("snapshots"),
            cfg.params,
            &cfg.snapshot_times,
            init.t0,
        )?));
    }
    let mut out = integrate(state, &model, &cfg.stepper, cfg.t_end, &mut observers)?;
    drop(observers);
    out.record.config = serde_json::to_value(cfg)?;

    if let Some(dir) = &cfg.out_dir {
        write_series_csv(&dir.join("series.csv"), &out.record.samples)?;
        write_manifest(dir, cfg, &grid, &out.record, init.mean_removed)?;
    }
    Ok(RunOutput {
        record: out.record,
        state: out.state,
        mean_removed: init.mean_removed,
    })
}

pub const SERIES_HEADER: &str = "t,l2,linf,dx_linf,h_half,mean,n_critical,rho,dt";

pub fn write_series_csv(path: &Path, samples: &[DiagnosticsSample]) -> Result<()> {
    let mut s = String::with_capacity(200 * (samples.len() + 1));
    s.push_str(SERIES_HEADER);
    s.push('\n');
    for x in samples {
        let rho = x.rho.unwrap_or(f64::NAN);
        writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e}",
            x.t, x.l2, x.linf, x.dx_linf, x.h_half, x.mean, x.n_critical, rho, x.dt
        )
        .unwrap();
    }
    fs::write(path, s)?;
    Ok(())
}

fn write_manifest(dir: &Path, cfg: &RunConfig, grid: &Grid, record: &RunRecord, mean_removed: f64) -> Result<()> {
    let snapshots: Vec<_> = record
        .snapshots
        .iter()
        .map(|s| {
            let rel = s.path.strip_prefix(dir).unwrap_or(&s.path);
            json!({ "t": s.t, "path": rel })
        })
        .collect();
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "grid": { "n": grid.n(), "dealias_cutoff": grid.dealias_cutoff() },
        "params": cfg.params,
        "k_star": k_star(&cfg.params),
        "initial_mean_removed": mean_removed,
        "status": record.status,
        "abort_reason": record.abort_reason,
        "final_t": record.final_t,
        "n_steps": record.n_steps,
        "n_rejects": record.n_rejects,
        "n_samples": record.samples.len(),
        "wall_time": record.wall_time,
        "files": { "series": "series.csv", "snapshots": snapshots },
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}
