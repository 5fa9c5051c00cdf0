use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::{execute, RunConfig};
use crate::diagnostics::{classify_regime, window_spreads, Regime, WindowSpreads, DEFAULT_REGIME_TOL};
use crate::dynamics::{k_star, ModelParams};
use crate::error::{FksError, Result};
use crate::record::{RunRecord, RunStatus};
use crate::spectral::Grid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: RunConfig,
    /// `eps`, `gamma` or `delta`.
    pub axis: String,
    pub values: Vec<f64>,
    /// Classification window; the second half of `[t0, t_end]` when absent.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default = "default_tol")]
    pub regime_tol: f64,
    /// Points whose `k*` exceeds this fraction of the dealias cutoff are
    /// marked failed without running.
    #[serde(default = "default_resolved_fraction")]
    pub max_kstar_fraction: f64,
    /// Worker count; the rayon default when absent.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_tol() -> f64 {
    DEFAULT_REGIME_TOL
}

fn default_resolved_fraction() -> f64 {
    0.5
}

impl SweepConfig {
    pub fn new(base: RunConfig, axis: &str, values: Vec<f64>) -> Self {
        Self {
            base,
            axis: axis.to_string(),
            values,
            window: None,
            regime_tol: DEFAULT_REGIME_TOL,
            max_kstar_fraction: default_resolved_fraction(),
            threads: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.values.len() < 2 {
            return Err(FksError::param("a sweep needs at least two values"));
        }
        if !self.values.windows(2).all(|w| w[0] < w[1]) {
            return Err(FksError::param("sweep values must be strictly increasing"));
        }
        if !matches!(self.axis.as_str(), "eps" | "gamma" | "delta") {
            return Err(FksError::param(format!("unknown sweep axis '{}'", self.axis)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub k_star: f64,
    /// `None` for failed points.
    pub regime: Option<Regime>,
    pub spreads: Option<WindowSpreads>,
    pub final_l2: Option<f64>,
    pub final_linf: Option<f64>,
    pub failure: Option<String>,
    pub run_dir: Option<PathBuf>,
    #[serde(skip)]
    pub record: Option<RunRecord>,
}

impl SweepPoint {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    pub axis: String,
    pub base_params: ModelParams,
    pub points: Vec<SweepPoint>,
    pub transition_bracket: Option<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub bracket: (f64, f64),
    pub midpoint: f64,
    /// `k*` at the bracket midpoint.
    pub k_star: f64,
}

/// Run every point of the sweep, possibly concurrently, and classify each.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepRecord> {
    cfg.validate()?;
    let grid = Grid::new(cfg.base.grid_n)?;
    let log = match &cfg.base.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Some(Mutex::new(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(dir.join("progress.log"))?,
            ))
        }
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| FksError::param(format!("cannot build worker pool: {e}")))?;
    let points: Vec<SweepPoint> = pool.install(|| {
        cfg.values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| {
                let point = run_point(cfg, &grid, i, v);
                progress(&log, &cfg.axis, &point);
                point
            })
            .collect()
    });
    let record = SweepRecord {
        axis: cfg.axis.clone(),
        base_params: cfg.base.params,
        transition_bracket: transition_bracket(&points),
        points,
    };
    if let Some(dir) = &cfg.base.out_dir {
        let summary = serde_json::json!({ "config": cfg, "sweep": &record, "transition": detect_transition(&record) });
        fs::write(dir.join("sweep.json"), serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(record)
}

fn progress(log: &Option<Mutex<File>>, axis: &str, p: &SweepPoint) {
    let line = match (&p.regime, &p.failure) {
        (Some(r), _) => format!("{axis} = {}: {r:?}, k* = {:.3}", p.value, p.k_star),
        (None, Some(f)) => format!("{axis} = {}: failed ({f})", p.value),
        _ => format!("{axis} = {}: done", p.value),
    };
    log::info!("{line}");
    if let Some(m) = log {
        if let Ok(mut f) = m.lock() {
            let _ = writeln!(f, "{line}");
        }
    }
}

fn run_point(cfg: &SweepConfig, grid: &Grid, index: usize, value: f64) -> SweepPoint {
    let run_dir = cfg
        .base
        .out_dir
        .as_ref()
        .map(|d| d.join(format!("point_{index:02}_{}_{value}", cfg.axis)));
    let mut point = SweepPoint {
        value,
        k_star: f64::NAN,
        regime: None,
        spreads: None,
        final_l2: None,
        final_linf: None,
        failure: None,
        run_dir: run_dir.clone(),
        record: None,
    };
    let params = match cfg.base.params.with_param(&cfg.axis, value) {
        Ok(p) => p,
        Err(e) => {
            point.failure = Some(e.to_string());
            return point;
        }
    };
    point.k_star = k_star(&params);
    let limit = cfg.max_kstar_fraction * grid.dealias_cutoff() as f64;
    if point.k_star > limit {
        point.failure = Some(format!(
            "under-resolved: k* = {:.1} exceeds {limit:.1} ({} of the dealias cutoff {})",
            point.k_star,
            cfg.max_kstar_fraction,
            grid.dealias_cutoff()
        ));
        return point;
    }
    let mut run = cfg.base.clone();
    run.params = params;
    run.out_dir = run_dir;
    let out = match execute(&run) {
        Ok(o) => o,
        Err(e) => {
            point.failure = Some(e.to_string());
            return point;
        }
    };
    let record = out.record;
    if record.status == RunStatus::Aborted {
        point.failure = Some(record.abort_reason.clone().unwrap_or_else(|| "aborted".into()));
        point.record = Some(record);
        return point;
    }
    if let Some(s) = record.last_sample() {
        point.final_l2 = Some(s.l2);
        point.final_linf = Some(s.linf);
    }
    let t0 = record.samples.first().map_or(0.0, |s| s.t);
    let window = cfg.window.unwrap_or((0.5 * (t0 + run.t_end), run.t_end));
    match classify_regime(&record.samples, window, cfg.regime_tol) {
        Ok(r) => {
            point.regime = Some(r);
            point.spreads = window_spreads(&record.samples, window).ok();
        }
        Err(e) => point.failure = Some(e.to_string()),
    }
    point.record = Some(record);
    point
}

/// The pair of neighbouring classified values across which the regime flips,
/// provided it flips exactly once. Failed points are skipped.
pub fn transition_bracket(points: &[SweepPoint]) -> Option<(f64, f64)> {
    let classified: Vec<(f64, Regime)> = points.iter().filter_map(|p| p.regime.map(|r| (p.value, r))).collect();
    let flips: Vec<(f64, f64)> = classified
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| (w[0].0, w[1].0))
        .collect();
    match flips.as_slice() {
        [one] => Some(*one),
        _ => None,
    }
}

pub fn detect_transition(s: &SweepRecord) -> Option<Transition> {
    let bracket = s.transition_bracket?;
    let midpoint = 0.5 * (bracket.0 + bracket.1);
    let params = s.base_params.with_param(&s.axis, midpoint).ok()?;
    Some(Transition {
        bracket,
        midpoint,
        k_star: k_star(&params),
    })
}
