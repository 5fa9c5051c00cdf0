//! `fks`: command-line front end for the fractional KS laboratory.
//!
//! Every invocation writes exactly one JSON document to stdout; logs and
//! human-readable errors go to stderr. Exit codes: 0 success, 1 bad input,
//! 2 the computation ran but did not succeed (aborted run, failed check).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fks_core::diagnostics::{
    classify_regime, count_critical_points, default_fit_range, fit_analyticity_radius, sample, window_spreads,
    DiagnosticsSample, DEFAULT_REGIME_TOL,
};
use fks_core::experiments::{
    detect_transition, execute, read_snapshot, sweep, IcKind, RunConfig, SweepConfig, SERIES_HEADER,
};
use fks_core::kernel::{oracle_battery, KernelQuadratureConfig};
use fks_core::record::RunStatus;
use fks_core::spectral::{to_spectral, Grid, PhysicalField};
use fks_core::theory::theory_constants;
use fks_core::{k_star, FksError, Method, ModelParams, StepperConfig, Variant};

const ORACLE_TOL: f64 = 1e-3;

#[derive(Parser)]
#[command(
    name = "fks",
    version,
    about = "Pseudo-spectral solver for the fractional Kuramoto–Sivashinsky equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and persist its outputs.
    Run(RunArgs),
    /// Run one configuration per value of a parameter and locate the regime change.
    Sweep(SweepArgs),
    /// Diagnostics of a snapshot file or of a finished run directory.
    Diagnose(DiagnoseArgs),
    /// Closed-form constants of the a-priori estimates.
    Theory(TheoryArgs),
    /// Compare the kernel quadrature with the Fourier multiplier.
    OracleCheck(OracleArgs),
    /// Version and defaults.
    Info,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Fractional,
    ClassicKs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Erk,
    Etdrk4,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct RunFlags {
    /// JSON file with a run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    /// Grid points.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// cos, cos-gauss-sin, random-h3 or snapshot:<path>
    #[arg(long)]
    ic: Option<String>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Fixed step (etdrk4) or initial step (erk).
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
    #[arg(long = "abs-tol")]
    abs_tol: Option<f64>,
    #[arg(long = "sample-interval")]
    sample_interval: Option<f64>,
    /// Comma-separated snapshot times.
    #[arg(long = "snapshot-times", value_delimiter = ',')]
    snapshot_times: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    flags: RunFlags,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    flags: RunFlags,
    /// eps, gamma or delta.
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated, increasing.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Classification window as `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    window: Option<Vec<f64>>,
    #[arg(long = "regime-tol")]
    regime_tol: Option<f64>,
    /// Worker count; defaults to FKS_THREADS or the machine parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// FKS1 snapshot to analyse.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Run directory containing series.csv.
    #[arg(long)]
    run: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', num_args = 2)]
    window: Option<Vec<f64>>,
    #[arg(long = "regime-tol", default_value_t = DEFAULT_REGIME_TOL)]
    regime_tol: f64,
}

#[derive(Args)]
struct TheoryArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "u0-h3")]
    u0_h3: f64,
    #[arg(long = "u0-linf")]
    u0_linf: f64,
    #[arg(long = "M", default_value_t = 2.0)]
    m: f64,
    /// The unspecified constant of the strip-width estimate.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long = "quad-points", default_value_t = 4096)]
    quad_points: usize,
    #[arg(long = "n-images", default_value_t = 64)]
    n_images: usize,
    #[arg(long = "no-tail-correction")]
    no_tail_correction: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Outcome of a subcommand: the JSON to print and the exit code.
type Outcome = Result<(Value, u8), FksError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            if code == 1 {
                println!("{}", json!({ "error": e.kind().to_string() }));
            }
            return ExitCode::from(code);
        }
    };
    let threads = env_threads();
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a, threads),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Theory(a) => cmd_theory(a),
        Command::OracleCheck(a) => cmd_oracle(a),
        Command::Info => cmd_info(threads),
    };
    match outcome {
        Ok((v, code)) => {
            println!("{v}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("{}", json!({ "error": e.to_string() }));
            ExitCode::from(1)
        }
    }
}

fn env_threads() -> Option<usize> {
    std::env::var("FKS_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
}

fn model_params(base: Option<ModelParams>, a: &ModelArgs) -> Result<ModelParams, FksError> {
    let variant = match a.variant {
        Some(VariantArg::ClassicKs) => Variant::ClassicKS,
        Some(VariantArg::Fractional) => Variant::Fractional,
        None => base.map_or(Variant::Fractional, |b| b.variant),
    };
    let missing = |name: &str| FksError::InvalidParameter(format!("--{name} is required"));
    let eps = a.eps.or(base.map(|b| b.eps)).ok_or_else(|| missing("eps"))?;
    let p = match variant {
        Variant::ClassicKS => ModelParams::classic_ks(eps)?,
        Variant::Fractional => {
            let from_base = base.filter(|b| b.variant == Variant::Fractional);
            let gamma = a.gamma.or(from_base.map(|b| b.gamma)).ok_or_else(|| missing("gamma"))?;
            let delta = a.delta.or(from_base.map(|b| b.delta)).ok_or_else(|| missing("delta"))?;
            ModelParams::fractional(eps, gamma, delta)?
        }
    };
    Ok(p)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, FksError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Merge a config file (if any) with command-line flags.
fn run_config(f: &RunFlags, default_n: usize, file: Option<RunConfig>) -> Result<RunConfig, FksError> {
    let params = model_params(file.as_ref().map(|c| c.params), &f.model)?;
    let mut cfg = match file {
        Some(mut c) => {
            c.params = params;
            c
        }
        None => {
            let t_end = f
                .t_end
                .ok_or_else(|| FksError::InvalidParameter("--t-end is required".into()))?;
            RunConfig::new(params, default_n, t_end)
        }
    };
    if let Some(n) = f.n {
        cfg.grid_n = n;
    }
    if let Some(t) = f.t_end {
        cfg.t_end = t;
    }
    if let Some(ic) = &f.ic {
        cfg.ic.kind = ic.parse::<IcKind>()?;
    }
    if let Some(a) = f.amplitude {
        cfg.ic.amplitude = a;
    }
    if let Some(m) = f.method {
        cfg.stepper.method = match m {
            MethodArg::Erk => Method::AdaptiveErk,
            MethodArg::Etdrk4 => Method::Etdrk4,
        };
    }
    if let Some(dt) = f.dt {
        cfg.stepper.dt_fixed = dt;
        cfg.stepper.dt_init = dt;
    }
    if let Some(r) = f.rel_tol {
        cfg.stepper.rel_tol = r;
    }
    if let Some(a) = f.abs_tol {
        cfg.stepper.abs_tol = a;
    }
    if let Some(s) = f.sample_interval {
        cfg.sample_interval = s;
    }
    if let Some(ts) = &f.snapshot_times {
        cfg.snapshot_times = ts.clone();
    }
    if let Some(o) = &f.out {
        cfg.out_dir = Some(o.clone());
    }
    if let Some(s) = f.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(a: RunArgs) -> Outcome {
    let file = a.flags.config.as_deref().map(read_json::<RunConfig>).transpose()?;
    let cfg = run_config(&a.flags, 4096, file)?;
    log::info!(
        "run: {} eps={} gamma={} delta={} n={} t_end={}",
        cfg.params.variant,
        cfg.params.eps,
        cfg.params.gamma,
        cfg.params.delta,
        cfg.grid_n,
        cfg.t_end
    );
    let out = execute(&cfg)?;
    let rec = &out.record;
    let code = if rec.status == RunStatus::Complete { 0 } else { 2 };
    if let Some(reason) = &rec.abort_reason {
        eprintln!("run aborted: {reason}");
    }
    let last = rec.last_sample().map(|s| serde_json::to_value(s)).transpose()?;
    Ok((last.unwrap_or(Value::Null), code))
}

fn cmd_sweep(mut a: SweepArgs, env_threads: Option<usize>) -> Outcome {
    // The swept parameter need not be given separately.
    if let (Some(axis), Some(first)) = (a.axis.as_deref(), a.values.as_ref().and_then(|v| v.first())) {
        let m = &mut a.flags.model;
        let slot = match axis {
            "eps" => &mut m.eps,
            "gamma" => &mut m.gamma,
            "delta" => &mut m.delta,
            _ => return Err(FksError::InvalidParameter(format!("unknown sweep axis '{axis}'"))),
        };
        slot.get_or_insert(*first);
    }
    let file: Option<SweepConfig> = a.flags.config.as_deref().map(read_json).transpose()?;
    let mut cfg = match file {
        Some(mut s) => {
            s.base = run_config(&a.flags, s.base.grid_n, Some(s.base))?;
            s
        }
        None => {
            let base = run_config(&a.flags, 1024, None)?;
            let axis = a
                .axis
                .clone()
                .ok_or_else(|| FksError::InvalidParameter("--axis is required".into()))?;
            SweepConfig::new(base, &axis, Vec::new())
        }
    };
    if let Some(axis) = &a.axis {
        cfg.axis = axis.clone();
    }
    if let Some(v) = &a.values {
        cfg.values = v.clone();
    }
    if let Some(w) = &a.window {
        cfg.window = Some((w[0], w[1]));
    }
    if let Some(t) = a.regime_tol {
        cfg.regime_tol = t;
    }
    if let Some(t) = a.threads.or(env_threads) {
        cfg.threads = Some(t);
    }
    let record = sweep(&cfg)?;
    let transition = detect_transition(&record);
    Ok((json!({ "sweep": record, "transition": transition }), 0))
}

fn cmd_diagnose(a: DiagnoseArgs) -> Outcome {
    if a.snapshot.is_none() && a.run.is_none() {
        return Err(FksError::InvalidParameter("give --snapshot and/or --run".into()));
    }
    let mut out = serde_json::Map::new();
    if let Some(path) = &a.snapshot {
        let snap = read_snapshot(path)?;
        let params = snap.params();
        let grid = Grid::new(snap.header.n)?;
        let u = PhysicalField::new(&grid, snap.values.clone())?;
        let f = to_spectral(&u)?;
        out.insert(
            "snapshot".into(),
            json!({
                "header": snap.header,
                "sample": sample(&f, snap.header.t, &params)?,
                "critical_points": count_critical_points(&u)?,
                "fit": fit_analyticity_radius(&f, default_fit_range(&grid)),
                "k_star": k_star(&params),
            }),
        );
    }
    if let Some(dir) = &a.run {
        let samples = read_series(&dir.join("series.csv"))?;
        let (t0, t1) = match (samples.first(), samples.last()) {
            (Some(a), Some(b)) => (a.t, b.t),
            _ => return Err(FksError::TooFewSamples { needed: 1, got: 0 }),
        };
        let window = a.window.as_ref().map_or((0.5 * (t0 + t1), t1), |w| (w[0], w[1]));
        let (regime, spreads, note) = match classify_regime(&samples, window, a.regime_tol) {
            Ok(r) => (Some(r), window_spreads(&samples, window).ok(), None),
            Err(e) => (None, None, Some(e.to_string())),
        };
        out.insert(
            "run".into(),
            json!({
                "n_samples": samples.len(),
                "window": window,
                "regime": regime,
                "regime_unavailable": note,
                "spreads": spreads,
                "final": samples.last(),
            }),
        );
    }
    Ok((Value::Object(out), 0))
}

fn read_series(path: &Path) -> Result<Vec<DiagnosticsSample>, FksError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(SERIES_HEADER) {
        return Err(FksError::InvalidParameter(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let bad = |i: usize| FksError::InvalidParameter(format!("{}: malformed row {}", path.display(), i + 2));
    lines
        .enumerate()
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 9 {
                return Err(bad(i));
            }
            let num = |k: usize| cols[k].parse::<f64>().map_err(|_| bad(i));
            let rho = num(7)?;
            Ok(DiagnosticsSample {
                t: num(0)?,
                l2: num(1)?,
                linf: num(2)?,
                dx_linf: num(3)?,
                h_half: num(4)?,
                mean: num(5)?,
                n_critical: cols[6].parse().map_err(|_| bad(i))?,
                rho: (!rho.is_nan()).then_some(rho),
                dt: num(8)?,
            })
        })
        .collect()
}

fn cmd_theory(a: TheoryArgs) -> Outcome {
    let p = model_params(None, &a.model)?;
    let t = theory_constants(a.u0_h3, a.u0_linf, a.m, &p, a.c)?;
    Ok((serde_json::to_value(t)?, 0))
}

fn cmd_oracle(a: OracleArgs) -> Outcome {
    let cfg = KernelQuadratureConfig {
        n_images: a.n_images,
        quad_points: a.quad_points,
        tail_correction: !a.no_tail_correction,
        ..KernelQuadratureConfig::default()
    };
    let report = oracle_battery(a.n, a.alpha, &cfg, a.seed)?;
    let pass = report.max_rel_error < ORACLE_TOL;
    let mut v = serde_json::to_value(&report)?;
    v["tolerance"] = json!(ORACLE_TOL);
    v["pass"] = json!(pass);
    Ok((v, if pass { 0 } else { 2 }))
}

fn cmd_info(threads: Option<usize>) -> Outcome {
    Ok((
        json!({
            "name": "fks",
            "version": env!("CARGO_PKG_VERSION"),
            "threads": threads.unwrap_or_else(rayon::current_num_threads),
            "stepper_defaults": StepperConfig::default(),
            "kernel_defaults": KernelQuadratureConfig::default(),
            "regime_tol": DEFAULT_REGIME_TOL,
            "oracle_tol": ORACLE_TOL,
        }),
        0,
    ))
}
