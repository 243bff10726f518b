//! Run orchestration behind the `superarrivals` binary: single runs,
//! static/perturbed pairs, switch-off sweeps, and the plane-wave curve.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use superarrivals::analysis::{build_report, SuperarrivalReport};
use superarrivals::config::{load_config, LoadedConfig, SimulationConfig};
use superarrivals::io as sio;
use superarrivals::planewave::{plane_wave_reflection, BarrierSpec};
use superarrivals::propagator::{run_with_snapshots, SimulationResult};
use superarrivals::Error as CoreError;

/// Exit codes: 0 ok, 1 usage, 2 config, 3 numerical failure.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message())
    }
}

impl std::error::Error for CliError {}

fn config_error(e: CoreError) -> CliError {
    CliError::Config(e.to_string())
}

fn io_error(e: std::io::Error) -> CliError {
    CliError::Numerical(format!("io: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Static,
    Perturbed,
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DConvention {
    /// Barrier left edge to x'.
    Edge,
    /// Barrier center to x'.
    Center,
}

/// Everything `run` and `sweep` need besides the config file itself.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    pub mode: RunKind,
    /// Switch-off step counts; single entry for run, the sweep list for sweep.
    pub n_list: Vec<usize>,
    pub threshold: f64,
    pub d_convention: Option<DConvention>,
    pub snapshot_times: Option<Vec<f64>>,
}

fn load_and_resolve(manifest: &RunManifest) -> Result<SimulationConfig, CliError> {
    let LoadedConfig {
        mut config,
        explicit_detector_d,
    } = load_config(&manifest.config_path).map_err(config_error)?;
    // A convention flag recomputes the detector distance; an explicit
    // detector_D key wins only when no flag was given.
    match manifest.d_convention {
        Some(DConvention::Edge) => {
            config.detector_d = config.barrier.left_edge() - config.x_prime;
        }
        Some(DConvention::Center) => {
            config.detector_d = config.barrier.x_c - config.x_prime;
        }
        None if explicit_detector_d => {}
        None => {
            config.detector_d = config.barrier.left_edge() - config.x_prime;
        }
    }
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(CliError::Config(format!(
            "invalid config {}: {}",
            manifest.config_path.display(),
            violations.join("; ")
        )));
    }
    Ok(config)
}

fn default_snapshots(config: &SimulationConfig) -> Vec<f64> {
    vec![0.0, config.barrier.t_p, config.total_time()]
}

fn simulate(
    config: &SimulationConfig,
    snapshot_times: &[f64],
) -> Result<SimulationResult, CliError> {
    run_with_snapshots(config, snapshot_times).map_err(|e| CliError::Numerical(e.to_string()))
}

fn write_trace_file(out_dir: &Path, result: &SimulationResult) -> Result<PathBuf, CliError> {
    let path = out_dir.join(format!("trace_{}.csv", result.trace.config_tag));
    sio::write_trace(&path, &result.trace).map_err(io_error)?;
    Ok(path)
}

/// Nanosecond-resolution time label with trailing zeros trimmed, so step
/// times that round to a neat decimal name the file neatly.
fn snapshot_label(t: f64) -> String {
    let s = format!("{t:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn write_snapshot_files(out_dir: &Path, result: &SimulationResult) -> Result<(), CliError> {
    for (t, wf) in &result.snapshots {
        let path = out_dir.join(format!("snapshot_t{}.csv", snapshot_label(*t)));
        sio::write_snapshot(&path, wf).map_err(io_error)?;
    }
    Ok(())
}

/// Single run (static or perturbed) or a static+perturbed pair with its
/// report. Writes `trace_<tag>.csv`, `snapshot_<t>.csv`, and for pair mode
/// `report.txt` + `report.kv` into the output directory.
pub fn cmd_run(manifest: &RunManifest) -> Result<(), CliError> {
    let base = load_and_resolve(manifest)?;
    fs::create_dir_all(&manifest.out_dir).map_err(io_error)?;
    let n = *manifest
        .n_list
        .first()
        .ok_or_else(|| CliError::Usage("run mode needs a switch-off step count".to_string()))?;
    let snaps = manifest
        .snapshot_times
        .clone()
        .unwrap_or_else(|| default_snapshots(&base));

    let static_config = SimulationConfig {
        barrier: base.barrier.as_static(),
        ..base
    };
    let perturbed_config = SimulationConfig {
        barrier: base.barrier.as_ramp_down(n, base.grid.dt),
        ..base
    };

    match manifest.mode {
        RunKind::Static => {
            let result = simulate(&static_config, &snaps)?;
            write_trace_file(&manifest.out_dir, &result)?;
            write_snapshot_files(&manifest.out_dir, &result)?;
        }
        RunKind::Perturbed => {
            let result = simulate(&perturbed_config, &snaps)?;
            write_trace_file(&manifest.out_dir, &result)?;
            write_snapshot_files(&manifest.out_dir, &result)?;
        }
        RunKind::Pair => {
            let static_result = simulate(&static_config, &snaps)?;
            let perturbed_result = simulate(&perturbed_config, &snaps)?;
            write_trace_file(&manifest.out_dir, &static_result)?;
            write_trace_file(&manifest.out_dir, &perturbed_result)?;
            write_snapshot_files(&manifest.out_dir, &perturbed_result)?;
            let report = build_report(
                &static_result.trace,
                &perturbed_result.trace,
                &perturbed_config,
                manifest.threshold,
            )
            .map_err(|e| CliError::Numerical(e.to_string()))?;
            let reports = [report];
            fs::write(
                manifest.out_dir.join("report.txt"),
                sio::format_report_text(&reports),
            )
            .map_err(io_error)?;
            fs::write(
                manifest.out_dir.join("report.kv"),
                sio::format_report_kv(&reports),
            )
            .map_err(io_error)?;
        }
    }
    Ok(())
}

/// One static run plus one perturbed run per switch-off count, in parallel,
/// then the three summary tables. Traces land next to the tables; partial
/// outputs survive a failing run.
pub fn cmd_sweep(manifest: &RunManifest) -> Result<(), CliError> {
    if manifest.n_list.is_empty() {
        return Err(CliError::Usage("sweep needs at least one N".to_string()));
    }
    let base = load_and_resolve(manifest)?;
    fs::create_dir_all(&manifest.out_dir).map_err(io_error)?;

    let static_config = SimulationConfig {
        barrier: base.barrier.as_static(),
        ..base
    };
    let static_result = simulate(&static_config, &[])?;
    write_trace_file(&manifest.out_dir, &static_result)?;

    // One worker per N: the runs are independent and equally sized.
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(manifest.n_list.len())
        .build()
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let outcomes: Vec<Result<SuperarrivalReport, CliError>> = pool.install(|| {
        manifest
            .n_list
            .par_iter()
            .map(|&n| {
                let config = SimulationConfig {
                    barrier: base.barrier.as_ramp_down(n, base.grid.dt),
                    ..base
                };
                let result = simulate(&config, &[])?;
                write_trace_file(&manifest.out_dir, &result)?;
                build_report(
                    &static_result.trace,
                    &result.trace,
                    &config,
                    manifest.threshold,
                )
                .map_err(|e| CliError::Numerical(format!("N={n}: {e}")))
            })
            .collect()
    });

    let mut reports = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        reports.push(outcome?);
    }
    fs::write(
        manifest.out_dir.join("table1.txt"),
        sio::format_table1(&reports),
    )
    .map_err(io_error)?;
    fs::write(
        manifest.out_dir.join("table2.txt"),
        sio::format_table2(&reports),
    )
    .map_err(io_error)?;
    fs::write(
        manifest.out_dir.join("table3.txt"),
        sio::format_table3(&reports),
    )
    .map_err(io_error)?;
    fs::write(
        manifest.out_dir.join("report.kv"),
        sio::format_report_kv(&reports),
    )
    .map_err(io_error)?;
    Ok(())
}

/// Analytic |R(p)|² over a momentum range, written as `planewave.csv`.
pub fn cmd_planewave(
    out_dir: &Path,
    spec: &BarrierSpec,
    p_min: f64,
    p_max: f64,
    p_count: usize,
) -> Result<(), CliError> {
    if p_min <= 0.0 || p_max < p_min || p_count == 0 {
        return Err(CliError::Usage(format!(
            "momentum range must satisfy 0 < p_min <= p_max and count >= 1 \
             (got {p_min}..{p_max} x{p_count})"
        )));
    }
    fs::create_dir_all(out_dir).map_err(io_error)?;
    let mut rows = Vec::with_capacity(p_count);
    for j in 0..p_count {
        let p = if p_count == 1 {
            p_min
        } else {
            p_min + j as f64 * (p_max - p_min) / (p_count - 1) as f64
        };
        let r2 = plane_wave_reflection(p, spec).map_err(|e| CliError::Numerical(e.to_string()))?;
        rows.push((p, r2));
    }
    sio::write_planewave(&out_dir.join("planewave.csv"), &rows).map_err(io_error)?;
    Ok(())
}
