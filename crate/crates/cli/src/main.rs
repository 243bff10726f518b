use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use superarrivals::config::{default_config, packet_energy};
use superarrivals::planewave::BarrierSpec;
use superarrivals_cli::{
    cmd_planewave, cmd_run, cmd_sweep, CliError, DConvention, RunKind, RunManifest,
};

#[derive(Parser)]
#[command(
    name = "superarrivals",
    about = "Wave-packet scattering from a switchable rectangular barrier",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Static,
    Perturbed,
    Pair,
}

#[derive(Clone, Copy, ValueEnum)]
enum DConventionArg {
    Edge,
    Center,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,

    /// Deviation threshold on |R(t)|² for the onset detection.
    #[arg(long, default_value_t = superarrivals::analysis::DEFAULT_DEVIATION_THRESHOLD)]
    threshold: f64,

    /// Detector distance convention; omitting it keeps an explicit
    /// detector_D from the config file (default: edge).
    #[arg(long = "D-convention", value_enum)]
    d_convention: Option<DConventionArg>,
}

#[derive(Subcommand)]
enum Command {
    /// One run (static or perturbed) or a static+perturbed pair with report.
    Run {
        #[command(flatten)]
        common: CommonRunArgs,

        /// What to simulate.
        #[arg(long, value_enum, default_value = "pair")]
        mode: ModeArg,

        /// Switch-off step count N.
        #[arg(long = "N", default_value_t = 2)]
        n: usize,

        /// Snapshot instants (default: 0, t_p, final).
        #[arg(long = "snapshot-at", num_args = 1..)]
        snapshot_at: Option<Vec<f64>>,
    },
    /// One static run plus perturbed runs for every N, with summary tables.
    Sweep {
        #[command(flatten)]
        common: CommonRunArgs,

        /// Switch-off step counts.
        #[arg(long = "N", num_args = 1.., default_values_t = [2usize, 10, 30, 50])]
        n_list: Vec<usize>,
    },
    /// Analytic plane-wave reflection curve |R(p)|².
    Planewave {
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,

        /// Barrier height; defaults to 2E of the canonical packet.
        #[arg(long)]
        v0: Option<f64>,

        /// Barrier width.
        #[arg(long, default_value_t = 0.064)]
        width: f64,

        #[arg(long, default_value_t = 40.0)]
        p_min: f64,

        #[arg(long, default_value_t = 280.0)]
        p_max: f64,

        #[arg(long, default_value_t = 1001)]
        p_count: usize,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            common,
            mode,
            n,
            snapshot_at,
        } => {
            let manifest = RunManifest {
                config_path: common.config,
                out_dir: common.out,
                mode: match mode {
                    ModeArg::Static => RunKind::Static,
                    ModeArg::Perturbed => RunKind::Perturbed,
                    ModeArg::Pair => RunKind::Pair,
                },
                n_list: vec![n],
                threshold: common.threshold,
                d_convention: common.d_convention.map(|c| match c {
                    DConventionArg::Edge => DConvention::Edge,
                    DConventionArg::Center => DConvention::Center,
                }),
                snapshot_times: snapshot_at,
            };
            cmd_run(&manifest)
        }
        Command::Sweep { common, n_list } => {
            let manifest = RunManifest {
                config_path: common.config,
                out_dir: common.out,
                mode: RunKind::Pair,
                n_list,
                threshold: common.threshold,
                d_convention: common.d_convention.map(|c| match c {
                    DConventionArg::Edge => DConvention::Edge,
                    DConventionArg::Center => DConvention::Center,
                }),
                snapshot_times: None,
            };
            cmd_sweep(&manifest)
        }
        Command::Planewave {
            out,
            v0,
            width,
            p_min,
            p_max,
            p_count,
        } => {
            let v0 = v0.unwrap_or_else(|| {
                let cfg = default_config();
                2.0 * packet_energy(cfg.p0, cfg.sigma0).expect("default packet")
            });
            let spec = BarrierSpec { v0, width };
            cmd_planewave(&out, &spec, p_min, p_max, p_count)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with success status.
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
