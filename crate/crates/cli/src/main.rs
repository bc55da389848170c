use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tdmie::kernels::KernelKind;
use tdmie::vsh::ModeIndex;
use tdmie_cli::config::{parse_kernel, parse_mode};
use tdmie_cli::plot::{emit_plot, PlotKind};
use tdmie_cli::run::{run_compare, run_simulate, run_stability, RunOutput};
use tdmie_cli::{CliError, CliResult, SimulationConfig};

/// Transient scattering from a perfectly conducting sphere, one multipole mode at a time.
#[derive(Debug, Parser)]
#[command(name = "tdmie", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// March the requested (mode, kernel) pairs and write coefficient CSVs.
    Simulate(RunArgs),
    /// Eigenvalues of the marching companion matrix per (kernel, degree).
    Stability(RunArgs),
    /// Band error between marched and frequency-domain solutions.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Read coefficient CSVs from this directory instead of marching.
        #[arg(long)]
        series_dir: Option<PathBuf>,
        /// Also sweep the temporal order over 1..=N.
        #[arg(long, value_name = "N")]
        sweep: Option<usize>,
    },
    /// Render a CSV file as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Output file; defaults to the CSV path with an .svg extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    f0: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    np: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    /// n,m,psi|phi (repeatable).
    #[arg(long = "mode", value_parser = parse_mode)]
    modes: Vec<ModeIndex>,
    /// 1..4 (repeatable).
    #[arg(long = "kernel", value_parser = parse_kernel)]
    kernels: Vec<KernelKind>,
    #[arg(long)]
    outdir: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> CliResult<SimulationConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
                SimulationConfig::parse(&text, &path.display().to_string())?
            }
            None => SimulationConfig::default(),
        };
        if let Some(v) = self.f0 {
            cfg.f0 = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = Some(v);
        }
        if let Some(v) = self.np {
            cfg.np = v;
        }
        if let Some(v) = self.nt {
            cfg.nt = v;
        }
        if !self.modes.is_empty() {
            cfg.modes = self.modes.clone();
        }
        if !self.kernels.is_empty() {
            cfg.kernels = self.kernels.clone();
        }
        if let Some(v) = &self.outdir {
            cfg.outdir = v.clone();
        }
        Ok(cfg)
    }
}

fn report(out: RunOutput) {
    for m in &out.messages {
        println!("{m}");
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(args) => report(run_simulate(&args.resolve()?)?),
        Command::Stability(args) => report(run_stability(&args.resolve()?)?),
        Command::Compare { run, series_dir, sweep } => report(run_compare(&run.resolve()?, series_dir.as_deref(), sweep)?),
        Command::Plot { csv, kind, output } => {
            let out = output.unwrap_or_else(|| csv.with_extension("svg"));
            emit_plot(&csv, kind, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
