use std::path::PathBuf;
use std::process::ExitCode;

use brwlab::{
    default_out_dir, list_presets, preset_config, replay, run_experiment, CliError, ExperimentConfig, ExperimentKind,
    RunManifest, RunOutcome,
};
use brwlab_core::ArithmeticMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "brwlab", version, about = "Branching random walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Return probabilities p_n of the walk.
    ReturnSeries(RunArgs),
    /// Fit rho and the decay exponent to a return series.
    SpectralFit(RunArgs),
    /// Summability of rho^-n p_n.
    CriticalitySum(RunArgs),
    /// Two-walk sum sum_s m^s sum_k p_k(o, i) p_{s-k}(o, j).
    TwoWalkSum(RunArgs),
    /// Simulate the branching random walk and write its trace.
    Simulate(RunArgs),
    /// Monte Carlo check of the many-to-one formula.
    ManyToOne(RunArgs),
    /// Red and blue runs and the vertices both visit.
    Purple(RunArgs),
    /// Number of infinite components outside balls.
    Ends(RunArgs),
    /// Visits to a fiber of a product graph.
    Fiber(RunArgs),
    /// Embedded Galton-Watson process on a line.
    EmbeddedGw(RunArgs),
    /// List the presets.
    Presets,
    /// Rerun the config recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Float,
    Rational,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to $BRWLAB_OUT/<preset or experiment>-seed<seed>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

fn load(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either --preset or --config, not both".into())),
        (Some(name), None) => preset_config(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)?
        }
        (None, None) => return Err(CliError::Config("a run needs --preset or --config".into())),
    };
    if cfg.experiment != kind {
        return Err(CliError::Config(format!(
            "the config describes a {} experiment, not {kind}",
            cfg.experiment
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = args.reps {
        cfg.replications = Some(reps);
    }
    if let Some(mode) = args.mode {
        cfg.mode = match mode {
            Mode::Float => ArithmeticMode::Float,
            Mode::Rational => ArithmeticMode::Rational,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(outcome: &RunOutcome) -> ExitCode {
    let m: &RunManifest = &outcome.manifest;
    match &m.error {
        None => println!("{} {} -> {}", m.experiment, m.status, outcome.dir.display()),
        Some(e) => eprintln!("{} failed ({}): {}; manifest in {}", m.experiment, e.kind, e.message, outcome.dir.display()),
    }
    ExitCode::from(outcome.exit_code as u8)
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Presets => {
            for (name, description) in list_presets() {
                println!("{name:<22} {description}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Replay { manifest, out } => {
            let out = out.unwrap_or_else(|| manifest.parent().unwrap_or(&PathBuf::from(".")).join("replay"));
            return match replay(&manifest, &out) {
                Ok(outcome) => report(&outcome),
                Err(e) => fail(e),
            };
        }
        Command::ReturnSeries(a) => (ExperimentKind::ReturnSeries, a),
        Command::SpectralFit(a) => (ExperimentKind::SpectralFit, a),
        Command::CriticalitySum(a) => (ExperimentKind::CriticalitySum, a),
        Command::TwoWalkSum(a) => (ExperimentKind::TwoWalkSum, a),
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::ManyToOne(a) => (ExperimentKind::ManyToOne, a),
        Command::Purple(a) => (ExperimentKind::Purple, a),
        Command::Ends(a) => (ExperimentKind::Ends, a),
        Command::Fiber(a) => (ExperimentKind::Fiber, a),
        Command::EmbeddedGw(a) => (ExperimentKind::EmbeddedGw, a),
    };
    let cfg = match load(kind, &args) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e),
    };
    let out = args.out.clone().unwrap_or_else(|| default_out_dir(&cfg, args.preset.as_deref()));
    match run_experiment(&cfg, &out) {
        Ok(outcome) => report(&outcome),
        Err(e) => fail(e),
    }
}
