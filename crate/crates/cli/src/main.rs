use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qergodic::meter::MeterSpec;
use qergodic::report::{emit_report, ReportFormat, RunReport};
use qergodic::scenario::{run_scenario_with, ScenarioConfig, ScenarioKind};
use qergodic::Exec;

/// Scenario runner and identity verifier for complex joint probabilities,
/// ergodic phase averaging and meter-based preparation.
#[derive(Parser, Debug)]
#[command(name = "qergodic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and emit its report.
    Run(RunArgs),
    /// Run the identity suite and print the worst deviation per identity.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scenario {
    SingleSlit,
    BeamSplitter,
    SternGerlach,
    IdentitySuite,
}

impl From<Scenario> for ScenarioKind {
    fn from(s: Scenario) -> Self {
        match s {
            Scenario::SingleSlit => ScenarioKind::SingleSlit,
            Scenario::BeamSplitter => ScenarioKind::BeamSplitter,
            Scenario::SternGerlach => ScenarioKind::SternGerlach,
            Scenario::IdentitySuite => ScenarioKind::IdentitySuite,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
            Format::Text => ReportFormat::Text,
        }
    }
}

#[derive(Args, Debug)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Run every loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum, required_unless_present = "config")]
    scenario: Option<Scenario>,
    /// Scenario config as JSON; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Slit index for single-slit.
    #[arg(long)]
    slit: Option<usize>,
    /// Meter coupling strength.
    #[arg(long)]
    kappa: Option<f64>,
    /// Meter position spread.
    #[arg(long)]
    sigma_x: Option<f64>,
    /// Meter grid size.
    #[arg(long)]
    meter_n: Option<usize>,
    /// Phase samples for Monte Carlo checks.
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long)]
    tol_scale: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 8)]
    dim_max: usize,
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    mc_samples: Option<usize>,
    #[command(flatten)]
    output: Output,
}

/// Meter defaults per scenario, matching the library's.
fn default_meter(kind: ScenarioKind) -> MeterSpec {
    match kind {
        ScenarioKind::SingleSlit => MeterSpec::new(0.5, 10.0),
        _ => MeterSpec::new(0.5, 5.0),
    }
}

fn build_config(args: &RunArgs) -> Result<ScenarioConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ScenarioConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => match args.scenario {
            Some(s) => ScenarioConfig::new(s.into()),
            None => bail!("either --scenario or --config is required"),
        },
    };
    if let Some(s) = args.scenario {
        config.scenario = s.into();
    }
    if let Some(d) = args.dim {
        config.dim = d;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if args.slit.is_some() {
        config.slit = args.slit;
    }
    if let Some(n) = args.mc_samples {
        config.mc_samples = n;
    }
    if let Some(t) = args.tol_scale {
        config.tolerances.scale = t;
    }
    if args.kappa.is_some() || args.sigma_x.is_some() || args.meter_n.is_some() {
        let mut meter = config.meter.unwrap_or_else(|| default_meter(config.scenario));
        if let Some(k) = args.kappa {
            meter.kappa = k;
        }
        if let Some(s) = args.sigma_x {
            meter.sigma_x = s;
        }
        if args.meter_n.is_some() {
            meter.n = args.meter_n;
        }
        config.meter = Some(meter);
    }
    if args.output.out.is_some() {
        config.output = args.output.out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn execute(config: &ScenarioConfig, output: &Output, default_format: Format) -> Result<RunReport> {
    let exec = if output.sequential { Exec::Sequential } else { Exec::Parallel };
    let report = run_scenario_with(config, exec)?;
    let text = emit_report(&report, output.format.unwrap_or(default_format).into())?;
    match &config.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(report)
}

fn run(cli: Cli) -> Result<bool> {
    let report = match cli.command {
        Command::Run(args) => {
            let config = build_config(&args)?;
            execute(&config, &args.output, Format::Json)?
        }
        Command::Verify(args) => {
            let mut config = ScenarioConfig::new(ScenarioKind::IdentitySuite);
            config.dim_max = args.dim_max;
            config.seeds = args.seeds;
            config.seed = args.seed;
            config.tolerances.scale = args.tol_scale;
            if let Some(n) = args.mc_samples {
                config.mc_samples = n;
            }
            config.output = args.output.out.clone();
            config.validate()?;
            execute(&config, &args.output, Format::Text)?
        }
    };
    for c in report.failures() {
        eprintln!("check failed: {} (deviation {:e}, tolerance {:e})", c.name, c.deviation, c.tolerance);
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
