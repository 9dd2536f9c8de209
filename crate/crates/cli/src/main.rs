//! Command-line front end: point generation, certification, energies,
//! sweeps, exponent fits and comparison reports.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_list, read_embedded, read_plan_file, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<sphere_energy::Error> for CliError {
    fn from(e: sphere_energy::Error) -> Self {
        use sphere_energy::Error as E;
        match e {
            E::Io(_) | E::Parse { .. } => CliError::Io(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "sphere-energy", version, about = "Energies, designs and jittered sampling on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a point set: a fixture, fibonacci, uniform, jittered or minimizer.
    Gen(Flags),
    /// Design defects and separation of a point file.
    Certify(Flags),
    /// Riesz/kernel energy, worst-case error, defect or expansion values.
    Energy(Flags),
    /// Seeded N-sweep written as CSV (or JSON).
    Experiment(Flags),
    /// Power-law fit of a sweep table.
    Fit(Flags),
    /// Deterministic vs probabilistic comparison of two sweep tables.
    Compare(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Sphere dimension (S^d in R^{d+1}).
    #[arg(long)]
    d: Option<usize>,
    /// Riesz exponent or Sobolev smoothness.
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Log-space exponent.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Design strength or expansion degree.
    #[arg(long)]
    t: Option<usize>,
    /// Order K of the Riesz kernel expansion.
    #[arg(long)]
    bigk: Option<u32>,
    /// Number of points.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated N values.
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long)]
    family: Option<String>,
    /// riesz, kernel, kernel-offdiag, wce-sobolev, wce-logspace, defect, expansion.
    #[arg(long)]
    metric: Option<String>,
    /// Comma-separated kernel coefficients a_0, a_1, ...
    #[arg(long)]
    coeffs: Option<String>,
    /// Minimizer iterations.
    #[arg(long)]
    steps: Option<usize>,
    /// Minimizer initial angular step.
    #[arg(long)]
    step_size: Option<f64>,
    /// Comma-separated evaluation points for the expansion.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Leading term removed before fitting: none, auto, const:V or power:C:E.
    #[arg(long)]
    leading: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    scale_power: Option<f64>,
    /// Divide values by (ln N)^p before fitting.
    #[arg(long, allow_negative_numbers = true)]
    log_power: Option<f64>,
    /// Keep the smallest N in fits.
    #[arg(long)]
    include_smallest: bool,
    /// csv, json or text, depending on the command.
    #[arg(long)]
    format: Option<String>,
    /// Input file; repeat for several.
    #[arg(long = "in")]
    inputs: Vec<PathBuf>,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Plan file of `key = value` lines.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Reuse the config embedded in an earlier output.
    #[arg(long)]
    from: Option<PathBuf>,
}

impl Flags {
    fn to_config(&self, command: &str) -> Result<RunConfig, CliError> {
        Ok(RunConfig {
            command: command.to_string(),
            d: self.d,
            s: self.s,
            gamma: self.gamma,
            t: self.t,
            bigk: self.bigk,
            n: self.n,
            n_list: self.n_list.as_deref().map(|v| parse_list("n-list", v)).transpose()?,
            trials: self.trials,
            seed: self.seed,
            tol: self.tol,
            family: self.family.clone(),
            metric: self.metric.clone(),
            coeffs: self.coeffs.as_deref().map(|v| parse_list("coeffs", v)).transpose()?,
            steps: self.steps,
            step_size: self.step_size,
            x: self.x.as_deref().map(|v| parse_list("x", v)).transpose()?,
            leading: self.leading.clone(),
            scale_power: self.scale_power,
            log_power: self.log_power,
            include_smallest: self.include_smallest.then_some(true),
            format: self.format.clone(),
            inputs: self.inputs.clone(),
        })
    }

    /// Embedded config, then plan file, then flags.
    fn resolve(&self, command: &str) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig {
            command: command.to_string(),
            ..Default::default()
        };
        if let Some(path) = &self.from {
            let embedded = read_embedded(path)?;
            if embedded.command != command {
                return Err(CliError::Usage(format!(
                    "{} was written by `{}`, not `{command}`",
                    path.display(),
                    embedded.command
                )));
            }
            cfg.overlay(embedded);
        }
        if let Some(path) = &self.plan {
            cfg.overlay(read_plan_file(path, command)?);
        }
        cfg.overlay(self.to_config(command)?);
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, flags) = match &cli.command {
        Command::Gen(f) => ("gen", f),
        Command::Certify(f) => ("certify", f),
        Command::Energy(f) => ("energy", f),
        Command::Experiment(f) => ("experiment", f),
        Command::Fit(f) => ("fit", f),
        Command::Compare(f) => ("compare", f),
    };
    if let Some(k) = flags.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let cfg = flags.resolve(name)?;
    let output = match &cli.command {
        Command::Gen(_) => commands::gen(cfg)?,
        Command::Certify(_) => commands::certify(cfg)?,
        Command::Energy(_) => commands::energy(cfg)?,
        Command::Experiment(_) => commands::experiment(cfg)?,
        Command::Fit(_) => commands::fit(cfg)?,
        Command::Compare(_) => commands::compare(cfg)?,
    };
    match &flags.out {
        Some(path) => std::fs::write(path, output)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(output.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sphere-energy: {e}");
            ExitCode::from(e.code())
        }
    }
}
