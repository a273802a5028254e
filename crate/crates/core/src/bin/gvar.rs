use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use gvar::experiments::{run_integrate, run_norms, run_suite, with_threads, ExperimentConfig, Outcome};
use gvar::Result;

/// γ-variation norms, stochastic integrals and verification suites.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every norm of the configured measure or density.
    Norms(Common),
    /// Run a verification suite: thm-2-3, thm-3-3, cor-2-5, cor-2-6,
    /// example-3-4, finest-partition or randomisation.
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Stochastic integral ensemble statistics.
    Integrate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            c.engine.seed = s;
        }
        if let Some(s) = self.samples {
            c.engine.samples = s;
        }
        if let Some(p) = self.paths {
            c.engine.paths = p;
        }
        if self.csv.is_some() {
            c.output.csv = self.csv.clone();
        }
        if self.svg.is_some() {
            c.output.svg = self.svg.clone();
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (common, suite) = match &cli.command {
        Command::Norms(c) | Command::Integrate(c) => (c, None),
        Command::Verify { suite, common } => (common, Some(suite.as_str())),
    };
    let config = common.load()?;
    let threads = common.threads.unwrap_or(0);
    let start = Instant::now();
    let outcome = with_threads(threads, || -> Result<Outcome> {
        match &cli.command {
            Command::Norms(_) => Ok(Outcome {
                report: run_norms(&config)?,
                artifacts: Default::default(),
            }),
            Command::Verify { .. } => run_suite(suite.unwrap_or_default(), &config),
            Command::Integrate(_) => run_integrate(&config),
        }
    })??;
    let report = &outcome.report;
    let json = report.to_json()?;
    match &config.output.report {
        Some(path) => std::fs::write(path, &json)?,
        None => print!("{json}"),
    }
    if let Some(path) = &config.output.csv {
        report.write_csv(std::fs::File::create(path)?)?;
    }
    if let Some(path) = &config.output.svg {
        match &outcome.artifacts.svg {
            Some(svg) => std::fs::write(path, svg)?,
            None => eprintln!("no chart for {}; skipping {}", report.suite, path.display()),
        }
    }
    if let (Some(path), Some(bytes)) = (&config.output.ensemble, &outcome.artifacts.ensemble) {
        std::fs::write(path, bytes)?;
    }
    for c in report.failures() {
        eprintln!("{}", c.describe());
    }
    eprintln!(
        "{}: {} in {:.2}s",
        report.suite,
        if report.passed { "pass" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    Ok(report.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
