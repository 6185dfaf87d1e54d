use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kahler_lab::experiments::{
    parse_k_list, parse_tolerance_override, run, ConfigFile, Experiment, ExperimentConfig, Overrides,
};
use kahler_lab::LabError;

fn after_help() -> String {
    let mut s = String::from(
        "Exit status: 0 all tolerances pass, 1 a tolerance fails, 2 invalid config, 3 other error.\n\nCSV columns per experiment:\n",
    );
    for e in Experiment::ALL {
        s.push_str(&format!("  {e}\n"));
        for line in e.csv_columns() {
            s.push_str(&format!("    {line}\n"));
        }
    }
    s
}

#[derive(Parser)]
#[command(name = "kahler-lab", version, about = "Numerical experiments on S1-invariant metrics of the Riemann sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSVs, plot scripts and manifest.json.
    #[command(after_help = after_help())]
    Run {
        /// convexity | subslope | bergman-tv | psh-variation | mixed-positivity |
        /// uniqueness-twisted | perturbation | fields-identities
        experiment: String,
        /// JSON config; every field optional.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated Bergman levels.
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        t_nodes: Option<usize>,
        /// KEY=VAL, repeatable.
        #[arg(long = "tol-override")]
        tol_override: Vec<String>,
    },
}

fn resolve(cmd: Command) -> Result<ExperimentConfig, LabError> {
    let Command::Run {
        experiment,
        config,
        out,
        seed,
        k,
        grid_n,
        t_nodes,
        tol_override,
    } = cmd;
    let experiment: Experiment = experiment.parse()?;
    let file = match config {
        Some(p) => ConfigFile::load(&p)?,
        None => ConfigFile::default(),
    };
    let overrides = Overrides {
        output_dir: out,
        seed,
        k_list: k.as_deref().map(parse_k_list).transpose()?,
        grid_n,
        t_nodes,
        tolerances: tol_override
            .iter()
            .map(|t| parse_tolerance_override(t))
            .collect::<Result<_, _>>()?,
    };
    ExperimentConfig::resolve(experiment, &file, &overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match resolve(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(report) => {
            for c in &report.checks {
                println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.describe());
            }
            println!("wrote {} files to {}", report.artifacts.len(), report.output_dir.display());
            match report.first_failure() {
                None => ExitCode::SUCCESS,
                Some(c) => {
                    eprintln!("tolerance failure: {}", c.describe());
                    ExitCode::from(1)
                }
            }
        }
        Err(e @ LabError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
