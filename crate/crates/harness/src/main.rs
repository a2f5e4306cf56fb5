use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use longmem_harness::{
    run_experiment, run_sweep, summarize_dir, write_outputs, ExperimentConfig, HarnessError, Result,
    SummaryRecord, Theorem,
};

#[derive(Parser)]
#[command(name = "longmem", about = "Run long-term-memory online learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration over its seeds.
    Run(ExperimentArgs),
    /// Run a configuration once per value of one parameter.
    Sweep {
        #[command(flatten)]
        base: ExperimentArgs,
        /// Configuration key to vary, e.g. `T`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Recompute the summary of a finished run from its CSV files.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = ["1", "2", "4", "5"])]
        theorem: String,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Plain-text `key=value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["alg1", "alg2", "alg3", "mpp"])]
    algo: Option<String>,
    #[arg(long, value_parser = ["piecewise", "stochastic", "sparse", "lb-adversary"])]
    env: Option<String>,
    #[arg(long = "K")]
    k: Option<String>,
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long = "S")]
    s: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    /// Comma-separated gaps of the comparator actions.
    #[arg(long)]
    gap: Option<String>,
    /// `a..b` or a comma-separated list.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Override as `key=value`; repeatable.
    #[arg(long = "set")]
    set: Vec<String>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        if let Some(path) = &self.config {
            config.apply_text(&fs::read_to_string(path)?)?;
        }
        let flags = [
            ("algo", &self.algo),
            ("env", &self.env),
            ("K", &self.k),
            ("T", &self.t),
            ("S", &self.s),
            ("n", &self.n),
            ("rho", &self.rho),
            ("gap", &self.gap),
            ("seeds", &self.seeds),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        for pair in &self.set {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| HarnessError::Parse(format!("`--set {pair}` is not key=value")))?;
            config.set(key, value)?;
        }
        Ok(config)
    }
}

fn print_summary(summary: &SummaryRecord) {
    println!("{}", SummaryRecord::CSV_HEADER);
    println!("{}", summary.csv_row());
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let result = run_experiment(&config)?;
            if let Some(dir) = &config.out {
                write_outputs(&result, dir)?;
            }
            print_summary(&result.summary);
        }
        Command::Sweep { base, param, values } => {
            let config = base.resolve()?;
            for result in run_sweep(&config, &param, &values)? {
                println!("{}", result.summary.csv_row());
            }
        }
        Command::Summarize { input, theorem } => {
            let theorem: Theorem = theorem.parse()?;
            print_summary(&summarize_dir(&input, theorem)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
