mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Markov branching trees, growth processes, line-breaking chains and their diagnostics.
#[derive(Parser, Debug)]
#[command(name = "fragtree", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the splitting rule q_n as a table.
    Qtable(RunConfig),
    /// Draw independent Markov branching trees.
    Simulate(RunConfig),
    /// Run coupled Ford (ford:α) or Marchal (stable:α) growth paths.
    Growth(RunConfig),
    /// Run the line-breaking chain for Ford's model and print traces or trees.
    Linebreak(RunConfig),
    /// Check consistency residuals and exact oracle identities; exit 2 on failure.
    Verify(RunConfig),
    /// Scaled leaf depths and heights across sizes, with cross-size KS.
    Scaling(RunConfig),
    /// Spinal proportion checks for Ford's model; exit 2 on failure.
    Spine(RunConfig),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Newick,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Rule as `beta:-1.5`, `ford:0.3`, `stable:1.5`, `erosion:1`, `paintbox:@rule.json` or inline JSON.
    #[arg(long)]
    pub model: Option<String>,
    /// Number of leaves.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated increasing leaf counts.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Largest n for `verify`.
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    /// Number of leaves of the line-breaking chain.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = fragtree::samplers::DEFAULT_SEED)]
    pub seed: u64,
    /// Scaling exponent for `scaling`; defaults to the model's index.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
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
    match run::execute(&cli.command) {
        Ok(run::Status::Ok) => ExitCode::SUCCESS,
        Ok(run::Status::GateFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
