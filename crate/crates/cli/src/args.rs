use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "wignerlab",
    version,
    about = "Check nested-observer measurement scenarios under different collapse policies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare analytic predictions across policies.
    Check(RunArgs),
    /// Sample trajectories and compare frequencies with the analytic values.
    Run(RunArgs),
    /// Validate a scenario file and print its canonical form.
    Parse { path: String },
    /// List the built-in scenarios.
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Built-in scenario name or path to a `.scn` file.
    pub scenario: String,

    /// Policies to compare, e.g. `unitary_only,collapse_at:F`. Repeatable.
    #[arg(short = 'p', long = "policies", visible_alias = "policy")]
    pub policies: Vec<String>,

    #[arg(long, env = "WIGNERLAB_SEED", default_value_t = 7)]
    pub seed: u64,

    /// Trajectories per policy (`run` defaults to 1000; `check` samples only when given).
    #[arg(long)]
    pub runs: Option<u64>,

    /// Bob's measurement angle for `epr_bell`.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,

    /// Environment qubits for `decoherence_demo`.
    #[arg(long, default_value_t = 4)]
    pub n_env: usize,

    /// Replaces every check's tolerance.
    #[arg(long)]
    pub tol: Option<f64>,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}
