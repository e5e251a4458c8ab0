mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, Settings};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "scrl",
    version,
    about = "Learning controllers for scLTL objectives on quantized stochastic systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a formula, write its automaton as DOT and print distances
    Compile(RunArgs),
    /// Optimal satisfaction probability on the explicit abstraction
    Dp(RunArgs),
    /// Q-learning on the continuous system seen through the grid
    Train(RunArgs),
    /// Monte-Carlo evaluation of a stored policy
    Eval(RunArgs),
    /// Oracle and learned values over a list of grid sizes
    Sweep(RunArgs),
    /// Trajectories of a stored policy
    Simulate(RunArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// key=value settings file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// room, traffic, bmw or the path of a 1-D affine system file
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    formula: Option<String>,
    /// Comma-separated proposition names (compile only)
    #[arg(long)]
    props: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long, conflicts_with = "epsilon")]
    delta: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Comma-separated grid sizes for sweep
    #[arg(long, allow_hyphen_values = true)]
    deltas: Option<String>,
    #[arg(long)]
    lipschitz: Option<String>,
    #[arg(long)]
    lebesgue: Option<String>,
    #[arg(long)]
    episodes: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long, value_parser = ["sparse", "shaped"])]
    reward: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated initial state
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Start episodes uniformly over the state box
    #[arg(long)]
    uniform_restarts: bool,
    #[arg(long)]
    alpha_exponent: Option<String>,
    /// Q-table CSV written by train
    #[arg(long)]
    policy: Option<PathBuf>,
    #[arg(long)]
    rollouts: Option<String>,
    #[arg(long)]
    sims: Option<String>,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let text = [
            ("system", &self.system),
            ("formula", &self.formula),
            ("props", &self.props),
            ("horizon", &self.horizon),
            ("delta", &self.delta),
            ("epsilon", &self.epsilon),
            ("deltas", &self.deltas),
            ("lipschitz", &self.lipschitz),
            ("lebesgue", &self.lebesgue),
            ("episodes", &self.episodes),
            ("seed", &self.seed),
            ("kappa", &self.kappa),
            ("reward", &self.reward),
            ("x0", &self.x0),
            ("alpha_exponent", &self.alpha_exponent),
            ("rollouts", &self.rollouts),
            ("sims", &self.sims),
        ];
        for (key, value) in text {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        // a flag overrides whichever resolution the file gave
        if self.delta.is_some() {
            s.remove("epsilon");
        }
        if self.epsilon.is_some() {
            s.remove("delta");
        }
        for (key, value) in [("out", &self.out), ("policy", &self.policy)] {
            if let Some(p) = value {
                s.set(key, &p.display().to_string())?;
            }
        }
        if self.uniform_restarts {
            s.set("uniform_restarts", "true")?;
        }
        Ok(s)
    }
}

type Action = fn(&RunConfig) -> Result<(), CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, action): (&RunArgs, Action) = match &cli.command {
        Command::Compile(a) => (a, commands::compile),
        Command::Dp(a) => (a, commands::dp),
        Command::Train(a) => (a, commands::train_cmd),
        Command::Eval(a) => (a, commands::eval_cmd),
        Command::Sweep(a) => (a, commands::sweep),
        Command::Simulate(a) => (a, commands::simulate),
    };
    let cfg = RunConfig::from_settings(&args.settings()?)?;
    action(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
