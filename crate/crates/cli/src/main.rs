//! `reasoner` — checks, synthesizes, and exercises Bayesian readings of
//! finite stochastic machines described by spec files.
//!
//! Exit codes: 0 when the checked property holds (or the command just
//! succeeds), 1 when a check fails or belief propagation conflicts, 2 on
//! malformed input, unknown labels, or usage errors.

mod cmd;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Degree of parallelism for constraint evaluation; read from the
/// environment, default 1.
const PARALLELISM_VAR: &str = "REASONER_PARALLELISM";

#[derive(Parser)]
#[command(name = "reasoner", version, about = "Consistency checker for Bayesian machine interpretations", long_about = None)]
struct Cli {
    /// Emit reports as JSON instead of aligned text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
pub(crate) struct SpecArgs {
    /// Path to the machine spec file.
    pub(crate) spec: std::path::PathBuf,
    /// Separate interpretation file, for specs that do not carry one.
    #[arg(long)]
    pub(crate) interpretation: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the consistency of the spec's interpretation against its
    /// machine (inference or filtering, according to the spec).
    Check {
        #[command(flatten)]
        spec: SpecArgs,
        /// Evaluate the conjugate-prior form instead (deterministic
        /// machines only).
        #[arg(long)]
        conjugate: bool,
    },
    /// Run the belief trajectory for a sequence of inputs, flagging
    /// subjectively impossible inputs as they occur.
    Filter {
        #[command(flatten)]
        spec: SpecArgs,
        /// Comma-separated input labels, consumed left to right.
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<String>,
        /// Starting state (defaults to the first declared state).
        #[arg(long)]
        from: Option<String>,
    },
    /// Synthesize an interpretation map from seed beliefs by exact Bayes
    /// propagation over the support graph.
    Propagate {
        #[command(flatten)]
        spec: SpecArgs,
        /// Seed belief, e.g. `y0=h1:1/2,h2:1/2`; repeatable.
        #[arg(long, required = true)]
        seed: Vec<String>,
    },
    /// Check that running the machine n steps and reading the belief there
    /// is a conditional of the n-step joint beliefs (deterministic
    /// machines; `--probe` evaluates stochastic ones informationally).
    VerifyFiltering {
        #[command(flatten)]
        spec: SpecArgs,
        /// Horizon (number of steps).
        #[arg(long)]
        depth: usize,
        /// Cap on the horizon; raise explicitly for deeper runs
        /// (cost grows as |S|^depth).
        #[arg(long, default_value_t = 8)]
        depth_limit: usize,
        /// Evaluate without asserting, for stochastic machines.
        #[arg(long)]
        probe: bool,
    },
    /// Sample a coupled machine/environment trajectory.
    Simulate {
        /// Path to the machine spec file (must declare an environment).
        spec: std::path::PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run one of the built-in parametric machines over a finite window.
    Example {
        #[command(subcommand)]
        which: ExampleCommand,
    },
    /// Run the randomized kernel-algebra suite (six axiom families,
    /// exact equality on seeded random kernels).
    Axioms {
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum Pairing {
    /// `+1` is emitted with probability equal to the coin bias.
    Adopted,
    /// `+1` is emitted with the complementary probability; the counting
    /// step then fails Bayes updating (kept demonstrable).
    Flipped,
}

#[derive(Subcommand)]
enum ExampleCommand {
    /// The machine that counts each kind of observation; beliefs are Beta
    /// distributions updated by hyperparameter steps.
    Counting {
        #[arg(long, default_value_t = 8)]
        window: u64,
        #[arg(long, value_enum, default_value_t = Pairing::Adopted)]
        convention: Pairing,
    },
    /// The machine that tracks the difference of the two observation
    /// counts; beliefs weigh two fixed hypotheses.
    Difference {
        #[arg(long, default_value_t = 8)]
        window: i64,
        /// Use the halved closed form for the beliefs, demonstrating that
        /// it is not normalized.
        #[arg(long)]
        halved_belief: bool,
    },
    /// The counting machine carrying the difference machine's
    /// interpretation pulled back along the difference-of-counts map.
    Pullback {
        #[arg(long, default_value_t = 8)]
        window: u64,
    },
}

fn configure_parallelism() {
    let threads = std::env::var(PARALLELISM_VAR)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1);
    // Ignore failure: the pool can already be set in tests.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
}

fn main() -> ExitCode {
    configure_parallelism();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Check { spec, conjugate } => cmd::check(spec, *conjugate, cli.json),
        Command::Filter { spec, inputs, from } => cmd::filter(spec, inputs, from.as_deref(), cli.json),
        Command::Propagate { spec, seed } => cmd::propagate(spec, seed, cli.json),
        Command::VerifyFiltering {
            spec,
            depth,
            depth_limit,
            probe,
        } => cmd::verify_filtering(spec, *depth, *depth_limit, *probe, cli.json),
        Command::Simulate { spec, steps, seed } => cmd::simulate(spec, *steps, *seed, cli.json),
        Command::Example { which } => match which {
            ExampleCommand::Counting { window, convention } => {
                cmd::example_counting(*window, *convention, cli.json)
            }
            ExampleCommand::Difference {
                window,
                halved_belief,
            } => cmd::example_difference(*window, *halved_belief, cli.json),
            ExampleCommand::Pullback { window } => cmd::example_pullback(*window, cli.json),
        },
        Command::Axioms { trials, seed } => cmd::axioms(*trials, *seed, cli.json),
    };
    match outcome {
        Ok(result) => {
            print!("{}", result.output);
            if result.holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
