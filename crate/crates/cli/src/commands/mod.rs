mod benchmark;
mod common;
mod learn;
mod ode;
mod solve;
mod stability;

use clap::{Parser, Subcommand};

pub use common::exit_code_for;

#[derive(Parser, Debug)]
#[command(
    name = "klc",
    version,
    about = "Ergodic KL-control on finite state spaces: exact eigenpair solvers, \
             stochastic learners, stability fuzzing and ODE comparisons"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a problem exactly: eigenpair, value function, policy, average cost
    Solve(solve::SolveArgs),
    /// Run a stochastic learner and record its trajectory
    Learn(learn::LearnArgs),
    /// Compare KL-learning, Z-learning and the relaxed power method
    Benchmark(benchmark::BenchmarkArgs),
    /// Fuzz the diagonal-stability question on random instances
    Stability(stability::StabilityArgs),
    /// Compare learner trajectories against the mean-field ODE
    Ode(ode::OdeArgs),
}

pub fn run(cli: Cli) -> i32 {
    let result = match cli.cmd {
        Command::Solve(args) => solve::run(args),
        Command::Learn(args) => learn::run(args),
        Command::Benchmark(args) => benchmark::run(args),
        Command::Stability(args) => stability::run(args),
        Command::Ode(args) => ode::run(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            let code = exit_code_for(&err);
            let kind = format!("{err:?}");
            let kind = kind.split_whitespace().next().unwrap_or("Error").to_string();
            let payload = serde_json::json!({
                "error": err.to_string(),
                "kind": kind,
                "exit_code": code,
            });
            eprintln!("{payload}");
            code
        }
    }
}
