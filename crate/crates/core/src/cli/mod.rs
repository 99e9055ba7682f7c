//! The `sapo` command-line front end.
//!
//! Every subcommand reads its options from flags, falling back to the matching table of an
//! optional TOML config file (`[gen]`, `[greedy]`, `[train]`, `[eval]`, `[min_actuators]`, plus
//! top-level `seed` and `out_dir`). Outputs are written to `<path>.partial` and renamed once
//! complete.

mod commands;
mod options;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::run;
pub use options::{EvalArgs, GenArgs, GreedyArgs, MinActuatorsArgs, TrainArgs};

#[derive(Debug, Parser)]
#[command(name = "sapo", version, about = "Sequential actuator placement for shape control")]
pub struct Cli {
    /// Global seed; every subsystem derives its own stream from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for all outputs.
    #[arg(long, global = true, env = "SAPO_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// TOML file with per-command defaults; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic train and test datasets.
    Gen(GenArgs),
    /// Greedy (and, when small enough, exhaustive) selection per instance.
    Greedy(GreedyArgs),
    /// Train a D3QN agent or the reward-estimation baseline.
    Train(TrainArgs),
    /// Evaluate a policy on a dataset.
    Eval(EvalArgs),
    /// Actuator counts needed to reach one or more maximum-gap limits.
    MinActuators(MinActuatorsArgs),
}
