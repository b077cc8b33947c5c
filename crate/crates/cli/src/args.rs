// Copyright 2026 The bellnl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bellnl_core::witness::Normalization;

#[derive(Debug, Parser)]
#[command(name = "bellnl", version, about = "Bell nonlocality and entanglement of delayed quantum processes")]
pub struct Cli {
    /// Write the result JSON here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print a one-line human summary to stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and check one or more inputs.
    Validate(ValidateArgs),
    /// Behavior of a state under local measurements.
    Born(BornArgs),
    /// Local polytope membership with a separating functional when nonlocal.
    IsLocal(BehaviorArg),
    /// CHSH value of a behavior, or the optimal one of a two-qubit state.
    Chsh(ChshArgs),
    /// Relative entropy of nonlocality of a behavior.
    RelEnt(RelEntArgs),
    /// Seesaw lower bound on the minimal extension for a state.
    MinExt(MinExtArgs),
    /// CHSH witness for measurement channels and Choi separability.
    #[command(subcommand)]
    Witness(WitnessCommand),
    /// Delayed processes: classification, composition and realizability.
    #[command(subcommand)]
    Process(ProcessCommand),
    /// Worked examples.
    #[command(subcommand)]
    Demo(DemoCommand),
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).multiple(true)))]
pub struct ValidateArgs {
    #[arg(long, group = "input")]
    pub behavior: Option<PathBuf>,
    #[arg(long, group = "input")]
    pub state: Option<PathBuf>,
    #[arg(long, group = "input")]
    pub channel: Option<PathBuf>,
    #[arg(long, group = "input")]
    pub process: Option<PathBuf>,
    #[arg(long, group = "input")]
    pub superprocess: Option<PathBuf>,
    #[arg(long, group = "input")]
    pub witness: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BornArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// JSON array of Alice's POVMs, one per setting. Defaults to the optimal CHSH settings.
    #[arg(long, requires = "bob")]
    pub alice: Option<PathBuf>,
    /// JSON array of Bob's POVMs, one per setting.
    #[arg(long, requires = "alice")]
    pub bob: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BehaviorArg {
    #[arg(long)]
    pub behavior: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true)))]
pub struct ChshArgs {
    #[arg(long, group = "input")]
    pub behavior: Option<PathBuf>,
    /// Two-qubit state; reports the maximum over projective settings.
    #[arg(long, group = "input")]
    pub state: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Gap below which the solver counts as converged.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RelEntArgs {
    #[arg(long)]
    pub behavior: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct MinExtArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Measurement settings per party.
    #[arg(long, default_value_t = 2)]
    pub settings: usize,
    /// Outcomes per measurement.
    #[arg(long, default_value_t = 2)]
    pub outcomes: usize,
    /// Allow one round of local filters before measuring.
    #[arg(long)]
    pub filter: bool,
    /// Ascent steps per restart.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Emit the optimal settings and behavior along with the measure.
    #[arg(long)]
    pub report: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormalizationArg {
    #[value(name = "paper")]
    Unshifted,
    Corrected,
}

impl From<NormalizationArg> for Normalization {
    fn from(n: NormalizationArg) -> Self {
        match n {
            NormalizationArg::Unshifted => Normalization::Unshifted,
            NormalizationArg::Corrected => Normalization::Corrected,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum WitnessCommand {
    /// CHSH witness for two-input, two-outcome measurement channels.
    Build {
        #[arg(long, value_enum, default_value_t = NormalizationArg::Corrected)]
        normalization: NormalizationArg,
        /// JSON array of Alice's two pure input states. Defaults to the qubit basis.
        #[arg(long, requires = "phi")]
        psi: Option<PathBuf>,
        /// JSON array of Bob's two pure input states.
        #[arg(long, requires = "psi")]
        phi: Option<PathBuf>,
    },
    /// Witness value of a measurement channel.
    Eval {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        channel: PathBuf,
    },
    /// Separability verdict for a channel's Choi matrix.
    Separate {
        #[arg(long)]
        channel: PathBuf,
        /// Explicit shared-randomness decomposition to verify.
        #[arg(long)]
        decomposition: Option<PathBuf>,
    },
    /// Superprocess turning a Choi witness into a classical test.
    Construct {
        /// Witness file or a bare Hermitian matrix on the Choi space.
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        channel: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProcessCommand {
    /// Free, resource or undecided, with the evidence used.
    Classify {
        #[arg(long)]
        process: PathBuf,
    },
    /// Applies a superprocess to a process.
    Compose {
        #[arg(long)]
        superprocess: PathBuf,
        #[arg(long)]
        process: PathBuf,
    },
    /// Whether the process can be realized with its delay and separation.
    Check {
        #[arg(long)]
        process: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum DemoCommand {
    /// Local filters revealing a hidden CHSH violation.
    Filtering,
}
