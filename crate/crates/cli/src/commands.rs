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
//! One function per subcommand. Each parses its inputs, makes one library
//! call and serializes the result unchanged.

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use bellnl_core::behaviors::{
    behavior_from_state, chsh_value, demo_hidden_nonlocality, horodecki_chsh, is_local, optimal_chsh_measurements,
    Behavior, Scenario,
};
use bellnl_core::measures::{minimal_extension_report, rel_entropy_nonlocality, ExtensionConfig, SolverConfig};
use bellnl_core::processes::{apply_superprocess, check_realizable, classify, LosrDecomposition, Process, Superprocess};
use bellnl_core::quantum::{DensityMatrix, Povm, QuantumChannel};
use bellnl_core::witness::{
    build_chsh_povm_witness, choi_separability_with, evaluate_witness, losr_min_witness_value, witness_expectation,
    witness_to_channel_construction, WitnessOperator,
};
use bellnl_core::ComplexMatrix;

use crate::args::{Cli, Command, DemoCommand, ProcessCommand, SolverArgs, WitnessCommand};
use crate::io::{self, Failure};

pub struct Outcome {
    pub output: Value,
    pub summary: String,
    pub converged: bool,
}

impl Outcome {
    fn done(output: Value, summary: String) -> Self {
        Self { output, summary, converged: true }
    }
}

type Run = Result<Outcome, Failure>;

/// States may also be given as `{"werner": p}`.
fn read_state(path: &Path) -> Result<DensityMatrix, Failure> {
    let v = io::read_value(path)?;
    if let Some(p) = v.get("werner") {
        let p = p.as_f64().ok_or_else(|| Failure::validation("werner parameter must be a number"))?;
        return Ok(DensityMatrix::werner(p)?);
    }
    io::from_value(v, path)
}

/// Channels may also be given as behaviors.
fn read_channel(path: &Path) -> Result<QuantumChannel, Failure> {
    let v = io::read_value(path)?;
    if v.get("scenario").is_some() {
        return Ok(io::from_value::<Behavior>(v, path)?.to_channel());
    }
    io::from_value(v, path)
}

#[derive(Deserialize)]
#[serde(transparent)]
struct BareMatrix(#[serde(with = "bellnl_core::json::matrix")] ComplexMatrix);

fn read_witness_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    let v = io::read_value(path)?;
    if v.get("blocks").is_some() {
        return Ok(io::from_value::<WitnessOperator>(v, path)?.matrix());
    }
    Ok(io::from_value::<BareMatrix>(v, path)?.0)
}

fn solver_config(a: &SolverArgs) -> Result<SolverConfig, Failure> {
    let mut c = SolverConfig::default();
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(r) = a.restarts {
        c.restarts = r;
    }
    if let Some(m) = a.max_iters {
        c.max_iterations = m;
    }
    if let Some(t) = a.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::validation(format!("tolerance must be positive, got {t}")));
        }
        c.gap_tolerance = t;
    }
    Ok(c)
}

pub fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::Validate(a) => {
            let mut kinds = Vec::new();
            if let Some(p) = &a.behavior {
                io::read::<Behavior>(p)?;
                kinds.push("behavior");
            }
            if let Some(p) = &a.state {
                read_state(p)?;
                kinds.push("state");
            }
            if let Some(p) = &a.channel {
                read_channel(p)?;
                kinds.push("channel");
            }
            if let Some(p) = &a.process {
                io::read::<Process>(p)?;
                kinds.push("process");
            }
            if let Some(p) = &a.superprocess {
                io::read::<Superprocess>(p)?;
                kinds.push("superprocess");
            }
            if let Some(p) = &a.witness {
                io::read::<WitnessOperator>(p)?;
                kinds.push("witness");
            }
            Ok(Outcome::done(json!({ "valid": true, "checked": kinds }), format!("valid: {}", kinds.join(", "))))
        }
        Command::Born(a) => {
            let state = read_state(&a.state)?;
            let (alice, bob) = match (&a.alice, &a.bob) {
                (Some(pa), Some(pb)) => (io::read::<Vec<Povm>>(pa)?, io::read::<Vec<Povm>>(pb)?),
                _ => optimal_chsh_measurements(),
            };
            let b = behavior_from_state(&state, &alice, &bob)?;
            let s = b.scenario();
            let summary = format!("behavior in scenario ({}, {}, {}, {})", s.nx0, s.ny0, s.nx1, s.ny1);
            Ok(Outcome::done(io::to_json(&b), summary))
        }
        Command::IsLocal(a) => {
            let r = is_local(&io::read::<Behavior>(&a.behavior)?)?;
            let summary = if r.local { "local".to_string() } else { format!("nonlocal, violation {:?}", r.violation) };
            Ok(Outcome::done(io::to_json(&r), summary))
        }
        Command::Chsh(a) => {
            if let Some(p) = &a.behavior {
                let v = chsh_value(&io::read::<Behavior>(p)?)?;
                return Ok(Outcome::done(json!({ "chsh": v }), format!("CHSH = {v}")));
            }
            let state = read_state(a.state.as_deref().expect("argument group requires one input"))?;
            let v = horodecki_chsh(&state)?;
            Ok(Outcome::done(json!({ "max_chsh": v }), format!("maximal CHSH = {v}")))
        }
        Command::RelEnt(a) => {
            let b = io::read::<Behavior>(&a.behavior)?;
            let r = rel_entropy_nonlocality(&b, &solver_config(&a.solver)?)?;
            let summary = format!("{} bits (gap {:.2e})", r.value, r.certificate.gap);
            Ok(Outcome { converged: r.converged, output: io::to_json(&r), summary })
        }
        Command::MinExt(a) => {
            let state = read_state(&a.state)?;
            let scenario = Scenario::new(a.settings, a.settings, a.outcomes, a.outcomes)?;
            let mut config = ExtensionConfig { filter: a.filter, solver: solver_config(&a.solver)?, ..Default::default() };
            if let Some(s) = a.solver.seed {
                config.seed = s;
            }
            if let Some(r) = a.solver.restarts {
                config.restarts = r;
            }
            if let Some(s) = a.steps {
                config.outer_iterations = s;
            }
            let report = minimal_extension_report(&state, &scenario, &config)?;
            let summary = format!("lower bound {} bits", report.result.value);
            let converged = report.result.converged;
            let output = if a.report { io::to_json(&report) } else { io::to_json(&report.result) };
            Ok(Outcome { output, summary, converged })
        }
        Command::Witness(w) => witness(w),
        Command::Process(p) => process(p),
        Command::Demo(DemoCommand::Filtering) => {
            let r = demo_hidden_nonlocality();
            let summary = format!("CHSH {} before filtering, {} after", r.pre_chsh, r.post_chsh);
            Ok(Outcome::done(io::to_json(&r), summary))
        }
    }
}

fn witness(cmd: &WitnessCommand) -> Run {
    match cmd {
        WitnessCommand::Build { normalization, psi, phi } => {
            let w = match (psi, phi) {
                (Some(pa), Some(pb)) => {
                    let read_pair = |p: &Path| -> Result<[DensityMatrix; 2], Failure> {
                        let v: Vec<DensityMatrix> = io::read(p)?;
                        v.try_into().map_err(|v: Vec<_>| {
                            Failure::validation(format!("expected two input states, got {}", v.len()))
                        })
                    };
                    build_chsh_povm_witness(&read_pair(pa)?, &read_pair(pb)?, (*normalization).into())?
                }
                _ => WitnessOperator::standard((*normalization).into()),
            };
            Ok(Outcome::done(io::to_json(&w), format!("{:?} witness", w.normalization())))
        }
        WitnessCommand::Eval { witness, channel } => {
            let w = io::read::<WitnessOperator>(witness)?;
            let ch = read_channel(channel)?;
            let value = evaluate_witness(&w, &ch)?;
            let out = json!({
                "value": value,
                "expectation": witness_expectation(&w, &ch)?,
                "local_minimum": losr_min_witness_value(&w)?,
            });
            Ok(Outcome::done(out, format!("witness value {value}")))
        }
        WitnessCommand::Separate { channel, decomposition } => {
            let ch = read_channel(channel)?;
            let dec = decomposition.as_deref().map(io::read::<LosrDecomposition>).transpose()?;
            let v = choi_separability_with(&ch, dec.as_ref())?;
            Ok(Outcome::done(io::to_json(&v), format!("{:?}", v.verdict)))
        }
        WitnessCommand::Construct { witness, channel } => {
            let w = read_witness_matrix(witness)?;
            let r = witness_to_channel_construction(&w, &read_channel(channel)?)?;
            let summary = format!("value {} (direct {})", r.value, r.direct_value);
            Ok(Outcome::done(io::to_json(&r), summary))
        }
    }
}

fn process(cmd: &ProcessCommand) -> Run {
    match cmd {
        ProcessCommand::Classify { process } => {
            let c = classify(&io::read::<Process>(process)?);
            let summary = format!("free: {:?}, resource: {:?}", c.free, c.resource_kind);
            Ok(Outcome::done(io::to_json(&c), summary))
        }
        ProcessCommand::Compose { superprocess, process } => {
            let sp = io::read::<Superprocess>(superprocess)?;
            let out = apply_superprocess(&sp, &io::read::<Process>(process)?)?;
            Ok(Outcome::done(io::to_json(&out), format!("output delay {}", out.delay())))
        }
        ProcessCommand::Check { process } => {
            let ok = check_realizable(&io::read::<Process>(process)?);
            Ok(Outcome::done(json!({ "realizable": ok }), format!("realizable: {ok}")))
        }
    }
}
