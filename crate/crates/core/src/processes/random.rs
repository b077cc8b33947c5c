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

//! Seeded generators of free superprocesses and pre-stage pipelines.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::process::{Delay, Process};
use super::superprocess::{CombComponent, LocalComb, PreLoccStage, Superprocess, TranscriptPost};
use crate::behaviors::{Instrument, Party, PreLoccProtocol, ProtocolNode, Scenario};
use crate::error::Result;
use crate::quantum::random::{random_channel_with, random_povm_with, random_pure_state_with, random_unitary, rng};
use crate::quantum::{bipartite_io, QuantumChannel};
use crate::tensor::{ComplexMatrix, DimFactorization};

/// Random probability vector, skewed towards sparse ones.
fn distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            e.powi(3)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Classical comb: the new input is copied into memory while a stochastic
/// map picks the old input; the new output depends on the old output and
/// the stored input.
fn classical_comb<R: Rng + ?Sized>(new_in: usize, old_in: usize, old_out: usize, new_out: usize, rng: &mut R) -> Result<LocalComb> {
    let pre_rows: Vec<Vec<f64>> = (0..new_in)
        .map(|x| {
            let q = distribution(old_in, rng);
            let mut row = vec![0.0; old_in * new_in];
            for (k, p) in q.iter().enumerate() {
                row[k * new_in + x] = *p;
            }
            row
        })
        .collect();
    let post_rows: Vec<Vec<f64>> = (0..old_out * new_in).map(|_| distribution(new_out, rng)).collect();
    let pre = QuantumChannel::from_stochastic(
        &pre_rows,
        DimFactorization::single(new_in),
        DimFactorization::new(vec![old_in, new_in])?,
    )?;
    let post = QuantumChannel::from_stochastic(
        &post_rows,
        DimFactorization::new(vec![old_out, new_in])?,
        DimFactorization::single(new_out),
    )?;
    LocalComb::new(pre, post, new_in)
}

/// Shared-randomness mixture of `components` classical local combs mapping
/// behaviors in `input` to behaviors in `output`.
pub fn random_classical_losr(input: &Scenario, output: &Scenario, components: usize, seed: u64) -> Result<Superprocess> {
    let mut r = rng(seed);
    let weights = distribution(components.max(1), &mut r);
    let components = weights
        .into_iter()
        .map(|weight| {
            Ok(CombComponent {
                weight,
                alice: classical_comb(output.nx0, input.nx0, input.nx1, output.nx1, &mut r)?,
                bob: classical_comb(output.ny0, input.ny0, input.ny1, output.ny1, &mut r)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Superprocess::Losr { components })
}

/// Two-outcome instrument on dimension `d` from a random isometry
/// `d -> 2 ⊗ d_out`.
fn random_instrument<R: Rng + ?Sized>(d: usize, d_out: usize, rng: &mut R) -> Result<Instrument> {
    // Two branches of `k` Kraus operators each, cut from one isometry.
    let k = d.div_ceil(2 * d_out);
    let u = random_unitary(2 * d_out * k, rng);
    let branch = |o: usize| {
        (0..k)
            .map(|j| ComplexMatrix::from_fn(d_out, d, |r, c| u[((o * k + j) * d_out + r, c)]))
            .collect()
    };
    Instrument::new(vec![branch(0), branch(1)])
}

/// A delayed random channel `(2, 2) -> (2, 2)` together with a pre-stage
/// superprocess ending in binary measurements on binary inputs: each party
/// prepares an entangled pair with a local memory, Alice applies an
/// instrument and Bob responds conditioned on her outcome, then both
/// measure with transcript-dependent settings.
pub fn random_prelocc_pipeline(seed: u64) -> Result<(Superprocess, Process)> {
    let mut r = rng(seed);
    let (i, o) = bipartite_io(2, 2, 2, 2);
    let channel = random_channel_with(&i, &o, 4, &mut r);
    let process = Process::quantum(channel, Delay::new(1.0)?)?;

    let pair = DimFactorization::new(vec![2, 2])?;
    let alice_preparation = random_pure_state_with(&pair, &mut r);
    let bob_preparation = random_pure_state_with(&pair, &mut r);
    let bob_children = (0..2)
        .map(|_| Ok(Some(ProtocolNode::leaf(Party::B, random_instrument(4, 2, &mut r)?))))
        .collect::<Result<Vec<_>>>()?;
    let protocol = PreLoccProtocol::new(ProtocolNode {
        party: Party::A,
        instrument: random_instrument(4, 2, &mut r)?,
        children: bob_children,
    });

    let mut posts = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            let mut settings = || -> Result<QuantumChannel> {
                let povms = vec![random_povm_with(2, 2, &mut r)?, random_povm_with(2, 2, &mut r)?];
                QuantumChannel::measure_with_settings(&povms)
            };
            posts.push(TranscriptPost { transcript: vec![a, b], alice: settings()?, bob: settings()? });
        }
    }
    let sp = Superprocess::PreLocc(PreLoccStage {
        alice_preparation,
        bob_preparation,
        alice_memory: 2,
        bob_memory: 2,
        protocol,
        posts,
    });
    Ok((sp, process))
}
