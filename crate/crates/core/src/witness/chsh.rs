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

//! CHSH-type witness for channels with quantum inputs and classical
//! outputs.
//!
//! With input states `ψ_{x0}` for Alice and `φ_{y0}` for Bob, the witness is
//! `W = sum_{x1 y1} W_{x1 y1} ⊗ |x1 y1><x1 y1|` with
//! `W_{x1 y1} = sum_{x0 y0} c(x0, y0, x1, y1) (ψ_{x0} ⊗ φ_{y0})^T` and
//! `c = constant - delta_weight · [x1 ⊕ y1 = x0 · y0]`.

use serde::{Deserialize, Serialize};

use crate::behaviors::table_strategies;
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, QuantumChannel};
use crate::tensor::{self, ComplexMatrix, DimFactorization};
use crate::tol;

/// Coefficient set of the witness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `3/16 - δ`.
    #[serde(rename = "paper", alias = "paper_3_16")]
    Unshifted,
    /// `3/16 - δ/4`: nonnegative on every local channel.
    #[default]
    #[serde(alias = "corrected_3_16_delta_quarter")]
    Corrected,
    Custom { constant: f64, delta_weight: f64 },
}

impl Normalization {
    /// `(constant, delta_weight)`.
    pub fn weights(self) -> (f64, f64) {
        match self {
            Normalization::Unshifted => (3.0 / 16.0, 1.0),
            Normalization::Corrected => (3.0 / 16.0, 0.25),
            Normalization::Custom { constant, delta_weight } => (constant, delta_weight),
        }
    }

    pub fn coefficient(self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        let (c, d) = self.weights();
        if (x1 ^ y1) == (x0 & y0) {
            c - d
        } else {
            c
        }
    }
}

/// Block-diagonal witness on `(A0 B0) ⊗ (A1 B1)` for qubit-pair outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWitness", into = "RawWitness")]
pub struct WitnessOperator {
    normalization: Normalization,
    psi: [DensityMatrix; 2],
    phi: [DensityMatrix; 2],
    /// Indexed by `2 * x1 + y1`.
    blocks: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct Block {
    x1: usize,
    y1: usize,
    #[serde(with = "crate::json::matrix")]
    matrix: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct RawWitness {
    normalization: Normalization,
    psi: [DensityMatrix; 2],
    phi: [DensityMatrix; 2],
    #[serde(default)]
    blocks: Option<Vec<Block>>,
}

impl TryFrom<RawWitness> for WitnessOperator {
    type Error = Error;

    fn try_from(raw: RawWitness) -> Result<Self> {
        let w = build_chsh_povm_witness(&raw.psi, &raw.phi, raw.normalization)?;
        if let Some(blocks) = raw.blocks {
            for b in blocks {
                let stored = w.blocks.get(2 * b.x1 + b.y1).filter(|_| b.x1 < 2 && b.y1 < 2).ok_or_else(|| {
                    Error::InvalidArgument(format!("block label ({}, {}) is not a pair of bits", b.x1, b.y1))
                })?;
                if b.matrix.shape() != stored.shape() || tensor::max_abs_diff(&b.matrix, stored) > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "block ({}, {}) does not match the input states and normalization",
                        b.x1, b.y1
                    )));
                }
            }
        }
        Ok(w)
    }
}

impl From<WitnessOperator> for RawWitness {
    fn from(w: WitnessOperator) -> Self {
        let blocks = w
            .blocks
            .into_iter()
            .enumerate()
            .map(|(k, matrix)| Block { x1: k / 2, y1: k % 2, matrix })
            .collect();
        RawWitness { normalization: w.normalization, psi: w.psi, phi: w.phi, blocks: Some(blocks) }
    }
}

fn check_pure(states: &[DensityMatrix], who: &str) -> Result<()> {
    for s in states {
        if !s.is_pure() {
            return Err(Error::NotPure(s.purity()));
        }
    }
    if states[0].dim() != states[1].dim() {
        return Err(Error::DimensionMismatch(format!("{who}'s input states differ in dimension")));
    }
    Ok(())
}

/// Builds the witness from Alice's and Bob's pure input states.
pub fn build_chsh_povm_witness(
    psi: &[DensityMatrix; 2],
    phi: &[DensityMatrix; 2],
    normalization: Normalization,
) -> Result<WitnessOperator> {
    check_pure(psi, "Alice")?;
    check_pure(phi, "Bob")?;
    let d = psi[0].dim() * phi[0].dim();
    let mut blocks = vec![ComplexMatrix::zeros(d, d); 4];
    for x0 in 0..2 {
        for y0 in 0..2 {
            let input = tensor::tensor(psi[x0].matrix(), phi[y0].matrix()).transpose();
            for x1 in 0..2 {
                for y1 in 0..2 {
                    blocks[2 * x1 + y1] += input.scale(normalization.coefficient(x0, y0, x1, y1));
                }
            }
        }
    }
    Ok(WitnessOperator { normalization, psi: psi.clone(), phi: phi.clone(), blocks })
}

impl WitnessOperator {
    /// Computational-basis inputs on qubits.
    pub fn standard(normalization: Normalization) -> Self {
        let basis = |i| {
            DensityMatrix::pure(&tensor::ket(2, i), DimFactorization::single(2)).expect("unit vector")
        };
        build_chsh_povm_witness(&[basis(0), basis(1)], &[basis(0), basis(1)], normalization)
            .expect("basis states are pure")
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn block(&self, x1: usize, y1: usize) -> &ComplexMatrix {
        &self.blocks[2 * x1 + y1]
    }

    pub fn psi(&self) -> &[DensityMatrix; 2] {
        &self.psi
    }

    pub fn phi(&self) -> &[DensityMatrix; 2] {
        &self.phi
    }

    /// `(dim A0, dim B0)`.
    pub fn input_dims(&self) -> (usize, usize) {
        (self.psi[0].dim(), self.phi[0].dim())
    }

    /// Full operator `sum W_{x1 y1} ⊗ |x1 y1><x1 y1|` on `(A0, B0, A1, B1)`.
    pub fn matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.blocks[0].nrows() * 4, self.blocks[0].nrows() * 4);
        for (k, b) in self.blocks.iter().enumerate() {
            m += tensor::tensor(b, &tensor::matrix_unit(4, k, k));
        }
        m
    }
}

/// `(dims, output index)` check shared by both evaluations.
fn check_qc(w: &WitnessOperator, channel: &QuantumChannel) -> Result<()> {
    let [a0, b0, a1, b1] = channel.bipartite_dims()?;
    let (da, db) = w.input_dims();
    if (a0, b0, a1, b1) != (da, db, 2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "witness needs a ({da},{db}) -> (2,2) channel, got ({a0},{b0}) -> ({a1},{b1})"
        )));
    }
    // Coherences between different outputs must vanish.
    let (din, dout) = (channel.din(), channel.dout());
    let j = channel.choi();
    let mut off = 0.0f64;
    for i in 0..din {
        for k in 0..din {
            for a in 0..dout {
                for b in 0..dout {
                    if a != b {
                        off = off.max(j[(i * dout + a, k * dout + b)].norm());
                    }
                }
            }
        }
    }
    if off > tol::CPTP {
        return Err(Error::OutputNotClassical(off));
    }
    Ok(())
}

/// POVM element `Π_o` read from the diagonal output block of the Choi matrix.
pub(crate) fn povm_element(channel: &QuantumChannel, o: usize) -> ComplexMatrix {
    let (din, dout) = (channel.din(), channel.dout());
    let j = channel.choi();
    ComplexMatrix::from_fn(din, din, |r, c| j[(c * dout + o, r * dout + o)])
}

/// `sum p(x1 y1 | x0 y0) c(x0, y0, x1, y1)` with
/// `p = Tr[Π_{x1 y1} (ψ_{x0} ⊗ φ_{y0})]`.
pub fn evaluate_witness(w: &WitnessOperator, channel: &QuantumChannel) -> Result<f64> {
    check_qc(w, channel)?;
    let povm: Vec<ComplexMatrix> = (0..4).map(|o| povm_element(channel, o)).collect();
    let mut total = 0.0;
    for x0 in 0..2 {
        for y0 in 0..2 {
            let input = tensor::tensor(w.psi[x0].matrix(), w.phi[y0].matrix());
            for (o, pi) in povm.iter().enumerate() {
                let p = tensor::trace_of_product(pi, &input).re;
                total += p * w.normalization.coefficient(x0, y0, o / 2, o % 2);
            }
        }
    }
    Ok(total)
}

/// `Tr[W J]` by full contraction with the Choi matrix.
pub fn witness_expectation(w: &WitnessOperator, channel: &QuantumChannel) -> Result<f64> {
    check_qc(w, channel)?;
    Ok(tensor::trace_of_product(&w.matrix(), channel.choi()).re)
}

fn orthonormal(states: &[DensityMatrix; 2]) -> Result<()> {
    let overlap = tensor::trace_of_product(states[0].matrix(), states[1].matrix()).re;
    if overlap > tol::POVM {
        return Err(Error::NotOrthonormal(overlap.sqrt()));
    }
    Ok(())
}

/// Minimum of [`evaluate_witness`] over deterministic local strategies
/// `x1 = f(x0)`, `y1 = g(y0)`; by linearity this is the minimum over all
/// local channels when the input states are orthonormal.
pub fn losr_min_witness_value(w: &WitnessOperator) -> Result<f64> {
    orthonormal(&w.psi)?;
    orthonormal(&w.phi)?;
    let strategies = table_strategies(2, 2);
    let mut best = f64::INFINITY;
    for f in &strategies {
        for g in &strategies {
            let mut v = 0.0;
            for x0 in 0..2 {
                for y0 in 0..2 {
                    v += w.normalization.coefficient(x0, y0, f[x0], g[y0]);
                }
            }
            best = best.min(v);
        }
    }
    Ok(best)
}

/// Channel `(A0, B0) -> (A1, B1)` measuring the inputs with the given
/// POVM elements, `Π_o` indexed by `2 * x1 + y1`.
pub fn qc_channel(effects: &[ComplexMatrix], da: usize, db: usize) -> Result<QuantumChannel> {
    if effects.len() != 4 {
        return Err(Error::InvalidArgument("expected four effects".into()));
    }
    let d = da * db;
    let mut choi = ComplexMatrix::zeros(4 * d, 4 * d);
    for (o, e) in effects.iter().enumerate() {
        choi += tensor::tensor(&e.transpose(), &tensor::matrix_unit(4, o, o));
    }
    let (i, out) = crate::quantum::bipartite_io(da, db, 2, 2);
    QuantumChannel::from_choi(choi, i, out)
}
