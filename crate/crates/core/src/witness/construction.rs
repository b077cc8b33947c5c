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

//! Turning an entanglement witness on Choi space into a local-operations
//! superprocess whose classical statistics reveal it.
//!
//! Each party feeds half of a maximally entangled pair into the channel and
//! later projects (external input, kept half) and (external input, channel
//! output) onto maximally entangled states; outcome `1` means both
//! projections succeeded. For an input `σ` on `(A0 A1 B0 B1)` the joint
//! success probability is `Tr[σ^T ρ_J] / (dA0 dA1 dB0 dB1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chsh::povm_element;
use crate::error::{Error, Result};
use crate::processes::{apply_superprocess, CombComponent, Delay, LocalComb, Process, Superprocess};
use crate::quantum::{kraus_to_choi, DensityMatrix, Povm, QuantumChannel};
use crate::tensor::{self, ComplexMatrix, DimFactorization};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub superprocess: Superprocess,
    /// Outcome pair whose probabilities are compared.
    pub outcome: (usize, usize),
    /// `W = r η - t ζ` with density operators `η`, `ζ`.
    pub r: f64,
    pub t: f64,
    /// Probability of `outcome` when the inputs are `η^T`.
    pub p_eta: f64,
    pub p_zeta: f64,
    /// `dA0 dA1 dB0 dB1`, the factor relating outcome probabilities to
    /// overlaps with the normalized Choi state.
    pub scale: f64,
    /// `scale · (r p_eta - t p_zeta)`.
    pub value: f64,
    /// `Tr[ρ_J W]` computed directly.
    pub direct_value: f64,
}

/// `I/d - |φ+><φ+|` on `d ⊗ d`: nonnegative on separable states, `1/d - 1`
/// on the maximally entangled state.
pub fn flip_witness(d: usize) -> ComplexMatrix {
    let phi = DensityMatrix::maximally_entangled(d);
    tensor::identity(d * d).unscale(d as f64) - phi.matrix()
}

/// `W = r η - t ζ` from the positive and negative spectral parts.
fn split(w: &ComplexMatrix) -> Result<(f64, ComplexMatrix, f64, ComplexMatrix)> {
    let (vals, vecs) = tensor::eig_hermitian(w)?;
    let n = w.nrows();
    let (mut pos, mut neg) = (ComplexMatrix::zeros(n, n), ComplexMatrix::zeros(n, n));
    for (k, &v) in vals.iter().enumerate() {
        let col = vecs.column(k);
        let proj = &col * col.adjoint();
        if v > 0.0 {
            pos += proj.scale(v);
        } else if v < 0.0 {
            neg += proj.scale(-v);
        }
    }
    let (r, t) = (tensor::trace(&pos).re, tensor::trace(&neg).re);
    if r + t <= tol::CLAMP {
        return Err(Error::DegenerateWitness("witness is zero".into()));
    }
    let norm = |m: ComplexMatrix, s: f64| if s > 0.0 { m.unscale(s) } else { tensor::identity(n).unscale(n as f64) };
    Ok((r, norm(pos, r), t, norm(neg, t)))
}

/// Pre stage `(Ã0 Ã1) -> (A0 ⊗ flag ⊗ Ã1)`: prepares a maximally entangled
/// pair on `(K, A0)`, measures `(Ã0, K)` against it and records success in
/// the flag.
fn pre_stage(d0: usize, d1: usize) -> Result<QuantumChannel> {
    let mut phi = tensor::ComplexVector::zeros(d0 * d0);
    for k in 0..d0 {
        phi[k * d0 + k] = Complex64::new(1.0 / (d0 as f64).sqrt(), 0.0);
    }
    let (_, vecs) = tensor::eig_hermitian(&(tensor::identity(d0 * d0) - &phi * phi.adjoint()))?;
    // Eigenvalue 0 comes first; the rest span the complement.
    let mut tests: Vec<(usize, tensor::ComplexVector)> = vec![(1, phi)];
    for m in 1..d0 * d0 {
        tests.push((0, vecs.column(m).clone_owned()));
    }
    let s = 1.0 / (d0 as f64).sqrt();
    let kraus = tests
        .iter()
        .map(|(flag, v)| {
            let mut k = ComplexMatrix::zeros(d0 * 2 * d1, d0 * d1);
            for i in 0..d0 {
                for j in 0..d1 {
                    for a in 0..d0 {
                        k[((a * 2 + flag) * d1 + j, i * d1 + j)] = v[i * d0 + a].conj() * s;
                    }
                }
            }
            k
        })
        .collect();
    kraus_to_choi(kraus, DimFactorization::single(d0 * d1), DimFactorization::new(vec![d0, 2 * d1])?)
}

/// Post stage `(A1 ⊗ flag ⊗ Ã1) -> bit`: outputs 1 iff the flag is set and
/// `(A1, Ã1)` passes the maximally entangled projection.
fn post_stage(d1: usize) -> Result<QuantumChannel> {
    let n = d1 * 2 * d1;
    let mut pass = ComplexMatrix::zeros(n, n);
    let idx = |a: usize, j: usize| (a * 2 + 1) * d1 + j;
    for a in 0..d1 {
        for b in 0..d1 {
            pass[(idx(a, a), idx(b, b))] = Complex64::new(1.0 / d1 as f64, 0.0);
        }
    }
    let fail = tensor::identity(n) - &pass;
    let povm = Povm::new(vec![fail, pass], DimFactorization::single(n))?;
    QuantumChannel::from_povm(&povm, DimFactorization::single(2))
}

fn comb(d0: usize, d1: usize) -> Result<LocalComb> {
    LocalComb::new(pre_stage(d0, d1)?, post_stage(d1)?, 2 * d1)
}

/// Builds the local superprocess for `channel`, evaluates the success
/// probabilities on `η^T` and `ζ^T`, and compares the recombined value with
/// `Tr[ρ_J W]`.
pub fn witness_to_channel_construction(w: &ComplexMatrix, channel: &QuantumChannel) -> Result<ConstructionReport> {
    let [a0, b0, a1, b1] = channel.bipartite_dims()?;
    let n = channel.din() * channel.dout();
    if w.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("witness is {}x{}, Choi space is {n}", w.nrows(), w.ncols())));
    }
    let (r, eta, t, zeta) = split(w)?;

    let superprocess = Superprocess::Losr {
        components: vec![CombComponent { weight: 1.0, alice: comb(a0, a1)?, bob: comb(b0, b1)? }],
    };
    let process = Process::quantum(channel.clone(), Delay::INSTANT)?;
    let out = apply_superprocess(&superprocess, &process)?.channel().to_quantum();
    let success = povm_element(&out, 3);

    let choi_dims = DimFactorization::new(vec![a0, b0, a1, b1])?;
    let probability = |sigma: &ComplexMatrix| -> Result<f64> {
        // Inputs are ordered (Ã0 Ã1)(B̃0 B̃1).
        let (input, _) = tensor::permute_subsystems(&sigma.transpose(), &choi_dims, &[0, 2, 1, 3])?;
        Ok(tensor::trace_of_product(&success, &input).re)
    };
    let (p_eta, p_zeta) = (probability(&eta)?, probability(&zeta)?);
    let scale = (a0 * a1 * b0 * b1) as f64;
    let rho_j = channel.choi().unscale((a0 * b0) as f64);
    Ok(ConstructionReport {
        superprocess,
        outcome: (1, 1),
        r,
        t,
        p_eta,
        p_zeta,
        scale,
        value: scale * (r * p_eta - t * p_zeta),
        direct_value: tensor::trace_of_product(&rho_j, w).re,
    })
}
