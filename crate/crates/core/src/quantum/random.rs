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
//! Seeded generators for states, measurements and channels.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{kraus_to_choi, DensityMatrix, Povm, QuantumChannel};
use crate::error::{Error, Result};
use crate::tensor::{self, ComplexMatrix, ComplexVector, DimFactorization};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary via the polar part of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    isometry(d, d, rng)
}

/// Random isometry `V` (`rows >= cols`) with `V† V = I`.
fn isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(rows, cols, rng);
    let s = g.adjoint() * &g;
    &g * tensor::inv_sqrt_psd(&s, 1e-300)
}

pub fn random_pure_state_with<R: Rng + ?Sized>(dims: &DimFactorization, rng: &mut R) -> DensityMatrix {
    let v = ComplexVector::from_fn(dims.total(), |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    DensityMatrix::pure(&v, dims.clone()).expect("Gaussian vector is nonzero")
}

/// Full-rank mixed state `G G† / Tr` from a square Ginibre matrix.
pub fn random_state_with<R: Rng + ?Sized>(dims: &DimFactorization, rng: &mut R) -> DensityMatrix {
    let d = dims.total();
    let g = ginibre(d, d, rng);
    DensityMatrix::from_trusted(&g * g.adjoint(), dims.clone())
}

pub fn random_state(dims: &[usize], seed: u64) -> Result<DensityMatrix> {
    let dims = DimFactorization::new(dims.to_vec())?;
    Ok(random_state_with(&dims, &mut rng(seed)))
}

pub fn random_pure_state(dims: &[usize], seed: u64) -> Result<DensityMatrix> {
    let dims = DimFactorization::new(dims.to_vec())?;
    Ok(random_pure_state_with(&dims, &mut rng(seed)))
}

pub fn random_povm_with<R: Rng + ?Sized>(d: usize, n_effects: usize, rng: &mut R) -> Result<Povm> {
    if n_effects == 0 {
        return Err(Error::InvalidArgument("POVM needs at least one effect".into()));
    }
    let ops: Vec<ComplexMatrix> = (0..n_effects).map(|_| ginibre(d, d, rng)).collect();
    Povm::from_operators(&ops)
}

pub fn random_povm(dims: &[usize], n_effects: usize, seed: u64) -> Result<Povm> {
    let df = DimFactorization::new(dims.to_vec())?;
    let p = random_povm_with(df.total(), n_effects, &mut rng(seed))?;
    Povm::new(p.effects().to_vec(), df)
}

/// Channel from a random Stinespring isometry with the given Kraus rank,
/// raised where needed so that the isometry exists (`dout · rank >= din`).
pub fn random_channel_with<R: Rng + ?Sized>(
    in_dims: &DimFactorization,
    out_dims: &DimFactorization,
    rank: usize,
    rng: &mut R,
) -> QuantumChannel {
    let (din, dout) = (in_dims.total(), out_dims.total());
    let rank = rank.max(din.div_ceil(dout));
    let v = isometry(dout * rank, din, rng);
    let kraus = (0..rank).map(|k| v.rows(k * dout, dout).into_owned()).collect();
    kraus_to_choi(kraus, in_dims.clone(), out_dims.clone()).expect("isometry yields a CPTP map")
}

pub fn random_channel(in_dims: &[usize], out_dims: &[usize], seed: u64) -> Result<QuantumChannel> {
    let i = DimFactorization::new(in_dims.to_vec())?;
    let o = DimFactorization::new(out_dims.to_vec())?;
    let rank = (i.total() * o.total()).min(4);
    Ok(random_channel_with(&i, &o, rank, &mut rng(seed)))
}
