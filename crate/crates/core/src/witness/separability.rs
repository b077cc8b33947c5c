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

//! Separability of Choi matrices across the Alice/Bob cut.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::processes::LosrDecomposition;
use crate::quantum::QuantumChannel;
use crate::tensor::{self, DimFactorization};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Separable,
    Entangled,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// Spectrum of the Choi matrix partially transposed on Bob's side, in
    /// ascending order.
    PartialTranspose { min_eigenvalue: f64, eigenvalues: Vec<f64>, exact: bool },
    /// A supplied mixture of product channels reproducing the Choi matrix.
    Decomposition { components: usize, reconstruction_error: f64 },
    /// Diagonal Choi matrix: a mixture of product basis projectors.
    Diagonal,
    /// Choi matrix equal to the product of its two reduced operators.
    Product { deviation: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityVerdict {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

/// Cut dimensions `(A0·A1, B0·B1)` for which positive partial transpose
/// already implies separability.
fn ppt_is_exact(da: usize, db: usize) -> bool {
    da.min(db) == 1 || da * db <= 6
}

/// Separability of the Choi matrix across `(A0 A1 | B0 B1)`.
pub fn choi_separability(channel: &QuantumChannel) -> Result<SeparabilityVerdict> {
    choi_separability_with(channel, None)
}

/// As [`choi_separability`], additionally accepting an explicit local
/// decomposition as a separability certificate.
pub fn choi_separability_with(
    channel: &QuantumChannel,
    decomposition: Option<&LosrDecomposition>,
) -> Result<SeparabilityVerdict> {
    let [a0, b0, a1, b1] = channel.bipartite_dims()?;
    if let Some(dec) = decomposition {
        let err = dec.reconstruction_error(channel)?;
        if err <= tol::CPTP {
            return Ok(SeparabilityVerdict {
                verdict: Verdict::Separable,
                evidence: Evidence::Decomposition { components: dec.components.len(), reconstruction_error: err },
            });
        }
    }
    if channel.off_diagonal_weight() <= tol::HERMITIAN {
        return Ok(SeparabilityVerdict { verdict: Verdict::Separable, evidence: Evidence::Diagonal });
    }

    let dims = DimFactorization::new(vec![a0, b0, a1, b1])?;
    let pt = tensor::partial_transpose(channel.choi(), &dims, &[1, 3])?;
    let (eigenvalues, _) = tensor::eig_hermitian_unchecked(&pt);
    let min_eigenvalue = eigenvalues[0];
    let (da, db) = (a0 * a1, b0 * b1);
    let exact = ppt_is_exact(da, db);
    let spectrum = Evidence::PartialTranspose { min_eigenvalue, eigenvalues, exact };
    if min_eigenvalue < -tol::PSD {
        return Ok(SeparabilityVerdict { verdict: Verdict::Entangled, evidence: spectrum });
    }
    if exact {
        return Ok(SeparabilityVerdict { verdict: Verdict::Separable, evidence: spectrum });
    }

    // Reorder to (A0 A1 | B0 B1) and compare with the product of marginals.
    let (cut, _) = tensor::permute_subsystems(channel.choi(), &dims, &[0, 2, 1, 3])?;
    let cut_dims = DimFactorization::new(vec![da, db])?;
    let total = tensor::trace(&cut).re;
    let ra = tensor::partial_trace(&cut, &cut_dims, &[0])?;
    let rb = tensor::partial_trace(&cut, &cut_dims, &[1])?;
    let deviation = tensor::max_abs_diff(&tensor::tensor(&ra, &rb).unscale(total), &cut);
    if deviation <= tol::CPTP {
        return Ok(SeparabilityVerdict { verdict: Verdict::Separable, evidence: Evidence::Product { deviation } });
    }
    Ok(SeparabilityVerdict { verdict: Verdict::Inconclusive, evidence: spectrum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::Behavior;
    use crate::quantum::{bipartite_io, random_channel};

    #[test]
    fn identity_wire_is_npt_with_eigenvalue_minus_one() {
        let v = choi_separability(&QuantumChannel::identity_a_to_b(2)).unwrap();
        assert_eq!(v.verdict, Verdict::Entangled);
        let Evidence::PartialTranspose { min_eigenvalue, .. } = v.evidence else { panic!() };
        assert!((min_eigenvalue + 1.0).abs() < 1e-9);
    }

    #[test]
    fn classical_and_product_channels_are_separable() {
        let v = choi_separability(&Behavior::pr_box().to_channel()).unwrap();
        assert_eq!(v, SeparabilityVerdict { verdict: Verdict::Separable, evidence: Evidence::Diagonal });

        let a = random_channel(&[2], &[2], 1).unwrap();
        let b = random_channel(&[2], &[2], 2).unwrap();
        let (i, o) = bipartite_io(2, 2, 2, 2);
        let prod = a.product(&b).relabel(i, o).unwrap();
        let v = choi_separability(&prod).unwrap();
        assert_eq!(v.verdict, Verdict::Separable);
        assert!(matches!(v.evidence, Evidence::Product { .. }));
    }

    #[test]
    fn swap_is_entangled() {
        assert_eq!(choi_separability(&QuantumChannel::swap(2)).unwrap().verdict, Verdict::Entangled);
    }

    #[test]
    fn unlabelled_channel_is_an_error() {
        let id = QuantumChannel::identity(DimFactorization::single(2));
        assert!(choi_separability(&id).is_err());
    }
}
