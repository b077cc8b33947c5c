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
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{
    self, eig_hermitian_unchecked, hermitian_deviation, ComplexMatrix, ComplexVector, DimFactorization,
};
use crate::tol;

/// Hermitian, positive semidefinite, unit-trace operator with subsystem
/// dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: DimFactorization,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(with = "crate::json::matrix")]
    matrix: ComplexMatrix,
}

impl TryFrom<RawState> for DensityMatrix {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        let dims = match raw.labels {
            Some(labels) => DimFactorization::labelled(raw.dims, labels)?,
            None => DimFactorization::new(raw.dims)?,
        };
        DensityMatrix::new(raw.matrix, dims)
    }
}

impl From<DensityMatrix> for RawState {
    fn from(s: DensityMatrix) -> Self {
        RawState {
            dims: s.dims.dims().to_vec(),
            labels: Some(s.dims.labels().to_vec()),
            matrix: s.matrix,
        }
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace.
    pub fn new(matrix: ComplexMatrix, dims: DimFactorization) -> Result<Self> {
        dims.check_matrix(&matrix)?;
        let dev = hermitian_deviation(&matrix);
        if dev > tol::HERMITIAN {
            return Err(Error::NotHermitian(dev));
        }
        let (vals, _) = eig_hermitian_unchecked(&matrix);
        if vals[0] < -tol::PSD {
            return Err(Error::NotPsd(vals[0]));
        }
        let tr = tensor::trace(&matrix).re;
        if (tr - 1.0).abs() > tol::TRACE {
            return Err(Error::TraceNotOne(tr));
        }
        Ok(Self { matrix, dims })
    }

    /// Normalizes a PSD operator by its trace first.
    pub fn from_unnormalized(matrix: ComplexMatrix, dims: DimFactorization) -> Result<Self> {
        let tr = tensor::trace(&matrix).re;
        if tr <= 0.0 {
            return Err(Error::TraceNotOne(tr));
        }
        Self::new(matrix.unscale(tr), dims)
    }

    /// `|psi><psi|` for a (normalized on the fly) vector.
    pub fn pure(psi: &ComplexVector, dims: DimFactorization) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        Self::new(tensor::projector(&psi.unscale(norm)), dims)
    }

    pub fn maximally_mixed(dims: DimFactorization) -> Self {
        let d = dims.total();
        Self { matrix: tensor::identity(d).unscale(d as f64), dims }
    }

    /// `|phi+> = (1/sqrt d) sum_i |ii>` on `d ⊗ d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = ComplexVector::zeros(d * d);
        for i in 0..d {
            v[i * d + i] = Complex64::new(1.0, 0.0);
        }
        Self::pure(&v, DimFactorization::bipartite(d, d, "A", "B")).expect("nonzero vector")
    }

    /// Two-qubit `phi+`.
    pub fn phi_plus() -> Self {
        Self::maximally_entangled(2)
    }

    /// Werner state `p |psi-><psi-| + (1 - p) I/4` (singlet convention).
    pub fn werner(p: f64) -> Result<Self> {
        if !(-1.0 / 3.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("Werner parameter {p} outside [-1/3, 1]")));
        }
        let s = 0.5f64.sqrt();
        let singlet = ComplexVector::from_vec(vec![0.0, s, -s, 0.0].into_iter().map(|x| Complex64::new(x, 0.0)).collect());
        let m = tensor::projector(&singlet).scale(p) + tensor::identity(4).scale((1.0 - p) / 4.0);
        Self::new(m, DimFactorization::bipartite(2, 2, "A", "B"))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &DimFactorization {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        tensor::trace_of_product(&self.matrix, &self.matrix).re
    }

    pub fn is_pure(&self) -> bool {
        (self.purity() - 1.0).abs() <= 1e-9
    }

    /// Dominant eigenvector; for pure states this is the state vector up to phase.
    pub fn principal_vector(&self) -> ComplexVector {
        let (_, vecs) = eig_hermitian_unchecked(&self.matrix);
        vecs.column(vecs.ncols() - 1).into_owned()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self {
            matrix: tensor::tensor(&self.matrix, &other.matrix),
            dims: self.dims.join(&other.dims),
        }
    }

    /// Reduced state on the listed subsystems.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = tensor::partial_trace(&self.matrix, &self.dims, keep)?;
        Ok(Self { matrix: m, dims: self.dims.select(keep) })
    }

    /// Reinterprets the same matrix under another factorization of equal total dimension.
    pub fn with_dims(self, dims: DimFactorization) -> Result<Self> {
        dims.check_matrix(&self.matrix)?;
        Ok(Self { matrix: self.matrix, dims })
    }

    /// Groups subsystems into a bipartition `(first | rest)` at `split`.
    pub fn bipartition(&self, split: usize) -> Result<DensityMatrix> {
        let d = self.dims.dims();
        if split == 0 || split >= d.len() {
            return Err(Error::InvalidDims(format!("cannot split {} factors at {split}", d.len())));
        }
        let da = d[..split].iter().product();
        let db = d[split..].iter().product();
        self.clone().with_dims(DimFactorization::bipartite(da, db, "A", "B"))
    }

    /// Mixture `sum_k w_k rho_k`; weights must be a probability vector.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<DensityMatrix> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(Error::InvalidArgument("weights and states differ in length".into()));
        }
        let mut m = ComplexMatrix::zeros(first.dim(), first.dim());
        for (w, s) in weights.iter().zip(states) {
            if s.dims.dims() != first.dims.dims() {
                return Err(Error::DimensionMismatch("mixture components differ in dims".into()));
            }
            m += s.matrix.scale(*w);
        }
        Self::new(m, first.dims.clone())
    }

    /// Trusted constructor for internal results that are valid by construction
    /// up to rounding; symmetrizes and renormalizes.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, dims: DimFactorization) -> Self {
        let sym = (&matrix + matrix.adjoint()).scale(0.5);
        let tr = tensor::trace(&sym).re;
        Self { matrix: sym.unscale(tr), dims }
    }
}
