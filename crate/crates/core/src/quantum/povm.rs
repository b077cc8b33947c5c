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

use super::DensityMatrix;
use crate::error::{Error, Result};
use crate::tensor::{
    self, eig_hermitian_unchecked, hermitian_deviation, ComplexMatrix, ComplexVector, DimFactorization,
};
use crate::tol;

/// Positive operator-valued measure: PSD effects summing to the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPovm", into = "RawPovm")]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
    dims: DimFactorization,
}

#[derive(Serialize, Deserialize)]
struct RawPovm {
    dims: Vec<usize>,
    #[serde(with = "crate::json::matrices")]
    effects: Vec<ComplexMatrix>,
}

impl TryFrom<RawPovm> for Povm {
    type Error = Error;

    fn try_from(raw: RawPovm) -> Result<Self> {
        Povm::new(raw.effects, DimFactorization::new(raw.dims)?)
    }
}

impl From<Povm> for RawPovm {
    fn from(p: Povm) -> Self {
        RawPovm { dims: p.dims.dims().to_vec(), effects: p.effects }
    }
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>, dims: DimFactorization) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::InvalidArgument("POVM has no effects".into()));
        }
        let d = dims.total();
        let mut sum = ComplexMatrix::zeros(d, d);
        for e in &effects {
            dims.check_matrix(e)?;
            let dev = hermitian_deviation(e);
            if dev > tol::HERMITIAN {
                return Err(Error::NotHermitian(dev));
            }
            let min = eig_hermitian_unchecked(e).0[0];
            if min < -tol::PSD {
                return Err(Error::NotPsd(min));
            }
            sum += e;
        }
        let dev = tensor::max_abs_diff(&sum, &tensor::identity(d));
        if dev > tol::POVM {
            return Err(Error::PovmIncomplete(dev));
        }
        Ok(Self { effects, dims })
    }

    /// Measurement in the computational basis of dimension `d`.
    pub fn computational(d: usize) -> Self {
        let effects = (0..d).map(|i| tensor::projector(&tensor::ket(d, i))).collect();
        Self { effects, dims: DimFactorization::single(d) }
    }

    /// Trivial measurement that always reports \`outcome\` out of \`n\`.
    pub fn deterministic(d: usize, outcome: usize, n: usize) -> Result<Self> {
        if outcome >= n {
            return Err(Error::InvalidArgument(format!("outcome {outcome} outside 0..{n}")));
        }
        let effects = (0..n)
            .map(|o| if o == outcome { tensor::identity(d) } else { ComplexMatrix::zeros(d, d) })
            .collect();
        Ok(Self { effects, dims: DimFactorization::single(d) })
    }

    /// Rank-one projective measurement onto an orthonormal basis.
    pub fn projective(basis: &[ComplexVector]) -> Result<Self> {
        let d = basis.len();
        for (i, u) in basis.iter().enumerate() {
            if u.len() != d {
                return Err(Error::DimensionMismatch(format!("basis vector {i} has length {}", u.len())));
            }
            for (j, v) in basis.iter().enumerate() {
                let ip = u.dotc(v);
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (ip - Complex64::new(target, 0.0)).norm();
                if dev > 1e-9 {
                    return Err(Error::NotOrthonormal(dev));
                }
            }
        }
        Self::new(basis.iter().map(tensor::projector).collect(), DimFactorization::single(d))
    }

    /// Two-outcome qubit measurement along the Bloch direction `n`
    /// (normalized); outcome 0 is `(I + n·σ)/2`.
    pub fn qubit_direction(n: [f64; 3]) -> Result<Self> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero Bloch direction".into()));
        }
        let s = tensor::paulis();
        let mut ns = ComplexMatrix::zeros(2, 2);
        for k in 0..3 {
            ns += s[k].scale(n[k] / norm);
        }
        let id = tensor::identity(2);
        let plus = (&id + &ns).scale(0.5);
        let minus = (&id - &ns).scale(0.5);
        Self::new(vec![plus, minus], DimFactorization::single(2))
    }

    /// Square-root normalized POVM `M_a = S^{-1/2} A_a† A_a S^{-1/2}` with
    /// `S = sum_a A_a† A_a`. Every full-rank parameter set yields a valid POVM.
    pub fn from_operators(ops: &[ComplexMatrix]) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidArgument("no operators".into()))?;
        let d = first.ncols();
        let grams: Vec<ComplexMatrix> = ops.iter().map(|a| a.adjoint() * a).collect();
        let s = grams.iter().fold(ComplexMatrix::zeros(d, d), |acc, g| acc + g);
        let w = tensor::inv_sqrt_psd(&s, 1e-14);
        let effects = grams
            .iter()
            .map(|g| {
                let e = &w * g * &w;
                (&e + e.adjoint()).scale(0.5)
            })
            .collect();
        Self::new(effects, DimFactorization::single(d))
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn dims(&self) -> &DimFactorization {
        &self.dims
    }

    /// Born-rule outcome distribution, clamped at zero and renormalized.
    pub fn probabilities(&self, state: &DensityMatrix) -> Result<Vec<f64>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "POVM on dimension {} applied to state of dimension {}",
                self.dim(),
                state.dim()
            )));
        }
        let mut p: Vec<f64> = self
            .effects
            .iter()
            .map(|e| tensor::trace_of_product(state.matrix(), e).re.max(0.0))
            .collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        Ok(p)
    }

    /// Product measurement; outcome `(a, b)` maps to `a * other.len() + b`.
    pub fn tensor(&self, other: &Povm) -> Povm {
        let mut effects = Vec::with_capacity(self.len() * other.len());
        for a in &self.effects {
            for b in &other.effects {
                effects.push(tensor::tensor(a, b));
            }
        }
        Povm { effects, dims: self.dims.join(&other.dims) }
    }
}
