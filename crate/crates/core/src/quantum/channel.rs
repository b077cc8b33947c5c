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

use super::{DensityMatrix, Povm};
use crate::error::{Error, Result};
use crate::tensor::{
    self, eig_hermitian_unchecked, hermitian_deviation, ComplexMatrix, ComplexVector, DimFactorization,
};
use crate::tol;

/// Completely positive trace-preserving map stored as its unnormalized Choi
/// matrix `J = sum_ij |i><j| ⊗ N(|i><j|)` on `(in ⊗ out)`, with `Tr J = dim(in)`.
///
/// Bipartite channels use `in_dims = (A0, B0)` and `out_dims = (A1, B1)`;
/// a trivial side has dimension 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel", into = "RawChannel")]
pub struct QuantumChannel {
    choi: ComplexMatrix,
    in_dims: DimFactorization,
    out_dims: DimFactorization,
    kraus: Option<Vec<ComplexMatrix>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Representation {
    Choi,
    Kraus,
}

#[derive(Serialize, Deserialize)]
struct RawChannel {
    representation: Representation,
    in_dims: RawDims,
    out_dims: RawDims,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::json::opt_matrix")]
    choi: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::json::opt_matrices")]
    kraus: Option<Vec<ComplexMatrix>>,
}

#[derive(Serialize, Deserialize)]
struct RawDims {
    dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<RawDims> for DimFactorization {
    type Error = Error;

    fn try_from(raw: RawDims) -> Result<Self> {
        match raw.labels {
            Some(l) => DimFactorization::labelled(raw.dims, l),
            None => DimFactorization::new(raw.dims),
        }
    }
}

impl From<&DimFactorization> for RawDims {
    fn from(d: &DimFactorization) -> Self {
        RawDims { dims: d.dims().to_vec(), labels: Some(d.labels().to_vec()) }
    }
}

impl TryFrom<RawChannel> for QuantumChannel {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        let in_dims = raw.in_dims.try_into()?;
        let out_dims = raw.out_dims.try_into()?;
        match raw.representation {
            Representation::Choi => {
                let choi = raw
                    .choi
                    .ok_or_else(|| Error::InvalidArgument("representation \"choi\" without a choi field".into()))?;
                QuantumChannel::from_choi(choi, in_dims, out_dims)
            }
            Representation::Kraus => {
                let kraus = raw
                    .kraus
                    .ok_or_else(|| Error::InvalidArgument("representation \"kraus\" without a kraus field".into()))?;
                kraus_to_choi(kraus, in_dims, out_dims)
            }
        }
    }
}

impl From<QuantumChannel> for RawChannel {
    fn from(c: QuantumChannel) -> Self {
        let in_dims = (&c.in_dims).into();
        let out_dims = (&c.out_dims).into();
        match c.kraus {
            Some(k) => RawChannel {
                representation: Representation::Kraus,
                in_dims,
                out_dims,
                choi: None,
                kraus: Some(k),
            },
            None => RawChannel {
                representation: Representation::Choi,
                in_dims,
                out_dims,
                choi: Some(c.choi),
                kraus: None,
            },
        }
    }
}

/// Standard bipartite labelling `(A0, B0) -> (A1, B1)`.
pub fn bipartite_io(a0: usize, b0: usize, a1: usize, b1: usize) -> (DimFactorization, DimFactorization) {
    (
        DimFactorization::bipartite(a0, b0, "A0", "B0"),
        DimFactorization::bipartite(a1, b1, "A1", "B1"),
    )
}

fn plain(dims: &[usize]) -> DimFactorization {
    DimFactorization::new(dims.to_vec()).expect("positive dimensions")
}

/// `vec(K)` with index `i * d_out + a` holding `K[a, i]`.
fn vectorize(k: &ComplexMatrix) -> ComplexVector {
    let (dout, din) = k.shape();
    ComplexVector::from_fn(din * dout, |idx, _| k[(idx % dout, idx / dout)])
}

fn kraus_completeness(kraus: &[ComplexMatrix], din: usize) -> f64 {
    let sum = kraus
        .iter()
        .fold(ComplexMatrix::zeros(din, din), |acc, k| acc + k.adjoint() * k);
    tensor::max_abs_diff(&sum, &tensor::identity(din))
}

fn choi_from_kraus_unchecked(kraus: &[ComplexMatrix], din: usize, dout: usize) -> ComplexMatrix {
    let n = din * dout;
    let mut j = ComplexMatrix::zeros(n, n);
    for k in kraus {
        let v = vectorize(k);
        j += &v * v.adjoint();
    }
    j
}

/// Builds a channel from Kraus operators (each `d_out x d_in`).
pub fn kraus_to_choi(
    kraus: Vec<ComplexMatrix>,
    in_dims: DimFactorization,
    out_dims: DimFactorization,
) -> Result<QuantumChannel> {
    let (din, dout) = (in_dims.total(), out_dims.total());
    if kraus.is_empty() {
        return Err(Error::InvalidArgument("empty Kraus set".into()));
    }
    for k in &kraus {
        if k.shape() != (dout, din) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator is {}x{}, expected {dout}x{din}",
                k.nrows(),
                k.ncols()
            )));
        }
    }
    let dev = kraus_completeness(&kraus, din);
    if dev > tol::CPTP {
        return Err(Error::NotTracePreserving(dev));
    }
    let choi = choi_from_kraus_unchecked(&kraus, din, dout);
    Ok(QuantumChannel { choi, in_dims, out_dims, kraus: Some(kraus) })
}

/// Kraus operators from the spectral decomposition of the Choi matrix; at
/// most `rank(J)` operators.
pub fn choi_to_kraus(channel: &QuantumChannel) -> Vec<ComplexMatrix> {
    let (din, dout) = (channel.din(), channel.dout());
    let (vals, vecs) = eig_hermitian_unchecked(&channel.choi);
    let top = vals.last().copied().unwrap_or(0.0).max(1.0);
    let mut out = Vec::new();
    for (c, &v) in vals.iter().enumerate().rev() {
        if v <= tol::CLAMP * top * 10.0 {
            continue;
        }
        let s = v.sqrt();
        out.push(ComplexMatrix::from_fn(dout, din, |a, i| vecs[(i * dout + a, c)] * s));
    }
    out
}

pub fn apply_channel(channel: &QuantumChannel, state: &DensityMatrix) -> Result<DensityMatrix> {
    channel.apply(state)
}

pub fn is_signalling(channel: &QuantumChannel) -> Result<(bool, bool)> {
    channel.signalling()
}

impl QuantumChannel {
    /// Validates positivity and trace preservation of a Choi matrix.
    pub fn from_choi(choi: ComplexMatrix, in_dims: DimFactorization, out_dims: DimFactorization) -> Result<Self> {
        let n = in_dims.total() * out_dims.total();
        if choi.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix is {}x{}, expected {n}x{n}",
                choi.nrows(),
                choi.ncols()
            )));
        }
        let dev = hermitian_deviation(&choi);
        if dev > tol::HERMITIAN {
            return Err(Error::NotHermitian(dev));
        }
        let min = eig_hermitian_unchecked(&choi).0[0];
        if min < -tol::PSD {
            return Err(Error::NotPsd(min));
        }
        let c = Self { choi, in_dims, out_dims, kraus: None };
        let dev = c.trace_preservation_error();
        if dev > tol::CPTP {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(c)
    }

    /// Choi and Kraus supplied together; both are validated and must agree.
    pub fn from_choi_and_kraus(
        choi: ComplexMatrix,
        kraus: Vec<ComplexMatrix>,
        in_dims: DimFactorization,
        out_dims: DimFactorization,
    ) -> Result<Self> {
        let from_choi = Self::from_choi(choi, in_dims.clone(), out_dims.clone())?;
        let from_kraus = kraus_to_choi(kraus, in_dims, out_dims)?;
        let dev = tensor::max_abs_diff(&from_choi.choi, &from_kraus.choi);
        if dev > tol::CPTP {
            return Err(Error::KrausChoiMismatch(dev));
        }
        Ok(Self { kraus: from_kraus.kraus, ..from_choi })
    }

    /// Construction whose validity is guaranteed by the caller; the Choi
    /// matrix is only symmetrized.
    pub(crate) fn from_choi_trusted(choi: ComplexMatrix, in_dims: DimFactorization, out_dims: DimFactorization) -> Self {
        let choi = (&choi + choi.adjoint()).scale(0.5);
        Self { choi, in_dims, out_dims, kraus: None }
    }

    pub(crate) fn from_kraus_trusted(kraus: Vec<ComplexMatrix>, in_dims: DimFactorization, out_dims: DimFactorization) -> Self {
        let choi = choi_from_kraus_unchecked(&kraus, in_dims.total(), out_dims.total());
        Self { choi, in_dims, out_dims, kraus: Some(kraus) }
    }

    pub fn identity(dims: DimFactorization) -> Self {
        let d = dims.total();
        Self::from_kraus_trusted(vec![tensor::identity(d)], dims.clone(), dims)
    }

    /// Identity map between two factorizations of the same total dimension,
    /// e.g. `A0 -> B1` inside a bipartite channel.
    pub fn identity_between(in_dims: DimFactorization, out_dims: DimFactorization) -> Result<Self> {
        if in_dims.total() != out_dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "identity from dimension {} to {}",
                in_dims.total(),
                out_dims.total()
            )));
        }
        let d = in_dims.total();
        Ok(Self::from_kraus_trusted(vec![tensor::identity(d)], in_dims, out_dims))
    }

    /// Qubit identity channel from Alice's input to Bob's output, with
    /// trivial `B0` and `A1`.
    pub fn identity_a_to_b(d: usize) -> Self {
        let (i, o) = bipartite_io(d, 1, 1, d);
        Self::identity_between(i, o).expect("equal dimensions")
    }

    pub fn unitary(u: ComplexMatrix, dims: DimFactorization) -> Result<Self> {
        kraus_to_choi(vec![u], dims.clone(), dims)
    }

    /// `X -> Tr[X] rho`.
    pub fn replacement(in_dims: DimFactorization, state: &DensityMatrix) -> Self {
        let choi = tensor::tensor(&tensor::identity(in_dims.total()), state.matrix());
        Self { choi, in_dims, out_dims: state.dims().clone(), kraus: None }
    }

    /// Qubit depolarizing channel `rho -> (1 - p) rho + p I/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=4.0 / 3.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("depolarizing parameter {p} outside [0, 4/3]")));
        }
        let s = tensor::paulis();
        let mut kraus = vec![tensor::identity(2).scale((1.0 - 0.75 * p).sqrt())];
        kraus.extend(s.iter().map(|m| m.scale((p / 4.0).sqrt())));
        let dims = DimFactorization::single(2);
        kraus_to_choi(kraus, dims.clone(), dims)
    }

    /// Exchanges the two inputs: `A1` receives `B0` and `B1` receives `A0`.
    pub fn swap(d: usize) -> Self {
        let p = tensor::subsystem_permutation(&[d, d], &[1, 0]).expect("valid permutation");
        let (i, o) = bipartite_io(d, d, d, d);
        Self::from_kraus_trusted(vec![p], i, o)
    }

    /// Quantum-to-classical channel `X -> sum_o Tr[Pi_o X] |o><o|`, with
    /// Choi matrix `sum_o Pi_o^T ⊗ |o><o|`.
    pub fn from_povm(povm: &Povm, out_dims: DimFactorization) -> Result<Self> {
        let n = povm.len();
        if out_dims.total() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} outcomes do not fit output dimension {}",
                out_dims.total()
            )));
        }
        let mut choi = ComplexMatrix::zeros(povm.dim() * n, povm.dim() * n);
        for (o, e) in povm.effects().iter().enumerate() {
            choi += tensor::tensor(&e.transpose(), &tensor::matrix_unit(n, o, o));
        }
        Ok(Self::from_choi_trusted(choi, povm.dims().clone(), out_dims))
    }

    /// Local measurement box `(X ⊗ S) -> O`: the classical input `x` selects
    /// `povms[x]`, whose outcome is written to `O`. Choi matrix
    /// `sum_{x,o} |x><x| ⊗ (M^x_o)^T ⊗ |o><o|`.
    pub fn measure_with_settings(povms: &[Povm]) -> Result<Self> {
        let first = povms.first().ok_or_else(|| Error::InvalidArgument("no measurement settings".into()))?;
        let (d, n) = (first.dim(), first.len());
        if povms.iter().any(|p| p.dim() != d || p.len() != n) {
            return Err(Error::InvalidScenario("settings differ in dimension or outcome count".into()));
        }
        let nx = povms.len();
        let mut choi = ComplexMatrix::zeros(nx * d * n, nx * d * n);
        for (x, p) in povms.iter().enumerate() {
            let sel = tensor::matrix_unit(nx, x, x);
            for (o, e) in p.effects().iter().enumerate() {
                choi += tensor::tensor_all([&sel, &e.transpose(), &tensor::matrix_unit(n, o, o)]);
            }
        }
        let in_dims = DimFactorization::labelled(vec![nx, d], vec!["X".into(), "S".into()])?;
        let out_dims = DimFactorization::labelled(vec![n], vec!["O".into()])?;
        Ok(Self::from_choi_trusted(choi, in_dims, out_dims))
    }

    /// Classical channel from a row-stochastic matrix `rows[i][o] = P(o | i)`,
    /// acting diagonally in the computational basis.
    pub fn from_stochastic(rows: &[Vec<f64>], in_dims: DimFactorization, out_dims: DimFactorization) -> Result<Self> {
        let (din, dout) = (in_dims.total(), out_dims.total());
        if rows.len() != din || rows.iter().any(|r| r.len() != dout) {
            return Err(Error::DimensionMismatch(format!("stochastic matrix must be {din}x{dout}")));
        }
        let mut choi = ComplexMatrix::zeros(din * dout, din * dout);
        for (i, r) in rows.iter().enumerate() {
            let total: f64 = r.iter().sum();
            if r.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > tol::CPTP {
                return Err(Error::NotTracePreserving((total - 1.0).abs()));
            }
            for (o, p) in r.iter().enumerate() {
                choi[(i * dout + o, i * dout + o)] = Complex64::new(*p, 0.0);
            }
        }
        Ok(Self::from_choi_trusted(choi, in_dims, out_dims))
    }

    /// Parallel composition `self ⊗ other`; inputs and outputs are
    /// concatenated in that order.
    pub fn product(&self, other: &QuantumChannel) -> QuantumChannel {
        let in_dims = self.in_dims.join(&other.in_dims);
        let out_dims = self.out_dims.join(&other.out_dims);
        if let (Some(ka), Some(kb)) = (&self.kraus, &other.kraus) {
            if ka.len() * kb.len() <= in_dims.total() * out_dims.total() {
                let kraus = ka
                    .iter()
                    .flat_map(|a| kb.iter().map(move |b| tensor::tensor(a, b)))
                    .collect();
                return Self::from_kraus_trusted(kraus, in_dims, out_dims);
            }
        }
        let joint = tensor::tensor(&self.choi, &other.choi);
        let order = plain(&[self.din(), self.dout(), other.din(), other.dout()]);
        let (choi, _) = tensor::permute_subsystems(&joint, &order, &[0, 2, 1, 3]).expect("valid permutation");
        Self::from_choi_trusted(choi, in_dims, out_dims)
    }

    /// Sequential composition: `next ∘ self`.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dout() != next.din() {
            return Err(Error::DimensionMismatch(format!(
                "cannot feed output dimension {} into input dimension {}",
                self.dout(),
                next.din()
            )));
        }
        let ka = self.kraus_operators();
        let kb = next.kraus_operators();
        let kraus: Vec<ComplexMatrix> = kb.iter().flat_map(|b| ka.iter().map(move |a| b * a)).collect();
        let composed = Self::from_kraus_trusted(kraus, self.in_dims.clone(), next.out_dims.clone());
        if composed.kraus.as_ref().map_or(0, Vec::len) > composed.din() * composed.dout() {
            return Ok(composed.without_kraus());
        }
        Ok(composed)
    }

    /// Convex combination of channels with identical dimensions.
    pub fn mixture(weights: &[f64], channels: &[QuantumChannel]) -> Result<QuantumChannel> {
        let first = channels
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        if weights.len() != channels.len() {
            return Err(Error::InvalidArgument("weights and channels differ in length".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("mixture weights are not a probability vector".into()));
        }
        let mut choi = ComplexMatrix::zeros(first.choi.nrows(), first.choi.ncols());
        for (w, c) in weights.iter().zip(channels) {
            if c.din() != first.din() || c.dout() != first.dout() {
                return Err(Error::DimensionMismatch("mixture components differ in dimension".into()));
            }
            choi += c.choi.scale(*w);
        }
        Ok(Self::from_choi_trusted(choi, first.in_dims.clone(), first.out_dims.clone()))
    }

    /// Same map under new factorizations of equal total dimensions.
    pub fn relabel(&self, in_dims: DimFactorization, out_dims: DimFactorization) -> Result<QuantumChannel> {
        if in_dims.total() != self.din() || out_dims.total() != self.dout() {
            return Err(Error::DimensionMismatch("relabelling changes total dimension".into()));
        }
        Ok(Self { in_dims, out_dims, ..self.clone() })
    }

    pub(crate) fn without_kraus(self) -> Self {
        Self { kraus: None, ..self }
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    /// `J / dim(in)`, a density operator on `(in ⊗ out)`.
    pub fn normalized_choi(&self) -> DensityMatrix {
        let dims = self.in_dims.join(&self.out_dims);
        DensityMatrix::from_trusted(self.choi.clone(), dims)
    }

    pub fn in_dims(&self) -> &DimFactorization {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &DimFactorization {
        &self.out_dims
    }

    pub fn din(&self) -> usize {
        self.in_dims.total()
    }

    pub fn dout(&self) -> usize {
        self.out_dims.total()
    }

    /// Stored Kraus operators, if the channel was built from them.
    pub fn kraus(&self) -> Option<&[ComplexMatrix]> {
        self.kraus.as_deref()
    }

    /// Stored Kraus operators or a decomposition of the Choi matrix.
    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        match &self.kraus {
            Some(k) => k.clone(),
            None => choi_to_kraus(self),
        }
    }

    /// `max |Tr_out J - I|`.
    pub fn trace_preservation_error(&self) -> f64 {
        let dims = plain(&[self.din(), self.dout()]);
        let reduced = tensor::partial_trace(&self.choi, &dims, &[0]).expect("consistent dims");
        tensor::max_abs_diff(&reduced, &tensor::identity(self.din()))
    }

    /// Re-checks every invariant.
    pub fn validate(&self) -> Result<()> {
        let checked = Self::from_choi(self.choi.clone(), self.in_dims.clone(), self.out_dims.clone())?;
        if let Some(k) = &self.kraus {
            let dev = kraus_completeness(k, self.din());
            if dev > tol::CPTP {
                return Err(Error::NotTracePreserving(dev));
            }
            let dev = tensor::max_abs_diff(&choi_from_kraus_unchecked(k, self.din(), self.dout()), &checked.choi);
            if dev > tol::CPTP {
                return Err(Error::KrausChoiMismatch(dev));
            }
        }
        Ok(())
    }

    /// Linear action on an arbitrary operator via the Choi matrix:
    /// `N(X)[a, b] = sum_ij X[i, j] J[(i, a), (j, b)]`.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (din, dout) = (self.din(), self.dout());
        if x.shape() != (din, din) {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, channel input dimension is {din}",
                x.nrows(),
                x.ncols()
            )));
        }
        let mut out = ComplexMatrix::zeros(dout, dout);
        for i in 0..din {
            for j in 0..din {
                let xij = x[(i, j)];
                if xij.norm_sqr() == 0.0 {
                    continue;
                }
                for a in 0..dout {
                    for b in 0..dout {
                        out[(a, b)] += xij * self.choi[(i * dout + a, j * dout + b)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// `(N ⊗ id)(X)` for an operator on `(in ⊗ env)`, returning an operator on
    /// `(out ⊗ env)`.
    pub fn apply_extended(&self, x: &ComplexMatrix, d_env: usize) -> Result<ComplexMatrix> {
        let (din, dout) = (self.din(), self.dout());
        if x.shape() != (din * d_env, din * d_env) {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, expected {}",
                x.nrows(),
                x.ncols(),
                din * d_env
            )));
        }
        let mut out = ComplexMatrix::zeros(dout * d_env, dout * d_env);
        for i in 0..din {
            for j in 0..din {
                for e in 0..d_env {
                    for f in 0..d_env {
                        let xv = x[(i * d_env + e, j * d_env + f)];
                        if xv.norm_sqr() == 0.0 {
                            continue;
                        }
                        for a in 0..dout {
                            for b in 0..dout {
                                out[(a * d_env + e, b * d_env + f)] += xv * self.choi[(i * dout + a, j * dout + b)];
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Output state through Choi contraction.
    pub fn apply(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_operator(state.matrix())?;
        Ok(DensityMatrix::from_trusted(out, self.out_dims.clone()))
    }

    /// Output state through the Kraus sum `sum_k K rho K†`.
    pub fn apply_kraus(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        if state.dim() != self.din() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} vs channel input dimension {}",
                state.dim(),
                self.din()
            )));
        }
        let out = self
            .kraus_operators()
            .iter()
            .fold(ComplexMatrix::zeros(self.dout(), self.dout()), |acc, k| {
                acc + k * state.matrix() * k.adjoint()
            });
        Ok(DensityMatrix::from_trusted(out, self.out_dims.clone()))
    }

    /// Dimensions `[A0, B0, A1, B1]` of a bipartite channel.
    pub fn bipartite_dims(&self) -> Result<[usize; 4]> {
        if self.in_dims.len() != 2 || self.out_dims.len() != 2 {
            return Err(Error::MissingBipartiteLabels(format!(
                "channel has {} input and {} output factors, expected 2 and 2",
                self.in_dims.len(),
                self.out_dims.len()
            )));
        }
        let (i, o) = (self.in_dims.dims(), self.out_dims.dims());
        Ok([i[0], i[1], o[0], o[1]])
    }

    /// `(a_to_b, b_to_a)`: whether Bob's output marginal depends on Alice's
    /// input, and conversely.
    pub fn signalling(&self) -> Result<(bool, bool)> {
        let [a0, b0, a1, b1] = self.bipartite_dims()?;
        let full = plain(&[a0, b0, a1, b1]);

        let bob = tensor::partial_trace(&self.choi, &full, &[0, 1, 3])?;
        let bob_dims = plain(&[a0, b0, b1]);
        let bob_only = tensor::partial_trace(&bob, &bob_dims, &[1, 2])?;
        let expect = tensor::tensor(&tensor::identity(a0), &bob_only).unscale(a0 as f64);
        let a_to_b = tensor::max_abs_diff(&bob, &expect) > tol::SIGNALLING;

        let alice = tensor::partial_trace(&self.choi, &full, &[0, 1, 2])?;
        let alice_dims = plain(&[a0, b0, a1]);
        let alice_only = tensor::partial_trace(&alice, &alice_dims, &[0, 2])?;
        let lifted = tensor::tensor(&tensor::identity(b0), &alice_only).unscale(b0 as f64);
        let (expect, _) = tensor::permute_subsystems(&lifted, &plain(&[b0, a0, a1]), &[1, 0, 2])?;
        let b_to_a = tensor::max_abs_diff(&alice, &expect) > tol::SIGNALLING;

        Ok((a_to_b, b_to_a))
    }

    /// Largest off-diagonal Choi entry; zero for classical channels.
    pub fn off_diagonal_weight(&self) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.choi.nrows() {
            for c in 0..self.choi.ncols() {
                if r != c {
                    m = m.max(self.choi[(r, c)].norm());
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit() -> DimFactorization {
        DimFactorization::single(2)
    }

    #[test]
    fn identity_choi_is_twice_phi_plus() {
        let id = QuantumChannel::identity(qubit());
        let expect = DensityMatrix::phi_plus().matrix().scale(2.0);
        assert!(tensor::max_abs_diff(id.choi(), &expect) < 1e-15);
        assert!((tensor::trace(id.choi()).re - 2.0).abs() < 1e-15);
        let kraus = choi_to_kraus(&id.clone().without_kraus());
        assert_eq!(kraus.len(), 1);
        let k = &kraus[0];
        let phase = k[(0, 0)] / k[(0, 0)].norm();
        assert!(tensor::max_abs_diff(&k.map(|x| x / phase), &tensor::identity(2)) < 1e-12);
    }

    #[test]
    fn depolarizing_full_noise() {
        let c = QuantumChannel::depolarizing(1.0).unwrap();
        assert!(tensor::max_abs_diff(c.choi(), &tensor::identity(4).scale(0.5)) < 1e-15);
        let zero = DensityMatrix::pure(&tensor::ket(2, 0), qubit()).unwrap();
        let out = c.apply(&zero).unwrap();
        assert!(tensor::max_abs_diff(out.matrix(), &tensor::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn replacement_channel_outputs_fixed_state() {
        let sigma = DensityMatrix::pure(&tensor::ket(2, 1), qubit()).unwrap();
        let c = QuantumChannel::replacement(qubit(), &sigma);
        assert!(tensor::max_abs_diff(c.choi(), &tensor::tensor(&tensor::identity(2), sigma.matrix())) < 1e-15);
        let kraus = choi_to_kraus(&c);
        assert_eq!(kraus.len(), 2);
        for i in 0..2 {
            for j in 0..2 {
                let x = tensor::matrix_unit(2, i, j);
                let y = kraus.iter().fold(ComplexMatrix::zeros(2, 2), |acc, k| acc + k * &x * k.adjoint());
                let expect = sigma.matrix().scale(if i == j { 1.0 } else { 0.0 });
                assert!(tensor::max_abs_diff(&y, &expect) < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_trace_decreasing_filter() {
        let k = tensor::diag(&[1.0, 0.5]);
        assert!(matches!(
            kraus_to_choi(vec![k.clone()], qubit(), qubit()),
            Err(Error::NotTracePreserving(_))
        ));
        let j = choi_from_kraus_unchecked(&[k], 2, 2);
        assert!(matches!(
            QuantumChannel::from_choi(j, qubit(), qubit()),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn signalling_examples() {
        let (i, o) = bipartite_io(2, 2, 2, 2);
        let prod = QuantumChannel::depolarizing(0.3)
            .unwrap()
            .product(&QuantumChannel::identity(qubit()))
            .relabel(i, o)
            .unwrap();
        assert_eq!(prod.signalling().unwrap(), (false, false));
        assert_eq!(QuantumChannel::swap(2).signalling().unwrap(), (true, true));
        assert_eq!(QuantumChannel::identity_a_to_b(2).signalling().unwrap(), (true, false));
        assert!(matches!(
            QuantumChannel::identity(qubit()).signalling(),
            Err(Error::MissingBipartiteLabels(_))
        ));
    }

    #[test]
    fn extended_application_matches_product_with_identity() {
        let c = crate::quantum::random_channel(&[2], &[3], 4).unwrap();
        let x = crate::quantum::random_state(&[2, 2], 5).unwrap();
        let ext = c.apply_extended(x.matrix(), 2).unwrap();
        let prod = c.product(&QuantumChannel::identity(qubit()));
        assert!(tensor::max_abs_diff(&ext, &prod.apply_operator(x.matrix()).unwrap()) < 1e-12);
    }

    #[test]
    fn measurement_box_reproduces_born_rule() {
        let povms = vec![Povm::computational(2), Povm::qubit_direction([1.0, 0.0, 0.0]).unwrap()];
        let m = QuantumChannel::measure_with_settings(&povms).unwrap();
        assert!(m.validate().is_ok());
        let rho = crate::quantum::random_state(&[2], 8).unwrap();
        for (x, p) in povms.iter().enumerate() {
            let input = tensor::tensor(&tensor::matrix_unit(2, x, x), rho.matrix());
            let out = m.apply_operator(&input).unwrap();
            let probs = p.probabilities(&rho).unwrap();
            for o in 0..2 {
                assert!((out[(o, o)].re - probs[o]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip_both_representations() {
        let c = QuantumChannel::depolarizing(0.2).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"kraus\""));
        let back: QuantumChannel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let c = c.without_kraus();
        let text = serde_json::to_string(&c).unwrap();
        let back: QuantumChannel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
