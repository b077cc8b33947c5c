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

//! Dense complex linear algebra and multi-index tensor utilities.
//!
//! # Index convention
//!
//! Every composite space in this crate is ordered subsystem-major and
//! lexicographically: for subsystems with dimensions `[d0, d1, ..., dn]` the
//! basis vector `|i0 i1 ... in>` sits at flat index
//! `((i0 * d1 + i1) * d2 + i2) ... + in`. This is the order produced by
//! [`tensor`] (`a ⊗ b` is `a`-major), and partial traces, partial transposes
//! and permutations all follow it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// Dense complex matrix, row-major in logical order.
pub type ComplexMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type ComplexVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Ordered subsystem dimensions with labels, annotating a composite space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimFactorization {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl DimFactorization {
    /// Unlabelled factorization; subsystems are named `S0`, `S1`, ...
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        let labels = (0..dims.len()).map(|k| format!("S{k}")).collect();
        Self::labelled(dims, labels)
    }

    pub fn labelled(dims: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDims("factorization has no subsystems".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidDims(format!("subsystem dimension {d} < 1")));
        }
        if labels.len() != dims.len() {
            return Err(Error::InvalidDims(format!(
                "{} labels for {} subsystems",
                labels.len(),
                dims.len()
            )));
        }
        Ok(Self { dims, labels })
    }

    /// A single subsystem of dimension `d`.
    pub fn single(d: usize) -> Self {
        Self::new(vec![d.max(1)]).expect("dimension is at least one")
    }

    /// Two-party factorization with the given labels.
    pub fn bipartite(da: usize, db: usize, la: &str, lb: &str) -> Self {
        Self::labelled(vec![da.max(1), db.max(1)], vec![la.into(), lb.into()])
            .expect("dimensions are at least one")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Product of all subsystem dimensions.
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Concatenation `self ⊗ other`.
    pub fn join(&self, other: &DimFactorization) -> DimFactorization {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        DimFactorization { dims, labels }
    }

    /// Sub-factorization keeping the listed subsystems in ascending order.
    pub fn select(&self, keep: &[usize]) -> DimFactorization {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return DimFactorization::labelled(vec![1], vec!["1".into()]).unwrap();
        }
        DimFactorization {
            dims: keep.iter().map(|&k| self.dims[k]).collect(),
            labels: keep.iter().map(|&k| self.labels[k].clone()).collect(),
        }
    }

    pub(crate) fn check_matrix(&self, m: &ComplexMatrix) -> Result<()> {
        let d = self.total();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but factorization {:?} has total dimension {d}",
                m.nrows(),
                m.ncols(),
                self.dims
            )));
        }
        Ok(())
    }

    pub(crate) fn check_subsystems(&self, subs: &[usize]) -> Result<()> {
        match subs.iter().find(|&&k| k >= self.dims.len()) {
            Some(k) => Err(Error::DimensionMismatch(format!(
                "subsystem {k} out of range for {} factors",
                self.dims.len()
            ))),
            None => Ok(()),
        }
    }
}

/// Mixed-radix digits of `idx` under `dims`, most significant first.
pub(crate) fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

pub(crate) fn flat(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Kronecker product `a ⊗ b`, `a`-major.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Traces out every subsystem not listed in `keep`. The result is ordered by
/// the kept subsystems in ascending order.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: &DimFactorization,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    dims.check_matrix(m)?;
    dims.check_subsystems(keep)?;
    let d = dims.dims();
    let n = d.len();
    let mut kept: Vec<bool> = vec![false; n];
    for &k in keep {
        kept[k] = true;
    }
    let keep_dims: Vec<usize> = (0..n).filter(|&k| kept[k]).map(|k| d[k]).collect();
    let trace_dims: Vec<usize> = (0..n).filter(|&k| !kept[k]).map(|k| d[k]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = trace_dims.iter().product();

    // Flat index of (kept digits, traced digits) in the original order.
    let mut kd = vec![0; keep_dims.len()];
    let mut td = vec![0; trace_dims.len()];
    let mut full = vec![0; n];
    let mut compose = |ki: usize, ti: usize| -> usize {
        digits(ki, &keep_dims, &mut kd);
        digits(ti, &trace_dims, &mut td);
        let (mut a, mut b) = (0, 0);
        for k in 0..n {
            if kept[k] {
                full[k] = kd[a];
                a += 1;
            } else {
                full[k] = td[b];
                b += 1;
            }
        }
        flat(&full, d)
    };
    let mut index = vec![0usize; dk * dt];
    for ki in 0..dk {
        for ti in 0..dt {
            index[ki * dt + ti] = compose(ki, ti);
        }
    }

    let mut out = ComplexMatrix::zeros(dk, dk);
    for r in 0..dk {
        for c in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(index[r * dt + t], index[c * dt + t])];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Transposes the indices of the listed subsystems.
pub fn partial_transpose(
    m: &ComplexMatrix,
    dims: &DimFactorization,
    subsystems: &[usize],
) -> Result<ComplexMatrix> {
    dims.check_matrix(m)?;
    dims.check_subsystems(subsystems)?;
    let d = dims.dims();
    let total = dims.total();
    let mut rd = vec![0; d.len()];
    let mut cd = vec![0; d.len()];
    let mut out = ComplexMatrix::zeros(total, total);
    for r in 0..total {
        digits(r, d, &mut rd);
        for c in 0..total {
            digits(c, d, &mut cd);
            let (mut r2, mut c2) = (rd.clone(), cd.clone());
            for &k in subsystems {
                r2[k] = cd[k];
                c2[k] = rd[k];
            }
            out[(flat(&r2, d), flat(&c2, d))] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Unitary `P` reordering subsystems so that new factor `k` is old factor
/// `perm[k]`: `P |i_0 ... i_n> = |i_perm[0] ... i_perm[n]>`.
pub fn subsystem_permutation(dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    let n = dims.len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidDims(format!(
            "{perm:?} is not a permutation of {n} subsystems"
        )));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let total: usize = dims.iter().product();
    let mut p = ComplexMatrix::zeros(total, total);
    let mut old = vec![0; n];
    let mut new = vec![0; n];
    for i in 0..total {
        digits(i, dims, &mut old);
        for k in 0..n {
            new[k] = old[perm[k]];
        }
        p[(flat(&new, &new_dims), i)] = ONE;
    }
    Ok(p)
}

/// Reorders the subsystems of an operator, returning the permuted operator
/// and its new factorization.
pub fn permute_subsystems(
    m: &ComplexMatrix,
    dims: &DimFactorization,
    perm: &[usize],
) -> Result<(ComplexMatrix, DimFactorization)> {
    dims.check_matrix(m)?;
    let d = dims.dims();
    let n = d.len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidDims(format!(
            "{perm:?} is not a permutation of {n} subsystems"
        )));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&k| d[k]).collect();
    let total = dims.total();
    let mut old = vec![0; n];
    let mut new = vec![0; n];
    let target: Vec<usize> = (0..total)
        .map(|i| {
            digits(i, d, &mut old);
            for k in 0..n {
                new[k] = old[perm[k]];
            }
            flat(&new, &new_dims)
        })
        .collect();
    let mut out = ComplexMatrix::zeros(total, total);
    for c in 0..total {
        for r in 0..total {
            out[(target[r], target[c])] = m[(r, c)];
        }
    }
    let new_dims = DimFactorization {
        dims: new_dims,
        labels: perm.iter().map(|&k| dims.labels()[k].clone()).collect(),
    };
    Ok((out, new_dims))
}

/// Largest entrywise deviation `max |m - m†|`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn is_hermitian(m: &ComplexMatrix) -> bool {
    hermitian_deviation(m) <= tol::HERMITIAN
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending, with the
/// matching eigenvectors as columns.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let dev = hermitian_deviation(m);
    if dev > tol::HERMITIAN {
        return Err(Error::NotHermitian(dev));
    }
    Ok(eig_hermitian_unchecked(m))
}

/// Same as [`eig_hermitian`] but symmetrizes instead of validating.
pub(crate) fn eig_hermitian_unchecked(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?.0.first().copied().unwrap_or(0.0))
}

/// Hermitian and `λ_min >= -ε_psd`.
pub fn is_psd(m: &ComplexMatrix) -> bool {
    is_hermitian(m) && eig_hermitian_unchecked(m).0[0] >= -tol::PSD
}

/// `f(m)` for Hermitian `m`, applied to the spectrum.
pub(crate) fn hermitian_fn(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (vals, vecs) = eig_hermitian_unchecked(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (c, v) in vals.iter().enumerate() {
        let s = Complex64::new(f(*v), 0.0);
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    &scaled * vecs.adjoint()
}

/// Inverse square root of a positive definite matrix; eigenvalues below
/// `floor` are treated as `floor`.
pub(crate) fn inv_sqrt_psd(m: &ComplexMatrix, floor: f64) -> ComplexMatrix {
    hermitian_fn(m, |x| 1.0 / x.max(floor).sqrt())
}

pub(crate) fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().copied().sum()
}

/// `Tr[a b]` without forming the product.
pub(crate) fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Largest entrywise absolute difference.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// `|v><v|`.
pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// Computational basis vector `|i>` in dimension `d`.
pub fn ket(d: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d);
    v[i] = ONE;
    v
}

/// Matrix unit `|i><j|` in dimension `d`.
pub(crate) fn matrix_unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |r, c| if r == c { Complex64::new(values[r], 0.0) } else { ZERO })
}

/// Builds a matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |r, c| Complex64::new(data[r * cols + c], 0.0))
}

/// The Pauli matrices `[X, Y, Z]`.
pub fn paulis() -> [ComplexMatrix; 3] {
    let i = Complex64::new(0.0, 1.0);
    [
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        ComplexMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}
