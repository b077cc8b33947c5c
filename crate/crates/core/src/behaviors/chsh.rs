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
use std::f64::consts::FRAC_PI_4;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use super::born::behavior_from_state;
use super::table::Behavior;
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, Povm};
use crate::tensor;

/// Largest `|S|` over the eight relabelings of
/// `S = E00 + E01 + E10 - E11`, i.e. `max_j |sum E - 2 E_j|`.
pub fn chsh_value(behavior: &Behavior) -> Result<f64> {
    if !behavior.scenario().is_chsh() {
        return Err(Error::WrongScenario("CHSH needs binary inputs and outputs".into()));
    }
    let e = [
        behavior.correlator(0, 0),
        behavior.correlator(0, 1),
        behavior.correlator(1, 0),
        behavior.correlator(1, 1),
    ];
    let sum: f64 = e.iter().sum();
    Ok(e.iter().map(|ej| (sum - 2.0 * ej).abs()).fold(0.0, f64::max))
}

/// Correlation matrix `T_ij = Tr[rho sigma_i ⊗ sigma_j]` of a two-qubit state.
pub fn correlation_matrix(state: &DensityMatrix) -> Result<Matrix3<f64>> {
    if state.dims().dims() != [2, 2] {
        return Err(Error::DimensionMismatch(format!(
            "expected a two-qubit state, got factors {:?}",
            state.dims().dims()
        )));
    }
    let s = tensor::paulis();
    Ok(Matrix3::from_fn(|i, j| {
        tensor::trace_of_product(state.matrix(), &tensor::tensor(&s[i], &s[j])).re
    }))
}

/// Eigenpairs of `TᵀT`, largest first.
fn sorted_eigen(t: &Matrix3<f64>) -> ([f64; 3], [Vector3<f64>; 3]) {
    let eig = SymmetricEigen::new(t.transpose() * t);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    (
        idx.map(|k| eig.eigenvalues[k].max(0.0)),
        idx.map(|k| eig.eigenvectors.column(k).into_owned()),
    )
}

/// Maximal CHSH value over projective measurements, `2 sqrt(t1 + t2)`.
pub fn horodecki_chsh(state: &DensityMatrix) -> Result<f64> {
    let t = correlation_matrix(state)?;
    let (vals, _) = sorted_eigen(&t);
    Ok(2.0 * (vals[0] + vals[1]).sqrt())
}

fn direction_povm(v: &Vector3<f64>, fallback: [f64; 3]) -> Povm {
    let n = v.norm();
    let dir = if n > 1e-12 { [v[0] / n, v[1] / n, v[2] / n] } else { fallback };
    Povm::qubit_direction(dir).expect("unit direction")
}

/// Projective settings `([A0, A1], [B0, B1])` attaining the Horodecki value
/// with `S = E00 + E01 + E10 - E11`.
pub fn horodecki_measurements(state: &DensityMatrix) -> Result<(Vec<Povm>, Vec<Povm>)> {
    let t = correlation_matrix(state)?;
    let (vals, vecs) = sorted_eigen(&t);
    let (c, c_perp) = (&vecs[0], &vecs[1]);
    let (n1, n2) = (vals[0].sqrt(), vals[1].sqrt());
    let phi = if n1 + n2 > 0.0 { n2.atan2(n1) } else { 0.0 };
    let b0 = c * phi.cos() + c_perp * phi.sin();
    let b1 = c * phi.cos() - c_perp * phi.sin();
    let a0 = t * c;
    let a1 = t * c_perp;
    let alice = vec![direction_povm(&a0, [0.0, 0.0, 1.0]), direction_povm(&a1, [1.0, 0.0, 0.0])];
    let bob = vec![direction_povm(&b0, [0.0, 0.0, 1.0]), direction_povm(&b1, [1.0, 0.0, 0.0])];
    Ok((alice, bob))
}

fn xz_povm(theta: f64) -> Povm {
    Povm::qubit_direction([theta.sin(), 0.0, theta.cos()]).expect("unit direction")
}

/// Alice measures at angles `0, π/2` and Bob at `π/4, -π/4` in the X-Z plane.
pub fn optimal_chsh_measurements() -> (Vec<Povm>, Vec<Povm>) {
    (
        vec![xz_povm(0.0), xz_povm(2.0 * FRAC_PI_4)],
        vec![xz_povm(FRAC_PI_4), xz_povm(-FRAC_PI_4)],
    )
}

/// `phi+` measured with [`optimal_chsh_measurements`].
pub fn tsirelson_behavior() -> Behavior {
    let (a, b) = optimal_chsh_measurements();
    behavior_from_state(&DensityMatrix::phi_plus(), &a, &b).expect("consistent dimensions")
}
