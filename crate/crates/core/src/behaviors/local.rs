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
use serde::{Deserialize, Serialize};

use super::lp::{self, LpOutcome};
use super::table::{strategies, Behavior, BellFunctional, VERTEX_LIMIT};
use crate::error::{Error, Result};
use crate::tol;

/// Outcome of the local-polytope membership test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityResult {
    pub local: bool,
    /// Weights over the deterministic vertices in enumeration order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Largest table deviation of the reconstructed mixture.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction_error: Option<f64>,
    /// Separating functional: its value on the behavior exceeds its local bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<BellFunctional>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<f64>,
}

/// Decides whether a behavior is a mixture of deterministic local strategies.
///
/// Variables are vertex weights; constraints are the table entries and
/// normalization. Infeasibility is converted into a Bell functional from the
/// phase-one dual.
pub fn is_local(behavior: &Behavior) -> Result<LocalityResult> {
    let s = *behavior.scenario();
    let count = s.vertex_count();
    if count > VERTEX_LIMIT {
        return Err(Error::ScenarioTooLarge(count));
    }
    let alices = strategies(s.nx0, s.nx1);
    let bobs = strategies(s.ny0, s.ny1);
    let n = count as usize;
    let m = s.len();

    let mut a = vec![vec![0.0; n]; m + 1];
    let mut v = 0;
    for sa in &alices {
        for sb in &bobs {
            for x0 in 0..s.nx0 {
                for y0 in 0..s.ny0 {
                    a[s.index(x0, y0, sa[x0], sb[y0])][v] = 1.0;
                }
            }
            a[m][v] = 1.0;
            v += 1;
        }
    }
    let mut b = behavior.table().to_vec();
    b.push(1.0);

    match lp::minimize(&a, &b, &vec![0.0; n], tol::LP_FEASIBILITY)? {
        LpOutcome::Optimal { x, .. } => {
            let total: f64 = x.iter().sum();
            let weights: Vec<f64> = x.iter().map(|w| w / total).collect();
            let mut err = 0.0f64;
            for (r, row) in a.iter().take(m).enumerate() {
                let rec: f64 = row.iter().zip(&weights).map(|(a, w)| a * w).sum();
                err = err.max((rec - b[r]).abs());
            }
            if err > tol::LOCAL_RECONSTRUCTION {
                return Err(Error::LpFailure(format!(
                    "feasible basis reconstructs the table only to {err:e}"
                )));
            }
            Ok(LocalityResult {
                local: true,
                weights: Some(weights),
                reconstruction_error: Some(err),
                certificate: None,
                violation: None,
            })
        }
        LpOutcome::Infeasible { farkas, residual } => {
            let scale = farkas[..m].iter().fold(0.0f64, |acc, y| acc.max(y.abs()));
            if scale == 0.0 {
                return Err(Error::LpFailure("degenerate infeasibility certificate".into()));
            }
            let coefficients: Vec<f64> = farkas[..m].iter().map(|y| y / scale).collect();
            let certificate = BellFunctional::new(s, coefficients)?;
            let violation = certificate.violation(behavior)?;
            if violation < tol::CERTIFICATE_MARGIN {
                return Err(Error::LpFailure(format!(
                    "phase-one residual {residual:e} but certificate violation only {violation:e}"
                )));
            }
            Ok(LocalityResult {
                local: false,
                weights: None,
                reconstruction_error: None,
                certificate: Some(certificate),
                violation: Some(violation),
            })
        }
        LpOutcome::Unbounded => Err(Error::LpFailure("feasibility LP reported unbounded".into())),
    }
}
