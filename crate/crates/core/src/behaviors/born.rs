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
use super::table::{Behavior, Scenario};
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, Povm};
use crate::tensor;

fn outcome_count(povms: &[Povm], party: &str) -> Result<usize> {
    let first = povms
        .first()
        .ok_or_else(|| Error::InvalidScenario(format!("{party} has no measurement settings")))?;
    if povms.iter().any(|p| p.len() != first.len() || p.dim() != first.dim()) {
        return Err(Error::InvalidScenario(format!(
            "{party}'s settings differ in outcome count or dimension"
        )));
    }
    Ok(first.len())
}

/// Born-rule behavior `p(x1, y1 | x0, y0) = Tr[rho (M^{x0}_{x1} ⊗ N^{y0}_{y1})]`,
/// renormalized per input pair.
pub fn behavior_from_state(state: &DensityMatrix, a_povms: &[Povm], b_povms: &[Povm]) -> Result<Behavior> {
    let nx1 = outcome_count(a_povms, "Alice")?;
    let ny1 = outcome_count(b_povms, "Bob")?;
    let (da, db) = (a_povms[0].dim(), b_povms[0].dim());
    if state.dims().len() != 2 || state.dims().dims() != [da, db] {
        return Err(Error::DimensionMismatch(format!(
            "state factors {:?} do not match measurement dimensions [{da}, {db}]",
            state.dims().dims()
        )));
    }
    let s = Scenario::new(a_povms.len(), b_povms.len(), nx1, ny1)?;
    let rho = state.matrix();
    let mut table = vec![0.0; s.len()];
    for (x0, pa) in a_povms.iter().enumerate() {
        for (y0, pb) in b_povms.iter().enumerate() {
            for (x1, m) in pa.effects().iter().enumerate() {
                for (y1, n) in pb.effects().iter().enumerate() {
                    let effect = tensor::tensor(m, n);
                    table[s.index(x0, y0, x1, y1)] = tensor::trace_of_product(rho, &effect).re;
                }
            }
        }
    }
    Behavior::normalized(s, table)
}
