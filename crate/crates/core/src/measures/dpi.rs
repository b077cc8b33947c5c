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
//! Monotonicity of the nonlocality measure under free classical
//! superprocesses.

use serde::{Deserialize, Serialize};

use super::relent::{rel_entropy_nonlocality, MeasureResult, SolverConfig};
use crate::behaviors::Behavior;
use crate::error::{Error, Result};
use crate::processes::{apply_superprocess, Delay, Process, Superprocess, SuperprocessForm};

/// Floor on the allowed excess, covering float noise when both gaps vanish.
const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub holds: bool,
    pub before: MeasureResult,
    pub after: MeasureResult,
    /// Transformed behavior.
    pub image: Behavior,
    /// Allowed excess of `after` over `before`: twice the larger solver gap.
    pub tolerance: f64,
}

/// Applies a shared-randomness superprocess to `b` and compares the measure
/// before and after.
pub fn dpi_monotonicity_check(b: &Behavior, sp: &Superprocess, config: &SolverConfig) -> Result<MonotonicityReport> {
    if sp.form() != SuperprocessForm::Losr {
        return Err(Error::FormViolation(format!(
            "monotonicity is checked for shared-randomness superprocesses, got {:?}",
            sp.form()
        )));
    }
    let out = apply_superprocess(sp, &Process::classical(b.clone(), Delay::INSTANT))?;
    let image = out
        .channel()
        .as_behavior()
        .ok_or(Error::OutputNotClassical(out.channel().to_quantum().off_diagonal_weight()))?;
    let before = rel_entropy_nonlocality(b, config)?;
    let after = rel_entropy_nonlocality(&image, config)?;
    let tolerance = (2.0 * before.certificate.gap.max(after.certificate.gap)).max(SLACK);
    let holds = after.value <= before.value + tolerance;
    Ok(MonotonicityReport { holds, before, after, image, tolerance })
}
