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

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure names the invariant it violates.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("matrix is not Hermitian (max |m - m†| = {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("density matrix trace is {0}, expected 1")]
    TraceNotOne(f64),

    #[error("POVM effects do not sum to the identity (max deviation {0:.3e})")]
    PovmIncomplete(f64),

    #[error("map is not trace preserving (max deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("Kraus set and Choi matrix disagree (max deviation {0:.3e})")]
    KrausChoiMismatch(f64),

    #[error("channel needs bipartite input and output labels, got {0}")]
    MissingBipartiteLabels(String),

    #[error("scenario too large: {0} deterministic vertices exceed the limit")]
    ScenarioTooLarge(u128),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("wrong scenario: {0}")]
    WrongScenario(String),

    #[error("probability {value:.3e} at {at} is negative beyond clamping tolerance")]
    NegativeProbability { value: f64, at: String },

    #[error("distribution is not normalized: {0}")]
    NotNormalized(String),

    #[error("linear program failed: {0}")]
    LpFailure(String),

    #[error("state is not pure (purity {0})")]
    NotPure(f64),

    #[error("input states are not orthonormal (max overlap {0:.3e})")]
    NotOrthonormal(f64),

    #[error("channel output register is not classical (off-diagonal weight {0:.3e})")]
    OutputNotClassical(f64),

    #[error("witness decomposition is degenerate: {0}")]
    DegenerateWitness(String),

    #[error("inconsistent protocol branches: {0}")]
    InconsistentBranches(String),

    #[error("superprocess form violation: {0}")]
    FormViolation(String),

    #[error("invalid delay: {0}")]
    InvalidDelay(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
