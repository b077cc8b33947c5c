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

//! Numerical toolkit for the delay-time resource theory of entanglement and
//! Bell nonlocality.
//!
//! - [`tensor`]: dense complex linear algebra and the crate-wide index convention.
//! - [`quantum`]: density matrices, POVMs and channels (Choi canonical, Kraus on demand).
//! - [`behaviors`]: Bell scenarios, the local polytope, CHSH, Born-rule and pre-LOCC behaviors.
//! - [`processes`]: channels annotated with input-output delay, superprocesses and classification.
//! - [`measures`]: relative entropy of Bell nonlocality and its minimal extension to states.
//! - [`witness`]: the CHSH witness for POVM channels, Choi separability and the witness-to-channel construction.

pub mod behaviors;
pub mod error;
pub mod json;
pub mod measures;
pub mod processes;
pub mod quantum;
pub mod tensor;
pub mod tol;
pub mod witness;

pub use error::{Error, Result};
pub use tensor::{ComplexMatrix, DimFactorization};
