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

//! Global numerical tolerances.

/// Hermiticity: `max |m - m†|` entrywise.
pub const HERMITIAN: f64 = 1e-10;
/// Eigenvalue nonnegativity for PSD checks.
pub const PSD: f64 = 1e-9;
/// Unit trace of density matrices and normalization of distributions.
pub const TRACE: f64 = 1e-9;
/// POVM completeness, entrywise.
pub const POVM: f64 = 1e-9;
/// Trace preservation of Choi matrices and Kraus sets.
pub const CPTP: f64 = 1e-8;
/// Signalling detection on reduced Choi blocks.
pub const SIGNALLING: f64 = 1e-8;
/// Negative probabilities above this magnitude are hard errors.
pub const CLAMP: f64 = 1e-12;
/// Simplex feasibility.
pub const LP_FEASIBILITY: f64 = 1e-8;
/// L∞ reconstruction of a behavior from local vertex weights.
pub const LOCAL_RECONSTRUCTION: f64 = 1e-7;
/// Minimum violation of a returned separating Bell functional.
pub const CERTIFICATE_MARGIN: f64 = 1e-8;
/// Floor applied to vertex weights inside the divergence solvers.
pub const WEIGHT_FLOOR: f64 = 1e-12;
