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
//! Nonlocality measures.

mod barrier;
mod divergence;
mod dpi;
mod minext;
mod relent;

pub use divergence::{channel_divergence, kl_divergence};
pub use dpi::{dpi_monotonicity_check, MonotonicityReport};
pub use minext::{minimal_extension_report, minimal_extension_state, ExtensionConfig, ExtensionReport, FilterPair};
pub use relent::{rel_entropy_nonlocality, GapCertificate, MeasureResult, SolverConfig};
