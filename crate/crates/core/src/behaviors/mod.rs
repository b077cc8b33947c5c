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
//! Bell scenarios, behaviors, the local polytope and behavior generation.

mod born;
mod chsh;
mod local;
pub mod lp;
mod prelocc;
mod table;

pub use born::behavior_from_state;
pub use chsh::{
    chsh_value, correlation_matrix, horodecki_chsh, horodecki_measurements, optimal_chsh_measurements,
    tsirelson_behavior,
};
pub use local::{is_local, LocalityResult};
pub use prelocc::{
    behavior_from_prelocc, demo_hidden_nonlocality, hidden_nonlocality_protocol, hidden_nonlocality_state, Branch,
    HiddenNonlocalityReport, Instrument, Party, PreLoccProtocol, ProtocolNode, SettingsByTranscript,
};
pub(crate) use table::strategies as table_strategies;
pub use table::{enumerate_local_vertices, Behavior, BellFunctional, Scenario, VERTEX_LIMIT};
