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

//! Witnesses separating local channels from entangled or nonlocal ones.

mod chsh;
mod construction;
mod separability;

pub use chsh::{
    build_chsh_povm_witness, evaluate_witness, losr_min_witness_value, qc_channel, witness_expectation, Normalization,
    WitnessOperator,
};
pub use construction::{flip_witness, witness_to_channel_construction, ConstructionReport};
pub use separability::{choi_separability, choi_separability_with, Evidence, SeparabilityVerdict, Verdict};
