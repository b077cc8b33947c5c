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

//! Processes with delays, superprocesses acting on them, and their
//! classification as free objects or resources.

mod classify;
mod process;
pub mod random;
mod superprocess;

pub use classify::{classify, Freeness, ProcessClassification, ResourceKind};
pub use process::{check_realizable, Delay, LosrComponent, LosrDecomposition, Process, ProcessChannel};
pub use superprocess::{
    apply_superprocess, form_allowed, lose_construct, lose_reduction, CombComponent, GeneralStage, LocalComb,
    LoseReduction, PreLoccStage, Superprocess, SuperprocessForm, TranscriptPost,
};
