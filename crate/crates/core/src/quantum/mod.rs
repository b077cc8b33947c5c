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
//! States, measurements and channels.

mod channel;
mod povm;
pub mod random;
mod state;

pub use channel::{apply_channel, bipartite_io, choi_to_kraus, is_signalling, kraus_to_choi, QuantumChannel};
pub use povm::Povm;
pub use random::{random_channel, random_povm, random_state};
pub use state::DensityMatrix;
