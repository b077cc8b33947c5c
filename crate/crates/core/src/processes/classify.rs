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

//! Freeness and resource classification of processes.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::process::{check_realizable, Process, ProcessChannel};
use crate::behaviors::is_local;
use crate::witness::{choi_separability_with, Verdict};

/// Three-valued freeness verdict, serialized as `true`, `false` or
/// `"unknown"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Freeness {
    Free,
    NotFree,
    Unknown,
}

impl Serialize for Freeness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Freeness::Free => s.serialize_bool(true),
            Freeness::NotFree => s.serialize_bool(false),
            Freeness::Unknown => s.serialize_str("unknown"),
        }
    }
}

impl<'de> Deserialize<'de> for Freeness {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Bool(true) => Ok(Freeness::Free),
            serde_json::Value::Bool(false) => Ok(Freeness::NotFree),
            serde_json::Value::String(s) if s == "unknown" => Ok(Freeness::Unknown),
            other => Err(serde::de::Error::custom(format!("invalid freeness {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    None,
    Entanglement,
    BellNonlocality,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessClassification {
    pub instantaneous: bool,
    pub free: Freeness,
    pub resource_kind: ResourceKind,
    pub realizable: bool,
    pub reason: String,
}

fn verdict(p: &Process, free: Freeness, resource_kind: ResourceKind, reason: impl Into<String>) -> ProcessClassification {
    ProcessClassification {
        instantaneous: p.is_instantaneous(),
        free,
        resource_kind,
        realizable: check_realizable(p),
        reason: reason.into(),
    }
}

/// Free objects are instantaneous local behaviors, delayed classical
/// channels, and quantum channels with a certified local decomposition.
pub fn classify(p: &Process) -> ProcessClassification {
    if let Some(behavior) = p.channel().as_behavior() {
        if !p.is_instantaneous() {
            return verdict(p, Freeness::Free, ResourceKind::None, "classical channel with positive delay");
        }
        return match is_local(&behavior) {
            Ok(r) if r.local => verdict(p, Freeness::Free, ResourceKind::None, "local hidden-variable model found"),
            Ok(_) => verdict(
                p,
                Freeness::NotFree,
                ResourceKind::BellNonlocality,
                "instantaneous behavior outside the local polytope",
            ),
            Err(e) => verdict(p, Freeness::Unknown, ResourceKind::Unknown, format!("locality test failed: {e}")),
        };
    }

    let ProcessChannel::Quantum(channel) = p.channel() else {
        unreachable!("classical channels are handled above")
    };
    if p.decomposition().is_some() {
        return verdict(p, Freeness::Free, ResourceKind::None, "verified mixture of product channels");
    }
    if p.is_instantaneous() {
        if let Ok((ab, ba)) = channel.signalling() {
            if ab || ba {
                return verdict(p, Freeness::NotFree, ResourceKind::Unknown, "instantaneous channel signals");
            }
        }
    }
    let sep = match choi_separability_with(channel, None) {
        Ok(s) => s,
        Err(e) => return verdict(p, Freeness::Unknown, ResourceKind::Unknown, format!("separability test failed: {e}")),
    };
    match sep.verdict {
        Verdict::Entangled => {
            verdict(p, Freeness::NotFree, ResourceKind::Entanglement, "Choi matrix has a negative partial transpose")
        }
        Verdict::Separable if p.is_instantaneous() && channel.din() == 1 => {
            verdict(p, Freeness::Free, ResourceKind::None, "preparation of a separable state")
        }
        Verdict::Separable => verdict(
            p,
            Freeness::Unknown,
            ResourceKind::Unknown,
            "separable Choi matrix without a local decomposition",
        ),
        Verdict::Inconclusive => {
            verdict(p, Freeness::Unknown, ResourceKind::Unknown, "positive partial transpose beyond exact dimensions")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::{tsirelson_behavior, Behavior, Scenario};
    use crate::processes::Delay;
    use crate::quantum::{bipartite_io, DensityMatrix, QuantumChannel};

    #[test]
    fn classical_examples() {
        let u = classify(&Process::classical(Behavior::uniform(Scenario::chsh()), Delay::INSTANT));
        assert_eq!((u.free, u.resource_kind), (Freeness::Free, ResourceKind::None));
        let pr = classify(&Process::classical(Behavior::pr_box(), Delay::INSTANT));
        assert_eq!((pr.free, pr.resource_kind), (Freeness::NotFree, ResourceKind::BellNonlocality));
        let late = classify(&Process::classical(Behavior::pr_box(), Delay::INFINITE));
        assert_eq!(late.free, Freeness::Free);
        assert!(!late.instantaneous);
        let t = classify(&Process::classical(tsirelson_behavior(), Delay::INSTANT));
        assert_eq!(t.resource_kind, ResourceKind::BellNonlocality);
    }

    #[test]
    fn quantum_examples() {
        let (i, o) = bipartite_io(1, 1, 2, 2);
        let ent = QuantumChannel::replacement(i.clone(), &DensityMatrix::phi_plus()).relabel(i.clone(), o.clone()).unwrap();
        let c = classify(&Process::quantum(ent, Delay::INSTANT).unwrap());
        assert_eq!((c.free, c.resource_kind), (Freeness::NotFree, ResourceKind::Entanglement));
        let sep = QuantumChannel::replacement(i.clone(), &DensityMatrix::werner(0.2).unwrap()).relabel(i, o).unwrap();
        let c = classify(&Process::quantum(sep, Delay::INSTANT).unwrap());
        assert_eq!(c.free, Freeness::Free);
        let swap = classify(&Process::quantum(QuantumChannel::swap(2), Delay::INSTANT).unwrap());
        assert_eq!(swap.free, Freeness::NotFree);
        assert!(!swap.realizable);
    }

    #[test]
    fn freeness_json() {
        assert_eq!(serde_json::to_string(&Freeness::Unknown).unwrap(), "\"unknown\"");
        assert_eq!(serde_json::from_str::<Freeness>("true").unwrap(), Freeness::Free);
    }
}
