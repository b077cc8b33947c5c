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

//! Channels annotated with an input-output delay and a fixed spatial
//! separation between the two laboratories.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::behaviors::Behavior;
use crate::error::{Error, Result};
use crate::quantum::{bipartite_io, QuantumChannel};
use crate::tensor::{self, ComplexMatrix};
use crate::tol;

/// Nonnegative delay in abstract time units; may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Delay(f64);

impl Delay {
    pub const INSTANT: Delay = Delay(0.0);
    pub const INFINITE: Delay = Delay(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidDelay(format!("{value} is not a nonnegative time")));
        }
        Ok(Delay(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_instantaneous(self) -> bool {
        self.0 == 0.0
    }
}

impl std::ops::Add for Delay {
    type Output = Delay;

    fn add(self, rhs: Delay) -> Delay {
        Delay(self.0 + rhs.0)
    }
}

impl fmt::Display for Delay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Delay {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Delay {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct DelayVisitor;

        impl Visitor<'_> for DelayVisitor {
            type Value = Delay;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Delay, E> {
                Delay::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Delay, E> {
                Ok(Delay(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Delay, E> {
                Delay::new(v as f64).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Delay, E> {
                match v {
                    "inf" | "infinity" | "Infinity" => Ok(Delay::INFINITE),
                    _ => Err(E::custom(format!("invalid delay {v:?}"))),
                }
            }
        }

        d.deserialize_any(DelayVisitor)
    }
}

/// The map carried by a process: a general quantum channel or a classical
/// behavior.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessChannel {
    Quantum(QuantumChannel),
    Classical(Behavior),
}

impl ProcessChannel {
    /// Quantum form; classical tables become channels with diagonal Choi matrix.
    pub fn to_quantum(&self) -> QuantumChannel {
        match self {
            ProcessChannel::Quantum(c) => c.clone(),
            ProcessChannel::Classical(b) => b.to_channel(),
        }
    }

    /// `(a_to_b, b_to_a)` signalling directions.
    pub fn signalling(&self) -> Result<(bool, bool)> {
        match self {
            ProcessChannel::Quantum(c) => c.signalling(),
            ProcessChannel::Classical(b) => Ok(b.signalling(tol::SIGNALLING)),
        }
    }

    pub fn bipartite_dims(&self) -> Result<[usize; 4]> {
        match self {
            ProcessChannel::Quantum(c) => c.bipartite_dims(),
            ProcessChannel::Classical(b) => {
                let s = b.scenario();
                Ok([s.nx0, s.ny0, s.nx1, s.ny1])
            }
        }
    }

    /// Classical form when the Choi matrix is diagonal.
    pub fn as_behavior(&self) -> Option<Behavior> {
        match self {
            ProcessChannel::Classical(b) => Some(b.clone()),
            ProcessChannel::Quantum(c) => {
                if c.off_diagonal_weight() > tol::HERMITIAN {
                    return None;
                }
                Behavior::from_channel(c).ok()
            }
        }
    }

    /// Stores diagonal channels as behaviors.
    pub(crate) fn canonical(channel: QuantumChannel) -> Result<Self> {
        channel.bipartite_dims()?;
        if channel.off_diagonal_weight() <= tol::HERMITIAN {
            return Ok(ProcessChannel::Classical(Behavior::from_channel(&channel)?));
        }
        Ok(ProcessChannel::Quantum(channel))
    }
}

impl Serialize for ProcessChannel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ProcessChannel::Quantum(c) => c.serialize(s),
            ProcessChannel::Classical(b) => b.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for ProcessChannel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        if value.get("scenario").is_some() {
            serde_json::from_value(value).map(ProcessChannel::Classical).map_err(de::Error::custom)
        } else {
            serde_json::from_value(value).map(ProcessChannel::Quantum).map_err(de::Error::custom)
        }
    }
}

/// One term `weight · (alice ⊗ bob)` of a local decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosrComponent {
    pub weight: f64,
    /// `A0 -> A1`.
    pub alice: QuantumChannel,
    /// `B0 -> B1`.
    pub bob: QuantumChannel,
}

/// Explicit shared-randomness mixture of product channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosrDecomposition {
    pub components: Vec<LosrComponent>,
}

impl LosrDecomposition {
    pub fn new(components: Vec<LosrComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty decomposition".into()))?;
        let dims = |c: &LosrComponent| (c.alice.din(), c.bob.din(), c.alice.dout(), c.bob.dout());
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if components.iter().any(|c| c.weight < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("decomposition weights are not a probability vector".into()));
        }
        if components.iter().any(|c| dims(c) != dims(first)) {
            return Err(Error::DimensionMismatch("decomposition components differ in dimension".into()));
        }
        Ok(Self { components })
    }

    /// `[A0, B0, A1, B1]`.
    pub fn dims(&self) -> [usize; 4] {
        let c = &self.components[0];
        [c.alice.din(), c.bob.din(), c.alice.dout(), c.bob.dout()]
    }

    /// Choi matrix of the mixture on `(A0, B0, A1, B1)`.
    pub fn choi(&self) -> ComplexMatrix {
        let [a0, b0, a1, b1] = self.dims();
        let mut j = ComplexMatrix::zeros(a0 * b0 * a1 * b1, a0 * b0 * a1 * b1);
        for c in &self.components {
            j += c.alice.product(&c.bob).choi().scale(c.weight);
        }
        j
    }

    pub fn to_channel(&self) -> QuantumChannel {
        let [a0, b0, a1, b1] = self.dims();
        let (i, o) = bipartite_io(a0, b0, a1, b1);
        QuantumChannel::from_choi_trusted(self.choi(), i, o)
    }

    /// Largest entrywise deviation between the reconstructed Choi matrix
    /// and the channel's; errors on a dimension mismatch.
    pub fn reconstruction_error(&self, channel: &QuantumChannel) -> Result<f64> {
        if channel.bipartite_dims()? != self.dims() {
            return Err(Error::DimensionMismatch(format!(
                "decomposition has dimensions {:?}, channel {:?}",
                self.dims(),
                channel.bipartite_dims()?
            )));
        }
        Ok(tensor::max_abs_diff(&self.choi(), channel.choi()))
    }

    pub(crate) fn verify(&self, channel: &QuantumChannel) -> Result<()> {
        let err = self.reconstruction_error(channel)?;
        if err > tol::CPTP {
            return Err(Error::InvalidArgument(format!(
                "decomposition does not reproduce the channel (deviation {err:.3e})"
            )));
        }
        Ok(())
    }
}

/// A bipartite channel with its delay and spatial-separation flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Process {
    pub(crate) channel: ProcessChannel,
    pub(crate) delay: Delay,
    pub(crate) separated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub(crate) decomposition: Option<LosrDecomposition>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProcess {
    channel: ProcessChannel,
    delay: Delay,
    #[serde(default = "default_separated")]
    separated: bool,
    #[serde(default)]
    decomposition: Option<LosrDecomposition>,
}

fn default_separated() -> bool {
    true
}

impl<'de> Deserialize<'de> for Process {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawProcess::deserialize(d)?;
        let p = Process::new(raw.channel, raw.delay, raw.separated).map_err(de::Error::custom)?;
        match raw.decomposition {
            Some(dec) => p.with_decomposition(dec).map_err(de::Error::custom),
            None => Ok(p),
        }
    }
}

impl Process {
    /// Requires bipartite `(A0, B0) -> (A1, B1)` labels.
    pub fn new(channel: ProcessChannel, delay: Delay, separated: bool) -> Result<Self> {
        channel.bipartite_dims()?;
        Ok(Self { channel, delay, separated, decomposition: None })
    }

    pub fn classical(behavior: Behavior, delay: Delay) -> Self {
        Self { channel: ProcessChannel::Classical(behavior), delay, separated: true, decomposition: None }
    }

    pub fn quantum(channel: QuantumChannel, delay: Delay) -> Result<Self> {
        Self::new(ProcessChannel::Quantum(channel), delay, true)
    }

    /// Attaches a local decomposition after checking that it reproduces the
    /// channel.
    pub fn with_decomposition(mut self, decomposition: LosrDecomposition) -> Result<Self> {
        decomposition.verify(&self.channel.to_quantum())?;
        self.decomposition = Some(decomposition);
        Ok(self)
    }

    pub fn channel(&self) -> &ProcessChannel {
        &self.channel
    }

    pub fn delay(&self) -> Delay {
        self.delay
    }

    pub fn separated(&self) -> bool {
        self.separated
    }

    pub fn decomposition(&self) -> Option<&LosrDecomposition> {
        self.decomposition.as_ref()
    }

    pub fn is_instantaneous(&self) -> bool {
        self.delay.is_instantaneous()
    }

    pub fn bipartite_dims(&self) -> [usize; 4] {
        self.channel.bipartite_dims().expect("checked at construction")
    }
}

/// False exactly when an instantaneous process between separated labs
/// would signal in some direction.
pub fn check_realizable(process: &Process) -> bool {
    if !process.is_instantaneous() || !process.separated {
        return true;
    }
    match process.channel.signalling() {
        Ok((ab, ba)) => !ab && !ba,
        Err(_) => false,
    }
}
