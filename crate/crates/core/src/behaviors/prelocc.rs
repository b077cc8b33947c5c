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
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::born::behavior_from_state;
use super::chsh::{chsh_value, horodecki_chsh, horodecki_measurements};
use super::table::Behavior;
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, Povm};
use crate::tensor::{self, ComplexMatrix, DimFactorization};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

/// Quantum instrument: one Kraus set per classical outcome, jointly trace
/// preserving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstrument", into = "RawInstrument")]
pub struct Instrument {
    branches: Vec<Vec<ComplexMatrix>>,
}

#[derive(Serialize, Deserialize)]
struct RawInstrument {
    branches: Vec<KrausSet>,
}

#[derive(Serialize, Deserialize)]
struct KrausSet(#[serde(with = "crate::json::matrices")] Vec<ComplexMatrix>);

impl TryFrom<RawInstrument> for Instrument {
    type Error = Error;

    fn try_from(raw: RawInstrument) -> Result<Self> {
        Instrument::new(raw.branches.into_iter().map(|k| k.0).collect())
    }
}

impl From<Instrument> for RawInstrument {
    fn from(i: Instrument) -> Self {
        RawInstrument { branches: i.branches.into_iter().map(KrausSet).collect() }
    }
}

impl Instrument {
    pub fn new(branches: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let first = branches
            .iter()
            .flatten()
            .next()
            .ok_or_else(|| Error::InvalidArgument("instrument has no Kraus operators".into()))?;
        let shape = first.shape();
        if branches.iter().any(Vec::is_empty) {
            return Err(Error::InvalidArgument("instrument outcome without Kraus operators".into()));
        }
        let mut sum = ComplexMatrix::zeros(shape.1, shape.1);
        for k in branches.iter().flatten() {
            if k.shape() != shape {
                return Err(Error::DimensionMismatch("instrument Kraus operators differ in shape".into()));
            }
            sum += k.adjoint() * k;
        }
        let dev = tensor::max_abs_diff(&sum, &tensor::identity(shape.1));
        if dev > tol::CPTP {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { branches })
    }

    /// Two-outcome local filter: outcome 0 applies `f`, outcome 1 the
    /// complement `sqrt(I - f† f)`. Requires `f† f <= I`.
    pub fn filter(f: ComplexMatrix) -> Result<Self> {
        let d = f.ncols();
        let rest = tensor::identity(d) - f.adjoint() * &f;
        let (vals, _) = tensor::eig_hermitian(&rest)?;
        if vals[0] < -tol::PSD {
            return Err(Error::NotPsd(vals[0]));
        }
        let complement = tensor::hermitian_fn(&rest, |x| x.max(0.0).sqrt());
        Self::new(vec![vec![f], vec![complement]])
    }

    /// Outcome `k` with probability `probs[k]`, leaving the state untouched.
    pub fn shared_randomness(d: usize, probs: &[f64]) -> Result<Self> {
        if probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidArgument("negative probability".into()));
        }
        Self::new(probs.iter().map(|p| vec![tensor::identity(d).scale(p.sqrt())]).collect())
    }

    /// Single-outcome instrument discarding the input and preparing `|0>`.
    pub fn reset(d: usize) -> Self {
        let kraus = (0..d).map(|i| tensor::ket(d, 0) * tensor::ket(d, i).adjoint()).collect();
        Self::new(vec![kraus]).expect("complete by construction")
    }

    pub fn branches(&self) -> &[Vec<ComplexMatrix>] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn din(&self) -> usize {
        self.branches[0][0].ncols()
    }

    pub fn dout(&self) -> usize {
        self.branches[0][0].nrows()
    }
}

/// One round: a party applies an instrument; the next round may depend on
/// the outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolNode {
    pub party: Party,
    pub instrument: Instrument,
    /// One entry per outcome; `None` or an empty list ends the branch.
    #[serde(default)]
    pub children: Vec<Option<ProtocolNode>>,
}

impl ProtocolNode {
    pub fn leaf(party: Party, instrument: Instrument) -> Self {
        Self { party, instrument, children: Vec::new() }
    }
}

/// Finite tree of local instruments with classical communication.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreLoccProtocol {
    #[serde(default)]
    pub root: Option<ProtocolNode>,
}

/// Conditional state after one complete transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub transcript: Vec<usize>,
    pub probability: f64,
    pub state: DensityMatrix,
}

const BRANCH_CUTOFF: f64 = 1e-14;

impl PreLoccProtocol {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(root: ProtocolNode) -> Self {
        Self { root: Some(root) }
    }

    /// Runs the protocol on a bipartite state and lists every transcript of
    /// nonzero probability.
    pub fn run(&self, state: &DensityMatrix) -> Result<Vec<Branch>> {
        if state.dims().len() != 2 {
            return Err(Error::MissingBipartiteLabels("pre-processing acts on a bipartite state".into()));
        }
        let mut out = Vec::new();
        let d = state.dims().dims();
        match &self.root {
            None => out.push(Branch { transcript: Vec::new(), probability: 1.0, state: state.clone() }),
            Some(node) => walk(node, state.matrix().clone(), d[0], d[1], &mut Vec::new(), &mut out)?,
        }
        Ok(out)
    }
}

fn walk(
    node: &ProtocolNode,
    rho: ComplexMatrix,
    da: usize,
    db: usize,
    transcript: &mut Vec<usize>,
    out: &mut Vec<Branch>,
) -> Result<()> {
    let inst = &node.instrument;
    let local = match node.party {
        Party::A => da,
        Party::B => db,
    };
    if inst.din() != local {
        return Err(Error::InconsistentBranches(format!(
            "instrument after transcript {transcript:?} acts on dimension {}, party holds {local}",
            inst.din()
        )));
    }
    if !node.children.is_empty() && node.children.len() != inst.len() {
        return Err(Error::InconsistentBranches(format!(
            "node after transcript {transcript:?} has {} children for {} outcomes",
            node.children.len(),
            inst.len()
        )));
    }
    let (na, nb) = match node.party {
        Party::A => (inst.dout(), db),
        Party::B => (da, inst.dout()),
    };
    for (o, kraus) in inst.branches().iter().enumerate() {
        let mut next = ComplexMatrix::zeros(na * nb, na * nb);
        for k in kraus {
            let full = match node.party {
                Party::A => tensor::tensor(k, &tensor::identity(db)),
                Party::B => tensor::tensor(&tensor::identity(da), k),
            };
            next += &full * &rho * full.adjoint();
        }
        let p = tensor::trace(&next).re;
        if p <= BRANCH_CUTOFF {
            continue;
        }
        transcript.push(o);
        match node.children.get(o).and_then(Option::as_ref) {
            Some(child) => walk(child, next, na, nb, transcript, out)?,
            None => out.push(Branch {
                transcript: transcript.clone(),
                probability: p,
                state: DensityMatrix::from_trusted(next, DimFactorization::bipartite(na, nb, "A", "B")),
            }),
        }
        transcript.pop();
    }
    Ok(())
}

/// Measurement settings keyed by transcript; the empty transcript is the
/// fallback for transcripts without an entry.
pub type SettingsByTranscript = BTreeMap<Vec<usize>, Vec<Povm>>;

fn lookup<'a>(map: &'a SettingsByTranscript, transcript: &[usize], party: &str) -> Result<&'a [Povm]> {
    map.get(transcript)
        .or_else(|| map.get(&Vec::new()))
        .map(Vec::as_slice)
        .ok_or_else(|| Error::InconsistentBranches(format!("{party} has no settings for transcript {transcript:?}")))
}

/// `sum_τ p(τ) · Born behavior of the conditional state after τ`.
pub fn behavior_from_prelocc(
    input_state: &DensityMatrix,
    protocol: &PreLoccProtocol,
    a_povms_by_transcript: &SettingsByTranscript,
    b_povms_by_transcript: &SettingsByTranscript,
) -> Result<Behavior> {
    let mut acc: Option<(super::Scenario, Vec<f64>)> = None;
    for branch in protocol.run(input_state)? {
        let a = lookup(a_povms_by_transcript, &branch.transcript, "Alice")?;
        let b = lookup(b_povms_by_transcript, &branch.transcript, "Bob")?;
        let beh = behavior_from_state(&branch.state, a, b)?;
        match &mut acc {
            None => {
                acc = Some((*beh.scenario(), beh.table().iter().map(|p| p * branch.probability).collect()));
            }
            Some((s, table)) => {
                if s != beh.scenario() {
                    return Err(Error::InconsistentBranches(format!(
                        "transcript {:?} yields a different scenario",
                        branch.transcript
                    )));
                }
                table.iter_mut().zip(beh.table()).for_each(|(t, p)| *t += p * branch.probability);
            }
        }
    }
    let (s, table) = acc.ok_or_else(|| Error::InconsistentBranches("protocol has no surviving branch".into()))?;
    Behavior::normalized(s, table)
}

/// Summary of the local-filtering demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenNonlocalityReport {
    /// Maximal CHSH value of the unfiltered state.
    pub pre_chsh: f64,
    /// Maximal CHSH value of the state conditioned on both filters passing.
    pub post_chsh: f64,
    pub filter_success_prob: f64,
    /// CHSH value of the full protocol, where failed runs output 0 deterministically.
    pub protocol_chsh: f64,
    pub state: DensityMatrix,
    pub filtered_state: DensityMatrix,
}

/// `p |psi><psi| + (1 - p)/2 (|00><00| + |11><11|)` with
/// `|psi> = sin θ |01> + cos θ |10>`.
pub fn hidden_nonlocality_state(p: f64, theta: f64) -> Result<DensityMatrix> {
    let psi = super::table::real_vector(&[0.0, theta.sin(), theta.cos(), 0.0]);
    let noise = tensor::diag(&[0.5, 0.0, 0.0, 0.5]);
    let m = tensor::projector(&psi).scale(p) + noise.scale(1.0 - p);
    DensityMatrix::new(m, DimFactorization::bipartite(2, 2, "A", "B"))
}

/// Alice's and Bob's filters `diag(1, a)`, `diag(a, 1)` with `a = sqrt(tan θ)`.
pub fn hidden_nonlocality_protocol(theta: f64) -> Result<PreLoccProtocol> {
    let a = theta.tan().sqrt();
    let alice = Instrument::filter(tensor::diag(&[1.0, a]))?;
    let bob = Instrument::filter(tensor::diag(&[a, 1.0]))?;
    Ok(PreLoccProtocol::new(ProtocolNode {
        party: Party::A,
        instrument: alice,
        children: vec![Some(ProtocolNode::leaf(Party::B, bob)), None],
    }))
}

/// A state whose CHSH violation only appears after local filtering.
pub fn demo_hidden_nonlocality() -> HiddenNonlocalityReport {
    let (p, theta) = (0.9, 0.2);
    let state = hidden_nonlocality_state(p, theta).expect("valid parameters");
    let protocol = hidden_nonlocality_protocol(theta).expect("filters are contractions");
    let branches = protocol.run(&state).expect("dimensions agree");
    let success = branches
        .iter()
        .find(|b| b.transcript == [0, 0])
        .expect("both filters pass with positive probability");

    let (a_ok, b_ok) = horodecki_measurements(&success.state).expect("two qubits");
    let idle = vec![Povm::deterministic(2, 0, 2).expect("valid outcome"); 2];
    let mut alice = SettingsByTranscript::new();
    let mut bob = SettingsByTranscript::new();
    alice.insert(vec![0, 0], a_ok);
    bob.insert(vec![0, 0], b_ok);
    alice.insert(Vec::new(), idle.clone());
    bob.insert(Vec::new(), idle);
    let behavior = behavior_from_prelocc(&state, &protocol, &alice, &bob).expect("consistent settings");

    HiddenNonlocalityReport {
        pre_chsh: horodecki_chsh(&state).expect("two qubits"),
        post_chsh: horodecki_chsh(&success.state).expect("two qubits"),
        filter_success_prob: success.probability,
        protocol_chsh: chsh_value(&behavior).expect("binary scenario"),
        state,
        filtered_state: success.state.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::{is_local, optimal_chsh_measurements};
    use crate::quantum::random;

    fn settings(a: Vec<Povm>) -> SettingsByTranscript {
        let mut m = SettingsByTranscript::new();
        m.insert(Vec::new(), a);
        m
    }

    #[test]
    fn empty_protocol_matches_born_rule() {
        let (a, b) = optimal_chsh_measurements();
        let rho = random::random_state(&[2, 2], 3).unwrap();
        let direct = behavior_from_state(&rho, &a, &b).unwrap();
        let via = behavior_from_prelocc(&rho, &PreLoccProtocol::empty(), &settings(a), &settings(b)).unwrap();
        assert!(direct.max_abs_diff(&via) < 1e-15);
    }

    #[test]
    fn shared_randomness_gives_a_mixture() {
        let rho = DensityMatrix::phi_plus();
        let probs = [0.3, 0.7];
        let protocol = PreLoccProtocol::new(ProtocolNode::leaf(Party::A, Instrument::shared_randomness(2, &probs).unwrap()));
        let (a0, b0) = optimal_chsh_measurements();
        let (a1, b1) = (vec![Povm::computational(2); 2], vec![Povm::computational(2); 2]);
        let mut am = SettingsByTranscript::new();
        let mut bm = SettingsByTranscript::new();
        am.insert(vec![0], a0.clone());
        am.insert(vec![1], a1.clone());
        bm.insert(vec![0], b0.clone());
        bm.insert(vec![1], b1.clone());
        let got = behavior_from_prelocc(&rho, &protocol, &am, &bm).unwrap();
        let expect = Behavior::mixture(
            &probs,
            &[behavior_from_state(&rho, &a0, &b0).unwrap(), behavior_from_state(&rho, &a1, &b1).unwrap()],
        )
        .unwrap();
        assert!(got.max_abs_diff(&expect) <= 1e-9);
    }

    #[test]
    fn reset_protocol_yields_local_behavior() {
        let protocol = PreLoccProtocol::new(ProtocolNode::leaf(Party::A, Instrument::reset(2)));
        let (a, b) = optimal_chsh_measurements();
        let beh = behavior_from_prelocc(&DensityMatrix::phi_plus(), &protocol, &settings(a), &settings(b)).unwrap();
        assert!(is_local(&beh).unwrap().local);
    }

    #[test]
    fn inconsistent_branches_are_reported() {
        let protocol = PreLoccProtocol::new(ProtocolNode::leaf(Party::A, Instrument::reset(3)));
        let (a, b) = optimal_chsh_measurements();
        assert!(matches!(
            behavior_from_prelocc(&DensityMatrix::phi_plus(), &protocol, &settings(a), &settings(b)),
            Err(Error::InconsistentBranches(_))
        ));
        let bad = Instrument::new(vec![vec![tensor::diag(&[1.0, 0.5])]]);
        assert!(matches!(bad, Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn filtering_reveals_hidden_nonlocality() {
        let r = demo_hidden_nonlocality();
        assert!(r.pre_chsh <= 2.0 + 1e-9);
        assert!(r.post_chsh > 2.0 + 1e-3);
        assert!(r.filter_success_prob > 0.0 && r.filter_success_prob <= 1.0);
        assert!(r.protocol_chsh > 2.0);
    }

    #[test]
    fn instrument_json_round_trip() {
        let i = Instrument::filter(tensor::diag(&[1.0, 0.3])).unwrap();
        let text = serde_json::to_string(&i).unwrap();
        assert_eq!(serde_json::from_str::<Instrument>(&text).unwrap(), i);
    }
}
