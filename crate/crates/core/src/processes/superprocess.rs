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

//! Superprocesses: pre- and post-processing around a process, in three
//! wiring forms, and the shared-entanglement construction they reduce to.

use serde::{Deserialize, Serialize};

use super::process::{Delay, LosrComponent, LosrDecomposition, Process, ProcessChannel};
use crate::behaviors::{is_local, table_strategies, PreLoccProtocol};
use crate::error::{Error, Result};
use crate::quantum::{bipartite_io, DensityMatrix, QuantumChannel};
use crate::tensor::{self, ComplexMatrix, DimFactorization};
use crate::tol;

/// One party's pre/post pair around the process, linked by a local memory:
/// `pre: X0' -> (X0 ⊗ E)` and `post: (X1 ⊗ E) -> X1'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalComb {
    pub pre: QuantumChannel,
    pub post: QuantumChannel,
    #[serde(default = "one")]
    pub memory: usize,
}

fn one() -> usize {
    1
}

impl LocalComb {
    pub fn new(pre: QuantumChannel, post: QuantumChannel, memory: usize) -> Result<Self> {
        if memory == 0 || pre.dout() % memory != 0 || post.din() % memory != 0 {
            return Err(Error::DimensionMismatch(format!(
                "memory dimension {memory} does not divide pre output {} and post input {}",
                pre.dout(),
                post.din()
            )));
        }
        Ok(Self { pre, post, memory })
    }

    /// Pre and post stages without memory.
    pub fn from_channels(pre: QuantumChannel, post: QuantumChannel) -> Self {
        Self { pre, post, memory: 1 }
    }

    /// Leaves the party's input and output untouched.
    pub fn identity(d_in: usize, d_out: usize) -> Self {
        Self::from_channels(
            QuantumChannel::identity(DimFactorization::single(d_in)),
            QuantumChannel::identity(DimFactorization::single(d_out)),
        )
    }

    /// Dimension of the process input this comb feeds.
    pub fn inner_in(&self) -> usize {
        self.pre.dout() / self.memory
    }

    /// Dimension of the process output this comb consumes.
    pub fn inner_out(&self) -> usize {
        self.post.din() / self.memory
    }

    /// Local channel `X0' -> X1'` obtained by plugging `inner: X0 -> X1`
    /// into the comb.
    pub fn wrap(&self, inner: &QuantumChannel) -> Result<QuantumChannel> {
        if inner.din() != self.inner_in() || inner.dout() != self.inner_out() {
            return Err(Error::DimensionMismatch(format!(
                "comb expects a {}->{} channel, got {}->{}",
                self.inner_in(),
                self.inner_out(),
                inner.din(),
                inner.dout()
            )));
        }
        let with_memory = inner.product(&QuantumChannel::identity(DimFactorization::single(self.memory)));
        let plain_in = DimFactorization::single(with_memory.din());
        let plain_out = DimFactorization::single(with_memory.dout());
        let with_memory = with_memory.relabel(plain_in, plain_out)?;
        let pre = self.pre.relabel(self.pre.in_dims().clone(), DimFactorization::single(self.pre.dout()))?;
        let post = self.post.relabel(DimFactorization::single(self.post.din()), self.post.out_dims().clone())?;
        pre.then(&with_memory)?.then(&post)
    }
}

/// `weight · (alice comb ⊗ bob comb)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombComponent {
    pub weight: f64,
    pub alice: LocalComb,
    pub bob: LocalComb,
}

/// Post-processing applied after a given pre-stage transcript:
/// `alice: (X0 ⊗ Ã) -> X1`, `bob: (Y0 ⊗ B̃) -> Y1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptPost {
    pub transcript: Vec<usize>,
    pub alice: QuantumChannel,
    pub bob: QuantumChannel,
}

/// A pre-stage completed before the new inputs arrive: each party prepares
/// a local state on (process input ⊗ memory), the process runs, and a local
/// protocol with classical communication acts on (process output ⊗
/// memory). Afterwards only local operations on the stored systems and the
/// fresh inputs remain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreLoccStage {
    /// On `(A0 ⊗ Ma)`.
    pub alice_preparation: DensityMatrix,
    /// On `(B0 ⊗ Mb)`.
    pub bob_preparation: DensityMatrix,
    #[serde(default = "one")]
    pub alice_memory: usize,
    #[serde(default = "one")]
    pub bob_memory: usize,
    #[serde(default)]
    pub protocol: PreLoccProtocol,
    /// Looked up by transcript; the entry with an empty transcript is the
    /// fallback.
    pub posts: Vec<TranscriptPost>,
}

/// Pre and post channels acting jointly on both parties, with a shared
/// memory: `pre: (A0', B0') -> (A0 B0 ⊗ E)`, `post: (A1 B1 ⊗ E) -> (A1', B1')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralStage {
    pub pre: QuantumChannel,
    pub post: QuantumChannel,
    #[serde(default = "one")]
    pub memory: usize,
    pub pre_delay: Delay,
    pub post_delay: Delay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperprocessForm {
    Losr,
    PreLocc,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Superprocess {
    /// Shared randomness over products of local combs.
    Losr { components: Vec<CombComponent> },
    PreLocc(PreLoccStage),
    General(GeneralStage),
}

impl Superprocess {
    pub fn form(&self) -> SuperprocessForm {
        match self {
            Superprocess::Losr { .. } => SuperprocessForm::Losr,
            Superprocess::PreLocc(_) => SuperprocessForm::PreLocc,
            Superprocess::General(_) => SuperprocessForm::General,
        }
    }

    /// Identity on a process with dimensions `[A0, B0, A1, B1]`.
    pub fn identity(dims: [usize; 4]) -> Self {
        let [a0, b0, a1, b1] = dims;
        Superprocess::Losr {
            components: vec![CombComponent {
                weight: 1.0,
                alice: LocalComb::identity(a0, a1),
                bob: LocalComb::identity(b0, b1),
            }],
        }
    }
}

/// Whether a form may map a process with delay `in_delay` to one with
/// delay `out_delay`.
pub fn form_allowed(form: SuperprocessForm, in_delay: Delay, out_delay: Delay) -> bool {
    let (i, o) = (in_delay.value(), out_delay.value());
    (i == 0.0 && o == 0.0 && matches!(form, SuperprocessForm::Losr | SuperprocessForm::PreLocc))
        || (i > 0.0 && o == 0.0 && form == SuperprocessForm::PreLocc)
        || (o >= i && form == SuperprocessForm::General)
}

/// `J = sum_ij |i><j| ⊗ f(i, j)` where `f(i, j)` is the image of `|i><j|`.
fn choi_by_basis(
    din: usize,
    dout: usize,
    f: impl Fn(usize, usize) -> Result<ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let mut j = ComplexMatrix::zeros(din * dout, din * dout);
    for r in 0..din {
        for c in 0..din {
            let y = f(r, c)?;
            for a in 0..dout {
                for b in 0..dout {
                    j[(r * dout + a, c * dout + b)] = y[(a, b)];
                }
            }
        }
    }
    Ok((&j + j.adjoint()).scale(0.5))
}

fn swap_middle(m: &ComplexMatrix, d: [usize; 4]) -> Result<ComplexMatrix> {
    let dims = DimFactorization::new(d.to_vec())?;
    Ok(tensor::permute_subsystems(m, &dims, &[0, 2, 1, 3])?.0)
}

/// `(a ⊗ b)(z)` for `z` on `(a_in ⊗ b_in)`, without forming the product
/// channel.
fn apply_pair(a: &QuantumChannel, b: &QuantumChannel, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    let half = a.apply_extended(z, b.din())?;
    let dims = DimFactorization::new(vec![a.dout(), b.din()])?;
    let (half, _) = tensor::permute_subsystems(&half, &dims, &[1, 0])?;
    let full = b.apply_extended(&half, a.dout())?;
    let dims = DimFactorization::new(vec![b.dout(), a.dout()])?;
    Ok(tensor::permute_subsystems(&full, &dims, &[1, 0])?.0)
}

fn flat_channel(c: &QuantumChannel) -> Result<QuantumChannel> {
    c.relabel(DimFactorization::single(c.din()), DimFactorization::single(c.dout()))
}

fn finish(
    choi: ComplexMatrix,
    dims: [usize; 4],
    delay: Delay,
    separated: bool,
    decomposition: Option<LosrDecomposition>,
) -> Result<Process> {
    let [a0, b0, a1, b1] = dims;
    let (i, o) = bipartite_io(a0, b0, a1, b1);
    let channel = QuantumChannel::from_choi(choi, i, o)?;
    let mut out = Process::new(ProcessChannel::canonical(channel)?, delay, separated)?;
    if let Some(dec) = decomposition {
        out = out.with_decomposition(dec)?;
    }
    Ok(out)
}

/// Wires a process into a superprocess. Outputs with a diagonal Choi
/// matrix are stored as classical behaviors.
pub fn apply_superprocess(sp: &Superprocess, process: &Process) -> Result<Process> {
    let inner = process.channel().to_quantum();
    match sp {
        Superprocess::Losr { components } => apply_losr(components, process, &inner),
        Superprocess::PreLocc(stage) => {
            let branches = prelocc_branches(stage, &inner)?;
            let mut total: Option<(ComplexMatrix, [usize; 4])> = None;
            let mut decomposition: Option<Vec<LosrComponent>> = Some(Vec::new());
            for (p, omega, post) in branches {
                let (j, dims, dec) = lose_channel(&omega, &post.alice, &post.bob)?;
                match &mut total {
                    None => total = Some((j.scale(p), dims)),
                    Some((acc, d)) => {
                        if *d != dims {
                            return Err(Error::InconsistentBranches(format!(
                                "transcript {:?} yields dimensions {dims:?}, expected {d:?}",
                                post.transcript
                            )));
                        }
                        *acc += j.scale(p);
                    }
                }
                decomposition = match (decomposition, dec) {
                    (Some(mut acc), Some(d)) => {
                        acc.extend(d.components.into_iter().map(|c| LosrComponent { weight: c.weight * p, ..c }));
                        Some(acc)
                    }
                    _ => None,
                };
            }
            let (choi, dims) = total.ok_or_else(|| Error::InconsistentBranches("no surviving transcript".into()))?;
            let dec = decomposition.and_then(|c| normalized_decomposition(c).ok());
            finish(choi, dims, Delay::INSTANT, process.separated(), dec)
        }
        Superprocess::General(stage) => {
            let [a0, b0, a1, b1] = process.bipartite_dims();
            let m = stage.memory;
            if stage.pre.in_dims().len() != 2 || stage.post.out_dims().len() != 2 {
                return Err(Error::MissingBipartiteLabels(
                    "general pre stage needs two input factors and post stage two output factors".into(),
                ));
            }
            if stage.pre.dout() != a0 * b0 * m || stage.post.din() != a1 * b1 * m {
                return Err(Error::DimensionMismatch(format!(
                    "pre output {} and post input {} do not match the process with memory {m}",
                    stage.pre.dout(),
                    stage.post.din()
                )));
            }
            let (pi, po) = (stage.pre.in_dims().dims(), stage.post.out_dims().dims());
            let dims = [pi[0], pi[1], po[0], po[1]];
            let din = stage.pre.din();
            let choi = choi_by_basis(din, stage.post.dout(), |r, c| {
                let y = stage.pre.apply_operator(&tensor::matrix_unit(din, r, c))?;
                let z = inner.apply_extended(&y, m)?;
                stage.post.apply_operator(&z)
            })?;
            finish(choi, dims, stage.pre_delay + process.delay() + stage.post_delay, process.separated(), None)
        }
    }
}

fn apply_losr(components: &[CombComponent], process: &Process, inner: &QuantumChannel) -> Result<Process> {
    let first = components
        .first()
        .ok_or_else(|| Error::FormViolation("local superprocess without components".into()))?;
    let total: f64 = components.iter().map(|c| c.weight).sum();
    if components.iter().any(|c| c.weight < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::FormViolation("component weights are not a probability vector".into()));
    }
    let [a0, b0, a1, b1] = process.bipartite_dims();
    let dims = [first.alice.pre.din(), first.bob.pre.din(), first.alice.post.dout(), first.bob.post.dout()];
    let mut choi = ComplexMatrix::zeros(dims.iter().product(), dims.iter().product());
    for c in components {
        let (ca, cb) = (&c.alice, &c.bob);
        if [ca.pre.din(), cb.pre.din(), ca.post.dout(), cb.post.dout()] != dims {
            return Err(Error::FormViolation("components act on different dimensions".into()));
        }
        if ca.inner_in() != a0 || cb.inner_in() != b0 || ca.inner_out() != a1 || cb.inner_out() != b1 {
            return Err(Error::DimensionMismatch(format!(
                "combs expect a process {:?}, got {:?}",
                [ca.inner_in(), cb.inner_in(), ca.inner_out(), cb.inner_out()],
                [a0, b0, a1, b1]
            )));
        }
        let (ea, eb) = (ca.memory, cb.memory);
        let (da, db) = (ca.pre.din(), cb.pre.din());
        let j = choi_by_basis(da * db, ca.post.dout() * cb.post.dout(), |r, c| {
            let ya = ca.pre.apply_operator(&tensor::matrix_unit(da, r / db, c / db))?;
            let yb = cb.pre.apply_operator(&tensor::matrix_unit(db, r % db, c % db))?;
            let y = swap_middle(&tensor::tensor(&ya, &yb), [a0, ea, b0, eb])?;
            let z = swap_middle(&inner.apply_extended(&y, ea * eb)?, [a1, b1, ea, eb])?;
            apply_pair(&ca.post, &cb.post, &z)
        })?;
        choi += j.scale(c.weight);
    }

    let (source, derived) = match process.decomposition() {
        Some(dec) => (Some(dec.clone()), false),
        None => (local_model(process), true),
    };
    let decomposition = match source {
        Some(dec) => {
            let mut out = Vec::new();
            for c in components {
                for d in &dec.components {
                    out.push(LosrComponent {
                        weight: c.weight * d.weight,
                        alice: c.alice.wrap(&d.alice)?,
                        bob: c.bob.wrap(&d.bob)?,
                    });
                }
            }
            Some(LosrDecomposition::new(out)?)
        }
        None => None,
    };
    let out = finish(choi, dims, process.delay(), process.separated(), None)?;
    match decomposition {
        None => Ok(out),
        // A derived model only reproduces the behavior to LP accuracy.
        Some(dec) if derived => Ok(out.clone().with_decomposition(dec).unwrap_or(out)),
        Some(dec) => out.with_decomposition(dec),
    }
}

/// Product-channel mixture of a local behavior, read off its vertex weights.
fn local_model(process: &Process) -> Option<LosrDecomposition> {
    let b = process.channel().as_behavior()?;
    let weights = is_local(&b).ok().filter(|r| r.local)?.weights?;
    let s = *b.scenario();
    let deterministic = |rule: &[usize], n_out: usize| {
        let rows: Vec<Vec<f64>> = rule.iter().map(|&o| (0..n_out).map(|k| f64::from(u8::from(k == o))).collect()).collect();
        QuantumChannel::from_stochastic(&rows, DimFactorization::single(rule.len()), DimFactorization::single(n_out))
    };
    let alices = table_strategies(s.nx0, s.nx1);
    let bobs = table_strategies(s.ny0, s.ny1);
    let mut components = Vec::new();
    for (k, w) in weights.iter().enumerate() {
        if *w > 1e-12 {
            components.push(LosrComponent {
                weight: *w,
                alice: deterministic(&alices[k / bobs.len()], s.nx1).ok()?,
                bob: deterministic(&bobs[k % bobs.len()], s.ny1).ok()?,
            });
        }
    }
    normalized_decomposition(components).ok()
}

fn normalized_decomposition(components: Vec<LosrComponent>) -> Result<LosrDecomposition> {
    let total: f64 = components.iter().map(|c| c.weight).sum();
    LosrDecomposition::new(components.into_iter().map(|c| LosrComponent { weight: c.weight / total, ..c }).collect())
}

/// Runs the pre-stage and pairs every surviving transcript with its
/// probability, conditional state and post-processing.
fn prelocc_branches<'a>(
    stage: &'a PreLoccStage,
    inner: &QuantumChannel,
) -> Result<Vec<(f64, DensityMatrix, &'a TranscriptPost)>> {
    let [a0, b0, a1, b1] = inner.bipartite_dims()?;
    let (ma, mb) = (stage.alice_memory, stage.bob_memory);
    if stage.alice_preparation.dim() != a0 * ma || stage.bob_preparation.dim() != b0 * mb {
        return Err(Error::DimensionMismatch(format!(
            "preparations have dimensions {} and {}, process inputs with memory need {} and {}",
            stage.alice_preparation.dim(),
            stage.bob_preparation.dim(),
            a0 * ma,
            b0 * mb
        )));
    }
    let sigma = tensor::tensor(stage.alice_preparation.matrix(), stage.bob_preparation.matrix());
    let sigma = swap_middle(&sigma, [a0, ma, b0, mb])?;
    let out = swap_middle(&inner.apply_extended(&sigma, ma * mb)?, [a1, b1, ma, mb])?;
    let shared = DensityMatrix::from_trusted(out, DimFactorization::bipartite(a1 * ma, b1 * mb, "A", "B"));

    let mut result = Vec::new();
    for branch in stage.protocol.run(&shared)? {
        let post = stage
            .posts
            .iter()
            .find(|p| p.transcript == branch.transcript)
            .or_else(|| stage.posts.iter().find(|p| p.transcript.is_empty()))
            .ok_or_else(|| {
                Error::InconsistentBranches(format!("no post-processing for transcript {:?}", branch.transcript))
            })?;
        let p = branch.probability;
        result.push((p, branch.state, post));
    }
    Ok(result)
}

/// Channel `X -> (alice ⊗ bob)(X ⊗ ω)` on `(X0, Y0) -> (X1, Y1)`, with an
/// explicit local decomposition when `ω` is a product or diagonal state.
fn lose_channel(
    omega: &DensityMatrix,
    alice: &QuantumChannel,
    bob: &QuantumChannel,
) -> Result<(ComplexMatrix, [usize; 4], Option<LosrDecomposition>)> {
    if omega.dims().len() != 2 {
        return Err(Error::MissingBipartiteLabels("shared state must be bipartite".into()));
    }
    let (ea, eb) = (omega.dims().dims()[0], omega.dims().dims()[1]);
    if alice.din() % ea != 0 || bob.din() % eb != 0 {
        return Err(Error::DimensionMismatch(format!(
            "local channels with inputs {} and {} cannot hold shares of dimension {ea} and {eb}",
            alice.din(),
            bob.din()
        )));
    }
    let (x0, y0) = (alice.din() / ea, bob.din() / eb);
    let dims = [x0, y0, alice.dout(), bob.dout()];
    let choi = choi_by_basis(x0 * y0, alice.dout() * bob.dout(), |r, c| {
        let x = tensor::matrix_unit(x0 * y0, r, c);
        let joint = swap_middle(&tensor::tensor(&x, omega.matrix()), [x0, y0, ea, eb])?;
        apply_pair(alice, bob, &joint)
    })?;
    Ok((choi, dims, local_decomposition(omega, alice, bob, x0, y0)?))
}

/// `X -> X ⊗ σ` on a `d`-dimensional input.
fn appender(d: usize, sigma: &ComplexMatrix) -> QuantumChannel {
    let e = sigma.nrows();
    let mut choi = ComplexMatrix::zeros(d * d * e, d * d * e);
    for i in 0..d {
        for j in 0..d {
            for a in 0..e {
                for b in 0..e {
                    choi[((i * d + i) * e + a, (j * d + j) * e + b)] = sigma[(a, b)];
                }
            }
        }
    }
    QuantumChannel::from_choi_trusted(choi, DimFactorization::single(d), DimFactorization::single(d * e))
}

fn local_decomposition(
    omega: &DensityMatrix,
    alice: &QuantumChannel,
    bob: &QuantumChannel,
    x0: usize,
    y0: usize,
) -> Result<Option<LosrDecomposition>> {
    let dims = omega.dims();
    let (ea, eb) = (dims.dims()[0], dims.dims()[1]);
    let ra = tensor::partial_trace(omega.matrix(), dims, &[0])?;
    let rb = tensor::partial_trace(omega.matrix(), dims, &[1])?;
    let (fa, fb) = (flat_channel(alice)?, flat_channel(bob)?);
    let component = |w: f64, sa: &ComplexMatrix, sb: &ComplexMatrix| -> Result<LosrComponent> {
        Ok(LosrComponent { weight: w, alice: appender(x0, sa).then(&fa)?, bob: appender(y0, sb).then(&fb)? })
    };
    if tensor::max_abs_diff(&tensor::tensor(&ra, &rb), omega.matrix()) <= tol::HERMITIAN {
        return Ok(Some(LosrDecomposition::new(vec![component(1.0, &ra, &rb)?])?));
    }
    let m = omega.matrix();
    let off = (0..m.nrows())
        .flat_map(|r| (0..m.ncols()).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|(r, c)| m[(r, c)].norm())
        .fold(0.0, f64::max);
    if off > tol::HERMITIAN {
        return Ok(None);
    }
    let mut comps = Vec::new();
    for i in 0..ea {
        for j in 0..eb {
            let w = m[(i * eb + j, i * eb + j)].re;
            if w > tol::CLAMP {
                comps.push(component(w, &tensor::matrix_unit(ea, i, i), &tensor::matrix_unit(eb, j, j))?);
            }
        }
    }
    normalized_decomposition(comps).map(Some)
}

/// Instantaneous process `X -> (local_a ⊗ local_b)(X ⊗ ω)` where
/// `local_a: (X0 ⊗ Ea) -> X1` and `local_b: (Y0 ⊗ Eb) -> Y1` act on the
/// shares of a bipartite state `ω` on `(Ea, Eb)`. Never signals.
pub fn lose_construct(
    entangled_state: &DensityMatrix,
    local_a: &QuantumChannel,
    local_b: &QuantumChannel,
) -> Result<Process> {
    let (choi, dims, dec) = lose_channel(entangled_state, local_a, local_b)?;
    finish(choi, dims, Delay::INSTANT, true, dec)
}

/// Shared state and local channels whose shared-entanglement construction
/// reproduces the output of a pre-stage superprocess.
#[derive(Debug, Clone, PartialEq)]
pub struct LoseReduction {
    /// `sum_τ p(τ) |τ><τ| ⊗ |τ><τ| ⊗ ω_τ`, each party holding a copy of the
    /// transcript next to its share.
    pub state: DensityMatrix,
    /// `(X0 ⊗ T ⊗ Ã) -> X1`, reading the transcript register.
    pub alice: QuantumChannel,
    pub bob: QuantumChannel,
}

/// `Σ_k |k><k| ⊗ C_k` applied after reading the classical register `k`:
/// input `(X ⊗ T ⊗ E)`.
fn controlled(channels: &[&QuantumChannel], x: usize, e: usize) -> Result<QuantumChannel> {
    let t = channels.len();
    let dout = channels[0].dout();
    let din = x * t * e;
    let mut choi = ComplexMatrix::zeros(din * dout, din * dout);
    for (k, c) in channels.iter().enumerate() {
        if c.din() != x * e || c.dout() != dout {
            return Err(Error::InconsistentBranches("post-processing dimensions differ between transcripts".into()));
        }
        let j = c.choi();
        for xi in 0..x {
            for ei in 0..e {
                for xj in 0..x {
                    for ej in 0..e {
                        let (ri, rj) = ((xi * t + k) * e + ei, (xj * t + k) * e + ej);
                        let (si, sj) = (xi * e + ei, xj * e + ej);
                        for a in 0..dout {
                            for b in 0..dout {
                                choi[(ri * dout + a, rj * dout + b)] = j[(si * dout + a, sj * dout + b)];
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(QuantumChannel::from_choi_trusted(choi, DimFactorization::single(din), DimFactorization::single(dout)))
}

/// Rewrites a pre-stage superprocess applied to `process` as a single
/// shared state followed by local operations.
pub fn lose_reduction(sp: &Superprocess, process: &Process) -> Result<LoseReduction> {
    let Superprocess::PreLocc(stage) = sp else {
        return Err(Error::FormViolation("only pre-stage superprocesses reduce to a shared state".into()));
    };
    let branches = prelocc_branches(stage, &process.channel().to_quantum())?;
    let (_, first, post) = branches
        .first()
        .ok_or_else(|| Error::InconsistentBranches("no surviving transcript".into()))?;
    let (ea, eb) = (first.dims().dims()[0], first.dims().dims()[1]);
    let (x0, y0) = (post.alice.din() / ea, post.bob.din() / eb);
    let t = branches.len();
    let (da, db) = (t * ea, t * eb);
    let mut m = ComplexMatrix::zeros(da * db, da * db);
    for (k, (p, omega, _)) in branches.iter().enumerate() {
        if omega.dims().dims() != [ea, eb] {
            return Err(Error::InconsistentBranches("conditional states differ in dimension".into()));
        }
        let flag = tensor::matrix_unit(t * t, k * t + k, k * t + k);
        m += tensor::tensor(&flag, omega.matrix()).scale(*p);
    }
    let (m, _) = tensor::permute_subsystems(&m, &DimFactorization::new(vec![t, t, ea, eb])?, &[0, 2, 1, 3])?;
    let state = DensityMatrix::from_trusted(m, DimFactorization::bipartite(da, db, "A", "B"));
    let alices: Vec<&QuantumChannel> = branches.iter().map(|(_, _, p)| &p.alice).collect();
    let bobs: Vec<&QuantumChannel> = branches.iter().map(|(_, _, p)| &p.bob).collect();
    Ok(LoseReduction { state, alice: controlled(&alices, x0, ea)?, bob: controlled(&bobs, y0, eb)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::{behavior_from_prelocc, hidden_nonlocality_protocol, hidden_nonlocality_state, Behavior};
    use crate::behaviors::{Instrument, Party, ProtocolNode, SettingsByTranscript};
    use crate::quantum::{random_channel, Povm};

    fn inf() -> Delay {
        Delay::INFINITE
    }

    #[test]
    fn form_truth_table() {
        use SuperprocessForm::*;
        let d = |x: f64| Delay::new(x).unwrap();
        assert!(form_allowed(Losr, d(0.0), d(0.0)));
        assert!(form_allowed(PreLocc, d(0.0), d(0.0)));
        assert!(!form_allowed(Losr, d(5.0), d(0.0)));
        assert!(form_allowed(PreLocc, d(5.0), d(0.0)));
        assert!(!form_allowed(General, d(5.0), d(0.0)));
        assert!(form_allowed(General, d(1.0), inf()));
        assert!(!form_allowed(PreLocc, d(1.0), d(2.0)));
    }

    #[test]
    fn identity_superprocess_is_neutral() {
        let (i, o) = bipartite_io(2, 2, 2, 2);
        let ch = random_channel(&[2, 2], &[2, 2], 9).unwrap().relabel(i, o).unwrap();
        let p = Process::quantum(ch, Delay::new(2.0).unwrap()).unwrap();
        let out = apply_superprocess(&Superprocess::identity([2, 2, 2, 2]), &p).unwrap();
        assert_eq!(out.delay(), p.delay());
        let diff = tensor::max_abs_diff(out.channel().to_quantum().choi(), p.channel().to_quantum().choi());
        assert!(diff < 1e-12, "{diff}");
        let b = Process::classical(Behavior::pr_box(), Delay::INSTANT);
        let out = apply_superprocess(&Superprocess::identity([2, 2, 2, 2]), &b).unwrap();
        assert_eq!(out.channel(), b.channel());
    }

    #[test]
    fn general_delays_add() {
        let (i, o) = bipartite_io(2, 1, 2, 1);
        let p = Process::quantum(QuantumChannel::identity_between(i.clone(), o.clone()).unwrap(), Delay::new(2.0).unwrap())
            .unwrap();
        let sp = Superprocess::General(GeneralStage {
            pre: QuantumChannel::identity_between(i.clone(), DimFactorization::single(2)).unwrap(),
            post: QuantumChannel::identity_between(DimFactorization::single(2), o).unwrap(),
            memory: 1,
            pre_delay: Delay::new(1.0).unwrap(),
            post_delay: Delay::new(3.0).unwrap(),
        });
        assert_eq!(apply_superprocess(&sp, &p).unwrap().delay().value(), 6.0);
    }

    fn settings(povms: &[Povm]) -> QuantumChannel {
        QuantumChannel::measure_with_settings(povms).unwrap()
    }

    #[test]
    fn prelocc_on_state_source_matches_born_behavior() {
        let rho = hidden_nonlocality_state(0.9, 0.2).unwrap();
        let (i, o) = bipartite_io(1, 1, 2, 2);
        let source = Process::quantum(QuantumChannel::replacement(i, &rho).relabel(bipartite_io(1, 1, 2, 2).0, o).unwrap(), Delay::INSTANT)
            .unwrap();
        let protocol = hidden_nonlocality_protocol(0.2).unwrap();
        let (a, b) = crate::behaviors::optimal_chsh_measurements();
        let sp = Superprocess::PreLocc(PreLoccStage {
            alice_preparation: DensityMatrix::maximally_mixed(DimFactorization::single(1)),
            bob_preparation: DensityMatrix::maximally_mixed(DimFactorization::single(1)),
            alice_memory: 1,
            bob_memory: 1,
            protocol: protocol.clone(),
            posts: vec![TranscriptPost { transcript: vec![], alice: settings(&a), bob: settings(&b) }],
        });
        let out = apply_superprocess(&sp, &source).unwrap();
        assert!(out.is_instantaneous());
        let ProcessChannel::Classical(got) = out.channel() else { panic!("expected classical output") };
        let mut sa = SettingsByTranscript::new();
        sa.insert(vec![], a);
        let mut sb = SettingsByTranscript::new();
        sb.insert(vec![], b);
        let want = behavior_from_prelocc(&rho, &protocol, &sa, &sb).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-9);

        let red = lose_reduction(&sp, &source).unwrap();
        let again = lose_construct(&red.state, &red.alice, &red.bob).unwrap();
        let ProcessChannel::Classical(again) = again.channel() else { panic!("expected classical output") };
        assert!(again.max_abs_diff(&want) < 1e-9);
    }

    #[test]
    fn teleported_entanglement_through_delayed_identity() {
        // Alice sends half of a maximally entangled pair to Bob ahead of time.
        let (i, o) = bipartite_io(2, 1, 1, 2);
        let wire = Process::quantum(QuantumChannel::identity_between(i, o).unwrap(), Delay::new(4.0).unwrap()).unwrap();
        let (a, b) = crate::behaviors::optimal_chsh_measurements();
        let sp = Superprocess::PreLocc(PreLoccStage {
            alice_preparation: DensityMatrix::phi_plus(),
            bob_preparation: DensityMatrix::maximally_mixed(DimFactorization::single(1)),
            alice_memory: 2,
            bob_memory: 1,
            protocol: PreLoccProtocol::empty(),
            posts: vec![TranscriptPost { transcript: vec![], alice: settings(&a), bob: settings(&b) }],
        });
        let out = apply_superprocess(&sp, &wire).unwrap();
        let ProcessChannel::Classical(beh) = out.channel() else { panic!("expected classical output") };
        assert!((crate::behaviors::chsh_value(beh).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!(form_allowed(sp.form(), wire.delay(), out.delay()));
    }

    #[test]
    fn lose_with_product_state_carries_decomposition() {
        let omega = crate::quantum::random_state(&[2], 3).unwrap().tensor(&crate::quantum::random_state(&[2], 4).unwrap());
        let la = random_channel(&[4], &[2], 5).unwrap();
        let lb = random_channel(&[4], &[2], 6).unwrap();
        let p = lose_construct(&omega, &la, &lb).unwrap();
        assert!(p.decomposition().is_some());
        assert_eq!(p.channel().signalling().unwrap(), (false, false));
    }

    #[test]
    fn losr_superprocess_propagates_decomposition() {
        let omega = crate::quantum::random_state(&[2], 3).unwrap().tensor(&crate::quantum::random_state(&[2], 4).unwrap());
        let p = lose_construct(&omega, &random_channel(&[4], &[2], 5).unwrap(), &random_channel(&[4], &[2], 6).unwrap())
            .unwrap();
        let comb = |s: u64| {
            LocalComb::new(random_channel(&[2], &[4], s).unwrap(), random_channel(&[4], &[3], s + 1).unwrap(), 2).unwrap()
        };
        let sp = Superprocess::Losr {
            components: vec![
                CombComponent { weight: 0.3, alice: comb(10), bob: comb(20) },
                CombComponent { weight: 0.7, alice: comb(30), bob: comb(40) },
            ],
        };
        let out = apply_superprocess(&sp, &p).unwrap();
        assert!(out.decomposition().is_some());
        assert_eq!(out.bipartite_dims(), [2, 2, 3, 3]);
    }

    #[test]
    fn superprocess_json_round_trip() {
        let sp = Superprocess::identity([2, 2, 2, 2]);
        let text = serde_json::to_string(&sp).unwrap();
        assert!(text.contains("\"form\":\"losr\""));
        let back: Superprocess = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sp);
        let _ = (Instrument::reset(2), Party::A, ProtocolNode::leaf(Party::B, Instrument::reset(2)));
    }
}
