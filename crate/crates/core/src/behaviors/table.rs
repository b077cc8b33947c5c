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
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{bipartite_io, QuantumChannel};
use crate::tensor::{ComplexMatrix, ComplexVector};
use crate::tol;
use num_complex::Complex64;

/// Maximum number of deterministic vertices that may be enumerated.
pub const VERTEX_LIMIT: u128 = 1_000_000;

/// Input and output alphabet sizes of a two-party Bell scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct Scenario {
    pub nx0: usize,
    pub ny0: usize,
    pub nx1: usize,
    pub ny1: usize,
}

#[derive(Deserialize)]
struct RawScenario {
    nx0: usize,
    ny0: usize,
    nx1: usize,
    ny1: usize,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;

    fn try_from(r: RawScenario) -> Result<Self> {
        Scenario::new(r.nx0, r.ny0, r.nx1, r.ny1)
    }
}

impl Scenario {
    pub fn new(nx0: usize, ny0: usize, nx1: usize, ny1: usize) -> Result<Self> {
        if nx0 == 0 || ny0 == 0 || nx1 == 0 || ny1 == 0 {
            return Err(Error::InvalidScenario(format!(
                "alphabet sizes ({nx0}, {ny0}, {nx1}, {ny1}) must all be at least 1"
            )));
        }
        Ok(Self { nx0, ny0, nx1, ny1 })
    }

    /// Two binary inputs and two binary outputs per party.
    pub const fn chsh() -> Self {
        Self { nx0: 2, ny0: 2, nx1: 2, ny1: 2 }
    }

    pub fn is_chsh(&self) -> bool {
        *self == Self::chsh()
    }

    /// Number of table entries.
    pub fn len(&self) -> usize {
        self.nx0 * self.ny0 * self.nx1 * self.ny1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> usize {
        ((x0 * self.ny0 + y0) * self.nx1 + x1) * self.ny1 + y1
    }

    /// `(x0, y0, x1, y1)` of a flat table index.
    pub fn describe(&self, k: usize) -> String {
        let y1 = k % self.ny1;
        let x1 = (k / self.ny1) % self.nx1;
        let y0 = (k / (self.ny1 * self.nx1)) % self.ny0;
        let x0 = k / (self.ny1 * self.nx1 * self.ny0);
        format!("(x0={x0}, y0={y0}, x1={x1}, y1={y1})")
    }

    /// `nx1^nx0 * ny1^ny0`, saturating.
    pub fn vertex_count(&self) -> u128 {
        self.alice_strategy_count().saturating_mul(self.bob_strategy_count())
    }

    pub(crate) fn alice_strategy_count(&self) -> u128 {
        saturating_pow(self.nx1, self.nx0)
    }

    pub(crate) fn bob_strategy_count(&self) -> u128 {
        saturating_pow(self.ny1, self.ny0)
    }
}

fn saturating_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// All functions `{0..n_in} -> {0..n_out}` in lexicographic order, the
/// first input being most significant.
pub(crate) fn strategies(n_in: usize, n_out: usize) -> Vec<Vec<usize>> {
    let count = saturating_pow(n_out, n_in) as usize;
    (0..count)
        .map(|mut k| {
            let mut s = vec![0; n_in];
            for slot in s.iter_mut().rev() {
                *slot = k % n_out;
                k /= n_out;
            }
            s
        })
        .collect()
}

/// Conditional distribution `p(x1, y1 | x0, y0)`, stored flat in
/// `(x0, y0, x1, y1)` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBehavior", into = "RawBehavior")]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<f64>,
}

pub(crate) type Nested = Vec<Vec<Vec<Vec<f64>>>>;

#[derive(Serialize, Deserialize)]
struct RawBehavior {
    scenario: Scenario,
    table: Nested,
}

impl TryFrom<RawBehavior> for Behavior {
    type Error = Error;

    fn try_from(raw: RawBehavior) -> Result<Self> {
        let flat = unnest(&raw.scenario, raw.table)?;
        Behavior::new(raw.scenario, flat)
    }
}

impl From<Behavior> for RawBehavior {
    fn from(b: Behavior) -> Self {
        RawBehavior { table: nest(&b.scenario, &b.table), scenario: b.scenario }
    }
}

pub(crate) fn nest(s: &Scenario, flat: &[f64]) -> Nested {
    (0..s.nx0)
        .map(|x0| {
            (0..s.ny0)
                .map(|y0| {
                    (0..s.nx1)
                        .map(|x1| (0..s.ny1).map(|y1| flat[s.index(x0, y0, x1, y1)]).collect())
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub(crate) fn unnest(s: &Scenario, nested: Nested) -> Result<Vec<f64>> {
    let shape_err = || {
        Error::InvalidScenario(format!(
            "table shape does not match scenario ({}, {}, {}, {})",
            s.nx0, s.ny0, s.nx1, s.ny1
        ))
    };
    if nested.len() != s.nx0 {
        return Err(shape_err());
    }
    let mut flat = Vec::with_capacity(s.len());
    for a in nested {
        if a.len() != s.ny0 {
            return Err(shape_err());
        }
        for b in a {
            if b.len() != s.nx1 {
                return Err(shape_err());
            }
            for c in b {
                if c.len() != s.ny1 {
                    return Err(shape_err());
                }
                flat.extend(c);
            }
        }
    }
    Ok(flat)
}

impl Behavior {
    /// Validates normalization per input pair; entries in `[-1e-12, 0)` are
    /// clamped to zero.
    pub fn new(scenario: Scenario, mut table: Vec<f64>) -> Result<Self> {
        if table.len() != scenario.len() {
            return Err(Error::InvalidScenario(format!(
                "table has {} entries, scenario needs {}",
                table.len(),
                scenario.len()
            )));
        }
        for (k, p) in table.iter_mut().enumerate() {
            if !p.is_finite() || *p < -tol::CLAMP {
                return Err(Error::NegativeProbability { value: *p, at: scenario.describe(k) });
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let block = scenario.nx1 * scenario.ny1;
        for (k, chunk) in table.chunks(block).enumerate() {
            let total: f64 = chunk.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                let (x0, y0) = (k / scenario.ny0, k % scenario.ny0);
                return Err(Error::NotNormalized(format!(
                    "outputs for inputs ({x0}, {y0}) sum to {total}"
                )));
            }
        }
        Ok(Self { scenario, table })
    }

    pub fn from_fn(scenario: Scenario, f: impl Fn(usize, usize, usize, usize) -> f64) -> Result<Self> {
        let mut table = vec![0.0; scenario.len()];
        for x0 in 0..scenario.nx0 {
            for y0 in 0..scenario.ny0 {
                for x1 in 0..scenario.nx1 {
                    for y1 in 0..scenario.ny1 {
                        table[scenario.index(x0, y0, x1, y1)] = f(x0, y0, x1, y1);
                    }
                }
            }
        }
        Self::new(scenario, table)
    }

    /// Normalizes every input block by its sum before validating.
    pub(crate) fn normalized(scenario: Scenario, mut table: Vec<f64>) -> Result<Self> {
        let block = scenario.nx1 * scenario.ny1;
        for chunk in table.chunks_mut(block) {
            chunk.iter_mut().for_each(|p| {
                if *p < 0.0 && *p >= -tol::CLAMP {
                    *p = 0.0
                }
            });
            let total: f64 = chunk.iter().sum();
            if total > 0.0 {
                chunk.iter_mut().for_each(|p| *p /= total);
            }
        }
        Self::new(scenario, table)
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let p = 1.0 / (scenario.nx1 * scenario.ny1) as f64;
        Self { scenario, table: vec![p; scenario.len()] }
    }

    /// Deterministic product strategy `x1 = a[x0]`, `y1 = b[y0]`.
    pub fn deterministic(scenario: Scenario, a: &[usize], b: &[usize]) -> Result<Self> {
        if a.len() != scenario.nx0 || b.len() != scenario.ny0 {
            return Err(Error::InvalidScenario("strategy length differs from input alphabet".into()));
        }
        if a.iter().any(|&v| v >= scenario.nx1) || b.iter().any(|&v| v >= scenario.ny1) {
            return Err(Error::InvalidScenario("strategy output outside alphabet".into()));
        }
        Self::from_fn(scenario, |x0, y0, x1, y1| f64::from(u8::from(a[x0] == x1 && b[y0] == y1)))
    }

    /// Popescu-Rohrlich box: `x1 ⊕ y1 = x0 y0` with uniform marginals.
    pub fn pr_box() -> Self {
        Self::from_fn(Scenario::chsh(), |x0, y0, x1, y1| if (x1 ^ y1) == (x0 & y0) { 0.5 } else { 0.0 })
            .expect("valid table")
    }

    pub fn mixture(weights: &[f64], behaviors: &[Behavior]) -> Result<Self> {
        let first = behaviors
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        if weights.len() != behaviors.len() {
            return Err(Error::InvalidArgument("weights and behaviors differ in length".into()));
        }
        let mut table = vec![0.0; first.table.len()];
        for (w, b) in weights.iter().zip(behaviors) {
            if b.scenario != first.scenario {
                return Err(Error::WrongScenario("mixture components differ in scenario".into()));
            }
            for (t, p) in table.iter_mut().zip(&b.table) {
                *t += w * p;
            }
        }
        Self::new(first.scenario, table)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn p(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        self.table[self.scenario.index(x0, y0, x1, y1)]
    }

    /// `sum (-1)^(x1 ⊕ y1) p` for binary outputs.
    pub fn correlator(&self, x0: usize, y0: usize) -> f64 {
        let mut e = 0.0;
        for x1 in 0..self.scenario.nx1 {
            for y1 in 0..self.scenario.ny1 {
                let sign = if (x1 ^ y1) & 1 == 0 { 1.0 } else { -1.0 };
                e += sign * self.p(x0, y0, x1, y1);
            }
        }
        e
    }

    pub fn alice_marginal(&self, x0: usize, y0: usize) -> Vec<f64> {
        (0..self.scenario.nx1)
            .map(|x1| (0..self.scenario.ny1).map(|y1| self.p(x0, y0, x1, y1)).sum())
            .collect()
    }

    pub fn bob_marginal(&self, x0: usize, y0: usize) -> Vec<f64> {
        (0..self.scenario.ny1)
            .map(|y1| (0..self.scenario.nx1).map(|x1| self.p(x0, y0, x1, y1)).sum())
            .collect()
    }

    /// `(a_to_b, b_to_a)` signalling of the classical table within `tol`.
    pub fn signalling(&self, tol: f64) -> (bool, bool) {
        let s = self.scenario;
        let differs = |u: &[f64], v: &[f64]| u.iter().zip(v).any(|(a, b)| (a - b).abs() > tol);
        let mut a_to_b = false;
        let mut b_to_a = false;
        for y0 in 0..s.ny0 {
            let base = self.bob_marginal(0, y0);
            a_to_b |= (1..s.nx0).any(|x0| differs(&base, &self.bob_marginal(x0, y0)));
        }
        for x0 in 0..s.nx0 {
            let base = self.alice_marginal(x0, 0);
            b_to_a |= (1..s.ny0).any(|y0| differs(&base, &self.alice_marginal(x0, y0)));
        }
        (a_to_b, b_to_a)
    }

    pub fn max_abs_diff(&self, other: &Behavior) -> f64 {
        if self.scenario != other.scenario {
            return f64::INFINITY;
        }
        self.table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Classical channel `(A0, B0) -> (A1, B1)` with diagonal Choi matrix
    /// `sum p(x1 y1|x0 y0) |x0 y0><x0 y0| ⊗ |x1 y1><x1 y1|`.
    pub fn to_channel(&self) -> QuantumChannel {
        let s = self.scenario;
        let (din, dout) = (s.nx0 * s.ny0, s.nx1 * s.ny1);
        let mut choi = ComplexMatrix::zeros(din * dout, din * dout);
        for (k, p) in self.table.iter().enumerate() {
            choi[(k, k)] = Complex64::new(*p, 0.0);
        }
        let (i, o) = bipartite_io(s.nx0, s.ny0, s.nx1, s.ny1);
        QuantumChannel::from_choi_trusted(choi, i, o)
    }

    /// Reads a classical table from a channel whose Choi matrix is diagonal.
    pub fn from_channel(channel: &QuantumChannel) -> Result<Self> {
        let [a0, b0, a1, b1] = channel.bipartite_dims()?;
        let off = channel.off_diagonal_weight();
        if off > tol::CPTP {
            return Err(Error::OutputNotClassical(off));
        }
        let scenario = Scenario::new(a0, b0, a1, b1)?;
        let table = (0..scenario.len()).map(|k| channel.choi()[(k, k)].re).collect();
        Self::normalized(scenario, table)
    }

    /// Outcome distribution for inputs `(x0, y0)`, indexed by `x1 * ny1 + y1`.
    pub fn block(&self, x0: usize, y0: usize) -> &[f64] {
        let n = self.scenario.nx1 * self.scenario.ny1;
        let start = (x0 * self.scenario.ny0 + y0) * n;
        &self.table[start..start + n]
    }
}

/// Linear functional `sum c(x0, y0, x1, y1) p(x1, y1 | x0, y0)` together
/// with its maximum over deterministic local strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFunctional", into = "RawFunctional")]
pub struct BellFunctional {
    scenario: Scenario,
    coefficients: Vec<f64>,
    bound: f64,
}

#[derive(Serialize, Deserialize)]
struct RawFunctional {
    scenario: Scenario,
    coefficients: Nested,
    bound: f64,
}

impl TryFrom<RawFunctional> for BellFunctional {
    type Error = Error;

    fn try_from(raw: RawFunctional) -> Result<Self> {
        let f = BellFunctional::new(raw.scenario, unnest(&raw.scenario, raw.coefficients)?)?;
        if (f.bound - raw.bound).abs() > 1e-9 * (1.0 + f.bound.abs()) {
            return Err(Error::InvalidArgument(format!(
                "stated local bound {} differs from recomputed {}",
                raw.bound, f.bound
            )));
        }
        Ok(f)
    }
}

impl From<BellFunctional> for RawFunctional {
    fn from(f: BellFunctional) -> Self {
        RawFunctional { coefficients: nest(&f.scenario, &f.coefficients), scenario: f.scenario, bound: f.bound }
    }
}

impl BellFunctional {
    /// Computes the local bound by optimizing Bob's response to every
    /// deterministic strategy of the party with fewer strategies.
    pub fn new(scenario: Scenario, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != scenario.len() {
            return Err(Error::InvalidScenario(format!(
                "{} coefficients for a table of {}",
                coefficients.len(),
                scenario.len()
            )));
        }
        let bound = local_bound(&scenario, &coefficients)?;
        Ok(Self { scenario, coefficients, bound })
    }

    /// `E00 + E01 + E10 - E11` with local bound 2.
    pub fn chsh() -> Self {
        let s = Scenario::chsh();
        let mut c = vec![0.0; s.len()];
        for x0 in 0..2 {
            for y0 in 0..2 {
                for x1 in 0..2 {
                    for y1 in 0..2 {
                        let parity = if x1 ^ y1 == 0 { 1.0 } else { -1.0 };
                        let sign = if x0 & y0 == 1 { -1.0 } else { 1.0 };
                        c[s.index(x0, y0, x1, y1)] = sign * parity;
                    }
                }
            }
        }
        Self::new(s, c).expect("valid functional")
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn value(&self, behavior: &Behavior) -> Result<f64> {
        if behavior.scenario != self.scenario {
            return Err(Error::WrongScenario("functional and behavior scenarios differ".into()));
        }
        Ok(self.coefficients.iter().zip(&behavior.table).map(|(c, p)| c * p).sum())
    }

    /// `value - bound`; positive values certify nonlocality.
    pub fn violation(&self, behavior: &Behavior) -> Result<f64> {
        Ok(self.value(behavior)? - self.bound)
    }
}

fn local_bound(s: &Scenario, c: &[f64]) -> Result<f64> {
    let (na, nb) = (s.alice_strategy_count(), s.bob_strategy_count());
    if na.min(nb) > VERTEX_LIMIT {
        return Err(Error::ScenarioTooLarge(na.min(nb)));
    }
    let mut best = f64::NEG_INFINITY;
    if na <= nb {
        for a in strategies(s.nx0, s.nx1) {
            let mut total = 0.0;
            for y0 in 0..s.ny0 {
                let mut m = f64::NEG_INFINITY;
                for y1 in 0..s.ny1 {
                    let v: f64 = (0..s.nx0).map(|x0| c[s.index(x0, y0, a[x0], y1)]).sum();
                    m = m.max(v);
                }
                total += m;
            }
            best = best.max(total);
        }
    } else {
        for b in strategies(s.ny0, s.ny1) {
            let mut total = 0.0;
            for x0 in 0..s.nx0 {
                let mut m = f64::NEG_INFINITY;
                for x1 in 0..s.nx1 {
                    let v: f64 = (0..s.ny0).map(|y0| c[s.index(x0, y0, x1, b[y0])]).sum();
                    m = m.max(v);
                }
                total += m;
            }
            best = best.max(total);
        }
    }
    Ok(best)
}

/// All deterministic local behaviors; Alice's strategy varies slowest.
pub fn enumerate_local_vertices(scenario: &Scenario) -> Result<Vec<Behavior>> {
    let count = scenario.vertex_count();
    if count > VERTEX_LIMIT {
        return Err(Error::ScenarioTooLarge(count));
    }
    let bobs = strategies(scenario.ny0, scenario.ny1);
    let mut out = Vec::with_capacity(count as usize);
    for a in strategies(scenario.nx0, scenario.nx1) {
        for b in &bobs {
            out.push(Behavior::deterministic(*scenario, &a, b)?);
        }
    }
    Ok(out)
}

/// Complex vector with the given real amplitudes.
pub(crate) fn real_vector(values: &[f64]) -> ComplexVector {
    ComplexVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)))
}
