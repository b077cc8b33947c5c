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

//! Lower bounds on the largest relative entropy of nonlocality reachable
//! from a bipartite state by local measurements, optionally preceded by one
//! round of local filtering.
//!
//! The search is a seesaw: for fixed settings the inner problem is solved
//! for the closest local model and the optimal input weights; these give the
//! gradient of the measure with respect to the behavior, which is pulled
//! back to the measurement (and filter) parameters. A step is kept only when
//! the re-solved measure increases. Every candidate is finally re-evaluated
//! with the full two-solver method and the largest value is returned.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::relent::{rel_entropy_nonlocality, solve_warm, MeasureResult, Problem, SolverConfig};
use crate::behaviors::{horodecki_measurements, Behavior, Scenario};
use crate::error::{Error, Result};
use crate::quantum::random::rng;
use crate::quantum::{DensityMatrix, Povm};
use crate::tensor::{self, ComplexMatrix, DimFactorization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtensionConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Ascent steps per restart.
    pub outer_iterations: usize,
    /// Adds one round of local filters before the measurements.
    pub filter: bool,
    /// Configuration of the final full evaluations.
    pub solver: SolverConfig,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        Self { restarts: 16, seed: 0, outer_iterations: 30, filter: false, solver: SolverConfig::default() }
    }
}

/// Filters `F_A`, `F_B` (largest singular value 1) applied before measuring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterPair {
    #[serde(with = "crate::json::matrix")]
    pub alice: ComplexMatrix,
    #[serde(with = "crate::json::matrix")]
    pub bob: ComplexMatrix,
    pub success_probability: f64,
}

/// Best point found: its measure, behavior and the settings producing it.
/// Runs where a filter fails output `(0, 0)` on every input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub result: MeasureResult,
    pub behavior: Behavior,
    pub alice_settings: Vec<Povm>,
    pub bob_settings: Vec<Povm>,
    pub filter: Option<FilterPair>,
}

/// Real parameters of every operator, laid out as consecutive blocks.
#[derive(Debug, Clone)]
struct Layout {
    da: usize,
    db: usize,
    s: Scenario,
    filter: bool,
}

impl Layout {
    fn alice_ops(&self) -> usize {
        self.s.nx0 * self.s.nx1
    }

    fn bob_ops(&self) -> usize {
        self.s.ny0 * self.s.ny1
    }

    fn len(&self) -> usize {
        let meas = 2 * (self.alice_ops() * self.da * self.da + self.bob_ops() * self.db * self.db);
        let filt = if self.filter { 2 * (self.da * self.da + self.db * self.db) } else { 0 };
        meas + filt
    }

    fn read(params: &[f64], at: &mut usize, d: usize) -> ComplexMatrix {
        let m = ComplexMatrix::from_fn(d, d, |r, c| {
            let k = *at + 2 * (r * d + c);
            Complex64::new(params[k], params[k + 1])
        });
        *at += 2 * d * d;
        m
    }

    fn write(params: &mut Vec<f64>, m: &ComplexMatrix) {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                params.push(m[(r, c)].re);
                params.push(m[(r, c)].im);
            }
        }
    }

    fn decode(&self, params: &[f64]) -> Decoded {
        let mut at = 0;
        let mut povms = |n_in: usize, n_out: usize, d: usize| -> Vec<Vec<ComplexMatrix>> {
            (0..n_in)
                .map(|_| {
                    let ops: Vec<ComplexMatrix> = (0..n_out).map(|_| Self::read(params, &mut at, d)).collect();
                    normalize_effects(&ops)
                })
                .collect()
        };
        let alice = povms(self.s.nx0, self.s.nx1, self.da);
        let bob = povms(self.s.ny0, self.s.ny1, self.db);
        let filters = self.filter.then(|| {
            let fa = contraction(&Self::read(params, &mut at, self.da));
            let fb = contraction(&Self::read(params, &mut at, self.db));
            (fa, fb)
        });
        Decoded { alice, bob, filters }
    }
}

struct Decoded {
    alice: Vec<Vec<ComplexMatrix>>,
    bob: Vec<Vec<ComplexMatrix>>,
    filters: Option<(ComplexMatrix, ComplexMatrix)>,
}

/// `S^{-1/2} A_k† A_k S^{-1/2}` with `S = sum_k A_k† A_k`.
fn normalize_effects(ops: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let d = ops[0].nrows();
    let s = ops.iter().fold(ComplexMatrix::zeros(d, d), |acc, a| acc + a.adjoint() * a);
    let w = tensor::inv_sqrt_psd(&s, 1e-300);
    ops.iter().map(|a| &w * a.adjoint() * a * &w).collect()
}

/// `B / σ_max(B)`.
fn contraction(b: &ComplexMatrix) -> ComplexMatrix {
    let gram = b.adjoint() * b;
    let top = tensor::eig_hermitian_unchecked(&gram).0.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return ComplexMatrix::identity(b.nrows(), b.ncols());
    }
    b.unscale(top.sqrt())
}

/// Unnormalized Born table of `rho` (already filtered) plus the failure
/// weight placed on outcome `(0, 0)`.
fn table(rho: &ComplexMatrix, da: usize, db: usize, s: &Scenario, dec: &Decoded) -> Vec<f64> {
    let (rho, fail) = match &dec.filters {
        Some((fa, fb)) => {
            let f = tensor::tensor(fa, fb);
            let r = &f * rho * f.adjoint();
            let ps = tensor::trace(&r).re;
            (r, (1.0 - ps).max(0.0))
        }
        None => (rho.clone(), 0.0),
    };
    let mut out = vec![0.0; s.len()];
    for x0 in 0..s.nx0 {
        for (x1, a) in dec.alice[x0].iter().enumerate() {
            // Bob's conditional operator Tr_A[(A ⊗ I) rho].
            let mut rb = ComplexMatrix::zeros(db, db);
            for i in 0..da {
                for j in 0..da {
                    let aji = a[(j, i)];
                    if aji.norm_sqr() == 0.0 {
                        continue;
                    }
                    for b in 0..db {
                        for b2 in 0..db {
                            rb[(b, b2)] += aji * rho[(i * db + b, j * db + b2)];
                        }
                    }
                }
            }
            for y0 in 0..s.ny0 {
                for (y1, bop) in dec.bob[y0].iter().enumerate() {
                    out[s.index(x0, y0, x1, y1)] = tensor::trace_of_product(bop, &rb).re;
                }
            }
        }
    }
    if fail > 0.0 {
        for x0 in 0..s.nx0 {
            for y0 in 0..s.ny0 {
                out[s.index(x0, y0, 0, 0)] += fail;
            }
        }
    }
    out
}

struct Point {
    params: Vec<f64>,
    value: f64,
    warm: Vec<f64>,
    lambda: Vec<f64>,
    q: Vec<Vec<f64>>,
    behavior: Behavior,
}

const QUICK_CAP: usize = 4000;

struct Seesaw<'a> {
    rho: &'a ComplexMatrix,
    layout: Layout,
}

impl Seesaw<'_> {
    fn behavior(&self, params: &[f64]) -> Result<Behavior> {
        let dec = self.layout.decode(params);
        let t = table(self.rho, self.layout.da, self.layout.db, &self.layout.s, &dec);
        Behavior::normalized(self.layout.s, t)
    }

    fn point(&self, params: Vec<f64>, warm: Option<&[f64]>) -> Result<Point> {
        let behavior = self.behavior(&params)?;
        let pr = Problem::new(&behavior)?;
        let sol = solve_warm(&pr, warm, QUICK_CAP)?;
        Ok(Point { params, value: sol.value, warm: sol.w, lambda: sol.lambda, q: sol.q, behavior })
    }

    /// `dE/dp_i(o) = λ_i (log2(p_i(o) / q_i(o)) + 1 / ln 2)`, flattened in
    /// table order.
    fn behavior_gradient(&self, pt: &Point) -> Vec<f64> {
        let s = &self.layout.s;
        let n_out = s.nx1 * s.ny1;
        let table = pt.behavior.table();
        (0..s.len())
            .map(|k| {
                let (i, o) = (k / n_out, k % n_out);
                let p = table[k].max(1e-15);
                let q = pt.q[i][o].max(1e-15);
                pt.lambda[i] * ((p / q).log2() + 1.0 / LN_2)
            })
            .collect()
    }

    /// Central differences of the linearized objective.
    fn ascent_direction(&self, pt: &Point, skip_measurements: bool) -> Vec<f64> {
        let g = self.behavior_gradient(pt);
        let surrogate = |params: &[f64]| -> f64 {
            let dec = self.layout.decode(params);
            let t = table(self.rho, self.layout.da, self.layout.db, &self.layout.s, &dec);
            t.iter().zip(&g).map(|(a, b)| a * b).sum()
        };
        let n = self.layout.len();
        let first = if skip_measurements { n - 2 * (self.layout.da.pow(2) + self.layout.db.pow(2)) } else { 0 };
        let h = 1e-6;
        let mut dir = vec![0.0; n];
        let mut probe = pt.params.clone();
        for k in first..n {
            let orig = probe[k];
            probe[k] = orig + h;
            let up = surrogate(&probe);
            probe[k] = orig - h;
            let down = surrogate(&probe);
            probe[k] = orig;
            dir[k] = (up - down) / (2.0 * h);
        }
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            dir.iter_mut().for_each(|x| *x /= norm);
        }
        dir
    }

    fn ascend(&self, start: Point, iterations: usize, filters_only: bool) -> Result<(Point, usize)> {
        let mut cur = start;
        let mut eta = 0.5f64;
        let mut steps = 0;
        for _ in 0..iterations {
            steps += 1;
            let dir = self.ascent_direction(&cur, filters_only);
            if dir.iter().all(|&x| x == 0.0) {
                break;
            }
            let scale = (cur.params.iter().map(|x| x * x).sum::<f64>() / cur.params.len() as f64).sqrt().max(1e-3);
            let mut moved = false;
            while eta >= 1e-4 {
                let cand: Vec<f64> = cur.params.iter().zip(&dir).map(|(p, d)| p + eta * scale * d).collect();
                let next = self.point(cand, Some(&cur.warm))?;
                if next.value > cur.value + 1e-10 {
                    cur = next;
                    eta = (eta * 1.5).min(2.0);
                    moved = true;
                    break;
                }
                eta *= 0.3;
            }
            if !moved {
                break;
            }
        }
        Ok((cur, steps))
    }
}

fn random_params<R: Rng>(layout: &Layout, rng: &mut R) -> Vec<f64> {
    let meas = layout.len() - if layout.filter { 2 * (layout.da.pow(2) + layout.db.pow(2)) } else { 0 };
    let mut p: Vec<f64> = (0..meas).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    if layout.filter {
        Layout::write(&mut p, &ComplexMatrix::identity(layout.da, layout.da));
        Layout::write(&mut p, &ComplexMatrix::identity(layout.db, layout.db));
    }
    p
}

/// Parameters reproducing given POVMs exactly (`A_k = sqrt(M_k)`).
fn params_from_povms(alice: &[Povm], bob: &[Povm]) -> Vec<f64> {
    let mut p = Vec::new();
    for povm in alice.iter().chain(bob) {
        for e in povm.effects() {
            Layout::write(&mut p, &tensor::hermitian_fn(e, |x| x.max(0.0).sqrt()));
        }
    }
    p
}

fn with_identity_filters(mut p: Vec<f64>, layout: &Layout) -> Vec<f64> {
    Layout::write(&mut p, &ComplexMatrix::identity(layout.da, layout.da));
    Layout::write(&mut p, &ComplexMatrix::identity(layout.db, layout.db));
    p
}

fn to_povms(effects: &[Vec<ComplexMatrix>], d: usize) -> Result<Vec<Povm>> {
    effects.iter().map(|e| Povm::new(e.clone(), DimFactorization::single(d))).collect()
}

/// Lower bound on the minimal extension of the relative entropy of
/// nonlocality for a bipartite state, over measurement settings in
/// `scenario` (inputs and outcomes per party).
pub fn minimal_extension_state(state: &DensityMatrix, scenario: &Scenario, config: &ExtensionConfig) -> Result<MeasureResult> {
    Ok(minimal_extension_report(state, scenario, config)?.result)
}

/// As [`minimal_extension_state`], also returning the optimal settings.
pub fn minimal_extension_report(
    state: &DensityMatrix,
    scenario: &Scenario,
    config: &ExtensionConfig,
) -> Result<ExtensionReport> {
    let dims = state.dims().dims();
    if dims.len() != 2 {
        return Err(Error::MissingBipartiteLabels("state must have two factors".into()));
    }
    let (da, db) = (dims[0], dims[1]);
    if da > 4 || db > 4 {
        return Err(Error::InvalidDims(format!("local dimensions {da}x{db} exceed 4")));
    }
    let rho = state.matrix();
    let plain = Seesaw { rho, layout: Layout { da, db, s: *scenario, filter: false } };
    let filtered = Seesaw { rho, layout: Layout { da, db, s: *scenario, filter: true } };

    let seed_point = if (da, db) == (2, 2) && scenario.is_chsh() {
        let (a, b) = horodecki_measurements(state)?;
        Some(params_from_povms(&a, &b))
    } else {
        None
    };

    let restarts = config.restarts.max(1);
    let run = |k: usize| -> Result<(Vec<(Point, bool)>, usize)> {
        let mut r = rng(config.seed.wrapping_add(0x5851_f42d_4c95_7f2d_u64.wrapping_mul(k as u64 + 1)));
        let start = match (&seed_point, k) {
            (Some(p), 0) => p.clone(),
            _ => random_params(&plain.layout, &mut r),
        };
        let first = plain.point(start, None)?;
        let (best, mut steps) = plain.ascend(first, config.outer_iterations, false)?;
        let mut out = vec![(best, false)];
        if config.filter {
            let lifted = with_identity_filters(out[0].0.params.clone(), &filtered.layout);
            let p = filtered.point(lifted, Some(&out[0].0.warm))?;
            let (p, s1) = filtered.ascend(p, config.outer_iterations, true)?;
            let (p, s2) = filtered.ascend(p, config.outer_iterations, false)?;
            steps += s1 + s2;
            out.push((p, true));
        }
        Ok((out, steps))
    };

    let results: Vec<Result<(Vec<(Point, bool)>, usize)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..restarts).map(|k| scope.spawn(move || run(k))).collect();
        handles.into_iter().map(|h| h.join().expect("seesaw restart panicked")).collect()
    });

    let mut candidates: Vec<(Point, bool)> = Vec::new();
    let mut iterations = 0;
    for r in results {
        let (pts, steps) = r?;
        iterations += steps;
        candidates.extend(pts);
    }
    if let Some(p) = &seed_point {
        candidates.push((plain.point(p.clone(), None)?, false));
    }
    // Stable order: quick value descending, then restart order.
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[b].0.value.total_cmp(&candidates[a].0.value));
    let mut chosen: Vec<usize> = order.into_iter().take(3).collect();
    if seed_point.is_some() && !chosen.contains(&(candidates.len() - 1)) {
        chosen.push(candidates.len() - 1);
    }

    let mut best: Option<(MeasureResult, usize)> = None;
    for &c in &chosen {
        let res = rel_entropy_nonlocality(&candidates[c].0.behavior, &config.solver)?;
        if best.as_ref().map_or(true, |(b, _)| res.value > b.value) {
            best = Some((res, c));
        }
    }
    let (mut result, c) = best.expect("at least one candidate");
    result.iterations += iterations;
    let (point, is_filtered) = &candidates[c];
    let layout = if *is_filtered { &filtered.layout } else { &plain.layout };
    let dec = layout.decode(&point.params);
    let filter = dec.filters.as_ref().map(|(fa, fb)| {
        let f = tensor::tensor(fa, fb);
        FilterPair {
            alice: fa.clone(),
            bob: fb.clone(),
            success_probability: tensor::trace(&(&f * rho * f.adjoint())).re,
        }
    });
    Ok(ExtensionReport {
        result,
        behavior: point.behavior.clone(),
        alice_settings: to_povms(&dec.alice, da)?,
        bob_settings: to_povms(&dec.bob, db)?,
        filter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::tsirelson_behavior;

    fn quick(filter: bool) -> ExtensionConfig {
        ExtensionConfig { restarts: 4, outer_iterations: 15, filter, ..Default::default() }
    }

    #[test]
    fn phi_plus_reaches_the_tsirelson_point() {
        let r = minimal_extension_state(&DensityMatrix::phi_plus(), &Scenario::chsh(), &quick(false)).unwrap();
        let t = rel_entropy_nonlocality(&tsirelson_behavior(), &SolverConfig::default()).unwrap();
        assert!(r.value >= t.value - 1e-6, "{} < {}", r.value, t.value);
    }

    #[test]
    fn product_state_gives_zero() {
        let rho = crate::quantum::random_state(&[2], 1).unwrap().tensor(&crate::quantum::random_state(&[2], 2).unwrap());
        let r = minimal_extension_state(&rho, &Scenario::chsh(), &quick(false)).unwrap();
        assert!(r.value < 1e-6, "{}", r.value);
    }

    #[test]
    fn settings_reproduce_the_reported_behavior() {
        let rho = crate::quantum::random_state(&[2, 2], 4).unwrap();
        let rep = minimal_extension_report(&rho, &Scenario::chsh(), &quick(false)).unwrap();
        let b = crate::behaviors::behavior_from_state(&rho, &rep.alice_settings, &rep.bob_settings).unwrap();
        assert!(b.max_abs_diff(&rep.behavior) < 1e-9);
    }
}
