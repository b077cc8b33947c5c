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
//! Relative entropy of nonlocality: `min_{q local} max_{x0, y0} D(p || q)`.
//!
//! The primary solver is an accelerated projected gradient method on a
//! log-sum-exp smoothing of the max, with geometric temperature
//! continuation. An entropic mirror-descent variant with independent random
//! starts cross-checks it, and tangent planes of the convex objective give a
//! rigorous lower bound through a small matrix-game LP.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::barrier::{dual_bound, polish};
use super::divergence::kl_bits;
use crate::behaviors::lp::solve_matrix_game;
use crate::behaviors::{Behavior, VERTEX_LIMIT};
use crate::error::{Error, Result};
use crate::quantum::random::rng;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Independent starts per solver.
    pub restarts: usize,
    pub seed: u64,
    /// Iteration cap per start.
    pub max_iterations: usize,
    /// Upper minus lower bound below which the result counts as converged.
    pub gap_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { restarts: 4, seed: 0, max_iterations: 100_000, gap_tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub lower_bound: f64,
    /// `value - lower_bound`, never negative.
    pub gap: f64,
    /// Difference between the best values of the two solvers.
    pub solver_disagreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    /// Bits; never negative.
    pub value: f64,
    /// Weights over the deterministic vertices of the optimal local model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmin_weights: Option<Vec<f64>>,
    pub certificate: GapCertificate,
    pub iterations: usize,
    pub converged: bool,
}

/// Behavior data laid out for the solvers.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    /// Outcome distribution per input pair.
    pub(super) blocks: Vec<Vec<f64>>,
    /// `outcome[v][i]`: outcome index produced by vertex `v` on input `i`.
    pub(super) outcome: Vec<Vec<usize>>,
    pub(super) n_out: usize,
}

pub(crate) struct Evaluation {
    pub q: Vec<Vec<f64>>,
    pub divergences: Vec<f64>,
}

impl Problem {
    pub(crate) fn new(b: &Behavior) -> Result<Self> {
        let s = *b.scenario();
        let count = s.vertex_count();
        if count > VERTEX_LIMIT {
            return Err(Error::ScenarioTooLarge(count));
        }
        let alices = crate::behaviors::table_strategies(s.nx0, s.nx1);
        let bobs = crate::behaviors::table_strategies(s.ny0, s.ny1);
        let mut outcome = Vec::with_capacity(count as usize);
        for a in &alices {
            for bb in &bobs {
                let mut row = Vec::with_capacity(s.nx0 * s.ny0);
                for x0 in 0..s.nx0 {
                    for y0 in 0..s.ny0 {
                        row.push(a[x0] * s.ny1 + bb[y0]);
                    }
                }
                outcome.push(row);
            }
        }
        let mut blocks = Vec::with_capacity(s.nx0 * s.ny0);
        for x0 in 0..s.nx0 {
            for y0 in 0..s.ny0 {
                blocks.push(b.block(x0, y0).to_vec());
            }
        }
        Ok(Self { blocks, outcome, n_out: s.nx1 * s.ny1 })
    }

    pub(crate) fn n_vertices(&self) -> usize {
        self.outcome.len()
    }

    pub(crate) fn n_inputs(&self) -> usize {
        self.blocks.len()
    }

    fn mixture(&self, w: &[f64]) -> Vec<Vec<f64>> {
        let mut q = vec![vec![0.0; self.n_out]; self.blocks.len()];
        for (v, wv) in w.iter().enumerate() {
            for (i, &o) in self.outcome[v].iter().enumerate() {
                q[i][o] += wv;
            }
        }
        q
    }

    pub(crate) fn evaluate(&self, w: &[f64]) -> Evaluation {
        let q = self.mixture(w);
        let divergences = self.blocks.iter().zip(&q).map(|(p, qi)| kl_bits(p, qi)).collect();
        Evaluation { q, divergences }
    }

    pub(crate) fn value(&self, w: &[f64]) -> f64 {
        self.evaluate(w).divergences.into_iter().fold(0.0, f64::max)
    }

    /// `d D_i / d w_v = -p_i(o_v) / (q_i(o_v) ln 2)`.
    fn gradient_of(&self, i: usize, q: &[Vec<f64>]) -> Vec<f64> {
        self.outcome
            .iter()
            .map(|row| {
                let o = row[i];
                let p = self.blocks[i][o];
                if p > 0.0 {
                    -p / (q[i][o] * LN_2)
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `tau ln sum_i exp(D_i / tau)` and its gradient.
    fn smoothed(&self, w: &[f64], tau: f64) -> (f64, Vec<f64>) {
        let e = self.evaluate(w);
        let top = e.divergences.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return (f64::INFINITY, vec![0.0; w.len()]);
        }
        let weights: Vec<f64> = e.divergences.iter().map(|d| ((d - top) / tau).exp()).collect();
        let z: f64 = weights.iter().sum();
        let mut grad = vec![0.0; w.len()];
        for (i, wi) in weights.iter().enumerate() {
            let share = wi / z;
            if share < 1e-300 {
                continue;
            }
            for (g, gi) in grad.iter_mut().zip(self.gradient_of(i, &e.q)) {
                *g += share * gi;
            }
        }
        (top + tau * z.ln(), grad)
    }

    /// Tangent-plane rows `D_i(w) + g_i·(e_v - w)` over all vertices `v`.
    fn cuts(&self, w: &[f64], rows: &mut Vec<(usize, Vec<f64>)>) {
        let e = self.evaluate(w);
        for i in 0..self.n_inputs() {
            if !e.divergences[i].is_finite() {
                continue;
            }
            let g = self.gradient_of(i, &e.q);
            let gw: f64 = g.iter().zip(w).map(|(a, b)| a * b).sum();
            rows.push((i, g.iter().map(|gv| e.divergences[i] + gv - gw).collect()));
        }
    }
}

/// Euclidean projection onto `{w >= floor, sum w = 1}`.
pub(crate) fn project_floored(v: &[f64], floor: f64) -> Vec<f64> {
    let n = v.len();
    let mass = 1.0 - n as f64 * floor;
    let mut sorted: Vec<f64> = v.iter().map(|x| x - floor).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cum += u;
        let t = (cum - mass) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - floor - theta).max(0.0) + floor).collect()
}

fn floor_and_normalize(w: &mut [f64]) {
    w.iter_mut().for_each(|x| *x = x.max(tol::WEIGHT_FLOOR));
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Schedule {
    pub tau0: f64,
    pub factor: f64,
    pub tau_min: f64,
    pub stage_iterations: usize,
}

impl Schedule {
    const PRIMARY: Schedule = Schedule { tau0: 1.0, factor: 0.25, tau_min: 1e-10, stage_iterations: 3000 };
    const SECONDARY: Schedule = Schedule { tau0: 0.5, factor: 0.4, tau_min: 1e-10, stage_iterations: 2500 };
    pub(crate) const WARM: Schedule = Schedule { tau0: 1e-3, factor: 0.1, tau_min: 1e-9, stage_iterations: 600 };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Geometry {
    Euclidean,
    Entropic,
}

pub(crate) struct Run {
    pub w: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Accelerated gradient method with iterates kept as convex combinations,
/// backtracking on the curvature estimate and restart on increase.
fn accelerated(pr: &Problem, start: &[f64], schedule: Schedule, geometry: Geometry, cap: usize) -> Run {
    let mut x = start.to_vec();
    floor_and_normalize(&mut x);
    let mut best_w = x.clone();
    let mut best = pr.value(&x);
    let mut iterations = 0;
    let mut lip = 1.0f64;
    let mut tau = schedule.tau0;
    'stages: while tau >= schedule.tau_min {
        let mut v = x.clone();
        let mut k = 0usize;
        let mut fx = pr.smoothed(&x, tau).0;
        let mut quiet = 0;
        for _ in 0..schedule.stage_iterations {
            if iterations >= cap {
                break 'stages;
            }
            iterations += 1;
            let theta = 2.0 / (k as f64 + 2.0);
            let y: Vec<f64> = x.iter().zip(&v).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
            let (fy, gy) = pr.smoothed(&y, tau);
            let (x_new, f_new, v_new) = loop {
                let step = 1.0 / (theta * lip);
                let v_new = match geometry {
                    Geometry::Euclidean => {
                        let moved: Vec<f64> = v.iter().zip(&gy).map(|(a, g)| a - step * g).collect();
                        project_floored(&moved, tol::WEIGHT_FLOOR)
                    }
                    Geometry::Entropic => {
                        let gmin = gy.iter().copied().fold(f64::INFINITY, f64::min);
                        let mut m: Vec<f64> =
                            v.iter().zip(&gy).map(|(a, g)| a * (-step * (g - gmin)).exp()).collect();
                        floor_and_normalize(&mut m);
                        m
                    }
                };
                let x_new: Vec<f64> = x.iter().zip(&v_new).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
                let f_new = pr.smoothed(&x_new, tau).0;
                let d: Vec<f64> = x_new.iter().zip(&y).map(|(a, b)| a - b).collect();
                let lin: f64 = gy.iter().zip(&d).map(|(g, di)| g * di).sum();
                let sq = match geometry {
                    Geometry::Euclidean => d.iter().map(|t| t * t).sum::<f64>(),
                    Geometry::Entropic => d.iter().map(|t| t.abs()).sum::<f64>().powi(2),
                };
                if f_new <= fy + lin + 0.5 * lip * sq + 1e-15 * fy.abs() || lip > 1e40 {
                    break (x_new, f_new, v_new);
                }
                lip *= 2.0;
            };
            let change = x_new.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if f_new > fx {
                // Momentum restart from the current point.
                v = x.clone();
                k = 0;
                lip *= 2.0;
                continue;
            }
            x = x_new;
            v = v_new;
            fx = f_new;
            k += 1;
            lip *= 0.9;
            let val = pr.value(&x);
            if val < best {
                best = val;
                best_w.clone_from(&x);
            }
            quiet = if change < 1e-15 { quiet + 1 } else { 0 };
            if quiet >= 10 {
                break;
            }
        }
        tau *= schedule.factor;
    }
    Run { w: best_w, value: best, iterations }
}

fn random_simplex_point<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    floor_and_normalize(&mut w);
    w
}

/// Lower bound `min_w max_cuts` and the induced input weights `lambda`.
///
/// Every mixture of cuts bounds the optimum from below, so a failed or
/// inaccurate game LP only loosens the bound: the best single cut is always
/// available, and the LP is retried on near-duplicate-free rows.
pub(crate) fn cut_lower_bound(pr: &Problem, points: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut owner = Vec::new();
    for (k, w) in points.iter().enumerate() {
        pr.cuts(w, &mut rows);
        owner.resize(rows.len(), k);
    }
    if rows.is_empty() {
        return Ok((0.0, vec![1.0 / pr.n_inputs() as f64; pr.n_inputs()]));
    }
    let row_min = |r: &[f64]| r.iter().copied().fold(f64::INFINITY, f64::min);
    let single = (0..rows.len())
        .max_by(|&a, &b| row_min(&rows[a].1).total_cmp(&row_min(&rows[b].1)))
        .expect("rows are nonempty");
    let mut best = (row_min(&rows[single].1), vec![0.0; rows.len()]);
    best.1[single] = 1.0;

    // Nearly parallel cuts make the game LP ill conditioned and add little.
    let mut distinct: Vec<usize> = Vec::new();
    for (k, (_, r)) in rows.iter().enumerate() {
        let scale = 1.0 + r.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let dup = distinct.iter().any(|&j| rows[j].1.iter().zip(r).all(|(a, b)| (a - b).abs() <= 1e-6 * scale));
        if !dup {
            distinct.push(k);
        }
    }
    let try_subset = |subset: &[usize], best: &mut (f64, Vec<f64>)| -> bool {
        let payoff: Vec<Vec<f64>> = subset.iter().map(|&k| rows[k].1.clone()).collect();
        let Ok((value, pi)) = solve_matrix_game(&payoff) else {
            return false;
        };
        if value > best.0 {
            let mut full = vec![0.0; rows.len()];
            for (&k, p) in subset.iter().zip(&pi) {
                full[k] = *p;
            }
            *best = (value, full);
        }
        true
    };
    if !try_subset(&distinct, &mut best) {
        for k in 0..points.len() {
            let subset: Vec<usize> = (0..rows.len()).filter(|&r| owner[r] == k).collect();
            try_subset(&subset, &mut best);
        }
    }
    let mut lambda = vec![0.0; pr.n_inputs()];
    for ((i, _), p) in rows.iter().zip(&best.1) {
        lambda[*i] += p;
    }
    Ok((best.0.max(0.0), lambda))
}

/// Relative entropy of nonlocality of a behavior, in bits.
pub fn rel_entropy_nonlocality(b: &Behavior, config: &SolverConfig) -> Result<MeasureResult> {
    let pr = Problem::new(b)?;
    let n = pr.n_vertices();
    let restarts = config.restarts.max(1);
    let mut iterations = 0;
    let mut points = Vec::new();

    let mut rng_a = rng(config.seed);
    let mut best_a: Option<Run> = None;
    for r in 0..restarts {
        let start = if r == 0 { vec![1.0 / n as f64; n] } else { random_simplex_point(n, &mut rng_a) };
        let run = accelerated(&pr, &start, Schedule::PRIMARY, Geometry::Euclidean, config.max_iterations);
        iterations += run.iterations;
        points.push(run.w.clone());
        if best_a.as_ref().map_or(true, |b| run.value < b.value) {
            best_a = Some(run);
        }
    }

    let mut rng_b = rng(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut best_b: Option<Run> = None;
    for _ in 0..restarts {
        let start = random_simplex_point(n, &mut rng_b);
        let run = accelerated(&pr, &start, Schedule::SECONDARY, Geometry::Entropic, config.max_iterations);
        iterations += run.iterations;
        points.push(run.w.clone());
        if best_b.as_ref().map_or(true, |b| run.value < b.value) {
            best_b = Some(run);
        }
    }
    let (a, b2) = (best_a.expect("at least one start"), best_b.expect("at least one start"));
    let disagreement = (a.value - b2.value).abs();
    let best = if b2.value < a.value { b2 } else { a };
    // Planes from poor local solutions only loosen the bound and worsen scaling.
    points.retain(|w| pr.value(w) <= best.value + 1e-3);
    let (mut lower, lambda) = cut_lower_bound(&pr, &points)?;
    lower = lower.max(dual_bound(&pr, &lambda, &best.w));
    let (mut value, mut w) = (best.value.max(0.0), best.w);
    if let Some(p) = polish(&pr, &w) {
        lower = lower.max(p.lower);
        if p.value < value {
            (value, w) = (p.value.max(0.0), p.w);
        }
    }
    let lower = lower.min(value);
    let gap = (value - lower).max(0.0);
    Ok(MeasureResult {
        value,
        argmin_weights: Some(w),
        certificate: GapCertificate { lower_bound: lower, gap, solver_disagreement: disagreement },
        iterations,
        converged: gap <= config.gap_tolerance,
    })
}

/// Fast warm-started solve used inside outer optimizations: value, weights
/// and the optimal input weights `lambda`.
pub(crate) struct WarmSolution {
    pub value: f64,
    pub w: Vec<f64>,
    pub lambda: Vec<f64>,
    pub q: Vec<Vec<f64>>,
}

pub(crate) fn solve_warm(pr: &Problem, warm: Option<&[f64]>, cap: usize) -> Result<WarmSolution> {
    let n = pr.n_vertices();
    let run = match warm.filter(|w| w.len() == n) {
        Some(w) => accelerated(pr, w, Schedule::WARM, Geometry::Euclidean, cap),
        None => accelerated(pr, &vec![1.0 / n as f64; n], Schedule::PRIMARY, Geometry::Euclidean, cap),
    };
    let (_, lambda) = cut_lower_bound(pr, std::slice::from_ref(&run.w))?;
    let q = pr.evaluate(&run.w).q;
    Ok(WarmSolution { value: run.value.max(0.0), w: run.w, lambda, q })
}
