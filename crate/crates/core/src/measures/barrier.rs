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

//! Interior-point polish for the worst-case divergence problem
//! `min t` subject to `D_i(w) <= t` over the simplex, and a dual bound
//! valid for any weighting of the inputs.
//!
//! Works in nats internally; results are reported in bits.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use super::relent::Problem;

/// Above this many vertices the dense Newton system is too costly.
pub(crate) const POLISH_LIMIT: usize = 256;

const FINAL_GAP: f64 = 1e-10;
const CENTERING_STEPS: usize = 100;

pub(crate) struct Polished {
    pub w: Vec<f64>,
    /// Upper bound in bits, attained by `w`.
    pub value: f64,
    /// Certified lower bound in bits.
    pub lower: f64,
}

fn mixture(pr: &Problem, w: &[f64]) -> Vec<Vec<f64>> {
    let mut q = vec![vec![0.0; pr.n_out]; pr.blocks.len()];
    for (v, wv) in w.iter().enumerate() {
        for (i, &o) in pr.outcome[v].iter().enumerate() {
            q[i][o] += wv;
        }
    }
    q
}

fn divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).ln()).sum()
}

/// Lower bound in bits on the optimum from input weights `lambda` and any
/// interior point `w`. By concavity of the logarithm,
/// `min_w' sum_i lambda_i D_i(w') >= sum_i lambda_i D_i(w) - ln max_v G_v(w)`
/// with `G_v = sum_i lambda_i p_i(o_v) / q_i(o_v)`, and the left side never
/// exceeds the optimum.
pub(crate) fn dual_bound(pr: &Problem, lambda: &[f64], w: &[f64]) -> f64 {
    let total: f64 = lambda.iter().sum();
    if !(total > 0.0) || lambda.iter().any(|l| *l < 0.0) {
        return 0.0;
    }
    let q = mixture(pr, w);
    let mut f = 0.0;
    for (i, (p, qi)) in pr.blocks.iter().zip(&q).enumerate() {
        if lambda[i] > 0.0 {
            f += lambda[i] / total * divergence(p, qi);
        }
    }
    let mut g_max: f64 = 0.0;
    for row in &pr.outcome {
        let g: f64 = row
            .iter()
            .enumerate()
            .filter(|&(i, &o)| lambda[i] > 0.0 && pr.blocks[i][o] > 0.0)
            .map(|(i, &o)| lambda[i] / total * pr.blocks[i][o] / q[i][o])
            .sum();
        g_max = g_max.max(g);
    }
    let bound = (f - g_max.ln()) / LN_2;
    if bound.is_finite() {
        bound.max(0.0)
    } else {
        0.0
    }
}

/// Strictly feasible barrier point with the slack `t - D_i(w)` of every
/// constraint and the mixture it induces.
struct Point {
    w: Vec<f64>,
    t: f64,
    slack: Vec<f64>,
    q: Vec<Vec<f64>>,
}

impl Point {
    fn new(pr: &Problem, w: Vec<f64>, t: f64) -> Option<Self> {
        if w.iter().any(|x| !(*x > 0.0)) {
            return None;
        }
        let q = mixture(pr, &w);
        let slack: Vec<f64> = pr.blocks.iter().zip(&q).map(|(p, qi)| t - divergence(p, qi)).collect();
        if slack.iter().any(|f| !(*f > 0.0)) {
            return None;
        }
        Some(Self { w, t, slack, q })
    }

    fn barrier(&self, s: f64) -> f64 {
        s * self.t - self.slack.iter().map(|f| f.ln()).sum::<f64>() - self.w.iter().map(|x| x.ln()).sum::<f64>()
    }
}

/// Newton step for `s t - sum ln f_i - sum ln w_v` on `sum w = 1`, with the
/// Newton decrement.
fn newton_step(pr: &Problem, x: &Point, s: f64) -> Option<(DVector<f64>, f64)> {
    let n = x.w.len();
    let dim = n + 2;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let mut g = DVector::<f64>::zeros(dim);
    g[n] = s;
    for (i, p) in pr.blocks.iter().enumerate() {
        let f = x.slack[i];
        // Gradient of f_i = t - D_i.
        let mut grad_f = DVector::<f64>::zeros(n + 1);
        for (v, row) in pr.outcome.iter().enumerate() {
            let o = row[i];
            if p[o] > 0.0 {
                grad_f[v] = p[o] / x.q[i][o];
            }
        }
        grad_f[n] = 1.0;
        for a in 0..=n {
            g[a] -= grad_f[a] / f;
            for b in 0..=n {
                h[(a, b)] += grad_f[a] * grad_f[b] / (f * f);
            }
        }
        // Hessian of D_i couples vertices sharing an outcome on input i.
        for (v, rv) in pr.outcome.iter().enumerate() {
            let o = rv[i];
            if p[o] == 0.0 {
                continue;
            }
            let c = p[o] / (x.q[i][o] * x.q[i][o] * f);
            for (u, ru) in pr.outcome.iter().enumerate() {
                if ru[i] == o {
                    h[(v, u)] += c;
                }
            }
        }
    }
    for v in 0..n {
        g[v] -= 1.0 / x.w[v];
        h[(v, v)] += 1.0 / (x.w[v] * x.w[v]);
        h[(v, n + 1)] = 1.0;
        h[(n + 1, v)] = 1.0;
    }
    let sol = h.lu().solve(&(-&g))?;
    let step = sol.rows(0, n + 1).into_owned();
    let decrement = -g.rows(0, n + 1).dot(&step);
    (decrement.is_finite() && step.iter().all(|x| x.is_finite())).then_some((step, decrement))
}

fn center(pr: &Problem, mut x: Point, s: f64) -> Option<Point> {
    let n = x.w.len();
    for _ in 0..CENTERING_STEPS {
        let (step, decrement) = newton_step(pr, &x, s)?;
        if decrement / 2.0 < 1e-12 {
            break;
        }
        let current = x.barrier(s);
        let mut alpha = 1.0;
        let next = loop {
            let w: Vec<f64> = (0..n).map(|v| x.w[v] + alpha * step[v]).collect();
            if let Some(y) = Point::new(pr, w, x.t + alpha * step[n]) {
                if y.barrier(s) <= current - 0.25 * alpha * decrement {
                    break Some(y);
                }
            }
            alpha *= 0.5;
            if alpha < 1e-14 {
                break None;
            }
        };
        match next {
            Some(y) => x = y,
            None => break,
        }
    }
    Some(x)
}

/// Refines `start` along the central path. Returns `None` when the problem
/// is too large or the Newton iteration breaks down.
pub(crate) fn polish(pr: &Problem, start: &[f64]) -> Option<Polished> {
    let n = pr.n_vertices();
    let m = pr.n_inputs();
    if n > POLISH_LIMIT || start.len() != n {
        return None;
    }
    let w: Vec<f64> = start.iter().map(|x| 0.999 * x.max(0.0) + 1e-3 / n as f64).collect();
    let total: f64 = w.iter().sum();
    let w: Vec<f64> = w.iter().map(|x| x / total).collect();
    let q = mixture(pr, &w);
    let top = pr.blocks.iter().zip(&q).map(|(p, qi)| divergence(p, qi)).fold(0.0, f64::max);
    let mut x = Point::new(pr, w, top + 1e-2)?;
    let barriers = (n + m) as f64;
    let mut s = barriers / 1e-2;
    // Path duals are `1 / (s f_i)`. Tiny slacks lose relative precision late
    // on the path, so the best bound over all stages is kept.
    let mut lower: f64 = 0.0;
    loop {
        x = center(pr, x, s)?;
        let lambda: Vec<f64> = x.slack.iter().map(|f| 1.0 / (s * f)).collect();
        lower = lower.max(dual_bound(pr, &lambda, &x.w));
        if barriers / s < FINAL_GAP {
            break;
        }
        s *= 10.0;
    }
    let value = pr.value(&x.w);
    Some(Polished { w: x.w, value, lower })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::Behavior;

    #[test]
    fn pr_box_is_certified_to_high_precision() {
        let pr = Problem::new(&Behavior::pr_box()).unwrap();
        let n = pr.n_vertices();
        let p = polish(&pr, &vec![1.0 / n as f64; n]).unwrap();
        let exact = (4.0f64 / 3.0).log2();
        assert!((p.value - exact).abs() < 1e-9);
        assert!(p.lower <= p.value && p.value - p.lower < 1e-8);
    }

    #[test]
    fn any_weighting_bounds_from_below() {
        let pr = Problem::new(&Behavior::pr_box()).unwrap();
        let n = pr.n_vertices();
        let w: Vec<f64> = (0..n).map(|v| (1 + v % 3) as f64).collect();
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|x| x / total).collect();
        for lambda in [[1.0, 0.0, 0.0, 0.0], [0.1, 0.2, 0.3, 0.4], [0.25; 4]] {
            assert!(dual_bound(&pr, &lambda, &w) <= (4.0f64 / 3.0).log2() + 1e-12);
        }
    }
}
