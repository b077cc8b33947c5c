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
//! Dense two-phase primal simplex for `min c·x` subject to `A x = b`,
//! `x >= 0`. Entering columns follow Bland's rule, so runs are
//! deterministic; optimal points are checked against the constraints.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-11;
const HARRIS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    /// `y` with `yᵀA <= 0` componentwise and `yᵀb > 0`; `residual` is the
    /// phase-one optimum, equal to `yᵀb`.
    Infeasible { farkas: Vec<f64>, residual: f64 },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(v, q)| *v -= f * q);
                row[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            self.cost.iter_mut().zip(&pivot_row).for_each(|(v, q)| *v -= f * q);
            self.cost[col] = 0.0;
        }
        self.basis[r] = col;
    }

    /// Runs to optimality over columns `< allowed`. Returns false when
    /// unbounded. A bounded objective turns a column without pivot row into
    /// rounding noise, so it is skipped until the next pivot.
    fn run(&mut self, allowed: usize, max_iter: usize, bounded: bool) -> Result<bool> {
        let rhs = self.rhs();
        let mut skipped = vec![false; allowed];
        for _ in 0..max_iter {
            let Some(col) = (0..allowed).find(|&j| !skipped[j] && self.cost[j] < -COST_EPS) else {
                return Ok(true);
            };
            // Harris ratio test: bound the step with slightly relaxed
            // ratios, then take the largest pivot among rows within it.
            let bound = self
                .rows
                .iter()
                .filter(|row| row[col] > PIVOT_EPS)
                .map(|row| (row[rhs].max(0.0) + HARRIS_SLACK) / row[col])
                .fold(f64::INFINITY, f64::min);
            let mut best: Option<usize> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a <= PIVOT_EPS || row[rhs].max(0.0) / a > bound {
                    continue;
                }
                best = match best {
                    Some(bi) if self.rows[bi][col] > a || self.rows[bi][col] == a && self.basis[bi] < self.basis[i] => Some(bi),
                    _ => Some(i),
                };
            }
            match best {
                None if bounded => skipped[col] = true,
                None => return Ok(false),
                Some(r) => {
                    self.pivot(r, col);
                    skipped.iter_mut().for_each(|s| *s = false);
                }
            }
        }
        Err(Error::LpFailure(format!("simplex did not terminate within {max_iter} pivots")))
    }
}

/// Solves `min c·x, A x = b, x >= 0`. `a` is given by rows. The problem is
/// declared infeasible when the phase-one optimum exceeds `feasibility_tol`.
pub fn minimize(a: &[Vec<f64>], b: &[f64], c: &[f64], feasibility_tol: f64) -> Result<LpOutcome> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::LpFailure("inconsistent LP dimensions".into()));
    }
    if a.iter().flatten().chain(b).chain(c).any(|v| !v.is_finite()) {
        return Err(Error::LpFailure("non-finite LP data".into()));
    }
    let width = n + m + 1;
    let signs: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row = vec![0.0; width];
            for j in 0..n {
                row[j] = signs[i] * a[i][j];
            }
            row[n + i] = 1.0;
            row[width - 1] = signs[i] * b[i];
            row
        })
        .collect();
    let mut cost = vec![0.0; width];
    for row in &rows {
        for j in 0..n {
            cost[j] -= row[j];
        }
        cost[width - 1] -= row[width - 1];
    }
    let mut t = Tableau { rows, cost, basis: (n..n + m).collect(), width };
    let max_iter = 50_000 + 100 * (n + m);

    t.run(n + m, max_iter, true)?;
    let residual = -t.cost[width - 1];
    if residual > feasibility_tol {
        let farkas = (0..m).map(|i| signs[i] * (1.0 - t.cost[n + i])).collect();
        return Ok(LpOutcome::Infeasible { farkas, residual });
    }

    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| t.rows[r][j].abs() > 1e-9) {
                t.pivot(r, col);
            }
        }
    }

    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(c);
    for (r, row) in t.rows.iter().enumerate() {
        let cb = if t.basis[r] < n { c[t.basis[r]] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                cost[j] -= cb * row[j];
            }
        }
    }
    for &bv in &t.basis {
        cost[bv] = 0.0;
    }
    t.cost = cost;
    if !t.run(n, max_iter, false)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for (r, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rows[r][width - 1].max(0.0);
        }
    }
    let scale = 1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let residual = a
        .iter()
        .zip(b)
        .map(|(row, bi)| (row.iter().zip(&x).map(|(aij, xj)| aij * xj).sum::<f64>() - bi).abs())
        .fold(0.0, f64::max);
    if residual > 1e-7 * scale {
        return Err(Error::LpFailure(format!("solution violates constraints by {residual:.3e}")));
    }
    let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok(LpOutcome::Optimal { x, value })
}

/// Value and optimal row mixture of the zero-sum game `max_π min_v πᵀ M[:, v]`
/// over probability vectors `π`.
pub fn solve_matrix_game(payoff: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let rows = payoff.len();
    let cols = payoff.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::LpFailure("empty game".into()));
    }
    // Rescale payoffs into [1, 2], then min Σu s.t. Mᵀu >= 1, u >= 0.
    let min = payoff.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let max = payoff.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if !min.is_finite() || !max.is_finite() {
        return Err(Error::LpFailure("non-finite payoff".into()));
    }
    let span = if max > min { max - min } else { 1.0 };
    let mut a = Vec::with_capacity(cols);
    for v in 0..cols {
        let mut row = vec![0.0; rows + cols];
        for i in 0..rows {
            row[i] = (payoff[i][v] - min) / span + 1.0;
        }
        row[rows + v] = -1.0;
        a.push(row);
    }
    let b = vec![1.0; cols];
    let mut c = vec![0.0; rows + cols];
    c[..rows].iter_mut().for_each(|v| *v = 1.0);
    // The game LP is always feasible, so a small phase-one residual is pivot
    // drift. The returned value is recomputed from the normalized mixture and
    // stays exact for that mixture either way.
    match minimize(&a, &b, &c, 1e-6)? {
        LpOutcome::Optimal { x, .. } => {
            let total: f64 = x[..rows].iter().sum();
            if !(total > 0.0) {
                return Err(Error::LpFailure("matrix game LP returned a zero mixture".into()));
            }
            let pi: Vec<f64> = x[..rows].iter().map(|u| u / total).collect();
            let game = (0..cols)
                .map(|v| (0..rows).map(|i| pi[i] * payoff[i][v]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            Ok((game, pi))
        }
        other => Err(Error::LpFailure(format!("matrix game LP ended as {other:?}"))),
    }
}
