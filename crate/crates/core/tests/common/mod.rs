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
//! Generators and independent reference computations shared by the
//! integration tests. Nothing here calls the library routine it checks.

#![allow(dead_code)]

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use bellnl_core::behaviors::{Behavior, Scenario};
use bellnl_core::processes::{LosrComponent, LosrDecomposition};
use bellnl_core::quantum::random::{random_channel_with, random_state_with, rng};
use bellnl_core::quantum::{DensityMatrix, QuantumChannel};
use bellnl_core::tensor::{self, ComplexMatrix, DimFactorization};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    rng(seed)
}

/// Mixture of `1..=4` random product states on `da ⊗ db`.
pub fn separable_state(da: usize, db: usize, r: &mut ChaCha8Rng) -> DensityMatrix {
    let k = r.gen_range(1..=4);
    let mut weights: Vec<f64> = (0..k).map(|_| r.gen::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut m = ComplexMatrix::zeros(da * db, da * db);
    for w in &weights {
        let a = random_state_with(&DimFactorization::single(da), r);
        let b = random_state_with(&DimFactorization::single(db), r);
        m += tensor::tensor(a.matrix(), b.matrix()).scale(*w);
    }
    DensityMatrix::new(m, DimFactorization::bipartite(da, db, "A", "B")).expect("mixture of states")
}

/// Explicit mixture of product channels with `[A0, B0, A1, B1]` dims.
pub fn losr_mixture(dims: [usize; 4], r: &mut ChaCha8Rng) -> LosrDecomposition {
    let k = r.gen_range(1..=3);
    let raw: Vec<f64> = (0..k).map(|_| r.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let [a0, b0, a1, b1] = dims;
    let components = raw
        .iter()
        .map(|w| LosrComponent {
            weight: w / total,
            alice: random_channel_with(&DimFactorization::single(a0), &DimFactorization::single(a1), r.gen_range(1..=2), r),
            bob: random_channel_with(&DimFactorization::single(b0), &DimFactorization::single(b1), r.gen_range(1..=2), r),
        })
        .collect();
    LosrDecomposition::new(components).expect("valid weights")
}

/// Random probability vector.
pub fn simplex_point(n: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -r.gen::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Deterministic local strategies of a scenario: each party maps its input
/// to a fixed output. Enumerated here independently of the library.
pub fn vertices(s: &Scenario) -> Vec<Behavior> {
    let rules = |n_in: usize, n_out: usize| -> Vec<Vec<usize>> {
        let mut all = vec![vec![]];
        for _ in 0..n_in {
            all = all.into_iter().flat_map(|p: Vec<usize>| (0..n_out).map(move |o| [p.clone(), vec![o]].concat())).collect();
        }
        all
    };
    let mut out = Vec::new();
    for a in rules(s.nx0, s.nx1) {
        for b in rules(s.ny0, s.ny1) {
            out.push(
                Behavior::from_fn(*s, |x0, y0, x1, y1| f64::from(u8::from(a[x0] == x1 && b[y0] == y1)))
                    .expect("deterministic table"),
            );
        }
    }
    out
}

pub fn random_local_behavior(s: &Scenario, r: &mut ChaCha8Rng) -> Behavior {
    let v = vertices(s);
    let w = simplex_point(v.len(), r);
    mix(&w, &v)
}

pub fn mix(w: &[f64], bs: &[Behavior]) -> Behavior {
    let s = *bs[0].scenario();
    Behavior::from_fn(s, |x0, y0, x1, y1| w.iter().zip(bs).map(|(wi, b)| wi * b.p(x0, y0, x1, y1)).sum())
        .expect("mixture of behaviors")
}

/// `v · PR + (1 - v) · uniform`, nonlocal for `v > 1/2`.
pub fn noisy_pr(v: f64) -> Behavior {
    let s = Scenario::chsh();
    Behavior::from_fn(s, |x0, y0, x1, y1| {
        let win = f64::from(u8::from((x1 ^ y1) == (x0 & y0)));
        v * win / 2.0 + (1.0 - v) / 4.0
    })
    .expect("valid mixture")
}

/// Expectation `Tr[ρ (a·σ ⊗ b·σ)]` computed from explicit Pauli matrices.
pub fn correlator(rho: &ComplexMatrix, a: [f64; 3], b: [f64; 3]) -> f64 {
    let sx = ComplexMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()]);
    let sy = ComplexMatrix::from_row_slice(2, 2, &[0.0.into(), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), 0.0.into()]);
    let sz = ComplexMatrix::from_row_slice(2, 2, &[1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into()]);
    let dot = |n: [f64; 3]| sx.scale(n[0]) + sy.scale(n[1]) + sz.scale(n[2]);
    let op = tensor::tensor(&dot(a), &dot(b));
    (rho * op).trace().re
}

pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Maximal CHSH value over projective qubit measurements: a coarse grid over
/// Alice's two directions, Bob's directions chosen optimally for each, then
/// a shrinking pattern search.
pub fn chsh_by_search(rho: &ComplexMatrix) -> f64 {
    // Correlation tensor from direct traces.
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = correlator(rho, axes[i], axes[j]);
        }
    }
    let objective = |p: &[f64; 4]| {
        let a0 = direction(p[0], p[1]);
        let a1 = direction(p[2], p[3]);
        let image = |v: [f64; 3]| -> f64 {
            (0..3).map(|j| (0..3).map(|i| v[i] * t[i][j]).sum::<f64>().powi(2)).sum::<f64>().sqrt()
        };
        let plus = [a0[0] + a1[0], a0[1] + a1[1], a0[2] + a1[2]];
        let minus = [a0[0] - a1[0], a0[1] - a1[1], a0[2] - a1[2]];
        image(plus) + image(minus)
    };
    let steps = 10;
    let mut best = ([0.0; 4], f64::NEG_INFINITY);
    for i in 0..steps {
        for j in 0..2 * steps {
            for k in 0..steps {
                for l in 0..2 * steps {
                    let p = [
                        std::f64::consts::PI * (i as f64 + 0.5) / steps as f64,
                        std::f64::consts::PI * j as f64 / steps as f64,
                        std::f64::consts::PI * (k as f64 + 0.5) / steps as f64,
                        std::f64::consts::PI * l as f64 / steps as f64,
                    ];
                    let v = objective(&p);
                    if v > best.1 {
                        best = (p, v);
                    }
                }
            }
        }
    }
    let mut h = 0.3;
    while h > 1e-10 {
        let mut improved = false;
        for d in 0..4 {
            for s in [-1.0, 1.0] {
                let mut p = best.0;
                p[d] += s * h;
                let v = objective(&p);
                if v > best.1 {
                    best = (p, v);
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best.1
}

/// Worst-case KL divergence in bits between the blocks of two behaviors.
pub fn max_kl_bits(p: &Behavior, q: &Behavior) -> f64 {
    let s = *p.scenario();
    let mut worst: f64 = 0.0;
    for x0 in 0..s.nx0 {
        for y0 in 0..s.ny0 {
            let mut d = 0.0;
            for x1 in 0..s.nx1 {
                for y1 in 0..s.ny1 {
                    let (a, b) = (p.p(x0, y0, x1, y1), q.p(x0, y0, x1, y1));
                    if a > 0.0 {
                        d += a * (a / b).ln();
                    }
                }
            }
            worst = worst.max(d / LN_2);
        }
    }
    worst
}

/// Reference minimizer of the worst-case divergence over local mixtures:
/// entropic mirror descent on a log-sum-exp surrogate with a cooling
/// temperature, from several random starts. Returns the best value found.
pub fn relent_by_mirror_descent(b: &Behavior, starts: usize, iterations: usize, seed: u64) -> f64 {
    let s = *b.scenario();
    let verts = vertices(&s);
    let n = verts.len();
    let inputs: Vec<(usize, usize)> = (0..s.nx0).flat_map(|x| (0..s.ny0).map(move |y| (x, y))).collect();
    let outs: Vec<(usize, usize)> = (0..s.nx1).flat_map(|x| (0..s.ny1).map(move |y| (x, y))).collect();
    let mut r = seeded(seed);
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let mut w = simplex_point(n, &mut r);
        for it in 0..iterations {
            let tau = (0.05 / (1.0 + it as f64 / 50.0)).max(1e-6);
            let q = mix(&w, &verts);
            let div: Vec<f64> = inputs
                .iter()
                .map(|&(x0, y0)| {
                    outs.iter()
                        .map(|&(x1, y1)| {
                            let p = b.p(x0, y0, x1, y1);
                            if p > 0.0 {
                                p * (p / q.p(x0, y0, x1, y1)).log2()
                            } else {
                                0.0
                            }
                        })
                        .sum()
                })
                .collect();
            let top = div.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            best = best.min(top);
            let soft: Vec<f64> = div.iter().map(|d| ((d - top) / tau).exp()).collect();
            let z: f64 = soft.iter().sum();
            let mut grad = vec![0.0; n];
            for (k, &(x0, y0)) in inputs.iter().enumerate() {
                for (v, vert) in verts.iter().enumerate() {
                    for &(x1, y1) in &outs {
                        if vert.p(x0, y0, x1, y1) > 0.0 {
                            let p = b.p(x0, y0, x1, y1);
                            if p > 0.0 {
                                grad[v] -= soft[k] / z * p / (q.p(x0, y0, x1, y1) * LN_2);
                            }
                        }
                    }
                }
            }
            let step = 0.5 / (1.0 + it as f64).sqrt();
            let gmin = grad.iter().copied().fold(f64::INFINITY, f64::min);
            for (wv, g) in w.iter_mut().zip(&grad) {
                *wv = (*wv * (-step * (g - gmin)).exp()).max(1e-15);
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
        }
        best = best.min(max_kl_bits(b, &mix(&w, &verts)));
    }
    best
}

pub fn qc_effects(d: usize, r: &mut ChaCha8Rng) -> Vec<ComplexMatrix> {
    bellnl_core::quantum::random::random_povm_with(d, 4, r).expect("valid povm").effects().to_vec()
}

pub fn random_bipartite_channel(dims: [usize; 4], r: &mut ChaCha8Rng) -> QuantumChannel {
    let [a0, b0, a1, b1] = dims;
    let (i, o) = bellnl_core::quantum::bipartite_io(a0, b0, a1, b1);
    random_channel_with(&i, &o, r.gen_range(1..=4), r)
}

/// Reference lower bound on the worst-case divergence from its dual
/// `max_λ min_w sum_i λ_i D_i(w)`. The inner problem is a mixture
/// likelihood solved by expectation maximization and certified through
/// concavity of the logarithm. The outer weights follow exponentiated
/// gradient ascent. Every returned value is a valid lower bound.
pub fn relent_dual_by_em(b: &Behavior, outer: usize, inner: usize) -> f64 {
    let s = *b.scenario();
    let verts = vertices(&s);
    let n = verts.len();
    let inputs: Vec<(usize, usize)> = (0..s.nx0).flat_map(|x| (0..s.ny0).map(move |y| (x, y))).collect();
    let outs: Vec<(usize, usize)> = (0..s.nx1).flat_map(|x| (0..s.ny1).map(move |y| (x, y))).collect();
    let m = inputs.len();
    let mut lambda = vec![1.0 / m as f64; m];
    let mut w = vec![1.0 / n as f64; n];
    let mut best: f64 = 0.0;
    let divergences = |q: &Behavior| -> Vec<f64> {
        inputs
            .iter()
            .map(|&(x0, y0)| {
                outs.iter()
                    .map(|&(x1, y1)| {
                        let p = b.p(x0, y0, x1, y1);
                        if p > 0.0 {
                            p * (p / q.p(x0, y0, x1, y1)).ln()
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect()
    };
    for round in 0..outer {
        // g_v = sum_i λ_i sum_o p_i(o) [v outputs o on i] / q_i(o).
        let responsibilities = |w: &[f64]| -> Vec<f64> {
            let q = mix(w, &verts);
            verts
                .iter()
                .map(|vert| {
                    let mut g = 0.0;
                    for (k, &(x0, y0)) in inputs.iter().enumerate() {
                        for &(x1, y1) in &outs {
                            let p = b.p(x0, y0, x1, y1);
                            if p > 0.0 && vert.p(x0, y0, x1, y1) > 0.0 {
                                g += lambda[k] * p / q.p(x0, y0, x1, y1);
                            }
                        }
                    }
                    g
                })
                .collect()
        };
        for _ in 0..inner {
            let g = responsibilities(&w);
            w.iter_mut().zip(&g).for_each(|(wv, gv)| *wv *= gv);
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
        }
        let d = divergences(&mix(&w, &verts));
        let g_max = responsibilities(&w).into_iter().fold(0.0, f64::max);
        let dual: f64 = lambda.iter().zip(&d).map(|(l, di)| l * di).sum::<f64>() - g_max.ln();
        best = best.max(dual / LN_2);
        let step = 2.0 / (1.0 + round as f64).sqrt();
        let top = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lambda.iter_mut().zip(&d).for_each(|(l, di)| *l *= (step * (di - top)).exp());
        let total: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|x| *x /= total);
    }
    best
}
