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


//! Acceptance gate: prints one PASS/FAIL line per criterion with the pinned
//! tolerance and exits nonzero when any criterion fails.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::Rng;

use bellnl_core::behaviors::{
    behavior_from_state, chsh_value, demo_hidden_nonlocality, enumerate_local_vertices, horodecki_chsh, is_local,
    optimal_chsh_measurements, tsirelson_behavior, Behavior, Scenario,
};
use bellnl_core::measures::{
    channel_divergence, dpi_monotonicity_check, minimal_extension_state, rel_entropy_nonlocality, ExtensionConfig,
    SolverConfig,
};
use bellnl_core::processes::random::{random_classical_losr, random_prelocc_pipeline};
use bellnl_core::processes::{
    apply_superprocess, check_realizable, form_allowed, lose_construct, lose_reduction, Delay, GeneralStage, Process,
    Superprocess, SuperprocessForm,
};
use bellnl_core::quantum::random::{ginibre, random_povm_with, random_state_with};
use bellnl_core::quantum::{DensityMatrix, QuantumChannel};
use bellnl_core::tensor::DimFactorization;
use bellnl_core::witness::{
    choi_separability, evaluate_witness, losr_min_witness_value, witness_to_channel_construction, Evidence,
    Normalization, WitnessOperator,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{label} = {got:.12} expected {want:.12} ± {tol:e}"))
}

fn in_time(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

/// `3/16 - k δ` with `δ = 1` on winning CHSH outcomes.
fn witness_weight(k: f64, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
    3.0 / 16.0 - if (x1 ^ y1) == (x0 & y0) { k } else { 0.0 }
}

/// Minimum of the witness over the 16 deterministic local strategies.
fn witness_vertex_minimum(k: f64) -> f64 {
    let mut best = f64::INFINITY;
    for f in 0..4usize {
        for g in 0..4usize {
            let mut v = 0.0;
            for x0 in 0..2 {
                for y0 in 0..2 {
                    v += witness_weight(k, x0, y0, (f >> x0) & 1, (g >> y0) & 1);
                }
            }
            best = best.min(v);
        }
    }
    best
}

fn maximal_violation() -> Outcome {
    let start = Instant::now();
    let (a, b) = optimal_chsh_measurements();
    let behavior = behavior_from_state(&DensityMatrix::phi_plus(), &a, &b).map_err(|e| e.to_string())?;
    let value = chsh_value(&behavior).map_err(|e| e.to_string())?;
    within("CHSH", value, 2.0 * SQRT_2, 1e-9)?;
    in_time(start, Duration::from_secs(1))?;
    Ok(format!("CHSH = {value:.12}, 2√2 ± 1e-9"))
}

fn local_polytope() -> Outcome {
    let start = Instant::now();
    let s = Scenario::chsh();
    let library = enumerate_local_vertices(&s).map_err(|e| e.to_string())?;
    let reference = common::vertices(&s);
    ensure(library.len() == 16 && reference.len() == 16, || format!("{} vertices", library.len()))?;
    for v in &reference {
        ensure(library.iter().any(|w| w.max_abs_diff(v) == 0.0), || "vertex sets differ".into())?;
        ensure(is_local(v).map_err(|e| e.to_string())?.local, || "vertex classified nonlocal".into())?;
    }
    let mut r = common::seeded(2);
    for k in 0..200 {
        let b = common::random_local_behavior(&s, &mut r);
        ensure(is_local(&b).map_err(|e| e.to_string())?.local, || format!("mixture {k} classified nonlocal"))?;
    }
    let mut margins = Vec::new();
    for (name, b) in [("PR box", Behavior::pr_box()), ("Tsirelson", tsirelson_behavior())] {
        let res = is_local(&b).map_err(|e| e.to_string())?;
        ensure(!res.local, || format!("{name} classified local"))?;
        let f = res.certificate.ok_or_else(|| format!("{name}: no certificate"))?;
        // The functional's local bound, recomputed over the enumerated vertices.
        let bound = reference.iter().map(|v| f.value(v).unwrap()).fold(f64::NEG_INFINITY, f64::max);
        let margin = f.value(&b).map_err(|e| e.to_string())? - bound;
        ensure(margin >= 1e-8, || format!("{name}: margin {margin:e}"))?;
        margins.push(margin);
    }
    in_time(start, Duration::from_secs(5))?;
    Ok(format!("16 vertices + 200 mixtures local; certificate margins {:.4}, {:.4} ≥ 1e-8", margins[0], margins[1]))
}

fn horodecki_consistency() -> Outcome {
    let mut r = common::seeded(31);
    let dims = DimFactorization::bipartite(2, 2, "A", "B");
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let rho = random_state_with(&dims, &mut r);
        let closed = horodecki_chsh(&rho).map_err(|e| e.to_string())?;
        worst = worst.max((closed - common::chsh_by_search(rho.matrix())).abs());
    }
    ensure(worst <= 1e-4, || format!("closed form vs search differ by {worst:e}"))?;
    let (mut lo, mut hi) = (0.5, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let v = horodecki_chsh(&DensityMatrix::werner(mid).unwrap()).map_err(|e| e.to_string())?;
        if v > 2.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    within("Werner threshold", 0.5 * (lo + hi), FRAC_1_SQRT_2, 1e-6)?;
    Ok(format!("20 states within {worst:.1e} ≤ 1e-4; threshold {:.9} = 1/√2 ± 1e-6", 0.5 * (lo + hi)))
}

fn hidden_nonlocality() -> Outcome {
    let start = Instant::now();
    let rep = demo_hidden_nonlocality();
    ensure(rep.pre_chsh <= 2.0 + 1e-9, || format!("pre {}", rep.pre_chsh))?;
    ensure(rep.post_chsh >= 2.001, || format!("post {}", rep.post_chsh))?;
    in_time(start, Duration::from_secs(5))?;
    let pre = common::chsh_by_search(rep.state.matrix());
    let post = common::chsh_by_search(rep.filtered_state.matrix());
    within("search pre", pre, rep.pre_chsh, 1e-4)?;
    within("search post", post, rep.post_chsh, 1e-4)?;
    Ok(format!("pre {:.6} ≤ 2 + 1e-9, post {:.6} ≥ 2.001", rep.pre_chsh, rep.post_chsh))
}

fn witness_separation() -> Outcome {
    let corrected = WitnessOperator::standard(Normalization::Corrected);
    let min = losr_min_witness_value(&corrected).map_err(|e| e.to_string())?;
    within("local minimum", min, witness_vertex_minimum(0.25), 1e-12)?;
    within("local minimum", min, 0.0, 1e-9)?;

    // Shared maximally entangled pair measured with the optimal settings
    // selected by the classical inputs.
    let (a, b) = optimal_chsh_measurements();
    let alice = QuantumChannel::measure_with_settings(&a).map_err(|e| e.to_string())?;
    let bob = QuantumChannel::measure_with_settings(&b).map_err(|e| e.to_string())?;
    let lose = lose_construct(&DensityMatrix::phi_plus(), &alice, &bob).map_err(|e| e.to_string())?;
    let value = evaluate_witness(&corrected, &lose.channel().to_quantum()).map_err(|e| e.to_string())?;
    let want = 0.75 - (PI / 8.0).cos().powi(2);
    within("quantum value", value, want, 1e-6)?;

    let unshifted = losr_min_witness_value(&WitnessOperator::standard(Normalization::Unshifted)).map_err(|e| e.to_string())?;
    within("unshifted local minimum", unshifted, witness_vertex_minimum(1.0), 1e-12)?;
    within("unshifted local minimum", unshifted, -2.25, 1e-12)?;
    Ok(format!("local minimum {min:.1e} = 0 ± 1e-9; quantum {value:.9} ± 1e-6; unshifted local minimum {unshifted}"))
}

fn separable_states_stay_local() -> Outcome {
    let start = Instant::now();
    let mut r = common::seeded(6);
    for k in 0..50 {
        let rho = common::separable_state(2, 2, &mut r);
        for j in 0..100 {
            let a: Vec<_> = (0..2).map(|_| random_povm_with(2, 2, &mut r).unwrap()).collect();
            let b: Vec<_> = (0..2).map(|_| random_povm_with(2, 2, &mut r).unwrap()).collect();
            let behavior = behavior_from_state(&rho, &a, &b).map_err(|e| e.to_string())?;
            ensure(is_local(&behavior).map_err(|e| e.to_string())?.local, || format!("state {k}, settings {j} nonlocal"))?;
        }
    }
    let verdict = choi_separability(&QuantumChannel::identity_a_to_b(2)).map_err(|e| e.to_string())?;
    let Evidence::PartialTranspose { min_eigenvalue, .. } = verdict.evidence else {
        return Err("identity: no partial-transpose spectrum".into());
    };
    within("identity min eigenvalue", min_eigenvalue, -1.0, 1e-9)?;
    in_time(start, Duration::from_secs(60))?;
    Ok(format!("5000 behaviors local; identity min eigenvalue {min_eigenvalue:.12} = -1 ± 1e-9"))
}

fn relative_entropy_solver() -> Outcome {
    let s = Scenario::chsh();
    let mut r = common::seeded(17);
    let light = |seed| SolverConfig { restarts: 1, seed, ..SolverConfig::default() };
    let mut largest_local: f64 = 0.0;
    for k in 0..30 {
        let m = rel_entropy_nonlocality(&common::random_local_behavior(&s, &mut r), &light(k)).map_err(|e| e.to_string())?;
        largest_local = largest_local.max(m.value);
    }
    within("largest local value", largest_local, 0.0, 1e-6)?;

    let pr = rel_entropy_nonlocality(&Behavior::pr_box(), &SolverConfig::default()).map_err(|e| e.to_string())?;
    let disagreement = pr.certificate.solver_disagreement;
    ensure(disagreement <= 1e-4, || format!("solvers disagree by {disagreement:e}"))?;
    let upper = common::relent_by_mirror_descent(&Behavior::pr_box(), 4, 4000, 3);
    let lower = common::relent_dual_by_em(&Behavior::pr_box(), 10, 200);
    ensure(lower - 1e-9 <= pr.value && pr.value <= upper + 1e-9, || format!("{} outside [{lower}, {upper}]", pr.value))?;
    within("PR box vs dual reference", pr.value, lower, 1e-4)?;
    let uniform = channel_divergence(&Behavior::pr_box(), &Behavior::uniform(s)).map_err(|e| e.to_string())?;
    within("divergence to uniform", uniform, 1.0, 1e-12)?;
    ensure(pr.value <= uniform, || format!("{} exceeds the uniform model", pr.value))?;

    let mut violations = 0;
    for k in 0..50u64 {
        let v = r.gen_range(0.0..1.0);
        let b = common::mix(&[v, 1.0 - v], &[Behavior::pr_box(), common::random_local_behavior(&s, &mut r)]);
        let sp = random_classical_losr(&s, &s, r.gen_range(1..=3), 1000 + k).map_err(|e| e.to_string())?;
        let rep = dpi_monotonicity_check(&b, &sp, &light(k)).map_err(|e| e.to_string())?;
        violations += usize::from(!rep.holds);
    }
    ensure(violations == 0, || format!("{violations} of 50 monotonicity violations"))?;
    Ok(format!(
        "local ≤ {largest_local:.1e}; PR box {:.9} in [{lower:.9}, {upper:.9}], disagreement {disagreement:.1e}; 50/50 monotone",
        pr.value
    ))
}

fn extension_bounds() -> Outcome {
    let tsirelson = rel_entropy_nonlocality(&tsirelson_behavior(), &SolverConfig::default()).map_err(|e| e.to_string())?;
    let ext = minimal_extension_state(&DensityMatrix::phi_plus(), &Scenario::chsh(), &ExtensionConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(ext.value >= tsirelson.value - 1e-6, || format!("{} < {}", ext.value, tsirelson.value))?;
    let mut r = common::seeded(44);
    let cfg = ExtensionConfig { restarts: 4, ..ExtensionConfig::default() };
    let mut largest: f64 = 0.0;
    for _ in 0..3 {
        let rho = common::separable_state(2, 2, &mut r);
        largest = largest.max(minimal_extension_state(&rho, &Scenario::chsh(), &cfg).map_err(|e| e.to_string())?.value);
    }
    within("separable extension", largest, 0.0, 1e-6)?;
    Ok(format!("maximally entangled {:.9} ≥ {:.9} - 1e-6; separable ≤ {largest:.1e}", ext.value, tsirelson.value))
}

fn process_algebra() -> Outcome {
    let (z, p) = (Delay::INSTANT, Delay::new(5.0).unwrap());
    let table = [
        (SuperprocessForm::Losr, [true, false, false, false]),
        (SuperprocessForm::PreLocc, [true, true, false, false]),
        (SuperprocessForm::General, [true, false, true, true]),
    ];
    for (form, want) in table {
        let got = [form_allowed(form, z, z), form_allowed(form, p, z), form_allowed(form, z, p), form_allowed(form, p, p)];
        ensure(got == want, || format!("{form:?}: {got:?}"))?;
    }

    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let (sp, process) = random_prelocc_pipeline(seed).map_err(|e| e.to_string())?;
        let direct = apply_superprocess(&sp, &process).map_err(|e| e.to_string())?;
        ensure(direct.is_instantaneous(), || "pipeline output is delayed".into())?;
        let red = lose_reduction(&sp, &process).map_err(|e| e.to_string())?;
        let rebuilt = lose_construct(&red.state, &red.alice, &red.bob).map_err(|e| e.to_string())?;
        let (x, y) = (direct.channel().to_quantum(), rebuilt.channel().to_quantum());
        worst = worst.max(bellnl_core::tensor::max_abs_diff(x.choi(), y.choi()));
    }
    ensure(worst <= 1e-8, || format!("pipelines reproduced within {worst:e}"))?;

    let id = QuantumChannel::identity(DimFactorization::new(vec![2, 2]).unwrap());
    let stage = |pre: f64, post: f64| {
        Superprocess::General(GeneralStage {
            pre: id.clone(),
            post: id.clone(),
            memory: 1,
            pre_delay: Delay::new(pre).unwrap(),
            post_delay: Delay::new(post).unwrap(),
        })
    };
    let base = Process::quantum(QuantumChannel::swap(2), Delay::new(0.5).unwrap()).unwrap();
    let nested = apply_superprocess(&stage(3.0, 0.25), &apply_superprocess(&stage(1.0, 2.0), &base).unwrap()).unwrap();
    ensure(nested.delay().value() == 3.0 + (1.0 + 0.5 + 2.0) + 0.25, || format!("delay {}", nested.delay().value()))?;
    ensure(nested.delay().value() == (3.0 + 1.0) + 0.5 + (2.0 + 0.25), || "delays not associative".into())?;

    let swap = Process::quantum(QuantumChannel::swap(2), Delay::INSTANT).unwrap();
    ensure(!check_realizable(&swap), || "instantaneous swap accepted".into())?;
    Ok(format!("form table exact; 20 pipelines within {worst:.1e} ≤ 1e-8; delays additive; swap rejected"))
}

fn construction_identity() -> Outcome {
    let mut r = common::seeded(90);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let channel = common::random_bipartite_channel([2, 1, 1, 2], &mut r);
        let g = ginibre(4, 4, &mut r);
        let w = (&g + g.adjoint()).scale(0.5);
        let rep = witness_to_channel_construction(&w, &channel).map_err(|e| e.to_string())?;
        let choi = channel.choi();
        let direct = (choi * &w).trace().re / choi.trace().re;
        worst = worst.max((rep.value - direct).abs());
    }
    ensure(worst <= 1e-8, || format!("recombined values differ by {worst:e}"))?;
    Ok(format!("10 pairs within {worst:.1e} ≤ 1e-8"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("maximal CHSH violation", maximal_violation),
        ("local polytope membership", local_polytope),
        ("closed-form CHSH maximum", horodecki_consistency),
        ("hidden nonlocality by filtering", hidden_nonlocality),
        ("witness separation", witness_separation),
        ("separable states give local behaviors", separable_states_stay_local),
        ("relative entropy of nonlocality", relative_entropy_solver),
        ("minimal extension bounds", extension_bounds),
        ("process algebra", process_algebra),
        ("witness to channel construction", construction_identity),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{elapsed:.2?}]", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL {name}: {detail} [{elapsed:.2?}]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
