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

mod common;

use proptest::prelude::*;
use rand::Rng;

use bellnl_core::behaviors::{
    behavior_from_prelocc, behavior_from_state, chsh_value, horodecki_chsh, horodecki_measurements, is_local,
    Behavior, Instrument, Party, PreLoccProtocol, ProtocolNode, Scenario, SettingsByTranscript,
};
use bellnl_core::quantum::random::{random_povm_with, random_state_with};
use bellnl_core::quantum::Povm;
use bellnl_core::tensor::DimFactorization;

fn settings(r: &mut rand_chacha::ChaCha8Rng, d: usize, n: usize, outcomes: usize) -> Vec<Povm> {
    (0..n).map(|_| random_povm_with(d, outcomes, r).unwrap()).collect()
}

/// The eight relabelings of the CHSH expression, written out by hand.
fn chsh_by_functionals(b: &Behavior) -> f64 {
    let e = |x, y| b.correlator(x, y);
    let forms = [
        e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1),
        e(0, 0) + e(0, 1) - e(1, 0) + e(1, 1),
        e(0, 0) - e(0, 1) + e(1, 0) + e(1, 1),
        -e(0, 0) + e(0, 1) + e(1, 0) + e(1, 1),
    ];
    forms.iter().flat_map(|f| [*f, -*f]).fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn separable_states_give_local_behaviors() {
    let mut r = common::seeded(11);
    for _ in 0..50 {
        let (da, db) = (r.gen_range(2..=3), r.gen_range(2..=3));
        let rho = common::separable_state(da, db, &mut r);
        let b = behavior_from_state(&rho, &settings(&mut r, da, 2, 2), &settings(&mut r, db, 2, 2)).unwrap();
        let res = is_local(&b).unwrap();
        assert!(res.local, "separable state produced a nonlocal behavior");
        assert!(res.reconstruction_error.unwrap() < 1e-7);
    }
}

#[test]
fn horodecki_matches_search_on_random_states() {
    let mut r = common::seeded(12);
    for _ in 0..20 {
        let rho = random_state_with(&DimFactorization::bipartite(2, 2, "A", "B"), &mut r);
        let search = common::chsh_by_search(rho.matrix());
        let formula = horodecki_chsh(&rho).unwrap();
        assert!((search - formula).abs() < 1e-4, "search {search} vs formula {formula}");
        let (a, b) = horodecki_measurements(&rho).unwrap();
        let attained = chsh_value(&behavior_from_state(&rho, &a, &b).unwrap()).unwrap();
        assert!((attained - formula).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn local_behaviors_respect_the_chsh_bound(seed in any::<u64>()) {
        let mut r = common::seeded(seed);
        let b = common::random_local_behavior(&Scenario::chsh(), &mut r);
        prop_assert!(is_local(&b).unwrap().local);
        prop_assert!(chsh_value(&b).unwrap() <= 2.0 + 1e-7);
    }

    #[test]
    fn chsh_equals_best_relabeled_functional(seed in any::<u64>()) {
        let mut r = common::seeded(seed);
        let rho = random_state_with(&DimFactorization::bipartite(2, 2, "A", "B"), &mut r);
        let b = behavior_from_state(&rho, &settings(&mut r, 2, 2, 2), &settings(&mut r, 2, 2, 2)).unwrap();
        prop_assert!((chsh_value(&b).unwrap() - chsh_by_functionals(&b)).abs() < 1e-9);
    }

    #[test]
    fn nonlocal_certificates_separate(v in 0.51f64..1.0) {
        let b = common::noisy_pr(v);
        let res = is_local(&b).unwrap();
        prop_assert!(!res.local);
        let f = res.certificate.unwrap();
        prop_assert!(f.value(&b).unwrap() > f.bound() + 1e-8);
        for vert in common::vertices(&Scenario::chsh()) {
            prop_assert!(f.value(&vert).unwrap() <= f.bound() + 1e-9);
        }
    }

    #[test]
    fn shared_randomness_protocol_is_a_mixture(seed in any::<u64>()) {
        let mut r = common::seeded(seed);
        let rho = random_state_with(&DimFactorization::bipartite(2, 2, "A", "B"), &mut r);
        let probs = common::simplex_point(3, &mut r);
        let protocol = PreLoccProtocol::new(ProtocolNode::leaf(Party::B, Instrument::shared_randomness(2, &probs).unwrap()));
        let mut am = SettingsByTranscript::new();
        let mut bm = SettingsByTranscript::new();
        let mut parts = Vec::new();
        for k in 0..3 {
            let (a, b) = (settings(&mut r, 2, 2, 2), settings(&mut r, 2, 2, 2));
            parts.push(behavior_from_state(&rho, &a, &b).unwrap());
            am.insert(vec![k], a);
            bm.insert(vec![k], b);
        }
        let got = behavior_from_prelocc(&rho, &protocol, &am, &bm).unwrap();
        prop_assert!(got.max_abs_diff(&common::mix(&probs, &parts)) <= 1e-9);
    }
}
