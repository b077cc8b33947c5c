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

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

use bellnl_core::behaviors::{
    behavior_from_state, demo_hidden_nonlocality, is_local, optimal_chsh_measurements, tsirelson_behavior, Behavior,
};
use bellnl_core::measures::{rel_entropy_nonlocality, SolverConfig};
use bellnl_core::processes::{classify, Delay, Process};
use bellnl_core::quantum::{DensityMatrix, QuantumChannel};
use bellnl_core::witness::{Normalization, WitnessOperator};

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellnl")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bellnl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

/// Compares with a stored file; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, out: &Output) {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    let got = String::from_utf8(out.stdout.clone()).unwrap();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).expect("golden file exists");
    assert_eq!(got, want, "output differs from {name}");
}

#[test]
fn bundled_inputs_match_library_objects() {
    let t: Behavior = serde_json::from_str(&std::fs::read_to_string(data("tsirelson.json")).unwrap()).unwrap();
    assert!(t.max_abs_diff(&tsirelson_behavior()) < 1e-15);
    let p: Behavior = serde_json::from_str(&std::fs::read_to_string(data("prbox.json")).unwrap()).unwrap();
    assert_eq!(p.max_abs_diff(&Behavior::pr_box()), 0.0);
    let s: DensityMatrix = serde_json::from_str(&std::fs::read_to_string(data("phi_plus.json")).unwrap()).unwrap();
    assert!((s.matrix() - DensityMatrix::phi_plus().matrix()).norm() < 1e-15);
    assert!(run(&["validate", "--state", &data("werner_p.json")]).status.success());
}

#[test]
fn chsh_of_tsirelson() {
    let out = run(&["chsh", "--behavior", &data("tsirelson.json")]);
    let v = stdout_json(&out)["chsh"].as_f64().unwrap();
    assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    golden("chsh_tsirelson.json", &out);
}

#[test]
fn is_local_of_pr_box() {
    let out = run(&["is-local", "--behavior", &data("prbox.json")]);
    let v = stdout_json(&out);
    assert_eq!(v, serde_json::to_value(is_local(&Behavior::pr_box()).unwrap()).unwrap());
    assert_eq!(v["local"], json!(false));
    assert!(v["certificate"].is_object());
    golden("is_local_prbox.json", &out);
}

#[test]
fn demo_filtering_reveals_violation() {
    let out = run(&["demo", "filtering"]);
    let v = stdout_json(&out);
    assert_eq!(v, serde_json::to_value(demo_hidden_nonlocality()).unwrap());
    assert!(v["pre_chsh"].as_f64().unwrap() <= 2.0);
    assert!(v["post_chsh"].as_f64().unwrap() > 2.0);
    golden("demo_filtering.json", &out);
}

#[test]
fn born_matches_library() {
    let v = stdout_json(&run(&["born", "--state", &data("phi_plus.json")]));
    let (a, b) = optimal_chsh_measurements();
    let state: DensityMatrix = serde_json::from_str(&std::fs::read_to_string(data("phi_plus.json")).unwrap()).unwrap();
    let want = behavior_from_state(&state, &a, &b).unwrap();
    assert_eq!(v, serde_json::to_value(want).unwrap());
}

#[test]
fn rel_ent_matches_library_and_is_deterministic() {
    let args = ["rel-ent", "--behavior", &data("prbox.json"), "--seed", "7", "--restarts", "2"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
    let config = SolverConfig { seed: 7, restarts: 2, ..Default::default() };
    let want = rel_entropy_nonlocality(&Behavior::pr_box(), &config).unwrap();
    assert_eq!(stdout_json(&first), serde_json::to_value(want).unwrap());
}

#[test]
fn witness_build_and_eval() {
    let out = run(&["witness", "build"]);
    assert_eq!(stdout_json(&out), serde_json::to_value(WitnessOperator::standard(Normalization::Corrected)).unwrap());
    golden("witness_corrected.json", &out);
    let w = temp_file("w.json", &String::from_utf8(out.stdout).unwrap());
    let v = stdout_json(&run(&["witness", "eval", "--witness", w.to_str().unwrap(), "--channel", &data("tsirelson.json")]));
    let want = 0.75 - (std::f64::consts::PI / 8.0).cos().powi(2);
    assert!((v["value"].as_f64().unwrap() - want).abs() < 1e-12);
    assert!(v["local_minimum"].as_f64().unwrap().abs() < 1e-12);

    let unshifted = run(&["witness", "build", "--normalization", "paper"]);
    let wp = temp_file("wp.json", &String::from_utf8(unshifted.stdout).unwrap());
    let v = stdout_json(&run(&["witness", "eval", "--witness", wp.to_str().unwrap(), "--channel", &data("prbox.json")]));
    assert!((v["local_minimum"].as_f64().unwrap() + 2.25).abs() < 1e-12);
}

#[test]
fn identity_channel_is_entangled() {
    let id = QuantumChannel::identity_a_to_b(2);
    let ch = temp_file("id.json", &serde_json::to_string(&id).unwrap());
    let v = stdout_json(&run(&["witness", "separate", "--channel", ch.to_str().unwrap()]));
    assert_eq!(v["verdict"], json!("entangled"));
}

#[test]
fn process_subcommands() {
    let p = Process::classical(Behavior::pr_box(), Delay::INSTANT);
    let f = temp_file("p.json", &serde_json::to_string(&p).unwrap());
    let v = stdout_json(&run(&["process", "classify", "--process", f.to_str().unwrap()]));
    assert_eq!(v, serde_json::to_value(classify(&p)).unwrap());
    let v = stdout_json(&run(&["process", "check", "--process", f.to_str().unwrap()]));
    assert_eq!(v, json!({ "realizable": true }));

    let swap = Process::quantum(QuantumChannel::swap(2), Delay::INSTANT).unwrap();
    let f = temp_file("swap.json", &serde_json::to_string(&swap).unwrap());
    let v = stdout_json(&run(&["process", "check", "--process", f.to_str().unwrap()]));
    assert_eq!(v, json!({ "realizable": false }));

    let sp = bellnl_core::processes::Superprocess::identity([2, 2, 2, 2]);
    let s = temp_file("sp.json", &serde_json::to_string(&sp).unwrap());
    let f = temp_file("p2.json", &serde_json::to_string(&p).unwrap());
    let v = stdout_json(&run(&["process", "compose", "--superprocess", s.to_str().unwrap(), "--process", f.to_str().unwrap()]));
    let back: Process = serde_json::from_value(v).unwrap();
    assert!(back.channel().as_behavior().unwrap().max_abs_diff(&Behavior::pr_box()) < 1e-12);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("bellnl-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("chsh.json");
    let out = run(&["chsh", "--behavior", &data("prbox.json"), "--out", target.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(v, json!({ "chsh": 4.0 }));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["chsh", "--nope"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));

    let bad = temp_file("bad.json", "{\n  \"scenario\": [1,\n");
    let out = run(&["chsh", "--behavior", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(65));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["line"].as_u64().unwrap() >= 2);

    let unnormalized = r#"{"scenario":{"nx0":1,"ny0":1,"nx1":2,"ny1":2},"table":[[[[0.5,0.5],[0.5,0.5]]]]}"#;
    let f = temp_file("unnorm.json", unnormalized);
    let out = run(&["is-local", "--behavior", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("not normalized"));

    let out = run(&["rel-ent", "--behavior", &data("prbox.json"), "--tol", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_convergence_still_emits_result() {
    let out = run(&["rel-ent", "--behavior", &data("prbox.json"), "--max-iters", "3", "--restarts", "1", "--tol", "1e-14"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["converged"], json!(false));
}
