use cheese_core::cheese::CheeseSpec;
use cheese_core::pipeline::Verdict;
use cheese_core::tower::{ExpTower, Stage, TowerSpec};
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn cheese(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cheese"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run cheese")
}

fn cheese_env(dir: &Path, args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cheese"))
        .current_dir(dir)
        .env(key, val)
        .args(args)
        .output()
        .expect("run cheese")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn gen(dir: &Path, holes: usize, out: &str) {
    let o = cheese(dir, &["gen-cheese", "--seed", "1", "--budget", "0.5", "--holes", &holes.to_string(), "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

fn verdict(dir: &Path, name: &str) -> Verdict {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn gen_cheese_zero_holes() {
    let d = TempDir::new().unwrap();
    gen(d.path(), 0, "s.json");
    let s = CheeseSpec::from_json(&read(d.path(), "s.json")).unwrap();
    assert!(s.holes.is_empty());
}

#[test]
fn gen_cheese_reports_radius_sum() {
    let d = TempDir::new().unwrap();
    let o = cheese(d.path(), &["gen-cheese", "--seed", "4", "--holes", "20", "--budget", "0.5", "--out", "s.json"]);
    assert_eq!(code(&o), 0);
    let s = CheeseSpec::from_json(&read(d.path(), "s.json")).unwrap();
    let sum: f64 = s.holes.iter().map(|h| h.radius).sum();
    assert_eq!(s.holes.len(), 20);
    assert!(sum < 0.5);
    assert!(stdout(&o).contains(&format!("{sum:.6}")));
}

#[test]
fn invalid_budget_exits_2() {
    let d = TempDir::new().unwrap();
    let o = cheese(d.path(), &["gen-cheese", "--budget", "1.5", "--out", "s.json"]);
    assert_eq!(code(&o), 2);
    assert!(!d.path().join("s.json").exists());
}

#[test]
fn exhausted_budget_exits_3() {
    let d = TempDir::new().unwrap();
    let o = cheese(d.path(), &["gen-cheese", "--budget", "1e-6", "--holes", "20", "--out", "s.json"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn missing_inputs_exit_2() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&cheese(d.path(), &["certify", "--tower", "none.json", "--out", "v.json"])), 2);
    assert_eq!(code(&cheese(d.path(), &["report", "--spec", "none.json", "--out-dir", "r"])), 2);
    assert_eq!(code(&cheese(d.path(), &["build-tower", "--kind", "exp", "--out", "t.json"])), 2);
}

#[test]
fn sqrt_tower_prints_alpha_bounds() {
    let d = TempDir::new().unwrap();
    let o = cheese(d.path(), &["build-tower", "--kind", "sqrt", "--stages", "3", "--seed", "2", "--out", "t.json"]);
    assert_eq!(code(&o), 0);
    let t = TowerSpec::from_json(&read(d.path(), "t.json")).unwrap();
    assert_eq!(t.sqrt_stages().len(), 3);
    for s in t.sqrt_stages() {
        assert!(s.alpha.norm() < 1.0 / s.level as f64);
    }
    assert_eq!(stdout(&o).lines().filter(|l| l.contains("< 1/")).count(), 3);
    let o = cheese(d.path(), &["certify", "--tower", "t.json", "--out", "v.json"]);
    assert_eq!(code(&o), 0);
    assert!(verdict(d.path(), "v.json").payload.sqrt.unwrap().fiber_cardinality_ok);
}

#[test]
fn constant_dictionary_gives_empty_cut() {
    let d = TempDir::new().unwrap();
    gen(d.path(), 0, "s.json");
    std::fs::write(d.path().join("c.json"), r#"{"family": "constant"}"#).unwrap();
    let o = cheese(d.path(), &["build-tower", "--config", "c.json", "--spec", "s.json", "--stages", "1", "--k", "0", "--out", "t.json"]);
    assert_eq!(code(&o), 0);
    let t = TowerSpec::from_json(&read(d.path(), "t.json")).unwrap();
    let st = t.exp_stage(1).unwrap();
    assert_eq!(st.truncations[0].crossings, 0);
    assert_eq!(st.truncations[0].cut_length, 0.0);
}

#[test]
fn exp_tower_rebuild_is_idempotent() {
    let d = TempDir::new().unwrap();
    gen(d.path(), 10, "s.json");
    for out in ["a.json", "b.json"] {
        let o = cheese(d.path(), &["build-tower", "--spec", "s.json", "--stages", "2", "--k", "5,10", "--out", out]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(read(d.path(), "a.json"), read(d.path(), "b.json"));
    let t = TowerSpec::from_json(&read(d.path(), "a.json")).unwrap();
    let again = ExpTower::rebuild(&t, None, false).unwrap();
    assert_eq!(again.spec, t);
    assert!(t.stages.iter().all(|s| matches!(s, Stage::Exponential(e) if e.m >= 1)));
}

#[test]
fn stage0_certificate_has_margin_pi() {
    let d = TempDir::new().unwrap();
    gen(d.path(), 8, "s.json");
    assert_eq!(code(&cheese(d.path(), &["build-tower", "--spec", "s.json", "--stages", "0", "--k", "8", "--out", "t.json"])), 0);
    let o = cheese(d.path(), &["certify", "--tower", "t.json", "--spec", "s.json", "--tests", "10", "--out", "v.json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = verdict(d.path(), "v.json");
    let c = &v.payload.certificates[0];
    assert!(c.pass_condition_8 && c.delta_margin >= std::f64::consts::PI);
}

#[test]
fn full_disc_gap_is_one() {
    let d = TempDir::new().unwrap();
    gen(d.path(), 0, "s.json");
    assert_eq!(code(&cheese(d.path(), &["build-tower", "--spec", "s.json", "--stages", "0", "--k", "0", "--out", "t.json"])), 0);
    assert_eq!(code(&cheese(d.path(), &["certify", "--tower", "t.json", "--tests", "5", "--out", "v.json"])), 0);
    let v = verdict(d.path(), "v.json");
    assert!((v.payload.nontriviality[0].gap - 1.0).abs() < 1e-10);
}

#[test]
fn n1_direct_and_recursive_agree() {
    let d = TempDir::new().unwrap();
    gen(d.path(), 10, "s.json");
    assert_eq!(code(&cheese(d.path(), &["build-tower", "--spec", "s.json", "--stages", "1", "--k", "5,10", "--out", "t.json"])), 0);
    let o = cheese(d.path(), &["certify", "--tower", "t.json", "--tests", "10", "--out", "v.json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = verdict(d.path(), "v.json");
    let n1: Vec<_> = v.payload.agreements.iter().filter(|a| a.stage == 1).collect();
    assert_eq!(n1.len(), 2);
    assert!(n1.iter().all(|a| a.moment_rel_diff <= 1e-6));
}

#[test]
fn failed_certificate_exits_1_and_writes_verdict() {
    let d = TempDir::new().unwrap();
    gen(d.path(), 5, "s.json");
    assert_eq!(code(&cheese(d.path(), &["build-tower", "--spec", "s.json", "--stages", "1", "--k", "5", "--out", "t.json"])), 0);
    std::fs::write(d.path().join("c.json"), r#"{"target_delta": 50.0, "test_count": 4}"#).unwrap();
    let o = cheese(d.path(), &["certify", "--config", "c.json", "--tower", "t.json", "--out", "v.json"]);
    assert_eq!(code(&o), 1);
    let v = verdict(d.path(), "v.json");
    assert!(!v.payload.all_pass);
    assert!(v.payload.certificates.iter().all(|c| !c.pass_condition_8));
}

#[test]
fn measure_writes_reports_and_pieces() {
    let d = TempDir::new().unwrap();
    gen(d.path(), 5, "s.json");
    assert_eq!(code(&cheese(d.path(), &["build-tower", "--spec", "s.json", "--stages", "1", "--k", "5", "--out", "t.json"])), 0);
    let o = cheese(d.path(), &["measure", "--tower", "t.json", "--pieces-dir", "p", "--out", "m.json"]);
    assert_eq!(code(&o), 0);
    let m: serde_json::Value = serde_json::from_str(&read(d.path(), "m.json")).unwrap();
    assert_eq!(m.as_array().unwrap().len(), 4);
    assert!(d.path().join("p/pieces_N1_k5.csv").exists());
}

#[test]
fn report_counts() {
    let d = TempDir::new().unwrap();
    gen(d.path(), 0, "s0.json");
    assert_eq!(code(&cheese(d.path(), &["report", "--spec", "s0.json", "--out-dir", "r0"])), 0);
    assert_eq!(read(d.path(), "r0/cheese.svg").matches("<circle").count(), 1);

    gen(d.path(), 5, "s5.json");
    assert_eq!(code(&cheese(d.path(), &["build-tower", "--spec", "s5.json", "--stages", "2", "--k", "3,5", "--out", "t.json"])), 0);
    assert_eq!(code(&cheese(d.path(), &["certify", "--tower", "t.json", "--tests", "6", "--out", "v.json"])), 0);
    let o = cheese(d.path(), &["report", "--spec", "s5.json", "--tower", "t.json", "--verdict", "v.json", "--out-dir", "r5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(d.path(), "r5/cheese.svg").matches("<circle").count(), 6);
    let v = verdict(d.path(), "v.json");
    let summary = read(d.path(), "r5/summary.txt");
    assert_eq!(summary.lines().count(), v.payload.certificates.len());
    assert_eq!(v.payload.certificates.len(), 2 * 3);
    assert!(read(d.path(), "r5/arcs.csv").lines().count() > 1);
}

#[test]
fn flags_override_config_and_output_dir_applies() {
    let d = TempDir::new().unwrap();
    std::fs::write(d.path().join("c.json"), r#"{"seed": 5, "hole_count": 4, "output_dir": "out"}"#).unwrap();
    assert_eq!(code(&cheese(d.path(), &["gen-cheese", "--config", "c.json", "--seed", "6", "--out", "s.json"])), 0);
    let s = CheeseSpec::from_json(&read(d.path(), "out/s.json")).unwrap();
    assert_eq!(s.seed, 6);
    assert_eq!(s.holes.len(), 4);
    std::fs::write(d.path().join("bad.json"), r#"{"sede": 5}"#).unwrap();
    assert_eq!(code(&cheese(d.path(), &["gen-cheese", "--config", "bad.json", "--out", "x.json"])), 2);
}

#[test]
fn verdict_payload_is_thread_invariant() {
    let d = TempDir::new().unwrap();
    gen(d.path(), 6, "s.json");
    assert_eq!(code(&cheese(d.path(), &["build-tower", "--spec", "s.json", "--stages", "2", "--k", "6", "--out", "t.json"])), 0);
    let mut payloads = Vec::new();
    for (threads, out) in [("1", "v1.json"), ("4", "v4.json")] {
        let o = cheese_env(d.path(), &["certify", "--tower", "t.json", "--tests", "8", "--out", out], "CHEESE_THREADS", threads);
        assert_eq!(code(&o), 0);
        payloads.push(serde_json::to_string(&verdict(d.path(), out).payload).unwrap());
    }
    assert_eq!(payloads[0], payloads[1]);
    let o = cheese_env(d.path(), &["certify", "--tower", "t.json", "--out", "v.json"], "CHEESE_THREADS", "zero");
    assert_eq!(code(&o), 2);
}

