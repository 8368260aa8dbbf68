use std::path::Path;
use std::process::{Command, Output};

use psc_plumb::pipeline::PipelineConfig;
use psc_plumb::plumbing::{Edge, PlumbingTree};
use psc_plumb::profile::default_ladder;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psc-plumb"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn quick_config(dir: &Path) -> String {
    let cfg = PipelineConfig { grid: 256, oracle_samples: 8, ladder: default_ladder()[..1].to_vec(), ..Default::default() };
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn construct_verify_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let c = run(&["construct", "--config", &cfg, "--out", out_s, "--seed", "5"]);
    // the Z₂ collar check fails for these parameters
    assert_eq!(c.status.code(), Some(1), "{}", String::from_utf8_lossy(&c.stderr));
    assert!(String::from_utf8_lossy(&c.stderr).contains("step0/z2.mean_curvature"));
    for f in ["certificate.json", "profiles/step-0.csv", "profiles/step-0.json", "plots-data/step-0-margins.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let v1 = run(&["verify", "--out", out_s, "--seed", "5"]);
    let v2 = run(&["verify", "--out", out_s, "--seed", "5", "--sequential"]);
    assert_eq!(v1.status.code(), Some(1));
    assert!(!v1.stdout.is_empty());
    assert_eq!(v1.stdout, v2.stdout);
    let cert: serde_json::Value = serde_json::from_slice(&v1.stdout).unwrap();
    assert_eq!(cert["schema"], "psc-plumb/certificate");

    let r = run(&["report", "--out", out_s]);
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.lines().any(|l| l == "FAIL certificate"));
    assert!(text.lines().any(|l| l.starts_with("PASS step0/bc2.f_prime")));
}

#[test]
fn grid_and_tol_flags_reach_the_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let out = dir.path().join("o");
    run(&["construct", "--config", &cfg, "--out", out.to_str().unwrap(), "--grid", "320", "--tol", "1e-7"]);
    let cert: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["config"]["grid"], 320);
    assert_eq!(cert["config"]["bc_tol"], 1e-7);
}

#[test]
fn rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.v_spec.big_r = 1.6;
    let path = dir.path().join("bad.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let o = run(&["construct", "--config", path.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("R/N"));

    let mut cyc = PlumbingTree::tangent_chain(3, 1);
    cyc.edges.push(Edge { v: 2, w: 0, sign: 1 });
    let tp = dir.path().join("cyc.json");
    std::fs::write(&tp, serde_json::to_string(&cyc).unwrap()).unwrap();
    assert_eq!(run(&["topo", "--tree", tp.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn topo_and_eta() {
    let dir = tempfile::tempdir().unwrap();
    let mut chain = PlumbingTree::tangent_chain(8, 1);
    chain.equivariant = true;
    let tp = dir.path().join("chain.json");
    std::fs::write(&tp, serde_json::to_string(&chain).unwrap()).unwrap();
    let o = run(&["topo", "--tree", tp.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["arf"], 0);
    assert_eq!(v["sphere"], true);
    assert!(v["eta"]["eta"]["1"].is_object(), "{v}");

    let ep = dir.path().join("eta.json");
    std::fs::write(&ep, r#"{"k": 2, "lengths": [1, 2, 3], "convention": "chain"}"#).unwrap();
    let o = run(&["eta", "--config", ep.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["distinct"], true);
    assert!(run(&["eta"]).status.success());
}
