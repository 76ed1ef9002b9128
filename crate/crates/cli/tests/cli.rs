use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nestcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nestcode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn rows<'a>(text: &'a str, scheme: &str) -> Vec<Vec<&'a str>> {
    body(text)
        .into_iter()
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|r| r[0] == scheme)
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn region_summary_has_tangency_points() {
    let o = nestcode(&["region", "--snr", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# point A = (1.29248125, 1.02944684)"), "{text}");
    assert!(text.contains("# point B = (1.02944684, 1.29248125)"));
    assert_eq!(body(&text)[0], "scheme,alpha,r1,r2,clamped");
    let ob = 0.5 * 6f64.log2();
    for line in &body(&text)[1..] {
        let r: Vec<&str> = line.split(',').collect();
        assert!(num(r[2]) <= ob + 1e-8 && num(r[3]) <= ob + 1e-8, "{line}");
    }
    assert_eq!(rows(&text, "CF-baseline").len(), 3);
    assert_eq!(rows(&text, "outer-bound").len(), 3);
    assert!(!rows(&text, "hull").is_empty() && !rows(&text, "hull-cf").is_empty());
}

#[test]
fn region_grid_of_one_keeps_a_and_b() {
    let text = stdout(&nestcode(&["region", "--snr", "5", "--grid", "1", "--no-cf", "--no-outer"]));
    let t1 = rows(&text, "T1-region");
    assert_eq!(t1.len(), 1);
    assert_eq!(&t1[0][1..4], &["0.833333333", "1.29248125", "1.02944684"]);
    assert_eq!(rows(&text, "T2-region")[0][2..4], ["1.02944684", "1.29248125"]);
    assert!(rows(&text, "CF-baseline").is_empty() && rows(&text, "outer-bound").is_empty());
}

#[test]
fn region_json_for_the_relay_figures() {
    for snr in ["2", "6"] {
        let o = nestcode(&["region", "--snr", snr, "--format", "json"]);
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let s = &v["report"]["summary"];
        let x: f64 = snr.parse().unwrap();
        assert!((s["outer_bound"].as_f64().unwrap() - 0.5 * (1.0 + x).log2()).abs() < 1e-12);
        assert!((s["hull_cf_symmetric_rate"].as_f64().unwrap() - 0.5 * (0.5 + x).log2()).abs() < 1e-12);
    }
}

#[test]
fn region_writes_file_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = nestcode(&["region", "--snr", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("outer bound = 0.79248125"));
    assert!(fs::read_to_string(&out).unwrap().starts_with("# nestcode"));
}

fn simulate_to(dir: &Path, extra: &[&str]) -> String {
    let out = dir.join("sim.csv");
    let mut args = vec!["simulate", "--family", "d", "--n", "4", "--k", "1", "--f", "4", "--trials", "4000", "--seed", "11"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let o = nestcode(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    fs::read_to_string(out).unwrap()
}

#[test]
fn simulate_is_reproducible_across_runs_and_threads() {
    // same output path, so even the recorded config matches
    let dir = tempfile::tempdir().unwrap();
    let a = simulate_to(dir.path(), &["--snr", "20,40", "--threads", "1"]);
    let b = simulate_to(dir.path(), &["--snr", "20,40", "--threads", "1"]);
    let c = simulate_to(dir.path(), &["--snr", "20,40", "--threads", "4"]);
    assert_eq!(a, b);
    assert_eq!(body(&a), body(&c));
    assert_eq!(body(&a).len(), 3);
    assert!(body(&a)[1].starts_with("20,1,4,D,1,4,4000,"));
}

#[test]
fn simulate_rejects_non_reciprocal_alpha() {
    let o = nestcode(&["simulate", "--family", "z", "--n", "2", "--alpha", "2/3", "--snr", "5", "--trials", "10", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda1 in alpha1*lambda2"));
}

#[test]
fn invalid_configuration_exits_with_two() {
    for args in [
        vec!["simulate", "--snr", "5", "--trials", "0", "--seed", "1"],
        vec!["simulate", "--family", "hexagonal", "--snr", "5"],
        vec!["simulate", "--snr", "5", "--k", "2", "--alpha", "1/2"],
        vec!["simulate", "--snr", "0", "--seed", "1"],
        vec!["region", "--snr", "5", "--grid", "0"],
        vec!["validate-lattice", "--family", "general", "--n", "2", "--seed", "1"],
        vec!["simulate", "--snr", "5", "--config", "/nonexistent.json"],
    ] {
        let o = nestcode(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"family": "z", "n": 2, "k": 1, "f": 2, "snr": [10, 30], "trials": 500, "seed": 4}"#).unwrap();
    let o = nestcode(&["simulate", "--config", cfg.to_str().unwrap(), "--trials", "700"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let b = body(&text);
    assert_eq!(b.len(), 3);
    assert!(b[1].starts_with("10,1,2,Z,1,2,700,"), "{}", b[1]);
}

#[test]
fn recorded_config_replays_the_run() {
    let first = stdout(&nestcode(&["gtwrc", "--family", "d", "--n", "4", "--k", "2", "--f", "1", "--snr", "8", "--trials", "3000", "--seed", "5"]));
    let config = first
        .lines()
        .find_map(|l| l.strip_prefix("# config: "))
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("replay.json");
    fs::write(&cfg, config).unwrap();
    let again = stdout(&nestcode(&["gtwrc", "--config", cfg.to_str().unwrap()]));
    assert_eq!(first, again);
}

#[test]
fn missing_seed_is_generated_and_recorded() {
    let text = stdout(&nestcode(&["simulate", "--family", "z", "--n", "1", "--k", "1", "--snr", "10", "--trials", "100"]));
    let config = text.lines().find_map(|l| l.strip_prefix("# config: ")).unwrap();
    let v: serde_json::Value = serde_json::from_str(config).unwrap();
    let seed = v["seed"].as_u64().unwrap();
    assert!(body(&text)[1].ends_with(&format!(",{seed}")));
}

#[test]
fn gtwrc_noiseless_and_consistent() {
    let text = stdout(&nestcode(&["gtwrc", "--family", "e8", "--k", "1", "--snr", "1e9", "--trials", "2000", "--seed", "3"]));
    let b = body(&text);
    assert_eq!(b[0], "snr,alpha1,trials,uplink_errors,e2e_errors,seed");
    assert_eq!(b[1], "1e+09,1,2000,0,0,3");

    let o = nestcode(&["gtwrc", "--family", "d", "--n", "4", "--k", "2", "--f", "1", "--snr", "4,8", "--trials", "3000", "--seed", "9", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for r in v["reports"].as_array().unwrap() {
        assert_eq!(r["uplink_errors"], r["e2e_errors"]);
    }
}

#[test]
fn gtwrc_bodies_do_not_depend_on_threads() {
    let run = |t: &str| stdout(&nestcode(&["gtwrc", "--family", "e8", "--snr", "3,9", "--trials", "9000", "--seed", "8", "--threads", t]));
    let one = run("1");
    assert_eq!(body(&one), body(&run("3")));
}

#[test]
fn validate_lattice_passes_for_e8_and_d4() {
    for (fam, n) in [("e8", "8"), ("d", "4"), ("z", "16")] {
        let o = nestcode(&["validate-lattice", "--family", fam, "--n", n, "--samples", "2000", "--seed", "2", "--format", "json"]);
        assert!(o.status.success(), "{fam}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let checks = v["checks"].as_array().unwrap();
        assert_eq!(checks.len(), 5);
        assert!(checks.iter().all(|c| c["passed"] == true));
    }
}
