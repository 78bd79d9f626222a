use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../schemas/{name}.v1.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let value: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&value).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let s = schema(name);
    let msgs: Vec<String> = match s.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{name} schema violations: {msgs:?}\n{doc:#}");
}

fn gcc15_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/gcc15.code")
}

/// Runs the binary in `cwd` with an isolated cache directory and no
/// inherited `GAUGEGAP_*` settings.
fn run_in(cwd: &Path, cache: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gaugegap"));
    cmd.current_dir(cwd).arg("-q").args(args);
    for (k, _) in std::env::vars() {
        if k.starts_with("GAUGEGAP_") {
            cmd.env_remove(k);
        }
    }
    cmd.env("GAUGEGAP_CACHE_DIR", cache);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn cache(&self) -> PathBuf {
        self.dir.path().join("cache")
    }

    fn run(&self, args: &[&str]) -> Output {
        run_in(self.dir.path(), &self.cache(), args, &[])
    }

    fn json(&self, args: &[&str]) -> Value {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    }
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn models_listing_matches_schema() {
    let sb = Sandbox::new();
    let v = sb.json(&["models"]);
    assert_valid("models", &v);
    assert_eq!(v["models"].as_array().unwrap().len(), 6);
}

#[test]
fn xy_plaquette_csv_has_table_row() {
    let sb = Sandbox::new();
    let out = sb.run(&["--csv", "gap", "--model", "xy-plaquette", "--size", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,sector,w_sZ,lambda,is_argmin,gap"));
    let argmin: Vec<&str> = lines.filter(|l| l.contains(",true,")).collect();
    assert_eq!(argmin.len(), 1, "{text}");
    assert!(argmin[0].starts_with("16,"), "{}", argmin[0]);
    assert!(argmin[0].ends_with(",8,19.313708,true,3.313708"), "{}", argmin[0]);
}

#[test]
fn gcc_file_reproduces_table() {
    let sb = Sandbox::new();
    let file = gcc15_path();
    let v = sb.json(&["gap", "--file", file.to_str().unwrap()]);
    assert_valid("run-record", &v);
    let p = &v["payload"];
    assert_valid("gap-report", p);
    assert!((p["gap"].as_f64().unwrap() - 3.241089).abs() < 1e-4);
    assert!((p["lambda1"].as_f64().unwrap() - 25.455844).abs() < 1e-4);
    assert_eq!(p["meta"]["ideals"], 6);
    let best = &p["candidates"][p["argmin"].as_u64().unwrap() as usize];
    assert_eq!(best["w_frustrated"], 8);
}

#[test]
fn spectrum_and_protofact_match_schemas() {
    let sb = Sandbox::new();
    let v = sb.json(&["spectrum", "--model", "xy1d", "--size", "6", "--k", "3"]);
    assert_valid("run-record", &v);
    assert_valid("spectrum", &v["payload"]);
    assert_eq!(v["payload"]["values"].as_array().unwrap().len(), 3);
    let v = sb.json(&["gap", "--model", "compass2d", "--size", "3", "--check-protofact"]);
    assert_valid("gap-report", &v["payload"]);
    assert!(v["payload"]["protofact"].is_object());
}

#[test]
fn verify_with_oracle_and_perron_passes() {
    let sb = Sandbox::new();
    let out = sb.run(&["verify", "--model", "compass2d", "--size", "3", "--oracle", "--perron"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid("verify", &v);
    assert_eq!(v["passed"], true);
}

#[test]
fn decompose_json_and_text() {
    let sb = Sandbox::new();
    let v = sb.json(&["decompose", "--model", "xy1d", "--size", "4"]);
    assert_valid("decompose", &v);
    assert_eq!(v["verified"], true);
    let text = stdout(&sb.run(&["decompose", "--model", "ising1d", "--size", "3", "--text"]));
    let last = text.lines().last().unwrap();
    let summary: Value = serde_json::from_str(last).unwrap();
    assert_eq!(summary, serde_json::json!({"k":0,"m_x":1,"m_z":0,"r":2}));
    assert!(text.lines().any(|l| l == "S_X 111"));
}

#[test]
fn ideals_cheeger_gapscan_bench_match_schemas() {
    let sb = Sandbox::new();
    let v = sb.json(&["ideals", "--model", "xy-plaquette", "--size", "4"]);
    assert_valid("ideals", &v);
    assert_eq!(v["count"], 4);
    let v = sb.json(&["cheeger", "--double-well", "12"]);
    assert_valid("cheeger", &v);
    let v = sb.json(&["cheeger", "--model", "xy1d", "--size", "6", "--crossings"]);
    assert_valid("cheeger", &v);
    let v = sb.json(&["gapscan", "--model", "ising1d", "--sizes", "6,8"]);
    assert_valid("gapscan", &v);
    let v = sb.json(&["bench", "--model", "xy1d", "--size", "6", "--applies", "2"]);
    assert_valid("bench", &v);
}

#[test]
fn gapscan_csv_is_decreasing_for_ising() {
    let sb = Sandbox::new();
    let text = stdout(&sb.run(&["--csv", "gapscan", "--model", "ising1d", "--sizes", "6,8,10"]));
    let gaps: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(gaps.len(), 3);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn bad_input_exits_2_with_json_error() {
    let sb = Sandbox::new();
    let out = sb.run(&["spectrum", "--model", "xy1d", "--size", "4", "--sector", "zz"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_valid("error", &err);
    assert_eq!(err["error"]["kind"], "input");

    let missing = sb.dir.path().join("missing.code");
    let out = sb.run(&["gap", "--file", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exhausted_budget_exits_3() {
    let sb = Sandbox::new();
    let out = sb.run(&["--no-cache", "spectrum", "--model", "compass2d", "--size", "5", "--max-matvecs", "5", "--no-ideals"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_valid("error", &err);
    assert_eq!(err["error"]["kind"], "convergence");
}

#[test]
fn cache_hit_returns_identical_record() {
    let sb = Sandbox::new();
    let args = ["gap", "--model", "compass2d", "--size", "4"];
    let first = sb.json(&args);
    let entries = std::fs::read_dir(sb.cache()).unwrap().count();
    assert_eq!(entries, 1);
    let second = sb.json(&args);
    assert_eq!(first, second);
    let fresh = sb.json(&["--no-cache", "--threads", "1", "gap", "--model", "compass2d", "--size", "4"]);
    assert_eq!(first["payload"], fresh["payload"]);
}

#[test]
fn settings_precedence() {
    let sb = Sandbox::new();
    std::fs::write(sb.dir.path().join("gaugegap.toml"), "seed = 5\ntol = 1e-7\n").unwrap();
    let args = ["spectrum", "--model", "xy1d", "--size", "4"];
    let seed_of = |out: Output| {
        assert!(out.status.success());
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        (v["solver"]["seed"].as_u64().unwrap(), v["solver"]["tol"].as_f64().unwrap())
    };
    let cwd = sb.dir.path();
    let cache = sb.cache();
    assert_eq!(seed_of(run_in(cwd, &cache, &args, &[])), (5, 1e-7));
    assert_eq!(seed_of(run_in(cwd, &cache, &args, &[("GAUGEGAP_SEED", "7")])), (7, 1e-7));
    let mut with_flag = vec!["--seed", "9"];
    with_flag.extend(args);
    assert_eq!(seed_of(run_in(cwd, &cache, &with_flag, &[("GAUGEGAP_SEED", "7")])), (9, 1e-7));

    std::fs::write(cwd.join("gaugegap.toml"), "sede = 5\n").unwrap();
    assert_eq!(run_in(cwd, &cache, &args, &[]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let sb = Sandbox::new();
    let path = sb.dir.path().join("models.json");
    let out = sb.run(&["--out", path.to_str().unwrap(), "models"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_valid("models", &v);
}
