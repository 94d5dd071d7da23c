use std::path::Path;
use std::process::Command;

fn sft(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sft"))
        .args(args)
        .current_dir(dir)
        .env_remove("SFT_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &std::process::Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn synth_then_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = stdout(&sft(d, &["synth", "--scenario", "S1", "--n", "64", "--out", "s1.csv"]));
    assert!(out.contains("wrote 64 samples"));
    assert_eq!(std::fs::read_to_string(d.join("s1.csv")).unwrap().lines().count(), 64);

    let out = stdout(&sft(d, &["run", "--arch", "sfft", "--n", "64", "--steps", "65", "--in", "s1.csv", "--report", "r.json"]));
    assert!(out.contains("rmse="), "{out}");
    let csv = std::fs::read_to_string(d.join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("bin,oracle_re"));
    assert_eq!(csv.lines().count(), 1 + 31);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["architecture"], "sfft");
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["run", "--arch", "sdft", "--n", "64", "--steps", "33", "--scenario", "S4", "--quantized"];
    stdout(&sft(d, &[&args[..], &["--out", "a.csv"]].concat()));
    stdout(&sft(d, &[&args[..], &["--out", "b.csv"]].concat()));
    assert_eq!(std::fs::read(d.join("a.csv")).unwrap(), std::fs::read(d.join("b.csv")).unwrap());
}

#[test]
fn length_mismatch_and_bad_steps_fail() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    stdout(&sft(d, &["synth", "--n", "64", "--out", "x.csv"]));
    let o = sft(d, &["run", "--n", "256", "--in", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sft(d, &["run", "--n", "64", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sft(d, &["run", "--arch", "fancy"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_and_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.json"), r#"{"arch": "sdft", "n": "16,64", "steps": "17,33"}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sft"))
        .args(["--config", "cfg.json", "sweep", "--n", "16"])
        .current_dir(d)
        .env("SFT_OUT_DIR", d.join("results"))
        .output()
        .unwrap();
    let out = stdout(&o);
    assert!(out.contains("1/1"), "{out}");
    let csv = std::fs::read_to_string(d.join("results/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn cost_prints_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&sft(dir.path(), &["cost", "--arch", "sdft", "--n", "1024", "--steps", "75"]));
    assert!(out.contains("spike ops          2099200"), "{out}");
    let out = stdout(&sft(dir.path(), &["cost", "--arch", "sfft", "--json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["n_spike_ops"], 83968);
    assert_eq!(v["accelerators"].as_array().unwrap().len(), 3);
}

#[test]
fn rdmap_small_frame() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&sft(
        dir.path(),
        &["rdmap", "--n", "64", "--chirps", "16", "--steps", "65", "--range", "5", "--velocity", "2"],
    ));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0].replace("spiking", ""), lines[1].replace("oracle ", ""), "{out}");
    assert!(dir.path().join("rdmap.csv").exists());
}

#[test]
fn frame_synthesis_writes_all_chirps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    stdout(&sft(d, &["synth", "--scenario", "dynamic", "--frame", "--n", "64", "--chirps", "8", "--out", "f.f32"]));
    assert_eq!(std::fs::metadata(d.join("f.f32")).unwrap().len(), 64 * 8 * 8);
    let out = stdout(&sft(d, &["rdmap", "--in", "f.f32", "--n", "64", "--chirps", "8", "--steps", "33"]));
    assert!(out.contains("wrote 32x8 map"), "{out}");
}
