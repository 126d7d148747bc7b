use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn illposed(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_illposed"))
        .current_dir(dir)
        .env_remove("ILLPOSED_CACHE_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn identity_reports_exact_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = illposed(dir.path(), &["identity", "--kmax", "50", "--jmax", "50"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "PASS (2550 exact checks)");
    assert!(dir.path().join("out/identity_manifest.json").exists());
}

#[test]
fn spectrum_is_reproducible_and_cache_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--op", "DHa", "--scheme", "left", "--n", "20", "--precision", "512"];
    let csv = dir.path().join("out/spectrum_DHa_left_N20.csv");
    let json = dir.path().join("out/spectrum_DHa_left_N20.json");

    assert!(illposed(dir.path(), &args).status.success());
    let (csv1, json1) = (fs::read(&csv).unwrap(), fs::read(&json).unwrap());
    assert_eq!(String::from_utf8_lossy(&csv1).lines().count(), 21);

    assert!(illposed(dir.path(), &args).status.success());
    assert_eq!(fs::read(&csv).unwrap(), csv1);
    assert_eq!(fs::read(&json).unwrap(), json1);

    let cached: Vec<&str> = args.iter().copied().chain(["--cache", "cache"]).collect();
    for _ in 0..2 {
        assert!(illposed(dir.path(), &cached).status.success());
        assert_eq!(fs::read(&csv).unwrap(), csv1);
        assert_eq!(fs::read(&json).unwrap(), json1);
    }
    assert_eq!(fs::read_dir(dir.path().join("cache")).unwrap().count(), 2);
}

#[test]
fn figure2_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let o = illposed(dir.path(), &["figures", "--which", "fig2", "--out", "figs"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<String> = fs::read_dir(dir.path().join("figs/fig2"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.iter().filter(|n| n.ends_with(".svg")).count(), 2);
    assert_eq!(names.iter().filter(|n| n.ends_with("_N20.csv")).count(), 4);
    assert!(dir.path().join("figs/fig2_manifest.json").exists());
    assert!(dir.path().join("figs/figures_manifest.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(illposed(dir.path(), &["spectrum", "--op", "XX", "--n", "3"]).status.code(), Some(2));
    let short = illposed(dir.path(), &["fit", "--op", "J", "--scheme", "galerkin", "--n", "10", "--window", "1:2"]);
    assert_eq!(short.status.code(), Some(2));
    let tol = illposed(
        dir.path(),
        &["spectrum", "--op", "DHa", "--scheme", "right", "--n", "3", "--precision", "64", "--tol", "1e-300"],
    );
    assert_eq!(tol.status.code(), Some(4));
    let todd = illposed(dir.path(), &["todd", "--nmax", "14"]);
    assert_eq!(todd.status.code(), Some(2));
}

#[test]
fn table1_labels_open_cells() {
    let dir = tempfile::tempdir().unwrap();
    let o = illposed(dir.path(), &["table1", "--galerkin-n", "256"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("out/table1.txt")).unwrap();
    let open: Vec<&str> = text.lines().filter(|l| l.contains("bounds only, open")).collect();
    assert_eq!(open.len(), 2);
    assert!(open[0].contains("HaJ") && open[1].contains("DHa"));
    assert!(text.lines().any(|l| l.contains("CJ") && l.contains("sigma_i ~ i^-2")));
}

#[test]
fn ncnc_trace_reaches_depth() {
    let dir = tempfile::tempdir().unwrap();
    let o = illposed(dir.path(), &["ncnc", "--n", "12", "--precision", "256"]);
    assert!(o.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/ncnc_DHa_N12.json")).unwrap()).unwrap();
    assert!(doc["trace"]["depth"].as_u64().unwrap() >= 4);
    assert_eq!(doc["witness"]["holds"], true);
}
