use std::path::Path;
use std::process::Command;

fn lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kahler-lab"))
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn perturbation_passes_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab()
        .args(["run", "perturbation", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() == 4, "{stdout}");
    let m: serde_json::Value = serde_json::from_slice(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(m["manifest_version"], 1);
    assert_eq!(m["experiment"], "perturbation");
    assert_eq!(m["library"]["name"], "kahler-lab");
    assert_eq!(m["passed"], true);
    for a in m["artifacts"].as_array().unwrap() {
        assert!(dir.path().join(a.as_str().unwrap()).exists(), "{a}");
    }
    let csv = String::from_utf8(read(dir.path(), "perturbation.csv")).unwrap();
    assert!(csv.starts_with("s,with_correction,without_correction\n"));
    assert!(dir.path().join("plot_perturbation.py").exists());
}

#[test]
fn same_seed_gives_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let s = lab()
            .args(["run", "bergman-tv", "--seed", "5", "--grid-n", "128", "--k", "8,16", "--out"])
            .arg(d.path())
            .output()
            .unwrap()
            .status;
        assert!(s.success());
    }
    for name in ["bergman_tv.csv", "bergman_measure_fs.csv", "corpus.json", "manifest.json"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let c = tempfile::tempdir().unwrap();
    lab()
        .args(["run", "bergman-tv", "--seed", "6", "--grid-n", "128", "--k", "8,16", "--out"])
        .arg(c.path())
        .output()
        .unwrap();
    assert_ne!(read(a.path(), "corpus.json"), read(c.path(), "corpus.json"));
}

#[test]
fn schema_errors_exit_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab().args(["run", "bergman-tv", "--k", "", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k_list"));

    let out = lab()
        .args(["run", "perturbation", "--tol-override", "nonsense=1", "--tol-override", "slope_min=-1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tolerances.nonsense") && err.contains("tolerances.slope_min"), "{err}");

    let out = lab().args(["run", "no-such-experiment"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"grid": {"n": 8}}"#).unwrap();
    let out = lab().args(["run", "fields-identities", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.n"));
}

#[test]
fn tolerance_failure_exits_one_and_names_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab()
        .args(["run", "perturbation", "--tol-override", "slope_min=2.5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("slope"));
    let m: serde_json::Value = serde_json::from_slice(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(m["passed"], false);
}

#[test]
fn config_file_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": "bergman-tv", "grid": {"n": 64}, "k_list": [8, 16], "seed": 3, "output_dir": "ignored"}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let s = lab()
        .args(["run", "bergman-tv", "--seed", "4", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap()
        .status;
    assert!(s.success());
    let m: serde_json::Value = serde_json::from_slice(&read(&out_dir, "manifest.json")).unwrap();
    assert_eq!(m["config"]["seed"], 4);
    assert_eq!(m["config"]["grid"]["n"], 64);
    assert_eq!(m["config"]["k_list"], serde_json::json!([8, 16]));
}

#[test]
fn help_documents_csv_columns() {
    let out = lab().args(["run", "--help"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["--tol-override", "--grid-n", "--t-nodes", "bergman_tv.csv: element,k,tv,mass"] {
        assert!(text.contains(needle), "{needle}");
    }
}
