use std::fs;
use std::process::{Command, Output};

use rzasense_harness::output::CURVE_HEADER;

fn rzasense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rzasense"))
        .args(args)
        .output()
        .expect("spawn rzasense")
}

fn small_config(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("small.cfg");
    fs::write(
        &path,
        "# tiny sweep\nk_list = 2\nsnr_list = 0, 10\nepsilon_list = 2000\ntrials = 4\nn_max = 200\n",
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = rzasense(&[
        "run", "--trials", "3", "--snr-db", "-2", "--out", out.to_str().unwrap(), "--workers", "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CURVE_HEADER);
    for solver in ["rza-nlmf", "nlmf", "omp", "bpdn"] {
        assert!(csv.lines().any(|l| l.starts_with(&format!("{solver},"))), "{solver}");
    }
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("final mse"), "{stderr}");
}

#[test]
fn sweep_to_stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir);
    let out = dir.path().join("sweep.csv");
    let to_file = rzasense(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(to_file.status.success());
    let to_stdout = rzasense(&["sweep", "--config", &cfg, "--workers", "1"]);
    assert!(to_stdout.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap(), String::from_utf8(to_stdout.stdout).unwrap());
}

#[test]
fn no_decimate_keeps_every_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir);
    let o = rzasense(&["sweep", "--config", &cfg, "--solvers", "nlmf", "--no-decimate"]);
    assert!(o.status.success());
    let rows = String::from_utf8(o.stdout).unwrap().lines().count() - 1;
    assert_eq!(rows, 2 * 201);
}

#[test]
fn bounds_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir);
    let bounds = rzasense(&["bounds", "--config", &cfg]);
    assert!(bounds.status.success());
    assert_eq!(String::from_utf8(bounds.stdout).unwrap().lines().count(), 3);

    let curves = dir.path().join("c.csv");
    assert!(rzasense(&["sweep", "--config", &cfg, "--out", curves.to_str().unwrap()])
        .status
        .success());
    let cmp = rzasense(&["compare", "--config", &cfg, "--curves", curves.to_str().unwrap()]);
    assert!(cmp.status.success(), "{}", String::from_utf8_lossy(&cmp.stderr));
    assert!(String::from_utf8(cmp.stdout).unwrap().lines().count() > 1);
}

#[test]
fn compare_reports_missing_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir);
    let curves = dir.path().join("c.csv");
    assert!(rzasense(&["run", "--config", &cfg, "--k", "6", "--out", curves.to_str().unwrap()])
        .status
        .success());
    let cmp = rzasense(&["compare", "--config", &cfg, "--curves", curves.to_str().unwrap()]);
    assert_eq!(cmp.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&cmp.stderr).contains("k=6"));
}

#[test]
fn bad_config_key_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "trials = 3\nmystery = 1\n").unwrap();
    let o = rzasense(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.starts_with("error:") && stderr.contains("mystery"), "{stderr}");
}

#[test]
fn unknown_solver_rejected() {
    let o = rzasense(&["run", "--solvers", "lasso"]);
    assert!(!o.status.success());
}

#[test]
fn shipped_configs_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        rzasense_harness::ExperimentConfig::parse(&text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
