//! End-to-end checks of the command-line surface: subcommands, exit codes,
//! artifact files, and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn edgeworth(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgeworth"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_writes_the_three_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = edgeworth(
        &[
            "simulate",
            "--scenario",
            "symmetric_exchange",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for file in ["trajectory.csv", "record.json", "invariants.json"] {
        assert!(tmp.path().join("run").join(file).exists(), "{file} missing");
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("status=Converged"), "{stdout}");

    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/record.json")).unwrap())
            .unwrap();
    assert_eq!(record["status"], "Converged");
}

#[test]
fn simulate_accepts_scenario_files_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write(
        tmp.path(),
        "custom.toml",
        r#"
name = "custom"
[utility]
exponents = [[0.5, 0.5], [0.5, 0.5]]
[endowments]
bundles = [[3.0, 1.0], [1.0, 3.0]]
[network]
probabilities = [0.5, 0.5]
"#,
    );
    let out = edgeworth(
        &[
            "simulate",
            "--scenario",
            &path,
            "--out",
            "run",
            "--tolerance-overrides",
            "stop_mrs_dispersion=1e-10,max_steps=100000",
        ],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn invalid_scenario_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write(
        tmp.path(),
        "bad.toml",
        r#"
name = "bad"
[utility]
exponents = [[0.5, 0.5], [0.5, 0.5]]
[endowments]
bundles = [[3.0, 1.0], [1.0, 3.0]]
[network]
probabilities = [0.5, 0.4]
"#,
    );
    let out = edgeworth(
        &["simulate", "--scenario", &path, "--out", "run"],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("probabilit"));
}

#[test]
fn unknown_bundled_name_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = edgeworth(
        &["simulate", "--scenario", "no_such", "--out", "run"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn boundary_scenario_exits_3_with_status() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write(
        tmp.path(),
        "boundary.toml",
        r#"
name = "boundary_probe"
[utility]
exponents = [[0.2, 0.8], [0.8, 0.2]]
[endowments]
bundles = [[2.0, 2.0], [2.0, 2.0]]
[network]
probabilities = [0.5, 0.5]
[integrator]
boundary_floor = 1.5
"#,
    );
    let out = edgeworth(
        &["simulate", "--scenario", &path, "--out", "run"],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/record.json")).unwrap())
            .unwrap();
    assert_eq!(record["status"], "BoundaryApproach");
}

#[test]
fn sweep_runs_are_byte_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    for (dir, workers) in [("a", "1"), ("b", "3")] {
        let out = edgeworth(
            &[
                "sweep",
                "--scenario",
                "table1_row1",
                "--resolution",
                "5",
                "--out",
                dir,
                "--workers",
                workers,
            ],
            tmp.path(),
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for file in ["manifold.csv", "summary.json"] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = fs::read(tmp.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between worker counts");
    }
}

#[test]
fn sweep_with_unconvergable_points_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write(
        tmp.path(),
        "pinned.toml",
        r#"
name = "pinned"
[utility]
exponents = [[0.2, 0.8], [0.8, 0.2]]
[endowments]
bundles = [[2.0, 2.0], [2.0, 2.0]]
[network]
probabilities = [0.5, 0.5]
[integrator]
boundary_floor = 1.5
"#,
    );
    let out = edgeworth(
        &[
            "sweep",
            "--scenario",
            &path,
            "--resolution",
            "2",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifold = fs::read_to_string(tmp.path().join("run/manifold.csv")).unwrap();
    assert!(manifold.contains("BoundaryApproach"), "{manifold}");
}

#[test]
fn zero_resolution_sweep_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = edgeworth(
        &[
            "sweep",
            "--scenario",
            "table1_row1",
            "--resolution",
            "0",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn existence_reports_the_fixture_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let no_trade = write(
        tmp.path(),
        "mu3.toml",
        "mu = [[2, 1, 1], [1, 2, 1], [1, 1, 2]]\n",
    );
    let out = edgeworth(&["existence", &no_trade], tmp.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("trade_exists=false"), "{stdout}");
    assert!(stdout.contains("nullspace_dimension=0"), "{stdout}");

    let trade = write(
        tmp.path(),
        "mu4.toml",
        "mu = [[2, 1, 1, 0.5], [1, 2, 0.7, 1], [1, 1.3, 2, 1.1]]\n",
    );
    let out = edgeworth(&["existence", &trade], tmp.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("trade_exists=true"), "{stdout}");

    let malformed = write(tmp.path(), "mu_bad.toml", "mu = \"zebra\"\n");
    let out = edgeworth(&["existence", &malformed], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn walras_compare_writes_paths_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = edgeworth(
        &[
            "walras-compare",
            "--scenario",
            "asymmetric_mild",
            "--out",
            "cmp",
        ],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for file in [
        "fair_trajectory.csv",
        "walras_path.csv",
        "compare_summary.json",
    ] {
        assert!(tmp.path().join("cmp").join(file).exists(), "{file} missing");
    }
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("cmp/compare_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["equal_gains"]["passes"], true);
    assert!(summary["equilibrium_distance"].as_f64().unwrap() > 1e-3);

    // A three-agent scenario is a dimension error: exit 2.
    let out = edgeworth(
        &[
            "walras-compare",
            "--scenario",
            "table1_row1",
            "--out",
            "cmp2",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scenarios_list_names_every_bundled_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let out = edgeworth(&["scenarios", "list"], tmp.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in [
        "table1_row1",
        "table1_row2",
        "table1_row3",
        "table1_row4",
        "table1_row5",
        "symmetric_exchange",
        "asymmetric_mild",
        "asymmetric_skewed",
        "asymmetric_crossed",
    ] {
        assert!(stdout.contains(name), "missing {name} in:\n{stdout}");
    }
}
