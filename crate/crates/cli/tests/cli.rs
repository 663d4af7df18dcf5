//! End-to-end tests of the `floydlab` binary: deterministic emission on the
//! shipped scenarios, the exit-status contract, and the fixed table
//! schemas.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

/// Run the binary with a clean FLOYDLAB_OUT environment.
fn floydlab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_floydlab"));
    cmd.args(args);
    cmd.env_remove("FLOYDLAB_OUT");
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().expect("spawning floydlab")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process terminated by signal")
}

/// All regular files directly under `dir`, sorted by name.
fn files_in(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|entry| entry.unwrap().path())
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    files
}

/// Run `verb` twice on `name` into fresh directories (plus any extra args)
/// and demand byte-identical emission.
fn assert_deterministic(verb: &str, name: &str, extra: &[&str]) {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let path = scenario(name);
    let path = path.to_str().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let mut args = vec![verb, path, "--out", dir.to_str().unwrap()];
        args.extend_from_slice(extra);
        let output = floydlab(&args, &[]);
        assert_eq!(
            exit_code(&output),
            0,
            "{verb} {name} failed:\n{}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    let a = files_in(dir_a.path());
    let b = files_in(dir_b.path());
    assert!(!a.is_empty(), "{verb} {name} wrote nothing");
    assert_eq!(a.len(), b.len());
    for (fa, fb) in a.iter().zip(&b) {
        assert_eq!(fa.file_name(), fb.file_name());
        assert_eq!(
            fs::read(fa).unwrap(),
            fs::read(fb).unwrap(),
            "{} differs between repeated runs",
            fa.file_name().unwrap().to_string_lossy()
        );
    }
}

#[test]
fn criterion_12_cli_determinism_and_check_gate() {
    // Repeated `run` on every shipped scenario is byte-identical.
    for name in [
        "free_classical.txt",
        "free_tilted.json",
        "free_launch.txt",
        "well_ground.txt",
        "linear_ramp.txt",
        "energy_sweep.txt",
    ] {
        assert_deterministic("run", name, &[]);
    }
    // Concurrent sweep execution stays deterministic.
    assert_deterministic("sweep", "energy_sweep.txt", &["--threads", "4"]);

    // `check` passes at the shipped tolerances ...
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("free_classical.txt");
    let ok = floydlab(
        &["check", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(exit_code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));

    // ... and an injected tolerance violation flips the exit status to 1.
    let squeezed = floydlab(
        &[
            "check",
            path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--tol-scale",
            "1e-12",
        ],
        &[],
    );
    assert_eq!(exit_code(&squeezed), 1);
    let stderr = String::from_utf8_lossy(&squeezed.stderr);
    assert!(stderr.contains("identity checks failed"), "{stderr}");

    println!(
        "PASS criterion 12: repeated runs byte-identical on 6 scenarios (sweep under \
         --threads 4), check exit 0 at shipped tolerances and 1 under a 1e-12 squeeze"
    );
}

#[test]
fn classical_free_trajectory_has_a_constant_momentum_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("free_classical.txt");
    let output = floydlab(
        &["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(exit_code(&output), 0);

    let csv = fs::read_to_string(dir.path().join("free_classical.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,W,W_x,schwarzian,residual,t_minus_t0",
        "trajectory column schema is pinned"
    );
    // m = 1, E = 1/2: the classical momentum is exactly 1.
    let mut rows = 0;
    for line in lines {
        let w_x: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((w_x - 1.0).abs() <= 1e-12, "W_x = {w_x} deviates from sqrt(2mE)");
        rows += 1;
    }
    assert_eq!(rows, 61);
    assert!(csv.ends_with('\n') && !csv.contains('\r'), "LF line endings");
}

#[test]
fn well_report_carries_the_closed_forbidden_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("well_ground.txt");
    let output = floydlab(
        &["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(exit_code(&output), 0);

    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("well_ground.report.json")).unwrap())
            .unwrap();
    assert_eq!(report["data"]["kind"], "timing");
    let kappa = report["data"]["level"]["kappa"].as_f64().unwrap();
    let fraction = report["data"]["fraction_forbidden"].as_f64().unwrap();
    let half_width = 1.0; // pinned by the scenario file
    assert!(
        (fraction * (kappa * half_width + 1.0) - 1.0).abs() <= 1e-12,
        "fraction {fraction} is not 1/(kappa q + 1) for kappa {kappa}"
    );
    assert_eq!(report["meta"]["verb"], "run");
    assert_eq!(report["meta"]["rng"], "chacha12");
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn indefinite_microstates_exit_2_and_name_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(
        &bad,
        "potential.kind = free\ncontext.mass = 1.0\ncontext.hbar = 1.0\n\
         context.energy = 0.5\nmicrostate.a = 1.0\nmicrostate.b = 1.0\nmicrostate.c = 3.0\n",
    )
    .unwrap();
    let output = floydlab(
        &["run", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(exit_code(&output), 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("positive definite"), "stderr must name the invariant: {stderr}");
}

#[test]
fn unknown_keys_exit_2_with_the_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "potential.kind = free\npotential.depth = 3.0\n").unwrap();
    let output = floydlab(
        &["run", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(exit_code(&output), 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown key `potential.depth`"), "{stderr}");
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn the_out_env_var_overrides_the_flag() {
    let chosen = tempfile::tempdir().unwrap();
    let ignored = tempfile::tempdir().unwrap();
    let path = scenario("free_tilted.json");
    let output = floydlab(
        &["run", path.to_str().unwrap(), "--out", ignored.path().to_str().unwrap()],
        &[("FLOYDLAB_OUT", chosen.path().to_str().unwrap())],
    );
    assert_eq!(exit_code(&output), 0);
    assert!(!files_in(chosen.path()).is_empty(), "env-selected directory got the files");
    assert!(files_in(ignored.path()).is_empty(), "--out directory must be ignored");
}

#[test]
fn the_format_flag_restricts_emission() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("free_tilted.json");
    let output = floydlab(
        &[
            "run",
            path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--format",
            "csv",
        ],
        &[],
    );
    assert_eq!(exit_code(&output), 0);
    let names: Vec<String> = files_in(dir.path())
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["free_tilted.csv".to_string()]);
}

#[test]
fn sweep_tables_put_the_axis_value_first() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("energy_sweep.txt");
    let output = floydlab(
        &["sweep", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(exit_code(&output), 0);
    let csv = fs::read_to_string(dir.path().join("energy_sweep.sweep.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("axis_value,"), "{header}");
    assert_eq!(csv.lines().count(), 1 + 9, "one row per grid point");
    // Energy grid spans 1e-2..1e2 and increases.
    let first: f64 = csv.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    let last: f64 = csv.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((first - 1e-2).abs() <= 1e-16 && (last - 1e2).abs() <= 1e-12);
}

#[test]
fn the_levels_verb_tabulates_the_even_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("well_ground.txt");
    let output = floydlab(
        &["levels", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(exit_code(&output), 0);
    let csv = fs::read_to_string(dir.path().join("well_ground.levels.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    // U = 50, q = 1, m = hbar = 1: k_max q = 10 admits the branches
    // n pi < kq < n pi + pi/2 for n = 0..3.
    assert_eq!(rows.len(), 4);
    let energies: Vec<f64> =
        rows.iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(energies.windows(2).all(|w| w[0] < w[1]), "energies increase: {energies:?}");
    assert!(energies.iter().all(|&e| e > 0.0 && e < 50.0));
}

#[test]
fn check_passes_on_the_well_scenario_too() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("well_ground.txt");
    let output = floydlab(
        &["check", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &[],
    );
    assert_eq!(exit_code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value = serde_json::from_slice(
        &fs::read(dir.path().join("well_ground.check.report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["data"]["kind"], "identity");
    assert_eq!(report["data"]["draws"], 33);
    let names: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["qshje_residual", "wronskian_drift", "level_residual", "ratio_identity"]);
}

#[test]
fn initial_value_scenarios_reproduce_the_coefficient_twin() {
    // free_launch.txt encodes the same physical state as free_tilted.json;
    // their closed cycle statistics must agree to reconstruction accuracy.
    let dir = tempfile::tempdir().unwrap();
    for name in ["free_tilted.json", "free_launch.txt"] {
        let path = scenario(name);
        let output = floydlab(
            &["run", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
            &[],
        );
        assert_eq!(exit_code(&output), 0);
    }
    let load = |file: &str| -> serde_json::Value {
        serde_json::from_slice(&fs::read(dir.path().join(file)).unwrap()).unwrap()
    };
    let tilted = load("free_tilted.report.json");
    let launch = load("free_launch.report.json");
    for field in ["mean_wx", "mean_wx2", "variance", "mean_quantum_potential"] {
        let a = tilted["data"]["closed"][field].as_f64().unwrap();
        let b = launch["data"]["closed"][field].as_f64().unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{field}: {a} vs {b}");
    }
}
