//! End-to-end checks of the command-line binary: exit codes, settings
//! precedence, output routing, and the custom-matrix warning path.

use std::path::Path;
use std::process::{Command, Output};

use tetrafold::evalio::write_pdb;
use tetrafold::hamiltonian::Sequence;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tetrafold"))
        .args(args)
        .output()
        .unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["--out", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    run(&all)
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn invalid_inputs_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();

    let out = run_in(dir.path(), &["predict", "--sequence", "AXA"]);
    assert_eq!(out.status.code(), Some(2), "unknown residue letter");
    assert!(stderr_of(&out).contains("error:"));

    let out = run_in(dir.path(), &["predict", "--sequence", "AAA", "--rho-end", "10"]);
    assert_eq!(out.status.code(), Some(2), "rho_end above rho_beg");
    assert!(stderr_of(&out).contains("rho_end"));

    let out = run_in(dir.path(), &["build", "--sequence", &"A".repeat(40)]);
    assert_eq!(out.status.code(), Some(2), "operator wider than the register cap");
    assert!(stderr_of(&out).contains("assemble"), "should point at the windowed path");

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"bogus\": 1}").unwrap();
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "oracle",
        "--sequence",
        "AAA",
    ]);
    assert_eq!(out.status.code(), Some(2), "unknown configuration key");
}

#[test]
fn strict_policy_exits_4_when_the_top_outcome_is_invalid() {
    // Zero-initialized parameters with a one-evaluation budget leave the
    // state on the all-zero bitstring, which decodes to a chain that folds
    // back onto itself.
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "predict",
            "--sequence",
            "VKDRS",
            "--init",
            "zeros",
            "--max-iter",
            "1",
            "--restarts",
            "1",
            "--shots-opt",
            "0",
            "--policy",
            "top-only",
        ],
    );
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr_of(&out));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("settings.json");
    std::fs::write(&cfg, "{\"vqe\": {\"seed\": 5}, \"weights\": {\"eta\": 3.0}}").unwrap();
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "predict",
        "--sequence",
        "AAA",
        "--shots-opt",
        "0",
        "--max-iter",
        "40",
        "--restarts",
        "1",
        "--eta",
        "7",
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let rec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap())
            .unwrap();
    assert_eq!(rec["config"]["seed"], serde_json::json!(5), "file value survives");
    assert_eq!(rec["config"]["max_iter"], serde_json::json!(40), "flag applies");
    assert_eq!(rec["weights"]["eta"], serde_json::json!(7.0), "flag beats file");
    assert_eq!(rec["weights"]["mu_oh"], serde_json::json!(1.0), "default survives");
}

#[test]
fn out_flag_beats_the_environment_variable() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_tetrafold"))
        .env("TETRAFOLD_OUT", env_dir.path())
        .args(["oracle", "--sequence", "AAAA"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(env_dir.path().join("oracle.json").exists(), "env var routes output");

    let out = Command::new(env!("CARGO_BIN_EXE_tetrafold"))
        .env("TETRAFOLD_OUT", env_dir.path())
        .args(["--out", flag_dir.path().to_str().unwrap(), "oracle", "--sequence", "AAA"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(flag_dir.path().join("oracle.json").exists(), "flag wins over env var");
}

#[test]
fn asymmetric_matrix_warns_and_still_runs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pairs.csv");
    // Bump the C row's C-M cell only; the M row keeps the original value.
    let table = include_str!("../data/mj1996.csv").replacen("-4.99", "-3.99", 1);
    std::fs::write(&csv, table).unwrap();
    let out = run_in(
        dir.path(),
        &["oracle", "--sequence", "AAG", "--interaction-matrix", csv.to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let err = stderr_of(&out);
    assert!(
        err.contains("warning: asymmetric pair"),
        "expected symmetrization warning, got:\n{err}"
    );
    assert!(dir.path().join("oracle.json").exists());
}

#[test]
fn rmsd_of_a_structure_against_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let pdb = dir.path().join("chain.pdb");
    let seq = Sequence::parse("AGA").unwrap();
    let coords = [[0.0, 0.0, 0.0], [2.2, 2.2, 2.2], [4.4, 0.0, 4.4]];
    write_pdb(&pdb, &seq, &coords).unwrap();

    let out = run_in(
        dir.path(),
        &["rmsd", "--predicted", pdb.to_str().unwrap(), "--reference", pdb.to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(stdout.contains("rmsd 0.0000 over 3 point(s)"), "stdout:\n{stdout}");
    assert!(dir.path().join("rmsd.json").exists());
}
