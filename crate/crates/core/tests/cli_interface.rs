//! End-to-end checks of the command-line interface and its CSV contract.

mod common;

use std::process::Command;

use common::{column, data_rows};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlcoupler"))
}

fn run_ok(args: &[&str]) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let status = bin()
        .args(args)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    let csv = std::fs::read_to_string(&out).unwrap_or_default();
    (status.code().unwrap(), csv)
}

#[test]
fn fig2_two_methods_shape() {
    let (code, csv) = run_ok(&["--scenario", "fig2", "--method", "pp", "--method", "pert", "--trajectories", "20"]);
    assert_eq!(code, 0);
    let rows = data_rows(&csv);
    let header: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(rows.len() - 1, 201);
    assert_eq!(header.len(), 1 + 18);
    assert_eq!(header[0], "tau");
    assert_eq!(&header[1..5], ["pp_VX_1", "pp_VY_1", "pp_SE_VX_1", "pp_SE_VY_1"]);
    assert_eq!(header[18], "pert_VY_3");

    let tau = column(&csv, "tau");
    assert_eq!(tau[0], 0.0);
    assert!((tau[200] - 20.0).abs() < 1e-12);
    for name in &header[1..] {
        let v = column(&csv, name)[0];
        let expect = if name.contains("SE") { 0.0 } else { 0.25 };
        assert_eq!(v, expect, "{name}");
    }
    // full precision, '.' decimal separator
    let first_value = rows[2].split(',').nth(1).unwrap();
    assert!(first_value.contains('.') && first_value.contains('e'));
    assert_eq!(first_value.split('e').next().unwrap().len(), 18);
}

#[test]
fn contra_preset_carries_caveat() {
    let (code, csv) = run_ok(&["--scenario", "fig8a", "--method", "pert", "--tmax", "2"]);
    assert_eq!(code, 0);
    assert!(csv.lines().any(|l| l == "# direction=contra"));
    assert!(csv.lines().any(|l| l.starts_with("# caveat=") && l.contains("transient states")));
    let (_, co) = run_ok(&["--scenario", "fig2", "--method", "pert", "--tmax", "2"]);
    assert!(!co.contains("# caveat="));
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        "# kappa sweep\nscenario = fig4a\nmethod = pert\nkappa = 0.09\ntmax = 3\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let (_, from_file) = run_ok(&["--config", cfg]);
    assert!(from_file.contains("# kappa=0.09\n"));
    let (_, overridden) = run_ok(&["--config", cfg, "--kappa", "0.5"]);
    assert!(overridden.contains("# kappa=0.5\n"));

    let (_, fig4c) = run_ok(&["--scenario", "fig4c", "--method", "pert", "--tmax", "3"]);
    assert_eq!(data_rows(&overridden), data_rows(&fig4c));
}

#[test]
fn asymmetric_initialisation_matches_fig3() {
    let (_, a) = run_ok(&["--scenario", "fig2", "--alpha0", "1+0i,0+0i,0+0i", "--method", "pert", "--tmax", "3"]);
    let (_, b) = run_ok(&["--scenario", "fig3", "--method", "pert", "--tmax", "3"]);
    assert!(a.contains("# alpha0=1+0i,0+0i,0+0i\n"));
    assert_eq!(data_rows(&a), data_rows(&b));
}

#[test]
fn reruns_differ_only_in_timestamp() {
    let args = ["--scenario", "fig6b", "--method", "pp", "--method", "pert", "--trajectories", "40", "--tmax", "2"];
    let (_, a) = run_ok(&args);
    let (_, b) = run_ok(&args);
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .filter(|l| !l.starts_with("# generated="))
            .map(str::to_string)
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["--scenario", "fig2"],
        vec!["--scenario", "nope", "--method", "pp"],
        vec!["--scenario", "fig2", "--method", "pp", "--alpha0", "1+0j,0,0"],
        vec!["--scenario", "fig8a", "--method", "fock"],
        vec!["--bogus-flag"],
    ] {
        let status = bin().args(&args).output().unwrap().status;
        assert_eq!(status.code(), Some(1), "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("out.csv");
    let status = bin()
        .args(["--scenario", "fig2", "--method", "pert", "--tmax", "1", "--out"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "scenario=fig2\nmethod=pert\nunknown_key=3\n").unwrap();
    let status = bin().arg("--config").arg(&cfg).output().unwrap().status;
    assert_eq!(status.code(), Some(1));
}

#[test]
fn unreliable_ensemble_exits_with_two_and_still_writes() {
    let (code, csv) = run_ok(&[
        "--scenario", "fig2", "--method", "pp", "--method", "pert", "--trajectories", "10",
        "--tmax", "1", "--divergence-threshold", "0.5",
    ]);
    assert_eq!(code, 2);
    assert!(csv.contains("# pp_unreliable=true\n"));
    assert!(csv.contains("# pp_discarded=10\n"));
    assert!(column(&csv, "pp_VX_1").iter().all(|v| v.is_nan()));
    assert!(column(&csv, "pert_VX_1").iter().all(|v| v.is_finite()));
}

#[test]
fn fock_method_reports_truncation() {
    let (code, csv) = run_ok(&[
        "--g", "0.01", "--kappa", "0.1", "--alpha0", "0.5,0.5,0.5", "--method", "fock",
        "--fock-cutoffs", "3,1", "--tmax", "0.5",
    ]);
    assert_eq!(code, 0);
    assert!(csv.contains("# fock_cutoffs=3,1\n"));
    assert!(csv.contains("# fock_dim=512\n"));
    assert!(csv.contains("# fock_initial_truncated_weight="));
    assert!(csv.contains("# fock_max_boundary_weight="));
    assert_eq!(column(&csv, "fock_VX_2").len(), 6);
}
