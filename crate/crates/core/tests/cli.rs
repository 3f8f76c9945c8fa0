use std::fs;
use std::process::Command;

use mixwave::cli::{cmd_convergence, cmd_energy, cmd_run, parse_config, CommandOptions};

fn opts(dir: &tempfile::TempDir) -> CommandOptions {
    CommandOptions::new(dir.path())
}

#[test]
fn run_writes_snapshots_and_norms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(
        "[scenario]\nfinal_time = 4.5\n[output]\nlevel = 2\nsnapshot_times = 4, 4.5\nfields = p, p_pp, u_hat, u_pp\n",
    )
    .unwrap();
    let out = cmd_run(&cfg, &opts(&dir)).unwrap();
    assert_eq!(out.snapshots.len(), 8);
    let vtk = fs::read_to_string(dir.path().join("p_pp_t4.5000.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0\n"));
    // level 2 on (−1, 1)²: 8 × 8 squares, two triangles each
    assert!(vtk.contains("CELLS 128 512"));
    assert!(vtk.contains("POINT_DATA 384"));

    let norms = fs::read_to_string(&out.norms).unwrap();
    let mut lines = norms.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 5 + 6);
    assert_eq!(header[..5], ["t", "u_hat_l2", "p_l2", "u_pp_l2", "p_pp_l2"]);
    // outputs every 1/16 from 0 to 4.5
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 73);
    assert_eq!(rows[72][0], 4.5);
    assert!(rows
        .iter()
        .all(|r| r.len() == 11 && r.iter().all(|v| v.is_finite())));
}

#[test]
fn convergence_table_on_short_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config("[scenario]\nlevels = 3, 4\nfinal_time = 4.5\n").unwrap();
    let (report, path) = cmd_convergence(&cfg, &opts(&dir)).unwrap();
    let csv = fs::read_to_string(path).unwrap();
    assert!(csv.starts_with("h,tau,u_hat_err,eoc_u_hat_err,p_err,"));
    assert_eq!(csv.lines().count(), 3);
    let eoc = |n: &str| report.eoc(n).unwrap()[0];
    assert!((0.8..1.3).contains(&eoc("p_err")), "{}", eoc("p_err"));
    for n in ["u_super", "p_super", "u_pp", "p_pp"] {
        assert!((1.7..2.3).contains(&eoc(n)), "{n}: {}", eoc(n));
    }
}

#[test]
fn convergence_needs_enough_levels() {
    let dir = tempfile::tempdir().unwrap();
    let one = parse_config("[scenario]\nlevels = 3\n").unwrap();
    assert!(cmd_convergence(&one, &opts(&dir)).is_err());
    let two = parse_config("[scenario]\nname = scattering\nlevels = 3, 4\n").unwrap();
    assert!(cmd_convergence(&two, &opts(&dir)).is_err());
    let cavity = parse_config("[scenario]\nname = cavity\nlevels = 2, 3\n").unwrap();
    assert!(cmd_convergence(&cavity, &opts(&dir)).is_err());
}

#[test]
fn energy_stable_and_unstable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        parse_config("[scenario]\nname = cavity\n[energy]\nlevel = 2\nsteps = 300\n").unwrap();
    let s = cmd_energy(&cfg, &opts(&dir)).unwrap();
    assert!(!s.unstable);
    assert_eq!(s.steps_done, 300);
    assert!(s.max_drift < 1e-12);
    assert_eq!(fs::read_to_string(&s.path).unwrap().lines().count(), 302);

    let cfg = parse_config(
        "[scenario]\nname = cavity\n[energy]\nlevel = 2\nsteps = 200\ntime_step = 1\n",
    )
    .unwrap();
    assert!(cmd_energy(&cfg, &opts(&dir)).is_err());
    let mut o = opts(&dir);
    o.allow_cfl_violation = true;
    let s = cmd_energy(&cfg, &o).unwrap();
    assert!(s.unstable && s.tau > s.tau_max);
}

#[test]
fn binary_reports_status_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("e.cfg");
    fs::write(
        &cfg,
        "[scenario]\nname = cavity\n[energy]\nlevel = 2\nsteps = 50\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mixwave"))
        .args(["energy", "--threads", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("status: stable"), "{stdout}");
    assert!(dir.path().join("energy.csv").exists());

    fs::write(&cfg, "[scenario]\nname = cavity\nbogus = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mixwave"))
        .args(["run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 3"), "{stderr}");
}
