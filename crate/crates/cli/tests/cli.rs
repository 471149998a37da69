use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn conservo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conservo"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_the_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = conservo(&["run", "--experiment", "lv2", "--method", "mn_dmm", "--t-final", "20"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for suffix in ["traj", "summary", "defect"] {
        assert!(dir.path().join(format!("lv2_mn_dmm_{suffix}.csv")).exists(), "{suffix}");
    }
    let traj = fs::read_to_string(dir.path().join("lv2_mn_dmm_traj.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next().unwrap(), "step,t,x_0,x_1,psi_defect_0,fpi,kappa,converged");
    assert_eq!(lines.count(), 201);
    let summary = fs::read_to_string(dir.path().join("lv2_mn_dmm_summary.csv")).unwrap();
    assert!(summary.starts_with("method,psi_defect_max_0,mean_fpi,max_kappa,nonconverged,wall_s\nmn_dmm,"));
}

#[test]
fn trajectory_csv_round_trips_states() {
    let dir = tempfile::tempdir().unwrap();
    let out = conservo(
        &["run", "--experiment", "arenstorf", "--method", "rk4", "--t-final", "0.01", "--tau", "0.001"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let traj = fs::read_to_string(dir.path().join("arenstorf_rk4_traj.csv")).unwrap();
    let first: Vec<f64> = traj.lines().nth(1).unwrap().split(',').skip(2).take(4).map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, conservo::systems::ARENSTORF_X0.to_vec());
}

#[test]
fn truncated_run_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = conservo(&["run", "--experiment", "schwarzschild", "--method", "rk4", "--tau", "0.3333333333"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("truncated"));
    let summary = fs::read_to_string(dir.path().join("schwarzschild_rk4_summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().contains("NaN"));
}

#[test]
fn unknown_method_exits_one_and_lists_methods() {
    let dir = tempfile::tempdir().unwrap();
    let out = conservo(&["run", "--experiment", "lv2", "--method", "euler"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    for m in ["mn_dmm", "mixed_mn_dmm_svd", "rk4", "implicit_midpoint"] {
        assert!(err.contains(m), "{err}");
    }
    let out = conservo(&["run", "--experiment", "lv9", "--method", "rk4"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = conservo(&["run", "--experiment", "lv2", "--method", "rk4", "--tau", "-0.1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("tau"));
}

#[test]
fn table_has_one_row_per_default_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = conservo(&["table", "--experiment", "lv2", "--t-final", "50"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("lv2_table.csv")).unwrap();
    let methods: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["rk4", "implicit_midpoint", "mn_dmm", "mixed_mn_dmm", "mixed_mn_dmm_svd"]);
    assert!(stdout(&out).contains("mixed_mn_dmm_svd"));
}

#[test]
fn lorenz_table_separates_scales() {
    let dir = tempfile::tempdir().unwrap();
    let out = conservo(&["table", "--experiment", "lorenz", "--methods", "implicit_midpoint,mixed"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("lorenz_table.csv")).unwrap();
    let defect = |row: usize| -> f64 { csv.lines().nth(row).unwrap().split(',').nth(1).unwrap().parse().unwrap() };
    assert!(defect(1) > 1.0);
    assert!(defect(2) < 1e-6);
}

#[test]
fn vortex_table_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["table", "--experiment", "vortex", "--seed", "7", "--count", "10", "--t-final", "1", "--methods", "mixed,rk4"];
    for dir in [&a, &b] {
        assert_eq!(conservo(&args, dir.path()).status.code(), Some(0));
    }
    // wall time is the last column and legitimately differs
    let strip = |p: &Path| -> Vec<String> {
        fs::read_to_string(p.join("vortex_table.csv"))
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
            .collect()
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn list_shows_experiments_and_methods() {
    let out = Command::new(env!("CARGO_BIN_EXE_conservo")).arg("list").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let arenstorf = text.lines().find(|l| l.starts_with("arenstorf")).unwrap();
    let t: f64 = arenstorf.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((t - 1.015 * conservo::systems::ARENSTORF_PERIOD).abs() < 1e-5);
    for m in conservo::Method::ALL {
        assert!(text.contains(m.name()));
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# lv3 smoke run\nexperiment = lv3\nmethod = mixed_svd\nt_final = 1\ntau = 0.1\n").unwrap();
    let out = conservo(&["run", "--config", cfg.to_str().unwrap(), "--tau", "0.05"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let traj = fs::read_to_string(dir.path().join("lv3_mixed_mn_dmm_svd_traj.csv")).unwrap();
    assert_eq!(traj.lines().count(), 22);

    fs::write(&cfg, "experiment = lv3\nspeed = 3\n").unwrap();
    let out = conservo(&["run", "--config", cfg.to_str().unwrap(), "--method", "rk4"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("speed"));
}

#[test]
fn convergence_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = conservo(&["convergence", "--experiment", "rotation", "--method", "rk4", "--t-final", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("rotation_rk4_convergence.csv")).unwrap();
    let orders: Vec<f64> = csv.lines().skip(2).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(orders.len(), 3);
    assert!(orders.iter().all(|p| (p - 4.0).abs() < 0.3), "{orders:?}");
}
