use std::path::Path;
use std::process::{Command, Output};

fn thinshell(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("run.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_thinshell"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

/// Data rows (header comments skipped) as column name -> values.
fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = table(path);
    let k = header.iter().position(|h| h == name).unwrap();
    rows.iter().filter(|r| !r[k].is_empty()).map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn modes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = thinshell(dir.path(), "schema_version = 1\ncommand = \"modes\"\n", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let xi2 = column(&dir.path().join("out/modes.csv"), "xi2");
    assert_eq!(xi2.len(), 8);
    assert!((xi2[0] - 0.0326727).abs() < 5e-8);
    let et = column(&dir.path().join("out/modes.csv"), "eps_tilde_sq_over_eps_sq");
    assert!((et[1] - 0.0706682).abs() < 5e-8);
}

#[test]
fn flat_classical_evolution_conserves_charge() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "schema_version = 1\ncommand = \"evolve\"\n[grid]\nn1 = 32\nn2 = 32\n[time]\ndt = 5e-5\nsteps = 200\nsnapshot_stride = 100\n";
    let out = thinshell(dir.path(), cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = String::from_utf8_lossy(&out.stdout);
    assert!(summary.starts_with("evolve: 200 steps"), "{summary}");
    let q = column(&dir.path().join("out/evolve.csv"), "total_charge");
    assert_eq!(q.len(), 201);
    for v in &q {
        assert!((v - q[0]).abs() <= 1e-12, "{v} {}", q[0]);
    }
    for n in [0, 100, 200] {
        assert!(dir.path().join(format!("out/snapshot_{n:06}.csv")).exists());
    }
}

#[test]
fn quantum_cylinder_evolution_keeps_norm() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "schema_version = 1\ncommand = \"evolve\"\n[chart]\nkind = \"cylinder\"\nradius = 1.0\nlength = 2.0\n\
               [grid]\nn1 = 32\nn2 = 16\n[physics]\nkind = \"quantum\"\neps = 0.1\n\
               [initial]\nkind = \"gaussian\"\nwidth = 0.4\nmomentum = [2.0, 0.0]\n[time]\ndt = 1e-3\nsteps = 20\n";
    let out = thinshell(dir.path(), cfg, &["--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let q = column(&dir.path().join("out/evolve.csv"), "total_charge");
    for v in &q {
        assert!((v - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn ribbon_sweep_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let out = thinshell(dir.path(), "schema_version = 1\ncommand = \"ribbon\"\n", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("out/ribbon.csv");
    let (header, rows) = table(&path);
    assert_eq!(
        header,
        ["eps", "weight_exact", "weight_expansion", "weight_err", "E_exact", "E_pert", "E_resid", "resid_ratio"]
    );
    assert_eq!(rows.len(), 3);
    let ratios = column(&path, "resid_ratio");
    assert_eq!(ratios.len(), 2);
    assert!(ratios.iter().all(|r| *r >= 7.0), "{ratios:?}");
}

#[test]
fn eigencheck_with_one_thread() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "schema_version = 1\ncommand = \"eigencheck\"\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_thinshell"))
        .env("THINSHELL_THREADS", "1")
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("eigencheck.csv");
    let nodes = column(&csv, "nodes");
    let levels = column(&csv, "N");
    assert_eq!(nodes.len(), 12);
    for (n, l) in nodes.iter().zip(&levels) {
        assert_eq!(*n, l - 1.0);
    }
    assert!(column(&csv, "resid_ratio").iter().all(|r| *r >= 7.0));
}

#[test]
fn geometry_columns_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "schema_version = 1\ncommand = \"geometry\"\n[chart]\nkind = \"torus\"\nmajor_radius = 2.0\nminor_radius = 0.5\n[grid]\nn1 = 16\nn2 = 12\n";
    let out = thinshell(dir.path(), cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("out/geometry.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# thinshell "));
    assert!(text.contains("#   command = \"geometry\""));
    assert!(text.contains("major_radius = 2.0"));
    let (header, rows) = table(&path);
    assert_eq!(
        header,
        ["i", "j", "q1", "q2", "g11", "g12", "g22", "sqrtg", "k11", "k12", "k22", "kmean", "Rgauss"]
    );
    assert_eq!(rows.len(), 16 * 12);
    assert!(dir.path().join("out/potentials.csv").exists());
}

#[test]
fn output_is_deterministic() {
    let cfg = "schema_version = 1\ncommand = \"evolve\"\n[chart]\nkind = \"sphere\"\nradius = 1.0\n[grid]\nn1 = 16\nn2 = 16\n[physics]\nkind = \"quantum\"\neps = 0.05\n[time]\ndt = 1e-3\nsteps = 5\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(thinshell(a.path(), cfg, &[]).status.success());
    assert!(thinshell(b.path(), cfg, &[]).status.success());
    let read = |d: &Path| std::fs::read(d.join("out/evolve.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn validation_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "schema_version = 1\ncommand = \"evolve\"\n[chart]\nkind = \"cylinder\"\nradius = 0.4\n[physics]\neps = 0.5\n[time]\nsteps = 0\n";
    let out = thinshell(dir.path(), cfg, &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("physics.eps") && err.contains("1.25"), "{err}");
    assert!(err.contains("time.steps"), "{err}");
}

#[test]
fn syntax_error_exits_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let out = thinshell(dir.path(), "schema_version = 1\ncommand = \"evolve\n", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unstable_step_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "schema_version = 1\ncommand = \"evolve\"\n[grid]\nn1 = 32\nn2 = 32\n[time]\ndt = 0.01\nsteps = 3\n";
    let out = thinshell(dir.path(), cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stability"));
}

#[test]
fn missing_config_exits_one() {
    let out = Command::new(env!("CARGO_BIN_EXE_thinshell"))
        .args(["--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
