use std::path::Path;
use std::process::{Command, Output};

fn h3rect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_h3rect")).args(args).env_remove("H3RECT_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn error_value(text: &str, label: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(label)).unwrap();
    line.rsplit(' ').next().unwrap().parse().unwrap()
}

#[test]
fn solve_smooth2d_n8() {
    let o = h3rect(&["solve", "--element", "adini", "--case", "smooth2d", "--n", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let table = [3.140e-02, 1.822e-01, 2.115e+00, 6.971e+01];
    for (label, want) in ["L2 error", "H1 error", "H2 error", "H3 error"].iter().zip(table) {
        let got = error_value(&text, label);
        assert!((got - want).abs() / want < 0.1, "{label}: {got} vs {want}");
    }
    assert!(text.contains("solver: direct"));
}

#[test]
fn solve_lshape_n2() {
    let o = h3rect(&["solve", "--case", "lshape2d", "--n", "2", "--element", "adini"]);
    assert_eq!(o.status.code(), Some(0));
    let h3 = error_value(&stdout(&o), "H3 error");
    assert!((h3 - 2.353).abs() / 2.353 < 0.1, "{h3}");
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(h3rect(&["solve", "--n", "0"]).status.code(), Some(2));
    assert_eq!(h3rect(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(h3rect(&["convergence", "--levels", "4,6"]).status.code(), Some(2));
    assert_eq!(h3rect(&["convergence", "--levels", "4"]).status.code(), Some(2));
    assert_eq!(h3rect(&["solve", "--n", "4", "--solver", "lu"]).status.code(), Some(2));
    assert_eq!(h3rect(&["solve", "--n", "4", "--case", "lshape2d", "--element", "morley"]).status.code(), Some(0));
    assert_eq!(h3rect(&["solve", "--n", "4", "--stiffness-q", "2"]).status.code(), Some(2));
    assert_eq!(h3rect(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let o = h3rect(&["solve", "--n", "16", "--solver", "cg", "--maxiter", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_unisolvence_all_dims() {
    let o = h3rect(&["verify", "--suite", "unisolvence", "--dims", "1,2,3,4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.contains("FAIL"));
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 20);
}

fn run_csv(dir: &Path, name: &str) -> Vec<u8> {
    let path = dir.join(name);
    let o = h3rect(&[
        "convergence",
        "--element",
        "morley",
        "--case",
        "smooth2d",
        "--levels",
        "4,8,16",
        "--deterministic",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn deterministic_csv_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_csv(dir.path(), "a.csv");
    let b = run_csv(dir.path(), "b.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("N,h,e0,order0"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "4");
    assert_eq!(first[3], "");
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert!(last[2].contains('e'));
    assert_eq!(last[3].split('.').nth(1).unwrap().len(), 2);
}

#[test]
fn coefficient_dump_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let dump = dir.path().join("u.txt");
    std::fs::write(&cfg, "# settings\nelement = adini\ncase = smooth2d\nn = 2\n").unwrap();
    let o = h3rect(&["solve", "--config", cfg.to_str().unwrap(), "--n", "4", "--dump-coeffs", dump.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("N=4"));
    let text = std::fs::read_to_string(dump).unwrap();
    for (k, line) in text.lines().enumerate() {
        let mut parts = line.split(' ');
        assert_eq!(parts.next().unwrap().parse::<usize>().unwrap(), k);
        parts.next().unwrap().parse::<f64>().unwrap();
    }
    // Adini-type in 2D: five DoFs per vertex on a 5x5 vertex grid.
    assert_eq!(text.lines().count(), 5 * 25);

    std::fs::write(&cfg, "elemnt = adini\n").unwrap();
    assert_eq!(h3rect(&["solve", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
