use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use polyconv::cli::{command, FLAG_INVENTORY};
use polyconv::dist::parse_distribution;

fn polyconv(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyconv")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

const RADEMACHER: &str = "dim 1\n-1 0.5\n1 0.5\n";
const LAZY: &str = "dim 1\n-1 0.25\n0 0.5\n1 0.25\n";

#[test]
fn power_zero_is_the_unit_mass() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(tmp.path(), "f.dist", "dim 2\n1 2 0.5\n3 -1 0.5\n");
    let o = polyconv(&["dist", "power", &f, "0"], tmp.path());
    assert!(o.status.success());
    let d = parse_distribution(&stdout(&o)).unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(d.mass_at(&[0.0, 0.0]), 1.0);
}

#[test]
fn compound_poisson_of_unit_shift() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(tmp.path(), "one.dist", "dim 1\n1 1\n");
    let o = polyconv(&["dist", "cp", &f, "1.0", "1e-10"], tmp.path());
    assert!(o.status.success());
    let d = parse_distribution(&stdout(&o)).unwrap();
    assert!((d.mass_at(&[0.0]) - (-1.0f64).exp()).abs() < 1e-10);
    assert!(stdout(&o).contains("truncated mass"));
}

#[test]
fn convolve_writes_under_out() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(tmp.path(), "r.dist", RADEMACHER);
    let o = polyconv(&["--out", "res", "dist", "convolve", &f, &f], tmp.path());
    assert!(o.status.success());
    let d = parse_distribution(&fs::read_to_string(tmp.path().join("res/convolve.dist")).unwrap()).unwrap();
    assert_eq!(d.mass_at(&[0.0]), 0.5);
    assert_eq!(d.mass_at(&[2.0]), 0.25);
}

#[test]
fn classcheck_lazy_rademacher() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(tmp.path(), "l.dist", LAZY);
    let o = polyconv(&["dist", "classcheck", &f], tmp.path());
    let s = stdout(&o);
    assert!(s.contains("symmetric true"));
    let alpha: f64 = s
        .lines()
        .find_map(|l| l.strip_prefix("alpha_lower_bound "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((alpha - 1.0).abs() < 1e-9, "{alpha}");
}

#[test]
fn rho_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let r = write(tmp.path(), "r.dist", RADEMACHER);
    let z = write(tmp.path(), "z.dist", "dim 1\n0 1\n");
    let one = write(tmp.path(), "one.dist", "dim 1\n1 1\n");
    let value = |o: &Output| -> f64 {
        stdout(o).lines().find_map(|l| l.strip_prefix("value ")).unwrap().parse().unwrap()
    };
    let o = polyconv(&["rho", &r, &r], tmp.path());
    assert_eq!(value(&o), 0.0);
    let o = polyconv(&["rho", &z, &one], tmp.path());
    assert_eq!(value(&o), 1.0);
    assert!(stdout(&o).contains("mode exact"));
    let o = polyconv(&["rho", &r, &z], tmp.path());
    assert_eq!(value(&o), 0.5);
    let o = polyconv(&["rho", "--search", "2", "--seed", "3", &r, &z], tmp.path());
    assert!(o.status.success());
    assert!(value(&o) >= 0.5);
    assert!(stdout(&o).contains("lower"));
    let dirs = write(tmp.path(), "dirs.txt", "# one direction\n-2\n");
    let o = polyconv(&["rho", "--directions", &dirs, &r, &z], tmp.path());
    assert_eq!(value(&o), 0.5);
}

#[test]
fn errors_exit_with_status_two() {
    let tmp = tempfile::tempdir().unwrap();
    let r = write(tmp.path(), "r.dist", RADEMACHER);
    let flat = write(tmp.path(), "p.dist", "dim 2\n0 0 1\n");
    let bad = write(tmp.path(), "bad.dist", "dim 1\n0 0.5\nx 0.5\n");
    assert_eq!(polyconv(&["rho", &r, &flat], tmp.path()).status.code(), Some(2));
    let o = polyconv(&["dist", "power", &bad, "2"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(polyconv(&["dist", "power", "missing.dist", "2"], tmp.path()).status.code(), Some(2));
    assert_eq!(polyconv(&["frobnicate"], tmp.path()).status.code(), Some(2));
}

#[test]
fn experiment_errors_leave_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let o = polyconv(&["--out", "o", "experiment", "thm9"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let o = polyconv(&["--out", "o", "experiment", "thm1", "--config", "nope.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(tmp.path(), "bad.toml", "n_grid = [8, 4, 2]\n");
    let o = polyconv(&["--out", "o", "experiment", "thm1", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let o = polyconv(&["--out", "o", "experiment", "thm4", "--family", "hyperplane", "--quick"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hyperplane"));
    assert!(!tmp.path().join("o").exists() || fs::read_dir(tmp.path().join("o")).unwrap().next().is_none());
}

#[test]
fn thm3_rademacher_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = polyconv(&["--out", "o", "experiment", "thm3", "--family", "rademacher"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let dir = tmp.path().join("o/thm3");
    for f in ["summary.txt", "cp.csv", "cp.svg", "plus1.csv", "plus2.csv", "supk.csv", "kscan.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let o = polyconv(&["report", "o/thm3"], tmp.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("cp: 8 rows"));
}

#[test]
fn config_overrides_apply() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", "family = \"lazy-product2d\"\nn_grid = [4, 8, 16, 32]\nseed = 11\n");
    let o = polyconv(&["--out", "o", "experiment", "thm1", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let summary = fs::read_to_string(tmp.path().join("o/thm1/summary.txt")).unwrap();
    assert!(summary.contains("family = lazy-product2d"));
    assert!(summary.contains("n_grid = 4 8 16 32"));
    assert!(summary.contains("seed = 11"));
    let o = polyconv(&["--seed", "5", "--out", "p", "experiment", "thm1", "--config", &cfg], tmp.path());
    assert!(o.status.success());
    assert!(fs::read_to_string(tmp.path().join("p/thm1/summary.txt")).unwrap().contains("seed = 5"));
}

#[test]
fn threads_flag_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    polyconv(&["--threads", "1", "--out", "a", "experiment", "thm5", "--quick"], tmp.path());
    polyconv(&["--threads", "4", "--out", "b", "experiment", "thm5", "--quick"], tmp.path());
    for f in ["summary.txt", "lhs.csv", "rhs.csv", "merging.csv"] {
        let a = fs::read(tmp.path().join("a/thm5").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b/thm5").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    assert_eq!(polyconv(&["--threads", "0", "experiment", "thm5"], tmp.path()).status.code(), Some(2));
}

#[test]
fn help_lists_every_subcommand_and_flag() {
    let mut help = Vec::new();
    command().write_long_help(&mut help).unwrap();
    let help = String::from_utf8(help).unwrap();
    for sub in ["dist", "rho", "experiment", "report"] {
        assert!(help.contains(sub), "{sub}");
    }
    let mut all = String::new();
    fn collect(cmd: &mut clap::Command, out: &mut String) {
        let mut buf = Vec::new();
        cmd.write_long_help(&mut buf).unwrap();
        out.push_str(&String::from_utf8(buf).unwrap());
        for s in cmd.get_subcommands_mut() {
            collect(s, out);
        }
    }
    collect(&mut command(), &mut all);
    for flag in FLAG_INVENTORY {
        assert!(all.contains(flag), "{flag} missing from help");
    }
    for sub in ["convolve", "power", "cp", "classcheck"] {
        assert!(all.contains(sub), "{sub}");
    }
}
