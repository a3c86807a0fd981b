use std::path::Path;
use std::process::{Command, Output};

const MODEL: &str = "# mixq model v1\nterm 0.5 constant\n";

fn mixq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixq"))
        .args(args)
        .current_dir(dir)
        .env_remove("MIXQ_SEED")
        .output()
        .unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let m = "# mixq model v1\nterm 0.5 constant\nterm 1.25 normal shift=0 scale=1\n";
    std::fs::write(dir.path().join("m.model"), m).unwrap();
    dir
}

fn rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn missing_input_exits_with_io_code() {
    let dir = setup();
    let out = mixq(dir.path(), &["gof", "--model", "m.model", "--input", "absent.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_config_exits_with_config_code() {
    let dir = setup();
    std::fs::write(dir.path().join("bad.toml"), "[sample]\nunknown_key = 1\n").unwrap();
    let out = mixq(dir.path(), &["--config", "bad.toml", "sample", "--model", "m.model"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(dir.path().join("x.txt"), "1\n2\n3\n4\n").unwrap();
    let out = mixq(dir.path(), &["fit", "--input", "x.txt", "--norm", "l7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_fit_exits_with_solver_code() {
    let dir = setup();
    let data: String = (1..=50).map(|k| format!("{}\n", k as f64 / 10.0)).collect();
    std::fs::write(dir.path().join("x.txt"), data).unwrap();
    let cfg = "[constraints]\nvar = [{ level = 0.5, bound = 100.0, direction = \"at-least\" }, \
               { level = 0.9, bound = 0.0, direction = \"at-most\" }]\n";
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let out = mixq(dir.path(), &["--config", "c.toml", "fit", "--input", "x.txt"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn constant_model_samples_its_constant() {
    let dir = setup();
    std::fs::write(dir.path().join("c.model"), MODEL).unwrap();
    let out = mixq(dir.path(), &["sample", "--model", "c.model", "-n", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert_eq!(values, vec![0.5; 3]);
}

#[test]
fn flags_override_file_override_defaults() {
    let dir = setup();
    let d = dir.path();
    std::fs::write(d.join("n.toml"), "[sample]\nn = 7\nmodel = \"m.model\"\n").unwrap();
    assert!(mixq(d, &["sample", "--model", "m.model", "--output", "a.csv"]).status.success());
    assert_eq!(rows(&d.join("a.csv")), 1000);
    assert!(mixq(d, &["--config", "n.toml", "sample", "--output", "b.csv"]).status.success());
    assert_eq!(rows(&d.join("b.csv")), 7);
    assert!(mixq(d, &["--config", "n.toml", "sample", "-n", "3", "--output", "c.csv"]).status.success());
    assert_eq!(rows(&d.join("c.csv")), 3);
}

#[test]
fn seed_comes_from_flag_env_or_file() {
    let dir = setup();
    let d = dir.path();
    let run = |args: &[&str], env: Option<&str>, out: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_mixq"));
        c.args(args).args(["--output", out]).current_dir(d).env_remove("MIXQ_SEED");
        if let Some(v) = env {
            c.env("MIXQ_SEED", v);
        }
        assert!(c.status().unwrap().success());
        std::fs::read(d.join(out)).unwrap()
    };
    std::fs::write(d.join("s.toml"), "seed = 9\n").unwrap();
    let base = ["sample", "--model", "m.model", "-n", "20"];
    let flag = run(&[&["--seed", "9"][..], &base].concat(), None, "1.csv");
    let env = run(&base, Some("9"), "2.csv");
    let file = run(&[&["--config", "s.toml"][..], &base].concat(), None, "3.csv");
    let other = run(&[&["--seed", "10", "--config", "s.toml"][..], &base].concat(), Some("9"), "4.csv");
    assert_eq!(flag, env);
    assert_eq!(flag, file);
    assert_ne!(flag, other);
}

#[test]
fn failed_run_leaves_existing_output_untouched() {
    let dir = setup();
    let d = dir.path();
    std::fs::write(d.join("out.csv"), "keep\n").unwrap();
    let out = mixq(d, &["qqplot", "--model", "m.model", "--input", "absent.txt", "--output", "out.csv"]);
    assert!(!out.status.success());
    assert_eq!(std::fs::read_to_string(d.join("out.csv")).unwrap(), "keep\n");
    let leftovers = std::fs::read_dir(d).unwrap().count();
    assert_eq!(leftovers, 2);
}

#[test]
fn outputs_have_header_rows() {
    let dir = setup();
    let d = dir.path();
    assert!(mixq(d, &["--seed", "1", "sample", "--model", "m.model", "-n", "300", "--output", "s.csv"]).status.success());
    assert!(mixq(d, &["fit", "--input", "s.csv", "--model", "f.model", "--report", "r.csv"]).status.success());
    assert!(mixq(d, &["qqplot", "--model", "f.model", "--input", "s.csv", "--output", "q.csv"]).status.success());
    let head = |f: &str| std::fs::read_to_string(d.join(f)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(head("s.csv"), "value");
    assert_eq!(head("r.csv"), "section,name,value");
    assert_eq!(head("q.csv"), "kind,x,y");
    let model = std::fs::read_to_string(d.join("f.model")).unwrap();
    assert!(model.starts_with("# mixq model v1"));
}

#[test]
fn help_lists_config_keys_and_exit_codes() {
    let dir = setup();
    let out = mixq(dir.path(), &["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["[catalog]", "[constraints]", "lasso_target", "include_open", "curve_points", "MIXQ_SEED", "EXIT CODES"] {
        assert!(text.contains(key), "{key}");
    }
}
