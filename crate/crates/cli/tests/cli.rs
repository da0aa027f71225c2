use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn velavg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_velavg")).args(args).env("VELAVG_THREADS", "1").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const CONFIG: &str = r#"
id = "cli-burgers"
seed = 2
resolutions = [256, 512]

[symbol]
example = "burgers"
ell = 1

[scheme]
end_time = 0.25

[data]
name = "riemann"
rho_l = 1.0
rho_r = 0.0
x0 = 0.5
"#;

#[test]
fn predict_prints_the_family_bound() {
    let o = velavg(&["predict", "--example", "burgers", "--ell", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("s_max = 0.25"), "{text}");
    assert!(text.contains("s_boot"));
    let o = velavg(&["predict", "--example", "twod-flux", "--ell", "1", "--m", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("s_max = none"));
}

#[test]
fn estimate_regularity_reads_a_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("step.txt");
    let n = 4096;
    let mut text = format!("# d=1\n# n={n}\n# L=1\n# label=step\n");
    for i in 0..n {
        text.push_str(if i < n / 2 { "1\n" } else { "0\n" });
    }
    fs::write(&path, text).unwrap();
    let bands = dir.path().join("bands.csv");
    let o = velavg(&["estimate-regularity", "--in", path.to_str().unwrap(), "--window", "none", "--out", bands.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("s_star"));
    assert!(bands.is_file());
}

#[test]
fn solve_and_experiment_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cli.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let solved = dir.path().join("solved");
    let o = velavg(&["solve", "--config", cfg.to_str().unwrap(), "--out", solved.to_str().unwrap(), "--n", "256"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_dir(&solved).unwrap().count() > 0);
    let results = dir.path().join("results");
    let o = velavg(&["experiment", "run", cfg.to_str().unwrap(), "--out", results.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(results.join("cli-burgers/row.toml").is_file());
    let o = velavg(&["report", results.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(results.join("report.csv").is_file() && results.join("report.md").is_file());
}

#[test]
fn empty_suite_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let configs = dir.path().join("configs");
    fs::create_dir(&configs).unwrap();
    let out = dir.path().join("out");
    let o = velavg(&["experiment", "suite", configs.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    let o = velavg(&["experiment", "run", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let configs = dir.path().join("configs");
    fs::create_dir(&configs).unwrap();
    fs::write(configs.join("broken.toml"), "id = ").unwrap();
    let out = dir.path().join("out");
    let o = velavg(&["experiment", "suite", configs.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(Path::new(&out.join("report.md")).is_file());
}
