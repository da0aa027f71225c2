use std::fs;
use std::path::Path;

use velavg::exponents::{paper_prediction, ExampleId};
use velavg::experiments::{run_experiment, run_suite, ExperimentConfig, Verdict};

const SMALL: &str = r#"
id = "small-burgers"
seed = 3
resolutions = [256, 512]

[symbol]
example = "burgers"
ell = 2

[scheme]
scheme = "godunov"
end_time = 0.25

[data]
name = "sine"
amplitude = 1.0
k = 1

[estimator]
p = 1
method = "lp"
window = "plateau"
"#;

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn config_round_trips() {
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
    assert_eq!(cfg, again);
    assert!(ExperimentConfig::from_toml(&SMALL.replace("[256, 512]", "[300, 600]")).is_err());
    assert!(ExperimentConfig::from_toml(&SMALL.replace("seed = 3", "seed = 3\nbogus = 1")).is_err());
}

#[test]
fn experiment_writes_artifacts_and_matches_prediction() {
    let out = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let row = run_experiment(&cfg, out.path()).unwrap();
    let dir = out.path().join("small-burgers");
    for f in ["config.toml", "row.toml", "prediction.csv", "final_512.txt", "bands_512.csv", "solution.svg", "estimates.csv", "blocks.svg"] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let standalone = paper_prediction(ExampleId::Burgers { ell: 2.0 }, f64::INFINITY).unwrap();
    assert_eq!(row.predicted, standalone.s_max);
    assert_eq!(row.measurements.len(), 2);
    assert!(row.failure.is_none());
    assert_ne!(row.verdict, Verdict::NoPrediction);
}

#[test]
fn suite_reports_are_reproducible() {
    let configs = tempfile::tempdir().unwrap();
    write(configs.path(), "small.toml", SMALL);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_suite(configs.path(), a.path()).unwrap();
    let rb = run_suite(configs.path(), b.path()).unwrap();
    assert_eq!(ra.rows.len(), 1);
    assert_eq!(rb.rows[0].verdict, ra.rows[0].verdict);
    let csv_a = fs::read(a.path().join("report.csv")).unwrap();
    let csv_b = fs::read(b.path().join("report.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    assert!(a.path().join("report.md").is_file());
}

#[test]
fn empty_suite_is_consistent() {
    let configs = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let outcome = run_suite(configs.path(), out.path()).unwrap();
    assert!(outcome.rows.is_empty() && !outcome.any_inconsistent());
    let csv = fs::read_to_string(out.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn broken_config_fails_its_row() {
    let configs = tempfile::tempdir().unwrap();
    write(configs.path(), "broken.toml", "id = \"broken\"\nresolutions = [\n");
    let out = tempfile::tempdir().unwrap();
    let outcome = run_suite(configs.path(), out.path()).unwrap();
    assert_eq!(outcome.rows.len(), 1);
    assert!(outcome.rows[0].failure.as_deref().unwrap().starts_with("config"));
    assert!(outcome.any_inconsistent());
}

#[test]
fn duplicate_ids_are_rejected() {
    let configs = tempfile::tempdir().unwrap();
    write(configs.path(), "a.toml", SMALL);
    write(configs.path(), "b.toml", SMALL);
    let out = tempfile::tempdir().unwrap();
    assert!(run_suite(configs.path(), out.path()).is_err());
}
