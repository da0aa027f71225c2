//! Declarative experiments: degeneracy profile, predicted exponent, PDE solve over a
//! resolution ladder, measured exponent, verdict.

mod config;
pub mod plot;
mod report;

pub use config::{DataSection, EstimatorSection, ExperimentConfig, PredictionSection, SchemeSection, SymbolSection};
pub use report::{collect_rows, render_csv, render_markdown, write_report};

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degeneracy::{analytic_profile, default_delta_grid, default_j_grid, fit_degeneracy, DegeneracyProfile, SamplingParams};
use crate::error::{Error, Result};
use crate::exponents::{paper_prediction, predict_general, LemmaParams, PaperPrediction};
use crate::lp::{estimate_regularity, EstimateFlag, Method, ScalarField};
use crate::solvers::{
    solve_conservation_law, solve_convection_diffusion, solve_elliptic_degenerate, solve_kinetic_bgk, EllipticOptions,
    Scheme, Trajectory,
};
use crate::symbol::SymbolSpec;
use plot::{field_plot, line_chart, Series};

/// Absolute part of the verdict tolerance `2 stderr + 0.05`.
pub const VERDICT_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    NoPrediction,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Consistent => "consistent",
            Self::Inconsistent => "inconsistent",
            Self::NoPrediction => "no-prediction",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub n: usize,
    pub s_star: f64,
    pub stderr: f64,
    pub s_raw: f64,
    pub flags: Vec<String>,
    /// L1 distance to the exact solution when one is known.
    pub exact_l1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub id: String,
    pub example: String,
    /// Open upper bound on the exponent from the example formula.
    pub predicted: Option<f64>,
    pub clamped: bool,
    pub interval: Option<[f64; 2]>,
    /// Bootstrapped exponent from the lemma applied to the profile.
    pub composed: Option<f64>,
    pub degenerate: bool,
    pub measurements: Vec<Measurement>,
    pub verdict: Verdict,
    pub tolerance: f64,
    /// `s_star` non-decreasing along the ladder within two standard errors.
    pub refinement_ok: bool,
    pub runtime_seconds: f64,
    /// `stage: message` when a stage failed.
    pub failure: Option<String>,
}

impl ComparisonRow {
    fn empty(id: &str, example: &str) -> Self {
        Self {
            id: id.to_string(),
            example: example.to_string(),
            predicted: None,
            clamped: false,
            interval: None,
            composed: None,
            degenerate: false,
            measurements: Vec::new(),
            verdict: Verdict::NoPrediction,
            tolerance: VERDICT_MARGIN,
            refinement_ok: true,
            runtime_seconds: 0.0,
            failure: None,
        }
    }

    pub fn finest(&self) -> Option<&Measurement> {
        self.measurements.last()
    }

    /// Failed rows count as inconsistent: nothing confirms the bound.
    fn finalize(&mut self) {
        let Some(m) = self.finest().cloned() else {
            self.verdict = if self.failure.is_some() { Verdict::Inconsistent } else { Verdict::NoPrediction };
            return;
        };
        self.tolerance = 2.0 * m.stderr + VERDICT_MARGIN;
        self.verdict = match (self.predicted, &self.failure) {
            (_, Some(_)) => Verdict::Inconsistent,
            (None, None) => Verdict::NoPrediction,
            (Some(s), None) if m.s_star >= s - self.tolerance => Verdict::Consistent,
            _ => Verdict::Inconsistent,
        };
        self.refinement_ok = self
            .measurements
            .windows(2)
            .all(|w| w[1].s_star >= w[0].s_star - 2.0 * (w[0].stderr + w[1].stderr));
    }
}

/// Caps the global rayon pool at `VELAVG_THREADS` when set; later calls are no-ops.
pub fn configure_threads() {
    if let Some(n) = std::env::var("VELAVG_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn flag_names(flags: &[EstimateFlag]) -> Vec<String> {
    flags
        .iter()
        .map(|f| match f {
            EstimateFlag::BvOrBetter => "bv-or-better".to_string(),
            EstimateFlag::Smooth => "smooth".to_string(),
        })
        .collect()
}

fn artifact<E: fmt::Display>(r: std::result::Result<(), E>) -> std::result::Result<(), String> {
    r.map_err(|e| format!("artifacts: {e}"))
}

fn stage<T>(name: &str, r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{name}: {e}"))
}

/// Final-time field at one resolution, plus the trajectory when the solver is evolutionary.
pub fn solve_at(cfg: &ExperimentConfig, spec: &SymbolSpec, n: usize) -> Result<(ScalarField, Option<Trajectory>)> {
    let shape = cfg.shape(n, spec.dim());
    if cfg.is_elliptic() {
        let value = cfg.data.value.unwrap_or(0.0);
        let sol = solve_elliptic_degenerate(spec, &shape, cfg.data.length, &move |_| value, &EllipticOptions::default())?;
        return Ok((sol.field, None));
    }
    let rho0 = cfg.initial_data(&shape)?;
    let scheme = cfg.scheme_config()?;
    let traj = if scheme.scheme == Scheme::KineticBgk {
        solve_kinetic_bgk(spec, &rho0, &scheme)?
    } else if spec.has_diffusion() {
        solve_convection_diffusion(spec, &rho0, &scheme)?
    } else {
        solve_conservation_law(spec, &rho0, &scheme)?
    };
    Ok((traj.last().clone(), Some(traj)))
}

fn prediction_csv(paper: &PaperPrediction, composed: Option<f64>, profile: Option<&DegeneracyProfile>) -> String {
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    let mut s = String::from("key,value\n");
    s.push_str(&format!("example,{}\n", paper.example.name()));
    s.push_str(&format!("s_max,{}\n", opt(paper.s_max)));
    s.push_str(&format!("raw,{}\n", opt(paper.raw)));
    s.push_str(&format!("clamped,{}\n", paper.clamped));
    s.push_str(&format!("regime,\"{}\"\n", paper.regime));
    if let Some((a, b)) = paper.interval {
        s.push_str(&format!("interval,{a}..{b}\n"));
    }
    s.push_str(&format!("composed,{}\n", opt(composed)));
    if let Some(p) = profile {
        for (k, v) in [("alpha", p.alpha), ("beta", p.beta), ("mu", p.mu), ("lambda", p.lambda)] {
            s.push_str(&format!("{k},{v}\n"));
        }
        s.push_str(&format!("degenerate,{}\n", p.degenerate_flag()));
    }
    s
}

/// Runs one experiment, writing artifacts under `out_dir/<id>/`. Stage failures end up in the
/// row; only failures to write the output directory are returned as errors.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ComparisonRow> {
    let start = Instant::now();
    let dir = out_dir.join(&cfg.id);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    let mut row = ComparisonRow::empty(&cfg.id, &cfg.symbol.example);
    if let Err(msg) = pipeline(cfg, &dir, &mut row) {
        row.failure = Some(msg);
    }
    row.finalize();
    row.runtime_seconds = start.elapsed().as_secs_f64();
    let text = toml::to_string(&row).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(dir.join("row.toml"), text)?;
    Ok(row)
}

fn pipeline(cfg: &ExperimentConfig, dir: &Path, row: &mut ComparisonRow) -> std::result::Result<(), String> {
    let spec = stage("symbol", cfg.symbol_spec())?;

    let profile = if cfg.prediction.mode == "fit" {
        let params = SamplingParams { n_samples: cfg.prediction.n_samples, ..SamplingParams::default() };
        let report = stage("degeneracy", fit_degeneracy(&spec, &default_delta_grid(), &default_j_grid(), &params))?;
        artifact(std::fs::write(dir.join("degeneracy.csv"), report.to_csv(spec.frequency_dim())))?;
        let mut by_j: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for m in report.measurements.iter().filter(|m| m.measure > 0.0) {
            match by_j.iter_mut().find(|(j, _)| *j == m.j) {
                Some((_, pts)) => pts.push((m.delta.log2(), m.measure.log2())),
                None => by_j.push((m.j, vec![(m.delta.log2(), m.measure.log2())])),
            }
        }
        let series: Vec<Series> = by_j.into_iter().map(|(j, pts)| Series::scatter(format!("J = {j}"), pts)).collect();
        artifact(std::fs::write(dir.join("degeneracy.svg"), line_chart("set measure vs delta", "log2 delta", "log2 omega", &series)))?;
        report.fit.profile().cloned()
    } else {
        analytic_profile(&spec)
    };
    row.degenerate = profile.as_ref().is_some_and(|p| p.degenerate_flag());

    let example = stage("prediction", cfg.example(profile.as_ref().map(|p| p.alpha)))?;
    let paper = stage("prediction", paper_prediction(example, cfg.prediction.p_data))?;
    let composed = match &profile {
        Some(p) if !p.degenerate_flag() => stage("prediction", predict_general(p, &LemmaParams::new(p.alpha)))?
            .ok()
            .map(|r| r.s_boot),
        _ => None,
    };
    row.predicted = paper.s_max;
    row.clamped = paper.clamped;
    row.interval = paper.interval.map(|(a, b)| [a, b]);
    row.composed = composed;
    artifact(std::fs::write(dir.join("prediction.csv"), prediction_csv(&paper, composed, profile.as_ref())))?;

    let method = stage("estimate", Method::parse(&cfg.estimator.method))?;
    let barenblatt = stage("solve", cfg.barenblatt())?;
    let mut band_series = Vec::new();
    let mut estimates = String::from("n,s_star,stderr,s_raw,flags,exact_l1\n");
    let finest = *cfg.resolutions.last().expect("validated ladder");
    for &n in &cfg.resolutions {
        let (field, traj) = stage("solve", solve_at(cfg, &spec, n))?;
        artifact(field.write(&dir.join(format!("final_{n}.txt"))))?;
        if n == finest {
            artifact(std::fs::write(dir.join("solution.svg"), field_plot(&format!("{} at N = {n}", cfg.id), &field)))?;
            if let Some(t) = traj.as_ref().filter(|_| !cfg.scheme.snapshots.is_empty()) {
                artifact(t.write_dir(&dir.join("trajectory")))?;
            }
        }
        let exact_l1 = barenblatt.as_ref().map(|b| {
            let exact = b.field(n, cfg.data.length, cfg.scheme.end_time).expect("valid grid");
            field.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).sum::<f64>() * field.cell_volume()
        });
        let window = cfg.window(field.shape());
        let est = stage("estimate", estimate_regularity(&field, cfg.estimator.p, window.as_ref(), method))?;
        artifact(std::fs::write(dir.join(format!("bands_{n}.csv")), est.band_csv()))?;
        band_series.push(Series::line(
            format!("N = {n}"),
            est.block_norms.iter().filter(|(_, v)| *v > 0.0).map(|(j, v)| (*j as f64, v.log2())).collect(),
        ));
        let flags = flag_names(&est.flags);
        estimates.push_str(&format!(
            "{n},{},{},{},{},{}\n",
            est.s_star,
            est.slope_stderr,
            est.s_raw,
            flags.join(";"),
            exact_l1.map_or(String::new(), |e| e.to_string())
        ));
        row.measurements.push(Measurement { n, s_star: est.s_star, stderr: est.slope_stderr, s_raw: est.s_raw, flags, exact_l1 });
    }
    artifact(std::fs::write(dir.join("estimates.csv"), estimates))?;
    artifact(std::fs::write(dir.join("blocks.svg"), line_chart("block norm decay", "j", "log2 norm", &band_series)))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub rows: Vec<ComparisonRow>,
}

impl SuiteOutcome {
    pub fn any_inconsistent(&self) -> bool {
        self.rows.iter().any(|r| r.verdict == Verdict::Inconsistent)
    }
}

/// Config files (`*.toml`) directly inside `dir`, sorted by name.
pub fn config_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every config in `config_dir` in parallel and writes `report.md` and `report.csv`
/// into `out_dir`.
pub fn run_suite(config_dir: &Path, out_dir: &Path) -> Result<SuiteOutcome> {
    let files = config_files(config_dir)?;
    std::fs::create_dir_all(out_dir)?;
    let mut configs = Vec::new();
    let mut rows = Vec::new();
    for f in &files {
        let stem = f.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        match ExperimentConfig::load(f) {
            Ok(c) => configs.push(c),
            Err(e) => {
                let mut row = ComparisonRow::empty(&stem, "unknown");
                row.failure = Some(format!("config: {e}"));
                row.finalize();
                rows.push(row);
            }
        }
    }
    let mut ids: Vec<&str> = configs.iter().map(|c| c.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Config(format!("duplicate experiment id {}", w[0])));
    }
    let ran: Result<Vec<ComparisonRow>> = configs.par_iter().map(|c| run_experiment(c, out_dir)).collect();
    rows.extend(ran?);
    report::sort_rows(&mut rows);
    write_report(out_dir, &rows)?;
    Ok(SuiteOutcome { rows })
}
