use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ExampleId;
use crate::lp::{plateau_window, Method, ScalarField};
use crate::solvers::initial::{diagonal_wave, random_bandlimited, riemann, sine, Barenblatt};
use crate::solvers::{BgkParams, Scheme, SchemeConfig};
use crate::symbol::library;
use crate::symbol::{SymbolSpec, VelocityFunction};

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    /// Grid sizes per axis, strictly increasing powers of two.
    pub resolutions: Vec<usize>,
    pub symbol: SymbolSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    pub data: DataSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub prediction: PredictionSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSection {
    /// Family name: burgers, twod-flux, sine-cubic, porous, convdiff, twod-convdiff,
    /// fully-degenerate, elliptic.
    pub example: String,
    pub ell: Option<f64>,
    pub m: Option<f64>,
    pub n: Option<f64>,
    /// Only for `elliptic`; defaults to the fitted or analytic alpha.
    pub alpha: Option<f64>,
    /// Constant source for `elliptic`.
    pub source: Option<f64>,
    pub interval: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    pub scheme: String,
    pub cfl: f64,
    pub diffusion_cfl: f64,
    pub end_time: f64,
    pub snapshots: Vec<f64>,
    pub bgk_m: usize,
    pub bgk_epsilon: f64,
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            scheme: "godunov".into(),
            cfl: 0.45,
            diffusion_cfl: 0.2,
            end_time: 1.0,
            snapshots: Vec::new(),
            bgk_m: 256,
            bgk_epsilon: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// riemann, sine, barenblatt, diagonal-wave, random-bandlimited, dirichlet (elliptic).
    pub name: String,
    #[serde(default = "one")]
    pub length: f64,
    pub rho_l: Option<f64>,
    pub rho_r: Option<f64>,
    pub x0: Option<f64>,
    pub amplitude: Option<f64>,
    pub k: Option<u32>,
    pub offset: Option<f64>,
    pub t0: Option<f64>,
    pub seed: Option<u64>,
    pub j_cut: Option<u32>,
    /// Boundary value for `dirichlet`.
    pub value: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    pub p: f64,
    pub method: String,
    /// `plateau` (central half) or `none`.
    pub window: String,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self { p: 1.0, method: "lp".into(), window: "plateau".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictionSection {
    /// `analytic` (closed-form profile) or `fit` (numerical degeneracy fit).
    pub mode: String,
    /// Integrability of the data; `inf` for bounded data.
    pub p_data: f64,
    pub n_samples: usize,
}

impl Default for PredictionSection {
    fn default() -> Self {
        Self { mode: "analytic".into(), p_data: f64::INFINITY, n_samples: 1 << 17 }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Minimal config around a symbol, for single-stage tools.
    pub fn for_symbol(symbol: SymbolSection) -> Result<Self> {
        let cfg = Self {
            id: "symbol".into(),
            seed: 0,
            resolutions: vec![64],
            symbol,
            scheme: SchemeSection::default(),
            data: DataSection {
                name: "sine".into(),
                length: 1.0,
                rho_l: None,
                rho_r: None,
                x0: None,
                amplitude: None,
                k: None,
                offset: None,
                t0: None,
                seed: None,
                j_cut: None,
                value: None,
            },
            estimator: EstimatorSection::default(),
            prediction: PredictionSection::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() || self.id.contains(['/', '\\']) {
            return config_err("id must be a nonempty name without path separators");
        }
        if self.resolutions.is_empty() {
            return config_err("resolution ladder is empty");
        }
        for w in self.resolutions.windows(2) {
            if w[1] <= w[0] {
                return config_err("resolution ladder must be strictly increasing");
            }
        }
        if let Some(&n) = self.resolutions.iter().find(|&&n| !n.is_power_of_two() || n < 64) {
            return config_err(format!("resolution {n} is not a power of two >= 64"));
        }
        if !matches!(self.prediction.mode.as_str(), "analytic" | "fit") {
            return config_err(format!("unknown prediction mode {}", self.prediction.mode));
        }
        if !matches!(self.estimator.window.as_str(), "plateau" | "none") {
            return config_err(format!("unknown window {}", self.estimator.window));
        }
        Method::parse(&self.estimator.method)?;
        Scheme::parse(&self.scheme.scheme)?;
        if !(self.data.length > 0.0) {
            return config_err("data.length must be positive");
        }
        self.example(None)?;
        Ok(())
    }

    pub fn is_elliptic(&self) -> bool {
        self.symbol.example == "elliptic"
    }

    /// Example id; `alpha_fallback` fills the elliptic exponent when not configured.
    pub fn example(&self, alpha_fallback: Option<f64>) -> Result<ExampleId> {
        let s = &self.symbol;
        let alpha = s.alpha.or(alpha_fallback).or(if s.example == "elliptic" { Some(1.0) } else { None });
        ExampleId::from_name(&s.example, s.ell, s.m, s.n, alpha)
    }

    pub fn interval(&self) -> (f64, f64) {
        self.symbol.interval.map_or((-1.0, 1.0), |[a, b]| (a, b))
    }

    pub fn symbol_spec(&self) -> Result<SymbolSpec> {
        let s = &self.symbol;
        let i = self.interval();
        let need = |x: Option<f64>, what: &str| x.ok_or_else(|| Error::Config(format!("symbol.{what} is required")));
        match s.example.as_str() {
            "burgers" => library::burgers(need(s.ell, "ell")?, i),
            "twod-flux" => library::twod_flux(need(s.ell, "ell")?, need(s.m, "m")?, i),
            "sine-cubic" => library::sine_cubic(i),
            "porous" => library::porous(need(s.n, "n")?, i),
            "convdiff" => library::convection_diffusion(need(s.ell, "ell")?, need(s.n, "n")?, i),
            "twod-convdiff" => {
                let b = VelocityFunction::abs_power(need(s.n, "n")?)?;
                let z = VelocityFunction::zero();
                SymbolSpec::new(
                    vec![VelocityFunction::burgers(need(s.ell, "ell")?)?, VelocityFunction::burgers(need(s.m, "m")?)?],
                    vec![vec![b.clone(), z.clone()], vec![z, b]],
                    true,
                    i,
                )
            }
            "fully-degenerate" => library::fully_degenerate(need(s.ell, "ell")?, need(s.n, "n")?, i),
            "elliptic" => library::elliptic(s.n.unwrap_or(1.0), VelocityFunction::constant(s.source.unwrap_or(-1.0)), i),
            other => config_err(format!("unknown example {other}")),
        }
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let s = &self.scheme;
        let scheme = Scheme::parse(&s.scheme)?;
        let mut cfg = SchemeConfig::new(scheme, s.end_time);
        cfg.cfl = s.cfl;
        cfg.diffusion_cfl = s.diffusion_cfl;
        cfg.snapshot_times = s.snapshots.clone();
        if scheme == Scheme::KineticBgk {
            cfg.bgk = Some(BgkParams { m: s.bgk_m, epsilon: s.bgk_epsilon });
        }
        Ok(cfg)
    }

    pub fn shape(&self, n: usize, dim: usize) -> Vec<usize> {
        vec![n; dim]
    }

    pub fn window(&self, shape: &[usize]) -> Option<ScalarField> {
        (self.estimator.window == "plateau").then(|| plateau_window(shape, self.data.length))
    }

    pub fn barenblatt(&self) -> Result<Option<Barenblatt>> {
        if self.data.name != "barenblatt" {
            return Ok(None);
        }
        let n = self.symbol.n.ok_or_else(|| Error::Config("barenblatt data needs symbol.n".into()))?;
        Ok(Some(Barenblatt::new(n, self.data.t0.unwrap_or(0.1), self.data.length)?))
    }

    /// Initial datum on `shape`.
    pub fn initial_data(&self, shape: &[usize]) -> Result<ScalarField> {
        let d = &self.data;
        let l = d.length;
        let amp = d.amplitude.unwrap_or(1.0);
        let offset = d.offset.unwrap_or(0.0);
        match d.name.as_str() {
            "riemann" => riemann(shape, l, d.rho_l.unwrap_or(1.0), d.rho_r.unwrap_or(0.0), d.x0.unwrap_or(0.5 * l)),
            "sine" => sine(shape, l, amp, d.k.unwrap_or(1), offset),
            "barenblatt" => {
                if shape.len() != 1 {
                    return config_err("barenblatt data is one-dimensional");
                }
                self.barenblatt()?.expect("barenblatt data").field(shape[0], l, 0.0)
            }
            "diagonal-wave" => {
                if shape.len() != 2 {
                    return config_err("diagonal-wave data is two-dimensional");
                }
                let k = d.k.unwrap_or(1) as f64;
                diagonal_wave(shape[0], l, |s| offset + amp * (2.0 * std::f64::consts::PI * k * s / l).sin())
            }
            "random-bandlimited" => {
                let f = random_bandlimited(shape, l, d.seed.unwrap_or(self.seed), d.j_cut.unwrap_or(3))?;
                Ok(f.with_values(f.values().iter().map(|v| offset + amp * v).collect()))
            }
            other => config_err(format!("unknown initial data {other}")),
        }
    }
}
