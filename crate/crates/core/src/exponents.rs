//! Closed-form regularity exponents of the averaging lemmas, the bootstrap fixed
//! point, and the predicted exponents for the worked PDE families.
//!
//! Predicted exponents are open upper bounds: a value `s` means "regular of every
//! order strictly below `s`".

use std::fmt;

use crate::degeneracy::{analytic_profile, DegeneracyProfile};
use crate::error::{Error, Result};
use crate::symbol::SymbolSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaParams {
    pub alpha: f64,
    pub mu: f64,
    pub lambda: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    /// Velocity-derivative order of the source term.
    pub n_order: u32,
    /// Spatial-derivative order of the source term.
    pub eta: f64,
    /// A-priori regularity of the kinetic density.
    pub sigma: f64,
    /// Degree of the symbol.
    pub k: f64,
}

impl LemmaParams {
    /// `alpha` with `p = 2`, `q = 1`, `N = 1`, `k = 1`, `beta = 1` and zero elsewhere.
    pub fn new(alpha: f64) -> Self {
        Self { alpha, mu: 0.0, lambda: 0.0, beta: 1.0, p: 2.0, q: 1.0, n_order: 1, eta: 0.0, sigma: 0.0, k: 1.0 }
    }

    pub fn with_profile(profile: &DegeneracyProfile) -> Self {
        Self { mu: profile.mu, lambda: profile.lambda, beta: profile.beta, ..Self::new(profile.alpha) }
    }

    /// `1/p'` (zero at `p = 1`).
    pub fn inv_p_conj(&self) -> f64 {
        1.0 - 1.0 / self.p
    }

    /// `1/q'` (zero at `q = 1`).
    pub fn inv_q_conj(&self) -> f64 {
        1.0 - 1.0 / self.q
    }

    fn validate(&self, n_order: f64) -> Result<()> {
        let bad = |m: String| Err(Error::Input(m));
        if !(self.p > 1.0 && self.p <= 2.0) {
            return bad(format!("p = {} outside (1, 2]", self.p));
        }
        if !(self.q >= 1.0 && self.q <= 2.0) {
            return bad(format!("q = {} outside [1, 2]", self.q));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha = {} must be positive", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return bad(format!("mu = {} outside [0, 1]", self.mu));
        }
        if self.sigma < 0.0 || self.eta < 0.0 || self.lambda < 0.0 {
            return bad("sigma, eta and lambda must be nonnegative".into());
        }
        let iq = self.inv_q_conj();
        if iq > 0.0 && self.alpha >= (n_order + 1.0) / iq {
            return Err(Error::LemmaInapplicable(format!(
                "0 < alpha < (N+1) q' violated: alpha = {}, (N+1) q' = {}",
                self.alpha,
                (n_order + 1.0) / iq
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaMode {
    Homogeneous,
    Improved,
    General,
}

impl fmt::Display for LemmaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Homogeneous => "homogeneous",
            Self::Improved => "improved",
            Self::General => "general",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityPrediction {
    pub theta: f64,
    pub s_pre: f64,
    pub s_boot: f64,
    pub r: f64,
    pub mode: LemmaMode,
    /// Spatial order gained per application of the lemma.
    pub gain: f64,
    /// Set when the gain term is not positive and no regularization follows.
    pub no_gain: bool,
}

fn interpolation_r(theta: f64, p: f64, q: f64) -> f64 {
    1.0 / ((1.0 - theta) / p + theta / q)
}

fn assemble(params: &LemmaParams, theta: f64, gain: f64, mode: LemmaMode) -> RegularityPrediction {
    let no_gain = gain <= 0.0;
    let (s_pre, s_boot) = if no_gain {
        (params.sigma, params.sigma)
    } else {
        let s_pre = (1.0 - theta) * params.sigma + theta * gain;
        (s_pre, bootstrap_fixed_point(theta, gain, params.sigma))
    };
    RegularityPrediction { theta, s_pre, s_boot, r: interpolation_r(theta, params.p, params.q), mode, gain, no_gain }
}

/// `theta = (alpha/p') / (alpha (1/p' - 1/q') + N + 1)`, `s = (1-theta) sigma + theta (k - eta)`.
pub fn theta_homogeneous(params: &LemmaParams) -> Result<RegularityPrediction> {
    let n = f64::from(params.n_order);
    params.validate(n)?;
    if params.k <= params.sigma + params.eta {
        return Err(Error::LemmaInapplicable(format!(
            "k > sigma + eta violated: k = {}, sigma + eta = {}",
            params.k,
            params.sigma + params.eta
        )));
    }
    let ip = params.inv_p_conj();
    let theta = (params.alpha * ip) / (params.alpha * (ip - params.inv_q_conj()) + n + 1.0);
    Ok(assemble(params, theta, params.k - params.eta, LemmaMode::Homogeneous))
}

fn theta_mu(params: &LemmaParams) -> f64 {
    let ip = params.inv_p_conj();
    (params.alpha * ip) / (params.alpha * (ip - params.inv_q_conj()) + 2.0 - params.mu)
}

/// `theta = (alpha/p') / (alpha (1/p' - 1/q') + 2 - mu)`, `s = (1-theta) sigma + theta k`.
pub fn theta_improved(params: &LemmaParams) -> Result<RegularityPrediction> {
    params.validate(1.0)?;
    Ok(assemble(params, theta_mu(params), params.k, LemmaMode::Improved))
}

/// Sentinel for predictions that do not exist (degenerate symbol or regime outside the formulas).
#[derive(Debug, Clone, PartialEq)]
pub struct NoPrediction(pub String);

/// General lemma with `(alpha, beta, mu, lambda)` from `profile`; other fields from `params`.
pub fn predict_general(profile: &DegeneracyProfile, params: &LemmaParams) -> Result<std::result::Result<RegularityPrediction, NoPrediction>> {
    if profile.degenerate_flag() {
        return Ok(Err(NoPrediction("degenerate symbol: no regularizing effect".into())));
    }
    let p = LemmaParams { alpha: profile.alpha, beta: profile.beta, mu: profile.mu, lambda: profile.lambda, ..*params };
    p.validate(1.0)?;
    let gain = p.beta * (2.0 - p.mu - p.lambda);
    Ok(Ok(assemble(&p, theta_mu(&p), gain, LemmaMode::General)))
}

/// Limit of `s <- (1-theta) s / 2 + theta gain` from `sigma0`.
pub fn bootstrap_fixed_point(theta: f64, gain: f64, sigma0: f64) -> f64 {
    let mut s = sigma0;
    for _ in 0..10_000 {
        let next = (1.0 - theta) * s / 2.0 + theta * gain;
        if (next - s).abs() < 1e-14 {
            return next;
        }
        s = next;
    }
    s
}

pub fn bootstrap_closed_form(theta: f64, gain: f64) -> f64 {
    2.0 * theta * gain / (1.0 + theta)
}

/// The worked example families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExampleId {
    Burgers { ell: f64 },
    TwodFlux { ell: f64, m: f64 },
    SineCubic,
    Porous { n: f64 },
    ConvDiff { ell: f64, n: f64 },
    TwodConvDiff { ell: f64, m: f64, n: f64 },
    FullyDegenerate { ell: f64, n: f64 },
    Elliptic { alpha: f64 },
}

impl ExampleId {
    /// Parse `burgers`, `twod-flux`, ... with the family parameters.
    pub fn from_name(name: &str, ell: Option<f64>, m: Option<f64>, n: Option<f64>, alpha: Option<f64>) -> Result<Self> {
        let need = |x: Option<f64>, what: &str| x.ok_or_else(|| Error::Input(format!("example {name} needs {what}")));
        Ok(match name {
            "burgers" => Self::Burgers { ell: need(ell, "ell")? },
            "twod-flux" => Self::TwodFlux { ell: need(ell, "ell")?, m: need(m, "m")? },
            "sine-cubic" => Self::SineCubic,
            "porous" => Self::Porous { n: need(n, "n")? },
            "convdiff" => Self::ConvDiff { ell: need(ell, "ell")?, n: need(n, "n")? },
            "twod-convdiff" => Self::TwodConvDiff { ell: need(ell, "ell")?, m: need(m, "m")?, n: need(n, "n")? },
            "fully-degenerate" => Self::FullyDegenerate { ell: need(ell, "ell")?, n: need(n, "n")? },
            "elliptic" => Self::Elliptic { alpha: need(alpha, "alpha")? },
            other => return Err(Error::Input(format!("unknown example {other}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Burgers { .. } => "burgers",
            Self::TwodFlux { .. } => "twod-flux",
            Self::SineCubic => "sine-cubic",
            Self::Porous { .. } => "porous",
            Self::ConvDiff { .. } => "convdiff",
            Self::TwodConvDiff { .. } => "twod-convdiff",
            Self::FullyDegenerate { .. } => "fully-degenerate",
            Self::Elliptic { .. } => "elliptic",
        }
    }
}

/// Predicted open bound on the `W^{s,1}_loc` exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperPrediction {
    pub example: ExampleId,
    /// `None` when no regularizing effect is predicted.
    pub s_max: Option<f64>,
    /// Formula value before clamping at 1.
    pub raw: Option<f64>,
    pub clamped: bool,
    /// Set when the family only brackets the exponent; `s_max` is the lower end.
    pub interval: Option<(f64, f64)>,
    pub regime: String,
}

impl PaperPrediction {
    fn value(example: ExampleId, s: f64, p_conj: f64, regime: impl Into<String>) -> Self {
        let raw = s / p_conj;
        Self { example, s_max: Some(raw.min(1.0)), raw: Some(raw), clamped: raw > 1.0, interval: None, regime: regime.into() }
    }

    fn none(example: ExampleId, regime: impl Into<String>) -> Self {
        Self { example, s_max: None, raw: None, clamped: false, interval: None, regime: regime.into() }
    }
}

fn hyperbolic_bound(ell: f64) -> f64 {
    1.0 / (ell + 2.0)
}

fn parabolic_bound(n: f64) -> f64 {
    2.0 / (n + 2.0)
}

/// `s = beta alpha / (2 alpha + 1)` for one-dimensional convection `v^l` with diffusion `|v|^n`.
fn convdiff_bound(ell: f64, n: f64) -> (f64, &'static str) {
    if n <= ell {
        (parabolic_bound(n), "n <= l")
    } else if n >= 2.0 * ell {
        (hyperbolic_bound(ell), "n >= 2l")
    } else {
        let zeta = n / ell - 1.0;
        let alpha = (1.0 - zeta) / ell + zeta / n;
        let beta_alpha = (1.0 - zeta) / ell + 2.0 * zeta / n;
        (beta_alpha / (2.0 * alpha + 1.0), "l < n < 2l")
    }
}

/// Predicted exponent for `example` with data in `L^p` (`p = infinity` for bounded data).
pub fn paper_prediction(example: ExampleId, p_data: f64) -> Result<PaperPrediction> {
    if !(p_data >= 1.0) {
        return Err(Error::Input(format!("data exponent p = {p_data} must be >= 1")));
    }
    let p_conj = if p_data.is_infinite() { 1.0 } else if p_data == 1.0 { f64::INFINITY } else { p_data / (p_data - 1.0) };
    let positive = |x: f64, what: &str| {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(Error::Input(format!("{what} must be positive")))
        }
    };
    let id = example;
    Ok(match example {
        ExampleId::Burgers { ell } => {
            positive(ell, "l")?;
            PaperPrediction::value(id, hyperbolic_bound(ell), p_conj, "l > 0")
        }
        ExampleId::TwodFlux { ell, m } => {
            positive(ell, "l")?;
            positive(m, "m")?;
            if ell == m {
                PaperPrediction::none(id, "l = m: degenerate flux, requires l != m")
            } else {
                PaperPrediction::value(id, hyperbolic_bound(ell).min(hyperbolic_bound(m)), p_conj, "l != m")
            }
        }
        ExampleId::SineCubic => PaperPrediction::value(id, 0.25 / 1.5, p_conj, "alpha = 1/4"),
        ExampleId::Porous { n } => {
            positive(n, "n")?;
            PaperPrediction::value(id, parabolic_bound(n), p_conj, "n > 0")
        }
        ExampleId::ConvDiff { ell, n } => {
            positive(ell, "l")?;
            positive(n, "n")?;
            let (s, regime) = convdiff_bound(ell, n);
            PaperPrediction::value(id, s, p_conj, regime)
        }
        ExampleId::TwodConvDiff { ell, m, n } => {
            positive(ell, "l")?;
            positive(m, "m")?;
            positive(n, "n")?;
            let s_lm = hyperbolic_bound(ell).min(hyperbolic_bound(m));
            let s_n = parabolic_bound(n);
            if n >= 2.0 * ell.max(m) && ell != m {
                PaperPrediction::value(id, s_lm, p_conj, "n >= 2 max(l, m), l != m")
            } else if n <= ell.min(m) || ell == m {
                PaperPrediction::value(id, s_n, p_conj, "n <= min(l, m) or l = m")
            } else {
                let (lo, hi) = (s_lm.min(s_n), s_lm.max(s_n));
                let mut p = PaperPrediction::value(id, lo, p_conj, "min(l, m) < n < 2 max(l, m): bracketed");
                p.interval = Some((lo / p_conj, hi / p_conj));
                p
            }
        }
        ExampleId::FullyDegenerate { ell, n } => {
            positive(ell, "l")?;
            positive(n, "n")?;
            if n >= 2.0 * ell {
                PaperPrediction::value(id, 6.0 / (2.0 + 2.0 * n - ell), p_conj, "n >= 2l")
            } else {
                PaperPrediction::none(id, "n < 2l: requires n >= 2l")
            }
        }
        ExampleId::Elliptic { alpha } => {
            positive(alpha, "alpha")?;
            PaperPrediction::value(id, alpha.min(2.0 * alpha / (2.0 * alpha + 1.0)), p_conj, "alpha > 0")
        }
    })
}

/// Composition `bootstrap(predict_general(analytic_profile(spec)))` at `p = 2`, `q = 1`, `sigma = 0`.
pub fn composed_prediction(spec: &SymbolSpec) -> Option<RegularityPrediction> {
    let profile = analytic_profile(spec)?;
    predict_general(&profile, &LemmaParams::new(profile.alpha)).ok()?.ok()
}
