//! Second-order transport-diffusion symbols
//! `L(i(tau, xi), v) = i(tau + a(v).xi) + <b(v) xi, xi>` and the velocity
//! functions that make them up.

use num_complex::Complex64;

use crate::error::{input, Error, Result};

/// Tolerance for the positive-semidefiniteness check of `b(v)`.
pub const PSD_TOLERANCE: f64 = 1e-12;

/// Default finite-difference step used for tabulated velocity functions.
pub const DEFAULT_H_V: f64 = 1e-6;

/// Tabulated velocity function, linear between strictly increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    nodes: Vec<(f64, f64)>,
}

impl SampleTable {
    pub fn new(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 2 {
            return input("a velocity table needs at least two nodes");
        }
        if nodes.iter().any(|(v, y)| !v.is_finite() || !y.is_finite()) {
            return input("velocity table contains non-finite entries");
        }
        if nodes.windows(2).any(|w| w[1].0 <= w[0].0) {
            return input("velocity table nodes must be strictly increasing in v");
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    fn segment(&self, v: f64) -> usize {
        let n = self.nodes.len();
        match self.nodes.binary_search_by(|(x, _)| x.total_cmp(&v)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Linear interpolation; constant extension beyond the end nodes.
    fn eval(&self, v: f64) -> f64 {
        let first = self.nodes[0];
        let last = self.nodes[self.nodes.len() - 1];
        if v <= first.0 {
            return first.1;
        }
        if v >= last.0 {
            return last.1;
        }
        let i = self.segment(v);
        let (x0, y0) = self.nodes[i];
        let (x1, y1) = self.nodes[i + 1];
        y0 + (y1 - y0) * (v - x0) / (x1 - x0)
    }

    /// Exact integral of the interpolant (with constant extension) over [lo, hi].
    fn integral(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return -self.integral(hi, lo);
        }
        let mut cuts = vec![lo];
        cuts.extend(self.nodes.iter().map(|n| n.0).filter(|&x| x > lo && x < hi));
        cuts.push(hi);
        cuts.windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.eval(w[0]) + self.eval(w[1])))
            .sum()
    }

    fn zeros_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for w in self.nodes.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if y0 == 0.0 && x0 > lo && x0 < hi {
                out.push(x0);
            }
            if y0 * y1 < 0.0 {
                let z = x0 - y0 * (x1 - x0) / (y1 - y0);
                if z > lo && z < hi {
                    out.push(z);
                }
            }
        }
        out
    }
}

/// The shape of a velocity function, before scaling.
#[derive(Debug, Clone, PartialEq)]
pub enum FluxKind {
    /// `v^l` for a positive integer `l`.
    Power(f64),
    /// `sgn(v)|v|^l`.
    SignedPower(f64),
    /// `|v|^l`.
    AbsPower(f64),
    Sin,
    Cos,
    Constant,
    Table(SampleTable),
}

/// A scalar function of the velocity variable: `scale * kind(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityFunction {
    pub kind: FluxKind,
    pub scale: f64,
}

/// Derivative value plus a flag marking one-sided (non-differentiable) evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub one_sided: bool,
}

impl VelocityFunction {
    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) || exponent.fract() != 0.0 {
            return input(format!(
                "power velocity function needs a positive integer exponent, got {exponent}"
            ));
        }
        Ok(Self { kind: FluxKind::Power(exponent), scale: 1.0 })
    }

    pub fn signed_power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return input(format!("signed power exponent must be positive, got {exponent}"));
        }
        Ok(Self { kind: FluxKind::SignedPower(exponent), scale: 1.0 })
    }

    pub fn abs_power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return input(format!("abs power exponent must be positive, got {exponent}"));
        }
        Ok(Self { kind: FluxKind::AbsPower(exponent), scale: 1.0 })
    }

    pub fn sin() -> Self {
        Self { kind: FluxKind::Sin, scale: 1.0 }
    }

    pub fn cos() -> Self {
        Self { kind: FluxKind::Cos, scale: 1.0 }
    }

    pub fn constant(c: f64) -> Self {
        Self { kind: FluxKind::Constant, scale: c }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn table(nodes: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Self { kind: FluxKind::Table(SampleTable::new(nodes)?), scale: 1.0 })
    }

    /// `v^l` for integer `l`, `sgn(v)|v|^l` otherwise.
    pub fn burgers(ell: f64) -> Result<Self> {
        if ell.fract() == 0.0 {
            Self::power(ell)
        } else {
            Self::signed_power(ell)
        }
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
    }

    pub fn eval(&self, v: f64) -> f64 {
        let base = match &self.kind {
            FluxKind::Power(l) => v.powi(*l as i32),
            FluxKind::SignedPower(l) => v.signum() * pow_abs(v, *l),
            FluxKind::AbsPower(l) => pow_abs(v, *l),
            FluxKind::Sin => v.sin(),
            FluxKind::Cos => v.cos(),
            FluxKind::Constant => 1.0,
            FluxKind::Table(t) => t.eval(v),
        };
        // signum(0) is 1 in Rust; keep odd extensions exactly zero at the origin.
        let base = if v == 0.0 && matches!(self.kind, FluxKind::SignedPower(_)) { 0.0 } else { base };
        self.scale * base
    }

    /// Velocity derivative. Power kinks at `v = 0` and tabulated functions fall back to
    /// difference quotients with step `h_v`.
    pub fn derivative(&self, v: f64, h_v: f64) -> Derivative {
        let smooth = |value: f64| Derivative { value: self.scale * value, one_sided: false };
        match &self.kind {
            FluxKind::Power(l) => {
                let l = *l as i32;
                smooth(l as f64 * if l == 1 { 1.0 } else { v.powi(l - 1) })
            }
            FluxKind::SignedPower(l) => {
                if v != 0.0 || *l > 1.0 {
                    smooth(l * v.abs().powf(l - 1.0))
                } else if *l == 1.0 {
                    smooth(1.0)
                } else {
                    Derivative { value: (self.eval(h_v) - self.eval(0.0)) / h_v, one_sided: true }
                }
            }
            FluxKind::AbsPower(l) => {
                if v != 0.0 {
                    smooth(l * v.signum() * v.abs().powf(l - 1.0))
                } else if *l > 1.0 {
                    smooth(0.0)
                } else {
                    Derivative { value: (self.eval(h_v) - self.eval(0.0)) / h_v, one_sided: true }
                }
            }
            FluxKind::Sin => smooth(v.cos()),
            FluxKind::Cos => smooth(-v.sin()),
            FluxKind::Constant => smooth(0.0),
            FluxKind::Table(_) => Derivative {
                value: (self.eval(v + h_v) - self.eval(v - h_v)) / (2.0 * h_v),
                one_sided: false,
            },
        }
    }

    /// Points where the function is not differentiable.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.kind {
            FluxKind::SignedPower(l) if *l < 1.0 => vec![0.0],
            FluxKind::AbsPower(l) if *l <= 1.0 => vec![0.0],
            _ => Vec::new(),
        }
    }

    /// `int_0^v f(s) ds`.
    pub fn antiderivative(&self, v: f64) -> f64 {
        let base = match &self.kind {
            FluxKind::Power(l) => v.powi(*l as i32 + 1) / (l + 1.0),
            FluxKind::SignedPower(l) => pow_abs(v, l + 1.0) / (l + 1.0),
            FluxKind::AbsPower(l) => v.signum() * pow_abs(v, l + 1.0) / (l + 1.0),
            FluxKind::Sin => 1.0 - v.cos(),
            FluxKind::Cos => v.sin(),
            FluxKind::Constant => v,
            FluxKind::Table(t) => t.integral(0.0, v),
        };
        self.scale * if v == 0.0 { 0.0 } else { base }
    }

    /// Zeros of the function strictly inside `(lo, hi)`.
    pub fn zeros_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.is_zero() || hi <= lo {
            return Vec::new();
        }
        let inside = |z: f64| z > lo && z < hi;
        match &self.kind {
            FluxKind::Power(_) | FluxKind::SignedPower(_) | FluxKind::AbsPower(_) => {
                if inside(0.0) {
                    vec![0.0]
                } else {
                    Vec::new()
                }
            }
            FluxKind::Sin | FluxKind::Cos => {
                let shift = if matches!(self.kind, FluxKind::Cos) { std::f64::consts::FRAC_PI_2 } else { 0.0 };
                let pi = std::f64::consts::PI;
                let k0 = ((lo - shift) / pi).ceil() as i64;
                let k1 = ((hi - shift) / pi).floor() as i64;
                (k0..=k1).map(|k| shift + k as f64 * pi).filter(|&z| inside(z)).collect()
            }
            FluxKind::Constant => Vec::new(),
            FluxKind::Table(t) => t.zeros_in(lo, hi),
        }
    }

    /// Points where `|f|` may attain an interior extremum on `[lo, hi]` (zeros of `f'`).
    pub fn critical_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let inside = |z: f64| z > lo && z < hi;
        match &self.kind {
            FluxKind::Power(l) if *l > 1.0 => vec![0.0].into_iter().filter(|&z| inside(z)).collect(),
            FluxKind::SignedPower(_) | FluxKind::AbsPower(_) => {
                vec![0.0].into_iter().filter(|&z| inside(z)).collect()
            }
            FluxKind::Sin => Self::cos().zeros_in(lo, hi),
            FluxKind::Cos => Self::sin().zeros_in(lo, hi),
            FluxKind::Table(t) => t.nodes().iter().map(|n| n.0).filter(|&z| inside(z)).collect(),
            _ => Vec::new(),
        }
    }

    /// Maximum of `|f|` over `[lo, hi]`.
    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let mut pts = vec![lo, hi];
        pts.extend(self.critical_points(lo, hi));
        pts.iter().map(|&v| self.eval(v).abs()).fold(0.0, f64::max)
    }

    /// Minimum and maximum of `f` over `[lo, hi]`.
    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut pts = vec![lo, hi];
        pts.extend(self.critical_points(lo, hi));
        pts.iter().map(|&v| self.eval(v)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
            (a.min(y), b.max(y))
        })
    }
}

/// A point on the frequency sphere of radius `magnitude` in `(tau, xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyPoint {
    pub tau: f64,
    pub xi: Vec<f64>,
    pub magnitude: f64,
}

impl FrequencyPoint {
    pub fn new(tau: f64, xi: Vec<f64>) -> Result<Self> {
        if !tau.is_finite() || xi.iter().any(|x| !x.is_finite()) {
            return input("frequency point has non-finite components");
        }
        let magnitude = (tau * tau + xi.iter().map(|x| x * x).sum::<f64>()).sqrt();
        if magnitude <= 0.0 {
            return input("frequency point must be nonzero");
        }
        Ok(Self { tau, xi, magnitude })
    }

    /// Validates a point carrying an explicit magnitude.
    pub fn with_magnitude(tau: f64, xi: Vec<f64>, magnitude: f64) -> Result<Self> {
        let p = Self::new(tau, xi)?;
        if ((p.magnitude - magnitude) / magnitude).abs() > 1e-12 {
            return input(format!(
                "stored magnitude {magnitude} does not match (tau^2+|xi|^2)^(1/2) = {}",
                p.magnitude
            ));
        }
        Ok(p)
    }

    /// Spatial frequency with no time component.
    pub fn spatial(xi: Vec<f64>) -> Result<Self> {
        Self::new(0.0, xi)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            tau: self.tau * factor,
            xi: self.xi.iter().map(|x| x * factor).collect(),
            magnitude: self.magnitude * factor.abs(),
        }
    }
}

/// `|v|^e`, with integer exponents on the fast path.
#[inline]
fn pow_abs(v: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() < 64.0 {
        v.abs().powi(e as i32)
    } else {
        v.abs().powf(e)
    }
}

/// Fluxes `a(v)`, `b(v)` (and an optional source `S(v)`) defining a symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSpec {
    dim: usize,
    convection: Vec<VelocityFunction>,
    diffusion: Vec<Vec<VelocityFunction>>,
    source: Option<VelocityFunction>,
    includes_time: bool,
    interval: (f64, f64),
    declared_degrees: Option<(f64, f64)>,
}

impl SymbolSpec {
    pub fn new(
        convection: Vec<VelocityFunction>,
        diffusion: Vec<Vec<VelocityFunction>>,
        includes_time: bool,
        interval: (f64, f64),
    ) -> Result<Self> {
        let dim = convection.len();
        if !(1..=2).contains(&dim) {
            return input(format!("spatial dimension must be 1 or 2, got {dim}"));
        }
        if diffusion.len() != dim || diffusion.iter().any(|row| row.len() != dim) {
            return input("diffusion matrix must be d x d");
        }
        let (lo, hi) = interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return input(format!("velocity interval [{lo}, {hi}] must be nonempty and bounded"));
        }
        let spec = Self {
            dim,
            convection,
            diffusion,
            source: None,
            includes_time,
            interval,
            declared_degrees: None,
        };
        spec.check_diffusion()?;
        Ok(spec)
    }

    pub fn with_source(mut self, source: VelocityFunction) -> Self {
        self.source = Some(source);
        self
    }

    pub fn with_declared_degrees(mut self, convection: f64, diffusion: f64) -> Self {
        self.declared_degrees = Some((convection, diffusion));
        self
    }

    fn check_diffusion(&self) -> Result<()> {
        let (lo, hi) = self.interval;
        for s in 0..=256 {
            let v = lo + (hi - lo) * s as f64 / 256.0;
            for j in 0..self.dim {
                for k in 0..j {
                    let (x, y) = (self.diffusion[j][k].eval(v), self.diffusion[k][j].eval(v));
                    if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                        return input(format!("diffusion matrix is not symmetric at v = {v}"));
                    }
                }
            }
            let lam = self.smallest_eigenvalue_unchecked(v);
            if lam < -PSD_TOLERANCE {
                return input(format!(
                    "diffusion matrix is not positive semidefinite at v = {v} (eigenvalue {lam})"
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn convection(&self) -> &[VelocityFunction] {
        &self.convection
    }
    pub fn diffusion(&self) -> &[Vec<VelocityFunction>] {
        &self.diffusion
    }
    pub fn source(&self) -> Option<&VelocityFunction> {
        self.source.as_ref()
    }
    pub fn includes_time(&self) -> bool {
        self.includes_time
    }
    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }
    pub fn interval_length(&self) -> f64 {
        self.interval.1 - self.interval.0
    }
    pub fn declared_degrees(&self) -> Option<(f64, f64)> {
        self.declared_degrees
    }

    pub fn has_convection(&self) -> bool {
        self.convection.iter().any(|a| !a.is_zero())
    }

    pub fn has_diffusion(&self) -> bool {
        self.diffusion.iter().flatten().any(|b| !b.is_zero())
    }

    /// Dimension of the frequency sphere: `d`, plus one with a time term.
    pub fn frequency_dim(&self) -> usize {
        self.dim + usize::from(self.includes_time)
    }

    fn check_velocity(&self, v: f64) -> Result<()> {
        if !v.is_finite() {
            return input("velocity must be finite");
        }
        let (lo, hi) = self.interval;
        if v < lo || v > hi {
            return Err(Error::Domain { v, min: lo, max: hi });
        }
        Ok(())
    }

    fn check_frequency(&self, fp: &FrequencyPoint) -> Result<()> {
        if fp.xi.len() != self.dim {
            return input(format!("frequency has {} components, symbol is {}-dimensional", fp.xi.len(), self.dim));
        }
        Ok(())
    }

    fn quadratic_form(&self, xi: &[f64], f: impl Fn(&VelocityFunction) -> f64) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.dim {
            for k in 0..self.dim {
                acc += f(&self.diffusion[j][k]) * xi[j] * xi[k];
            }
        }
        acc
    }

    fn transport(&self, fp: &FrequencyPoint, v: f64) -> f64 {
        let tau = if self.includes_time { fp.tau } else { 0.0 };
        tau + self.convection.iter().zip(&fp.xi).map(|(a, x)| a.eval(v) * x).sum::<f64>()
    }

    /// `b(v)` as a row-major `d x d` array (entries beyond `d` are zero).
    pub fn diffusion_matrix(&self, v: f64) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for j in 0..self.dim {
            for k in 0..self.dim {
                m[j][k] = self.diffusion[j][k].eval(v);
            }
        }
        m
    }

    fn smallest_eigenvalue_unchecked(&self, v: f64) -> f64 {
        let m = self.diffusion_matrix(v);
        match self.dim {
            1 => m[0][0],
            _ => sym2_eigenvalues(m).0,
        }
    }

    /// Largest eigenvalue of `b(v)`.
    pub fn largest_eigenvalue(&self, v: f64) -> f64 {
        let m = self.diffusion_matrix(v);
        match self.dim {
            1 => m[0][0],
            _ => sym2_eigenvalues(m).1,
        }
    }
}

/// Eigenvalues (min, max) of a symmetric 2x2 matrix.
pub(crate) fn sym2_eigenvalues(m: [[f64; 2]; 2]) -> (f64, f64) {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let off = 0.5 * (m[0][1] + m[1][0]);
    let r = half_diff.hypot(off);
    (mean - r, mean + r)
}

/// `L(i(tau, xi), v) = i(tau + a(v).xi) + <b(v) xi, xi>`; the time term is present only
/// when the symbol declares it.
pub fn eval_symbol(spec: &SymbolSpec, fp: &FrequencyPoint, v: f64) -> Result<Complex64> {
    spec.check_velocity(v)?;
    spec.check_frequency(fp)?;
    Ok(Complex64::new(spec.quadratic_form(&fp.xi, |b| b.eval(v)), spec.transport(fp, v)))
}

/// Velocity derivative of the symbol together with a one-sidedness flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolDerivative {
    pub value: Complex64,
    pub one_sided: bool,
}

/// `L_v = i a'(v).xi + <b'(v) xi, xi>`.
pub fn eval_symbol_v(spec: &SymbolSpec, fp: &FrequencyPoint, v: f64, h_v: f64) -> Result<SymbolDerivative> {
    spec.check_velocity(v)?;
    spec.check_frequency(fp)?;
    if !(h_v > 0.0) {
        return input("derivative step h_v must be positive");
    }
    let (lo, hi) = spec.interval;
    let at_endpoint = v == lo || v == hi;
    let mut one_sided = at_endpoint;
    let mut deriv = |f: &VelocityFunction| {
        let d = if at_endpoint && matches!(f.kind, FluxKind::Table(_)) {
            let (a, b) = if v == lo { (v, v + h_v) } else { (v - h_v, v) };
            Derivative { value: (f.eval(b) - f.eval(a)) / h_v, one_sided: true }
        } else {
            f.derivative(v, h_v)
        };
        one_sided |= d.one_sided;
        d.value
    };
    let im: f64 = spec.convection.iter().zip(&fp.xi).map(|(a, x)| deriv(a) * x).sum();
    let mut re = 0.0;
    for j in 0..spec.dim {
        for k in 0..spec.dim {
            re += deriv(&spec.diffusion[j][k]) * fp.xi[j] * fp.xi[k];
        }
    }
    Ok(SymbolDerivative { value: Complex64::new(re, im), one_sided })
}

/// Smallest eigenvalue `lambda_d(b(v))`.
pub fn smallest_eigenvalue(spec: &SymbolSpec, v: f64) -> Result<f64> {
    spec.check_velocity(v)?;
    Ok(spec.smallest_eigenvalue_unchecked(v))
}

/// Built-in symbols for the worked example families.
pub mod library {
    use super::*;

    fn zeros(d: usize) -> Vec<Vec<VelocityFunction>> {
        vec![vec![VelocityFunction::zero(); d]; d]
    }

    /// `a(v) = v^l` on `I`, with the time term.
    pub fn burgers(ell: f64, interval: (f64, f64)) -> Result<SymbolSpec> {
        Ok(SymbolSpec::new(vec![VelocityFunction::burgers(ell)?], zeros(1), true, interval)?
            .with_declared_degrees(1.0, 2.0))
    }

    /// `b(v) = |v|^n` on `I`, with the time term.
    pub fn porous(n: f64, interval: (f64, f64)) -> Result<SymbolSpec> {
        Ok(SymbolSpec::new(
            vec![VelocityFunction::zero()],
            vec![vec![VelocityFunction::abs_power(n)?]],
            true,
            interval,
        )?
        .with_declared_degrees(1.0, 2.0))
    }

    /// `a(v) = v^l`, `b(v) = |v|^n`.
    pub fn convection_diffusion(ell: f64, n: f64, interval: (f64, f64)) -> Result<SymbolSpec> {
        Ok(SymbolSpec::new(
            vec![VelocityFunction::burgers(ell)?],
            vec![vec![VelocityFunction::abs_power(n)?]],
            true,
            interval,
        )?
        .with_declared_degrees(1.0, 2.0))
    }

    /// `a(v) = (v^l, v^m)`.
    pub fn twod_flux(ell: f64, m: f64, interval: (f64, f64)) -> Result<SymbolSpec> {
        Ok(SymbolSpec::new(
            vec![VelocityFunction::burgers(ell)?, VelocityFunction::burgers(m)?],
            zeros(2),
            true,
            interval,
        )?
        .with_declared_degrees(1.0, 2.0))
    }

    /// Fluxes `A = (sin rho, rho^3/3)`, i.e. `a(v) = (cos v, v^2)`.
    pub fn sine_cubic(interval: (f64, f64)) -> Result<SymbolSpec> {
        Ok(SymbolSpec::new(
            vec![VelocityFunction::cos(), VelocityFunction::power(2.0)?],
            zeros(2),
            true,
            interval,
        )?
        .with_declared_degrees(1.0, 2.0))
    }

    /// Convection `v^l (1, 1)` with rank-one diffusion `|v|^n [[1,-1],[-1,1]]`.
    pub fn fully_degenerate(ell: f64, n: f64, interval: (f64, f64)) -> Result<SymbolSpec> {
        let b = VelocityFunction::abs_power(n)?;
        let off = b.clone().scaled(-1.0);
        Ok(SymbolSpec::new(
            vec![VelocityFunction::burgers(ell)?, VelocityFunction::burgers(ell)?],
            vec![vec![b.clone(), off.clone()], vec![off, b]],
            true,
            interval,
        )?
        .with_declared_degrees(1.0, 2.0))
    }

    /// Rank-one diffusion `|v|^n [[1, s],[s, 1]]` with `s = +-1` (equal diagonal entries).
    pub fn rank_one_diffusion(n: f64, sign: f64, interval: (f64, f64)) -> Result<SymbolSpec> {
        let b = VelocityFunction::abs_power(n)?;
        let off = b.clone().scaled(sign.signum());
        Ok(SymbolSpec::new(
            vec![VelocityFunction::zero(), VelocityFunction::zero()],
            vec![vec![b.clone(), off.clone()], vec![off, b]],
            true,
            interval,
        )?
        .with_declared_degrees(1.0, 2.0))
    }

    /// Isotropic diffusion `B'(v) Id` in two dimensions.
    pub fn isotropic_diffusion(b: VelocityFunction, interval: (f64, f64)) -> Result<SymbolSpec> {
        let z = VelocityFunction::zero();
        SymbolSpec::new(
            vec![z.clone(), z.clone()],
            vec![vec![b.clone(), z.clone()], vec![z, b]],
            true,
            interval,
        )
    }

    /// Elliptic symbol `<b(v) xi, xi>` with `b = |v|^n` (no time term) and source `S`.
    pub fn elliptic(n: f64, source: VelocityFunction, interval: (f64, f64)) -> Result<SymbolSpec> {
        Ok(SymbolSpec::new(
            vec![VelocityFunction::zero()],
            vec![vec![VelocityFunction::abs_power(n)?]],
            false,
            interval,
        )?
        .with_source(source)
        .with_declared_degrees(0.0, 2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::library::*;
    use super::*;
    use approx_eq::*;

    mod approx_eq {
        pub fn close(a: f64, b: f64, tol: f64) -> bool {
            (a - b).abs() <= tol * (1.0 + b.abs())
        }
    }

    fn fp(tau: f64, xi: &[f64]) -> FrequencyPoint {
        FrequencyPoint::new(tau, xi.to_vec()).unwrap()
    }

    #[test]
    fn burgers_symbol_is_pure_transport() {
        let spec = burgers(1.0, (-1.0, 1.0)).unwrap();
        let l = eval_symbol(&spec, &fp(0.0, &[1.0]), 0.5).unwrap();
        assert_eq!(l, Complex64::new(0.0, 0.5));
    }

    #[test]
    fn porous_symbol_is_quadratic() {
        let spec = porous(2.0, (-1.0, 1.0)).unwrap();
        let l = eval_symbol(&spec, &fp(0.0, &[1.0]), 0.5).unwrap();
        assert!(close(l.re, 0.25, 1e-15) && l.im == 0.0);
    }

    #[test]
    fn fully_degenerate_diffusion_vanishes_on_diagonal() {
        let spec = fully_degenerate(1.0, 2.0, (-1.0, 1.0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let l = eval_symbol(&spec, &fp(0.0, &[s, s]), 0.3).unwrap();
        assert!(l.re.abs() < 1e-15);
        assert!(close(l.im, 0.3 * 2f64.sqrt(), 1e-14));
    }

    #[test]
    fn symbol_rejects_velocity_outside_interval() {
        let spec = burgers(1.0, (-1.0, 1.0)).unwrap();
        assert!(matches!(eval_symbol(&spec, &fp(0.0, &[1.0]), 1.5), Err(Error::Domain { .. })));
        assert!(matches!(eval_symbol(&spec, &fp(0.0, &[1.0]), f64::NAN), Err(Error::Input(_))));
    }

    #[test]
    fn symbol_velocity_derivatives() {
        let b2 = burgers(2.0, (-1.0, 1.0)).unwrap();
        let d = eval_symbol_v(&b2, &fp(0.0, &[1.0]), 0.5, DEFAULT_H_V).unwrap();
        assert!(close(d.value.im, 1.0, 1e-15) && !d.one_sided);

        let p3 = porous(3.0, (-1.0, 1.0)).unwrap();
        let d = eval_symbol_v(&p3, &fp(0.0, &[1.0]), -0.5, DEFAULT_H_V).unwrap();
        // d/dv |v|^3 = 3 v |v|
        assert!(close(d.value.re, -0.75, 1e-15));

        let c = SymbolSpec::new(
            vec![VelocityFunction::constant(2.0)],
            vec![vec![VelocityFunction::zero()]],
            true,
            (-1.0, 1.0),
        )
        .unwrap();
        for v in [-0.9, 0.0, 0.4] {
            assert_eq!(eval_symbol_v(&c, &fp(0.3, &[0.7]), v, DEFAULT_H_V).unwrap().value, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn kink_derivative_is_flagged() {
        let spec = SymbolSpec::new(
            vec![VelocityFunction::zero()],
            vec![vec![VelocityFunction::abs_power(0.5).unwrap()]],
            false,
            (-1.0, 1.0),
        )
        .unwrap();
        let d = eval_symbol_v(&spec, &fp(0.0, &[1.0]), 0.0, 1e-4).unwrap();
        assert!(d.one_sided);
        assert!(close(d.value.re, 100.0, 1e-12));
    }

    #[test]
    fn eigenvalues() {
        let p = porous(2.0, (-1.0, 1.0)).unwrap();
        assert!(close(smallest_eigenvalue(&p, 0.3).unwrap(), 0.09, 1e-15));
        let r = rank_one_diffusion(2.0, -1.0, (-1.0, 1.0)).unwrap();
        for v in [-0.7, 0.0, 0.5] {
            assert!(smallest_eigenvalue(&r, v).unwrap().abs() < 1e-15);
        }
        let iso = isotropic_diffusion(VelocityFunction::power(2.0).unwrap(), (-1.0, 1.0)).unwrap();
        assert!(close(smallest_eigenvalue(&iso, 0.5).unwrap(), 0.25, 1e-15));
    }

    #[test]
    fn rejects_asymmetric_or_indefinite_diffusion() {
        let z = VelocityFunction::zero;
        let asym = SymbolSpec::new(
            vec![z(), z()],
            vec![vec![VelocityFunction::constant(1.0), VelocityFunction::constant(0.5)], vec![z(), VelocityFunction::constant(1.0)]],
            false,
            (0.0, 1.0),
        );
        assert!(asym.is_err());
        let indef = SymbolSpec::new(vec![z()], vec![vec![VelocityFunction::signed_power(1.0).unwrap()]], false, (-1.0, 1.0));
        assert!(indef.is_err());
        assert!(SymbolSpec::new(vec![z()], vec![vec![z()]], false, (1.0, 1.0)).is_err());
    }

    #[test]
    fn power_requires_integer_exponent() {
        assert!(VelocityFunction::power(1.5).is_err());
        assert!(VelocityFunction::power(3.0).is_ok());
        assert_eq!(VelocityFunction::signed_power(1.5).unwrap().eval(-4.0), -8.0);
    }

    #[test]
    fn table_interpolates_and_integrates() {
        let t = VelocityFunction::table(vec![(-1.0, 1.0), (0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert!(close(t.eval(0.5), 1.0, 1e-15));
        assert!(close(t.antiderivative(1.0), 1.0, 1e-15));
        assert!(close(t.antiderivative(-1.0), -0.5, 1e-15));
        assert!(VelocityFunction::table(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert_eq!(t.zeros_in(-2.0, 2.0), vec![0.0]);
        assert_eq!(t.zeros_in(0.5, 2.0), Vec::<f64>::new());
        let s = VelocityFunction::table(vec![(-1.0, -1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(s.zeros_in(-2.0, 2.0), vec![0.0]);
    }

    #[test]
    fn antiderivatives_match_quadrature() {
        let fns = [
            VelocityFunction::power(3.0).unwrap(),
            VelocityFunction::signed_power(1.5).unwrap(),
            VelocityFunction::abs_power(2.5).unwrap(),
            VelocityFunction::sin(),
            VelocityFunction::cos().scaled(-2.0),
            VelocityFunction::constant(0.7),
        ];
        for f in &fns {
            for &v in &[-0.8, 0.3, 1.1] {
                let n = 20_000;
                let h = v / n as f64;
                let quad: f64 = (0..n).map(|i| f.eval((i as f64 + 0.5) * h) * h).sum();
                assert!(close(f.antiderivative(v), quad, 1e-7), "{f:?} at {v}");
            }
        }
    }

    #[test]
    fn frequency_point_magnitude_invariant() {
        assert!(FrequencyPoint::with_magnitude(0.6, vec![0.8], 1.0).is_ok());
        assert!(FrequencyPoint::with_magnitude(0.6, vec![0.8], 1.1).is_err());
        assert!(FrequencyPoint::new(0.0, vec![0.0]).is_err());
    }

    #[test]
    fn trig_zeros() {
        let z = VelocityFunction::cos().zeros_in(-2.0, 5.0);
        assert_eq!(z.len(), 3);
        assert!(close(z[0], -std::f64::consts::FRAC_PI_2, 1e-15));
    }
}
