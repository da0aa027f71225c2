//! Gridded fields on periodic boxes, Littlewood-Paley blocks, regularity estimators and
//! truncated symbol multipliers.

mod decompose;
mod estimate;
mod multiplier;

pub use decompose::{block_norms, lp_decompose, partition_weight, plateau_window, smooth_step, LpDecomposition};
pub use estimate::{estimate_regularity, BesovEstimate, EstimateFlag, Method, S_CAP};
pub use multiplier::{
    bump_value, multiplier_battery, truncation_apply, truncation_kernel_norms, verify_averaged_multiplier, Bump,
    MultiplierRow,
};

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{input, Error, Result};

/// Smallest grid size accepted by analysis operations.
pub const MIN_ANALYSIS_SIZE: usize = 64;

/// Real field on the periodic box `[0, L)^d`, values row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    shape: Vec<usize>,
    length: f64,
    values: Vec<f64>,
    pub label: String,
}

impl ScalarField {
    pub fn new(shape: Vec<usize>, length: f64, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if shape.is_empty() || shape.len() > 2 {
            return input("fields are one- or two-dimensional");
        }
        if shape.iter().any(|&n| n < 2 || !n.is_power_of_two()) {
            return input(format!("grid sizes must be powers of two, got {shape:?}"));
        }
        if !(length > 0.0 && length.is_finite()) {
            return input("box length must be positive");
        }
        if values.len() != shape.iter().product::<usize>() {
            return input("value count does not match the grid");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return input("field contains non-finite values");
        }
        Ok(Self { shape, length, values, label: label.into() })
    }

    /// Samples `f` at the grid points `x_i = i L / N`.
    pub fn from_fn(shape: Vec<usize>, length: f64, label: &str, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let total: usize = shape.iter().product();
        let values = (0..total)
            .map(|idx| {
                let x = grid_point(&shape, length, idx);
                f(&x)
            })
            .collect();
        Self::new(shape, length, values, label)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Quadrature weight `(L/N)^d` of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.shape.iter().map(|&n| self.length / n as f64).product()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self { shape: self.shape.clone(), length: self.length, values, label: self.label.clone() }
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values, p, self.cell_volume())
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Periodic shift by whole grid cells along each axis: `out(x) = self(x + s h)`.
    pub fn shifted(&self, shift: &[isize]) -> Self {
        let n = &self.shape;
        let wrap = |i: usize, s: isize, n: usize| ((i as isize + s).rem_euclid(n as isize)) as usize;
        let values = match n.len() {
            1 => (0..n[0]).map(|i| self.values[wrap(i, shift[0], n[0])]).collect(),
            _ => (0..n[0] * n[1])
                .map(|idx| {
                    let (i, j) = (idx / n[1], idx % n[1]);
                    self.values[wrap(i, shift[0], n[0]) * n[1] + wrap(j, shift[1], n[1])]
                })
                .collect(),
        };
        self.with_values(values)
    }

    pub(crate) fn check_analysis_size(&self) -> Result<()> {
        if self.shape.iter().any(|&n| n < MIN_ANALYSIS_SIZE) {
            return input(format!("analysis needs at least {MIN_ANALYSIS_SIZE} points per axis"));
        }
        Ok(())
    }

    /// Text format: `# d=`, `# n=`, `# L=`, `# label=` header lines then one value per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 24 + 64);
        let n: Vec<String> = self.shape.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "# d={}", self.dim());
        let _ = writeln!(s, "# n={}", n.join(","));
        let _ = writeln!(s, "# L={}", self.length);
        let _ = writeln!(s, "# label={}", self.label);
        for v in &self.values {
            let _ = writeln!(s, "{v}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (mut d, mut shape, mut length, mut label) = (None, None, None, String::new());
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                let Some((key, value)) = header.trim().split_once('=') else { continue };
                let value = value.trim();
                let bad = |what: &str| Error::Parse(format!("line {}: bad {what} header", lineno + 1));
                match key.trim() {
                    "d" => d = Some(value.parse::<usize>().map_err(|_| bad("d"))?),
                    "n" => {
                        let n: std::result::Result<Vec<usize>, _> = value.split(',').map(|x| x.trim().parse()).collect();
                        shape = Some(n.map_err(|_| bad("n"))?);
                    }
                    "L" => length = Some(value.parse::<f64>().map_err(|_| bad("L"))?),
                    "label" => label = value.to_string(),
                    _ => {}
                }
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Parse(format!("line {}: not a number: {line}", lineno + 1)))?;
            values.push(v);
        }
        let mut shape = shape.ok_or_else(|| Error::Parse("missing n header".into()))?;
        let length = length.ok_or_else(|| Error::Parse("missing L header".into()))?;
        if let Some(d) = d {
            if shape.len() == 1 && d == 2 {
                shape.push(shape[0]);
            }
            if shape.len() != d {
                return Err(Error::Parse(format!("d={d} disagrees with n={shape:?}")));
            }
        }
        Self::new(shape, length, values, label).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Coordinates of grid point `idx`.
pub fn grid_point(shape: &[usize], length: f64, idx: usize) -> Vec<f64> {
    match shape.len() {
        1 => vec![idx as f64 * length / shape[0] as f64],
        _ => vec![(idx / shape[1]) as f64 * length / shape[0] as f64, (idx % shape[1]) as f64 * length / shape[1] as f64],
    }
}

pub fn lp_norm(values: &[f64], p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    if p == 1.0 {
        return values.iter().map(|v| v.abs()).sum::<f64>() * cell;
    }
    if p == 2.0 {
        return (values.iter().map(|v| v * v).sum::<f64>() * cell).sqrt();
    }
    (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * cell).powf(1.0 / p)
}

/// Field on `x` in a periodic box times `M` uniform velocity nodes; values indexed `(x, v)`
/// with `v` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct XVField {
    shape: Vec<usize>,
    length: f64,
    velocities: Vec<f64>,
    values: Vec<f64>,
    pub label: String,
}

impl XVField {
    pub fn new(shape: Vec<usize>, length: f64, velocities: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        ScalarField::new(shape.clone(), length, vec![0.0; shape.iter().product()], "")?;
        if velocities.len() < 2 {
            return input("velocity grid needs at least two nodes");
        }
        let dv = velocities[1] - velocities[0];
        if !(dv > 0.0) || velocities.windows(2).any(|w| ((w[1] - w[0]) - dv).abs() > 1e-9 * dv.abs().max(1.0)) {
            return input("velocity grid must be uniform and increasing");
        }
        if values.len() != shape.iter().product::<usize>() * velocities.len() {
            return input("value count does not match the x-v grid");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return input("field contains non-finite values");
        }
        Ok(Self { shape, length, velocities, values, label: label.into() })
    }

    /// `chi_{rho(x)}(v)` sampled at the velocity nodes.
    pub fn indicator(rho: &ScalarField, velocities: Vec<f64>) -> Result<Self> {
        let values = rho.values().iter().flat_map(|&r| velocities.iter().map(move |&v| indicator(r, v))).collect();
        Self::new(rho.shape().to_vec(), rho.length(), velocities, values, format!("chi[{}]", rho.label))
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_x(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn dv(&self) -> f64 {
        self.velocities[1] - self.velocities[0]
    }

    /// The `x`-field at velocity node `m`.
    pub fn slice(&self, m: usize) -> Vec<f64> {
        let nv = self.velocities.len();
        (0..self.n_x()).map(|i| self.values[i * nv + m]).collect()
    }

    pub(crate) fn from_slices(&self, slices: &[Vec<f64>], label: String) -> Self {
        let nv = self.velocities.len();
        let mut values = vec![0.0; self.values.len()];
        for (m, s) in slices.iter().enumerate() {
            for (i, x) in s.iter().enumerate() {
                values[i * nv + m] = *x;
            }
        }
        Self { shape: self.shape.clone(), length: self.length, velocities: self.velocities.clone(), values, label }
    }

    /// `int f(x, v) phi(v) dv` by the trapezoidal rule on the velocity nodes.
    pub fn average(&self, phi: impl Fn(f64) -> f64) -> ScalarField {
        let nv = self.velocities.len();
        let w: Vec<f64> = (0..nv)
            .map(|m| {
                let end = if m == 0 || m == nv - 1 { 0.5 } else { 1.0 };
                end * self.dv() * phi(self.velocities[m])
            })
            .collect();
        let values = (0..self.n_x()).map(|i| (0..nv).map(|m| self.values[i * nv + m] * w[m]).sum()).collect();
        ScalarField { shape: self.shape.clone(), length: self.length, values, label: format!("avg[{}]", self.label) }
    }

    /// `L^p(x, v)` norm with the trapezoidal velocity weight.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let nv = self.velocities.len();
        let cell: f64 = self.shape.iter().map(|&n| self.length / n as f64).product();
        if p.is_infinite() {
            return self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        let mut total = 0.0;
        for i in 0..self.n_x() {
            for m in 0..nv {
                let end = if m == 0 || m == nv - 1 { 0.5 } else { 1.0 };
                total += end * self.values[i * nv + m].abs().powf(p);
            }
        }
        (total * cell * self.dv()).powf(1.0 / p)
    }
}

/// Lacunary series `sum_{j=j_lo}^{j_hi} 2^{-j s} cos(2 pi 2^j x)` on `[0, 1)`; its Besov
/// exponent is exactly `s`.
pub fn lacunary(n: usize, s: f64, j_lo: u32, j_hi: u32) -> Result<ScalarField> {
    ScalarField::from_fn(vec![n], 1.0, "lacunary", |x| {
        (j_lo..=j_hi).map(|j| 2f64.powf(-(j as f64) * s) * (2.0 * PI * 2f64.powi(j as i32) * x[0]).cos()).sum()
    })
}

/// `chi_r(v) = sgn(v)` for `v` between 0 and `r`, zero elsewhere.
pub fn indicator(r: f64, v: f64) -> f64 {
    if r > 0.0 && v > 0.0 && v <= r {
        1.0
    } else if r < 0.0 && v < 0.0 && v >= r {
        -1.0
    } else {
        0.0
    }
}

/// Signed integer wavenumber of FFT index `i` on an `n`-point axis.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Wavenumber vector of flattened index `idx`.
pub(crate) fn wavevector(shape: &[usize], idx: usize) -> [i64; 2] {
    match shape.len() {
        1 => [wavenumber(idx, shape[0]), 0],
        _ => [wavenumber(idx / shape[1], shape[0]), wavenumber(idx % shape[1], shape[1])],
    }
}

fn transform(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = |n: usize, planner: &mut FftPlanner<f64>| if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    match shape.len() {
        1 => plan(shape[0], &mut planner).process(data),
        _ => {
            let (n0, n1) = (shape[0], shape[1]);
            plan(n1, &mut planner).process(data);
            let mut col = vec![Complex64::new(0.0, 0.0); n0];
            let p0 = plan(n0, &mut planner);
            for j in 0..n1 {
                for i in 0..n0 {
                    col[i] = data[i * n1 + j];
                }
                p0.process(&mut col);
                for i in 0..n0 {
                    data[i * n1 + j] = col[i];
                }
            }
        }
    }
}

/// Unnormalized forward DFT.
pub fn fft(values: &[f64], shape: &[usize]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&mut data, shape, false);
    data
}

/// Inverse DFT normalized by the point count; returns the real part.
pub fn ifft_real(mut data: Vec<Complex64>, shape: &[usize]) -> Vec<f64> {
    transform(&mut data, shape, true);
    let total = data.len() as f64;
    data.iter().map(|c| c.re / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_roundtrip_2d() {
        let f = ScalarField::from_fn(vec![8, 16], 1.0, "t", |x| (x[0] * 3.0).sin() + x[1] * x[1]).unwrap();
        let back = ifft_real(fft(f.values(), f.shape()), f.shape());
        for (a, b) in back.iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let f = ScalarField::from_fn(vec![4, 4], 2.5, "rho", |x| (x[0] + 0.1).ln() * x[1]).unwrap();
        let g = ScalarField::from_text(&f.to_text()).unwrap();
        assert_eq!(f, g);
        assert!(ScalarField::from_text("# n=4\n1\n2\n3\n4\n").is_err());
        assert!(ScalarField::from_text("# n=4\n# L=1\n1\n2\nx\n4\n").is_err());
    }

    #[test]
    fn indicator_convention() {
        assert_eq!(indicator(0.5, 0.25), 1.0);
        assert_eq!(indicator(0.5, -0.25), 0.0);
        assert_eq!(indicator(-0.5, -0.25), -1.0);
        assert_eq!(indicator(0.5, 0.75), 0.0);
        let rho = ScalarField::new(vec![2], 1.0, vec![0.6, -0.6], "r").unwrap();
        let chi = XVField::indicator(&rho, (0..=200).map(|m| -1.0 + m as f64 * 0.01).collect()).unwrap();
        let back = chi.average(|_| 1.0);
        assert!((back.values()[0] - 0.6).abs() < 0.011 && (back.values()[1] + 0.6).abs() < 0.011);
    }

    #[test]
    fn shifts_wrap() {
        let f = ScalarField::new(vec![4], 1.0, vec![0.0, 1.0, 2.0, 3.0], "").unwrap();
        assert_eq!(f.shifted(&[1]).values(), &[1.0, 2.0, 3.0, 0.0]);
        assert_eq!(f.shifted(&[-1]).values(), &[3.0, 0.0, 1.0, 2.0]);
    }
}
