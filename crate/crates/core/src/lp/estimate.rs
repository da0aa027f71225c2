use std::fmt;

use super::decompose::{block_norms, lp_decompose};
use super::{lp_norm, ScalarField};
use crate::error::{input, Error, Result};
use crate::regression::trimmed_ols;

/// Cap on reported exponents: L^1 block decay and first differences saturate at BV.
pub const S_CAP: f64 = 1.02;
const MIN_BANDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    LittlewoodPaley,
    Increments,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lp" | "littlewood-paley" => Ok(Self::LittlewoodPaley),
            "increments" | "inc" => Ok(Self::Increments),
            other => input(format!("unknown estimation method {other}")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LittlewoodPaley => "littlewood-paley",
            Self::Increments => "increments",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateFlag {
    /// Raw exponent at or above 0.95: the estimator cannot separate BV from smoother.
    BvOrBetter,
    /// Decay faster than any exponent the bands can show.
    Smooth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BesovEstimate {
    /// `(j, norm)`: LP block norms, or increment norms at `h = 2^-j L`.
    pub block_norms: Vec<(usize, f64)>,
    pub s_star: f64,
    /// Negated slope before capping (infinite when every resolved band vanishes).
    pub s_raw: f64,
    pub slope_stderr: f64,
    pub band_window: (usize, usize),
    pub method: Method,
    pub p: f64,
    pub flags: Vec<EstimateFlag>,
}

impl BesovEstimate {
    pub fn has_flag(&self, flag: EstimateFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn band_csv(&self) -> String {
        let mut s = String::from("j,norm,in_window\n");
        for (j, n) in &self.block_norms {
            let inside = *j >= self.band_window.0 && *j <= self.band_window.1;
            s.push_str(&format!("{j},{n},{}\n", u8::from(inside)));
        }
        s
    }

    pub fn summary(&self) -> String {
        let flags: Vec<&str> = self
            .flags
            .iter()
            .map(|f| match f {
                EstimateFlag::BvOrBetter => "bv-or-better",
                EstimateFlag::Smooth => "smooth",
            })
            .collect();
        format!(
            "method = {}\np = {}\ns_star = {}\ns_raw = {}\nslope_stderr = {}\nband_window = {} .. {}\nflags = {}\n",
            self.method,
            self.p,
            self.s_star,
            self.s_raw,
            self.slope_stderr,
            self.band_window.0,
            self.band_window.1,
            flags.join(",")
        )
    }
}

/// Octave of the highest wavenumber resolved along every axis.
fn resolved_octave(shape: &[usize]) -> usize {
    let n = shape.iter().copied().min().unwrap_or(2);
    (n / 2).trailing_zeros() as usize
}

fn windowed_norm(values: &[f64], window: Option<&ScalarField>, p: f64, cell: f64) -> f64 {
    match window {
        Some(w) => {
            let v: Vec<f64> = values.iter().zip(w.values()).map(|(x, w)| x * w).collect();
            lp_norm(&v, p, cell)
        }
        None => lp_norm(values, p, cell),
    }
}

/// Regularity exponent from the decay of block norms (or increments) over the resolved bands.
pub fn estimate_regularity(field: &ScalarField, p: f64, window: Option<&ScalarField>, method: Method) -> Result<BesovEstimate> {
    field.check_analysis_size()?;
    if !(p >= 1.0) {
        return input("p must be at least 1");
    }
    if let Some(w) = window {
        if w.shape() != field.shape() {
            return input("window grid differs from the field grid");
        }
    }
    let j_res = resolved_octave(field.shape());
    let (lo, hi) = (1usize, j_res.saturating_sub(2));
    let total = windowed_norm(field.values(), window, p, field.cell_volume());
    let floor = 1e3 * f64::EPSILON * total;

    let norms: Vec<(usize, f64)> = match method {
        Method::LittlewoodPaley => {
            let d = lp_decompose(field, super::decompose::nyquist_octave(field.shape()))?;
            block_norms(&d.blocks, p, window)?
        }
        Method::Increments => (lo..=hi)
            .map(|j| {
                let mut sum = 0.0;
                for axis in 0..field.dim() {
                    let mut shift = vec![0isize; field.dim()];
                    shift[axis] = (field.shape()[axis] >> j) as isize;
                    let g = field.shifted(&shift);
                    let diff: Vec<f64> = g.values().iter().zip(field.values()).map(|(a, b)| a - b).collect();
                    sum += windowed_norm(&diff, window, p, field.cell_volume());
                }
                (j, sum)
            })
            .collect(),
    };

    let candidates: Vec<(usize, f64)> = norms.iter().copied().filter(|(j, _)| *j >= lo && *j <= hi).collect();
    let usable: Vec<(usize, f64)> = candidates.iter().copied().filter(|(_, n)| *n > floor).collect();
    let window_of = |u: &[(usize, f64)]| (u.first().map_or(lo, |x| x.0), u.last().map_or(hi, |x| x.0));

    if usable.len() < MIN_BANDS {
        // all energy below the fit window also counts as decayed
        let first = usable.first().map_or(0, |u| u.0);
        let decayed = total > 0.0 && candidates.iter().any(|&(j, n)| n <= floor && j > first);
        if decayed {
            return Ok(BesovEstimate {
                block_norms: norms,
                s_star: S_CAP,
                s_raw: f64::INFINITY,
                slope_stderr: 0.0,
                band_window: window_of(&usable),
                method,
                p,
                flags: vec![EstimateFlag::BvOrBetter, EstimateFlag::Smooth],
            });
        }
        return Err(Error::InsufficientResolution { usable: usable.len(), needed: MIN_BANDS });
    }

    let rows: Vec<Vec<f64>> = usable.iter().map(|(j, _)| vec![*j as f64]).collect();
    let y: Vec<f64> = usable.iter().map(|(_, n)| n.log2()).collect();
    let fit = trimmed_ols(&rows, &y, 0.1)?;
    let s_raw = -fit.slope(0);
    let mut flags = Vec::new();
    if s_raw >= 0.95 {
        flags.push(EstimateFlag::BvOrBetter);
    }
    if s_raw > 2.0 {
        flags.push(EstimateFlag::Smooth);
    }
    Ok(BesovEstimate {
        block_norms: norms,
        s_star: s_raw.min(S_CAP),
        s_raw,
        slope_stderr: fit.slope_stderr(0),
        band_window: window_of(&usable),
        method,
        p,
        flags,
    })
}
