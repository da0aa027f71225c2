use super::{fft, ifft_real, lp_norm, wavevector, ScalarField};
use crate::error::{input, Result};

/// Raised-cosine step: 1 for `t <= 0`, 0 for `t >= 1`, `cos^2(pi t / 2)` between.
fn chi(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let c = (std::f64::consts::FRAC_PI_2 * t).cos();
        c * c
    }
}

/// Multiplier of block `j` at radius `r` (box wavenumber units) for blocks `0..=j_max`,
/// the last block taking the whole remainder. The weights sum to one.
pub fn partition_weight(j: usize, j_max: usize, r: f64) -> f64 {
    let low = |s: f64| if r == 0.0 { 1.0 } else { chi(r.log2() - s) };
    match j {
        0 => low(0.0),
        _ if j == j_max => 1.0 - low(j as f64 - 1.0),
        _ => low(j as f64) - low(j as f64 - 1.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpDecomposition {
    /// Blocks `Delta_0, ..., Delta_{j_max}`.
    pub blocks: Vec<ScalarField>,
    pub j_max: usize,
    /// Set when the requested `j_max` passed the Nyquist octave and was truncated.
    pub warning: Option<String>,
}

/// Highest octave holding grid wavenumbers.
pub(crate) fn nyquist_octave(shape: &[usize]) -> usize {
    let r2: f64 = shape.iter().map(|&n| ((n / 2) as f64).powi(2)).sum();
    r2.sqrt().log2().ceil() as usize
}

pub fn lp_decompose(field: &ScalarField, j_max: usize) -> Result<LpDecomposition> {
    let top = nyquist_octave(field.shape());
    let (j_max, warning) = if j_max > top {
        (top, Some(format!("j_max {j_max} exceeds the Nyquist octave; truncated to {top}")))
    } else {
        (j_max, None)
    };
    if j_max == 0 {
        return input("j_max must be at least 1");
    }
    let hat = fft(field.values(), field.shape());
    let radius: Vec<f64> = (0..hat.len())
        .map(|idx| {
            let k = wavevector(field.shape(), idx);
            ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt()
        })
        .collect();
    let blocks = (0..=j_max)
        .map(|j| {
            let filtered = hat.iter().zip(&radius).map(|(c, &r)| c * partition_weight(j, j_max, r)).collect();
            let mut b = field.with_values(ifft_real(filtered, field.shape()));
            b.label = format!("{}[{j}]", field.label);
            b
        })
        .collect();
    Ok(LpDecomposition { blocks, j_max, warning })
}

/// `(j, ||w Delta_j||_p)` with the cell quadrature weight.
pub fn block_norms(blocks: &[ScalarField], p: f64, window: Option<&ScalarField>) -> Result<Vec<(usize, f64)>> {
    if let Some(w) = window {
        if w.values().iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return input("window values must lie in [0, 1]");
        }
    }
    blocks
        .iter()
        .enumerate()
        .map(|(j, b)| {
            if let Some(w) = window {
                if w.shape() != b.shape() {
                    return input("window grid differs from the field grid");
                }
                let v: Vec<f64> = b.values().iter().zip(w.values()).map(|(x, w)| x * w).collect();
                Ok((j, lp_norm(&v, p, b.cell_volume())))
            } else {
                Ok((j, b.lp_norm(p)))
            }
        })
        .collect()
}

/// C-infinity step from 0 (`t <= 0`) to 1 (`t >= 1`).
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Smooth cutoff equal to 1 on the central half of the box and 0 within `L/8` of its edges.
pub fn plateau_window(shape: &[usize], length: f64) -> ScalarField {
    let profile = |x: f64| {
        let t = x / length;
        smooth_step((t - 0.125) / 0.125) * smooth_step((0.875 - t) / 0.125)
    };
    ScalarField::from_fn(shape.to_vec(), length, "window", |x| x.iter().map(|&c| profile(c)).product())
        .expect("window grid is valid")
}
