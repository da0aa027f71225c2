//! Named initial data on periodic boxes `[0, L)^d`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, Result};
use crate::lp::ScalarField;

/// `rho_l` for `x_1 < x0`, `rho_r` for `x_1 >= x0`.
pub fn riemann(shape: &[usize], length: f64, rho_l: f64, rho_r: f64, x0: f64) -> Result<ScalarField> {
    ScalarField::from_fn(shape.to_vec(), length, "riemann", |x| if x[0] < x0 { rho_l } else { rho_r })
}

/// `offset + amplitude sin(2 pi k x_1 / L)`.
pub fn sine(shape: &[usize], length: f64, amplitude: f64, k: u32, offset: f64) -> Result<ScalarField> {
    ScalarField::from_fn(shape.to_vec(), length, "sine", |x| offset + amplitude * (2.0 * PI * k as f64 * x[0] / length).sin())
}

/// Barenblatt profile of `rho_t = (|rho|^n rho / (n + 1))_xx`, centered at `L/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    pub n: f64,
    pub t0: f64,
    pub c: f64,
    pub center: f64,
}

impl Barenblatt {
    /// Constant chosen so the support at `t = 0` spans `L/4`.
    pub fn new(n: f64, t0: f64, length: f64) -> Result<Self> {
        if !(n > 0.0 && t0 > 0.0 && length > 0.0) {
            return input("barenblatt needs n > 0, t0 > 0 and L > 0");
        }
        let m = n + 1.0;
        let k = (m - 1.0) / (2.0 * m * (m + 1.0));
        let r0 = length / 8.0;
        let c = k * r0 * r0 * (t0 / m).powf(-2.0 / (m + 1.0));
        Ok(Self { n, t0, c, center: 0.5 * length })
    }

    /// The equation is `U_s = (U^m)_xx` in the time `s = t / m`, with `m = n + 1`.
    pub fn value(&self, t: f64, x: f64) -> f64 {
        let m = self.n + 1.0;
        let s = (self.t0 + t) / m;
        let a = 1.0 / (m + 1.0);
        let k = (m - 1.0) / (2.0 * m * (m + 1.0));
        let y = x - self.center;
        let core = (self.c - k * y * y * s.powf(-2.0 * a)).max(0.0);
        s.powf(-a) * core.powf(1.0 / (m - 1.0))
    }

    /// Half-width of the support at time `t`.
    pub fn support_radius(&self, t: f64) -> f64 {
        let m = self.n + 1.0;
        let s = (self.t0 + t) / m;
        let k = (m - 1.0) / (2.0 * m * (m + 1.0));
        (self.c / k).sqrt() * s.powf(1.0 / (m + 1.0))
    }

    /// Samples at the grid points at time `t` (1D).
    pub fn field(&self, n_cells: usize, length: f64, t: f64) -> Result<ScalarField> {
        let h = length / n_cells as f64;
        let values = (0..n_cells).map(|i| self.value(t, i as f64 * h)).collect();
        ScalarField::new(vec![n_cells], length, values, "barenblatt")
    }
}

/// `g(x_1 + x_2)` for a `L`-periodic profile `g`; with `L` the box side.
pub fn diagonal_wave(n: usize, length: f64, g: impl Fn(f64) -> f64) -> Result<ScalarField> {
    ScalarField::from_fn(vec![n, n], length, "diagonal-wave", |x| g((x[0] + x[1]).rem_euclid(length)))
}

/// Random trigonometric polynomial with wavenumbers below `2^j_cut`, amplitudes decaying
/// like `1/|k|`, scaled to sup norm 1.
pub fn random_bandlimited(shape: &[usize], length: f64, seed: u64, j_cut: u32) -> Result<ScalarField> {
    let kmax = 1i64 << j_cut;
    if shape.iter().any(|&n| (n as i64) < 2 * kmax) {
        return input("band limit exceeds the grid's Nyquist wavenumber");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<([i64; 2], f64, f64)> = if shape.len() == 1 {
        (1..kmax).map(|k| ([k, 0], rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    } else {
        let mut out = Vec::new();
        for a in 0..kmax {
            for b in (1 - kmax)..kmax {
                if (a, b) > (0, 0) && a * a + b * b < kmax * kmax {
                    out.push(([a, b], rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
        }
        out
    };
    let raw = ScalarField::from_fn(shape.to_vec(), length, "random-bandlimited", |x| {
        modes
            .iter()
            .map(|(k, c, s)| {
                let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
                let phase = 2.0 * PI * (k[0] as f64 * x[0] + if x.len() > 1 { k[1] as f64 * x[1] } else { 0.0 }) / length;
                (c * phase.cos() + s * phase.sin()) / kn
            })
            .sum()
    })?;
    let sup = raw.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if sup > 0.0 { 1.0 / sup } else { 1.0 };
    Ok(raw.with_values(raw.values().iter().map(|v| v * scale).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barenblatt_mass_is_constant() {
        let b = Barenblatt::new(2.0, 0.1, 4.0).unwrap();
        let m0 = b.field(4096, 4.0, 0.0).unwrap().integral();
        let m1 = b.field(4096, 4.0, 0.5).unwrap().integral();
        assert!((m0 - m1).abs() < 1e-3 * m0);
        assert!(b.support_radius(0.5) > b.support_radius(0.0));
    }

    #[test]
    fn bandlimited_is_normalized_and_reproducible() {
        let a = random_bandlimited(&[128], 1.0, 3, 4).unwrap();
        let b = random_bandlimited(&[128], 1.0, 3, 4).unwrap();
        assert_eq!(a, b);
        let sup = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((sup - 1.0).abs() < 1e-15);
        assert!(random_bandlimited(&[16], 1.0, 3, 4).is_err());
    }
}
