use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::decompose::smooth_step;
use super::{fft, ifft_real, lp_norm, wavevector, XVField};
use crate::degeneracy::omega_set_measure;
use crate::error::{input, Result};
use crate::symbol::{eval_symbol, FrequencyPoint, SymbolSpec};

/// Radial bump profiles on the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bump {
    /// 1 on `|z| <= 1`, 0 on `|z| >= 2`.
    Disc,
    /// `disc(z) - disc(2z)`, supported in `1/2 < |z| < 2`.
    Annulus,
}

impl Bump {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "disc" => Ok(Self::Disc),
            "annulus" => Ok(Self::Annulus),
            other => input(format!("unknown bump {other}")),
        }
    }
}

pub fn bump_value(bump: Bump, r: f64) -> f64 {
    let disc = |r: f64| smooth_step(2.0 - r);
    match bump {
        Bump::Disc => disc(r),
        Bump::Annulus => disc(r) - disc(2.0 * r),
    }
}

fn check_dims(field_dim: usize, spec: &SymbolSpec) -> Result<()> {
    if field_dim != spec.dim() {
        return input("field and symbol dimensions differ");
    }
    Ok(())
}

/// Physical frequency `2 pi k / L` of flattened index `idx`.
fn frequency(shape: &[usize], length: f64, idx: usize) -> FrequencyPoint {
    let k = wavevector(shape, idx);
    let xi: Vec<f64> = k[..shape.len()].iter().map(|&k| 2.0 * PI * k as f64 / length).collect();
    let magnitude = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    FrequencyPoint { tau: 0.0, xi, magnitude }
}

/// Multiplier `psi(L(i(0, xi), v) / delta)` on the grid's frequencies.
fn multiplier(spec: &SymbolSpec, shape: &[usize], length: f64, v: f64, delta: f64, bump: Bump) -> Result<Vec<f64>> {
    let total: usize = shape.iter().product();
    (0..total)
        .map(|idx| Ok(bump_value(bump, eval_symbol(spec, &frequency(shape, length, idx), v)?.norm() / delta)))
        .collect()
}

/// Applies `psi(L/delta)` to every velocity slice in Fourier space.
pub fn truncation_apply(field: &XVField, spec: &SymbolSpec, delta: f64, bump: Bump) -> Result<XVField> {
    check_dims(field.shape().len(), spec)?;
    if !(delta > 0.0) {
        return input("delta must be positive");
    }
    let slices: Result<Vec<Vec<f64>>> = (0..field.velocities().len())
        .into_par_iter()
        .map(|m| {
            let mult = multiplier(spec, field.shape(), field.length(), field.velocities()[m], delta, bump)?;
            let hat = fft(&field.slice(m), field.shape());
            let filtered: Vec<Complex64> = hat.iter().zip(&mult).map(|(c, w)| c * w).collect();
            Ok(ifft_real(filtered, field.shape()))
        })
        .collect();
    Ok(field.from_slices(&slices?, format!("psi[{}]", field.label)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierRow {
    pub delta: f64,
    /// Largest ratio over the battery.
    pub max_ratio: f64,
    /// `sup_xi |Omega(xi; delta)|` over the nonzero grid frequencies.
    pub sup_omega: f64,
    /// `sup |Omega| >= 0.9 |I|`: the bound carries no information.
    pub uninformative: bool,
}

/// Sup of the set measure over the nonzero grid frequencies (one of each `+-xi` pair).
fn sup_omega(spec: &SymbolSpec, shape: &[usize], length: f64, delta: f64, n_samples: usize) -> Result<f64> {
    let total: usize = shape.iter().product();
    let idx: Vec<usize> = (1..total)
        .filter(|&i| {
            let k = wavevector(shape, i);
            k[0] > 0 || (k[0] == 0 && k[1] > 0)
        })
        .collect();
    let measures: Result<Vec<f64>> =
        idx.par_iter().map(|&i| omega_set_measure(spec, &frequency(shape, length, i), delta, n_samples)).collect();
    Ok(measures?.into_iter().fold(0.0, f64::max))
}

/// Ratios `||int psi(L/delta) f phi dv||_p / (sup|Omega|^{1/p'} ||f||_p)` over a field battery;
/// one row per delta with the largest ratio.
pub fn verify_averaged_multiplier(
    fields: &[XVField],
    spec: &SymbolSpec,
    deltas: &[f64],
    p: f64,
    phi: &(dyn Fn(f64) -> f64 + Sync),
    bump: Bump,
) -> Result<Vec<MultiplierRow>> {
    if !(p > 1.0 && p <= 2.0) {
        return input("p must lie in (1, 2]");
    }
    let Some(first) = fields.first() else { return input("empty field battery") };
    let inv_p_conj = 1.0 - 1.0 / p;
    let interval = spec.interval_length();
    deltas
        .iter()
        .map(|&delta| {
            let sup = sup_omega(spec, first.shape(), first.length(), delta, 4096)?;
            let mut max_ratio = 0.0f64;
            for f in fields {
                let filtered = truncation_apply(f, spec, delta, bump)?;
                let avg = filtered.average(phi);
                let num = lp_norm(avg.values(), p, avg.cell_volume());
                let den = sup.powf(inv_p_conj) * f.lp_norm(p);
                let ratio = if num == 0.0 {
                    0.0
                } else if den == 0.0 {
                    f64::INFINITY
                } else {
                    num / den
                };
                max_ratio = max_ratio.max(ratio);
            }
            Ok(MultiplierRow { delta, max_ratio, sup_omega: sup, uninformative: sup >= 0.9 * interval })
        })
        .collect()
}

/// Deterministic mean-zero fields `sum_k g_k(v) e^{i k x}` over a few low modes, with the
/// coefficients independent uniform samples at each velocity node.
pub fn multiplier_battery(
    shape: &[usize],
    length: f64,
    velocities: &[f64],
    count: usize,
    modes: i64,
    seed: u64,
) -> Result<Vec<XVField>> {
    let nv = velocities.len();
    let total: usize = shape.iter().product();
    (0..count)
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c as u64));
            let ks: Vec<[i64; 2]> = match shape.len() {
                1 => (1..=modes).map(|k| [k, 0]).collect(),
                _ => (-modes..=modes)
                    .flat_map(|a| (-modes..=modes).map(move |b| [a, b]))
                    .filter(|k| k[0] > 0 || (k[0] == 0 && k[1] > 0))
                    .collect(),
            };
            let coeffs: Vec<Vec<(f64, f64)>> =
                ks.iter().map(|_| (0..nv).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).collect();
            let mut values = vec![0.0; total * nv];
            for i in 0..total {
                let x = super::grid_point(shape, length, i);
                for (k, cs) in ks.iter().zip(&coeffs) {
                    let phase = 2.0 * PI * (k[0] as f64 * x[0] + if shape.len() > 1 { k[1] as f64 * x[1] } else { 0.0 }) / length;
                    let (c, s) = (phase.cos(), phase.sin());
                    for m in 0..nv {
                        values[i * nv + m] += cs[m].0 * c + cs[m].1 * s;
                    }
                }
            }
            XVField::new(shape.to_vec(), length, velocities.to_vec(), values, format!("battery{c}"))
        })
        .collect()
}

/// Discrete `l^1` norm of the periodic convolution kernel of `psi(L(xi, v)/delta)` at a fixed
/// velocity, for each delta: a bound on the multiplier's norm on every `L^p`.
pub fn truncation_kernel_norms(
    spec: &SymbolSpec,
    v: f64,
    deltas: &[f64],
    shape: &[usize],
    length: f64,
    bump: Bump,
) -> Result<Vec<(f64, f64)>> {
    check_dims(shape.len(), spec)?;
    deltas
        .iter()
        .map(|&delta| {
            let m = multiplier(spec, shape, length, v, delta, bump)?;
            let kernel = ifft_real(m.iter().map(|&w| Complex64::new(w, 0.0)).collect(), shape);
            Ok((delta, kernel.iter().map(|k| k.abs()).sum()))
        })
        .collect()
}
