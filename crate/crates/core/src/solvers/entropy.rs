use rayon::prelude::*;

use super::evolve::data_range;
use super::flux::NumericalFlux;
use super::{Scheme, Trajectory};
use crate::error::{input, Result};
use crate::symbol::SymbolSpec;

pub const KRUZKOV_POINTS: usize = 33;

/// Uniform Kruzkov parameters spanning `[lo, hi]`.
pub fn kruzkov_grid(range: (f64, f64), points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points).map(|k| range.0 + (range.1 - range.0) * k as f64 / (points - 1) as f64).collect()
}

/// Discrete entropy defect
/// `m = -1/2 [ D_t |rho - v| + D_x G(rho; v) ]`, where `G` is the scheme's numerical entropy
/// flux including the diffusive part `-(B(rho v v) - B(rho ^ v))'`.
///
/// Storing the full `(t, x, v)` array is avoided: the field keeps the time-integrated defect
/// per `(v, x)`, the per-step minimum and the last step.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProductionField {
    pub kruzkov: Vec<f64>,
    pub n_x: usize,
    pub dx: f64,
    pub dt: f64,
    /// `sum_n m dt`, indexed `[k * n_x + i]`.
    pub accumulated: Vec<f64>,
    /// `m` at the last step, same layout.
    pub last: Vec<f64>,
    /// Smallest value per step.
    pub step_min: Vec<f64>,
    pub min_value: f64,
    /// `sum m dx dt dv` over everything (trapezoid rule in `v`).
    pub total_mass: f64,
}

impl EntropyProductionField {
    /// Time-integrated defect of cell column `i` at parameter index `k`, per unit time.
    pub fn column_rate(&self, k: usize, i: usize) -> f64 {
        self.accumulated[k * self.n_x + i] * self.dx / (self.dt * self.step_min.len() as f64)
    }

    /// `max(-min m, 0) / dx`: the constant `C` in `min m >= -C dx`.
    pub fn consistency_constant(&self) -> f64 {
        (-self.min_value).max(0.0) / self.dx
    }
}

/// Kruzkov defect of a 1D trajectory stored at every step.
pub fn entropy_production(traj: &Trajectory, spec: &SymbolSpec, kruzkov: &[f64]) -> Result<EntropyProductionField> {
    let first = &traj.snapshots[0].1;
    if first.dim() != 1 || spec.dim() != 1 {
        return input("entropy production is implemented in one space dimension");
    }
    if traj.stride != Some(1) || traj.snapshots.len() != traj.steps + 1 {
        return input("entropy production needs every time step (record_every = 1)");
    }
    if traj.scheme == Scheme::KineticBgk {
        return input("entropy production needs a macroscopic scheme");
    }
    if kruzkov.is_empty() {
        return input("empty Kruzkov grid");
    }
    let n = first.len();
    let dx = first.length() / n as f64;
    let dt = traj.dt;
    let flux = NumericalFlux::new(traj.scheme, &spec.convection()[0], data_range(first));
    let b = &spec.diffusion()[0][0];
    let diffusive = !b.is_zero();
    // combined flux F(u, w) - (B(w) - B(u)) / dx
    let total_flux = |u: f64, w: f64| {
        let f = flux.eval(u, w);
        if diffusive {
            f - (b.antiderivative(w) - b.antiderivative(u)) / dx
        } else {
            f
        }
    };
    let nk = kruzkov.len();
    let mut accumulated = vec![0.0; nk * n];
    let mut last = vec![0.0; nk * n];
    let mut step_min = Vec::with_capacity(traj.steps);
    for pair in traj.snapshots.windows(2) {
        let (old, new) = (pair[0].1.values(), pair[1].1.values());
        let m: Vec<f64> = (0..nk * n)
            .into_par_iter()
            .map(|idx| {
                let (k, i) = (idx / n, idx % n);
                let v = kruzkov[k];
                let g = |i: usize| {
                    let (u, w) = (old[i], old[(i + 1) % n]);
                    total_flux(u.max(v), w.max(v)) - total_flux(u.min(v), w.min(v))
                };
                let d_eta = ((new[i] - v).abs() - (old[i] - v).abs()) / dt;
                -0.5 * (d_eta + (g(i) - g((i + n - 1) % n)) / dx)
            })
            .collect();
        step_min.push(m.iter().copied().fold(f64::INFINITY, f64::min));
        accumulated.iter_mut().zip(&m).for_each(|(a, m)| *a += m * dt);
        last = m;
    }
    let weights: Vec<f64> = if nk == 1 {
        vec![1.0]
    } else {
        let dv = (kruzkov[nk - 1] - kruzkov[0]) / (nk - 1) as f64;
        (0..nk).map(|k| if k == 0 || k == nk - 1 { 0.5 * dv } else { dv }).collect()
    };
    let total_mass = (0..nk).map(|k| weights[k] * accumulated[k * n..(k + 1) * n].iter().sum::<f64>() * dx).sum();
    let min_value = step_min.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EntropyProductionField {
        kruzkov: kruzkov.to_vec(),
        n_x: n,
        dx,
        dt,
        accumulated,
        last,
        step_min,
        min_value,
        total_mass,
    })
}
