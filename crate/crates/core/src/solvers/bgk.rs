use rayon::prelude::*;

use super::evolve::{data_range, flux_divergence};
use super::flux::NumericalFlux;
use super::{Recorder, Scheme, SchemeConfig, Trajectory};
use crate::error::{input, Result};
use crate::lp::ScalarField;
use crate::symbol::SymbolSpec;

/// Midpoint velocity nodes on `M` cells covering `[min(lo, 0), max(hi, 0)]`.
pub(crate) fn velocity_nodes(range: (f64, f64), m: usize) -> (Vec<f64>, f64) {
    let (lo, hi) = (range.0.min(0.0), range.1.max(0.0));
    let dv = if hi > lo { (hi - lo) / m as f64 } else { 1.0 };
    ((0..m).map(|k| lo + (k as f64 + 0.5) * dv).collect(), dv)
}

/// Kinetic scheme: upwind transport of `f = chi_rho(v_k)` at speed `a(v_k)`, then projection
/// back onto an indicator. The moment is advanced by the transported increment
/// `sum_k (f* - f) dv`, so mass is conserved exactly and the moments equal the macroscopic
/// scheme with the kinetic numerical flux.
pub fn solve_kinetic_bgk(spec: &SymbolSpec, rho0: &ScalarField, cfg: &SchemeConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.scheme != Scheme::KineticBgk {
        return input("kinetic solver needs scheme = kinetic-bgk");
    }
    let Some(bgk) = cfg.bgk else { return input("kinetic scheme needs bgk parameters") };
    if bgk.m < 2 {
        return input("bgk needs at least two velocity nodes");
    }
    if !(bgk.epsilon > 0.0) {
        return input("relaxation time must be positive");
    }
    if rho0.dim() != spec.dim() {
        return input("initial data and symbol dimensions differ");
    }
    if spec.has_diffusion() {
        return input("kinetic solver takes a symbol without diffusion");
    }
    let range = data_range(rho0);
    let (velocities, dv) = velocity_nodes(range, bgk.m);
    let fluxes: Vec<NumericalFlux> =
        spec.convection().iter().map(|a| NumericalFlux::kinetic(a, &velocities, dv)).collect();
    let h: Vec<f64> = rho0.shape().iter().map(|&n| rho0.length() / n as f64).collect();
    let rate: f64 = fluxes.iter().zip(&h).map(|(f, h)| f.speed() / h).sum();
    let dt_max = if rate > 0.0 { cfg.cfl / rate } else { f64::INFINITY };
    let (steps, dt) = cfg.steps(dt_max)?;
    if bgk.epsilon > dt * (1.0 + 1e-12) {
        return input(format!("relaxation time {} exceeds the time step {dt}", bgk.epsilon));
    }

    let mut recorder = Recorder::new(cfg, rho0);
    let mut rho = rho0.values().to_vec();
    for step in 1..=steps {
        let mut update = vec![0.0; rho.len()];
        for (axis, flux) in fluxes.iter().enumerate() {
            if flux.speed() == 0.0 {
                continue;
            }
            let lam = dt / h[axis];
            let div = flux_divergence(&rho, rho0.shape(), axis, flux);
            update.par_iter_mut().zip(div.par_iter()).for_each(|(u, d)| *u -= lam * d);
        }
        rho.par_iter_mut().zip(update.par_iter()).for_each(|(r, u)| *r += u);
        if recorder.wants(step, steps, dt) {
            recorder.push(step, dt, rho0.with_values(rho.clone()));
        }
    }
    Ok(recorder.finish(cfg.scheme, dt, steps))
}
