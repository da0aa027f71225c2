use rayon::prelude::*;

use super::flux::NumericalFlux;
use super::{Recorder, Scheme, SchemeConfig, Trajectory};
use crate::error::{input, Result};
use crate::lp::ScalarField;
use crate::symbol::{sym2_eigenvalues, SymbolSpec, VelocityFunction};

pub(crate) fn data_range(rho0: &ScalarField) -> (f64, f64) {
    rho0.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

fn check_field(spec: &SymbolSpec, rho0: &ScalarField, cfg: &SchemeConfig) -> Result<()> {
    cfg.validate()?;
    if rho0.dim() != spec.dim() {
        return input("initial data and symbol dimensions differ");
    }
    if cfg.scheme == Scheme::KineticBgk {
        return input("the kinetic scheme has its own solver");
    }
    Ok(())
}

/// Sign of `b_12` over the data range: +1, -1, or 0 when it changes sign or vanishes.
fn mixed_sign(b12: &VelocityFunction, range: (f64, f64)) -> i8 {
    if b12.is_zero() {
        return 0;
    }
    let (lo, hi) = b12.range_on(range.0, range.1);
    if lo >= 0.0 {
        1
    } else if hi <= 0.0 {
        -1
    } else {
        0
    }
}

/// Rejects diffusion tensors that are indefinite somewhere on the data range.
fn check_psd(spec: &SymbolSpec, range: (f64, f64)) -> Result<()> {
    const SAMPLES: usize = 257;
    for k in 0..SAMPLES {
        let v = range.0 + (range.1 - range.0) * k as f64 / (SAMPLES - 1) as f64;
        let m = spec.diffusion_matrix(v);
        let (min, max) = if spec.dim() == 1 { (m[0][0], m[0][0]) } else { sym2_eigenvalues(m) };
        if min < -1e-12 * max.abs().max(1.0) {
            return input(format!("diffusion is indefinite at rho = {v} (eigenvalue {min})"));
        }
    }
    Ok(())
}

struct Grid {
    shape: Vec<usize>,
    h: Vec<f64>,
}

impl Grid {
    fn of(field: &ScalarField) -> Self {
        Self { shape: field.shape().to_vec(), h: field.shape().iter().map(|&n| field.length() / n as f64).collect() }
    }
}

/// Flux differences along axis `axis` of a periodic grid: `F_{i+1/2} - F_{i-1/2}`.
pub(crate) fn flux_divergence(rho: &[f64], shape: &[usize], axis: usize, flux: &NumericalFlux) -> Vec<f64> {
    let total = rho.len();
    let (stride, n) = if shape.len() == 1 || axis == 1 { (1, *shape.last().unwrap_or(&1)) } else { (shape[1], shape[0]) };
    let neighbor = |idx: usize, forward: bool| -> usize {
        let (line, pos) = if stride == 1 { (idx - idx % n, idx % n) } else { (idx % stride, idx / stride) };
        let next = if forward { (pos + 1) % n } else { (pos + n - 1) % n };
        if stride == 1 {
            line + next
        } else {
            line + next * stride
        }
    };
    let faces: Vec<f64> = (0..total).into_par_iter().map(|i| flux.eval(rho[i], rho[neighbor(i, true)])).collect();
    (0..total).into_par_iter().map(|i| faces[i] - faces[neighbor(i, false)]).collect()
}

/// Monotone conservative scheme for `rho_t + div A(rho) = 0`; 2D uses Lie splitting.
pub fn solve_conservation_law(spec: &SymbolSpec, rho0: &ScalarField, cfg: &SchemeConfig) -> Result<Trajectory> {
    check_field(spec, rho0, cfg)?;
    if spec.has_diffusion() {
        return input("conservation-law solver takes a symbol without diffusion");
    }
    let range = data_range(rho0);
    let grid = Grid::of(rho0);
    let fluxes: Vec<NumericalFlux> = spec.convection().iter().map(|a| NumericalFlux::new(cfg.scheme, a, range)).collect();
    let dt_max = fluxes
        .iter()
        .zip(&grid.h)
        .filter(|(f, _)| f.speed() > 0.0)
        .map(|(f, h)| cfg.cfl * h / f.speed())
        .fold(f64::INFINITY, f64::min);
    let (steps, dt) = cfg.steps(dt_max)?;
    let mut recorder = Recorder::new(cfg, rho0);
    let mut rho = rho0.values().to_vec();
    for step in 1..=steps {
        for (axis, flux) in fluxes.iter().enumerate() {
            if flux.speed() == 0.0 {
                continue;
            }
            let lam = dt / grid.h[axis];
            let div = flux_divergence(&rho, &grid.shape, axis, flux);
            rho.par_iter_mut().zip(div.par_iter()).for_each(|(r, d)| *r -= lam * d);
        }
        if recorder.wants(step, steps, dt) {
            recorder.push(step, dt, rho0.with_values(rho.clone()));
        }
    }
    Ok(recorder.finish(cfg.scheme, dt, steps))
}

/// Discrete second derivatives of the diffusion fluxes, unsplit.
struct DiffusionOperator {
    b: Vec<Vec<VelocityFunction>>,
    mixed: i8,
}

impl DiffusionOperator {
    fn apply(&self, rho: &[f64], grid: &Grid) -> Vec<f64> {
        let shape = &grid.shape;
        let big = |f: &VelocityFunction| -> Vec<f64> { rho.par_iter().map(|&r| f.antiderivative(r)).collect() };
        if shape.len() == 1 {
            let n = shape[0];
            let w = big(&self.b[0][0]);
            let h2 = grid.h[0] * grid.h[0];
            return (0..n).into_par_iter().map(|i| (w[(i + 1) % n] - 2.0 * w[i] + w[(i + n - 1) % n]) / h2).collect();
        }
        let (n0, n1) = (shape[0], shape[1]);
        let (h0, h1) = (grid.h[0], grid.h[1]);
        let w11 = big(&self.b[0][0]);
        let w22 = big(&self.b[1][1]);
        let w12 = if self.b[0][1].is_zero() { None } else { Some(big(&self.b[0][1])) };
        let mixed = self.mixed;
        (0..n0 * n1)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n1, idx % n1);
                let (ip, im) = ((i + 1) % n0, (i + n0 - 1) % n0);
                let (jp, jm) = ((j + 1) % n1, (j + n1 - 1) % n1);
                let at = |w: &[f64], a: usize, b: usize| w[a * n1 + b];
                let mut out = (at(&w11, ip, j) - 2.0 * at(&w11, i, j) + at(&w11, im, j)) / (h0 * h0)
                    + (at(&w22, i, jp) - 2.0 * at(&w22, i, j) + at(&w22, i, jm)) / (h1 * h1);
                if let Some(w) = &w12 {
                    let axial = at(w, ip, j) + at(w, im, j) + at(w, i, jp) + at(w, i, jm) - 2.0 * at(w, i, j);
                    let d12 = match mixed {
                        1 => (at(w, ip, jp) + at(w, im, jm) - axial) / (2.0 * h0 * h1),
                        -1 => -(at(w, ip, jm) + at(w, im, jp) - axial) / (2.0 * h0 * h1),
                        _ => (at(w, ip, jp) - at(w, ip, jm) - at(w, im, jp) + at(w, im, jm)) / (4.0 * h0 * h1),
                    };
                    out += 2.0 * d12;
                }
                out
            })
            .collect()
    }
}

/// Monotone flux plus explicit centered diffusion for
/// `rho_t + div A(rho) - sum d_jk B_jk(rho) = 0`, unsplit.
pub fn solve_convection_diffusion(spec: &SymbolSpec, rho0: &ScalarField, cfg: &SchemeConfig) -> Result<Trajectory> {
    check_field(spec, rho0, cfg)?;
    let range = data_range(rho0);
    check_psd(spec, range)?;
    let grid = Grid::of(rho0);
    let d = spec.dim();
    let fluxes: Vec<NumericalFlux> = spec.convection().iter().map(|a| NumericalFlux::new(cfg.scheme, a, range)).collect();
    let diag_max: Vec<f64> = (0..d).map(|j| spec.diffusion()[j][j].max_abs_on(range.0, range.1)).collect();
    // lambda_max <= trace for a PSD tensor
    let lambda_max: f64 = diag_max.iter().sum();
    let h_min = grid.h.iter().copied().fold(f64::INFINITY, f64::min);

    let convective: f64 = fluxes.iter().zip(&grid.h).map(|(f, h)| f.speed() / h).sum();
    let diffusive: f64 = (0..d).map(|j| 2.0 * diag_max[j] / (grid.h[j] * grid.h[j])).sum();
    let mut dt_max = f64::INFINITY;
    if convective > 0.0 {
        dt_max = dt_max.min(cfg.cfl / convective);
    }
    if lambda_max > 0.0 {
        dt_max = dt_max.min(cfg.diffusion_cfl * h_min * h_min / lambda_max);
    }
    if convective + diffusive > 0.0 {
        dt_max = dt_max.min(1.0 / (convective + diffusive));
    }
    let (steps, dt) = cfg.steps(dt_max)?;

    let diffusion = spec.has_diffusion().then(|| DiffusionOperator {
        b: spec.diffusion().to_vec(),
        mixed: if d == 2 { mixed_sign(&spec.diffusion()[0][1], range) } else { 0 },
    });
    let mut recorder = Recorder::new(cfg, rho0);
    let mut rho = rho0.values().to_vec();
    for step in 1..=steps {
        let mut update = vec![0.0; rho.len()];
        for (axis, flux) in fluxes.iter().enumerate() {
            if flux.speed() == 0.0 {
                continue;
            }
            let lam = dt / grid.h[axis];
            let div = flux_divergence(&rho, &grid.shape, axis, flux);
            update.par_iter_mut().zip(div.par_iter()).for_each(|(u, d)| *u -= lam * d);
        }
        if let Some(op) = &diffusion {
            let lap = op.apply(&rho, &grid);
            update.par_iter_mut().zip(lap.par_iter()).for_each(|(u, l)| *u += dt * l);
        }
        rho.par_iter_mut().zip(update.par_iter()).for_each(|(r, u)| *r += u);
        if recorder.wants(step, steps, dt) {
            recorder.push(step, dt, rho0.with_values(rho.clone()));
        }
    }
    Ok(recorder.finish(cfg.scheme, dt, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::library::*;

    #[test]
    fn constant_data_stays_constant() {
        let spec = burgers(1.0, (-1.0, 1.0)).unwrap();
        let rho0 = ScalarField::new(vec![64], 1.0, vec![0.3; 64], "c").unwrap();
        let traj = solve_conservation_law(&spec, &rho0, &SchemeConfig::new(Scheme::Godunov, 0.5)).unwrap();
        assert!(traj.last().values().iter().all(|&x| x == 0.3));
    }

    #[test]
    fn fixed_dt_above_bound_is_refused() {
        let spec = burgers(1.0, (-1.0, 1.0)).unwrap();
        let rho0 = ScalarField::from_fn(vec![64], 1.0, "s", |x| (6.28 * x[0]).sin()).unwrap();
        let mut cfg = SchemeConfig::new(Scheme::Godunov, 0.5);
        cfg.dt = Some(0.1);
        assert!(matches!(solve_conservation_law(&spec, &rho0, &cfg), Err(crate::Error::Cfl { .. })));
    }

    #[test]
    fn heat_mode_decays_at_exact_rate() {
        let spec = SymbolSpec::new(vec![VelocityFunction::zero()], vec![vec![VelocityFunction::constant(1.0)]], true, (-1.0, 1.0)).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let rho0 = ScalarField::from_fn(vec![128], 1.0, "m", |x| (two_pi * x[0]).sin()).unwrap();
        let t = 0.02;
        let traj = solve_convection_diffusion(&spec, &rho0, &SchemeConfig::new(Scheme::Godunov, t)).unwrap();
        let amp = traj.last().values()[32];
        assert!((amp / (-two_pi * two_pi * t).exp() - 1.0).abs() < 0.01);
    }

    #[test]
    fn indefinite_diffusion_is_refused() {
        let spec = SymbolSpec::new(vec![VelocityFunction::zero()], vec![vec![VelocityFunction::power(2.0).unwrap()]], true, (-1.0, 1.0)).unwrap();
        // v^2 is fine; a table going negative outside I is not
        let bad = SymbolSpec::new(
            vec![VelocityFunction::zero()],
            vec![vec![VelocityFunction::table(vec![(-1.0, 0.0), (1.0, 1.0), (2.0, -1.0)]).unwrap()]],
            true,
            (-1.0, 1.0),
        )
        .unwrap();
        let rho0 = ScalarField::from_fn(vec![64], 1.0, "s", |x| 2.0 * x[0]).unwrap();
        let cfg = SchemeConfig::new(Scheme::Godunov, 0.01);
        assert!(solve_convection_diffusion(&spec, &rho0, &cfg).is_ok());
        assert!(solve_convection_diffusion(&bad, &rho0, &cfg).is_err());
    }
}
