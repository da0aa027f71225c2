use rayon::prelude::*;

use crate::error::{input, Error, Result};
use crate::lp::ScalarField;
use crate::symbol::{SymbolSpec, VelocityFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticOptions {
    /// Stop when the discrete L2 residual falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// First pseudo-time step (1D); later steps grow as the residual falls.
    pub initial_dtau: f64,
    /// Fraction of the explicit stability limit (2D).
    pub cfl: f64,
}

impl Default for EllipticOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 400_000, initial_dtau: 1e-3, cfl: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticSolution {
    /// Values at `x_i = i L / N`; index 0 carries the boundary value.
    pub field: ScalarField,
    pub iterations: usize,
    /// Residual norm every iteration (1D) or every 100 iterations (2D).
    pub residual_history: Vec<f64>,
}

fn source_of(spec: &SymbolSpec) -> VelocityFunction {
    spec.source().cloned().unwrap_or_else(VelocityFunction::zero)
}

/// Steady state of `rho_t = sum d_jk B_jk(rho) + S(rho)` on `[0, L]^d` with Dirichlet data
/// `boundary(x)`. 1D uses linearized implicit pseudo-time steps with residual-driven step
/// growth; 2D uses explicit pseudo-time.
pub fn solve_elliptic_degenerate(
    spec: &SymbolSpec,
    shape: &[usize],
    length: f64,
    boundary: &(dyn Fn(&[f64]) -> f64 + Sync),
    opts: &EllipticOptions,
) -> Result<EllipticSolution> {
    if shape.len() != spec.dim() {
        return input("grid and symbol dimensions differ");
    }
    if shape.iter().any(|&n| n < 4) || !(length > 0.0) {
        return input("elliptic grid needs at least 4 cells per axis and a positive length");
    }
    if !spec.has_diffusion() {
        return input("elliptic solver needs a diffusion tensor");
    }
    if !(opts.tolerance > 0.0) || opts.max_iterations == 0 {
        return input("elliptic options need a positive tolerance and iteration budget");
    }
    match shape.len() {
        1 => solve_1d(spec, shape[0], length, boundary, opts),
        _ => solve_2d(spec, shape, length, boundary, opts),
    }
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i - 1];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

fn solve_1d(
    spec: &SymbolSpec,
    n: usize,
    length: f64,
    boundary: &(dyn Fn(&[f64]) -> f64 + Sync),
    opts: &EllipticOptions,
) -> Result<EllipticSolution> {
    let b = &spec.diffusion()[0][0];
    let s = source_of(spec);
    let h = length / n as f64;
    let h2 = h * h;
    // rho[0] and rho[n] are boundary nodes
    let mut rho = vec![0.0; n + 1];
    rho[0] = boundary(&[0.0]);
    rho[n] = boundary(&[length]);
    let m = n - 1;
    let residual = |rho: &[f64]| -> Vec<f64> {
        (1..n)
            .map(|i| {
                (b.antiderivative(rho[i + 1]) - 2.0 * b.antiderivative(rho[i]) + b.antiderivative(rho[i - 1])) / h2
                    + s.eval(rho[i])
            })
            .collect()
    };
    let norm = |r: &[f64]| (r.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
    let mut r = residual(&rho);
    let mut res = norm(&r);
    let mut history = vec![res];
    let mut dtau = opts.initial_dtau;
    let mut iterations = 0;
    while res >= opts.tolerance {
        if iterations == opts.max_iterations || !res.is_finite() {
            return Err(Error::NoConvergence { iterations, last_residual: res, residual_history: history });
        }
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            diag[k] = 1.0 / dtau + 2.0 * b.eval(rho[i]) / h2 - s.derivative(rho[i], 1e-6).value.min(0.0);
            if k > 0 {
                lower[k] = -b.eval(rho[i - 1]) / h2;
            }
            if k + 1 < m {
                upper[k] = -b.eval(rho[i + 1]) / h2;
            }
        }
        let mut delta = r.clone();
        thomas(&lower, &diag, &upper, &mut delta);
        let trial: Vec<f64> = rho.iter().enumerate().map(|(i, &x)| if i == 0 || i == n { x } else { x + delta[i - 1] }).collect();
        let r_new = residual(&trial);
        let res_new = norm(&r_new);
        iterations += 1;
        if res_new.is_finite() && res_new < 2.0 * res {
            rho = trial;
            r = r_new;
            dtau = (dtau * (res / res_new).min(10.0)).min(1e12);
            res = res_new;
        } else {
            dtau *= 0.25;
        }
        history.push(res);
    }
    rho.truncate(n);
    let field = ScalarField::new(vec![n], length, rho, "elliptic")?;
    Ok(EllipticSolution { field, iterations, residual_history: history })
}

fn solve_2d(
    spec: &SymbolSpec,
    shape: &[usize],
    length: f64,
    boundary: &(dyn Fn(&[f64]) -> f64 + Sync),
    opts: &EllipticOptions,
) -> Result<EllipticSolution> {
    let (n0, n1) = (shape[0], shape[1]);
    let (h0, h1) = (length / n0 as f64, length / n1 as f64);
    let w = n1 + 1;
    let bd = spec.diffusion();
    let s = source_of(spec);
    // padded (n0 + 1) x (n1 + 1) array; the outer ring is Dirichlet data
    let mut rho = vec![0.0; (n0 + 1) * w];
    for i in 0..=n0 {
        for j in 0..=n1 {
            if i == 0 || j == 0 || i == n0 || j == n1 {
                rho[i * w + j] = boundary(&[i as f64 * h0, j as f64 * h1]);
            }
        }
    }
    let interior: Vec<usize> = (1..n0).flat_map(|i| (1..n1).map(move |j| i * w + j)).collect();
    let mixed = !bd[0][1].is_zero();
    let residual = |rho: &[f64]| -> Vec<f64> {
        let big = |f: &VelocityFunction| -> Vec<f64> { rho.par_iter().map(|&r| f.antiderivative(r)).collect() };
        let (w11, w22) = (big(&bd[0][0]), big(&bd[1][1]));
        let w12 = if mixed { big(&bd[0][1]) } else { Vec::new() };
        interior
            .par_iter()
            .map(|&c| {
                let mut out = (w11[c + w] - 2.0 * w11[c] + w11[c - w]) / (h0 * h0)
                    + (w22[c + 1] - 2.0 * w22[c] + w22[c - 1]) / (h1 * h1)
                    + s.eval(rho[c]);
                if mixed {
                    out += 2.0 * (w12[c + w + 1] - w12[c + w - 1] - w12[c - w + 1] + w12[c - w - 1]) / (4.0 * h0 * h1);
                }
                out
            })
            .collect()
    };
    let norm = |r: &[f64]| (r.iter().map(|x| x * x).sum::<f64>() * h0 * h1).sqrt();
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let r = residual(&rho);
        let res = norm(&r);
        if iterations % 100 == 0 {
            history.push(res);
        }
        if res < opts.tolerance {
            break;
        }
        if iterations == opts.max_iterations || !res.is_finite() {
            history.push(res);
            return Err(Error::NoConvergence { iterations, last_residual: res, residual_history: history });
        }
        let (lo, hi) = rho.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let rate = bd[0][0].max_abs_on(lo, hi) / (h0 * h0)
            + bd[1][1].max_abs_on(lo, hi) / (h1 * h1)
            + s.derivative(0.5 * (lo + hi), 1e-6).value.abs();
        let dtau = if rate > 0.0 { opts.cfl / rate } else { opts.cfl * h0 * h1 };
        for (&c, r) in interior.iter().zip(&r) {
            rho[c] += dtau * r;
        }
        iterations += 1;
    }
    let values: Vec<f64> = (0..n0).flat_map(|i| (0..n1).map(move |j| (i, j))).map(|(i, j)| rho[i * w + j]).collect();
    let field = ScalarField::new(vec![n0, n1], length, values, "elliptic")?;
    Ok(EllipticSolution { field, iterations, residual_history: history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::library::{elliptic, isotropic_diffusion};

    #[test]
    fn degenerate_quadratic_profile() {
        let spec = elliptic(1.0, VelocityFunction::constant(-1.0), (-1.0, 1.0)).unwrap();
        let sol = solve_elliptic_degenerate(&spec, &[256], 1.0, &|_| 0.0, &EllipticOptions::default()).unwrap();
        let h = 1.0 / 256.0;
        let err = sol
            .field
            .values()
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let x = i as f64 * h;
                (r + (x * (1.0 - x)).sqrt()).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "error {err}");
        assert!(sol.field.values().iter().all(|&r| r <= 1e-10));
    }

    #[test]
    fn laplace_reproduces_harmonic_quadratic() {
        let spec = isotropic_diffusion(VelocityFunction::constant(1.0), (-2.0, 2.0)).unwrap();
        let g = |x: &[f64]| x[0] * x[0] - x[1] * x[1];
        let sol = solve_elliptic_degenerate(&spec, &[16, 16], 1.0, &g, &EllipticOptions::default()).unwrap();
        for (idx, &r) in sol.field.values().iter().enumerate() {
            let x = [(idx / 16) as f64 / 16.0, (idx % 16) as f64 / 16.0];
            assert!((r - g(&x)).abs() < 1e-8);
        }
    }
}
