//! Degenerate velocity sets `Omega_L(xi; delta) = {v in I : |L(i xi, v)| <= delta}`,
//! their sup over frequency spheres, and log-log fits of the non-degeneracy exponents
//! `(alpha, beta)` and link exponents `(mu, lambda)`.
//!
//! Velocities are sampled at the midpoints of `n_samples` equal cells of `I`; a set's
//! measure is the number of cells whose midpoint qualifies times the cell width. Sphere
//! sups use deterministic grids (uniform angles on circles, a Fibonacci lattice on the
//! 2-sphere) plus seed directions where the symbol is most degenerate, refined once
//! around each running argmax.

use rayon::prelude::*;

use crate::error::{input, Error, Result};
use crate::regression::{trimmed_ols, LinearFit};
use crate::symbol::{FluxKind, FrequencyPoint, SymbolSpec, VelocityFunction, DEFAULT_H_V};

/// Minimum number of sampled velocities for `omega_set_measure`.
pub const MIN_SAMPLES: usize = 256;
/// Minimum number of sphere directions for `omega_sup`.
pub const MIN_SPHERE_SAMPLES: usize = 64;
/// Grid points whose set holds fewer sampled velocities are dropped from fits.
pub const MIN_FIT_COUNT: usize = 16;
/// Relative spread below which the three smallest-delta measures count as "no decay".
pub const NO_DECAY_SPREAD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingParams {
    pub n_samples: usize,
    pub sphere_samples: usize,
    pub h_v: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self { n_samples: 1 << 17, sphere_samples: 256, h_v: DEFAULT_H_V }
    }
}

/// Dyadic grid `2^lo, ..., 2^hi`.
pub fn dyadic_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(k)).collect()
}

pub fn default_delta_grid() -> Vec<f64> {
    dyadic_grid(-12, -3)
}

pub fn default_j_grid() -> Vec<f64> {
    dyadic_grid(0, 5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaMeasurement {
    pub j: f64,
    pub delta: f64,
    pub measure: f64,
    /// Number of sampled velocities in the set.
    pub count: usize,
    /// Sup of `|L_v|` over the set at the maximizing direction.
    pub sup_symbol_v: f64,
    pub argmax_frequency: FrequencyPoint,
}

/// Velocity samples of the symbol coefficients and their derivatives.
struct SampledSymbol {
    n: usize,
    cell: f64,
    time: bool,
    dim: usize,
    a: Vec<[f64; 2]>,
    b: Vec<[f64; 3]>,
    da: Vec<[f64; 2]>,
    db: Vec<[f64; 3]>,
    /// Samples within `h_v` of a kink; excluded from the `|L_v|` sup.
    kink: Vec<bool>,
}

impl SampledSymbol {
    fn new(spec: &SymbolSpec, n: usize, h_v: f64) -> Self {
        let (lo, hi) = spec.interval();
        let cell = (hi - lo) / n as f64;
        let dim = spec.dim();
        let conv = spec.convection();
        let diff = spec.diffusion();
        let kinks: Vec<f64> = conv.iter().chain(diff.iter().flatten()).flat_map(VelocityFunction::kinks).collect();
        let mut out = Self {
            n,
            cell,
            time: spec.includes_time(),
            dim,
            a: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
            da: Vec::with_capacity(n),
            db: Vec::with_capacity(n),
            kink: Vec::with_capacity(n),
        };
        let entry = |j: usize, k: usize| &diff[j.min(dim - 1)][k.min(dim - 1)];
        for m in 0..n {
            let v = lo + (m as f64 + 0.5) * cell;
            let mut a = [0.0; 2];
            let mut da = [0.0; 2];
            for j in 0..dim {
                a[j] = conv[j].eval(v);
                da[j] = conv[j].derivative(v, h_v).value;
            }
            let (mut b, mut db) = ([0.0; 3], [0.0; 3]);
            b[0] = entry(0, 0).eval(v);
            db[0] = entry(0, 0).derivative(v, h_v).value;
            if dim == 2 {
                b[1] = entry(0, 1).eval(v);
                b[2] = entry(1, 1).eval(v);
                db[1] = entry(0, 1).derivative(v, h_v).value;
                db[2] = entry(1, 1).derivative(v, h_v).value;
            }
            out.a.push(a);
            out.b.push(b);
            out.da.push(da);
            out.db.push(db);
            out.kink.push(kinks.iter().any(|&z| (v - z).abs() <= h_v));
        }
        out
    }

    #[inline]
    fn quad(&self, b: &[f64; 3], xi: &[f64]) -> f64 {
        if self.dim == 1 {
            b[0] * xi[0] * xi[0]
        } else {
            b[0] * xi[0] * xi[0] + 2.0 * b[1] * xi[0] * xi[1] + b[2] * xi[1] * xi[1]
        }
    }

    #[inline]
    fn lin(&self, a: &[f64; 2], xi: &[f64]) -> f64 {
        if self.dim == 1 {
            a[0] * xi[0]
        } else {
            a[0] * xi[0] + a[1] * xi[1]
        }
    }

    #[inline]
    fn abs_symbol_sq(&self, m: usize, fp: &FrequencyPoint) -> f64 {
        let tau = if self.time { fp.tau } else { 0.0 };
        let re = self.quad(&self.b[m], &fp.xi);
        let im = tau + self.lin(&self.a[m], &fp.xi);
        re * re + im * im
    }

    #[inline]
    fn abs_symbol_v(&self, m: usize, fp: &FrequencyPoint) -> f64 {
        self.quad(&self.db[m], &fp.xi).hypot(self.lin(&self.da[m], &fp.xi))
    }

    /// Counts and `|L_v|` sups of the sets for every delta (sorted ascending).
    fn profile(&self, fp: &FrequencyPoint, deltas: &[f64]) -> (Vec<usize>, Vec<f64>) {
        let k = deltas.len();
        let mut counts = vec![0usize; k + 1];
        let mut sups = vec![0.0f64; k + 1];
        let top = deltas[k - 1] * deltas[k - 1];
        for m in 0..self.n {
            let l2 = self.abs_symbol_sq(m, fp);
            if l2 > top {
                counts[k] += 1;
                continue;
            }
            let bin = deltas.partition_point(|&d| d * d < l2);
            counts[bin] += 1;
            if bin < k && !self.kink[m] {
                sups[bin] = sups[bin].max(self.abs_symbol_v(m, fp));
            }
        }
        let (mut c, mut s) = (0usize, 0.0f64);
        let mut out_c = Vec::with_capacity(k);
        let mut out_s = Vec::with_capacity(k);
        for b in 0..k {
            c += counts[b];
            s = s.max(sups[b]);
            out_c.push(c);
            out_s.push(s);
        }
        (out_c, out_s)
    }
}

/// Measure of `{v in I : |L(fp, v)| <= delta}` by stratified midpoint sampling.
pub fn omega_set_measure(spec: &SymbolSpec, fp: &FrequencyPoint, delta: f64, n_samples: usize) -> Result<f64> {
    if !(delta > 0.0) {
        return input(format!("delta must be positive, got {delta}"));
    }
    if n_samples < MIN_SAMPLES {
        return input(format!("n_samples must be at least {MIN_SAMPLES}"));
    }
    if fp.xi.len() != spec.dim() {
        return input("frequency dimension does not match the symbol");
    }
    let sampled = SampledSymbol::new(spec, n_samples, DEFAULT_H_V);
    let (counts, _) = sampled.profile(fp, &[delta]);
    Ok(counts[0] as f64 * sampled.cell)
}

/// Smallest eigenpair of a small symmetric matrix (cyclic Jacobi).
fn smallest_eigenvector(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let n = m.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..64 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let i = (0..n).min_by(|&a, &b| m[a][a].total_cmp(&m[b][b])).unwrap_or(0);
    (0..n).map(|k| v[k][i]).collect()
}

fn normalize(mut w: Vec<f64>) -> Option<Vec<f64>> {
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= norm);
    Some(w)
}

/// Unit direction in frequency space -> `FrequencyPoint` of magnitude `j`.
fn to_point(spec: &SymbolSpec, unit: &[f64], j: f64) -> FrequencyPoint {
    let (tau, xi) = if spec.includes_time() { (unit[0], unit[1..].to_vec()) } else { (0.0, unit.to_vec()) };
    FrequencyPoint { tau: tau * j, xi: xi.iter().map(|x| x * j).collect(), magnitude: j }
}

/// Directions along which the transport part `tau + a(v0).xi` vanishes to second order
/// (or third, where `a'(v0)` degenerates) at velocities `v0` on a coarse grid.
fn osculating_directions(spec: &SymbolSpec) -> Vec<Vec<f64>> {
    const GRID: usize = 33;
    let (lo, hi) = spec.interval();
    let conv = spec.convection();
    let h = 1e-4 * (hi - lo);
    let c = |v: f64| -> Vec<f64> { std::iter::once(1.0).chain(conv.iter().map(|f| f.eval(v))).collect() };
    let mut out = Vec::new();
    for i in 0..GRID {
        let v0 = lo + (hi - lo) * (i as f64 + 0.5) / GRID as f64;
        let (cm, c0, cp) = (c(v0 - h), c(v0), c(v0 + h));
        if spec.dim() == 1 {
            out.extend(normalize(vec![-c0[1], c0[0]]));
            continue;
        }
        let d1: Vec<f64> = (0..3).map(|k| (cp[k] - cm[k]) / (2.0 * h)).collect();
        let d2: Vec<f64> = (0..3).map(|k| (cp[k] - 2.0 * c0[k] + cm[k]) / (h * h)).collect();
        let cross = |a: &[f64], b: &[f64]| vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        let w1 = cross(&c0, &d1);
        let norm1 = w1.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm1 > 1e-6 * (1.0 + d1.iter().map(|x| x.abs()).sum::<f64>()) {
            out.extend(normalize(w1));
        } else {
            out.extend(normalize(cross(&c0, &d2)));
        }
    }
    out
}

fn fibonacci_sphere(n: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            // (tau, xi1, xi2) with tau the lattice axis
            vec![z, r * phi.cos(), r * phi.sin()]
        })
        .collect()
}

/// Base directions: the lattice plus deterministic seeds.
fn base_directions(spec: &SymbolSpec, sphere_samples: usize, sampled: &SampledSymbol) -> Vec<Vec<f64>> {
    let fdim = spec.frequency_dim();
    let mut dirs: Vec<Vec<f64>> = match fdim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..sphere_samples)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / sphere_samples as f64;
                // angle 0 is the purely spatial direction
                if spec.includes_time() {
                    vec![t.sin(), t.cos()]
                } else {
                    vec![t.cos(), t.sin()]
                }
            })
            .collect(),
        _ => fibonacci_sphere(sphere_samples),
    };
    let off = usize::from(spec.includes_time());
    for j in 0..spec.dim() {
        let mut e = vec![0.0; fdim];
        e[off + j] = 1.0;
        dirs.push(e);
    }
    if spec.has_convection() {
        // Gram matrix of (1, a_1, ..., a_d) or (a_1, ..., a_d)
        let mut g = vec![vec![0.0; fdim]; fdim];
        for m in 0..sampled.n {
            let mut c = Vec::with_capacity(fdim);
            if spec.includes_time() {
                c.push(1.0);
            }
            c.extend_from_slice(&sampled.a[m][..spec.dim()]);
            for p in 0..fdim {
                for q in 0..fdim {
                    g[p][q] += c[p] * c[q] / sampled.n as f64;
                }
            }
        }
        if let Some(w) = normalize(smallest_eigenvector(g)) {
            dirs.push(w);
        }
    }
    if spec.has_convection() && spec.includes_time() {
        dirs.extend(osculating_directions(spec));
    }
    if spec.has_diffusion() && spec.dim() == 2 {
        let mut mean = vec![vec![0.0; 2]; 2];
        for b in &sampled.b {
            mean[0][0] += b[0];
            mean[0][1] += b[1];
            mean[1][0] += b[1];
            mean[1][1] += b[2];
        }
        let u = smallest_eigenvector(mean);
        let mut w = vec![0.0; off];
        w.extend(u);
        if let Some(w) = normalize(w) {
            dirs.push(w);
        }
    }
    dirs
}

/// Neighbors of `unit` at angular distance `step`.
fn neighbors(unit: &[f64], step: f64) -> Vec<Vec<f64>> {
    match unit.len() {
        2 => {
            let base = unit[1].atan2(unit[0]);
            [-step, step].iter().map(|d| vec![(base + d).cos(), (base + d).sin()]).collect()
        }
        3 => {
            let pick = if unit[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let cross = |a: &[f64], b: &[f64]| vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            let e1 = normalize(cross(unit, &pick)).unwrap_or_else(|| vec![0.0, 0.0, 1.0]);
            let e2 = cross(unit, &e1);
            let h = std::f64::consts::FRAC_1_SQRT_2;
            [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (h, h), (h, -h), (-h, h), (-h, -h)]
                .iter()
                .filter_map(|(a, b)| normalize((0..3).map(|k| unit[k] + step * (a * e1[k] + b * e2[k])).collect()))
                .collect()
        }
        _ => Vec::new(),
    }
}

/// Pattern search for the direction maximizing the count at one delta: move to the best
/// neighbor while it improves, otherwise halve the step.
fn hill_climb(
    sampled: &SampledSymbol,
    spec: &SymbolSpec,
    j: f64,
    delta: f64,
    start: (Vec<f64>, usize),
    step0: f64,
    step_min: f64,
) -> (Vec<f64>, usize) {
    let (mut u, mut best) = start;
    let mut step = step0;
    let mut moves = 0;
    while step >= step_min && moves < 400 {
        let cand = neighbors(&u, step);
        let counts: Vec<usize> = cand.par_iter().map(|w| sampled.profile(&to_point(spec, w, j), &[delta]).0[0]).collect();
        let (arg, &c) = counts.iter().enumerate().fold((0, &0usize), |acc, (i, c)| if *c > *acc.1 { (i, c) } else { acc });
        if c > best {
            u = cand[arg].clone();
            best = c;
            moves += 1;
        } else {
            step *= 0.5;
        }
    }
    (u, best)
}

/// `omega_sup` for a whole ascending delta list at one sphere radius `j`.
pub fn omega_sweep(spec: &SymbolSpec, j: f64, deltas: &[f64], params: &SamplingParams) -> Result<Vec<OmegaMeasurement>> {
    if !(j > 0.0) {
        return input("sphere radius J must be positive");
    }
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) {
        return input("deltas must be positive");
    }
    if deltas.windows(2).any(|w| w[1] <= w[0]) {
        return input("deltas must be strictly increasing");
    }
    if params.n_samples < MIN_SAMPLES {
        return input(format!("n_samples must be at least {MIN_SAMPLES}"));
    }
    if params.sphere_samples < MIN_SPHERE_SAMPLES {
        return input(format!("sphere_samples must be at least {MIN_SPHERE_SAMPLES}"));
    }
    let sampled = SampledSymbol::new(spec, params.n_samples, params.h_v);
    let evaluate = |dirs: &[Vec<f64>]| -> Vec<(Vec<usize>, Vec<f64>)> {
        dirs.par_iter().map(|u| sampled.profile(&to_point(spec, u, j), deltas)).collect()
    };
    let mut dirs = base_directions(spec, params.sphere_samples, &sampled);
    let mut results = evaluate(&dirs);
    let best = |results: &[(Vec<usize>, Vec<f64>)], k: usize| -> usize {
        let mut arg = 0;
        for (i, r) in results.iter().enumerate() {
            if r.0[k] > results[arg].0[k] {
                arg = i;
            }
        }
        arg
    };

    let fdim = spec.frequency_dim();
    if fdim > 1 {
        let step0 = match fdim {
            2 => 2.0 * std::f64::consts::PI / params.sphere_samples as f64,
            _ => (4.0 * std::f64::consts::PI / params.sphere_samples as f64).sqrt(),
        };
        // size of the symbol on the unit sphere sets the finest useful angle
        let scale = 1.0
            + sampled.a.iter().flat_map(|a| a.iter()).fold(0.0f64, |m, x| m.max(x.abs()))
            + j * sampled.b.iter().flat_map(|b| b.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
        let mut climbed: Vec<Vec<f64>> = Vec::with_capacity(deltas.len());
        let mut prev: Option<Vec<f64>> = None;
        for k in (0..deltas.len()).rev() {
            let base = best(&results, k);
            let mut start = (dirs[base].clone(), results[base].0[k]);
            if let Some(u) = &prev {
                let c = sampled.profile(&to_point(spec, u, j), &deltas[k..=k]).0[0];
                if c > start.1 {
                    start = (u.clone(), c);
                }
            }
            let step_min = deltas[k] / (16.0 * j * scale);
            let (u, _) = hill_climb(&sampled, spec, j, deltas[k], start, step0, step_min);
            prev = Some(u.clone());
            climbed.push(u);
        }
        results.extend(evaluate(&climbed));
        dirs.extend(climbed);
    }

    Ok((0..deltas.len())
        .map(|k| {
            let arg = best(&results, k);
            let (counts, sups) = &results[arg];
            OmegaMeasurement {
                j,
                delta: deltas[k],
                measure: counts[k] as f64 * sampled.cell,
                count: counts[k],
                sup_symbol_v: sups[k],
                argmax_frequency: to_point(spec, &dirs[arg], j),
            }
        })
        .collect())
}

/// Sup of the degenerate-set measure over the sphere `(tau^2 + |xi|^2)^(1/2) = J`.
pub fn omega_sup(spec: &SymbolSpec, j: f64, delta: f64, sphere_samples: usize, n_samples: usize) -> Result<OmegaMeasurement> {
    let params = SamplingParams { n_samples, sphere_samples, h_v: DEFAULT_H_V };
    Ok(omega_sweep(spec, j, &[delta], &params)?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileStatus {
    NonDegenerate,
    /// The measure does not decay as delta -> 0.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitWindow {
    pub delta_range: (f64, f64),
    pub j_range: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyProfile {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub lambda: f64,
    pub alpha_stderr: f64,
    pub beta_stderr: f64,
    pub mu_stderr: f64,
    pub lambda_stderr: f64,
    pub r_squared: f64,
    pub status: ProfileStatus,
    pub fit_window: Option<FitWindow>,
}

impl DegeneracyProfile {
    pub fn exact(alpha: f64, beta: f64, mu: f64, lambda: f64) -> Self {
        Self {
            alpha,
            beta,
            mu,
            lambda,
            alpha_stderr: 0.0,
            beta_stderr: 0.0,
            mu_stderr: 0.0,
            lambda_stderr: 0.0,
            r_squared: 1.0,
            status: ProfileStatus::NonDegenerate,
            fit_window: None,
        }
    }

    pub fn degenerate() -> Self {
        Self { status: ProfileStatus::Degenerate, ..Self::exact(0.0, 1.0, 0.0, 0.0) }
    }

    pub fn degenerate_flag(&self) -> bool {
        self.status == ProfileStatus::Degenerate
    }

    /// Multi-line `key = value` summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("alpha = {}\nalpha_stderr = {}\n", self.alpha, self.alpha_stderr));
        s.push_str(&format!("beta = {}\nbeta_stderr = {}\n", self.beta, self.beta_stderr));
        s.push_str(&format!("mu = {}\nmu_stderr = {}\n", self.mu, self.mu_stderr));
        s.push_str(&format!("lambda = {}\nlambda_stderr = {}\n", self.lambda, self.lambda_stderr));
        s.push_str(&format!("r_squared = {}\ndegenerate = {}\n", self.r_squared, self.degenerate_flag()));
        if let Some(w) = &self.fit_window {
            s.push_str(&format!(
                "delta_window = {} .. {}\nj_window = {} .. {}\nfit_points = {}\n",
                w.delta_range.0, w.delta_range.1, w.j_range.0, w.j_range.1, w.points
            ));
        }
        s
    }
}

/// Result of `fit_degeneracy`: a profile, or the sentinel for symbols whose sets are
/// empty over the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub enum DegeneracyFit {
    Profile(DegeneracyProfile),
    TriviallyNonDegenerate,
}

impl DegeneracyFit {
    pub fn profile(&self) -> Option<&DegeneracyProfile> {
        match self {
            Self::Profile(p) => Some(p),
            Self::TriviallyNonDegenerate => None,
        }
    }
}

/// Full output of a degeneracy fit: the raw grid and the fitted profile.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub measurements: Vec<OmegaMeasurement>,
    pub fit: DegeneracyFit,
}

impl DegeneracyReport {
    /// CSV with columns `J, delta, measure, sup_Lv, argmax_tau, argmax_xi...`.
    pub fn to_csv(&self, dim: usize) -> String {
        let mut s = String::from("J,delta,measure,sup_Lv,argmax_tau");
        for k in 0..dim {
            s.push_str(&format!(",argmax_xi{}", k + 1));
        }
        s.push('\n');
        for m in &self.measurements {
            s.push_str(&format!("{},{},{},{},{}", m.j, m.delta, m.measure, m.sup_symbol_v, m.argmax_frequency.tau));
            for x in &m.argmax_frequency.xi {
                s.push_str(&format!(",{x}"));
            }
            s.push('\n');
        }
        s
    }
}

fn octaves(grid: &[f64]) -> f64 {
    let (lo, hi) = grid.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    (hi / lo).log2()
}

/// Homogeneity degree of the symbol in `(tau, xi)`, when it has one.
fn homogeneity_degree(spec: &SymbolSpec) -> Option<f64> {
    match (spec.has_convection() || spec.includes_time(), spec.has_diffusion()) {
        (true, false) => Some(1.0),
        (false, true) => Some(2.0),
        _ => None,
    }
}

/// Least-squares fit of `log omega` against `(log delta, log J)` and of `log sup|L_v|`
/// against the same regressors.
pub fn fit_degeneracy(spec: &SymbolSpec, delta_grid: &[f64], j_grid: &[f64], params: &SamplingParams) -> Result<DegeneracyReport> {
    let mut deltas = delta_grid.to_vec();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let mut js = j_grid.to_vec();
    js.sort_by(f64::total_cmp);
    js.dedup();
    if deltas.len() < 3 || octaves(&deltas) < 6.0 - 1e-9 {
        return input("delta grid must span at least 6 octaves");
    }
    let homogeneous_mode = js == [1.0];
    if !homogeneous_mode && (js.len() < 2 || octaves(&js) < 3.0 - 1e-9) {
        return input("J grid must span at least 3 octaves or be {1}");
    }
    let degree = homogeneity_degree(spec);
    if homogeneous_mode && degree.is_none() {
        return input("homogeneous mode (J = {1}) needs a homogeneous symbol");
    }

    let mut measurements = omega_sweep(spec, js[0], &deltas, params)?;
    // no decay at the three smallest deltas of the best-resolved radius
    let hi = measurements[..3].iter().map(|m| m.measure).fold(0.0, f64::max);
    let lo = measurements[..3].iter().map(|m| m.measure).fold(f64::INFINITY, f64::min);
    if lo > 0.0 && (hi - lo) / hi < NO_DECAY_SPREAD {
        return Ok(DegeneracyReport { measurements, fit: DegeneracyFit::Profile(DegeneracyProfile::degenerate()) });
    }
    for &j in &js[1..] {
        measurements.extend(omega_sweep(spec, j, &deltas, params)?);
    }

    if measurements.iter().all(|m| m.count == 0) {
        return Ok(DegeneracyReport { measurements, fit: DegeneracyFit::TriviallyNonDegenerate });
    }

    let full = params.n_samples;
    let kept: Vec<&OmegaMeasurement> = measurements
        .iter()
        .filter(|m| m.count >= MIN_FIT_COUNT && m.count < full)
        .collect();
    let rows: Vec<Vec<f64>> = kept
        .iter()
        .map(|m| if homogeneous_mode { vec![m.delta.ln()] } else { vec![m.delta.ln(), m.j.ln()] })
        .collect();
    let y: Vec<f64> = kept.iter().map(|m| m.measure.ln()).collect();
    let needed = if homogeneous_mode { 3 } else { 4 };
    if kept.len() < needed {
        return Err(Error::InsufficientResolution { usable: kept.len(), needed });
    }
    let fit = trimmed_ols(&rows, &y, 0.1)?;
    let alpha = fit.slope(0);
    let alpha_stderr = fit.slope_stderr(0);
    let (beta, beta_stderr) = if homogeneous_mode {
        (degree.unwrap_or(1.0), 0.0)
    } else {
        let c = fit.slope(1);
        let beta = -c / alpha;
        let var = (c / (alpha * alpha)).powi(2) * fit.slope_covariance(0, 0)
            + fit.slope_covariance(1, 1) / (alpha * alpha)
            - 2.0 * c / alpha.powi(3) * fit.slope_covariance(0, 1);
        (beta, var.max(0.0).sqrt())
    };

    let lv: Vec<usize> = (0..kept.len()).filter(|&i| kept[i].sup_symbol_v > 0.0).collect();
    let (mu, mu_stderr, lambda, lambda_stderr) = if lv.len() >= needed {
        let rows_v: Vec<Vec<f64>> = lv.iter().map(|&i| rows[i].clone()).collect();
        let y_v: Vec<f64> = lv.iter().map(|&i| kept[i].sup_symbol_v.ln()).collect();
        let fit_v: LinearFit = trimmed_ols(&rows_v, &y_v, 0.1)?;
        let mu = fit_v.slope(0);
        if homogeneous_mode {
            (mu, fit_v.slope_stderr(0), 1.0 - mu, fit_v.slope_stderr(0))
        } else {
            (mu, fit_v.slope_stderr(0), fit_v.slope(1) / beta, fit_v.slope_stderr(1) / beta.abs())
        }
    } else {
        // L_v vanishes on every measured set
        (1.0, 0.0, 0.0, 0.0)
    };

    let used: Vec<&OmegaMeasurement> = fit.used.iter().map(|&i| kept[i]).collect();
    let span = |f: fn(&OmegaMeasurement) -> f64| {
        used.iter().map(|m| f(m)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
    };
    let profile = DegeneracyProfile {
        alpha: alpha.max(0.0),
        beta,
        mu: mu.clamp(0.0, 1.0),
        lambda: lambda.max(0.0),
        alpha_stderr,
        beta_stderr,
        mu_stderr,
        lambda_stderr,
        r_squared: fit.r_squared,
        status: ProfileStatus::NonDegenerate,
        fit_window: Some(FitWindow { delta_range: span(|m| m.delta), j_range: span(|m| m.j), points: used.len() }),
    };
    Ok(DegeneracyReport { measurements, fit: DegeneracyFit::Profile(profile) })
}

/// Exponent of a power-type velocity function (`v^l`, `sgn(v)|v|^l`, `|v|^l`).
fn power_exponent(f: &VelocityFunction) -> Option<f64> {
    if f.is_zero() {
        return None;
    }
    match f.kind {
        FluxKind::Power(l) | FluxKind::SignedPower(l) | FluxKind::AbsPower(l) => Some(l),
        _ => None,
    }
}

/// Diffusion exponent `n` for `b = c|v|^n` with `c > 0` (or `v^n`, `n` even).
fn diffusion_exponent(f: &VelocityFunction) -> Option<f64> {
    if f.scale <= 0.0 {
        return None;
    }
    match f.kind {
        FluxKind::AbsPower(n) => Some(n),
        FluxKind::Power(n) if (n as i64) % 2 == 0 => Some(n),
        _ => None,
    }
}

fn hyperbolic(ell: f64) -> DegeneracyProfile {
    DegeneracyProfile::exact(1.0 / ell, 1.0, 1.0 - 1.0 / ell, 1.0 / ell)
}

fn parabolic(n: f64) -> DegeneracyProfile {
    DegeneracyProfile::exact(1.0 / n, 2.0, 1.0 - 1.0 / n, 1.0 / n)
}

/// One-dimensional convection `v^l` with diffusion `|v|^n`, case by case in `n` vs `l`.
pub fn convection_diffusion_profile(ell: f64, n: f64) -> DegeneracyProfile {
    if n <= ell {
        parabolic(n)
    } else if n >= 2.0 * ell {
        hyperbolic(ell)
    } else {
        let zeta = n / ell - 1.0;
        let alpha = (1.0 - zeta) / ell + zeta / n;
        let beta_alpha = (1.0 - zeta) / ell + 2.0 * zeta / n;
        DegeneracyProfile::exact(alpha, beta_alpha / alpha, 1.0 - alpha, alpha)
    }
}

/// Closed-form profiles for the recognized example families; `None` when unrecognized.
pub fn analytic_profile(spec: &SymbolSpec) -> Option<DegeneracyProfile> {
    let conv = spec.convection();
    let diff = spec.diffusion();
    match spec.dim() {
        1 => {
            let a = power_exponent(&conv[0]);
            let b = diffusion_exponent(&diff[0][0]);
            match (spec.has_convection(), spec.has_diffusion()) {
                (true, false) => a.map(hyperbolic),
                (false, true) => b.map(parabolic),
                (true, true) => Some(convection_diffusion_profile(a?, b?)),
                (false, false) => None,
            }
        }
        _ => {
            let rank_one = !diff[0][0].is_zero()
                && diff[0][0] == diff[1][1]
                && (diff[0][1] == diff[0][0] || diff[0][1] == diff[0][0].clone().scaled(-1.0));
            match (spec.has_convection(), spec.has_diffusion()) {
                (true, false) => {
                    if matches!(conv[0].kind, FluxKind::Cos) && power_exponent(&conv[1]) == Some(2.0) {
                        return Some(hyperbolic(4.0));
                    }
                    let (l, m) = (power_exponent(&conv[0])?, power_exponent(&conv[1])?);
                    if l == m {
                        Some(DegeneracyProfile::degenerate())
                    } else {
                        Some(hyperbolic(l.max(m)))
                    }
                }
                (false, true) => {
                    if rank_one {
                        Some(DegeneracyProfile::degenerate())
                    } else if diff[0][1].is_zero() && diff[0][0] == diff[1][1] {
                        diffusion_exponent(&diff[0][0]).map(parabolic)
                    } else {
                        None
                    }
                }
                (true, true) => {
                    let anti = diff[0][1] == diff[0][0].clone().scaled(-1.0);
                    if !(rank_one && anti && conv[0] == conv[1]) {
                        return None;
                    }
                    let (l, n) = (power_exponent(&conv[0])?, diffusion_exponent(&diff[0][0])?);
                    if n >= 2.0 * l {
                        let mu = (l - 1.0) / n;
                        Some(DegeneracyProfile::exact(1.0 / n, 2.0, mu, 0.5 - mu))
                    } else {
                        let mu = (n - 1.0) / l;
                        Some(DegeneracyProfile::exact(1.0 / l, 1.0, mu, 2.0 - mu))
                    }
                }
                (false, false) => None,
            }
        }
    }
}
