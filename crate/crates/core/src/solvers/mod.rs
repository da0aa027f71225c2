//! Explicit finite-volume solvers on periodic grids, the kinetic BGK scheme, the discrete
//! Kruzkov entropy defect, and a pseudo-time solver for degenerate elliptic problems.
//!
//! Fluxes come from a `SymbolSpec`: `A_j(rho) = int_0^rho a_j` and `B_jk(rho) = int_0^rho b_jk`.

mod bgk;
mod elliptic;
mod entropy;
mod evolve;
mod flux;
pub mod initial;

pub use bgk::solve_kinetic_bgk;
pub use elliptic::{solve_elliptic_degenerate, EllipticOptions, EllipticSolution};
pub use entropy::{entropy_production, kruzkov_grid, EntropyProductionField, KRUZKOV_POINTS};
pub use evolve::{solve_conservation_law, solve_convection_diffusion};
pub use flux::NumericalFlux;

use std::fmt;
use std::path::Path;

use crate::error::{input, Error, Result};
use crate::lp::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Godunov,
    EngquistOsher,
    LaxFriedrichs,
    KineticBgk,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "godunov" => Ok(Self::Godunov),
            "engquist-osher" => Ok(Self::EngquistOsher),
            "lax-friedrichs" => Ok(Self::LaxFriedrichs),
            "kinetic-bgk" => Ok(Self::KineticBgk),
            other => input(format!("unknown scheme {other}")),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Godunov => "godunov",
            Self::EngquistOsher => "engquist-osher",
            Self::LaxFriedrichs => "lax-friedrichs",
            Self::KineticBgk => "kinetic-bgk",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgkParams {
    /// Velocity nodes.
    pub m: usize,
    /// Relaxation time; the projection is instantaneous, so only `epsilon <= dt` is checked.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub cfl: f64,
    pub diffusion_cfl: f64,
    pub end_time: f64,
    /// Fixed step; must respect the stability bound. `None` picks the largest uniform step.
    pub dt: Option<f64>,
    /// Extra snapshot times (t = 0 and t = T are always stored).
    pub snapshot_times: Vec<f64>,
    /// Also store every k-th step.
    pub record_every: Option<usize>,
    pub bgk: Option<BgkParams>,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, end_time: f64) -> Self {
        Self {
            scheme,
            cfl: 0.45,
            diffusion_cfl: 0.2,
            end_time,
            dt: None,
            snapshot_times: Vec::new(),
            record_every: None,
            bgk: None,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return input("cfl must lie in (0, 1)");
        }
        if !(self.diffusion_cfl > 0.0 && self.diffusion_cfl <= 0.5) {
            return input("diffusion_cfl must lie in (0, 0.5]");
        }
        if !(self.end_time > 0.0 && self.end_time.is_finite()) {
            return input("end time must be positive");
        }
        if self.record_every == Some(0) {
            return input("record_every must be positive");
        }
        Ok(())
    }

    /// Uniform step count and size under the bound `dt_max`.
    pub(crate) fn steps(&self, dt_max: f64) -> Result<(usize, f64)> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return input("dt must be positive");
            }
            if dt > dt_max * (1.0 + 1e-12) {
                return Err(Error::Cfl { requested: dt, required: dt_max });
            }
            let steps = (self.end_time / dt).round().max(1.0) as usize;
            return Ok((steps, dt));
        }
        let steps = if dt_max.is_finite() { (self.end_time / dt_max).ceil().max(1.0) as usize } else { 1 };
        Ok((steps, self.end_time / steps as f64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<(f64, ScalarField)>,
    pub conserved_mass: Vec<f64>,
    pub scheme: Scheme,
    pub dt: f64,
    pub steps: usize,
    /// Steps between consecutive stored snapshots, when every stored snapshot is
    /// on a fixed stride.
    pub stride: Option<usize>,
}

impl Trajectory {
    pub fn last(&self) -> &ScalarField {
        &self.snapshots.last().expect("trajectory holds the initial snapshot").1
    }

    /// Snapshot closest to time `t`.
    pub fn at(&self, t: f64) -> &ScalarField {
        &self
            .snapshots
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .expect("trajectory holds the initial snapshot")
            .1
    }

    /// One field file per snapshot plus `index.csv` with `t, filename, mass`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut index = String::from("t,filename,mass\n");
        for (k, ((t, field), mass)) in self.snapshots.iter().zip(&self.conserved_mass).enumerate() {
            let name = format!("snapshot_{k:04}.txt");
            field.write(&dir.join(&name))?;
            index.push_str(&format!("{t},{name},{mass}\n"));
        }
        std::fs::write(dir.join("index.csv"), index)?;
        Ok(())
    }
}

/// Records snapshots while stepping.
pub(crate) struct Recorder {
    times: Vec<f64>,
    next: usize,
    every: Option<usize>,
    snapshots: Vec<(f64, ScalarField)>,
    masses: Vec<f64>,
}

impl Recorder {
    pub(crate) fn new(cfg: &SchemeConfig, initial: &ScalarField) -> Self {
        let mut times: Vec<f64> = cfg.snapshot_times.iter().copied().filter(|&t| t > 0.0 && t < cfg.end_time).collect();
        times.sort_by(f64::total_cmp);
        Self {
            times,
            next: 0,
            every: cfg.record_every,
            snapshots: vec![(0.0, initial.clone())],
            masses: vec![initial.integral()],
        }
    }

    pub(crate) fn wants(&self, step: usize, steps: usize, dt: f64) -> bool {
        let t = step as f64 * dt;
        step == steps
            || self.every.is_some_and(|k| step % k == 0)
            || (self.next < self.times.len() && t >= self.times[self.next] - 1e-9 * dt)
    }

    pub(crate) fn push(&mut self, step: usize, dt: f64, field: ScalarField) {
        let t = step as f64 * dt;
        while self.next < self.times.len() && t >= self.times[self.next] - 1e-9 * dt {
            self.next += 1;
        }
        self.masses.push(field.integral());
        self.snapshots.push((t, field));
    }

    pub(crate) fn finish(self, scheme: Scheme, dt: f64, steps: usize) -> Trajectory {
        let stride = match self.every {
            Some(k) if self.times.is_empty() && steps % k == 0 => Some(k),
            _ => None,
        };
        Trajectory { snapshots: self.snapshots, conserved_mass: self.masses, scheme, dt, steps, stride }
    }
}
