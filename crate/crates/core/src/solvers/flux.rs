use super::Scheme;
use crate::lp::indicator;
use crate::symbol::VelocityFunction;

/// Two-point monotone flux `F(u, w)` for `A = int_0 a` along one axis.
#[derive(Debug, Clone)]
pub struct NumericalFlux {
    scheme: Scheme,
    a: VelocityFunction,
    /// Zeros of `a` inside the data range: interior extrema of `A`.
    crit: Vec<f64>,
    /// Max `|a|` over the data range (Lax-Friedrichs viscosity).
    speed: f64,
    /// Kinetic flux nodes `(v_k, a(v_k)^+ dv, a(v_k)^- dv)`.
    kinetic: Vec<(f64, f64, f64)>,
}

impl NumericalFlux {
    /// `range` must contain every state the scheme will see.
    pub fn new(scheme: Scheme, a: &VelocityFunction, range: (f64, f64)) -> Self {
        let (lo, hi) = range;
        let mut crit = a.zeros_in(lo, hi);
        crit.sort_by(f64::total_cmp);
        Self { scheme, a: a.clone(), crit, speed: a.max_abs_on(lo, hi), kinetic: Vec::new() }
    }

    /// Kinetic flux `sum_k dv (a_k^+ chi_u(v_k) + a_k^- chi_w(v_k))` on the velocity nodes.
    pub fn kinetic(a: &VelocityFunction, velocities: &[f64], dv: f64) -> Self {
        let kinetic = velocities
            .iter()
            .map(|&v| {
                let s = a.eval(v);
                (v, s.max(0.0) * dv, s.min(0.0) * dv)
            })
            .collect();
        let speed = velocities.iter().fold(0.0f64, |m, &v| m.max(a.eval(v).abs()));
        Self { scheme: Scheme::KineticBgk, a: a.clone(), crit: Vec::new(), speed, kinetic }
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    #[inline]
    pub fn physical(&self, u: f64) -> f64 {
        self.a.antiderivative(u)
    }

    /// `int_0^u max(a, 0)` (`positive`) or `int_0^u min(a, 0)`.
    fn signed_part(&self, u: f64, positive: bool) -> f64 {
        let (lo, hi, sign) = if u >= 0.0 { (0.0, u, 1.0) } else { (u, 0.0, -1.0) };
        let mut total = 0.0;
        let mut left = lo;
        let cuts = self.crit.iter().copied().filter(|&z| z > lo && z < hi).chain(std::iter::once(hi));
        for right in cuts {
            let mid = self.a.eval(0.5 * (left + right));
            if (mid > 0.0) == positive && mid != 0.0 {
                total += self.a.antiderivative(right) - self.a.antiderivative(left);
            }
            left = right;
        }
        sign * total
    }

    #[inline]
    pub fn eval(&self, u: f64, w: f64) -> f64 {
        match self.scheme {
            Scheme::Godunov => {
                let (fu, fw) = (self.physical(u), self.physical(w));
                let (lo, hi) = if u <= w { (u, w) } else { (w, u) };
                let mut best = if u <= w { fu.min(fw) } else { fu.max(fw) };
                for &z in &self.crit {
                    if z > lo && z < hi {
                        let fz = self.physical(z);
                        best = if u <= w { best.min(fz) } else { best.max(fz) };
                    }
                }
                best
            }
            Scheme::EngquistOsher => self.signed_part(u, true) + self.signed_part(w, false),
            Scheme::LaxFriedrichs => 0.5 * (self.physical(u) + self.physical(w)) - 0.5 * self.speed * (w - u),
            Scheme::KineticBgk => {
                self.kinetic.iter().map(|&(v, plus, minus)| plus * indicator(u, v) + minus * indicator(w, v)).sum()
            }
        }
    }
}
