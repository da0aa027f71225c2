use proptest::prelude::*;
use velavg::degeneracy::*;
use velavg::symbol::library::*;
use velavg::symbol::FrequencyPoint;

const SAMPLES: usize = 1 << 14;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measure_grows_with_delta(ell in 1u32..4, tau in -1.0f64..1.0, xi in -1.0f64..1.0, d0 in 1e-4f64..0.5, r in 1.0f64..4.0) {
        prop_assume!(tau.abs() + xi.abs() > 1e-3);
        let spec = burgers(ell as f64, (-1.0, 1.0)).unwrap();
        let fp = FrequencyPoint::new(tau, vec![xi]).unwrap();
        let a = omega_set_measure(&spec, &fp, d0, SAMPLES).unwrap();
        let b = omega_set_measure(&spec, &fp, d0 * r, SAMPLES).unwrap();
        prop_assert!(a <= b);
        prop_assert!(a >= 0.0 && b <= 2.0 + 1e-12);
    }

    #[test]
    fn diffusion_set_is_a_power_of_delta(n in 1.0f64..4.0, delta in 1e-3f64..0.5) {
        let spec = porous(n, (-1.0, 1.0)).unwrap();
        let m = omega_set_measure(&spec, &FrequencyPoint::spatial(vec![1.0]).unwrap(), delta, SAMPLES).unwrap();
        let exact = (2.0 * delta.powf(1.0 / n)).min(2.0);
        prop_assert!((m - exact).abs() <= 2.0 * 2.0 / SAMPLES as f64);
    }

    #[test]
    fn measure_is_even_in_frequency(tau in -1.0f64..1.0, xi in -1.0f64..1.0, delta in 1e-3f64..0.5) {
        prop_assume!(tau.abs() + xi.abs() > 1e-3);
        let spec = convection_diffusion(1.0, 2.0, (-1.0, 1.0)).unwrap();
        let m = |t: f64, x: f64| omega_set_measure(&spec, &FrequencyPoint::new(t, vec![x]).unwrap(), delta, SAMPLES).unwrap();
        prop_assert_eq!(m(tau, xi), m(-tau, -xi));
    }
}

#[test]
fn small_fit_recovers_burgers_order() {
    let params = SamplingParams { n_samples: SAMPLES, sphere_samples: 128, ..SamplingParams::default() };
    let report = fit_degeneracy(&burgers(2.0, (-1.0, 1.0)).unwrap(), &dyadic_grid(-10, -3), &dyadic_grid(0, 3), &params).unwrap();
    let p = report.fit.profile().unwrap();
    assert!(!p.degenerate_flag());
    assert!((p.alpha - 0.5).abs() < 0.05, "alpha = {}", p.alpha);
    assert!((p.mu - 0.5).abs() < 0.07, "mu = {}", p.mu);
    let again = fit_degeneracy(&burgers(2.0, (-1.0, 1.0)).unwrap(), &dyadic_grid(-10, -3), &dyadic_grid(0, 3), &params).unwrap();
    assert_eq!(report.to_csv(1), again.to_csv(1));
}

#[test]
fn degenerate_flux_pair_is_flagged() {
    let params = SamplingParams { n_samples: 4096, sphere_samples: 128, ..SamplingParams::default() };
    let report = fit_degeneracy(&twod_flux(2.0, 2.0, (-1.0, 1.0)).unwrap(), &dyadic_grid(-9, -3), &dyadic_grid(0, 3), &params).unwrap();
    assert!(report.fit.profile().unwrap().degenerate_flag());
    assert!(report.measurements.iter().all(|m| m.measure > 1.9));
}

#[test]
fn bad_grids_are_rejected() {
    let spec = burgers(1.0, (-1.0, 1.0)).unwrap();
    let params = SamplingParams::default();
    assert!(fit_degeneracy(&spec, &[], &[1.0], &params).is_err());
    assert!(fit_degeneracy(&spec, &[1e-2, 1e-3], &[1.0], &params).is_err());
    assert!(omega_sweep(&spec, -1.0, &[1e-2], &params).is_err());
}
