use std::f64::consts::PI;

use proptest::collection::vec;
use proptest::prelude::*;
use velavg::lp::*;
use velavg::symbol::library::burgers;

fn field_1d() -> impl Strategy<Value = ScalarField> {
    (prop_oneof![Just(64usize), Just(128), Just(256)], 0.5f64..4.0).prop_flat_map(|(n, l)| {
        vec(-1.0f64..1.0, n).prop_map(move |v| ScalarField::new(vec![n], l, v, "rand").unwrap())
    })
}

fn field_2d() -> impl Strategy<Value = ScalarField> {
    vec(-1.0f64..1.0, 64 * 64).prop_map(|v| ScalarField::new(vec![64, 64], 1.0, v, "rand").unwrap())
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn reconstruction_error(f: &ScalarField) -> f64 {
    let d = lp_decompose(f, 20).unwrap();
    let mut sum = vec![0.0; f.len()];
    for b in &d.blocks {
        for (s, x) in sum.iter_mut().zip(b.values()) {
            *s += x;
        }
    }
    let diff: Vec<f64> = sum.iter().zip(f.values()).map(|(a, b)| a - b).collect();
    max_abs(&diff) / max_abs(f.values()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partition_sums_to_one(r in 0.0f64..5000.0, j_max in 1usize..14) {
        let total: f64 = (0..=j_max).map(|j| partition_weight(j, j_max, r)).sum();
        prop_assert!((total - 1.0).abs() < 1e-14);
        prop_assert!((0..=j_max).all(|j| (-1e-15..=1.0 + 1e-15).contains(&partition_weight(j, j_max, r))));
    }

    #[test]
    fn blocks_reconstruct_1d(f in field_1d()) {
        prop_assert!(reconstruction_error(&f) < 1e-10);
    }

    #[test]
    fn blocks_reconstruct_2d(f in field_2d()) {
        prop_assert!(reconstruction_error(&f) < 1e-10);
    }

    #[test]
    fn estimate_ignores_shift_and_amplitude(s in 0.2f64..0.9, shift in 0isize..1024, amp in 0.01f64..100.0) {
        let f = lacunary(1024, s, 0, 9).unwrap();
        let g = f.shifted(&[shift]);
        let h = f.with_values(f.values().iter().map(|x| amp * x).collect());
        for method in [Method::LittlewoodPaley, Method::Increments] {
            let a = estimate_regularity(&f, 1.0, None, method).unwrap().s_star;
            prop_assert!((a - estimate_regularity(&g, 1.0, None, method).unwrap().s_star).abs() < 1e-9);
            prop_assert!((a - estimate_regularity(&h, 1.0, None, method).unwrap().s_star).abs() < 1e-9);
        }
    }

    #[test]
    fn text_roundtrip(f in field_1d()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.txt");
        f.write(&path).unwrap();
        prop_assert_eq!(ScalarField::read(&path).unwrap(), f);
    }

    #[test]
    fn indicator_moment_is_the_density(rho in vec(-1.0f64..1.0, 64)) {
        let m = 2001;
        let vs: Vec<f64> = (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect();
        let f = ScalarField::new(vec![64], 1.0, rho.clone(), "rho").unwrap();
        let chi = XVField::indicator(&f, vs).unwrap();
        let avg = chi.average(|_| 1.0);
        for (a, r) in avg.values().iter().zip(&rho) {
            prop_assert!((a - r).abs() <= 2.0 * chi.dv());
        }
    }
}

#[test]
fn methods_agree_on_lacunary_family() {
    for s in [0.3, 0.5, 0.7] {
        let f = lacunary(1 << 13, s, 0, 12).unwrap();
        let lp = estimate_regularity(&f, 1.0, None, Method::LittlewoodPaley).unwrap();
        let inc = estimate_regularity(&f, 1.0, None, Method::Increments).unwrap();
        assert!((lp.s_star - s).abs() < 0.05, "lp {} for s = {s}", lp.s_star);
        assert!((lp.s_star - inc.s_star).abs() < 0.1, "lp {} inc {} for s = {s}", lp.s_star, inc.s_star);
    }
}

#[test]
fn smooth_fields_hit_the_cap() {
    let g = ScalarField::from_fn(vec![4096], 1.0, "g", |x| (2.0 * PI * x[0]).sin()).unwrap();
    let e = estimate_regularity(&g, 1.0, None, Method::LittlewoodPaley).unwrap();
    assert_eq!(e.s_star, S_CAP);
    assert!(e.has_flag(EstimateFlag::Smooth) && e.has_flag(EstimateFlag::BvOrBetter));
}

#[test]
fn estimator_rejects_bad_input() {
    let small = ScalarField::new(vec![16], 1.0, vec![0.0; 16], "tiny").unwrap();
    assert!(estimate_regularity(&small, 1.0, None, Method::LittlewoodPaley).is_err());
    let f = lacunary(256, 0.5, 0, 7).unwrap();
    assert!(estimate_regularity(&f, 0.5, None, Method::LittlewoodPaley).is_err());
    assert!(ScalarField::from_text("# L=1\n1\n2\n").is_err());
    assert!(Method::parse("wavelets").is_err());
}

#[test]
fn averaged_multiplier_ratio_is_stable() {
    let spec = burgers(1.0, (-1.0, 1.0)).unwrap();
    let vel: Vec<f64> = (0..512).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / 512.0).collect();
    let battery = multiplier_battery(&[64], 2.0 * PI, &vel, 4, 4, 3).unwrap();
    let deltas: Vec<f64> = (3..=6).map(|k| 2f64.powi(-k)).collect();
    let rows = verify_averaged_multiplier(&battery, &spec, &deltas, 2.0, &|_| 1.0, Bump::Disc).unwrap();
    let again = verify_averaged_multiplier(&battery, &spec, &deltas, 2.0, &|_| 1.0, Bump::Disc).unwrap();
    assert_eq!(rows, again);
    let ratios: Vec<f64> = rows.iter().map(|r| r.max_ratio).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(lo > 0.0 && hi / lo < 2.0, "{ratios:?}");
    let norms = truncation_kernel_norms(&spec, 0.5, &deltas, &[64], 2.0 * PI, Bump::Disc).unwrap();
    assert!(norms.iter().all(|(_, n)| n.is_finite() && *n > 0.0));
}
