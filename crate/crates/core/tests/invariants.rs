use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use qpsc_core::arithmetic::{beta, delta_index, ContinuedFraction, DeltaOptions, TorusPoint};
use qpsc_core::cocycle::{lyapunov, product, CocycleKind, LyapunovOptions};
use qpsc_core::gordon::{exclusion_certificate, CertificateOptions, Verdict};
use qpsc_core::num::Phase;
use qpsc_core::potential::{make_amo, make_maryland};
use qpsc_core::spectral::{count_below, eigenvalues, label_energy, RegimeLabel};

fn coefficients() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..12, 8..24)
}

/// Sign changes of `p_k(x) = (d_{k−1} − x) p_{k−1} − p_{k−2}`.
fn sign_changes(diag: &[f64], x: f64) -> usize {
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    let mut changes = 0;
    for &d in diag {
        let next = (d - x) * cur - prev;
        if next.signum() != cur.signum() {
            changes += 1;
        }
        (prev, cur) = (cur, next);
    }
    changes
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn approximation_bounds_from_level_one(a in coefficients()) {
        let cf = ContinuedFraction::from_u64s(&a).unwrap();
        for n in 1..cf.depth() {
            prop_assert_eq!(cf.approximation_bounds_hold(n), Some(true), "n = {}", n);
        }
        prop_assert_eq!(cf.approximation_bounds_hold(0), Some(a[0] >= 2));
        prop_assert_eq!(cf.approximation_bounds_hold(cf.depth()), None);
    }

    #[test]
    fn best_approximation(a in prop::collection::vec(1u64..6, 4..9)) {
        let cf = ContinuedFraction::from_u64s(&a).unwrap();
        for n in 0..cf.depth() - 1 {
            let q = cf.q_u64(n).unwrap();
            let best = cf.torus_norm_of_multiple(&BigInt::from(q));
            for k in 1..cf.q_u64(n + 1).unwrap() {
                prop_assert!(cf.torus_norm_of_multiple(&BigInt::from(k)) >= best, "n = {}, k = {}", n, k);
            }
        }
    }

    #[test]
    fn delta_without_poles_is_beta(a in coefficients(), num in 1i64..1000) {
        let cf = ContinuedFraction::from_u64s(&a).unwrap();
        let theta = TorusPoint::exact(BigRational::new(num.into(), 1009.into()));
        let d = delta_index(&cf, &theta, &[], DeltaOptions::default()).unwrap();
        let b = beta(&cf).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&d.per_level), bits(&b.per_level));
    }

    #[test]
    fn unimodular_products(n in 1i64..400, x in 0.0f64..1.0, e in -4.0f64..4.0, lambda in 0.1f64..3.0) {
        let freq = ContinuedFraction::golden(30).frequency();
        for pot in [make_amo(lambda), make_maryland(lambda).unwrap()] {
            let t = product(&pot, e, Phase::from_f64(x), &freq, n, CocycleKind::A).unwrap();
            prop_assert!(t.det_relative_error() <= 1e-9);
            prop_assert!(t.ln_norm() >= -1e-12);
        }
    }

    #[test]
    fn sturm_count_matches_sign_changes(diag in prop::collection::vec(-4.0f64..4.0, 2..40), x in -6.0f64..6.0) {
        prop_assert_eq!(count_below(&diag, x), sign_changes(&diag, x));
        let ev = eigenvalues(&diag);
        if ev.iter().all(|e| (e - x).abs() > 1e-8) {
            prop_assert_eq!(ev.iter().filter(|&&e| e < x).count(), count_below(&diag, x));
        }
    }

    #[test]
    fn labels_move_through_uncertain(l in 0.0f64..2.0, lower in 0.0f64..2.0, width in 0.0f64..0.5, u in 0.0f64..1.0, du in 0.0f64..1.0) {
        let upper = lower + width;
        let a = label_energy(l, u, lower, upper);
        let b = label_energy(l, u + du, lower, upper);
        prop_assert!(a == b || b == RegimeLabel::Uncertain, "{:?} -> {:?}", a, b);
    }
}

#[test]
fn lyapunov_is_nonnegative_on_a_grid() {
    let freq = ContinuedFraction::golden(30).frequency();
    let opts = LyapunovOptions {
        n: 2000,
        phases: 8,
        kind: CocycleKind::A,
        ..Default::default()
    };
    for i in 0..16 {
        let e = -3.0 + 0.4 * i as f64;
        let l = lyapunov(&make_amo(2.0), e, &freq, &opts).unwrap();
        assert!(l.value >= -1e-9, "E = {e}: {}", l.value);
    }
}

#[test]
fn periodic_frequency_clears_the_threshold_in_every_direction() {
    let cf = ContinuedFraction::from_u64s(&[2, 1, 2]).unwrap();
    let opts = CertificateOptions {
        directions: 1000,
        contracted: false,
        ..Default::default()
    };
    for (e, x) in [(0.3, 0.2134), (-1.1, 0.77), (1.9, 0.05)] {
        let r = exclusion_certificate(&make_amo(0.8), e, Phase::from_f64(x), &cf, &[3], 0.01, &opts).unwrap();
        let cert = &r.levels[0];
        assert_eq!(cert.q, 8);
        assert_eq!(cert.ln_lhs_inverse, f64::NEG_INFINITY);
        assert_eq!(cert.ln_lhs_square, f64::NEG_INFINITY);
        assert!(cert.directions.iter().all(|d| d.max_norm >= 0.25 - 1e-6));
        assert_eq!(r.verdict, Verdict::Excluded);
    }
}

#[test]
fn maryland_pole_matches_the_closed_form_sequence() {
    let cf = ContinuedFraction::golden(30);
    let poles = make_maryland(0.5).unwrap().poles().to_vec();
    let d = delta_index(&cf, &TorusPoint::ratio(1, 3), &poles, DeltaOptions::default()).unwrap();
    for (n, got) in d.per_level.iter().enumerate() {
        let (q, q1) = (cf.q_u64(n).unwrap(), cf.q_u64(n + 1).unwrap());
        // ‖q(1/3 − 1/2)‖ = ‖q/6‖.
        let r = (q % 6) as f64 / 6.0;
        let want = (r.min(1.0 - r).ln() + (q1 as f64).ln()) / q as f64;
        if want.is_finite() {
            assert!((got - want).abs() <= 1e-12, "level {n}: {got} vs {want}");
        } else {
            assert_eq!(*got, want);
        }
    }
}
