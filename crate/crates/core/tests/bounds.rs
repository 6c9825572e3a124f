mod common;

use common::{bisect, f_oracle, h2, rate_di, rate_standard, T};
use diqkd_core::bounds::{
    curve, detection_efficiency_threshold, detection_statistics, first_zero_crossing, holevo_bound_di,
    holevo_bound_standard, keyrate, partial_knowledge_bound, qber_threshold, werner_line, Scenario, Sweep,
};
use diqkd_core::Error;
use proptest::prelude::*;

#[test]
fn qber_thresholds_match_oracle() {
    let di = qber_threshold(Scenario::DeviceIndependent, werner_line).unwrap();
    let st = qber_threshold(Scenario::Standard, werner_line).unwrap();
    let di_ref = bisect(|q| rate_di(q, T * (1.0 - 2.0 * q)), 0.01, 0.2);
    let st_ref = bisect(|q| rate_standard(q, T * (1.0 - 2.0 * q)), 0.01, 0.2);
    assert!((di - di_ref).abs() < 2e-6, "{di} vs {di_ref}");
    assert!((st - st_ref).abs() < 2e-6, "{st} vs {st_ref}");
    assert!((di - 0.071).abs() <= 1e-3);
    assert!((st - 0.110).abs() <= 1e-3);
}

#[test]
fn detection_threshold_matches_oracle() {
    let eta = detection_efficiency_threshold().unwrap();
    let r = |e: f64| rate_di(e * (1.0 - e), T * e * e + 2.0 * (1.0 - e) * (1.0 - e));
    let reference = bisect(r, 0.9, 1.0);
    assert!((eta - reference).abs() < 2e-6, "{eta} vs {reference}");
    assert!((eta - 0.924).abs() <= 1e-3);
}

#[test]
fn curves_cross_zero_where_the_root_finder_does() {
    let rows = curve(Sweep::WernerLine(Scenario::DeviceIndependent), (0.0, 0.12), 1200).unwrap();
    assert_eq!(rows.len(), 1201);
    assert!((rows[0].rate - 1.0).abs() < 1e-12);
    let x = first_zero_crossing(&rows).unwrap();
    assert!((x - qber_threshold(Scenario::DeviceIndependent, werner_line).unwrap()).abs() < 1e-5);

    let det = curve(Sweep::DetectionEfficiency, (0.9, 1.0), 1000).unwrap();
    assert!((det.last().unwrap().rate - 1.0).abs() < 1e-12);
    assert!((first_zero_crossing(&det).unwrap() - detection_efficiency_threshold().unwrap()).abs() < 1e-5);
}

#[test]
fn bound_endpoints() {
    assert!(holevo_bound_di(T).unwrap().abs() <= 1e-12);
    assert_eq!(holevo_bound_di(2.0).unwrap(), 1.0);
    let q = 2f64.sqrt() - 1.0;
    assert!((partial_knowledge_bound(q, T).unwrap() - 1.0).abs() <= 1e-9);
    assert_eq!(partial_knowledge_bound(0.5, T).unwrap(), 1.0);
}

#[test]
fn partial_knowledge_rejects_impossible_statistics() {
    // S' = (2.85 - 0.04)/0.99 > 2√2 cannot come from quantum rounds
    assert!(matches!(partial_knowledge_bound(0.01, 2.85), Err(Error::Inconsistent(_))));
    assert!(partial_knowledge_bound(1.0, 2.5).is_err());
}

#[test]
fn detection_statistics_closed_forms() {
    for eta in [0.8, 0.924, 0.95, 1.0] {
        let (q, s) = detection_statistics(eta).unwrap();
        assert!((q - eta * (1.0 - eta)).abs() < 1e-15);
        assert!((s - (T * eta * eta + 2.0 * (1.0 - eta).powi(2))).abs() < 1e-14);
    }
}

proptest! {
    #[test]
    fn di_bound_matches_oracle(s in 0.0..T) {
        prop_assert!((holevo_bound_di(s).unwrap() - f_oracle(s)).abs() <= 1e-12);
    }

    #[test]
    fn di_bound_decreasing_and_concave(a in 2.0..T, b in 2.0..T) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (fl, fh) = (holevo_bound_di(lo).unwrap(), holevo_bound_di(hi).unwrap());
        prop_assert!(fh <= fl + 1e-15);
        let mid = holevo_bound_di(0.5 * (lo + hi)).unwrap();
        prop_assert!(mid >= 0.5 * (fl + fh) - 1e-12);
    }

    #[test]
    fn keyrate_is_mutual_information_minus_bound(q in 0.0..0.5f64, s in 0.0..T) {
        let r = keyrate(q, s, Scenario::DeviceIndependent).unwrap();
        prop_assert!((r.i_ab - (1.0 - h2(q))).abs() <= 1e-12);
        prop_assert!((r.r_dw - rate_di(q, s)).abs() <= 1e-12);
        prop_assert!(r.r_dw <= 1.0 + 1e-15);
    }

    #[test]
    fn standard_bound_below_device_independent_on_werner_line(q in 0.0..0.25f64) {
        let s = werner_line(q);
        let st = holevo_bound_standard(q, s).unwrap();
        prop_assert!((st - h2(q + s / T)).abs() <= 1e-12);
        prop_assert!(st <= holevo_bound_di(s).unwrap() + 1e-12);
    }

    #[test]
    fn partial_knowledge_interpolates(q in 0.0..0.4f64, s in 2.0..T) {
        let s_prime = (s - 4.0 * q) / (1.0 - q);
        prop_assume!(s_prime <= T);
        let chi = partial_knowledge_bound(q, s).unwrap();
        let expected = if s_prime <= 2.0 { 1.0 } else { (q + (1.0 - q) * f_oracle(s_prime)).min(1.0) };
        prop_assert!((chi - expected).abs() <= 1e-12);
        prop_assert!(chi >= holevo_bound_di(s).unwrap() - 1e-12);
    }
}
