mod common;

use common::T;
use diqkd_core::chsh::{
    phi_plus, table_from_state, werner, CorrelationTable, MeasurementSet, PairStats, PROTOCOL_PAIRS,
};
use diqkd_core::eve::build_attack;
use diqkd_core::protocol::{run_devices, run_protocol, symmetrization_effect_check, Devices, ProtocolConfig};
use diqkd_core::qmath::{c, DensityMatrix};

fn tv_bound(n: u64) -> f64 {
    let n = n as f64;
    5.0 * (n.ln() / n).sqrt()
}

/// `P'(a, b) = ½[P(a, b) + P(-a, -b)]`
fn flip_symmetrized(t: &CorrelationTable) -> CorrelationTable {
    let mut out = CorrelationTable::new();
    for (&(x, y), st) in t.pairs() {
        let p = st.probs;
        let q = [
            [0.5 * (p[0][0] + p[1][1]), 0.5 * (p[0][1] + p[1][0])],
            [0.5 * (p[1][0] + p[0][1]), 0.5 * (p[1][1] + p[0][0])],
        ];
        out.insert(x, y, PairStats { probs: q, counts: [[0; 2]; 2] }).unwrap();
    }
    out
}

#[test]
fn empirical_tables_converge_to_born_rule() {
    let attack = build_attack(2.7, 0.0).unwrap();
    let cases =
        [(werner(0.8).unwrap(), MeasurementSet::standard()), (attack.state.clone(), attack.measurements.clone())];
    for (rho, m) in cases {
        let exact = table_from_state(&rho, &m).unwrap();
        for n in [10_000u64, 100_000] {
            let off = ProtocolConfig { symmetrize_marginals: false, ..ProtocolConfig::new(n, 401) };
            let run = run_protocol(&rho, &m, &off).unwrap();
            assert!(run.table.max_tv_distance(&exact).unwrap() <= tv_bound(n));

            let run = run_protocol(&rho, &m, &ProtocolConfig::new(n, 402)).unwrap();
            assert!(run.table.max_tv_distance(&flip_symmetrized(&exact)).unwrap() <= tv_bound(n));
        }
    }
}

#[test]
fn expected_table_agrees_with_hand_computed_losses() {
    // Φ+ on (A0, B1): perfectly correlated, each side clicks with probability η
    let eta = 0.9;
    let devices = Devices::honest(phi_plus(), MeasurementSet::standard());
    let key = *devices.expected_table(eta, false).unwrap().require(0, 1).unwrap();
    let both = eta * eta;
    let one_lost = eta * (1.0 - eta);
    let lost = (1.0 - eta) * (1.0 - eta);
    assert!((key.probs[0][0] - 0.5 * both).abs() < 1e-14);
    assert!((key.probs[0][1] - 0.5 * one_lost).abs() < 1e-14);
    assert!((key.probs[1][0] - 0.5 * one_lost).abs() < 1e-14);
    assert!((key.probs[1][1] - (0.5 * both + one_lost + lost)).abs() < 1e-14);
}

#[test]
fn statistics_within_five_sigma() {
    let n = 100_000;
    let m = MeasurementSet::standard();
    let ideal = run_protocol(&phi_plus(), &m, &ProtocolConfig::new(n, 403)).unwrap();
    assert_eq!(ideal.q_hat(), 0.0);
    assert!((ideal.s_hat() - T).abs() <= 5.0 * ideal.sigma_s);
    assert!(ideal.s_hat() <= 4.0);

    let w = run_protocol(&werner(0.9).unwrap(), &m, &ProtocolConfig::new(n, 404)).unwrap();
    assert!((w.q_hat() - 0.05).abs() <= 5.0 * w.sigma_q);
    assert!((w.s_hat() - T * 0.9).abs() <= 5.0 * w.sigma_s);
}

#[test]
fn raw_outcomes_and_mapping() {
    let cfg = ProtocolConfig { eta: 0.8, ..ProtocolConfig::new(20_000, 405) };
    let run = run_protocol(&phi_plus(), &MeasurementSet::standard(), &cfg).unwrap();
    for r in &run.log.rounds {
        assert!([-1, 0, 1].contains(&r.a_raw) && [-1, 0, 1].contains(&r.b_raw));
        let sign = if r.flip { -1 } else { 1 };
        let map = |raw: i8| sign * if raw == 0 { -1 } else { raw };
        assert_eq!((r.a, r.b), (map(r.a_raw), map(r.b_raw)));
        assert!(PROTOCOL_PAIRS.contains(&(r.x, r.y)));
    }
    let misses = run.log.rounds.iter().filter(|r| r.a_raw == 0).count() as f64 / 20_000.0;
    assert!((misses - 0.2).abs() < 0.02);
}

#[test]
fn setting_fractions_are_respected() {
    let cfg = ProtocolConfig { key_fraction: 0.6, chsh_fractions: [0.1; 4], ..ProtocolConfig::new(50_000, 406) };
    let run = run_protocol(&phi_plus(), &MeasurementSet::standard(), &cfg).unwrap();
    let key = run.log.rounds.iter().filter(|r| (r.x, r.y) == (0, 1)).count() as f64 / 50_000.0;
    assert!((key - 0.6).abs() < 5.0 * (0.24f64 / 50_000.0).sqrt());
}

#[test]
fn symmetrization_removes_bias_without_touching_correlations() {
    let up = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
    let rho = DensityMatrix::mixture(&[(0.3, &up), (0.7, &werner(0.9).unwrap())]).unwrap();
    let n = 200_000u64;
    let check =
        symmetrization_effect_check(&Devices::honest(rho, MeasurementSet::standard()), &ProtocolConfig::new(n, 407))
            .unwrap();
    assert!(check.consistent(5.0));
    // each marginal rests on a fraction of the rounds
    let per_setting = n as f64 * 0.25;
    assert!(check.on.max_marginal_bias() <= 5.0 / per_setting.sqrt());
    assert!(check.off.max_marginal_bias() > 0.1);

    let sym = symmetrization_effect_check(
        &Devices::honest(phi_plus(), MeasurementSet::standard()),
        &ProtocolConfig::new(n, 408),
    )
    .unwrap();
    assert!(sym.off.max_marginal_bias() <= 5.0 / per_setting.sqrt());
}

#[test]
fn logs_are_reproducible() {
    let attack = build_attack(2.6, 0.02).unwrap();
    let devices = Devices::from_attack(&attack);
    let cfg = ProtocolConfig { eta: 0.95, ..ProtocolConfig::new(30_000, 409) };
    let a = run_devices(&devices, &cfg).unwrap().log.to_csv();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| run_devices(&devices, &cfg).unwrap().log.to_csv());
    assert_eq!(a, b);
    let other = run_devices(&devices, &ProtocolConfig { seed: 410, ..cfg }).unwrap().log.to_csv();
    assert_ne!(a, other);
}
