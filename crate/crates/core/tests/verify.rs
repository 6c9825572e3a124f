mod common;

use std::f64::consts::{FRAC_PI_4, PI};

use common::{h2, shannon};
use diqkd_core::chsh::{chsh_max_horodecki, to_bell_basis};
use diqkd_core::sampling::{indexed_rng, random_density_matrix};
use diqkd_core::verify::{
    blocks_sweep, decompose_observable_pair, delta_star_maximality_check, lemma5_bound, lemma5_f,
    lemma5_inequality_sweep, r_squared, random_block_pair, reduction_sweep, symmetrize_to_belldiag, theorem1_sweep,
    BlockForm, Report,
};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn block_decomposition_round_trip() {
    for i in 0..100 {
        let mut rng = indexed_rng(301, i);
        let two = rng.random_range(1..=4);
        let (pair, expected) = random_block_pair(two, 8 - 2 * two, &mut rng);
        let d = decompose_observable_pair(&pair).unwrap();
        assert!(d.residual(&pair) <= 1e-10);
        assert_eq!(d.block_count(), expected);
        assert_eq!(d.blocks.iter().filter(|b| matches!(b.form, BlockForm::Two { .. })).count(), two);
    }
}

#[test]
fn qubit_blocks_have_the_stated_form() {
    let mut rng = indexed_rng(302, 0);
    let (pair, _) = random_block_pair(3, 2, &mut rng);
    let d = decompose_observable_pair(&pair).unwrap();
    for b in &d.blocks {
        if let BlockForm::Two { a1, a2 } = b.form {
            // A2 along x, A1 in the (x, y) plane, both unit
            assert!((a2[0] - 1.0).abs() < 1e-10 && a2[1].abs() < 1e-10 && a2[2].abs() < 1e-10);
            assert!(a1[2].abs() < 1e-10 && (a1[0].hypot(a1[1]) - 1.0).abs() < 1e-10);
            assert!(a1[1] > 0.0);
        }
    }
}

#[test]
fn entropy_gap_matches_independent_entropies() {
    for i in 0..2000 {
        let mut rng = indexed_rng(303, i);
        let l = diqkd_core::sampling::random_ordered_bell_diagonal(&mut rng).lambda();
        let f = shannon(&l) - h2(l[0] + l[2]);
        assert!((lemma5_f(l) - f).abs() < 1e-12);
        let r2 = (l[0] - l[1]).powi(2) + (l[2] - l[3]).powi(2);
        assert!((r_squared(l) - r2).abs() < 1e-15);
        let g = if r2 > 0.5 { h2((1.0 + (2.0 * r2 - 1.0).sqrt()) / 2.0) } else { 1.0 };
        assert!((lemma5_bound(r2) - g).abs() < 1e-12);
        assert!(f <= g + 1e-9);
    }
}

#[test]
fn delta_star_beats_a_scan_of_the_feasible_interval() {
    let mut rng = indexed_rng(304, 0);
    let mut checked = 0;
    while checked < 200 {
        let theta = rng.random_range(0.0..2.0 * PI);
        let reach = 1.0 / (theta.cos().abs() + theta.sin().abs());
        let r = rng.random_range(0.0..reach);
        let check = delta_star_maximality_check(r, theta).unwrap();
        if check.at_edge() {
            continue;
        }
        let (s, c) = theta.sin_cos();
        // all four weights non-negative
        let lo = (-(0.25 + r / 2.0 * c)).max(-(0.25 - r / 2.0 * c));
        let hi = (0.25 + r / 2.0 * s).min(0.25 - r / 2.0 * s);
        let scan = (0..=2000)
            .map(|k| {
                let d = lo + (hi - lo) * k as f64 / 2000.0;
                let l =
                    [0.25 + r / 2.0 * c + d, 0.25 - r / 2.0 * c + d, 0.25 + r / 2.0 * s - d, 0.25 - r / 2.0 * s - d];
                lemma5_f(l.map(|x| x.max(0.0)))
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(check.f_value >= scan - 1e-9, "R={r} θ={theta}: {} < {scan}", check.f_value);
        assert!(check.report().is_clean(), "{}", check.report().to_csv());
        checked += 1;
    }
    assert!(delta_star_maximality_check(0.5, FRAC_PI_4).unwrap().derivative.unwrap().abs() < 1e-8);
}

#[test]
fn reduction_keeps_the_state_inside_the_local_orbit() {
    for i in 0..200 {
        let rho = random_density_matrix(4, 1 + (i % 4) as usize, &mut indexed_rng(305, i));
        let t = symmetrize_to_belldiag(&rho).unwrap();
        assert!(t.lambda.is_ordered());
        // the rotation and relabeling are local unitaries: CHSH maximum preserved
        let before = chsh_max_horodecki(&t.averaged).unwrap().s_max;
        let after = chsh_max_horodecki(&t.output).unwrap().s_max;
        assert!((before - after).abs() < 1e-10);
        let b = to_bell_basis(t.output.matrix());
        for k in 0..4 {
            assert!((b[(k, k)].re - t.lambda.lambda()[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn sweeps_are_clean_and_independent_of_thread_count() {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let run = || -> Vec<Report> {
        vec![
            lemma5_inequality_sweep(5000, 7).unwrap(),
            theorem1_sweep(500, 8, 7).unwrap(),
            blocks_sweep(50, 7).unwrap(),
            reduction_sweep(200, 7).unwrap(),
        ]
    };
    let (a, b) = (one.install(run), many.install(run));
    assert_eq!(a, b);
    for r in &a {
        assert!(r.is_clean(), "{}", r.to_csv());
        assert_eq!(r.to_csv(), "check,param_json,value,bound,margin\n");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reduction_of_random_states(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_density_matrix(4, rank, &mut indexed_rng(seed, 0));
        let t = symmetrize_to_belldiag(&rho).unwrap();
        prop_assert!(t.off_diagonal_defect() <= 1e-10);
        prop_assert!(t.lambda.is_ordered());
    }

    #[test]
    fn blocks_of_any_mix(seed in any::<u64>(), two in 0usize..=4, extra in 0usize..=2) {
        let mut rng = indexed_rng(seed, 0);
        let (pair, expected) = random_block_pair(two, extra + 1, &mut rng);
        let d = decompose_observable_pair(&pair).unwrap();
        prop_assert!(d.residual(&pair) <= 1e-10);
        prop_assert_eq!(d.block_count(), expected);
        prop_assert_eq!(d.total_rank(), 2 * two + extra + 1);
    }
}
