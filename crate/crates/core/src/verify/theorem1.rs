//! End-to-end check of `χ_λ(B1:E) ≤ F(S_λ)` over Bell-diagonal states and
//! Bob angles, and of the concavity step for mixtures of such states.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde_json::json;

use super::lemma5::sort_violations;
use super::report::Report;
use crate::bounds::holevo_bound_di;
use crate::chsh::chsh_max_belldiag;
use crate::eve::{chi_lambda, EveView};
use crate::sampling::{indexed_rng, random_ordered_bell_diagonal};
use crate::{Error, Result};

pub const SLACK: f64 = 1e-9;
/// Largest number of components in a sampled mixture.
pub const MAX_COMPONENTS: usize = 5;

fn sample_point(report: &mut Report, seed: u64, i: u64, phi_grid: usize) -> Result<()> {
    let mut rng = indexed_rng(seed, i);
    let l = random_ordered_bell_diagonal(&mut rng);
    let s = chsh_max_belldiag(&l)?;
    let f = holevo_bound_di(s)?;
    let chi0 = chi_lambda(&EveView::new(l, 0.0)?);
    for k in 0..phi_grid {
        let phi = PI * k as f64 / phi_grid as f64;
        let chi = chi_lambda(&EveView::new(l, phi)?);
        let params = || json!({ "lambda": l.lambda(), "phi": phi, "chi": chi, "S": s, "F": f });
        report.check("theorem1", params, chi, f + SLACK);
        report.check("phi_optimal", params, chi, chi0 + 1e-12);
    }

    // Σ p χ_k ≤ Σ p F(S_k) ≤ F(Σ p S_k)
    let m = rng.random_range(1..=MAX_COMPONENTS);
    let weights: Vec<f64> = {
        let raw: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|w| w / total).collect()
    };
    let (mut chi_mix, mut f_mix, mut s_mix) = (0.0, 0.0, 0.0);
    let mut lambdas = Vec::with_capacity(m);
    for &p in &weights {
        let lk = random_ordered_bell_diagonal(&mut rng);
        let sk = chsh_max_belldiag(&lk)?;
        chi_mix += p * chi_lambda(&EveView::new(lk, 0.0)?);
        f_mix += p * holevo_bound_di(sk)?;
        s_mix += p * sk;
        lambdas.push(lk.lambda());
    }
    let f_of_mean = holevo_bound_di(s_mix)?;
    let params = || json!({ "weights": weights, "lambdas": lambdas });
    report.check("mixture_chi", params, chi_mix, f_mix + SLACK);
    report.check("mixture_concavity", params, f_mix, f_of_mean + SLACK);
    Ok(())
}

/// `samples` ordered `λ`, each checked on `φ = kπ/phi_grid` for
/// `k = 0..phi_grid`, plus one random mixture per sample.
pub fn theorem1_sweep(samples: usize, phi_grid: usize, seed: u64) -> Result<Report> {
    if samples == 0 || phi_grid == 0 {
        return Err(Error::domain("sweep needs at least one sample and one angle"));
    }
    let mut report = (0..samples)
        .into_par_iter()
        .try_fold(
            || Report::new("theorem1"),
            |mut r, i| {
                sample_point(&mut r, seed, i as u64, phi_grid)?;
                Ok::<_, Error>(r)
            },
        )
        .try_reduce(
            || Report::new("theorem1"),
            |mut a, b| {
                a.merge(b);
                Ok(a)
            },
        )?;
    sort_violations(&mut report);
    Ok(report)
}

/// `|χ - F(S)|` along the attack family `((1+C)/2, 0, (1-C)/2, 0)` at `φ = 0`.
pub fn attack_family_gap(c: f64) -> Result<f64> {
    let l = crate::chsh::BellDiagonalState::ordered([(1.0 + c) / 2.0, 0.0, (1.0 - c) / 2.0, 0.0])?;
    let chi = chi_lambda(&EveView::new(l, 0.0)?);
    Ok((chi - holevo_bound_di(chsh_max_belldiag(&l)?)?).abs())
}
