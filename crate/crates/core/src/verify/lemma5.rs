//! The entropic inequality
//! `H(λ) - h(λ_Φ+ + λ_Φ-) ≤ h((1 + √(2R² - 1))/2)` for `R² > ½` (and `≤ 1`
//! otherwise), with `R² = (λ_Φ+ - λ_Ψ-)² + (λ_Φ- - λ_Ψ+)²`.

use rayon::prelude::*;
use serde_json::json;

use super::report::Report;
use crate::qmath::{binary_entropy, shannon_unchecked};
use crate::sampling::{indexed_rng, random_ordered_bell_diagonal};
use crate::{Error, Result};

pub const SLACK: f64 = 1e-9;
/// Required gap between bound and value away from the equality family.
pub const STRICT_MARGIN: f64 = 1e-6;
/// Points closer than this (in `λ_Ψ+ + λ_Ψ-` or `λ_Φ+ + λ_Φ-`) to the
/// equality family are exempt from the strict check.
pub const EQUALITY_DISTANCE: f64 = 0.01;

/// `H(λ) - h(λ_Φ+ + λ_Φ-)`, with the `0 log 0 = 0` convention.
pub fn lemma5_f(l: [f64; 4]) -> f64 {
    let [pp, _, pm, _] = l;
    shannon_unchecked(&l) - binary_entropy((pp + pm).clamp(0.0, 1.0)).expect("clamped")
}

pub fn r_squared(l: [f64; 4]) -> f64 {
    let [pp, sm, pm, sp] = l;
    (pp - sm).powi(2) + (pm - sp).powi(2)
}

/// Right-hand side of the inequality.
pub fn lemma5_bound(r2: f64) -> f64 {
    if r2 > 0.5 {
        binary_entropy((1.0 + (2.0 * r2 - 1.0).min(1.0).sqrt()) / 2.0).expect("argument in [½, 1]")
    } else {
        1.0
    }
}

/// Distance from the set where both `Ψ` or both `Φ` weights vanish.
fn equality_distance(l: [f64; 4]) -> f64 {
    let [pp, sm, pm, sp] = l;
    (sm + sp).min(pp + pm)
}

/// Checks one point: the inequality itself, and strictness away from the
/// equality family when `R² > ½ + 0.01`.
fn check_point(report: &mut Report, l: [f64; 4]) {
    let r2 = r_squared(l);
    let f = lemma5_f(l);
    let g = lemma5_bound(r2);
    report.check("lemma5", || json!({ "lambda": l, "R2": r2 }), f, g + SLACK);
    if r2 > 0.5 + 0.01 && equality_distance(l) >= EQUALITY_DISTANCE {
        report.check("lemma5_strict", || json!({ "lambda": l, "R2": r2 }), f, g - STRICT_MARGIN);
    }
}

/// Samples ordered `λ` (index `i` seeded by `(seed, i)`), plus the two
/// equality families `(a, 0, 1-a, 0)` and `(0, a, 0, 1-a)` on a grid of 1001 points.
pub fn lemma5_inequality_sweep(samples: usize, seed: u64) -> Result<Report> {
    if samples == 0 {
        return Err(Error::domain("sweep needs at least one sample"));
    }
    let mut report = (0..samples)
        .into_par_iter()
        .fold(
            || Report::new("lemma5"),
            |mut r, i| {
                let l = random_ordered_bell_diagonal(&mut indexed_rng(seed, i as u64)).lambda();
                check_point(&mut r, l);
                r
            },
        )
        .reduce(
            || Report::new("lemma5"),
            |mut a, b| {
                a.merge(b);
                a
            },
        );
    for k in 0..=1000 {
        let a = k as f64 / 1000.0;
        for l in [[a, 0.0, 1.0 - a, 0.0], [0.0, a, 0.0, 1.0 - a]] {
            let gap = (lemma5_f(l) - lemma5_bound(r_squared(l))).abs();
            report.check("lemma5_equality", || json!({ "lambda": l }), gap, SLACK);
        }
    }
    sort_violations(&mut report);
    Ok(report)
}

/// Parallel folds finish in arbitrary order; keep reports reproducible.
pub(crate) fn sort_violations(report: &mut Report) {
    report
        .violations
        .sort_by(|a, b| a.check.cmp(&b.check).then_with(|| a.params.to_string().cmp(&b.params.to_string())));
}

/// Outcome of the stationarity check at `δ*(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaStarCheck {
    pub r: f64,
    pub theta: f64,
    pub delta_star: f64,
    pub lambda: [f64; 4],
    pub f_value: f64,
    /// `∂F/∂δ` at `δ*` by a five-point stencil; `None` at the domain edge.
    pub derivative: Option<f64>,
    /// `F(δ*+h) - 2F(δ*) + F(δ*-h)`; `None` at the domain edge.
    pub second_difference: Option<f64>,
}

impl DeltaStarCheck {
    pub fn at_edge(&self) -> bool {
        self.derivative.is_none()
    }

    pub fn report(&self) -> Report {
        let mut r = Report::new("delta_star");
        let params = || json!({ "R": self.r, "theta": self.theta, "lambda": self.lambda });
        if let (Some(d), Some(s)) = (self.derivative, self.second_difference) {
            r.check("delta_star_stationary", params, d.abs(), 1e-8);
            r.check("delta_star_maximum", params, s, 0.0);
        }
        r
    }
}

fn lambda_at(r: f64, theta: f64, delta: f64) -> [f64; 4] {
    let (s, c) = theta.sin_cos();
    // order Φ+, Ψ-, Φ-, Ψ+
    [0.25 + r / 2.0 * c + delta, 0.25 - r / 2.0 * c + delta, 0.25 + r / 2.0 * s - delta, 0.25 - r / 2.0 * s - delta]
}

/// Minimum weight below which `δ*` counts as sitting on the domain edge.
const EDGE_WEIGHT: f64 = 1e-9;

/// `λ_Φ+ = ¼ + (R/2) cos θ + δ`, `λ_Φ- = ¼ + (R/2) sin θ - δ`,
/// `λ_Ψ- = ¼ - (R/2) cos θ + δ`, `λ_Ψ+ = ¼ - (R/2) sin θ - δ`, and
/// `δ* = (R²/4)(cos²θ - sin²θ)` should be a maximum of `F` in `δ`.
pub fn delta_star_maximality_check(r: f64, theta: f64) -> Result<DeltaStarCheck> {
    let (s, c) = theta.sin_cos();
    if !(r.is_finite() && r >= 0.0 && theta.is_finite()) || r * (c.abs() + s.abs()) > 1.0 + 1e-12 {
        return Err(Error::domain(format!("(R, θ) = ({r}, {theta}) violates R(|cos θ| + |sin θ|) ≤ 1")));
    }
    let delta_star = r * r / 4.0 * (c * c - s * s);
    let lambda = lambda_at(r, theta, delta_star).map(|x| x.max(0.0));
    let f_value = lemma5_f(lambda);
    let min_weight = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    if min_weight < EDGE_WEIGHT {
        return Ok(DeltaStarCheck { r, theta, delta_star, lambda, f_value, derivative: None, second_difference: None });
    }
    let h = 0.003 * min_weight;
    let f = |k: f64| lemma5_f(lambda_at(r, theta, delta_star + k * h));
    let derivative = (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * h);
    let second = f(1.0) - 2.0 * f_value + f(-1.0);
    Ok(DeltaStarCheck {
        r,
        theta,
        delta_star,
        lambda,
        f_value,
        derivative: Some(derivative),
        second_difference: Some(second),
    })
}
