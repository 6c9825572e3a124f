//! Closed-form bounds on Eve's Holevo information and the resulting
//! one-way key rates `r = I(A0:B1) - χ(B1:E)` with `I(A0:B1) = 1 - h(Q)`.

use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::numfmt::sig;
use crate::qmath::binary_entropy;
use crate::{Error, Result, CHSH_SLACK, TSIRELSON};

/// Which bound on `χ(B1:E)` a rate uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    DeviceIndependent,
    /// Qubit devices known to the parties.
    Standard,
    /// Device-independent bound on statistics where no-clicks were mapped to `-1`.
    DetectionEfficiency(f64),
    /// Eve knows the settings in advance with probability `q`.
    PartialKnowledge(f64),
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::DeviceIndependent => write!(f, "device_independent"),
            Scenario::Standard => write!(f, "standard"),
            Scenario::DetectionEfficiency(eta) => write!(f, "detection_efficiency({})", sig(*eta, 12)),
            Scenario::PartialKnowledge(q) => write!(f, "partial_knowledge({})", sig(*q, 12)),
        }
    }
}

/// Where `(Q, S)` came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Exact,
    Estimated { n: u64, sigma_q: f64, sigma_s: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub q: f64,
    pub s: f64,
    pub i_ab: f64,
    pub chi_bound: f64,
    /// May be negative: no key can be extracted.
    pub r_dw: f64,
    pub scenario: Scenario,
    pub provenance: Provenance,
}

impl RateReport {
    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k}={v}").expect("write to string");
        kv("scenario", self.scenario.to_string());
        kv("Q", sig(self.q, 12));
        kv("S", sig(self.s, 12));
        kv("I_AB", sig(self.i_ab, 12));
        kv("chi_bound", sig(self.chi_bound, 12));
        kv("r_DW", sig(self.r_dw, 12));
        match &self.provenance {
            Provenance::Exact => kv("provenance", "exact".into()),
            Provenance::Estimated { n, sigma_q, sigma_s, seed } => {
                kv("provenance", "estimated".into());
                kv("n", n.to_string());
                kv("sigma_Q", sig(*sigma_q, 6));
                kv("sigma_S", sig(*sigma_s, 6));
                kv("seed", seed.to_string());
            }
        }
        out
    }
}

fn check_chsh(s: f64) -> Result<f64> {
    if s.is_nan() {
        return Err(Error::domain("CHSH value is NaN"));
    }
    if s > TSIRELSON + CHSH_SLACK {
        return Err(Error::domain(format!("CHSH value {s} exceeds the Tsirelson bound 2√2")));
    }
    Ok(s.min(TSIRELSON))
}

/// `F(S) = h((1 + √((S/2)² - 1))/2)`; `1` for `S < 2`.
pub fn holevo_bound_di(s: f64) -> Result<f64> {
    let s = check_chsh(s)?;
    if s < 2.0 {
        return Ok(1.0);
    }
    let root = ((s / 2.0).powi(2) - 1.0).clamp(0.0, 1.0).sqrt();
    binary_entropy((1.0 + root) / 2.0)
}

/// `h(Q + S/(2√2))`.
pub fn holevo_bound_standard(q: f64, s: f64) -> Result<f64> {
    binary_entropy(q + s / TSIRELSON)
}

fn chi_for(q: f64, s: f64, scenario: Scenario) -> Result<f64> {
    match scenario {
        Scenario::DeviceIndependent | Scenario::DetectionEfficiency(_) => holevo_bound_di(s),
        Scenario::Standard => holevo_bound_standard(q, s),
        Scenario::PartialKnowledge(pk) => partial_knowledge_bound(pk, s),
    }
}

/// Devetak-Winter rate `1 - h(Q) - χ` for exactly known `(Q, S)`.
pub fn keyrate(q: f64, s: f64, scenario: Scenario) -> Result<RateReport> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("QBER {q} outside [0, 1]")));
    }
    let chi_bound = chi_for(q, s, scenario)?;
    let i_ab = 1.0 - binary_entropy(q)?;
    Ok(RateReport { q, s, i_ab, chi_bound, r_dw: i_ab - chi_bound, scenario, provenance: Provenance::Exact })
}

/// Tolerance of every threshold search, in the swept variable.
pub const THRESHOLD_TOL: f64 = 1e-6;

/// Root of `f` on `[lo, hi]` by bisection, given a sign change.
/// An endpoint where `|f| ≤ 1e-12` is returned as is.
pub fn bisect_root(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a)?, f(b)?);
    if fa.abs() <= 1e-12 {
        return Ok(a);
    }
    if fb.abs() <= 1e-12 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::domain(format!("no sign change on [{lo}, {hi}] ({fa:.3e}, {fb:.3e})")));
    }
    let rising = fa < 0.0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if (fm < 0.0) == rising {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// QBER at which the rate of `scenario` vanishes when `S = relation(Q)`,
/// searched on `[0, ½]`.
pub fn qber_threshold(scenario: Scenario, relation: impl Fn(f64) -> f64) -> Result<f64> {
    bisect_root(|q| Ok(keyrate(q, relation(q), scenario)?.r_dw), 0.0, 0.5, THRESHOLD_TOL)
}

/// `S = 2√2 (1 - 2Q)`: depolarized `Φ+` measured with the optimal settings.
pub fn werner_line(q: f64) -> f64 {
    TSIRELSON * (1.0 - 2.0 * q)
}

/// `(Q, S)` when each detector clicks with probability `η` and a no-click
/// counts as `-1`: `Q = η(1-η)`, `S = 2√2 η² + 2(1-η)²`.
pub fn detection_statistics(eta: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::domain(format!("detection efficiency {eta} outside [0, 1]")));
    }
    let miss = 1.0 - eta;
    Ok((eta * miss, TSIRELSON * eta * eta + 2.0 * miss * miss))
}

pub fn detection_efficiency_rate(eta: f64) -> Result<RateReport> {
    let (q, s) = detection_statistics(eta)?;
    keyrate(q, s, Scenario::DetectionEfficiency(eta))
}

/// Efficiency above which the detection-efficiency rate is positive, searched on `[0.9, 1]`.
pub fn detection_efficiency_threshold() -> Result<f64> {
    bisect_root(|eta| Ok(detection_efficiency_rate(eta)?.r_dw), 0.9, 1.0, THRESHOLD_TOL)
}

/// `χ = q + (1-q) F(S')` with `S' = (S - 4q)/(1 - q)`: with probability `q` Eve
/// knows the settings and plays a box reaching `S = 4` while fixing the outputs.
pub fn partial_knowledge_bound(q: f64, s_observed: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::domain(format!("setting-knowledge probability {q} outside [0, 1)")));
    }
    if s_observed.is_nan() || s_observed > 4.0 {
        return Err(Error::domain(format!("CHSH value {s_observed} above the algebraic limit 4")));
    }
    let s_prime = (s_observed - 4.0 * q) / (1.0 - q);
    if s_prime > TSIRELSON + CHSH_SLACK {
        return Err(Error::Inconsistent(format!(
            "S = {s_observed} with q = {q} requires S' = {s_prime} > 2√2 on the quantum rounds"
        )));
    }
    if s_prime <= 2.0 {
        return Ok(1.0);
    }
    Ok((q + (1.0 - q) * holevo_bound_di(s_prime)?).min(1.0))
}

/// What a curve sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sweep {
    /// `x = Q` along the Werner line, rate from the given scenario.
    WernerLine(Scenario),
    /// `x = η`, statistics from [`detection_statistics`].
    DetectionEfficiency,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub x: f64,
    pub q: f64,
    pub s: f64,
    pub chi: f64,
    pub rate: f64,
}

/// `steps + 1` evenly spaced rows over `range` (a single row if the range is
/// degenerate or `steps` is 0).
pub fn curve(sweep: Sweep, range: (f64, f64), steps: usize) -> Result<Vec<CurveRow>> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::domain(format!("invalid sweep range [{lo}, {hi}]")));
    }
    let steps = if hi == lo { 0 } else { steps };
    (0..=steps)
        .into_par_iter()
        .map(|k| {
            let x = if steps == 0 { lo } else { lo + (hi - lo) * k as f64 / steps as f64 };
            let report = match sweep {
                Sweep::WernerLine(scenario) => keyrate(x, werner_line(x), scenario)?,
                Sweep::DetectionEfficiency => detection_efficiency_rate(x)?,
            };
            Ok(CurveRow { x, q: report.q, s: report.s, chi: report.chi_bound, rate: report.r_dw })
        })
        .collect()
}

/// First sign change of the rate, linearly interpolated between rows.
pub fn first_zero_crossing(rows: &[CurveRow]) -> Option<f64> {
    rows.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if a.rate == 0.0 {
            Some(a.x)
        } else if a.rate.signum() != b.rate.signum() {
            Some(a.x + (b.x - a.x) * a.rate / (a.rate - b.rate))
        } else {
            None
        }
    })
}

pub fn curve_to_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("x,Q,S,chi,rate\n");
    for r in rows {
        let cells = [r.x, r.q, r.s, r.chi, r.rate].map(|v| sig(v, 12));
        writeln!(out, "{}", cells.join(",")).expect("write to string");
    }
    out
}
