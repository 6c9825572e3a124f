//! Eve's side information on Bob's key bit for Bell-diagonal states, and the
//! collective attack that saturates the device-independent bound.
//!
//! Eve holds the purification `Σ_k √λ_k |B_k⟩|e_k⟩` of `ρ_λ`. Once Bob measures
//! `B1 = cos φ σz + sin φ σx` and obtains `b1`, her conditional state has the
//! two eigenvalues `Λ±`, independent of `b1`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::chsh::{
    chsh_value, BellDiagonalState, MeasurementSet, XZMeasurement, PHI_MINUS, PHI_PLUS, PSI_MINUS, PSI_PLUS,
};
use crate::numfmt::sig;
use crate::qmath::{binary_entropy, hermitian_eigensystem, purify, shannon_entropy, CMatrix, DensityMatrix};
use crate::{Error, Result, CHSH_SLACK, TSIRELSON};

/// Slack on the `[0, π]` range of Bob's angle.
const PHI_SLACK: f64 = 1e-12;

/// An ordered Bell-diagonal state together with Bob's key measurement angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveView {
    lambda: BellDiagonalState,
    phi: f64,
}

impl EveView {
    pub fn new(lambda: BellDiagonalState, phi: f64) -> Result<Self> {
        lambda.require_ordered()?;
        if !(-PHI_SLACK..=PI + PHI_SLACK).contains(&phi) {
            return Err(Error::domain(format!("measurement angle {phi} outside [0, π]")));
        }
        Ok(EveView { lambda, phi: phi.clamp(0.0, PI) })
    }

    pub fn lambda(&self) -> BellDiagonalState {
        self.lambda
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// `Λ± = ½(1 ± √(g1² + g2² + 2 cos 2φ g1 g2))` with `g1 = λ_Φ+ - λ_Ψ-`,
/// `g2 = λ_Φ- - λ_Ψ+`. Returned as `(Λ+, Λ-)`.
pub fn eve_conditional_spectrum(v: &EveView) -> (f64, f64) {
    let (g1, g2) = v.lambda.gaps();
    let rad = (g1 * g1 + g2 * g2 + 2.0 * (2.0 * v.phi).cos() * g1 * g2).max(0.0).sqrt();
    (0.5 * (1.0 + rad), 0.5 * (1.0 - rad))
}

/// Eve's state conditioned on Bob's outcome `b1`, built from the purification
/// of `ρ_λ`: project Bob's qubit, trace out Alice and Bob, normalize.
///
/// The ancilla has one dimension per non-zero `λ_k`.
pub fn eve_conditional_state(v: &EveView, b1: i8) -> Result<DensityMatrix> {
    if b1 != 1 && b1 != -1 {
        return Err(Error::domain(format!("outcome {b1} is not ±1")));
    }
    let pur = purify(&v.lambda.density())?;
    let de = pur.ancilla_dim;
    let proj = CMatrix::identity(2).kron(&XZMeasurement::new(v.phi).observable().projector(b1 > 0));
    let psi = &pur.vector;
    // (Π ⊗ I_E)|ψ⟩ component by component
    let mut projected = vec![crate::qmath::c(0.0, 0.0); psi.len()];
    for s in 0..4 {
        for t in 0..4 {
            let p = proj[(s, t)];
            if p.norm() == 0.0 {
                continue;
            }
            for k in 0..de {
                projected[s * de + k] += p * psi[t * de + k];
            }
        }
    }
    let rho_e = CMatrix::from_fn(de, |k, l| (0..4).map(|s| projected[s * de + k] * projected[s * de + l].conj()).sum());
    let prob = rho_e.trace().re;
    if prob <= 0.0 {
        return Err(Error::Numeric(format!("outcome {b1} has probability {prob}")));
    }
    DensityMatrix::new(rho_e.scale_re(1.0 / prob).hermitian_part())
}

/// `χ_λ(B1:E) = H(λ) - h(Λ+)`.
pub fn chi_lambda(v: &EveView) -> f64 {
    let (lp, _) = eve_conditional_spectrum(v);
    let h = binary_entropy(lp.clamp(0.0, 1.0)).expect("clamped");
    (shannon_entropy(&v.lambda.probabilities()) - h).max(0.0)
}

/// `χ_λ` at `φ = 0`.
pub fn chi_key(lambda: &BellDiagonalState) -> Result<f64> {
    Ok(chi_lambda(&EveView::new(*lambda, 0.0)?))
}

/// Scans `φ = kπ/grid` for `k = 0..=grid` and returns the first maximizer of
/// `χ_λ` with its value. Values within `1e-14` of the running best count as
/// ties, so a flat profile reports `φ = 0`.
pub fn optimal_phi_check(lambda: &BellDiagonalState, grid: usize) -> Result<(f64, f64)> {
    lambda.require_ordered()?;
    let grid = grid.max(1);
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..=grid {
        let phi = PI * k as f64 / grid as f64;
        let chi = chi_lambda(&EveView::new(*lambda, phi)?);
        if chi > best.1 + 1e-14 {
            best = (phi, chi);
        }
    }
    Ok(best)
}

/// Concurrence of a Bell-diagonal state, `max(0, 2 max λ - 1)`.
pub fn concurrence_belldiag(s: &BellDiagonalState) -> f64 {
    let top = s.lambda().into_iter().fold(0.0, f64::max);
    (2.0 * top - 1.0).max(0.0)
}

/// The explicit attack reaching a target CHSH value with the least possible
/// information leak, and a target QBER on the key pair.
#[derive(Debug, Clone)]
pub struct AttackSpec {
    pub s_target: f64,
    /// `√((S/2)² - 1)`
    pub c: f64,
    pub q_target: f64,
    /// `(1+C)/2` on `Φ+`, `(1-C)/2` on `Φ-`.
    pub lambda: BellDiagonalState,
    pub state: DensityMatrix,
    pub measurements: MeasurementSet,
    /// `[A0, A1, A2, B1, B2]` in the (x, z) plane.
    pub angles: [f64; 5],
    /// Probability that `A0` reports its `σz` outcome.
    pub prob_sigma_z: f64,
    /// Probability that `A0` outputs a fresh uniform bit instead.
    pub prob_random: f64,
}

pub fn build_attack(s_target: f64, q_target: f64) -> Result<AttackSpec> {
    if s_target.is_nan() || s_target <= 2.0 {
        return Err(Error::domain(format!("S = {s_target} gives no quantum advantage (needs S > 2)")));
    }
    if s_target > TSIRELSON + CHSH_SLACK {
        return Err(Error::domain(format!("S = {s_target} exceeds the Tsirelson bound")));
    }
    if !(0.0..=0.5).contains(&q_target) {
        return Err(Error::domain(format!("QBER {q_target} outside [0, ½]")));
    }
    let s = s_target.min(TSIRELSON);
    let c = if s >= TSIRELSON { 1.0 } else { ((s / 2.0).powi(2) - 1.0).sqrt().min(1.0) };
    let lambda = BellDiagonalState::ordered([(1.0 + c) / 2.0, 0.0, (1.0 - c) / 2.0, 0.0])?;
    let t = c.atan();
    let angles = [0.0, t, -t, 0.0, PI / 2.0];
    let measurements = MeasurementSet::from_angles([angles[0], angles[1], angles[2]], [angles[3], angles[4]]);
    Ok(AttackSpec {
        s_target: s,
        c,
        q_target,
        lambda,
        state: lambda.density(),
        measurements,
        angles,
        prob_sigma_z: 1.0 - 2.0 * q_target,
        prob_random: 2.0 * q_target,
    })
}

impl AttackSpec {
    /// `χ_λ(B1:E)` with `B1 = σz`.
    pub fn chi(&self) -> f64 {
        chi_key(&self.lambda).expect("attack state is ordered")
    }

    pub fn chsh(&self) -> Result<f64> {
        chsh_value(&self.state, &self.measurements)
    }

    /// QBER on `(A0, B1)` after the `A0` post-processing channel.
    pub fn expected_qber(&self) -> Result<f64> {
        let a0 = self.measurements.alice(0).expect("protocol layout");
        let b1 = self.measurements.bob(1).expect("protocol layout");
        let e = crate::chsh::correlator(&self.state, a0, b1)?;
        Ok(self.prob_sigma_z * (1.0 - e) / 2.0 + self.prob_random * 0.5)
    }

    /// `key=value` lines.
    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: f64| writeln!(out, "{k}={}", sig(v, 15)).expect("write to string");
        kv("S", self.s_target);
        kv("C", self.c);
        kv("Q", self.q_target);
        let l = self.lambda.lambda();
        kv("lambda_phi_plus", l[PHI_PLUS]);
        kv("lambda_psi_minus", l[PSI_MINUS]);
        kv("lambda_phi_minus", l[PHI_MINUS]);
        kv("lambda_psi_plus", l[PSI_PLUS]);
        for (name, a) in ["angle_A0", "angle_A1", "angle_A2", "angle_B1", "angle_B2"].iter().zip(self.angles) {
            kv(name, a);
        }
        kv("prob_sigma_z", self.prob_sigma_z);
        kv("prob_random", self.prob_random);
        out
    }
}

/// Spectrum of Eve's conditional state, padded with zeros to `len` entries.
pub fn conditional_spectrum_numeric(v: &EveView, b1: i8, len: usize) -> Result<Vec<f64>> {
    let rho = eve_conditional_state(v, b1)?;
    let mut vals = hermitian_eigensystem(rho.matrix())?.values;
    vals.resize(len.max(vals.len()), 0.0);
    Ok(vals)
}
