//! Reduction of an arbitrary two-qubit state to an ordered Bell-diagonal one
//! by local symmetrizations and rotations.
//!
//! 1. `ρ̄ = ½[ρ + (σy⊗σy) ρ (σy⊗σy)]` kills the coherences between the sectors
//!    `{Φ+, Ψ-}` (σy⊗σy = -1) and `{Φ-, Ψ+}` (σy⊗σy = +1).
//! 2. `Ry(α)⊗Ry(β)`, `Ry(θ) = exp(iθσy/2)`, rotates the first sector by
//!    `(α-β)/2` and the second by `-(α+β)/2`; the angles are chosen to cancel the
//!    real parts of the in-sector coherences.
//! 3. `½(ρ + ρ*)` removes the imaginary parts.
//! 4. Quarter-turn relabelings restore `λ_Φ+ ≥ λ_Ψ-` and `λ_Φ- ≥ λ_Ψ+`.

use std::f64::consts::FRAC_PI_2;

use crate::chsh::{to_bell_basis, BellDiagonalState, PHI_MINUS, PHI_PLUS, PSI_MINUS, PSI_PLUS};
use crate::qmath::{c, pauli, CMatrix, DensityMatrix};
use crate::Result;

/// Gaps or coherences at or below this count as zero when choosing angles.
const DEGENERATE_TOL: f64 = 1e-14;

/// `Ry(θ) = cos(θ/2) I + i sin(θ/2) σy`
pub fn ry(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 0) | (1, 1) => c(co, 0.0),
        (0, 1) => c(s, 0.0),
        _ => c(-s, 0.0),
    })
}

pub fn local_rotation(alpha: f64, beta: f64) -> CMatrix {
    ry(alpha).kron(&ry(beta))
}

/// Discrete relabeling applied at the end of the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relabel {
    None,
    /// `α = -β = π/2`: `Φ+ ↔ Ψ-`.
    SwapPhiPlusPsiMinus,
    /// `α = β = π/2`: `Φ- ↔ Ψ+`.
    SwapPhiMinusPsiPlus,
    /// `α = π, β = 0`: both swaps.
    SwapBoth,
}

impl Relabel {
    pub fn angles(self) -> (f64, f64) {
        match self {
            Relabel::None => (0.0, 0.0),
            Relabel::SwapPhiPlusPsiMinus => (FRAC_PI_2, -FRAC_PI_2),
            Relabel::SwapPhiMinusPsiPlus => (FRAC_PI_2, FRAC_PI_2),
            Relabel::SwapBoth => (2.0 * FRAC_PI_2, 0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReductionTrace {
    pub input: DensityMatrix,
    /// After the `σy⊗σy` average.
    pub symmetrized: DensityMatrix,
    /// Continuous rotation angles `(α, β)`.
    pub angles: (f64, f64),
    pub rotated: DensityMatrix,
    /// After the complex-conjugation average.
    pub averaged: DensityMatrix,
    pub relabel: Relabel,
    pub output: DensityMatrix,
    pub lambda: BellDiagonalState,
}

impl ReductionTrace {
    /// Largest off-diagonal modulus of the output in the Bell basis.
    pub fn off_diagonal_defect(&self) -> f64 {
        let b = to_bell_basis(self.output.matrix());
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    worst = worst.max(b[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// Angle `t` of the real rotation that zeroes `Re` of the coherence in a sector
/// with populations `(a, b)` and coherence real part `x`: `tan t = -2x/(a-b)`
/// for a rotation acting by `t/2`.
fn cancel_angle(a: f64, b: f64, x: f64) -> f64 {
    if (a - b).abs() <= DEGENERATE_TOL {
        if x.abs() <= DEGENERATE_TOL {
            0.0
        } else {
            FRAC_PI_2
        }
    } else {
        (-2.0 * x / (a - b)).atan()
    }
}

fn bell_diag(m: &CMatrix) -> [f64; 4] {
    let b = to_bell_basis(m);
    [0, 1, 2, 3].map(|k| b[(k, k)].re)
}

pub fn symmetrize_to_belldiag(rho: &DensityMatrix) -> Result<ReductionTrace> {
    let yy = pauli::y().kron(&pauli::y());
    let symmetrized = DensityMatrix::new((rho.matrix() + &rho.matrix().conjugate_by(&yy)).scale_re(0.5))?;

    let b = to_bell_basis(symmetrized.matrix());
    // first sector rotates by (α-β)/2, second by -(α+β)/2
    let d = cancel_angle(b[(PHI_PLUS, PHI_PLUS)].re, b[(PSI_MINUS, PSI_MINUS)].re, b[(PHI_PLUS, PSI_MINUS)].re);
    let sigma = -cancel_angle(b[(PHI_MINUS, PHI_MINUS)].re, b[(PSI_PLUS, PSI_PLUS)].re, b[(PHI_MINUS, PSI_PLUS)].re);
    let angles = (0.5 * (d + sigma), 0.5 * (sigma - d));
    let rotated = symmetrized.evolve(&local_rotation(angles.0, angles.1));

    let averaged = DensityMatrix::new((rotated.matrix() + &rotated.matrix().conj()).scale_re(0.5))?;

    let l = bell_diag(averaged.matrix());
    let relabel = match (l[PHI_PLUS] < l[PSI_MINUS], l[PHI_MINUS] < l[PSI_PLUS]) {
        (false, false) => Relabel::None,
        (true, false) => Relabel::SwapPhiPlusPsiMinus,
        (false, true) => Relabel::SwapPhiMinusPsiPlus,
        (true, true) => Relabel::SwapBoth,
    };
    let (ra, rb) = relabel.angles();
    let output = averaged.evolve(&local_rotation(ra, rb));

    let mut diag = bell_diag(output.matrix()).map(|x| x.max(0.0));
    let total: f64 = diag.iter().sum();
    diag.iter_mut().for_each(|x| *x /= total);
    let lambda = BellDiagonalState::new(diag)?;

    Ok(ReductionTrace { input: rho.clone(), symmetrized, angles, rotated, averaged, relabel, output, lambda })
}

/// Largest change of the Bell-basis populations across the two averaging steps.
pub fn population_drift(t: &ReductionTrace) -> f64 {
    let pairs = [(&t.input, &t.symmetrized), (&t.rotated, &t.averaged)];
    pairs
        .iter()
        .map(|(a, b)| {
            let (da, db) = (bell_diag(a.matrix()), bell_diag(b.matrix()));
            (0..4).map(|k| (da[k] - db[k]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
