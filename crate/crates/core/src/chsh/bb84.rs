//! A separable `C^4 ⊗ C^4` model reproducing the ideal BB84 statistics, with a
//! classical copy held by Eve.
//!
//! Each party holds two classical bits `(z0, z1)`, uniformly random and
//! identical on all three sides. Setting 0 reads `z0` (`σz ⊗ I`), setting 1
//! reads `z1` (`I ⊗ σz`). Same settings then agree perfectly, different
//! settings are uncorrelated, and Eve knows both outputs once the inputs are
//! announced.

use super::table::{chsh_from_table, outcome_index, CorrelationTable, PairStats};
use super::{chsh_max_horodecki, MeasurementSet, Observable};
use crate::qmath::{pauli, shannon_unchecked, CMatrix, DensityMatrix};
use crate::Result;

#[derive(Debug, Clone)]
pub struct Bb84Counterexample {
    /// `¼ Σ_z |z⟩⟨z|_A ⊗ |z⟩⟨z|_B ⊗ |z⟩⟨z|_E` on `C^4 ⊗ C^4 ⊗ C^4`.
    pub rho_abe: DensityMatrix,
    pub rho_ab: DensityMatrix,
    /// Settings labeled 0 and 1 on both sides.
    pub measurements: MeasurementSet,
    pub table: CorrelationTable,
    /// `H(A | X, E)` in bits with Eve reading her register in the `z` basis.
    pub eve_uncertainty_alice: f64,
    /// `H(B | Y, E)` likewise.
    pub eve_uncertainty_bob: f64,
    /// `max |S|` over all assignments of the two settings per side to the CHSH roles.
    pub max_chsh_over_roles: f64,
    /// Horodecki maximum of each two-qubit marginal `(A_i, B_j)`, ordered `(0,0), (0,1), (1,0), (1,1)`.
    pub qubit_pair_chsh: [f64; 4],
}

/// The ideal BB84 table: `P(ab|00) = P(ab|11) = ½ δ_ab`, `P(ab|01) = P(ab|10) = ¼`.
pub fn bb84_ideal_table() -> CorrelationTable {
    let mut t = CorrelationTable::new();
    for x in 0..2u8 {
        for y in 0..2u8 {
            let probs = if x == y { [[0.5, 0.0], [0.0, 0.5]] } else { [[0.25; 2]; 2] };
            t.insert(x, y, PairStats { probs, counts: [[0; 2]; 2] }).expect("normalized");
        }
    }
    t
}

fn settings() -> [Observable; 2] {
    let id = CMatrix::identity(2);
    [Observable::new(pauli::z().kron(&id)).expect("σz ⊗ I"), Observable::new(id.kron(&pauli::z())).expect("I ⊗ σz")]
}

/// Reduced state on qubits `keep` (ascending) of an `n`-qubit operator, qubit 0 most significant.
fn reduce_to_qubits(m: &CMatrix, n: usize, keep: &[usize]) -> CMatrix {
    let k = keep.len();
    let sub = |idx: usize| keep.iter().fold(0, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1));
    let rest =
        |idx: usize| (0..n).filter(|q| !keep.contains(q)).fold(0, |acc, q| (acc << 1) | ((idx >> (n - 1 - q)) & 1));
    let mut out = CMatrix::zeros(1 << k);
    for i in 0..1usize << n {
        for j in 0..1usize << n {
            if rest(i) == rest(j) {
                out[(sub(i), sub(j))] += m[(i, j)];
            }
        }
    }
    out
}

pub fn bb84_counterexample() -> Result<Bb84Counterexample> {
    let diag = |dim: usize, k: usize| {
        let mut d = vec![0.0; dim];
        d[k] = 1.0;
        CMatrix::real_diag(&d)
    };
    let mut abe = CMatrix::zeros(64);
    let mut ab = CMatrix::zeros(16);
    for z in 0..4 {
        let p = diag(4, z);
        abe = &abe + &p.kron(&p).kron(&p).scale_re(0.25);
        ab = &ab + &p.kron(&p).scale_re(0.25);
    }
    let rho_abe = DensityMatrix::new(abe)?;
    let rho_ab = DensityMatrix::new(ab)?;

    let [s0, s1] = settings();
    let measurements = MeasurementSet::labeled(vec![(0, s0.clone()), (1, s1.clone())], vec![(0, s0), (1, s1)])?;
    let table = super::table_from_state(&rho_ab, &measurements)?;

    let id4 = CMatrix::identity(4);
    let conditional = |alice_side: bool| -> f64 {
        // H(out | setting, E) averaged over the two settings
        let mut h = 0.0;
        for setting in 0..2u8 {
            let obs = if alice_side { measurements.alice(setting) } else { measurements.bob(setting) }.expect("label");
            for e in 0..4 {
                let pe = diag(4, e);
                let joint: Vec<f64> = [true, false]
                    .iter()
                    .map(|&plus| {
                        let proj = obs.projector(plus);
                        let op = if alice_side { proj.kron(&id4).kron(&pe) } else { id4.kron(&proj).kron(&pe) };
                        rho_abe.expectation(&op).max(0.0)
                    })
                    .collect();
                let p_e: f64 = joint.iter().sum();
                if p_e > 0.0 {
                    let cond: Vec<f64> = joint.iter().map(|p| p / p_e).collect();
                    h += 0.5 * p_e * shannon_unchecked(&cond);
                }
            }
        }
        h
    };
    let eve_uncertainty_alice = conditional(true);
    let eve_uncertainty_bob = conditional(false);

    let mut max_chsh_over_roles: f64 = 0.0;
    for roles in (0..16u8).map(|r| (r & 1, (r >> 1) & 1, (r >> 2) & 1, (r >> 3) & 1)) {
        max_chsh_over_roles = max_chsh_over_roles.max(chsh_from_table(&table, roles)?.abs());
    }

    // qubits: A = (0, 1), B = (2, 3)
    let mut qubit_pair_chsh = [0.0; 4];
    for (slot, (qa, qb)) in [(0, 2), (0, 3), (1, 2), (1, 3)].into_iter().enumerate() {
        let red = DensityMatrix::new(reduce_to_qubits(rho_ab.matrix(), 4, &[qa, qb]))?;
        qubit_pair_chsh[slot] = chsh_max_horodecki(&red)?.s_max;
    }

    Ok(Bb84Counterexample {
        rho_abe,
        rho_ab,
        measurements,
        table,
        eve_uncertainty_alice,
        eve_uncertainty_bob,
        max_chsh_over_roles,
        qubit_pair_chsh,
    })
}

impl Bb84Counterexample {
    /// Largest entrywise difference from the ideal BB84 table.
    pub fn deviation_from_ideal(&self) -> f64 {
        let ideal = bb84_ideal_table();
        let mut worst: f64 = 0.0;
        for (&(x, y), s) in ideal.pairs() {
            let got = match self.table.pair(x, y) {
                Some(g) => g,
                None => return f64::INFINITY,
            };
            for a in [1i8, -1] {
                for b in [1i8, -1] {
                    let (i, j) = (outcome_index(a), outcome_index(b));
                    worst = worst.max((s.probs[i][j] - got.probs[i][j]).abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_ideal_table_exactly() {
        let ex = bb84_counterexample().unwrap();
        assert_eq!(ex.deviation_from_ideal(), 0.0);
    }

    #[test]
    fn eve_knows_everything() {
        let ex = bb84_counterexample().unwrap();
        assert_eq!(ex.eve_uncertainty_alice, 0.0);
        assert_eq!(ex.eve_uncertainty_bob, 0.0);
    }

    #[test]
    fn no_chsh_violation() {
        let ex = bb84_counterexample().unwrap();
        assert!(ex.max_chsh_over_roles <= 2.0);
        // minus sign on a vanishing correlator gives the classical bound exactly
        assert_eq!(ex.max_chsh_over_roles, 2.0);
        for s in ex.qubit_pair_chsh {
            assert!(s <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn qubit_reduction_of_product() {
        let m = pauli::z().kron(&CMatrix::identity(2).scale_re(0.5)).kron(&pauli::x());
        let r = reduce_to_qubits(&m, 3, &[0, 2]);
        assert!(r.max_abs_diff(&pauli::z().kron(&pauli::x())) < 1e-15);
    }
}
