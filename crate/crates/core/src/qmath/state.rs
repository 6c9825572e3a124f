use super::eigen::hermitian_eigensystem;
use super::entropy::shannon_unchecked;
use super::matrix::{c, CMatrix, C64};
use super::{HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
use crate::{Error, Result};

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::precondition(format!("state is not Hermitian (defect {defect:.3e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::precondition(format!("state has trace {tr}")));
        }
        let m = m.hermitian_part();
        let es = hermitian_eigensystem(&m)?;
        let min = es.values.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::precondition(format!("state has negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix(m))
    }

    /// `|ψ⟩⟨ψ|` for a vector of unit norm.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let n = super::matrix::norm(psi);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::domain(format!("state vector has norm {n}")));
        }
        Ok(DensityMatrix(CMatrix::outer(psi)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(CMatrix::identity(dim).scale_re(1.0 / dim as f64))
    }

    /// `Σ p_k ρ_k`.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let dim = parts.first().ok_or_else(|| Error::domain("empty mixture"))?.1.dim();
        let mut acc = CMatrix::zeros(dim);
        for (p, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::domain("mixture components of different dimension"));
            }
            acc = &acc + &rho.0.scale_re(*p);
        }
        DensityMatrix::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// `ρ ⊗ σ`
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(self.0.kron(&other.0))
    }

    /// `U ρ U†` for a unitary `U`.
    pub fn evolve(&self, u: &CMatrix) -> DensityMatrix {
        DensityMatrix(self.0.conjugate_by(u).hermitian_part())
    }

    /// `Tr[ρ O]`, real part.
    pub fn expectation(&self, o: &CMatrix) -> f64 {
        (&self.0 * o).trace().re
    }

    /// Spectrum with negative rounding noise clamped to zero and renormalized.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let es = hermitian_eigensystem(&self.0)?;
        let mut vals: Vec<f64> = es.values.iter().map(|&e| e.max(0.0)).collect();
        let total: f64 = vals.iter().sum();
        vals.iter_mut().for_each(|v| *v /= total);
        Ok(vals)
    }
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(shannon_unchecked(&rho.spectrum()?))
}

/// Which tensor factor of a bipartite system to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace over `subsystem` of an operator on `A ⊗ B` with `dims = (dA, dB)`.
pub fn partial_trace_op(m: &CMatrix, subsystem: Subsystem, dims: (usize, usize)) -> Result<CMatrix> {
    let (da, db) = dims;
    if da * db != m.dim() {
        return Err(Error::domain(format!("dimensions {da}x{db} do not factor a {}-dim operator", m.dim())));
    }
    Ok(match subsystem {
        Subsystem::B => CMatrix::from_fn(da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Subsystem::A => CMatrix::from_fn(db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()),
    })
}

pub fn partial_trace(rho: &DensityMatrix, subsystem: Subsystem, dims: (usize, usize)) -> Result<DensityMatrix> {
    Ok(DensityMatrix(partial_trace_op(rho.matrix(), subsystem, dims)?.hermitian_part()))
}

/// A pure state on `system ⊗ ancilla` whose system marginal is the purified state.
#[derive(Debug, Clone)]
pub struct Purification {
    /// Amplitudes indexed by `s * ancilla_dim + k`.
    pub vector: Vec<C64>,
    pub system_dim: usize,
    pub ancilla_dim: usize,
}

impl Purification {
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix(CMatrix::outer(&self.vector))
    }

    /// Traces out the ancilla.
    pub fn system_state(&self) -> DensityMatrix {
        let (ds, da) = (self.system_dim, self.ancilla_dim);
        let v = &self.vector;
        let m = CMatrix::from_fn(ds, |i, j| (0..da).map(|k| v[i * da + k] * v[j * da + k].conj()).sum());
        DensityMatrix(m)
    }
}

/// Eigenvalues at or below this are dropped from the ancilla.
const RANK_TOL: f64 = 1e-14;

/// `Σ_k √e_k |v_k⟩|k⟩` over the non-zero spectrum of `rho`.
pub fn purify(rho: &DensityMatrix) -> Result<Purification> {
    let es = hermitian_eigensystem(rho.matrix())?;
    let kept: Vec<usize> = (0..es.values.len()).filter(|&k| es.values[k] > RANK_TOL).collect();
    let ds = rho.dim();
    let da = kept.len().max(1);
    let mut vector = vec![c(0.0, 0.0); ds * da];
    for (slot, &k) in kept.iter().enumerate() {
        let amp = es.values[k].sqrt();
        for s in 0..ds {
            vector[s * da + slot] = es.vectors[(s, k)] * amp;
        }
    }
    Ok(Purification { vector, system_dim: ds, ancilla_dim: da })
}
