//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies the classical real Jacobi rotation to the resulting
//! real symmetric 2x2 block. Sweeps continue until the off-diagonal mass is
//! below machine precision relative to the matrix norm.

use std::cmp::Ordering;

use super::matrix::{c, CMatrix, C64};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues sorted descending with the matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigensystem {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V diag(e) V†`
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::real_diag(&self.values);
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

pub fn hermitian_eigensystem(m: &CMatrix) -> Result<Eigensystem> {
    let defect = m.hermiticity_defect();
    if defect > super::HERMITIAN_TOL {
        return Err(Error::precondition(format!("matrix is not Hermitian (max |M - M†| = {defect:.3e})")));
    }
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);

    let scale = a.frobenius_norm();
    let target = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut converged = n < 2 || a.off_diagonal_norm() <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "Jacobi iteration did not converge after {MAX_SWEEPS} sweeps (off-diagonal norm {:.3e})",
                a.off_diagonal_norm()
            )));
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = a.off_diagonal_norm() <= target;
    }

    let values: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    Ok(sorted(values, v))
}

/// Zeroes `a[p][q]` with a unitary acting on rows/columns `p`, `q` and
/// accumulates the rotation into `v`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // skip pivots already negligible against both diagonal entries
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = c(0.0, 0.0);
        a[(q, p)] = c(0.0, 0.0);
        return;
    }
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;

    // G = diag(1, conj(phase)) * [[cs, sn], [-sn, cs]]
    let g00 = c(cs, 0.0);
    let g01 = c(sn, 0.0);
    let g10 = -phase.conj() * sn;
    let g11 = phase.conj() * cs;

    let n = a.dim();
    // A <- A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g00 + akq * g10;
        a[(k, q)] = akp * g01 + akq * g11;
    }
    // A <- G† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
        a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
    }
    a[(p, q)] = c(0.0, 0.0);
    a[(q, p)] = c(0.0, 0.0);
    a[(p, p)] = c(a[(p, p)].re, 0.0);
    a[(q, q)] = c(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g00 + vkq * g10;
        v[(k, q)] = vkp * g01 + vkq * g11;
    }
}

/// Eigenvalues closer than this are treated as tied when ordering.
const TIE_TOL: f64 = 1e-12;

/// Normalizes eigenvector phases and orders the pairs descending, breaking
/// ties by lexicographic comparison of the eigenvectors.
fn sorted(values: Vec<f64>, v: CMatrix) -> Eigensystem {
    let n = values.len();
    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut col = v.column(k);
            fix_phase(&mut col);
            (values[k], col)
        })
        .collect();
    pairs.sort_by(|(ea, va), (eb, vb)| {
        if (ea - eb).abs() > TIE_TOL {
            eb.partial_cmp(ea).unwrap_or(Ordering::Equal)
        } else {
            lex_cmp(vb, va)
        }
    });
    let mut vectors = CMatrix::zeros(n);
    let mut out = Vec::with_capacity(n);
    for (j, (e, col)) in pairs.into_iter().enumerate() {
        out.push(e);
        for (i, z) in col.into_iter().enumerate() {
            vectors[(i, j)] = z;
        }
    }
    Eigensystem { values: out, vectors }
}

/// Rotates the global phase so the first component of non-negligible size is
/// real and positive.
fn fix_phase(col: &mut [C64]) {
    let biggest = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(lead) = col.iter().find(|z| z.norm() > 1e-8 * biggest).copied() {
        let rot = lead.conj() / lead.norm();
        for z in col.iter_mut() {
            *z *= rot;
        }
    }
}

fn lex_cmp(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            if (p - q).abs() > 1e-12 {
                return p.partial_cmp(&q).unwrap_or(Ordering::Equal);
            }
        }
    }
    Ordering::Equal
}
