//! Joint block structure of two `±1` observables.
//!
//! `U = A2 A1` is unitary and `A2 U A2 = U†`, so `A2` maps the eigenspace of
//! `ω` onto that of `ω̄`. Each eigenvector `|α⟩` with `Im ω > 0` spans a 2-dim
//! block with `A2|α⟩`; the real eigenvalues `ω = ±1` leave subspaces on which
//! `A1 = ±A2`, and these split into 1-dim blocks along the eigenvectors of `A2`.

use rand::Rng;

use crate::qmath::{c, hermitian_eigensystem, inner, pauli, CMatrix, C64};
use crate::sampling::{random_unit3, random_unitary};
use crate::{Error, Result};

/// Observables must square to the identity within this.
const INVOLUTION_TOL: f64 = 1e-10;
/// `|ω ∓ 1|` at or below this means a real eigenvalue.
const REAL_OMEGA_TOL: f64 = 1e-8;
/// Eigenvalues of `(U + U†)/2` closer than this are treated as one cluster.
const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ObservablePair {
    a1: CMatrix,
    a2: CMatrix,
}

impl ObservablePair {
    pub fn new(a1: CMatrix, a2: CMatrix) -> Result<Self> {
        if a1.dim() != a2.dim() {
            return Err(Error::domain(format!("observables of dimension {} and {}", a1.dim(), a2.dim())));
        }
        let id = CMatrix::identity(a1.dim());
        for (name, a) in [("A1", &a1), ("A2", &a2)] {
            if !a.is_hermitian() {
                return Err(Error::domain(format!("{name} is not Hermitian")));
            }
            let defect = (a * a).max_abs_diff(&id);
            if defect > INVOLUTION_TOL {
                return Err(Error::domain(format!("{name}² differs from the identity by {defect:.3e}")));
            }
        }
        Ok(ObservablePair { a1, a2 })
    }

    pub fn dim(&self) -> usize {
        self.a1.dim()
    }

    pub fn a1(&self) -> &CMatrix {
        &self.a1
    }

    pub fn a2(&self) -> &CMatrix {
        &self.a2
    }
}

/// Restriction of both observables to one block.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockForm {
    /// Eigenvalues of `A1` and `A2` on a 1-dim block.
    One { a1: f64, a2: f64 },
    /// Bloch vectors on a 2-dim block in the basis `{|α⟩, A2|α⟩}`.
    Two { a1: [f64; 3], a2: [f64; 3] },
}

#[derive(Debug, Clone)]
pub struct Block {
    /// Orthonormal basis of the block, one or two vectors.
    pub basis: Vec<Vec<C64>>,
    pub form: BlockForm,
}

impl Block {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `W Wᵀ*` with `W` the basis columns.
    pub fn projector(&self) -> CMatrix {
        let n = self.basis[0].len();
        CMatrix::from_fn(n, |i, j| self.basis.iter().map(|v| v[i] * v[j].conj()).sum())
    }

    /// `W M W†` for the block-local matrix `M` of observable `j ∈ {1, 2}`.
    fn embed(&self, j: usize) -> CMatrix {
        let local = match (&self.form, j) {
            (BlockForm::One { a1, .. }, 1) => CMatrix::real_diag(&[*a1]),
            (BlockForm::One { a2, .. }, _) => CMatrix::real_diag(&[*a2]),
            (BlockForm::Two { a1, .. }, 1) => pauli::bloch(*a1),
            (BlockForm::Two { a2, .. }, _) => pauli::bloch(*a2),
        };
        let n = self.basis[0].len();
        let r = self.rank();
        CMatrix::from_fn(n, |i, k| {
            let mut acc = c(0.0, 0.0);
            for p in 0..r {
                for q in 0..r {
                    acc += self.basis[p][i] * local[(p, q)] * self.basis[q][k].conj();
                }
            }
            acc
        })
    }
}

#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_rank(&self) -> usize {
        self.blocks.iter().map(Block::rank).sum()
    }

    /// `Σ_α P_α A_j P_α` rebuilt from the block-local forms.
    pub fn reconstruct(&self, j: usize) -> CMatrix {
        let n = self.blocks[0].basis[0].len();
        self.blocks.iter().fold(CMatrix::zeros(n), |acc, b| &acc + &b.embed(j))
    }

    /// Largest of: reconstruction error of either observable, `|Σ P_α - I|`,
    /// and `|P_α P_β|` over distinct blocks.
    pub fn residual(&self, pair: &ObservablePair) -> f64 {
        let n = pair.dim();
        let projectors: Vec<CMatrix> = self.blocks.iter().map(Block::projector).collect();
        let sum = projectors.iter().fold(CMatrix::zeros(n), |acc, p| &acc + p);
        let mut worst = sum.max_abs_diff(&CMatrix::identity(n));
        worst = worst.max(self.reconstruct(1).max_abs_diff(pair.a1()));
        worst = worst.max(self.reconstruct(2).max_abs_diff(pair.a2()));
        let zero = CMatrix::zeros(n);
        for (i, p) in projectors.iter().enumerate() {
            for q in &projectors[i + 1..] {
                worst = worst.max((p * q).max_abs_diff(&zero));
            }
        }
        worst
    }
}

/// Columns `vectors` restricted as `V† M V`.
fn restrict(m: &CMatrix, vectors: &[Vec<C64>]) -> CMatrix {
    let images: Vec<Vec<C64>> = vectors.iter().map(|v| m.mul_vec(v)).collect();
    CMatrix::from_fn(vectors.len(), |i, j| inner(&vectors[i], &images[j]))
}

fn combine(vectors: &[Vec<C64>], coeffs: &[C64]) -> Vec<C64> {
    let n = vectors[0].len();
    (0..n).map(|i| vectors.iter().zip(coeffs).map(|(v, a)| v[i] * a).sum()).collect()
}

/// Joint eigenvectors of the normal matrix `u` with their eigenvalues.
fn unitary_eigenvectors(u: &CMatrix) -> Result<Vec<(C64, Vec<C64>)>> {
    let n = u.dim();
    let ud = u.adjoint();
    let re = (u + &ud).scale_re(0.5);
    let im = (u - &ud).scale(c(0.0, -0.5));
    let es = hermitian_eigensystem(&re)?;
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && es.values[end - 1] - es.values[end] <= CLUSTER_TOL {
            end += 1;
        }
        let cluster: Vec<Vec<C64>> = (start..end).map(|k| es.vector(k)).collect();
        let sub = hermitian_eigensystem(&restrict(&im, &cluster).hermitian_part())?;
        for k in 0..cluster.len() {
            let v = combine(&cluster, &sub.vector(k));
            let omega = inner(&v, &u.mul_vec(&v));
            out.push((omega, v));
        }
        start = end;
    }
    Ok(out)
}

/// Splits a subspace on which `A1 = sign · A2` along the eigenvectors of `A2`.
fn one_dim_blocks(a2: &CMatrix, space: &[Vec<C64>], sign: f64) -> Result<Vec<Block>> {
    if space.is_empty() {
        return Ok(Vec::new());
    }
    let es = hermitian_eigensystem(&restrict(a2, space).hermitian_part())?;
    Ok((0..space.len())
        .map(|k| {
            let v = combine(space, &es.vector(k));
            let e = es.values[k].signum();
            Block { basis: vec![v], form: BlockForm::One { a1: sign * e, a2: e } }
        })
        .collect())
}

pub fn decompose_observable_pair(p: &ObservablePair) -> Result<BlockDecomposition> {
    let u = p.a2() * p.a1();
    let eig = unitary_eigenvectors(&u)?;

    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for (omega, v) in eig {
        if (omega - c(1.0, 0.0)).norm() <= REAL_OMEGA_TOL {
            plus.push(v);
        } else if (omega + c(1.0, 0.0)).norm() <= REAL_OMEGA_TOL {
            minus.push(v);
        } else if omega.im > 0.0 {
            upper.push((omega, v));
        } else {
            lower.push(omega);
        }
    }

    // each ω in the upper half-plane needs a partner ω̄ below
    let mut unused = lower;
    for (omega, _) in &upper {
        let target = omega.conj();
        let (idx, dist) = unused
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (w - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::Numeric(format!("eigenvalue {omega} has no conjugate partner")))?;
        if dist > 1e-6 {
            return Err(Error::Numeric(format!("eigenvalue {omega} has no conjugate partner (nearest at {dist:.3e})")));
        }
        unused.swap_remove(idx);
    }
    if !unused.is_empty() {
        return Err(Error::Numeric(format!("{} unpaired eigenvalues below the real axis", unused.len())));
    }

    let mut blocks = one_dim_blocks(p.a2(), &plus, 1.0)?;
    blocks.extend(one_dim_blocks(p.a2(), &minus, -1.0)?);
    for (omega, v) in upper {
        let w = p.a2().mul_vec(&v);
        let unit = omega / omega.norm();
        blocks.push(Block {
            basis: vec![v, w],
            form: BlockForm::Two { a1: [unit.re, unit.im, 0.0], a2: [1.0, 0.0, 0.0] },
        });
    }
    Ok(BlockDecomposition { blocks })
}

/// `V (⊕ blocks) V†` with `two` random qubit pairs and `one` random `±1`
/// scalar pairs, `V` Haar-random. Returns the pair and its block count.
pub fn random_block_pair<R: Rng + ?Sized>(two: usize, one: usize, rng: &mut R) -> (ObservablePair, usize) {
    let n = 2 * two + one;
    let mut a1 = CMatrix::zeros(n);
    let mut a2 = CMatrix::zeros(n);
    for b in 0..two {
        let (m1, m2) = (pauli::bloch(random_unit3(rng)), pauli::bloch(random_unit3(rng)));
        for i in 0..2 {
            for j in 0..2 {
                a1[(2 * b + i, 2 * b + j)] = m1[(i, j)];
                a2[(2 * b + i, 2 * b + j)] = m2[(i, j)];
            }
        }
    }
    for k in 2 * two..n {
        a1[(k, k)] = c(if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0);
        a2[(k, k)] = c(if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0);
    }
    let v = random_unitary(n, rng);
    let pair = ObservablePair::new(a1.conjugate_by(&v).hermitian_part(), a2.conjugate_by(&v).hermitian_part())
        .expect("conjugated involutions");
    (pair, two + one)
}
