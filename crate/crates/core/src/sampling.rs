//! Seeded random objects for sweeps and tests.
//!
//! Sweeps derive one generator per sample index with [`indexed_rng`], so the
//! sampled points depend only on `(seed, index)` and not on how the work is
//! split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::chsh::BellDiagonalState;
use crate::qmath::{c, inner, CMatrix, DensityMatrix, C64};

/// Counter-based generator: ChaCha8 keyed by `seed`, stream `index`.
pub fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian_c<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im)
}

/// Hermitian matrix with independent Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, |_, _| gaussian_c(rng));
    (&g + &g.adjoint()).scale_re(0.5)
}

/// Haar-distributed unitary from Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian_c(rng)).collect();
        // two passes keep the columns orthogonal to rounding precision
        for _ in 0..2 {
            for u in &cols {
                let proj = inner(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let n = crate::qmath::norm(&v);
        if n > 1e-8 {
            cols.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    CMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// `G G† / Tr(G G†)` with `G` a `dim x rank` complex Gaussian matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g: Vec<C64> = (0..dim * rank).map(|_| gaussian_c(rng)).collect();
    let m = CMatrix::from_fn(dim, |i, j| (0..rank).map(|k| g[i * rank + k] * g[j * rank + k].conj()).sum());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_re(1.0 / tr)).expect("Gram matrix is a valid state")
}

/// Four normalized exponential variates, i.e. a uniform point of the simplex.
pub fn random_simplex4<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    let mut x = [0.0; 4];
    for v in &mut x {
        *v = Exp1.sample(rng);
    }
    let total: f64 = x.iter().sum();
    x.map(|v| v / total)
}

/// Bell-diagonal state sorted within each sector
/// (`λ_Φ+ ≥ λ_Ψ-`, `λ_Φ- ≥ λ_Ψ+`) by the sector relabelings.
pub fn random_ordered_bell_diagonal<R: Rng + ?Sized>(rng: &mut R) -> BellDiagonalState {
    let mut l = random_simplex4(rng);
    if l[0] < l[1] {
        l.swap(0, 1);
    }
    if l[2] < l[3] {
        l.swap(2, 3);
    }
    BellDiagonalState::new(l).expect("normalized simplex point")
}

/// Random unit vector in R^3.
pub fn random_unit3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-6 {
            return v.map(|x| x / n);
        }
    }
}
