//! Reference computations written independently of the library code paths
//! they check: their own entropies, Bell vectors, correlators, eigenvalue
//! search and CHSH maximization.
#![allow(dead_code)]

use diqkd_core::qmath::{c, CMatrix, C64};

pub const T: f64 = 2.0 * std::f64::consts::SQRT_2;

pub fn h2(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.ln() / std::f64::consts::LN_2 };
    term(p) + term(1.0 - p)
}

pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// Holevo bound for a CHSH value, written out from its definition.
pub fn f_oracle(s: f64) -> f64 {
    if s <= 2.0 {
        return 1.0;
    }
    let c = ((s * s / 4.0) - 1.0).max(0.0).sqrt();
    h2((1.0 + c) / 2.0)
}

pub fn rate_di(q: f64, s: f64) -> f64 {
    1.0 - h2(q) - f_oracle(s)
}

pub fn rate_standard(q: f64, s: f64) -> f64 {
    1.0 - h2(q) - h2(q + s / T)
}

/// Plain bisection assuming `f(lo)` and `f(hi)` differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bell vectors `[Φ+, Ψ-, Φ-, Ψ+]` over `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn bell_vectors() -> [[f64; 4]; 4] {
    let s = 0.5f64.sqrt();
    [[s, 0.0, 0.0, s], [0.0, s, -s, 0.0], [s, 0.0, 0.0, -s], [0.0, s, s, 0.0]]
}

/// `Σ λ_k |B_k⟩⟨B_k|` as a plain 4×4 real matrix.
pub fn bell_diagonal_matrix(l: [f64; 4]) -> [[f64; 4]; 4] {
    let b = bell_vectors();
    let mut m = [[0.0; 4]; 4];
    for k in 0..4 {
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += l[k] * b[k][i] * b[k][j];
            }
        }
    }
    m
}

pub fn paulis() -> [[[C64; 2]; 2]; 3] {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    [[[z, o], [o, z]], [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]], [[o, z], [z, c(-1.0, 0.0)]]]
}

/// `t_ij = Tr[ρ σ_i ⊗ σ_j]` by explicit index sums.
pub fn t_matrix(rho: &CMatrix) -> [[f64; 3]; 3] {
    let p = paulis();
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = c(0.0, 0.0);
            for (r, s) in (0..4).flat_map(|r| (0..4).map(move |s| (r, s))) {
                let m = p[i][s / 2][r / 2] * p[j][s % 2][r % 2];
                acc += rho[(r, s)] * m;
            }
            t[i][j] = acc.re;
        }
    }
    t
}

fn plane_vec(plane: (usize, usize), theta: f64) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[plane.0] = theta.cos();
    v[plane.1] = theta.sin();
    v
}

fn bilinear(t: &[[f64; 3]; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|i| (0..3).map(|j| a[i] * t[i][j] * b[j]).sum::<f64>()).sum()
}

fn chsh_in_plane(t: &[[f64; 3]; 3], plane: (usize, usize), x: [f64; 4]) -> f64 {
    let [a1, a2, b1, b2] = x.map(|th| plane_vec(plane, th));
    bilinear(t, a1, b1) + bilinear(t, a1, b2) + bilinear(t, a2, b1) - bilinear(t, a2, b2)
}

/// Maximum of the CHSH expression over measurement directions confined to
/// each coordinate plane, by coordinate ascent: a 360-point scan of one angle
/// followed by golden-section refinement, repeated until nothing improves.
pub fn chsh_grid_max(t: &[[f64; 3]; 3]) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut best = f64::NEG_INFINITY;
    for plane in [(0, 1), (0, 2), (1, 2)] {
        let mut x = [0.0, tau / 4.0, tau / 8.0, -tau / 8.0];
        let mut val = chsh_in_plane(t, plane, x);
        for _ in 0..100 {
            let before = val;
            for k in 0..4 {
                let eval = |th: f64| {
                    let mut y = x;
                    y[k] = th;
                    chsh_in_plane(t, plane, y)
                };
                let step = tau / 360.0;
                let (mut arg, mut top) = (x[k], val);
                for g in 0..360 {
                    let th = g as f64 * step;
                    let v = eval(th);
                    if v > top {
                        (arg, top) = (th, v);
                    }
                }
                let (mut lo, mut hi) = (arg - step, arg + step);
                let r = (5f64.sqrt() - 1.0) / 2.0;
                for _ in 0..60 {
                    let (m1, m2) = (hi - r * (hi - lo), lo + r * (hi - lo));
                    if eval(m1) < eval(m2) {
                        lo = m1;
                    } else {
                        hi = m2;
                    }
                }
                let mid = 0.5 * (lo + hi);
                if eval(mid) > top {
                    (arg, top) = (mid, eval(mid));
                }
                x[k] = arg;
                val = top;
            }
            if val - before < 1e-15 {
                break;
            }
        }
        best = best.max(val);
    }
    best
}

/// Number of eigenvalues of the Hermitian `m` below `x`, from the signs of
/// the pivots of an `LDL*` factorization of `m - x I` (Sylvester's law of inertia).
fn count_below(m: &[Vec<C64>], x: f64) -> usize {
    let n = m.len();
    let mut a: Vec<Vec<C64>> = m.to_vec();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= c(x, 0.0);
    }
    let mut neg = 0;
    for k in 0..n {
        let mut d = a[k][k].re;
        if d.abs() < 1e-300 {
            d = -1e-300;
        }
        if d < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let f = a[i][k] / d;
            for j in k + 1..n {
                let sub = f * a[k][j];
                a[i][j] -= sub;
            }
        }
    }
    neg
}

/// All eigenvalues of a small Hermitian matrix, descending, by bisection on
/// the inertia count.
pub fn eigenvalues_bisection(m: &[Vec<C64>]) -> Vec<f64> {
    let n = m.len();
    let radius: f64 = m.iter().map(|row| row.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // k-th smallest: smallest x with count_below(x) > k
        let (mut lo, mut hi) = (-radius, radius);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_below(m, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out.reverse();
    out
}

/// Eve's normalized state given Bob's outcome `b` on `cos φ σz + sin φ σx`,
/// from the purification `Σ √λ_k |B_k⟩|k⟩`:
/// `(ρ_E)_kl ∝ √(λ_k λ_l) ⟨B_l| I ⊗ Π_b |B_k⟩`.
pub fn eve_state_oracle(l: [f64; 4], phi: f64, b: f64) -> Vec<Vec<C64>> {
    let bv = bell_vectors();
    let (s, co) = phi.sin_cos();
    // Π_b = (I + b(cos φ σz + sin φ σx))/2 on Bob's qubit
    let pi = [[0.5 * (1.0 + b * co), 0.5 * b * s], [0.5 * b * s, 0.5 * (1.0 - b * co)]];
    let apply = |v: [f64; 4]| -> [f64; 4] {
        let mut w = [0.0; 4];
        for a in 0..2 {
            for j in 0..2 {
                for jj in 0..2 {
                    w[2 * a + j] += pi[j][jj] * v[2 * a + jj];
                }
            }
        }
        w
    };
    let mut m = vec![vec![c(0.0, 0.0); 4]; 4];
    let mut tr = 0.0;
    for k in 0..4 {
        let pk = apply(bv[k]);
        for lidx in 0..4 {
            let overlap: f64 = (0..4).map(|i| bv[lidx][i] * pk[i]).sum();
            m[k][lidx] = c((l[k] * l[lidx]).sqrt() * overlap, 0.0);
        }
        tr += m[k][k].re;
    }
    for row in &mut m {
        for z in row.iter_mut() {
            *z /= tr;
        }
    }
    m
}

/// Wootters concurrence `max(0, μ1 - μ2 - μ3 - μ4)`, `μ_i²` the eigenvalues of
/// `√ρ ρ̃ √ρ` with `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
pub fn wootters_concurrence(rho: &CMatrix) -> f64 {
    let rows = |m: &CMatrix| (0..4).map(|i| (0..4).map(|j| m[(i, j)]).collect()).collect::<Vec<Vec<C64>>>();
    let yy = {
        let y = paulis()[1];
        CMatrix::from_fn(4, |r, s| y[r / 2][s / 2] * y[r % 2][s % 2])
    };
    let tilde = rho.conj().conjugate_by(&yy);
    // ρρ̃ shares its spectrum with √ρ ρ̃ √ρ; restricted to states where the
    // product is already Hermitian so no matrix square root is needed
    let prod = rho * &tilde;
    assert!(prod.max_abs_diff(&prod.adjoint()) < 1e-10, "oracle limited to states with Hermitian ρρ̃");
    let mut mu: Vec<f64> = eigenvalues_bisection(&rows(&prod)).into_iter().map(|v| v.max(0.0).sqrt()).collect();
    mu.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (mu[0] - mu[1] - mu[2] - mu[3]).max(0.0)
}

pub fn to_cmatrix(m: [[f64; 4]; 4]) -> CMatrix {
    CMatrix::from_fn(4, |i, j| c(m[i][j], 0.0))
}

/// `P(ab|XY)` of the separable BB84 model by enumeration of the shared bits:
/// `P = ¼ Σ_z δ(a, z_X) δ(b, z_Y)` with outcome `+1 ↔ z = 0`.
pub fn bb84_local_table(x: usize, y: usize) -> [[f64; 2]; 2] {
    let mut p = [[0.0; 2]; 2];
    for z in 0..4usize {
        let bits = [z & 1, z >> 1];
        p[bits[x]][bits[y]] += 0.25;
    }
    p
}
