//! CHSH correlators, maximal violations and Bell-diagonal states.
//!
//! Conventions used throughout the crate:
//!
//! * Outcomes are `±1`; the `+1` outcome of an observable `O` has projector
//!   `(I + O)/2`.
//! * The CHSH polynomial is `S = ⟨A1 B1⟩ + ⟨A1 B2⟩ + ⟨A2 B1⟩ - ⟨A2 B2⟩`.
//! * The Bell basis is ordered `{Φ+, Ψ-, Φ-, Ψ+}`, with
//!   `Φ± = (|00⟩ ± |11⟩)/√2` and `Ψ± = (|01⟩ ± |10⟩)/√2`.

mod bb84;
pub(crate) mod table;

pub use bb84::{bb84_counterexample, bb84_ideal_table, Bb84Counterexample};
pub use table::{
    chsh_from_table, table_from_state, table_statistics, CorrelationTable, PairStats, TableStatistics, PROTOCOL_PAIRS,
};

use std::f64::consts::FRAC_1_SQRT_2;

use crate::qmath::{c, hermitian_eigensystem, pauli, CMatrix, DensityMatrix, ProbabilityVector, C64};
use crate::{Error, Result};

/// A `±1`-valued observable: Hermitian and squaring to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable(CMatrix);

impl Observable {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_hermitian() {
            return Err(Error::precondition("observable is not Hermitian"));
        }
        let sq = &m * &m;
        let defect = sq.max_abs_diff(&CMatrix::identity(m.dim()));
        if defect > 1e-10 {
            return Err(Error::precondition(format!("observable does not square to identity (defect {defect:.3e})")));
        }
        Ok(Observable(m))
    }

    /// `n·σ` for a unit Bloch vector `n`.
    pub fn bloch(n: [f64; 3]) -> Result<Self> {
        Observable::new(pauli::bloch(n))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Projector onto the eigenspace of outcome `+1` (`plus = true`) or `-1`.
    pub fn projector(&self, plus: bool) -> CMatrix {
        let id = CMatrix::identity(self.dim());
        let signed = if plus { &id + &self.0 } else { &id - &self.0 };
        signed.scale_re(0.5)
    }
}

/// Qubit observable `cos φ σz + sin φ σx` in the (x, z) plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XZMeasurement {
    pub phi: f64,
}

impl XZMeasurement {
    pub fn new(phi: f64) -> Self {
        XZMeasurement { phi }
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        [self.phi.sin(), 0.0, self.phi.cos()]
    }

    pub fn observable(&self) -> Observable {
        Observable(pauli::bloch(self.bloch_vector()))
    }
}

/// Alice's and Bob's observables, keyed by input label.
///
/// The protocol uses Alice inputs `0, 1, 2` and Bob inputs `1, 2`; other
/// experiments (such as the BB84 example) may use any labels.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    alice: Vec<(u8, Observable)>,
    bob: Vec<(u8, Observable)>,
}

impl MeasurementSet {
    pub fn labeled(alice: Vec<(u8, Observable)>, bob: Vec<(u8, Observable)>) -> Result<Self> {
        let uniform = |v: &[(u8, Observable)]| v.windows(2).all(|w| w[0].1.dim() == w[1].1.dim());
        if alice.is_empty() || bob.is_empty() || !uniform(&alice) || !uniform(&bob) {
            return Err(Error::domain("each party needs at least one observable, all of one dimension"));
        }
        Ok(MeasurementSet { alice, bob })
    }

    /// Protocol layout: Alice `A0, A1, A2`, Bob `B1, B2`.
    pub fn protocol(a: [Observable; 3], b: [Observable; 2]) -> Result<Self> {
        let [a0, a1, a2] = a;
        let [b1, b2] = b;
        Self::labeled(vec![(0, a0), (1, a1), (2, a2)], vec![(1, b1), (2, b2)])
    }

    /// Protocol layout from (x, z)-plane angles `[A0, A1, A2]`, `[B1, B2]`.
    pub fn from_angles(alice: [f64; 3], bob: [f64; 2]) -> Self {
        Self::protocol(
            alice.map(|p| XZMeasurement::new(p).observable()),
            bob.map(|p| XZMeasurement::new(p).observable()),
        )
        .expect("qubit observables")
    }

    /// `A0 = B1 = σz`, `A1,2 = (σz ± σx)/√2`, `B2 = σx`: optimal for `Φ+`.
    pub fn standard() -> Self {
        use std::f64::consts::FRAC_PI_4;
        Self::from_angles([0.0, FRAC_PI_4, -FRAC_PI_4], [0.0, 2.0 * FRAC_PI_4])
    }

    pub fn alice(&self, x: u8) -> Option<&Observable> {
        self.alice.iter().find(|(l, _)| *l == x).map(|(_, o)| o)
    }

    pub fn bob(&self, y: u8) -> Option<&Observable> {
        self.bob.iter().find(|(l, _)| *l == y).map(|(_, o)| o)
    }

    pub fn alice_labels(&self) -> impl Iterator<Item = u8> + '_ {
        self.alice.iter().map(|(l, _)| *l)
    }

    pub fn bob_labels(&self) -> impl Iterator<Item = u8> + '_ {
        self.bob.iter().map(|(l, _)| *l)
    }

    pub fn local_dims(&self) -> (usize, usize) {
        (self.alice[0].1.dim(), self.bob[0].1.dim())
    }

    fn chsh_quad(&self) -> Result<[&Observable; 4]> {
        fn get<'a>(o: Option<&'a Observable>, name: &str) -> Result<&'a Observable> {
            o.ok_or_else(|| Error::domain(format!("measurement {name} missing")))
        }
        Ok([get(self.alice(1), "A1")?, get(self.alice(2), "A2")?, get(self.bob(1), "B1")?, get(self.bob(2), "B2")?])
    }
}

/// `Tr[ρ (a ⊗ b)]`.
pub fn correlator(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    if a.dim() * b.dim() != rho.dim() {
        return Err(Error::domain(format!(
            "observables of dims {}, {} do not match a {}-dim state",
            a.dim(),
            b.dim(),
            rho.dim()
        )));
    }
    Ok(rho.expectation(&a.matrix().kron(b.matrix())))
}

pub fn chsh_value(rho: &DensityMatrix, m: &MeasurementSet) -> Result<f64> {
    let [a1, a2, b1, b2] = m.chsh_quad()?;
    Ok(correlator(rho, a1, b1)? + correlator(rho, a1, b2)? + correlator(rho, a2, b1)? - correlator(rho, a2, b2)?)
}

/// Correlation matrix `t_ij = Tr[σi ⊗ σj ρ]` with `i, j` over `(x, y, z)`.
pub fn correlation_matrix(rho: &DensityMatrix) -> Result<[[f64; 3]; 3]> {
    if rho.dim() != 4 {
        return Err(Error::domain("correlation matrix needs a two-qubit state"));
    }
    let p = pauli::xyz();
    let mut t = [[0.0; 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = rho.expectation(&p[i].kron(&p[j]));
        }
    }
    Ok(t)
}

/// Maximal CHSH value of a two-qubit state and measurements that reach it.
#[derive(Debug, Clone)]
pub struct HorodeckiOptimum {
    pub s_max: f64,
    /// Eigenvalues of `TᵀT`, descending.
    pub tau: [f64; 3],
    /// Bloch vectors of `A1`, `A2`.
    pub alice: [[f64; 3]; 2],
    /// Bloch vectors of `B1`, `B2`.
    pub bob: [[f64; 3]; 2],
}

impl HorodeckiOptimum {
    /// Measurement set reaching `s_max`; `A0` is aligned with `B1`.
    pub fn measurements(&self) -> MeasurementSet {
        let o = |v: [f64; 3]| Observable(pauli::bloch(v));
        MeasurementSet::protocol([o(self.bob[0]), o(self.alice[0]), o(self.alice[1])], [o(self.bob[0]), o(self.bob[1])])
            .expect("qubit observables")
    }
}

fn mat_vec(t: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| (0..3).map(|j| t[i][j] * v[j]).sum())
}

fn unit_or(v: [f64; 3], fallback: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n > 1e-14 {
        v.map(|x| x / n)
    } else {
        fallback
    }
}

/// Horodecki criterion: `S_max = 2√(τ1 + τ2)` with `τ1 ≥ τ2` the two largest
/// eigenvalues of `TᵀT`.
pub fn chsh_max_horodecki(rho: &DensityMatrix) -> Result<HorodeckiOptimum> {
    let t = correlation_matrix(rho)?;
    let ttt = CMatrix::from_fn(3, |i, j| c((0..3).map(|k| t[k][i] * t[k][j]).sum(), 0.0));
    let es = hermitian_eigensystem(&ttt)?;
    let tau = [es.values[0].max(0.0), es.values[1].max(0.0), es.values[2].max(0.0)];
    let s_max = 2.0 * (tau[0] + tau[1]).sqrt();

    let v1: [f64; 3] = [0, 1, 2].map(|i| es.vectors[(i, 0)].re);
    let v2: [f64; 3] = [0, 1, 2].map(|i| es.vectors[(i, 1)].re);
    // Bob: b1,2 = cos t v1 ± sin t v2 with tan t = √(τ2/τ1)
    let angle = tau[1].sqrt().atan2(tau[0].sqrt());
    let (ct, st) = (angle.cos(), angle.sin());
    let b1 = [0, 1, 2].map(|i| ct * v1[i] + st * v2[i]);
    let b2 = [0, 1, 2].map(|i| ct * v1[i] - st * v2[i]);
    // Alice: a1 ∝ T(b1 + b2), a2 ∝ T(b1 - b2)
    let a1 = unit_or(mat_vec(&t, [0, 1, 2].map(|i| b1[i] + b2[i])), [0.0, 0.0, 1.0]);
    let a2 = unit_or(mat_vec(&t, [0, 1, 2].map(|i| b1[i] - b2[i])), [1.0, 0.0, 0.0]);
    Ok(HorodeckiOptimum { s_max, tau, alice: [a1, a2], bob: [b1, b2] })
}

/// Index of each Bell state in the global basis order.
pub const PHI_PLUS: usize = 0;
pub const PSI_MINUS: usize = 1;
pub const PHI_MINUS: usize = 2;
pub const PSI_PLUS: usize = 3;

/// Bell states `[Φ+, Ψ-, Φ-, Ψ+]` in the computational basis `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn bell_states() -> [[C64; 4]; 4] {
    let s = FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    [
        [c(s, 0.0), z, z, c(s, 0.0)],
        [z, c(s, 0.0), c(-s, 0.0), z],
        [c(s, 0.0), z, z, c(-s, 0.0)],
        [z, c(s, 0.0), c(s, 0.0), z],
    ]
}

/// Unitary whose columns are the Bell states in basis order.
pub fn bell_basis_matrix() -> CMatrix {
    let b = bell_states();
    CMatrix::from_fn(4, |i, j| b[j][i])
}

/// Matrix elements `⟨B_i|M|B_j⟩` in the Bell basis.
pub fn to_bell_basis(m: &CMatrix) -> CMatrix {
    let b = bell_basis_matrix();
    &(&b.adjoint() * m) * &b
}

/// Inverse of [`to_bell_basis`].
pub fn from_bell_basis(m: &CMatrix) -> CMatrix {
    m.conjugate_by(&bell_basis_matrix())
}

/// `|Φ+⟩⟨Φ+|`
pub fn phi_plus() -> DensityMatrix {
    DensityMatrix::pure(&bell_states()[PHI_PLUS]).expect("normalized")
}

/// `p |Φ+⟩⟨Φ+| + (1 - p) I/4`, valid for `p ∈ [-1/3, 1]`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    if !(-1.0 / 3.0 - 1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(Error::domain(format!("Werner parameter {p} outside [-1/3, 1]")));
    }
    let w = (1.0 - p) / 4.0;
    BellDiagonalState::new([p + w, w, w, w]).map(|s| s.density())
}

const ORDER_SLACK: f64 = 1e-12;

/// Two-qubit state diagonal in the Bell basis, weights ordered `[Φ+, Ψ-, Φ-, Ψ+]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalState {
    lambda: [f64; 4],
}

impl BellDiagonalState {
    pub fn new(lambda: [f64; 4]) -> Result<Self> {
        ProbabilityVector::new(lambda.to_vec())?;
        Ok(BellDiagonalState { lambda })
    }

    /// Like [`new`](Self::new) but also requires the sector ordering.
    pub fn ordered(lambda: [f64; 4]) -> Result<Self> {
        let s = Self::new(lambda)?;
        s.require_ordered()?;
        Ok(s)
    }

    pub fn lambda(&self) -> [f64; 4] {
        self.lambda
    }

    pub fn phi_plus(&self) -> f64 {
        self.lambda[PHI_PLUS]
    }
    pub fn psi_minus(&self) -> f64 {
        self.lambda[PSI_MINUS]
    }
    pub fn phi_minus(&self) -> f64 {
        self.lambda[PHI_MINUS]
    }
    pub fn psi_plus(&self) -> f64 {
        self.lambda[PSI_PLUS]
    }

    /// `λ_Φ+ ≥ λ_Ψ-` and `λ_Φ- ≥ λ_Ψ+`.
    pub fn is_ordered(&self) -> bool {
        self.phi_plus() + ORDER_SLACK >= self.psi_minus() && self.phi_minus() + ORDER_SLACK >= self.psi_plus()
    }

    pub fn require_ordered(&self) -> Result<()> {
        if self.is_ordered() {
            Ok(())
        } else {
            Err(Error::domain(format!("Bell-diagonal weights {:?} violate the sector ordering", self.lambda)))
        }
    }

    /// Sector gaps `(λ_Φ+ - λ_Ψ-, λ_Φ- - λ_Ψ+)`.
    pub fn gaps(&self) -> (f64, f64) {
        (self.phi_plus() - self.psi_minus(), self.phi_minus() - self.psi_plus())
    }

    pub fn probabilities(&self) -> ProbabilityVector {
        ProbabilityVector::new(self.lambda.to_vec()).expect("validated at construction")
    }

    pub fn density(&self) -> DensityMatrix {
        let b = bell_states();
        let mut m = CMatrix::zeros(4);
        for (k, state) in b.iter().enumerate() {
            m = &m + &CMatrix::outer(state).scale_re(self.lambda[k]);
        }
        DensityMatrix::new(m).expect("convex combination of Bell projectors")
    }

    /// Mixes toward the maximally mixed state: `t λ + (1 - t) (¼, ¼, ¼, ¼)`.
    pub fn depolarize(&self, t: f64) -> Result<Self> {
        Self::new(self.lambda.map(|l| t * l + (1.0 - t) * 0.25))
    }
}

/// Closed-form maximal CHSH value of an ordered Bell-diagonal state.
pub fn chsh_max_belldiag(s: &BellDiagonalState) -> Result<f64> {
    s.require_ordered()?;
    let [pp, sm, pm, sp] = s.lambda();
    let first = ((pp - sm).powi(2) + (pm - sp).powi(2)).sqrt();
    let second = ((pp - sp).powi(2) + (pm - sm).powi(2)).sqrt();
    Ok(crate::TSIRELSON * first.max(second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use crate::TSIRELSON;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn correlator_examples() {
        let z = XZMeasurement::new(0.0).observable();
        assert!((correlator(&phi_plus(), &z, &z).unwrap() - 1.0).abs() < 1e-15);
        let x = XZMeasurement::new(std::f64::consts::FRAC_PI_2).observable();
        assert!(correlator(&DensityMatrix::maximally_mixed(4), &z, &x).unwrap().abs() < 1e-15);
        // Tr[W(0.8) σz⊗σz] = 0.8·1 + 0.2·Tr[σz⊗σz]/4 = 0.8
        assert!((correlator(&werner(0.8).unwrap(), &z, &z).unwrap() - 0.8).abs() < 1e-15);
        assert!(correlator(&DensityMatrix::maximally_mixed(8), &z, &z).is_err());
    }

    #[test]
    fn chsh_value_examples() {
        let m = MeasurementSet::standard();
        assert!((chsh_value(&phi_plus(), &m).unwrap() - TSIRELSON).abs() < 1e-14);
        for p in [0.0, 0.3, 0.71, 0.9, 1.0] {
            assert!((chsh_value(&werner(p).unwrap(), &m).unwrap() - TSIRELSON * p).abs() < 1e-14);
        }
        let zero_zero = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((chsh_value(&zero_zero, &m).unwrap() - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn horodecki_examples() {
        assert!((chsh_max_horodecki(&phi_plus()).unwrap().s_max - TSIRELSON).abs() < 1e-12);
        assert!(chsh_max_horodecki(&DensityMatrix::maximally_mixed(4)).unwrap().s_max.abs() < 1e-12);
    }

    #[test]
    fn horodecki_measurements_attain_the_maximum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let rho = sampling::random_density_matrix(4, 1 + rand::Rng::random_range(&mut rng, 0..4), &mut rng);
            let opt = chsh_max_horodecki(&rho).unwrap();
            let s = chsh_value(&rho, &opt.measurements()).unwrap();
            assert!((s - opt.s_max).abs() < 1e-9, "{s} vs {}", opt.s_max);
        }
    }

    #[test]
    fn belldiag_examples() {
        let s = |l| chsh_max_belldiag(&BellDiagonalState::new(l).unwrap()).unwrap();
        assert!((s([1.0, 0.0, 0.0, 0.0]) - TSIRELSON).abs() < 1e-15);
        assert!(s([0.25; 4]).abs() < 1e-15);
        let cc: f64 = 0.6;
        let v = s([(1.0 + cc) / 2.0, 0.0, (1.0 - cc) / 2.0, 0.0]);
        assert!((v - 2.0 * (1.0 + cc * cc).sqrt()).abs() < 1e-14);
        assert!((v - 2.332_380_757_938_12).abs() < 1e-12);
        assert!(chsh_max_belldiag(&BellDiagonalState::new([0.1, 0.5, 0.2, 0.2]).unwrap()).is_err());
    }

    #[test]
    fn belldiag_matches_horodecki_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..500 {
            let st = sampling::random_ordered_bell_diagonal(&mut rng);
            let closed = chsh_max_belldiag(&st).unwrap();
            let horo = chsh_max_horodecki(&st.density()).unwrap().s_max;
            assert!((closed - horo).abs() <= 1e-10);
        }
    }

    #[test]
    fn observable_validation() {
        assert!(Observable::new(CMatrix::real_diag(&[1.0, 0.5])).is_err());
        assert!(Observable::bloch([0.6, 0.0, 0.8]).is_ok());
        let o = XZMeasurement::new(0.3).observable();
        let sq = o.matrix() * o.matrix();
        assert!(sq.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn bell_states_are_orthonormal() {
        let b = bell_basis_matrix();
        assert!((&b.adjoint() * &b).max_abs_diff(&CMatrix::identity(4)) < 1e-15);
        let st = BellDiagonalState::new([0.4, 0.3, 0.2, 0.1]).unwrap();
        let diag = to_bell_basis(st.density().matrix());
        assert!(diag.max_abs_diff(&CMatrix::real_diag(&[0.4, 0.3, 0.2, 0.1])) < 1e-15);
    }
}
