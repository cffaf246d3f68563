//! Composite Hilbert space of two qubits and one truncated bosonic mode.
//!
//! Tensor factors are ordered (qubit 1, qubit 2, mode). Each qubit uses the
//! ordered basis (|e⟩, |g⟩), so the two-qubit basis is (ee, eg, ge, gg), and
//! the mode keeps Fock levels 0..=N. The basis element (q1, q2, n) sits at
//! index `q1·2(N+1) + q2·(N+1) + n`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use ndarray::{s, Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::linalg;

/// Index of |e⟩ in a single-qubit basis.
pub const EXCITED: usize = 0;
/// Index of |g⟩ in a single-qubit basis.
pub const GROUND: usize = 1;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HilbertError {
    #[error("fock cutoff must be at least 1, got {0}")]
    InvalidCutoff(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("unknown state name {0:?} (expected one of G0, E, PsiPlus, PsiMinus)")]
    UnknownState(String),
    #[error("not a valid density matrix: {0}")]
    NotPhysical(String),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// Dimension structure of qubit ⊗ qubit ⊗ Fock(N).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceLayout {
    fock_cutoff: usize,
}

impl SpaceLayout {
    pub fn new(fock_cutoff: usize) -> Result<Self, HilbertError> {
        if fock_cutoff < 1 {
            return Err(HilbertError::InvalidCutoff(fock_cutoff));
        }
        Ok(Self { fock_cutoff })
    }

    /// Layout whose total dimension is `dim`, if one exists.
    pub fn from_dim(dim: usize) -> Result<Self, HilbertError> {
        if dim % 4 != 0 || dim < 8 {
            return Err(HilbertError::DimensionMismatch { expected: 4 * 2, found: dim });
        }
        Self::new(dim / 4 - 1)
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn mode_dim(&self) -> usize {
        self.fock_cutoff + 1
    }

    pub fn subsystem_dims(&self) -> [usize; 3] {
        [2, 2, self.mode_dim()]
    }

    /// Total dimension D = 4(N+1).
    pub fn dim(&self) -> usize {
        self.subsystem_dims().iter().product()
    }

    pub fn index(&self, q1: usize, q2: usize, n: usize) -> usize {
        debug_assert!(q1 < 2 && q2 < 2 && n <= self.fock_cutoff);
        q1 * 2 * self.mode_dim() + q2 * self.mode_dim() + n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Qubit1,
    Qubit2,
    Mode,
}

impl Subsystem {
    fn position(self) -> usize {
        match self {
            Subsystem::Qubit1 => 0,
            Subsystem::Qubit2 => 1,
            Subsystem::Mode => 2,
        }
    }
}

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: Array2<C64>,
}

impl Operator {
    pub fn from_array(mat: Array2<C64>) -> Result<Self, HilbertError> {
        let (rows, cols) = mat.dim();
        if rows != cols {
            return Err(HilbertError::NotSquare { rows, cols });
        }
        Ok(Self { mat })
    }

    /// Real-valued matrix lifted to complex entries.
    pub fn from_real(mat: &Array2<f64>) -> Result<Self, HilbertError> {
        Self::from_array(mat.mapv(|x| C64::new(x, 0.0)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: Array2::zeros((dim, dim)) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: Array2::eye(dim) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_array(self) -> Array2<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[[row, col]]
    }

    pub fn dot(&self, other: &Operator) -> Operator {
        Operator { mat: self.mat.dot(&other.mat) }
    }

    pub fn adjoint(&self) -> Operator {
        Operator { mat: self.mat.t().mapv(|z| z.conj()) }
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator { mat: self.mat.mapv(|z| z * factor) }
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &self.dot(other) - &other.dot(self)
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Operator {
        let (m, n) = (self.dim(), other.dim());
        let mut out = Array2::zeros((m * n, m * n));
        for ((i, j), &a) in self.mat.indexed_iter() {
            if a == ZERO {
                continue;
            }
            out.slice_mut(s![i * n..(i + 1) * n, j * n..(j + 1) * n])
                .assign(&other.mat.mapv(|b| a * b));
        }
        Operator { mat: out }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector, HilbertError> {
        if psi.dim() != self.dim() {
            return Err(HilbertError::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        Ok(StateVector { amps: self.mat.dot(&psi.amps) })
    }

    /// ⟨bra|self|ket⟩.
    pub fn matrix_element(&self, bra: &StateVector, ket: &StateVector) -> C64 {
        bra.amps.mapv(|z| z.conj()).dot(&self.mat.dot(&ket.amps))
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |A − A†| entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut err = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                err = err.max((self.mat[[i, j]] - self.mat[[j, i]].conj()).norm());
            }
        }
        err
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat - &rhs.mat }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator { mat: self.mat.mapv(|z| z * rhs) }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

/// σ₋ = |g⟩⟨e| on a single qubit.
pub fn sigma_minus() -> Operator {
    let mut m = Array2::zeros((2, 2));
    m[[GROUND, EXCITED]] = ONE;
    Operator { mat: m }
}

/// σ₊ = |e⟩⟨g| on a single qubit.
pub fn sigma_plus() -> Operator {
    sigma_minus().adjoint()
}

/// σ_ee = |e⟩⟨e| on a single qubit.
pub fn sigma_ee() -> Operator {
    let mut m = Array2::zeros((2, 2));
    m[[EXCITED, EXCITED]] = ONE;
    Operator { mat: m }
}

/// Mode annihilation operator on Fock levels 0..=N, with ⟨n−1|a|n⟩ = √n.
pub fn annihilation(fock_cutoff: usize) -> Result<Operator, HilbertError> {
    if fock_cutoff < 1 {
        return Err(HilbertError::InvalidCutoff(fock_cutoff));
    }
    let dim = fock_cutoff + 1;
    let mut m = Array2::zeros((dim, dim));
    for n in 1..dim {
        m[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(Operator { mat: m })
}

pub fn creation(fock_cutoff: usize) -> Result<Operator, HilbertError> {
    Ok(annihilation(fock_cutoff)?.adjoint())
}

/// Lift a single-subsystem operator to the full space, identity elsewhere.
pub fn embed(op: &Operator, slot: Subsystem, layout: &SpaceLayout) -> Result<Operator, HilbertError> {
    let dims = layout.subsystem_dims();
    let expected = dims[slot.position()];
    if op.dim() != expected {
        return Err(HilbertError::DimensionMismatch { expected, found: op.dim() });
    }
    let factors: Vec<Operator> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| if k == slot.position() { op.clone() } else { Operator::identity(d) })
        .collect();
    Ok(factors[0].kron(&factors[1]).kron(&factors[2]))
}

/// Pure state amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Array1<C64>,
}

impl StateVector {
    pub fn from_array(amps: Array1<C64>) -> Self {
        Self { amps }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = Array1::zeros(dim);
        amps[index] = ONE;
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn as_array(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// |self⟩⟨self|.
    pub fn projector(&self) -> Operator {
        let n = self.dim();
        Operator { mat: Array2::from_shape_fn((n, n), |(i, j)| self.amps[i] * self.amps[j].conj()) }
    }

    pub fn is_zero(&self) -> bool {
        self.amps.iter().all(|z| *z == ZERO)
    }
}

/// The four states spanning ground and single-excitation manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedState {
    /// |g,g⟩⊗|0⟩
    G0,
    /// |g,g⟩⊗|1⟩
    E,
    /// (|e,g⟩ + |g,e⟩)/√2 ⊗ |0⟩
    PsiPlus,
    /// (|e,g⟩ − |g,e⟩)/√2 ⊗ |0⟩
    PsiMinus,
}

impl NamedState {
    pub const ALL: [NamedState; 4] = [NamedState::G0, NamedState::E, NamedState::PsiPlus, NamedState::PsiMinus];

    pub fn as_str(self) -> &'static str {
        match self {
            NamedState::G0 => "G0",
            NamedState::E => "E",
            NamedState::PsiPlus => "PsiPlus",
            NamedState::PsiMinus => "PsiMinus",
        }
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NamedState {
    type Err = HilbertError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NamedState::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| HilbertError::UnknownState(s.to_string()))
    }
}

pub fn named_state(name: NamedState, layout: &SpaceLayout) -> StateVector {
    let d = layout.dim();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = Array1::zeros(d);
    match name {
        NamedState::G0 => amps[layout.index(GROUND, GROUND, 0)] = ONE,
        NamedState::E => amps[layout.index(GROUND, GROUND, 1)] = ONE,
        NamedState::PsiPlus => {
            amps[layout.index(EXCITED, GROUND, 0)] = C64::new(h, 0.0);
            amps[layout.index(GROUND, EXCITED, 0)] = C64::new(h, 0.0);
        }
        NamedState::PsiMinus => {
            amps[layout.index(EXCITED, GROUND, 0)] = C64::new(h, 0.0);
            amps[layout.index(GROUND, EXCITED, 0)] = C64::new(-h, 0.0);
        }
    }
    StateVector { amps }
}

/// Tolerances for accepting a matrix as a physical state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physicality {
    pub hermiticity: f64,
    pub trace: f64,
    /// Most negative eigenvalue allowed, as a positive number.
    pub negativity: f64,
}

impl Physicality {
    pub const STRICT: Physicality = Physicality { hermiticity: 1e-10, trace: 1e-8, negativity: 1e-8 };
    /// For states produced by long integrations.
    pub const INTEGRATED: Physicality = Physicality { hermiticity: 1e-8, trace: 1e-6, negativity: 1e-8 };
}

/// Measured deviations from an exact density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalityReport {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl PhysicalityReport {
    pub fn satisfies(&self, tol: &Physicality) -> bool {
        self.hermiticity_error <= tol.hermiticity
            && self.trace_error <= tol.trace
            && self.min_eigenvalue >= -tol.negativity
    }
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self, HilbertError> {
        Self::with_tolerance(op, &Physicality::STRICT)
    }

    pub fn with_tolerance(op: Operator, tol: &Physicality) -> Result<Self, HilbertError> {
        let rho = Self { op };
        let report = rho.physicality()?;
        if !report.satisfies(tol) {
            return Err(HilbertError::NotPhysical(format!(
                "hermiticity error {:.3e}, trace error {:.3e}, min eigenvalue {:.3e}",
                report.hermiticity_error, report.trace_error, report.min_eigenvalue
            )));
        }
        Ok(rho)
    }

    /// Wrap without checking; callers vouch for the invariants.
    pub fn new_unchecked(op: Operator) -> Self {
        Self { op }
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let n = psi.norm();
        Self { op: psi.projector().scale(1.0 / (n * n)) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: Operator::identity(dim).scale(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn as_array(&self) -> &Array2<C64> {
        self.op.as_array()
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn trace(&self) -> f64 {
        self.op.trace().re
    }

    /// (ρ + ρ†)/2.
    pub fn symmetrized(&self) -> Self {
        let sym = (&self.op + &self.op.adjoint()).scale(0.5);
        Self { op: sym }
    }

    pub fn min_eigenvalue(&self) -> Result<f64, HilbertError> {
        let ev = linalg::hermitian_eigenvalues(self.symmetrized().as_array())?;
        Ok(ev.first().copied().unwrap_or(0.0))
    }

    pub fn physicality(&self) -> Result<PhysicalityReport, HilbertError> {
        Ok(PhysicalityReport {
            hermiticity_error: self.op.hermiticity_error(),
            trace_error: (self.op.trace() - ONE).norm(),
            min_eigenvalue: self.min_eigenvalue()?,
        })
    }
}

/// Trace out the mode, leaving the 4×4 two-qubit state on (ee, eg, ge, gg).
pub fn partial_trace_mode(rho: &DensityMatrix, layout: &SpaceLayout) -> Result<DensityMatrix, HilbertError> {
    if rho.dim() != layout.dim() {
        return Err(HilbertError::DimensionMismatch { expected: layout.dim(), found: rho.dim() });
    }
    let m = layout.mode_dim();
    let full = rho.as_array();
    let reduced = Array2::from_shape_fn((4, 4), |(a, b)| (0..m).map(|n| full[[a * m + n, b * m + n]]).sum());
    Ok(DensityMatrix::new_unchecked(Operator { mat: reduced }))
}
