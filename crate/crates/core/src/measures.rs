//! Entanglement and diagnostic observables.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::hilbert::{
    named_state, partial_trace_mode, DensityMatrix, HilbertError, NamedState, Physicality,
    SpaceLayout, StateVector,
};
use crate::linalg;
use crate::model::FullOperators;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dark state undefined for g = delta = 0")]
    DegenerateDarkState,
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

impl From<linalg::LinalgError> for MeasureError {
    fn from(e: linalg::LinalgError) -> Self {
        MeasureError::Hilbert(e.into())
    }
}

/// Two-qubit density matrix on (ee, eg, ge, gg).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState(DensityMatrix);

impl TwoQubitState {
    pub fn new(rho: DensityMatrix) -> Result<Self, MeasureError> {
        Self::with_tolerance(rho, &Physicality::STRICT)
    }

    pub fn with_tolerance(rho: DensityMatrix, tol: &Physicality) -> Result<Self, MeasureError> {
        if rho.dim() != 4 {
            return Err(MeasureError::DimensionMismatch { expected: 4, found: rho.dim() });
        }
        let rho = DensityMatrix::with_tolerance(rho.into_operator(), tol)?;
        Ok(Self(rho))
    }

    /// Reduced state of a full-space density matrix.
    pub fn from_full(rho: &DensityMatrix, layout: &SpaceLayout, tol: &Physicality) -> Result<Self, MeasureError> {
        Self::with_tolerance(partial_trace_mode(rho, layout)?, tol)
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.0
    }
}

/// σ_y ⊗ σ_y on (ee, eg, ge, gg): antidiagonal (−1, +1, +1, −1).
fn spin_flip() -> Array2<C64> {
    let mut y = Array2::zeros((4, 4));
    for (row, sign) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        y[[row, 3 - row]] = C64::new(sign, 0.0);
    }
    y
}

/// Wootters concurrence max(0, λ₁ − λ₂ − λ₃ − λ₄), where λᵢ are the square
/// roots of the eigenvalues of ρρ̃ in decreasing order.
///
/// With ρ = AA† the λᵢ are the singular values of Aᵀ(σ_y⊗σ_y)A, which avoids
/// square roots of near-zero eigenvalues (√ε ≈ 1e-8 error for pure states).
pub fn concurrence(state: &TwoQubitState) -> Result<f64, MeasureError> {
    let (values, vectors) = linalg::hermitian_eigen(state.density().as_array())?;
    let mut a = vectors;
    for (mut col, d) in a.columns_mut().into_iter().zip(values) {
        col *= C64::new(d.max(0.0).sqrt(), 0.0);
    }
    let tau = a.t().dot(&spin_flip()).dot(&a);
    let s = linalg::singular_values(&tau)?;
    Ok((s[0] - s[1] - s[2] - s[3]).max(0.0))
}

/// Concurrence of the two-qubit state left after tracing out the mode.
pub fn qubit_concurrence(rho: &DensityMatrix, layout: &SpaceLayout, tol: &Physicality) -> Result<f64, MeasureError> {
    concurrence(&TwoQubitState::from_full(rho, layout, tol)?)
}

/// Zero-energy eigenvector of the single-excitation Hamiltonian,
/// c_E|E⟩ + c_Ψ₋|Ψ₋⟩ with no |Ψ₊⟩ component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DarkState {
    pub c_e: f64,
    pub c_psi_minus: f64,
}

impl DarkState {
    /// Amplitudes on (|E⟩, |Ψ₊⟩, |Ψ₋⟩).
    pub fn reduced_vector(&self) -> [f64; 3] {
        [self.c_e, 0.0, self.c_psi_minus]
    }

    pub fn full_state(&self, layout: &SpaceLayout) -> StateVector {
        let e = named_state(NamedState::E, layout);
        let m = named_state(NamedState::PsiMinus, layout);
        StateVector::from_array(e.as_array() * self.c_e + m.as_array() * self.c_psi_minus)
    }
}

pub fn dark_state(g: f64, delta: f64) -> Result<DarkState, MeasureError> {
    if g == 0.0 && delta == 0.0 {
        return Err(MeasureError::DegenerateDarkState);
    }
    let norm = (delta * delta + 2.0 * g * g).sqrt();
    Ok(DarkState { c_e: -delta / norm, c_psi_minus: std::f64::consts::SQRT_2 * g / norm })
}

/// Populations of the named states and the mean excitation of the mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Populations {
    pub p_g0: f64,
    pub p_e: f64,
    pub p_psi_plus: f64,
    pub p_psi_minus: f64,
    pub n_mode: f64,
}

pub fn populations(rho: &DensityMatrix, layout: &SpaceLayout) -> Result<Populations, MeasureError> {
    let p = |name| fidelity_pure(rho, &named_state(name, layout));
    Ok(Populations {
        p_g0: p(NamedState::G0)?,
        p_e: p(NamedState::E)?,
        p_psi_plus: p(NamedState::PsiPlus)?,
        p_psi_minus: p(NamedState::PsiMinus)?,
        n_mode: mean_photon_number(rho, layout)?,
    })
}

/// ⟨ψ|ρ|ψ⟩.
pub fn fidelity_pure(rho: &DensityMatrix, psi: &StateVector) -> Result<f64, MeasureError> {
    if rho.dim() != psi.dim() {
        return Err(MeasureError::DimensionMismatch { expected: rho.dim(), found: psi.dim() });
    }
    Ok(rho.operator().matrix_element(psi, psi).re)
}

/// tr(ρ a†a).
pub fn mean_photon_number(rho: &DensityMatrix, layout: &SpaceLayout) -> Result<f64, MeasureError> {
    if rho.dim() != layout.dim() {
        return Err(MeasureError::DimensionMismatch { expected: layout.dim(), found: rho.dim() });
    }
    let m = layout.mode_dim();
    let diag = rho.as_array().diag();
    Ok(diag.iter().enumerate().map(|(k, z)| (k % m) as f64 * z.re).sum())
}

/// tr(ρ²).
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.operator().dot(rho.operator()).trace().re
}

/// ½‖ρ − σ‖₁.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, MeasureError> {
    if rho.dim() != sigma.dim() {
        return Err(MeasureError::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let diff = rho.operator() - sigma.operator();
    let sym = (&diff + &diff.adjoint()).scale(0.5);
    Ok(0.5 * linalg::hermitian_eigenvalues(sym.as_array())?.iter().map(|x| x.abs()).sum::<f64>())
}

/// Mode occupation operator a†a on the full space, for callers that need it
/// as a matrix.
pub fn number_operator(layout: &SpaceLayout) -> Result<crate::hilbert::Operator, MeasureError> {
    Ok(FullOperators::new(layout)?.number())
}
