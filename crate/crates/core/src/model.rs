//! Generators of the two-qubit + mode dynamics.
//!
//! Dissipators use the convention `rate·(2LρL† − L†Lρ − ρL†L)`, so `gamma`
//! and `kappa` are half of the rates in the more common
//! `LρL† − ½{L†L, ρ}` form: an excited qubit decays at 2Γ and a mode photon
//! at 2κ. All rates are in units of κ and times in units of 1/κ.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::hilbert::{
    self, embed, HilbertError, NamedState, Operator, SpaceLayout, Subsystem,
};

/// Fock cutoff used when none is given. N=8 is the smallest cutoff at which
/// the driven steady-state concurrence is converged to 1e-4.
pub const DEFAULT_FOCK_CUTOFF: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameter {field}: {value} ({reason})")]
    InvalidParameter { field: &'static str, value: f64, reason: &'static str },
    #[error("operator dimension {found} does not match layout dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Which qubit carries +Δ in the rotating-frame Hamiltonian.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningSign {
    /// Δ(σ_ee⁽¹⁾ − σ_ee⁽²⁾).
    #[default]
    Printed,
    /// −Δ(σ_ee⁽¹⁾ − σ_ee⁽²⁾), the frame that follows from ω_e⁽¹⁾ = ω_m − Δ.
    Relabeled,
}

impl DetuningSign {
    fn factor(self) -> f64 {
        match self {
            DetuningSign::Printed => 1.0,
            DetuningSign::Relabeled => -1.0,
        }
    }
}

/// Physical parameters, rates in units of κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub g: f64,
    pub delta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub fock_cutoff: usize,
    /// Mode frequency; only the lab-frame Hamiltonian uses it.
    pub omega_m: f64,
    pub detuning_sign: DetuningSign,
}

impl SystemParams {
    /// Steady-state defaults: ε = κ = 1, Γ = 1e-5.
    pub fn pumped(g: f64, delta: f64) -> Self {
        Self {
            g,
            delta,
            gamma: 1e-5,
            kappa: 1.0,
            epsilon: 1.0,
            fock_cutoff: DEFAULT_FOCK_CUTOFF,
            omega_m: 0.0,
            detuning_sign: DetuningSign::Printed,
        }
    }

    pub fn with_cutoff(mut self, fock_cutoff: usize) -> Self {
        self.fock_cutoff = fock_cutoff;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let nonneg = [("g", self.g), ("delta", self.delta), ("gamma", self.gamma), ("epsilon", self.epsilon)];
        for (field, value) in nonneg {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidParameter { field, value, reason: "must be finite and >= 0" });
            }
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(ModelError::InvalidParameter { field: "kappa", value: self.kappa, reason: "must be > 0" });
        }
        if !self.omega_m.is_finite() {
            return Err(ModelError::InvalidParameter { field: "omega_m", value: self.omega_m, reason: "must be finite" });
        }
        SpaceLayout::new(self.fock_cutoff)?;
        Ok(())
    }

    pub fn layout(&self) -> Result<SpaceLayout, ModelError> {
        Ok(SpaceLayout::new(self.fock_cutoff)?)
    }

    pub fn omega_e1(&self) -> f64 {
        self.omega_m - self.delta
    }

    pub fn omega_e2(&self) -> f64 {
        self.omega_m + self.delta
    }
}

/// Elementary operators embedded on the full space.
#[derive(Debug, Clone)]
pub struct FullOperators {
    pub a: Operator,
    pub sigma_minus_1: Operator,
    pub sigma_minus_2: Operator,
    pub sigma_ee_1: Operator,
    pub sigma_ee_2: Operator,
}

impl FullOperators {
    pub fn new(layout: &SpaceLayout) -> Result<Self, HilbertError> {
        let a = embed(&hilbert::annihilation(layout.fock_cutoff())?, Subsystem::Mode, layout)?;
        Ok(Self {
            a,
            sigma_minus_1: embed(&hilbert::sigma_minus(), Subsystem::Qubit1, layout)?,
            sigma_minus_2: embed(&hilbert::sigma_minus(), Subsystem::Qubit2, layout)?,
            sigma_ee_1: embed(&hilbert::sigma_ee(), Subsystem::Qubit1, layout)?,
            sigma_ee_2: embed(&hilbert::sigma_ee(), Subsystem::Qubit2, layout)?,
        })
    }

    pub fn number(&self) -> Operator {
        self.a.adjoint().dot(&self.a)
    }

    /// σ_ee⁽¹⁾ + σ_ee⁽²⁾ + a†a.
    pub fn excitation_number(&self) -> Operator {
        &(&self.sigma_ee_1 + &self.sigma_ee_2) + &self.number()
    }
}

/// σ_ee⁽¹⁾ − σ_ee⁽²⁾ with the chosen sign convention.
pub fn detuning_term(layout: &SpaceLayout, sign: DetuningSign) -> Result<Operator, ModelError> {
    let ops = FullOperators::new(layout)?;
    Ok((&ops.sigma_ee_1 - &ops.sigma_ee_2).scale(sign.factor()))
}

/// a(σ₊⁽¹⁾ + σ₊⁽²⁾) + h.c.
pub fn coupling_term(layout: &SpaceLayout) -> Result<Operator, ModelError> {
    let ops = FullOperators::new(layout)?;
    let raise = (&ops.sigma_minus_1 + &ops.sigma_minus_2).adjoint();
    let x = ops.a.dot(&raise);
    Ok(&x + &x.adjoint())
}

/// a + a†.
pub fn pump_term(layout: &SpaceLayout) -> Result<Operator, ModelError> {
    let ops = FullOperators::new(layout)?;
    Ok(&ops.a + &ops.a.adjoint())
}

/// Schrödinger-picture Hamiltonian with lab-frame frequencies.
pub fn hamiltonian_lab(params: &SystemParams, layout: &SpaceLayout) -> Result<Operator, ModelError> {
    params.validate()?;
    let ops = FullOperators::new(layout)?;
    let bare = &(&ops.sigma_ee_1.scale(params.omega_e1()) + &ops.sigma_ee_2.scale(params.omega_e2()))
        + &ops.number().scale(params.omega_m);
    Ok(&bare + &coupling_term(layout)?.scale(params.g))
}

/// Rotating-frame Hamiltonian Δ(σ_ee⁽¹⁾ − σ_ee⁽²⁾) + g[a(σ₊⁽¹⁾+σ₊⁽²⁾) + h.c.].
pub fn hamiltonian_rot(params: &SystemParams, layout: &SpaceLayout) -> Result<Operator, ModelError> {
    params.validate()?;
    let det = detuning_term(layout, params.detuning_sign)?.scale(params.delta);
    Ok(&det + &coupling_term(layout)?.scale(params.g))
}

/// ε(a† + a).
pub fn hamiltonian_pump(epsilon: f64, layout: &SpaceLayout) -> Result<Operator, ModelError> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(ModelError::InvalidParameter { field: "epsilon", value: epsilon, reason: "must be finite and >= 0" });
    }
    Ok(pump_term(layout)?.scale(epsilon))
}

/// Rotating-frame Hamiltonian plus the pump.
pub fn hamiltonian_driven(params: &SystemParams, layout: &SpaceLayout) -> Result<Operator, ModelError> {
    Ok(&hamiltonian_rot(params, layout)? + &hamiltonian_pump(params.epsilon, layout)?)
}

/// Ordered basis of the single-excitation subspace used by
/// [`hamiltonian_reduced`].
pub const REDUCED_BASIS: [NamedState; 3] = [NamedState::E, NamedState::PsiPlus, NamedState::PsiMinus];

/// Single-excitation Hamiltonian on (|E⟩, |Ψ₊⟩, |Ψ₋⟩):
/// √2 g couples E↔Ψ₊ and Δ couples Ψ₊↔Ψ₋.
pub fn hamiltonian_reduced(g: f64, delta: f64) -> Result<Operator, ModelError> {
    for (field, value) in [("g", g), ("delta", delta)] {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(ModelError::InvalidParameter { field, value, reason: "must be finite and >= 0" });
        }
    }
    let c = std::f64::consts::SQRT_2 * g;
    let m = ndarray::array![[0.0, c, 0.0], [c, 0.0, delta], [0.0, delta, 0.0]];
    Ok(Operator::from_real(&m)?)
}

/// Jump operator with its rate in the `rate·(2LρL† − L†Lρ − ρL†L)` convention.
#[derive(Debug, Clone)]
pub struct Dissipator {
    pub jump: Operator,
    pub rate: f64,
}

impl Dissipator {
    /// rate·(2LρL† − L†Lρ − ρL†L).
    pub fn apply(&self, rho: &Operator) -> Operator {
        let l = &self.jump;
        let ld = l.adjoint();
        let ldl = ld.dot(l);
        let sandwich = l.dot(rho).dot(&ld).scale(2.0);
        (&(&sandwich - &ldl.dot(rho)) - &rho.dot(&ldl)).scale(self.rate)
    }
}

/// Qubit decay (σ₋⁽¹⁾, Γ), (σ₋⁽²⁾, Γ) and mode decay (a, κ).
pub fn dissipators(params: &SystemParams, layout: &SpaceLayout) -> Result<Vec<Dissipator>, ModelError> {
    params.validate()?;
    let ops = FullOperators::new(layout)?;
    Ok(vec![
        Dissipator { jump: ops.sigma_minus_1, rate: params.gamma },
        Dissipator { jump: ops.sigma_minus_2, rate: params.gamma },
        Dissipator { jump: ops.a, rate: params.kappa },
    ])
}

/// ρ̇ = −i[H, ρ] + Σ dissipators, evaluated with matrix products.
pub fn lindblad_rhs(h: &Operator, dissipators: &[Dissipator], rho: &Operator) -> Operator {
    let mut out = &h.commutator(rho) * C64::new(0.0, -1.0);
    for d in dissipators {
        out = &out + &d.apply(rho);
    }
    out
}

/// Linear map on column-stacked density matrices: vec(ρ)[i + j·D] = ρ[i, j].
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    mat: Array2<C64>,
    dim: usize,
}

impl Superoperator {
    pub fn from_array(mat: Array2<C64>, dim: usize) -> Result<Self, ModelError> {
        if mat.dim() != (dim * dim, dim * dim) {
            return Err(ModelError::DimensionMismatch { expected: dim * dim, found: mat.nrows() });
        }
        Ok(Self { mat, dim })
    }

    /// Hilbert-space dimension D (the matrix is D²×D²).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn apply(&self, rho: &Operator) -> Operator {
        let v = vectorize(rho);
        unvectorize(&self.mat.dot(&v), self.dim)
    }

    pub fn scale(&self, factor: f64) -> Superoperator {
        Superoperator { mat: self.mat.mapv(|z| z * factor), dim: self.dim }
    }
}

pub fn vectorize(rho: &Operator) -> ndarray::Array1<C64> {
    let d = rho.dim();
    ndarray::Array1::from_shape_fn(d * d, |k| rho.get(k % d, k / d))
}

pub fn unvectorize(v: &ndarray::Array1<C64>, dim: usize) -> Operator {
    Operator::from_array(Array2::from_shape_fn((dim, dim), |(i, j)| v[i + j * dim]))
        .expect("square by construction")
}

/// mat += c · (a ⊗ b), visiting only nonzero entries.
fn add_kron(mat: &mut Array2<C64>, c: C64, a: &Operator, b: &Operator) {
    let n = b.dim();
    let nonzero = |op: &Operator| -> Vec<(usize, usize, C64)> {
        op.as_array().indexed_iter().filter(|(_, z)| z.norm() != 0.0).map(|((i, j), &z)| (i, j, z)).collect()
    };
    let bs = nonzero(b);
    for (i, j, x) in nonzero(a) {
        let cx = c * x;
        for &(k, l, y) in &bs {
            mat[[i * n + k, j * n + l]] += cx * y;
        }
    }
}

/// L = −i(I⊗H − Hᵀ⊗I) + Σ rate·(2 L̄⊗L − I⊗L†L − (L†L)ᵀ⊗I).
pub fn liouvillian(h: &Operator, dissipators: &[Dissipator], layout: &SpaceLayout) -> Result<Superoperator, ModelError> {
    let d = layout.dim();
    if h.dim() != d {
        return Err(ModelError::DimensionMismatch { expected: d, found: h.dim() });
    }
    if let Some(bad) = dissipators.iter().find(|x| x.jump.dim() != d) {
        return Err(ModelError::DimensionMismatch { expected: d, found: bad.jump.dim() });
    }
    let id = Operator::identity(d);
    let transpose = |op: &Operator| Operator::from_array(op.as_array().t().to_owned()).expect("square");
    let conj = |op: &Operator| Operator::from_array(op.as_array().mapv(|z| z.conj())).expect("square");

    let mut mat = Array2::zeros((d * d, d * d));
    let minus_i = C64::new(0.0, -1.0);
    add_kron(&mut mat, minus_i, &id, h);
    add_kron(&mut mat, -minus_i, &transpose(h), &id);
    for diss in dissipators {
        if diss.rate == 0.0 {
            continue;
        }
        let r = C64::new(diss.rate, 0.0);
        let ldl = diss.jump.adjoint().dot(&diss.jump);
        add_kron(&mut mat, r * 2.0, &conj(&diss.jump), &diss.jump);
        add_kron(&mut mat, -r, &id, &ldl);
        add_kron(&mut mat, -r, &transpose(&ldl), &id);
    }
    Superoperator::from_array(mat, d)
}

/// Liouvillian of the pumped rotating-frame model.
pub fn system_liouvillian(params: &SystemParams) -> Result<Superoperator, ModelError> {
    let layout = params.layout()?;
    liouvillian(&hamiltonian_driven(params, &layout)?, &dissipators(params, &layout)?, &layout)
}

/// Time profile of a controllable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Constant { value: f64 },
    /// (max/2)[1 − tanh λ(t − t0)]
    TanhDown { max_value: f64, t0: f64, lambda: f64 },
    /// (max/2)[1 + tanh λ(t − t0)]
    TanhUp { max_value: f64, t0: f64, lambda: f64 },
}

impl Schedule {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::TanhDown { max_value, t0, lambda } => 0.5 * max_value * (1.0 - (lambda * (t - t0)).tanh()),
            Schedule::TanhUp { max_value, t0, lambda } => 0.5 * max_value * (1.0 + (lambda * (t - t0)).tanh()),
        }
    }

    /// Largest value the schedule reaches.
    pub fn peak(&self) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::TanhDown { max_value, .. } | Schedule::TanhUp { max_value, .. } => max_value,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Schedule::Constant { .. })
    }

    /// Midpoint time of a ramp.
    pub fn t0(&self) -> Option<f64> {
        match *self {
            Schedule::Constant { .. } => None,
            Schedule::TanhDown { t0, .. } | Schedule::TanhUp { t0, .. } => Some(t0),
        }
    }

    pub fn validate(&self, field: &'static str) -> Result<(), ModelError> {
        let bad = |value: f64, reason| Err(ModelError::InvalidParameter { field, value, reason });
        match *self {
            Schedule::Constant { value } if !(value >= 0.0 && value.is_finite()) => bad(value, "must be finite and >= 0"),
            Schedule::TanhDown { max_value, t0, lambda } | Schedule::TanhUp { max_value, t0, lambda } => {
                if !(max_value >= 0.0 && max_value.is_finite()) {
                    bad(max_value, "max_value must be finite and >= 0")
                } else if !t0.is_finite() {
                    bad(t0, "t0 must be finite")
                } else if !(lambda > 0.0 && lambda.is_finite()) {
                    bad(lambda, "lambda must be > 0")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// One Hamiltonian term with a time-dependent prefactor.
#[derive(Debug, Clone)]
pub struct HamiltonianTerm {
    pub coefficient: Schedule,
    pub operator: Operator,
}

/// H(t) = Δ(t)·(σ_ee⁽¹⁾ − σ_ee⁽²⁾) + g(t)·[a(σ₊⁽¹⁾+σ₊⁽²⁾) + h.c.] + ε(a + a†).
pub fn scheduled_hamiltonian(
    delta: Schedule,
    g: Schedule,
    epsilon: f64,
    sign: DetuningSign,
    layout: &SpaceLayout,
) -> Result<Vec<HamiltonianTerm>, ModelError> {
    let mut terms = vec![
        HamiltonianTerm { coefficient: delta, operator: detuning_term(layout, sign)? },
        HamiltonianTerm { coefficient: g, operator: coupling_term(layout)? },
    ];
    if epsilon > 0.0 {
        terms.push(HamiltonianTerm { coefficient: Schedule::Constant { value: epsilon }, operator: pump_term(layout)? });
    }
    Ok(terms)
}
