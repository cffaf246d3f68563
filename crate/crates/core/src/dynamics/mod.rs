//! Time evolution and steady states of the master equation.

mod coords;
mod dopri;
mod rosenbrock;
mod sparse;
mod steady;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use coords::HermitianCoords;
pub use steady::{converge_cutoff, steady_state, system_steady_state, SteadyState, MAX_CERTIFIED_CUTOFF};

use crate::hilbert::{DensityMatrix, HilbertError, Operator, Physicality};
use crate::measures::MeasureError;
use crate::model::{Dissipator, HamiltonianTerm, ModelError, Schedule, Superoperator};
use sparse::SparseOp;

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step limit of {steps} reached at t = {t:e}")]
    TooManySteps { t: f64, steps: usize },
    #[error("invalid initial state: {0}")]
    InvalidInitialState(String),
    #[error("invalid sample times: {0}")]
    InvalidSampleTimes(String),
    #[error("dimension mismatch: generator acts on {expected}, state has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the Rosenbrock integrator needs a time-independent generator")]
    NotAutonomous,
    #[error("steady-state system is singular (pivot ratio {pivot_ratio:e}); the stationary manifold is degenerate")]
    SingularSystem { pivot_ratio: f64 },
    #[error("steady state has eigenvalue {eigenvalue:e} below the positivity tolerance")]
    PositivityViolation { eigenvalue: f64 },
    #[error("observable not converged by cutoff {max_cutoff}: last change {last_change:e}")]
    NotConverged { max_cutoff: usize, last_change: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Right-hand side of ρ̇ = 𝓛(t)ρ.
pub trait Generator: Send + Sync {
    /// Hilbert-space dimension D.
    fn dim(&self) -> usize;

    /// Writes 𝓛(t)ρ into `out`.
    fn apply(&self, t: f64, rho: &Array2<C64>, out: &mut Array2<C64>);

    /// The generator as a matrix when it does not depend on time.
    fn constant(&self) -> Option<Superoperator> {
        None
    }

    /// 𝓛(t) as a D²×D² matrix on column-stacked states.
    fn superoperator_at(&self, t: f64) -> Superoperator {
        let d = self.dim();
        let mut mat = Array2::zeros((d * d, d * d));
        let mut basis = Array2::zeros((d, d));
        let mut out = Array2::zeros((d, d));
        for j in 0..d {
            for i in 0..d {
                basis[[i, j]] = C64::new(1.0, 0.0);
                self.apply(t, &basis, &mut out);
                basis[[i, j]] = C64::new(0.0, 0.0);
                for ((r, c), z) in out.indexed_iter() {
                    mat[[r + c * d, i + j * d]] = *z;
                }
            }
        }
        Superoperator::from_array(mat, d).expect("shape matches by construction")
    }
}

impl Generator for Superoperator {
    fn dim(&self) -> usize {
        Superoperator::dim(self)
    }

    fn apply(&self, _t: f64, rho: &Array2<C64>, out: &mut Array2<C64>) {
        let d = Superoperator::dim(self);
        let v = ndarray::Array1::from_shape_fn(d * d, |k| rho[[k % d, k / d]]);
        let w = self.as_array().dot(&v);
        for (k, z) in w.iter().enumerate() {
            out[[k % d, k / d]] = *z;
        }
    }

    fn constant(&self) -> Option<Superoperator> {
        Some(self.clone())
    }

    fn superoperator_at(&self, _t: f64) -> Superoperator {
        self.clone()
    }
}

/// Lindblad generator with scheduled Hamiltonian terms, applied through
/// sparse operator products.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    dim: usize,
    terms: Vec<(Schedule, SparseOp)>,
    jumps: Vec<(SparseOp, SparseOp, SparseOp, f64)>,
}

impl LindbladGenerator {
    pub fn new(terms: &[HamiltonianTerm], dissipators: &[Dissipator]) -> Result<Self, DynamicsError> {
        let dim = terms
            .first()
            .map(|t| t.operator.dim())
            .or_else(|| dissipators.first().map(|d| d.jump.dim()))
            .unwrap_or(0);
        let check = |op: &Operator| {
            if op.dim() != dim {
                Err(DynamicsError::DimensionMismatch { expected: dim, found: op.dim() })
            } else {
                Ok(())
            }
        };
        for t in terms {
            check(&t.operator)?;
        }
        for d in dissipators {
            check(&d.jump)?;
        }
        Ok(Self {
            dim,
            terms: terms.iter().map(|t| (t.coefficient, SparseOp::from_operator(&t.operator))).collect(),
            jumps: dissipators
                .iter()
                .filter(|d| d.rate != 0.0)
                .map(|d| {
                    let ld = d.jump.adjoint();
                    (
                        SparseOp::from_operator(&d.jump),
                        SparseOp::from_operator(&ld),
                        SparseOp::from_operator(&ld.dot(&d.jump)),
                        d.rate,
                    )
                })
                .collect(),
        })
    }

    /// Constant Hamiltonian.
    pub fn time_independent(h: &Operator, dissipators: &[Dissipator]) -> Result<Self, DynamicsError> {
        let term = HamiltonianTerm { coefficient: Schedule::Constant { value: 1.0 }, operator: h.clone() };
        Self::new(&[term], dissipators)
    }
}

impl Generator for LindbladGenerator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, rho: &Array2<C64>, out: &mut Array2<C64>) {
        out.fill(C64::new(0.0, 0.0));
        for (coef, h) in &self.terms {
            let c = coef.value(t);
            if c == 0.0 {
                continue;
            }
            h.left_mul_acc(rho, out, C64::new(0.0, -c));
            h.right_mul_acc(rho, out, C64::new(0.0, c));
        }
        let mut tmp = Array2::zeros(rho.dim());
        for (l, ld, ldl, rate) in &self.jumps {
            tmp.fill(C64::new(0.0, 0.0));
            l.left_mul_acc(rho, &mut tmp, C64::new(1.0, 0.0));
            ld.right_mul_acc(&tmp, out, C64::new(2.0 * rate, 0.0));
            ldl.left_mul_acc(rho, out, C64::new(-rate, 0.0));
            ldl.right_mul_acc(rho, out, C64::new(-rate, 0.0));
        }
    }

    fn constant(&self) -> Option<Superoperator> {
        if self.terms.iter().all(|(s, _)| s.is_constant()) {
            Some(self.superoperator_at(0.0))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Explicit Dormand–Prince 5(4).
    #[default]
    DormandPrince,
    /// L-stable Rosenbrock 4(3); constant generators only.
    Rosenbrock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_max_steps() -> usize {
    20_000_000
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: None,
            initial_step: None,
            method: Method::DormandPrince,
            max_steps: default_max_steps(),
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |what: &str| Err(DynamicsError::InvalidSampleTimes(format!("integrator {what} must be > 0")));
        if !(self.rtol > 0.0) {
            return bad("rtol");
        }
        if !(self.atol > 0.0) {
            return bad("atol");
        }
        if self.max_step.is_some_and(|h| !(h > 0.0)) {
            return bad("max_step");
        }
        if self.initial_step.is_some_and(|h| !(h > 0.0)) {
            return bad("initial_step");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub factorizations: usize,
}

impl StepStats {
    pub fn merge(&mut self, other: &StepStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.evaluations += other.evaluations;
        self.factorizations += other.factorizations;
    }
}

/// Sampled states with derived observable columns.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub observables: Vec<(String, Vec<f64>)>,
    /// State at the end of the integration span.
    pub final_state: DensityMatrix,
    pub stats: StepStats,
}

impl Trajectory {
    /// Adds a column computed from every sampled state.
    pub fn add_observable<F, E>(&mut self, name: &str, mut f: F) -> Result<(), E>
    where
        F: FnMut(&DensityMatrix) -> Result<f64, E>,
    {
        let values = self.states.iter().map(&mut f).collect::<Result<Vec<_>, E>>()?;
        self.observables.push((name.to_string(), values));
        Ok(())
    }

    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

/// RMS of err scaled by atol + rtol·max(|y0|, |y1|), entrywise.
pub(crate) fn error_norm(err: &Array2<C64>, y0: &Array2<C64>, y1: &Array2<C64>, rtol: f64, atol: f64) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1.iter()))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.norm().max(b.norm());
            e.norm_sqr() / (sc * sc)
        })
        .sum();
    (sum / n).sqrt()
}

fn check_samples(sample_times: &[f64], t_span: (f64, f64)) -> Result<(), DynamicsError> {
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(DynamicsError::InvalidSampleTimes(format!("bad span [{t0}, {t1}]")));
    }
    if sample_times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(DynamicsError::InvalidSampleTimes("sample times must be strictly increasing".into()));
    }
    if let (Some(&first), Some(&last)) = (sample_times.first(), sample_times.last()) {
        if first < t0 || last > t1 {
            return Err(DynamicsError::InvalidSampleTimes(format!(
                "samples [{first}, {last}] outside span [{t0}, {t1}]"
            )));
        }
    }
    Ok(())
}

fn symmetrize(m: &Array2<C64>) -> Array2<C64> {
    (m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5)
}

/// Integrate ρ̇ = 𝓛(t)ρ over `t_span`, recording the state at each sample
/// time. States are re-symmetrized at sample points (and integration
/// continues from the symmetrized state), never inside a step.
pub fn evolve(
    rho0: &DensityMatrix,
    generator: &dyn Generator,
    t_span: (f64, f64),
    sample_times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    check_samples(sample_times, t_span)?;
    if rho0.dim() != generator.dim() {
        return Err(DynamicsError::DimensionMismatch { expected: generator.dim(), found: rho0.dim() });
    }
    DensityMatrix::with_tolerance(rho0.operator().clone(), &Physicality::STRICT)
        .map_err(|e| DynamicsError::InvalidInitialState(e.to_string()))?;

    let wrap = |m: Array2<C64>| DensityMatrix::new_unchecked(Operator::from_array(m).expect("square"));
    let (t0, t1) = t_span;
    let mut times = Vec::with_capacity(sample_times.len());
    let mut states = Vec::with_capacity(sample_times.len());

    let (final_state, stats) = match cfg.method {
        Method::DormandPrince => {
            let mut stepper = dopri::DormandPrince::new(generator, cfg);
            let mut t = t0;
            let mut y = rho0.as_array().clone();
            for &s in sample_times {
                if s > t {
                    stepper.advance(&mut t, &mut y, s)?;
                    y = symmetrize(&y);
                    stepper.reset_state(t, &y);
                }
                times.push(s);
                states.push(wrap(y.clone()));
            }
            if t < t1 {
                stepper.advance(&mut t, &mut y, t1)?;
                y = symmetrize(&y);
            }
            (wrap(y), stepper.stats)
        }
        Method::Rosenbrock => {
            let sup = generator.constant().ok_or(DynamicsError::NotAutonomous)?;
            let coords = HermitianCoords::new(generator.dim());
            let r = coords.real_generator(&sup);
            let mut y = coords.to_coords(&symmetrize(rho0.as_array()));
            let mut t = t0;
            for &s in sample_times.iter().take_while(|&&s| s <= t0) {
                times.push(s);
                states.push(wrap(coords.from_coords(&y)));
            }
            let mut solver = rosenbrock::Rodas4::new(&r, cfg);
            solver.integrate(&mut t, &mut y, t1, sample_times, &mut |s, ys| {
                times.push(s);
                states.push(wrap(coords.from_coords(ys)));
            })?;
            (wrap(coords.from_coords(&y)), solver.stats)
        }
    };

    Ok(Trajectory { times, states, observables: Vec::new(), final_state, stats })
}
