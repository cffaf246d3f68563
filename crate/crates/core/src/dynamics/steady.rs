use ndarray::Array1;

use super::{DynamicsError, HermitianCoords};
use crate::hilbert::{DensityMatrix, HilbertError, Operator, SpaceLayout};
use crate::linalg::RealLu;
use crate::model::{system_liouvillian, vectorize, SystemParams, Superoperator};

/// Pivot ratio below which the trace-constrained system counts as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-13;
/// Largest cutoff `converge_cutoff` will certify.
pub const MAX_CERTIFIED_CUTOFF: usize = 8;

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// ‖L·vec(ρ)‖∞ for the returned state.
    pub residual: f64,
    pub min_eigenvalue: f64,
}

/// Solve L·vec(ρ) = 0 with the first equation replaced by tr ρ = 1.
///
/// The unknowns are the D² real coordinates of a Hermitian ρ; the first
/// coordinate equation is a diagonal one, so replacing it loses nothing for
/// a trace-preserving L.
pub fn steady_state(l: &Superoperator, layout: &SpaceLayout) -> Result<SteadyState, DynamicsError> {
    let d = l.dim();
    if d != layout.dim() {
        return Err(DynamicsError::DimensionMismatch { expected: layout.dim(), found: d });
    }
    let coords = HermitianCoords::new(d);
    let mut a = coords.real_generator(l);
    a.row_mut(0).fill(0.0);
    for i in 0..d {
        a[[0, coords.diagonal_index(i)]] = 1.0;
    }
    let lu = RealLu::new(&a);
    let pivot_ratio = lu.pivot_ratio();
    if !(pivot_ratio > SINGULAR_PIVOT_RATIO) {
        return Err(DynamicsError::SingularSystem { pivot_ratio });
    }
    let mut b = Array1::zeros(coords.len());
    b[0] = 1.0;
    let x = lu.solve(&b);
    let op = Operator::from_array(coords.from_coords(&x))?;
    let residual = l.as_array().dot(&vectorize(&op)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rho = DensityMatrix::new_unchecked(op);
    let min_eigenvalue = rho.min_eigenvalue()?;
    if min_eigenvalue < -crate::hilbert::Physicality::STRICT.negativity {
        return Err(DynamicsError::PositivityViolation { eigenvalue: min_eigenvalue });
    }
    Ok(SteadyState { rho, residual, min_eigenvalue })
}

/// Steady state of the pumped, rotating-frame model described by `params`.
pub fn system_steady_state(params: &SystemParams) -> Result<SteadyState, DynamicsError> {
    let layout = params.layout()?;
    steady_state(&system_liouvillian(params)?, &layout)
}

/// Smallest cutoff N ≥ `start_cutoff` with |obs(N+1) − obs(N)| < tol,
/// returned with obs(N+1). Candidates stop at [`MAX_CERTIFIED_CUTOFF`].
pub fn converge_cutoff<F>(
    params: &SystemParams,
    mut observable: F,
    start_cutoff: usize,
    tol: f64,
) -> Result<(usize, f64), DynamicsError>
where
    F: FnMut(&DensityMatrix, &SpaceLayout) -> Result<f64, DynamicsError>,
{
    if start_cutoff < 1 {
        return Err(HilbertError::InvalidCutoff(start_cutoff).into());
    }
    let mut eval = |n: usize| -> Result<f64, DynamicsError> {
        let p = params.with_cutoff(n);
        let ss = system_steady_state(&p)?;
        observable(&ss.rho, &p.layout()?)
    };
    let mut prev = eval(start_cutoff)?;
    let mut last_change = f64::INFINITY;
    for n in start_cutoff..=MAX_CERTIFIED_CUTOFF.max(start_cutoff) {
        let next = eval(n + 1)?;
        last_change = (next - prev).abs();
        if last_change < tol {
            return Ok((n, next));
        }
        prev = next;
    }
    Err(DynamicsError::NotConverged { max_cutoff: MAX_CERTIFIED_CUTOFF, last_change })
}
