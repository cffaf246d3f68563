//! The numerical experiments behind each figure, emitted as tables.
//!
//! Every table carries its full spec in `metadata["spec"]`, so
//! deserializing that value and running it again reproduces the table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{
    evolve, system_steady_state, DynamicsError, Generator, IntegratorConfig, LindbladGenerator, Method, StepStats,
};
use crate::hilbert::{named_state, DensityMatrix, HilbertError, NamedState, Physicality, PhysicalityReport};
use crate::measures::{mean_photon_number, populations, qubit_concurrence, MeasureError};
use crate::model::{
    dissipators, hamiltonian_driven, liouvillian, scheduled_hamiltonian, DetuningSign, ModelError, Schedule, SystemParams};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Status column value for a point that failed.
pub const STATUS_FAILED: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid spec field `{field}`: {reason}")]
    InvalidSpec { field: String, reason: String },
    #[error("row has {found} entries, table has {expected} columns")]
    Arity { expected: usize, found: usize },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> SweepError {
    SweepError::InvalidSpec { field: field.into(), reason: reason.into() }
}

/// Column names, rows of reals, and a metadata record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Value,
}

impl ResultTable {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new(), metadata: json!({}) }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<(), SweepError> {
        if row.len() != self.columns.len() {
            return Err(SweepError::Arity { expected: self.columns.len(), found: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Same columns and bit-identical cells (NaN compares equal to itself).
    pub fn same_data(&self, other: &ResultTable) -> bool {
        self.columns == other.columns
            && self.rows.len() == other.rows.len()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()))
    }
}

/// Worst-case physicality over every state an experiment produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalityTally {
    pub states: usize,
    pub max_hermiticity_error: f64,
    pub max_trace_error: f64,
    pub min_eigenvalue: f64,
}

impl Default for PhysicalityTally {
    fn default() -> Self {
        Self { states: 0, max_hermiticity_error: 0.0, max_trace_error: 0.0, min_eigenvalue: f64::INFINITY }
    }
}

impl PhysicalityTally {
    pub fn record(&mut self, report: &PhysicalityReport) {
        self.states += 1;
        self.max_hermiticity_error = self.max_hermiticity_error.max(report.hermiticity_error);
        self.max_trace_error = self.max_trace_error.max(report.trace_error);
        self.min_eigenvalue = self.min_eigenvalue.min(report.min_eigenvalue);
    }

    pub fn record_state(&mut self, rho: &DensityMatrix) -> Result<(), HilbertError> {
        self.record(&rho.physicality()?);
        Ok(())
    }

    pub fn merge(&mut self, other: &PhysicalityTally) {
        self.states += other.states;
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        self.max_trace_error = self.max_trace_error.max(other.max_trace_error);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
    }

    pub fn satisfies(&self, tol: &Physicality) -> bool {
        self.max_hermiticity_error <= tol.hermiticity
            && self.max_trace_error <= tol.trace
            && self.min_eigenvalue >= -tol.negativity
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    #[default]
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn log(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count, spacing: Spacing::Log }
    }

    pub fn linear(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count, spacing: Spacing::Linear }
    }

    pub fn validate(&self, field: &str) -> Result<(), SweepError> {
        if self.count < 2 {
            return Err(invalid(field, "count must be >= 2"));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(invalid(field, "need finite min < max"));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            return Err(invalid(field, "log spacing needs min > 0"));
        }
        Ok(())
    }

    /// Grid points, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == last {
                    return self.max;
                }
                let f = i as f64 / last as f64;
                match self.spacing {
                    Spacing::Linear => self.min + f * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Steady-state observables at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyPoint {
    pub concurrence: f64,
    pub n_mode: f64,
    pub residual: f64,
    pub physicality: PhysicalityReport,
}

pub fn steady_point(params: &SystemParams) -> Result<SteadyPoint, SweepError> {
    params.validate()?;
    let layout = params.layout()?;
    let ss = system_steady_state(params)?;
    Ok(SteadyPoint {
        concurrence: qubit_concurrence(&ss.rho, &layout, &Physicality::STRICT)?,
        n_mode: mean_photon_number(&ss.rho, &layout)?,
        residual: ss.residual,
        physicality: ss.rho.physicality()?,
    })
}

/// Named representative points of the four regimes, as (Δ, g).
pub fn regime_points() -> [(&'static str, f64, f64); 4] {
    [("A", 10.0, 0.01), ("B", 1.0, 1.0), ("C", 1e-4, 1.0), ("D", 0.1, 1.0)]
}

fn point_rows<I>(points: I) -> Vec<Result<SteadyPoint, String>>
where
    I: IndexedParallelIterator<Item = SystemParams>,
{
    points.map(|p| steady_point(&p).map_err(|e| e.to_string())).collect()
}

fn steady_cells(r: &Result<SteadyPoint, String>) -> [f64; 4] {
    match r {
        Ok(p) => [p.concurrence, p.n_mode, p.residual, 0.0],
        Err(_) => [f64::NAN, f64::NAN, f64::NAN, STATUS_FAILED],
    }
}

fn failures_and_tally(results: &[Result<SteadyPoint, String>]) -> (Vec<Value>, PhysicalityTally) {
    let mut tally = PhysicalityTally::default();
    let mut failures = Vec::new();
    for (row, r) in results.iter().enumerate() {
        match r {
            Ok(p) => tally.record(&p.physicality),
            Err(e) => failures.push(json!({ "row": row, "error": e })),
        }
    }
    (failures, tally)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub delta_axis: Axis,
    pub g_axis: Axis,
    /// Every field except g and Δ.
    pub params: SystemParams,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            delta_axis: Axis::log(1e-3, 1e2, 60),
            g_axis: Axis::log(1e-3, 1e2, 60),
            params: SystemParams::pumped(0.0, 0.0),
        }
    }
}

/// Steady-state concurrence over a (Δ, g) grid, rows in Δ-major order.
pub fn grid_sweep(spec: &GridSpec) -> Result<ResultTable, SweepError> {
    spec.delta_axis.validate("delta_axis")?;
    spec.g_axis.validate("g_axis")?;
    spec.params.validate()?;
    let deltas = spec.delta_axis.values();
    let gs = spec.g_axis.values();
    let points: Vec<(f64, f64)> = deltas.iter().flat_map(|&d| gs.iter().map(move |&g| (d, g))).collect();
    let results = point_rows(points.par_iter().map(|&(delta, g)| SystemParams { g, delta, ..spec.params }));

    let mut table = ResultTable::new(&["delta", "g", "concurrence", "n_mode", "residual", "status"]);
    let mut best = (f64::NEG_INFINITY, f64::NAN, f64::NAN);
    for (&(d, g), r) in points.iter().zip(&results) {
        let [c, n, res, status] = steady_cells(r);
        if c > best.0 {
            best = (c, d, g);
        }
        table.push_row(vec![d, g, c, n, res, status])?;
    }
    let (failures, tally) = failures_and_tally(&results);
    table.metadata = json!({
        "experiment": "grid",
        "version": VERSION,
        "spec": spec,
        "max_concurrence": { "concurrence": best.0, "delta": best.1, "g": best.2 },
        "failures": failures,
        "physicality": tally,
    });
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaLineSpec {
    pub g: f64,
    pub delta_axis: Axis,
    pub gammas: Vec<f64>,
    pub params: SystemParams,
}

impl Default for DeltaLineSpec {
    fn default() -> Self {
        Self {
            g: 1.0,
            delta_axis: Axis::log(1e-3, 1e2, 101),
            gammas: vec![1e-5, 1e-4, 1e-3],
            params: SystemParams::pumped(1.0, 0.0),
        }
    }
}

/// Column name for the concurrence at one Γ.
pub fn gamma_column(gamma: f64) -> String {
    format!("concurrence_gamma_{gamma:e}")
}

/// Concurrence against Δ at fixed g, one column per Γ. The status column
/// counts failed cells in the row.
pub fn line_sweep_delta(spec: &DeltaLineSpec) -> Result<ResultTable, SweepError> {
    spec.delta_axis.validate("delta_axis")?;
    if spec.gammas.is_empty() {
        return Err(invalid("gammas", "need at least one value"));
    }
    if let Some(&bad) = spec.gammas.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
        return Err(invalid("gammas", format!("{bad} is not a finite rate >= 0")));
    }
    let base = SystemParams { g: spec.g, ..spec.params };
    base.validate()?;
    let deltas = spec.delta_axis.values();
    let points: Vec<SystemParams> = deltas
        .iter()
        .flat_map(|&delta| spec.gammas.iter().map(move |&gamma| SystemParams { delta, gamma, ..base }))
        .collect();
    let results = point_rows(points.par_iter().copied());

    let mut columns = vec!["delta".to_string()];
    columns.extend(spec.gammas.iter().map(|&g| gamma_column(g)));
    columns.push("status".into());
    let mut table = ResultTable::new(&columns);
    for (i, &d) in deltas.iter().enumerate() {
        let cells = &results[i * spec.gammas.len()..(i + 1) * spec.gammas.len()];
        let mut row = vec![d];
        row.extend(cells.iter().map(|r| steady_cells(r)[0]));
        row.push(cells.iter().filter(|r| r.is_err()).count() as f64);
        table.push_row(row)?;
    }
    let (failures, tally) = failures_and_tally(&results);
    table.metadata = json!({
        "experiment": "line_delta",
        "version": VERSION,
        "spec": spec,
        "failures": failures,
        "physicality": tally,
    });
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaLineSpec {
    pub g: f64,
    pub delta: f64,
    pub gamma_axis: Axis,
    pub params: SystemParams,
}

impl Default for GammaLineSpec {
    fn default() -> Self {
        Self { g: 1.0, delta: 0.1, gamma_axis: Axis::log(1e-5, 1e-1, 41), params: SystemParams::pumped(1.0, 0.1) }
    }
}

/// Concurrence against Γ at fixed (Δ, g).
pub fn line_sweep_gamma(spec: &GammaLineSpec) -> Result<ResultTable, SweepError> {
    spec.gamma_axis.validate("gamma_axis")?;
    if spec.gamma_axis.min < 0.0 {
        return Err(invalid("gamma_axis", "rates must be >= 0"));
    }
    let base = SystemParams { g: spec.g, delta: spec.delta, ..spec.params };
    base.validate()?;
    let gammas = spec.gamma_axis.values();
    let results = point_rows(gammas.par_iter().map(|&gamma| SystemParams { gamma, ..base }));

    let mut table = ResultTable::new(&["gamma", "concurrence", "n_mode", "residual", "status"]);
    for (&gamma, r) in gammas.iter().zip(&results) {
        let [c, n, res, status] = steady_cells(r);
        table.push_row(vec![gamma, c, n, res, status])?;
    }
    let (failures, tally) = failures_and_tally(&results);
    table.metadata = json!({
        "experiment": "line_gamma",
        "version": VERSION,
        "spec": spec,
        "failures": failures,
        "physicality": tally,
    });
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    pub label: String,
    pub g: f64,
    pub delta: f64,
}

/// Longest automatic horizon.
pub const MAX_HORIZON: f64 = 1e7;
/// Largest concurrence change over one decade of time that counts as
/// stabilized.
pub const STABILIZATION_TOL: f64 = 1e-4;
/// Decades starting before this many 1/κ never count as stabilized.
pub const SETTLE_TIME: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSeriesSpec {
    pub sets: Vec<ParamSet>,
    /// Shared by all sets except for g and Δ.
    pub params: SystemParams,
    /// Common final time; each set stops at its own stabilization when absent.
    pub t_final: Option<f64>,
    /// First positive sample time.
    pub t_start: f64,
    /// Log-spaced samples per decade after `t_start`.
    pub samples_per_decade: usize,
    /// Decades ending at or before this time use Dormand–Prince on the
    /// sparse generator; later ones use Rosenbrock on the Liouvillian.
    pub rosenbrock_after: f64,
    /// Tolerances and step limits; the method is chosen per decade.
    pub integrator: IntegratorConfig,
}

impl Default for TimeSeriesSpec {
    fn default() -> Self {
        Self {
            sets: regime_points()
                .iter()
                .map(|&(label, delta, g)| ParamSet { label: label.into(), g, delta })
                .collect(),
            params: SystemParams::pumped(0.0, 0.0),
            t_final: None,
            t_start: 1e-2,
            samples_per_decade: 12,
            rosenbrock_after: 1e2,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl TimeSeriesSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.sets.is_empty() {
            return Err(invalid("sets", "need at least one parameter set"));
        }
        for (i, s) in self.sets.iter().enumerate() {
            if self.sets[..i].iter().any(|o| o.label == s.label) {
                return Err(invalid("sets", format!("duplicate label `{}`", s.label)));
            }
            SystemParams { g: s.g, delta: s.delta, ..self.params }.validate()?;
        }
        if self.samples_per_decade == 0 {
            return Err(invalid("samples_per_decade", "must be >= 1"));
        }
        if !(self.t_start > 0.0 && self.t_start.is_finite()) {
            return Err(invalid("t_start", "must be > 0"));
        }
        if let Some(t) = self.t_final {
            if !(t > self.t_start && t.is_finite()) {
                return Err(invalid("t_final", "must be finite and > t_start"));
            }
        }
        if !(self.rosenbrock_after >= 0.0) {
            return Err(invalid("rosenbrock_after", "must be >= 0"));
        }
        self.integrator.validate()?;
        Ok(())
    }

    /// Decade end points t_start·10^j, the last one clipped to the final time.
    fn checkpoints(&self) -> Vec<f64> {
        let end = self.t_final.unwrap_or(MAX_HORIZON);
        let mut points = Vec::new();
        let mut j = 1;
        loop {
            let t = self.t_start * 10f64.powi(j);
            if t >= end * (1.0 - 1e-12) {
                points.push(end);
                return points;
            }
            points.push(t);
            j += 1;
        }
    }

    /// t = 0, then `samples_per_decade` log-spaced points per decade from
    /// `t_start`, every decade end included.
    pub fn sample_times(&self) -> Vec<f64> {
        let mut times = vec![0.0, self.t_start];
        let mut lo = self.t_start;
        for hi in self.checkpoints() {
            let n = self.samples_per_decade;
            let ratio = (hi / lo).ln() / n as f64;
            times.extend((1..n).map(|k| lo * (ratio * k as f64).exp()));
            times.push(hi);
            lo = hi;
        }
        times
    }
}

fn concurrence_of(rho: &DensityMatrix, layout: &crate::hilbert::SpaceLayout) -> Result<f64, SweepError> {
    Ok(qubit_concurrence(rho, layout, &Physicality::INTEGRATED)?)
}

struct SeriesRun {
    concurrence: Vec<f64>,
    t_final: f64,
    stabilized: bool,
    last_concurrence_change: f64,
    last_state_change: f64,
    tally: PhysicalityTally,
    stats: StepStats,
}

/// Integrate one set from |G,0⟩ decade by decade over the shared sample
/// grid. Without a fixed final time, stops after the first decade from
/// [`SETTLE_TIME`]/κ on over which the concurrence moves by less than
/// [`STABILIZATION_TOL`]. The state change over that decade is reported.
fn run_series(params: &SystemParams, spec: &TimeSeriesSpec, times: &[f64]) -> Result<SeriesRun, SweepError> {
    let layout = params.layout()?;
    let h = hamiltonian_driven(params, &layout)?;
    let diss = dissipators(params, &layout)?;
    let sparse = LindbladGenerator::time_independent(&h, &diss)?;
    let mut dense = None;

    let mut rho = DensityMatrix::from_pure(&named_state(NamedState::G0, &layout));
    let mut run = SeriesRun {
        concurrence: vec![concurrence_of(&rho, &layout)?],
        t_final: 0.0,
        stabilized: false,
        last_concurrence_change: f64::INFINITY,
        last_state_change: f64::INFINITY,
        tally: PhysicalityTally::default(),
        stats: StepStats::default(),
    };
    run.tally.record_state(&rho)?;
    let mut t = 0.0;
    let mut k = 1;
    let mut c_prev = run.concurrence[0];
    for end in spec.checkpoints() {
        let mut segment = Vec::new();
        while k < times.len() && times[k] <= end {
            segment.push(times[k]);
            k += 1;
        }
        let rosenbrock = end > spec.rosenbrock_after;
        let cfg = IntegratorConfig {
            method: if rosenbrock { Method::Rosenbrock } else { Method::DormandPrince },
            ..spec.integrator.clone()
        };
        let traj = if rosenbrock {
            if dense.is_none() {
                dense = Some(liouvillian(&h, &diss, &layout)?);
            }
            evolve(&rho, dense.as_ref().expect("built above"), (t, end), &segment, &cfg)?
        } else {
            evolve(&rho, &sparse, (t, end), &segment, &cfg)?
        };
        run.stats.merge(&traj.stats);
        for state in &traj.states {
            run.tally.record_state(state)?;
            run.concurrence.push(concurrence_of(state, &layout)?);
        }
        let c = *run.concurrence.last().expect("initial sample");
        run.last_concurrence_change = (c - c_prev).abs();
        run.last_state_change = crate::measures::trace_distance(&traj.final_state, &rho)?;
        c_prev = c;
        rho = traj.final_state;
        let settled = t * params.kappa >= SETTLE_TIME * (1.0 - 1e-12);
        t = end;
        run.t_final = end;
        if spec.t_final.is_none() && settled && run.last_concurrence_change < STABILIZATION_TOL {
            run.stabilized = true;
            break;
        }
    }
    Ok(run)
}

/// Concurrence against time from |G,0⟩ for several (Δ, g) sets on one
/// log-spaced time grid. A set's column is NaN past its own horizon.
pub fn time_series(spec: &TimeSeriesSpec) -> Result<ResultTable, SweepError> {
    spec.validate()?;
    let times = spec.sample_times();
    let runs: Vec<Result<SeriesRun, String>> = spec
        .sets
        .par_iter()
        .map(|s| run_series(&SystemParams { g: s.g, delta: s.delta, ..spec.params }, spec, &times).map_err(|e| e.to_string()))
        .collect();

    let rows = runs
        .iter()
        .map(|r| r.as_ref().map_or(1, |run| run.concurrence.len()))
        .max()
        .unwrap_or(1);
    let mut columns = vec!["t".to_string()];
    columns.extend(spec.sets.iter().map(|s| format!("concurrence_{}", s.label)));
    let mut table = ResultTable::new(&columns);
    for (k, &t) in times.iter().take(rows).enumerate() {
        let mut row = vec![t];
        row.extend(runs.iter().map(|r| r.as_ref().ok().and_then(|run| run.concurrence.get(k).copied()).unwrap_or(f64::NAN)));
        table.push_row(row)?;
    }

    let mut tally = PhysicalityTally::default();
    let mut per_set = serde_json::Map::new();
    for (set, run) in spec.sets.iter().zip(&runs) {
        let entry = match run {
            Ok(run) => {
                tally.merge(&run.tally);
                json!({
                    "t_final": run.t_final,
                    "final_concurrence": run.concurrence.last(),
                    "stabilized": run.stabilized,
                    "last_concurrence_change": run.last_concurrence_change,
                    "last_state_change": run.last_state_change,
                    "stats": run.stats,
                })
            }
            Err(e) => json!({ "error": e }),
        };
        per_set.insert(set.label.clone(), entry);
    }
    table.metadata = json!({
        "experiment": "timeseries",
        "version": VERSION,
        "spec": spec,
        "sets": per_set,
        "physicality": tally,
    });
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StirapSpec {
    pub delta_schedule: Schedule,
    pub g_schedule: Schedule,
    pub gamma: f64,
    pub kappa: f64,
    /// Pump strength, applied only when `pump_during_stirap` is set.
    pub epsilon: f64,
    pub pump_during_stirap: bool,
    pub t_final: f64,
    pub initial_state: NamedState,
    /// Rows, evenly spaced over [0, t_final].
    pub samples: usize,
    pub fock_cutoff: usize,
    pub detuning_sign: DetuningSign,
    /// `max_step` defaults to 1/(20·max(Δ_max, g_max)).
    pub integrator: IntegratorConfig,
}

impl StirapSpec {
    /// Constant g with a falling detuning.
    pub fn fixed_g() -> Self {
        Self {
            delta_schedule: Schedule::TanhDown { max_value: 2e5, t0: 4e-3, lambda: 5e2 },
            g_schedule: Schedule::Constant { value: 2.5e2 },
            gamma: 1e-3,
            kappa: 1.0,
            epsilon: 1.0,
            pump_during_stirap: false,
            t_final: 2e-2,
            initial_state: NamedState::E,
            samples: 401,
            fock_cutoff: crate::model::DEFAULT_FOCK_CUTOFF,
            detuning_sign: DetuningSign::Printed,
            integrator: IntegratorConfig::default(),
        }
    }

    /// Falling detuning with a rising coupling.
    pub fn dual_control() -> Self {
        Self {
            delta_schedule: Schedule::TanhDown { max_value: 2e4, t0: 3e-3, lambda: 1e3 },
            g_schedule: Schedule::TanhUp { max_value: 2e4, t0: 3e-3, lambda: 1e3 },
            t_final: 1e-2,
            ..Self::fixed_g()
        }
    }

    pub fn params(&self) -> SystemParams {
        SystemParams {
            g: self.g_schedule.peak(),
            delta: self.delta_schedule.peak(),
            gamma: self.gamma,
            kappa: self.kappa,
            epsilon: if self.pump_during_stirap { self.epsilon } else { 0.0 },
            fock_cutoff: self.fock_cutoff,
            omega_m: 0.0,
            detuning_sign: self.detuning_sign,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        self.delta_schedule.validate("delta_schedule")?;
        self.g_schedule.validate("g_schedule")?;
        self.params().validate()?;
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon", "must be finite and >= 0"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(invalid("t_final", "must be finite and > 0"));
        }
        for (field, s) in [("delta_schedule", &self.delta_schedule), ("g_schedule", &self.g_schedule)] {
            if let Some(t0) = s.t0() {
                if !(self.t_final > t0) {
                    return Err(invalid("t_final", format!("must exceed t0 = {t0} of {field}")));
                }
            }
        }
        if self.samples < 2 {
            return Err(invalid("samples", "need at least 2"));
        }
        if self.integrator.method != Method::DormandPrince {
            return Err(invalid("integrator.method", "schedules are time dependent; use dormand_prince"));
        }
        self.integrator.validate()?;
        Ok(())
    }

    /// Integrator settings with the default step cap filled in.
    pub fn resolved_integrator(&self) -> IntegratorConfig {
        let fastest = self.delta_schedule.peak().max(self.g_schedule.peak());
        let default_cap = if fastest > 0.0 { Some(1.0 / (20.0 * fastest)) } else { None };
        IntegratorConfig { max_step: self.integrator.max_step.or(default_cap), ..self.integrator }
    }
}

/// Population transfer under the Δ(t), g(t) schedules.
pub fn stirap_run(spec: &StirapSpec) -> Result<ResultTable, SweepError> {
    spec.validate()?;
    let params = spec.params();
    let layout = params.layout()?;
    let terms =
        scheduled_hamiltonian(spec.delta_schedule, spec.g_schedule, params.epsilon, spec.detuning_sign, &layout)?;
    let generator = LindbladGenerator::new(&terms, &dissipators(&params, &layout)?)?;
    let rho0 = DensityMatrix::from_pure(&named_state(spec.initial_state, &layout));
    let times = Axis::linear(0.0, spec.t_final, spec.samples).values();
    let cfg = spec.resolved_integrator();
    let traj = evolve(&rho0, &generator as &dyn Generator, (0.0, spec.t_final), &times, &cfg)?;

    let mut table = ResultTable::new(&["t", "P_E", "P_PsiPlus", "P_PsiMinus", "P_G0", "delta", "g"]);
    let mut tally = PhysicalityTally::default();
    let mut max_psi_plus = f64::NEG_INFINITY;
    for (&t, rho) in traj.times.iter().zip(&traj.states) {
        tally.record_state(rho)?;
        let p = populations(rho, &layout)?;
        max_psi_plus = max_psi_plus.max(p.p_psi_plus);
        table.push_row(vec![
            t,
            p.p_e,
            p.p_psi_plus,
            p.p_psi_minus,
            p.p_g0,
            spec.delta_schedule.value(t),
            spec.g_schedule.value(t),
        ])?;
    }
    let fin = populations(&traj.final_state, &layout)?;
    table.metadata = json!({
        "experiment": "stirap",
        "version": VERSION,
        "spec": spec,
        "integrator": cfg,
        "summary": {
            "final_P_E": fin.p_e,
            "final_P_PsiPlus": fin.p_psi_plus,
            "final_P_PsiMinus": fin.p_psi_minus,
            "final_P_G0": fin.p_g0,
            "final_n_mode": fin.n_mode,
            "max_P_PsiPlus": max_psi_plus,
        },
        "stats": traj.stats,
        "physicality": tally,
    });
    Ok(table)
}
