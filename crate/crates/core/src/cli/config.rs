use serde::{Deserialize, Serialize};

use crate::dynamics::{IntegratorConfig, Method};
use crate::hilbert::NamedState;
use crate::model::{DetuningSign, Schedule, DEFAULT_FOCK_CUTOFF};
use crate::sweep::{Axis, ParamSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("config syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown experiment `{0}` (expected one of steady, evolve, grid, line, timeseries, stirap, converge)")]
    UnknownExperiment(String),
    #[error("missing required field `{field}` for experiment `{experiment}`")]
    Missing { field: &'static str, experiment: &'static str },
    #[error("field `{field}` does not apply to experiment `{experiment}`")]
    NotApplicable { field: &'static str, experiment: &'static str },
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Steady,
    Evolve,
    Grid,
    Line,
    Timeseries,
    Stirap,
    Converge,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Steady,
        Experiment::Evolve,
        Experiment::Grid,
        Experiment::Line,
        Experiment::Timeseries,
        Experiment::Stirap,
        Experiment::Converge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Steady => "steady",
            Experiment::Evolve => "evolve",
            Experiment::Grid => "grid",
            Experiment::Line => "line",
            Experiment::Timeseries => "timeseries",
            Experiment::Stirap => "stirap",
            Experiment::Converge => "converge",
        }
    }
}

/// Which parameter a line sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineVariable {
    Delta,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Concurrence,
    MeanPhotonNumber,
}

/// A run configuration. Fields that do not apply to the experiment stay
/// `None`; after [`parse_config`] every applicable field is filled.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock_cutoff: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_sign: Option<DetuningSign>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<NamedState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_decade: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rosenbrock_after: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_axis: Option<Axis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_axis: Option<Axis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_axis: Option<Axis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<LineVariable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<ParamSet>>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_schedule: Option<Schedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_schedule: Option<Schedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_during_stirap: Option<bool>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<Observable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_cutoff: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
}

impl RunConfig {
    /// The experiment of a parsed config.
    pub fn experiment(&self) -> Experiment {
        self.experiment
            .as_deref()
            .and_then(|e| Experiment::ALL.into_iter().find(|x| x.as_str() == e))
            .expect("parse_config validates the experiment name")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Field names, in declaration order, paired with presence.
fn presence(c: &RunConfig) -> Vec<(&'static str, bool)> {
    vec![
        ("experiment", c.experiment.is_some()),
        ("output", c.output.is_some()),
        ("g", c.g.is_some()),
        ("delta", c.delta.is_some()),
        ("gamma", c.gamma.is_some()),
        ("kappa", c.kappa.is_some()),
        ("epsilon", c.epsilon.is_some()),
        ("fock_cutoff", c.fock_cutoff.is_some()),
        ("detuning_sign", c.detuning_sign.is_some()),
        ("initial_state", c.initial_state.is_some()),
        ("t_final", c.t_final.is_some()),
        ("t_start", c.t_start.is_some()),
        ("samples", c.samples.is_some()),
        ("samples_per_decade", c.samples_per_decade.is_some()),
        ("rosenbrock_after", c.rosenbrock_after.is_some()),
        ("delta_axis", c.delta_axis.is_some()),
        ("g_axis", c.g_axis.is_some()),
        ("gamma_axis", c.gamma_axis.is_some()),
        ("sweep", c.sweep.is_some()),
        ("gammas", c.gammas.is_some()),
        ("sets", c.sets.is_some()),
        ("delta_schedule", c.delta_schedule.is_some()),
        ("g_schedule", c.g_schedule.is_some()),
        ("pump_during_stirap", c.pump_during_stirap.is_some()),
        ("observable", c.observable.is_some()),
        ("start_cutoff", c.start_cutoff.is_some()),
        ("tol", c.tol.is_some()),
        ("rtol", c.rtol.is_some()),
        ("atol", c.atol.is_some()),
        ("max_step", c.max_step.is_some()),
        ("initial_step", c.initial_step.is_some()),
        ("method", c.method.is_some()),
    ]
}

const COMMON: &[&str] = &["experiment", "output"];
const RATES: &[&str] = &["gamma", "kappa", "epsilon", "detuning_sign"];
const TOLERANCES: &[&str] = &["rtol", "atol", "max_step", "initial_step"];

fn applicable(exp: Experiment, line: Option<LineVariable>) -> Vec<&'static str> {
    let mut f: Vec<&'static str> = COMMON.to_vec();
    match exp {
        Experiment::Steady => {
            f.extend(["g", "delta", "fock_cutoff"]);
            f.extend(RATES);
        }
        Experiment::Evolve => {
            f.extend(["g", "delta", "fock_cutoff", "initial_state", "t_final", "samples"]);
            f.extend(RATES);
            f.extend(TOLERANCES);
            f.push("method");
        }
        Experiment::Grid => {
            f.extend(["fock_cutoff", "delta_axis", "g_axis"]);
            f.extend(RATES);
        }
        Experiment::Line => {
            f.extend(["g", "fock_cutoff", "sweep", "kappa", "epsilon", "detuning_sign"]);
            match line.unwrap_or(LineVariable::Delta) {
                LineVariable::Delta => f.extend(["delta_axis", "gammas"]),
                LineVariable::Gamma => f.extend(["delta", "gamma_axis"]),
            }
        }
        Experiment::Timeseries => {
            f.extend(["fock_cutoff", "sets", "t_final", "t_start", "samples_per_decade", "rosenbrock_after"]);
            f.extend(RATES);
            f.extend(TOLERANCES);
        }
        Experiment::Stirap => {
            f.extend([
                "fock_cutoff",
                "delta_schedule",
                "g_schedule",
                "pump_during_stirap",
                "initial_state",
                "t_final",
                "samples",
            ]);
            f.extend(RATES);
            f.extend(TOLERANCES);
            f.push("method");
        }
        Experiment::Converge => {
            f.extend(["g", "delta", "observable", "start_cutoff", "tol"]);
            f.extend(RATES);
        }
    }
    f
}

fn syntax(e: &serde_json::Error) -> ConfigError {
    ConfigError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
}

fn rate(field: &'static str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x >= 0.0 && x.is_finite()) => {
            Err(ConfigError::Invalid { field, reason: format!("{x} must be a finite rate >= 0") })
        }
        _ => Ok(()),
    }
}

fn positive(field: &'static str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => {
            Err(ConfigError::Invalid { field, reason: format!("{x} must be finite and > 0") })
        }
        _ => Ok(()),
    }
}

fn axis(field: &'static str, a: &Option<Axis>) -> Result<(), ConfigError> {
    if let Some(a) = a {
        a.validate(field).map_err(|e| ConfigError::Invalid { field, reason: e.to_string() })?;
    }
    Ok(())
}

fn schedule(field: &'static str, s: &Option<Schedule>) -> Result<(), ConfigError> {
    if let Some(s) = s {
        s.validate(field).map_err(|e| ConfigError::Invalid { field, reason: e.to_string() })?;
    }
    Ok(())
}

/// Default regime-point sets for time series.
pub fn default_sets() -> Vec<ParamSet> {
    crate::sweep::TimeSeriesSpec::default().sets
}

/// Parse, reject unknown or inapplicable fields, validate, and fill
/// defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut c: RunConfig = serde_json::from_str(text).map_err(|e| syntax(&e))?;
    let name = c.experiment.clone().ok_or(ConfigError::Missing { field: "experiment", experiment: "(any)" })?;
    let exp = Experiment::ALL
        .into_iter()
        .find(|x| x.as_str() == name)
        .ok_or(ConfigError::UnknownExperiment(name))?;
    let allowed = applicable(exp, c.sweep);
    for (field, present) in presence(&c) {
        if present && !allowed.contains(&field) {
            return Err(ConfigError::NotApplicable { field, experiment: exp.as_str() });
        }
    }
    let missing = |field| ConfigError::Missing { field, experiment: exp.as_str() };

    for (f, v) in [("g", c.g), ("delta", c.delta), ("gamma", c.gamma), ("epsilon", c.epsilon)] {
        rate(f, v)?;
    }
    for (f, v) in [
        ("kappa", c.kappa),
        ("t_final", c.t_final),
        ("t_start", c.t_start),
        ("tol", c.tol),
        ("rtol", c.rtol),
        ("atol", c.atol),
        ("max_step", c.max_step),
        ("initial_step", c.initial_step),
    ] {
        positive(f, v)?;
    }
    if let Some(gs) = &c.gammas {
        if gs.is_empty() {
            return Err(ConfigError::Invalid { field: "gammas", reason: "need at least one value".into() });
        }
        for &g in gs {
            rate("gammas", Some(g))?;
        }
    }
    if c.fock_cutoff == Some(0) {
        return Err(ConfigError::Invalid { field: "fock_cutoff", reason: "must be >= 1".into() });
    }
    if c.start_cutoff == Some(0) {
        return Err(ConfigError::Invalid { field: "start_cutoff", reason: "must be >= 1".into() });
    }
    if c.samples.is_some_and(|s| s < 2) {
        return Err(ConfigError::Invalid { field: "samples", reason: "must be >= 2".into() });
    }
    if c.samples_per_decade == Some(0) {
        return Err(ConfigError::Invalid { field: "samples_per_decade", reason: "must be >= 1".into() });
    }
    rate("rosenbrock_after", c.rosenbrock_after)?;
    axis("delta_axis", &c.delta_axis)?;
    axis("g_axis", &c.g_axis)?;
    axis("gamma_axis", &c.gamma_axis)?;
    schedule("delta_schedule", &c.delta_schedule)?;
    schedule("g_schedule", &c.g_schedule)?;
    if let Some(sets) = &c.sets {
        if sets.is_empty() {
            return Err(ConfigError::Invalid { field: "sets", reason: "need at least one parameter set".into() });
        }
        for s in sets {
            rate("sets", Some(s.g))?;
            rate("sets", Some(s.delta))?;
        }
    }

    let steady_gamma = 1e-5;
    if allowed.contains(&"kappa") {
        c.kappa.get_or_insert(1.0);
        c.epsilon.get_or_insert(1.0);
        c.detuning_sign.get_or_insert(DetuningSign::Printed);
    }
    if allowed.contains(&"fock_cutoff") {
        c.fock_cutoff.get_or_insert(DEFAULT_FOCK_CUTOFF);
    }
    if allowed.contains(&"rtol") {
        let d = IntegratorConfig::default();
        c.rtol.get_or_insert(d.rtol);
        c.atol.get_or_insert(d.atol);
    }
    match exp {
        Experiment::Steady | Experiment::Converge => {
            c.g.ok_or_else(|| missing("g"))?;
            c.delta.ok_or_else(|| missing("delta"))?;
            c.gamma.get_or_insert(steady_gamma);
            if exp == Experiment::Converge {
                c.observable.get_or_insert(Observable::Concurrence);
                c.start_cutoff.get_or_insert(1);
                c.tol.get_or_insert(1e-4);
            }
        }
        Experiment::Evolve => {
            c.g.ok_or_else(|| missing("g"))?;
            c.delta.ok_or_else(|| missing("delta"))?;
            c.t_final.ok_or_else(|| missing("t_final"))?;
            c.gamma.get_or_insert(steady_gamma);
            c.initial_state.get_or_insert(NamedState::G0);
            c.samples.get_or_insert(101);
            c.method.get_or_insert(Method::DormandPrince);
        }
        Experiment::Grid => {
            c.gamma.get_or_insert(steady_gamma);
            let d = crate::sweep::GridSpec::default();
            c.delta_axis.get_or_insert(d.delta_axis);
            c.g_axis.get_or_insert(d.g_axis);
        }
        Experiment::Line => {
            c.g.get_or_insert(1.0);
            match *c.sweep.get_or_insert(LineVariable::Delta) {
                LineVariable::Delta => {
                    let d = crate::sweep::DeltaLineSpec::default();
                    c.delta_axis.get_or_insert(d.delta_axis);
                    c.gammas.get_or_insert(d.gammas);
                }
                LineVariable::Gamma => {
                    let d = crate::sweep::GammaLineSpec::default();
                    c.delta.get_or_insert(d.delta);
                    c.gamma_axis.get_or_insert(d.gamma_axis);
                    if c.gamma_axis.is_some_and(|a| a.min < 0.0) {
                        return Err(ConfigError::Invalid { field: "gamma_axis", reason: "rates must be >= 0".into() });
                    }
                }
            }
        }
        Experiment::Timeseries => {
            let d = crate::sweep::TimeSeriesSpec::default();
            c.gamma.get_or_insert(steady_gamma);
            c.sets.get_or_insert_with(default_sets);
            c.t_start.get_or_insert(d.t_start);
            c.samples_per_decade.get_or_insert(d.samples_per_decade);
            c.rosenbrock_after.get_or_insert(d.rosenbrock_after);
            if let (Some(t1), Some(t0)) = (c.t_final, c.t_start) {
                if t1 <= t0 {
                    return Err(ConfigError::Invalid { field: "t_final", reason: "must exceed t_start".into() });
                }
            }
        }
        Experiment::Stirap => {
            c.delta_schedule.ok_or_else(|| missing("delta_schedule"))?;
            c.g_schedule.ok_or_else(|| missing("g_schedule"))?;
            c.t_final.ok_or_else(|| missing("t_final"))?;
            c.gamma.get_or_insert(1e-3);
            c.pump_during_stirap.get_or_insert(false);
            c.initial_state.get_or_insert(NamedState::E);
            c.samples.get_or_insert(401);
            let method = *c.method.get_or_insert(Method::DormandPrince);
            if method != Method::DormandPrince {
                return Err(ConfigError::Invalid {
                    field: "method",
                    reason: "schedules are time dependent; use dormand_prince".into(),
                });
            }
        }
    }
    Ok(c)
}
