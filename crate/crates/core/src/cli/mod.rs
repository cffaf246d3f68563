//! Config-driven experiment runner: one experiment per invocation, written as
//! a CSV table plus a `.meta.json` sidecar.

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::{default_sets, parse_config, ConfigError, Experiment, LineVariable, Observable, RunConfig};

use crate::dynamics::{
    converge_cutoff, evolve, system_steady_state, DynamicsError, IntegratorConfig, LindbladGenerator, Method,
};
use crate::hilbert::{named_state, DensityMatrix, HilbertError, Physicality, SpaceLayout};
use crate::measures::{mean_photon_number, populations, qubit_concurrence, MeasureError};
use crate::model::{dissipators, hamiltonian_driven, system_liouvillian, ModelError, SystemParams};
use crate::sweep::{
    grid_sweep, line_sweep_delta, line_sweep_gamma, stirap_run, time_series, Axis, DeltaLineSpec, GammaLineSpec,
    GridSpec, PhysicalityTally, ResultTable, StirapSpec, SweepError, TimeSeriesSpec, VERSION,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv output {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("no output path: give --out or set `output` in the config")]
    NoOutput,
}

/// Paths written by [`run`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv: PathBuf,
    pub meta: PathBuf,
    pub rows: usize,
}

/// 17 significant digits, round-trips every f64.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// `results/grid.csv` → `results/grid.meta.json`.
pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

fn system_params(c: &RunConfig, g: f64, delta: f64) -> SystemParams {
    SystemParams {
        g,
        delta,
        gamma: c.gamma.unwrap_or(0.0),
        kappa: c.kappa.unwrap_or(1.0),
        epsilon: c.epsilon.unwrap_or(0.0),
        fock_cutoff: c.fock_cutoff.unwrap_or(crate::model::DEFAULT_FOCK_CUTOFF),
        omega_m: 0.0,
        detuning_sign: c.detuning_sign.unwrap_or_default(),
    }
}

fn integrator(c: &RunConfig) -> IntegratorConfig {
    let d = IntegratorConfig::default();
    IntegratorConfig {
        rtol: c.rtol.unwrap_or(d.rtol),
        atol: c.atol.unwrap_or(d.atol),
        max_step: c.max_step,
        initial_step: c.initial_step,
        method: c.method.unwrap_or(d.method),
        max_steps: d.max_steps,
    }
}

fn concurrence_of(rho: &DensityMatrix, layout: &SpaceLayout) -> Result<f64, MeasureError> {
    qubit_concurrence(rho, layout, &Physicality::INTEGRATED)
}

fn steady_table(c: &RunConfig) -> Result<ResultTable, CliError> {
    let p = system_params(c, c.g.unwrap_or(0.0), c.delta.unwrap_or(0.0));
    p.validate()?;
    let layout = p.layout()?;
    let ss = system_steady_state(&p)?;
    let pop = populations(&ss.rho, &layout)?;
    let conc = qubit_concurrence(&ss.rho, &layout, &Physicality::STRICT)?;
    let mut t = ResultTable::new(&[
        "delta", "g", "concurrence", "n_mode", "P_G0", "P_E", "P_PsiPlus", "P_PsiMinus", "residual",
    ]);
    t.push_row(vec![p.delta, p.g, conc, pop.n_mode, pop.p_g0, pop.p_e, pop.p_psi_plus, pop.p_psi_minus, ss.residual])?;
    t.metadata = json!({
        "experiment": "steady",
        "params": p,
        "min_eigenvalue": ss.min_eigenvalue,
        "physicality": ss.rho.physicality()?,
    });
    Ok(t)
}

fn evolve_table(c: &RunConfig) -> Result<ResultTable, CliError> {
    let p = system_params(c, c.g.unwrap_or(0.0), c.delta.unwrap_or(0.0));
    p.validate()?;
    let layout = p.layout()?;
    let cfg = integrator(c);
    let t_final = c.t_final.unwrap_or(1.0);
    let times = Axis::linear(0.0, t_final, c.samples.unwrap_or(101)).values();
    let rho0 = DensityMatrix::from_pure(&named_state(c.initial_state.unwrap_or(crate::hilbert::NamedState::G0), &layout));
    let traj = match cfg.method {
        Method::Rosenbrock => evolve(&rho0, &system_liouvillian(&p)?, (0.0, t_final), &times, &cfg)?,
        Method::DormandPrince => {
            let generator = LindbladGenerator::time_independent(&hamiltonian_driven(&p, &layout)?, &dissipators(&p, &layout)?)?;
            evolve(&rho0, &generator, (0.0, t_final), &times, &cfg)?
        }
    };
    let mut t = ResultTable::new(&["t", "P_G0", "P_E", "P_PsiPlus", "P_PsiMinus", "n_mode", "concurrence"]);
    let mut tally = PhysicalityTally::default();
    for (&time, rho) in traj.times.iter().zip(&traj.states) {
        tally.record_state(rho)?;
        let pop = populations(rho, &layout)?;
        t.push_row(vec![
            time,
            pop.p_g0,
            pop.p_e,
            pop.p_psi_plus,
            pop.p_psi_minus,
            pop.n_mode,
            concurrence_of(rho, &layout)?,
        ])?;
    }
    t.metadata = json!({
        "experiment": "evolve",
        "params": p,
        "integrator": cfg,
        "stats": traj.stats,
        "physicality": tally,
    });
    Ok(t)
}

fn converge_table(c: &RunConfig) -> Result<ResultTable, CliError> {
    let p = system_params(c, c.g.unwrap_or(0.0), c.delta.unwrap_or(0.0));
    let observable = c.observable.unwrap_or(Observable::Concurrence);
    let start = c.start_cutoff.unwrap_or(1);
    let tol = c.tol.unwrap_or(1e-4);
    SystemParams { fock_cutoff: start, ..p }.validate()?;
    let (cutoff, value) = converge_cutoff(
        &p,
        |rho, layout| {
            Ok(match observable {
                Observable::Concurrence => qubit_concurrence(rho, layout, &Physicality::STRICT)?,
                Observable::MeanPhotonNumber => mean_photon_number(rho, layout)?,
            })
        },
        start,
        tol,
    )?;
    let mut t = ResultTable::new(&["cutoff", "value"]);
    t.push_row(vec![cutoff as f64, value])?;
    t.metadata = json!({ "experiment": "converge", "params": p, "observable": observable, "tol": tol });
    Ok(t)
}

/// Run the experiment a parsed config describes.
pub fn build_table(c: &RunConfig) -> Result<ResultTable, CliError> {
    let base = |c: &RunConfig| system_params(c, 0.0, 0.0);
    Ok(match c.experiment() {
        Experiment::Steady => steady_table(c)?,
        Experiment::Evolve => evolve_table(c)?,
        Experiment::Converge => converge_table(c)?,
        Experiment::Grid => {
            let d = GridSpec::default();
            grid_sweep(&GridSpec {
                delta_axis: c.delta_axis.unwrap_or(d.delta_axis),
                g_axis: c.g_axis.unwrap_or(d.g_axis),
                params: base(c),
            })?
        }
        Experiment::Line => match c.sweep.unwrap_or(LineVariable::Delta) {
            LineVariable::Delta => {
                let d = DeltaLineSpec::default();
                let g = c.g.unwrap_or(d.g);
                line_sweep_delta(&DeltaLineSpec {
                    g,
                    delta_axis: c.delta_axis.unwrap_or(d.delta_axis),
                    gammas: c.gammas.clone().unwrap_or(d.gammas),
                    params: system_params(c, g, 0.0),
                })?
            }
            LineVariable::Gamma => {
                let d = GammaLineSpec::default();
                let (g, delta) = (c.g.unwrap_or(d.g), c.delta.unwrap_or(d.delta));
                line_sweep_gamma(&GammaLineSpec {
                    g,
                    delta,
                    gamma_axis: c.gamma_axis.unwrap_or(d.gamma_axis),
                    params: system_params(c, g, delta),
                })?
            }
        },
        Experiment::Timeseries => {
            let d = TimeSeriesSpec::default();
            time_series(&TimeSeriesSpec {
                sets: c.sets.clone().unwrap_or(d.sets),
                params: base(c),
                t_final: c.t_final,
                t_start: c.t_start.unwrap_or(d.t_start),
                samples_per_decade: c.samples_per_decade.unwrap_or(d.samples_per_decade),
                rosenbrock_after: c.rosenbrock_after.unwrap_or(d.rosenbrock_after),
                integrator: integrator(c),
            })?
        }
        Experiment::Stirap => {
            let d = StirapSpec::fixed_g();
            stirap_run(&StirapSpec {
                delta_schedule: c.delta_schedule.unwrap_or(d.delta_schedule),
                g_schedule: c.g_schedule.unwrap_or(d.g_schedule),
                gamma: c.gamma.unwrap_or(d.gamma),
                kappa: c.kappa.unwrap_or(d.kappa),
                epsilon: c.epsilon.unwrap_or(d.epsilon),
                pump_during_stirap: c.pump_during_stirap.unwrap_or(false),
                t_final: c.t_final.unwrap_or(d.t_final),
                initial_state: c.initial_state.unwrap_or(d.initial_state),
                samples: c.samples.unwrap_or(d.samples),
                fock_cutoff: c.fock_cutoff.unwrap_or(d.fock_cutoff),
                detuning_sign: c.detuning_sign.unwrap_or_default(),
                integrator: integrator(c),
            })?
        }
    })
}

/// Write the table as CSV (header row, one record per row) and the sidecar
/// with the resolved config and the experiment's diagnostics.
pub fn write_table(table: &ResultTable, config: &RunConfig, csv_path: &Path) -> Result<RunReport, CliError> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    let csv_err = |source| CliError::Csv { path: csv_path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(csv_path).map_err(csv_err)?;
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&x| format_float(x))).map_err(csv_err)?;
    }
    w.flush().map_err(|source| CliError::Io { path: csv_path.to_path_buf(), source })?;

    let meta = meta_path(csv_path);
    let doc = json!({
        "version": VERSION,
        "config": config,
        "columns": table.columns,
        "rows": table.rows.len(),
        "diagnostics": table.metadata,
    });
    let text = serde_json::to_string_pretty(&doc).expect("metadata serializes");
    fs::write(&meta, text + "\n").map_err(|source| CliError::Io { path: meta.clone(), source })?;
    Ok(RunReport { csv: csv_path.to_path_buf(), meta, rows: table.rows.len() })
}

/// Run a parsed config and write its outputs to `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let table = build_table(config)?;
    write_table(&table, config, out)
}

/// Read back a CSV written by [`run`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let columns = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(rec.iter().map(|s| s.parse::<f64>().unwrap_or(f64::NAN)).collect());
    }
    Ok((columns, rows))
}
