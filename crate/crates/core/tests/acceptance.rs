//! One PASS/FAIL line per acceptance criterion. Exits non-zero when a
//! criterion outside `KNOWN_RED` fails.

use std::time::Instant;

use entangle_core::dynamics::*;
use entangle_core::hilbert::*;
use entangle_core::measures::*;
use entangle_core::model::*;
use entangle_core::sweep::*;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde_json::Value;

/// Criteria that cannot pass with the stated parameters (see the decisions ledger).
const KNOWN_RED: &[&str] = &["stirap_fixed_g"];

#[derive(Default)]
struct Report {
    failures: Vec<String>,
    tally: PhysicalityTally,
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: String, started: Instant) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && KNOWN_RED.contains(&name) { " (known red)" } else { "" };
        println!("{verdict} {name}: {detail} [{:.1}s]{note}", started.elapsed().as_secs_f64());
        if !pass {
            self.failures.push(name.to_string());
        }
    }

    fn absorb(&mut self, metadata: &Value) {
        let t: PhysicalityTally = serde_json::from_value(metadata["physicality"].clone()).expect("tally present");
        self.tally.merge(&t);
    }

    fn record(&mut self, rho: &DensityMatrix) {
        self.tally.record_state(rho).expect("eigenvalues");
    }
}

fn grid_peak(report: &mut Report) {
    let started = Instant::now();
    let spec = GridSpec::default();
    let table = grid_sweep(&spec).unwrap();
    report.absorb(&table.metadata);
    let best = &table.metadata["max_concurrence"];
    let c = best["concurrence"].as_f64().unwrap();
    let failed = table.metadata["failures"].as_array().unwrap().len();
    report.check(
        "grid_peak",
        c >= 0.99 && failed == 0,
        format!(
            "max C = {c:.5} at Δ = {:.4}, g = {:.4} over {} points, cutoff {}, {failed} failed",
            best["delta"].as_f64().unwrap(),
            best["g"].as_f64().unwrap(),
            table.len(),
            spec.params.fock_cutoff
        ),
        started,
    );

    let started = Instant::now();
    let spec = GridSpec { params: spec.params.with_cutoff(5), ..spec };
    let table = grid_sweep(&spec).unwrap();
    let c = table.metadata["max_concurrence"]["concurrence"].as_f64().unwrap();
    println!("INFO grid_peak_cutoff_5: max C = {c:.5} (truncation diagnostic) [{:.1}s]", started.elapsed().as_secs_f64());
}

fn regimes(report: &mut Report) {
    let started = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, delta, g) in regime_points() {
        let p = steady_point(&SystemParams::pumped(g, delta)).unwrap();
        report.tally.record(&p.physicality);
        let c = p.concurrence;
        pass &= match label {
            "A" => c < 0.01,
            "B" => (0.05..=0.9).contains(&c),
            "C" => c < 0.9,
            _ => c >= 0.99,
        };
        parts.push(format!("{label} = {c:.5}"));
    }
    report.check("regimes", pass, parts.join(", "), started);
}

fn optimum_and_decay(report: &mut Report) {
    let started = Instant::now();
    let spec = DeltaLineSpec { gammas: vec![1e-5], ..DeltaLineSpec::default() };
    let table = line_sweep_delta(&spec).unwrap();
    report.absorb(&table.metadata);
    let deltas = table.column("delta").unwrap();
    let conc = table.column(&gamma_column(1e-5)).unwrap();
    let (i, c) = conc.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b });
    report.check(
        "delta_optimum",
        (0.05..=0.2).contains(&deltas[i]),
        format!("argmax Δ = {:.4} (C = {c:.5}) over {} points", deltas[i], deltas.len()),
        started,
    );

    let started = Instant::now();
    let spec = GammaLineSpec { gamma_axis: Axis::log(5e-4, 1e-1, 25), ..GammaLineSpec::default() };
    let table = line_sweep_gamma(&spec).unwrap();
    report.absorb(&table.metadata);
    let c = table.column("concurrence").unwrap();
    let monotone = c.windows(2).all(|w| w[1] <= w[0] && (w[0] == 0.0 || w[1] < w[0]));
    let first_zero = c.iter().position(|&x| x == 0.0).map(|k| table.rows[k][0]);
    report.check(
        "gamma_monotone",
        monotone,
        format!(
            "C from {:.5} to {:.5} over Γ ∈ [5e-4, 1e-1], zero from Γ = {}",
            c[0],
            c[c.len() - 1],
            first_zero.map_or("never".into(), |g| format!("{g:.3e}"))
        ),
        started,
    );
}

fn time_series_consistency(report: &mut Report) {
    let started = Instant::now();
    let spec = TimeSeriesSpec::default();
    let table = time_series(&spec).unwrap();
    report.absorb(&table.metadata);
    let mut pass = true;
    let mut parts = Vec::new();
    for set in &spec.sets {
        let meta = &table.metadata["sets"][&set.label];
        let steady = steady_point(&SystemParams { g: set.g, delta: set.delta, ..spec.params }).unwrap().concurrence;
        let evolved = meta["final_concurrence"].as_f64().unwrap();
        let diff = (evolved - steady).abs();
        pass &= diff < 1e-3 && meta["stabilized"] == true;
        parts.push(format!("{} |ΔC| = {diff:.1e} at t = {:.0e}", set.label, meta["t_final"].as_f64().unwrap()));
    }
    report.check("time_series_consistency", pass, parts.join(", "), started);
}

fn stirap(report: &mut Report) {
    for (name, spec) in [("stirap_fixed_g", StirapSpec::fixed_g()), ("stirap_dual", StirapSpec::dual_control())] {
        let started = Instant::now();
        let table = stirap_run(&spec).unwrap();
        report.absorb(&table.metadata);
        let s = &table.metadata["summary"];
        let fin = s["final_P_PsiMinus"].as_f64().unwrap();
        let max_plus = s["max_P_PsiPlus"].as_f64().unwrap();
        let pass = if name == "stirap_fixed_g" { fin > 0.99 && max_plus < 0.01 } else { fin > 0.99 };
        report.check(name, pass, format!("final P(Ψ₋) = {fin:.5}, max P(Ψ₊) = {max_plus:.5}"), started);
    }
}

fn random_density(rng: &mut StdRng, d: usize) -> DensityMatrix {
    let a = Array2::from_shape_fn((d, d), |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = a.dot(&a.t().mapv(|z| z.conj()));
    let tr: C64 = m.diag().sum();
    DensityMatrix::new(Operator::from_array(m / tr).unwrap()).unwrap()
}

fn two_qubit(m: Array2<C64>) -> TwoQubitState {
    TwoQubitState::new(DensityMatrix::new(Operator::from_array(m).unwrap()).unwrap()).unwrap()
}

/// Integrate from |G,0⟩ decade by decade until ‖𝓛ρ‖∞ < 1e-12.
fn stationary_by_integration(p: &SystemParams, report: &mut Report) -> DensityMatrix {
    let layout = p.layout().unwrap();
    let l = system_liouvillian(p).unwrap();
    let cfg = IntegratorConfig { method: Method::Rosenbrock, ..IntegratorConfig::default() };
    let mut rho = DensityMatrix::from_pure(&named_state(NamedState::G0, &layout));
    let (mut t, mut step) = (0.0, 10.0);
    while l.apply(rho.operator()).max_abs() >= 1e-12 && t < 1e12 {
        rho = evolve(&rho, &l, (t, t + step), &[], &cfg).unwrap().final_state;
        report.record(&rho);
        t += step;
        step *= 10.0;
    }
    rho
}

fn oracle_suite(report: &mut Report) {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(20);
    let mut parts = Vec::new();
    let mut pass = true;

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = SystemParams {
            g: rng.random_range(0.0..2.0),
            delta: rng.random_range(0.0..2.0),
            gamma: rng.random_range(0.0..0.5),
            kappa: rng.random_range(0.1..2.0),
            epsilon: rng.random_range(0.0..2.0),
            ..SystemParams::pumped(0.0, 0.0)
        }
        .with_cutoff(rng.random_range(1..=4));
        let layout = p.layout().unwrap();
        let rho = random_density(&mut rng, layout.dim());
        let h = hamiltonian_driven(&p, &layout).unwrap();
        let direct = lindblad_rhs(&h, &dissipators(&p, &layout).unwrap(), rho.operator());
        let via_l = system_liouvillian(&p).unwrap().apply(rho.operator());
        worst = worst.max(direct.max_abs_diff(&via_l));
    }
    pass &= worst < 1e-12;
    parts.push(format!("L vs RHS {worst:.1e}"));

    let mut worst = 0.0f64;
    for (_, delta, g) in regime_points().into_iter().filter(|r| r.0 == "B" || r.0 == "D") {
        let p = SystemParams::pumped(g, delta);
        let ss = system_steady_state(&p).unwrap();
        let long = stationary_by_integration(&p, report);
        worst = worst.max(trace_distance(&ss.rho, &long).unwrap());
    }
    pass &= worst < 1e-6;
    parts.push(format!("steady vs integration {worst:.1e}"));

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi = StateVector::from_array(ndarray::array![C64::new(h, 0.0), 0.0.into(), 0.0.into(), C64::new(-h, 0.0)]);
    let bell = concurrence(&two_qubit(phi.projector().into_array())).unwrap();
    let werner = phi.projector().as_array() * C64::new(0.8, 0.0) + Array2::<C64>::eye(4) * C64::new(0.05, 0.0);
    let werner = concurrence(&two_qubit(werner)).unwrap();
    pass &= (bell - 1.0).abs() < 1e-10 && (werner - 0.7).abs() < 1e-10;
    parts.push(format!("Φ₋ {bell:.12}, Werner {werner:.12}"));

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (g, delta) = (rng.random_range(1e-3..1e2), rng.random_range(1e-3..1e2));
        let v = dark_state(g, delta).unwrap().reduced_vector();
        let v = StateVector::from_array(v.iter().map(|&x| C64::new(x, 0.0)).collect());
        let out = hamiltonian_reduced(g, delta).unwrap().apply(&v).unwrap();
        worst = worst.max(out.norm() / g.max(delta));
    }
    pass &= worst < 1e-12;
    parts.push(format!("dark state {worst:.1e}"));

    let p = SystemParams::pumped(0.0, 0.0);
    let ss = system_steady_state(&p).unwrap();
    let n = mean_photon_number(&ss.rho, &p.layout().unwrap()).unwrap();
    let want = p.epsilon * p.epsilon / (p.kappa * p.kappa);
    let rel = (n - want).abs() / want;
    pass &= rel < 0.02;
    parts.push(format!("cavity n = {n:.6} (rel {rel:.1e})"));

    report.check("oracle_suite", pass, parts.join(", "), started);
}

fn main() {
    let mut report = Report::default();
    grid_peak(&mut report);
    regimes(&mut report);
    optimum_and_decay(&mut report);
    time_series_consistency(&mut report);
    stirap(&mut report);
    oracle_suite(&mut report);

    let t = report.tally;
    let pass = t.states > 0 && t.satisfies(&Physicality::INTEGRATED);
    report.check(
        "physicality",
        pass,
        format!(
            "{} states, max trace error {:.1e}, max hermiticity error {:.1e}, min eigenvalue {:.1e}",
            t.states, t.max_trace_error, t.max_hermiticity_error, t.min_eigenvalue
        ),
        Instant::now(),
    );

    let unexpected: Vec<_> = report.failures.iter().filter(|f| !KNOWN_RED.contains(&f.as_str())).collect();
    println!("{} failed ({} unexpected)", report.failures.len(), unexpected.len());
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
