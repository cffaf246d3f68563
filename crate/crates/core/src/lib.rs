//! Dissipative entanglement of two detuned qubits sharing a lossy bosonic
//! mode: model construction, master-equation dynamics, steady states,
//! concurrence, and the parameter sweeps behind each figure.
//!
//! Rates are in units of the mode decay κ and times in units of 1/κ.
//! Dissipators follow the convention rate·(2LρL† − L†Lρ − ρL†L), so Γ and κ
//! are half the rates of the usual LρL† − ½{L†L, ρ} form.

pub mod dynamics;
pub mod hilbert;
mod linalg;
pub mod measures;
pub mod model;
pub mod sweep;
pub mod cli;
