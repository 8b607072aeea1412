//! Simulation of the all-versus-nothing nonlocality test on two-photon
//! polarization-momentum hyperentangled states.
//!
//! The crate builds the hyperentangled states and their noisy versions,
//! assembles the nine-term correlation operator, enumerates local
//! hidden-variable models to obtain the classical bound, models the optical
//! analyzers and the delay-scan resonance, and simulates the counting
//! experiment that estimates each term.

pub mod apparatus;
pub mod cli;
pub mod error;
pub mod harness;
pub mod lhv;
pub mod linalg;
pub mod observables;
pub mod states;

pub use error::{Error, Result};
pub use harness::{
    aggregate, estimate_term, run_avn, sample_counts, setting_for_term, AvnReport, CompositeMode,
    CountRecord, MeasurementSetting, Setup, TermEstimate,
};
pub use lhv::{classical_bound, lhv_value, violation_margin, BoundReport, LhvAssignment};
pub use linalg::{apply, embed, expectation, kron, kron_ket, DensityMatrix, Ket, Operator};
pub use observables::{
    cabello_operator, term_operator, terms, verify_eigenvalues, CabelloOperator,
};
pub use states::{apply_noise, bell_k, bell_pi, hyper_state, HyperState, NoiseModel, PiFlavor};
