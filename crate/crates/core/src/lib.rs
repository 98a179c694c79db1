//! Linear quantum systems in doubled-up annihilation/creation form.
//!
//! The crate models plants and coherent controllers as
//! [`QuantumSystem`](model::QuantumSystem)s, checks their physical
//! realizability, solves the steady-state filter Riccati equation and
//! compares the mean-square estimation error of purely-classical and
//! coherent-classical (with or without coherent feedback) schemes across
//! homodyne detector angles.

pub mod error;
pub mod estimation;
pub mod linalg;
pub mod model;
pub mod realizability;
pub mod riccati;

pub use error::{Error, Result};
pub use estimation::{
    build_problem, classical_problem, coherent_feedback_problem, coherent_problem, cost,
    estimator_realization, evaluate, sweep, CostCurve, EstimationProblem, HomodyneConfig, Scheme,
};
pub use model::{DoubledMatrix, Ports, QuantumSystem, SqueezerParams};
pub use realizability::{
    check_annihilation_realizable, check_general_realizable, check_realizable, solve_commutation,
    RealizabilityReport,
};
pub use riccati::{care_residual, integrate_care_oracle, solve_care, FilterData, RiccatiSolution};
