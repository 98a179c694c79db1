//! Doubled-up complex matrices and linear quantum system records.

mod doubled;
mod squeezer;
mod system;

pub use doubled::{conjugation_asymmetry, conjugation_swap, DoubledMatrix, STRUCTURE_TOL};
pub use squeezer::{
    build_feedback_squeezer_controller, build_feedback_squeezer_plant, build_squeezer_controller,
    build_squeezer_plant, SqueezerParams,
};
pub use system::{Ports, QuantumSystem};
