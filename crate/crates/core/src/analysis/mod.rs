//! Analysis of computed profiles: characteristic decomposition, wave
//! measures, interaction coefficients and limit extraction.

mod decomposition;
mod interactions;
mod limit;
mod measures;

pub use decomposition::{
    component_coefficients, component_residual, decompose, CharacteristicDecomposition, ComponentCoefficients,
};
pub use interactions::{interaction_coefficients, interaction_direct, InteractionCoefficients};
pub use limit::{
    entropy_residual, extract_limit, l1_between, l1_distance_to, linf_distance_to, plateau_statistics,
    plateau_tolerance, plateau_window, total_variation, LimitRiemannSolution, LimitWave,
};
pub use measures::{linearized_measures, measure_deviation, uncoupled_measures, CoupledMeasures, WaveMeasureSet};
