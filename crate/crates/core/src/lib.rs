//! Quantum-noise (shot-noise) power spectral density of a photocurrent
//! produced by detecting an optical field with discrete classical components,
//! demodulated any number of times, with optional squeezed vacuum.
//!
//! The analytic engine lives in [`freq_matrix`], [`squeeze`] and
//! [`spectrum`]; [`oracle`] is an independent time-domain Monte Carlo check.

pub mod error;
pub mod freq_matrix;
pub mod model;
pub mod oracle;
pub mod spectrum;
pub mod squeeze;

pub use error::{Cell, Error, Result};
pub use freq_matrix::{
    build_frequency_matrix, column_signs, demod_offset, demod_phase, group_entries,
    CoincidenceGroup, FrequencyMatrix, Grouping,
};
pub use model::{
    validate_scheme, ClassicalComponent, DemodStage, DetectionConfig, EnergyTable, Scheme,
    SqueezerSpec, PLANCK,
};
pub use spectrum::{
    group_contribution, off_center_penalty, optimal_phases, total_spectrum, unique_contribution,
    uniform_grid, Analysis, Context, Contribution, OptimalPhases, SpectrumResult, SpectrumUnit,
};
pub use squeeze::{compose_transfers, pure_squeeze_transfers, TransferSet};
