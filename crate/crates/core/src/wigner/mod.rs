//! Characteristic functions, limit measures, reduced densities and moment
//! diagnostics.

pub mod characteristic;
pub mod density;
pub mod family;
pub mod measure;

pub use characteristic::{char_function, char_function_mixture, CharEvaluator};
pub use density::{meanfield_distance, meanfield_target, reduced_density, wick_expectation, ReducedDensity};
pub use family::{pi_diagnostic, EpsilonFamily, EscapingSchedule, FamilyKind, PiRow};
pub use measure::{bessel_j0, LimitMeasure};
