//! Polynomial symbols `b(z) = ⟨z^{⊗q}, b̃ z^{⊗p}⟩` and their Wick quantization.

pub mod calculus;
pub mod quantize;
pub mod symbol;

pub use calculus::{commutator, compose, compose_terms, derivative_kernel, merge_matrix, taylor_shift};
pub use quantize::{norm_estimates, wick_matrix, wick_oracle, wick_poly, NormReport, ORACLE_CAP};
pub use symbol::{KernelJson, PolySymbol, WickSymbol};
