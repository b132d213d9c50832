//! Second-quantization calculus on truncated bosonic Fock spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`]: occupation-number bases, symmetric tensor powers, ε-scaled
//!   ladder, number, `dΓ` and Weyl operators, coherent and Hermite states.
//! * [`wick`]: polynomial symbols stored as kernels between symmetric
//!   sectors, their Wick quantization, composition and Taylor shifts.
//! * [`dynamics`]: many-body Hamiltonians, exact sector-blocked propagation
//!   and the Hartree flow.
//! * [`wigner`]: characteristic functions, limit measures, reduced density
//!   matrices and moment diagnostics.
//!
//! All one-particle spaces are `ℂ^d`. The inner product is antilinear in its
//! left argument throughout.

pub mod dynamics;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod wick;
pub mod wigner;

pub use error::{Error, Result};

/// Complex scalar used everywhere.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;
