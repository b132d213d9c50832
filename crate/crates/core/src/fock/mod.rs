//! Truncated bosonic Fock space over `d` modes and its basic operators.

pub mod basis;
pub mod io;
pub mod operator;
pub mod space;
pub mod state;
pub mod sym;
pub mod weyl;

pub use basis::{sector_dim, Occupation, SectorBasis};
pub use operator::{dgamma, ladder, mode_annihilator, number_operator, BlockOperator, LadderKind};
pub use space::FockSpace;
pub use state::{coherent_state, coherent_state_auto, hermite_state, superposition, FockState};
pub use sym::{attach, gamma_rep, merge_coefficient, sym_power};
pub use weyl::{weyl, weyl_dense, WeylFactory, WeylOperator};
