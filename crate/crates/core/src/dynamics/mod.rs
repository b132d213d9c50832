//! Many-body and mean-field dynamics.

pub mod dyson;
pub mod hamiltonian;
pub mod hartree;

pub use dyson::{dyson_residual, rotated_interaction, DysonReport};
pub use hamiltonian::{
    evolve, hamiltonian_tensor_sector, Hamiltonian, InteractionSpec, Picture, DEFAULT_EIG_CAP, ROUTE_CHECK_CAP,
};
pub use hartree::{
    dbar_q, hartree_integrate, velocity_bound, HartreeFlow, HartreeTolerances, HartreeTrajectory,
};
