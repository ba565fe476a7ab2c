//! Static model of the articulated adaptive foot.

pub mod analysis;
pub mod linear;
pub mod nonlinear;
pub mod params;

pub use analysis::*;
pub use linear::{
    assemble_linear_system, closed_form_from_system, closed_form_load_derivative, linear_state,
    solve_closed_form, solve_linear, LinearEquilibriumSystem, LinearSolution,
};
pub use nonlinear::{assemble_residual, solve_equilibrium};
pub use params::{EquilibriumState, FootLoad, SoftFootParams, SolveMethod, GRAVITY};
