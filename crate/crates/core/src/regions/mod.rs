//! Observation regions as boundary arcs and the iterative inner/outer arc construction.

mod arc;
mod construct;

pub use arc::{gamma_x0, observation_arc, s_at_polar_angle, BoundaryArc};
pub use construct::{
    construct, extend_gamma1, extend_gamma2, localisation_l, normal_parallel, step1_gamma1_0, step2_gamma2_0,
    witness_x02, ConstructionState, Iterate, ResidualRegion, Termination, TOL_WITNESS,
};
