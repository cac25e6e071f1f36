//! Two-medium geometric-optics billiards.
//!
//! A strictly convex table `Ω` contains a strictly convex inclusion `Ω₂`.
//! Rays move in straight lines at speed `c₁` in `Ω₁ = Ω ∖ Ω̄₂` and `c₂` in
//! `Ω₂`, reflect specularly on `∂Ω`, and split into reflected and
//! transmitted rays on `∂Ω₂` (Snell–Descartes), with total internal
//! reflection above the critical angle.
//!
//! On top of the ray flow the crate computes boundary observation regions,
//! the iterative inner/outer arc construction, an escape-map monotonicity
//! test, trapped periodic orbits, and a sampled observability verdict driven
//! by boolean propagation over ray-splitting graphs.

pub mod cli;
pub mod ellipse_lab;
pub mod error;
pub mod escape;
pub mod gcc;
pub mod geometry;
pub mod optics;
pub mod regions;
pub mod scenario;
pub mod svg;
pub mod tracer;


pub use error::{Error, Result};
