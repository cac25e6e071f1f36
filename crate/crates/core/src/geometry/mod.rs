//! Strictly convex closed curves and the 2D primitives they are built on.

mod arclength;
mod curve;
mod vec2;

pub use curve::{deg, BoundaryCurve, CurveKind, Frame, RadialProfile, RayHit, TOL_CURVATURE, TOL_TANGENCY};
pub use vec2::{wrap_angle, wrap_param, Dir2, Point2, Vec2};
