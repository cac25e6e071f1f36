//! Escaping-geometry analysis of the residual region: the drift map `ℳ`,
//! the uniformly-escaping verdict, trapped-orbit search and the
//! transmitted-ray hypothesis check.

mod thmtrap;
mod trapped;

pub use thmtrap::{check_thmtrap_hypothesis, Branch, ThmtrapReport, ThmtrapViolation, ViolationKind};
pub use trapped::{find_trapped_rays, outer_return, Mechanism, OrbitEvent, Return, TrappedOrbit};

use crate::error::{Error, Result};
use crate::geometry::Dir2;
use crate::optics::{Boundary, Medium};
use crate::regions::BoundaryArc;
use crate::scenario::Scenario;
use crate::tracer::next_hit;

/// `ℳ(δ₂(s), ξ)`: the component of `ξ` along the counter-clockwise tangent
/// of `∂Ω` where the ray from `δ₂(s)` along `ξ` first lands.
pub fn escape_value(sc: &Scenario, s: f64, xi: Dir2) -> Result<f64> {
    let f = sc.inner()?.frame_at(s)?;
    if xi.dot(f.normal.vec()) < 0.0 {
        return Err(Error::Validation(format!("direction at inner s = {s} points into the inclusion")));
    }
    let h = next_hit(sc, f.point, xi, Medium::Outer)?;
    if h.boundary != Boundary::Outer {
        return Err(Error::StuckRay { x: f.point.x, y: f.point.y });
    }
    Ok(xi.dot(h.tangent.vec()))
}

/// `s ↦ ℳ(δ₂(s), n₂(δ₂(s)))` sampled over the closed complement of `Γ₂`.
#[derive(Debug, Clone)]
pub struct EscapeProfile {
    /// `(s, ℳ)` in the orientation of `δ₂`, starting at the upper end of `Γ₂`.
    pub samples: Vec<(f64, f64)>,
    pub uniformly_escaping: bool,
    /// Consecutive sample pairs `(s_a, s_b, drop)` where `ℳ` decreases by more than `tol_mono`.
    pub violations: Vec<(f64, f64, f64)>,
    /// Whether the verdict is unchanged at half the spacing.
    pub stable_under_halving: bool,
}

impl EscapeProfile {
    pub fn csv(&self) -> String {
        let mut out = String::from("s,m\n");
        for (s, m) in &self.samples {
            out.push_str(&format!("{s:.12e},{m:.12e}\n"));
        }
        out
    }
}

fn profile(sc: &Scenario, gamma2: &BoundaryArc, ds: f64) -> Result<(Vec<(f64, f64)>, Vec<(f64, f64, f64)>)> {
    if gamma2.full {
        return Ok((vec![], vec![]));
    }
    let rest = gamma2.complement();
    let len = rest.length();
    let n = ((len / ds).ceil() as usize).max(1);
    let inner = sc.inner()?;
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let s = crate::geometry::wrap_param(rest.lo + len * k as f64 / n as f64);
        let normal = inner.frame_at(s)?.normal;
        samples.push((s, escape_value(sc, s, normal)?));
    }
    let violations = samples
        .windows(2)
        .filter(|w| w[1].1 < w[0].1 - sc.tol.mono)
        .map(|w| (w[0].0, w[1].0, w[0].1 - w[1].1))
        .collect();
    Ok((samples, violations))
}

/// Checks that `ℳ(δ₂(s), n₂)` is nondecreasing along `∂Ω₂ ∖ Γ₂` with sample spacing at most `ds`.
pub fn is_uniformly_escaping(sc: &Scenario, gamma2: &BoundaryArc, ds: f64) -> Result<EscapeProfile> {
    if !(ds > 0.0) {
        return Err(Error::Validation(format!("monotonicity spacing {ds} must be positive")));
    }
    let (samples, violations) = profile(sc, gamma2, ds)?;
    let (_, finer) = profile(sc, gamma2, ds / 2.0)?;
    let uniformly_escaping = violations.is_empty();
    Ok(EscapeProfile {
        samples,
        uniformly_escaping,
        stable_under_halving: uniformly_escaping == finer.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests;
