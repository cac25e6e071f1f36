//! Event-driven ray flow through the two media.
//!
//! Rays travel at unit speed per medium in physical time: a segment of
//! length `ℓ` in `Ω_k` takes `ℓ / c_k` seconds.

mod glide;
mod graph;

pub use glide::{glide, GlideTrajectory};
pub use graph::{trace, trace_with, EventNode, Leaf, RayTree, Segment, Slot, SlotLink, IN1, IN2, OUT1, OUT2};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, Dir2, Point2};
use crate::optics::{classify_hit, incidence_angle, reflect, refract, Boundary, EventKind, Medium};
use crate::scenario::Scenario;

/// A ray germ: a position (usually on a boundary) and a unit direction
/// pointing into `medium`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    /// `None` for interior points.
    pub boundary: Option<Boundary>,
    pub s: f64,
    pub position: Point2,
    pub dir: Dir2,
    pub medium: Medium,
    pub time: f64,
}

impl PhasePoint {
    pub fn interior(position: Point2, dir: Dir2, medium: Medium, time: f64) -> Self {
        PhasePoint {
            boundary: None,
            s: f64::NAN,
            position,
            dir,
            medium,
            time,
        }
    }

    pub fn on_boundary(sc: &Scenario, boundary: Boundary, s: f64, dir: Dir2, medium: Medium) -> Result<Self> {
        let position = curve(sc, boundary)?.point_at(s);
        Ok(PhasePoint {
            boundary: Some(boundary),
            s,
            position,
            dir,
            medium,
            time: 0.0,
        })
    }
}

/// Boundary hit with the local frame of the curve that was hit.
#[derive(Debug, Clone, Copy)]
pub struct Hit {
    pub boundary: Boundary,
    pub s: f64,
    pub point: Point2,
    pub distance: f64,
    pub grazing: bool,
    /// Outward normal of the curve that was hit.
    pub normal: Dir2,
    pub tangent: Dir2,
}

pub fn curve(sc: &Scenario, b: Boundary) -> Result<&BoundaryCurve> {
    match b {
        Boundary::Outer => Ok(&sc.outer),
        Boundary::Inner => sc.inner(),
    }
}

fn to_hit(curve: &BoundaryCurve, boundary: Boundary, h: crate::geometry::RayHit) -> Hit {
    let f = curve.frame_u(h.u);
    Hit {
        boundary,
        s: h.s,
        point: h.point,
        distance: h.distance,
        grazing: h.grazing,
        normal: f.normal,
        tangent: f.tangent,
    }
}

/// First boundary hit of the straight ray from `pos` along `dir` inside `medium`.
pub fn next_hit(sc: &Scenario, pos: Point2, dir: Dir2, medium: Medium) -> Result<Hit> {
    let eps = sc.tol.geom;
    let stuck = || Error::StuckRay { x: pos.x, y: pos.y };
    match medium {
        Medium::Outer => {
            let outer = sc.outer.intersect_ray(pos, dir, eps).map(|h| to_hit(&sc.outer, Boundary::Outer, h));
            let inner = sc
                .inner
                .as_ref()
                .and_then(|c| c.intersect_ray(pos, dir, eps).map(|h| to_hit(c, Boundary::Inner, h)));
            match (outer, inner) {
                (Some(o), Some(i)) if i.distance < o.distance => Ok(i),
                (Some(o), _) => Ok(o),
                (None, Some(i)) => Ok(i),
                (None, None) => Err(stuck()),
            }
        }
        Medium::Inner => {
            let c = sc.inner()?;
            c.intersect_ray(pos, dir, eps)
                .map(|h| to_hit(c, Boundary::Inner, h))
                .ok_or_else(stuck)
        }
    }
}

fn collide(sc: &Scenario, p: &PhasePoint, medium: Medium) -> Result<(Hit, PhasePoint)> {
    if p.medium != medium {
        return Err(Error::Validation(format!("phase point is in {:?}, expected {:?}", p.medium, medium)));
    }
    let hit = next_hit(sc, p.position, p.dir, medium)?;
    let next = PhasePoint {
        boundary: Some(hit.boundary),
        s: hit.s,
        position: hit.point,
        dir: reflect(p.dir, hit.normal),
        medium,
        time: p.time + hit.distance / sc.speed(medium),
    };
    Ok((hit, next))
}

/// Collision map of `Ω₁`: next hit on `∂Ω ∪ ∂Ω₂` and the specularly reflected germ.
pub fn collision_f(sc: &Scenario, p: &PhasePoint) -> Result<(Hit, PhasePoint)> {
    collide(sc, p, Medium::Outer)
}

/// Collision map of `Ω₂`.
pub fn collision_f2(sc: &Scenario, p: &PhasePoint) -> Result<(Hit, PhasePoint)> {
    collide(sc, p, Medium::Inner)
}

/// One boundary interaction and its outgoing germs.
#[derive(Debug, Clone)]
pub struct InterfaceEvent {
    pub kind: EventKind,
    pub boundary: Boundary,
    pub s: f64,
    pub point: Point2,
    pub time: f64,
    /// Angle with the normal on the `Ω₁` side.
    pub theta1: f64,
    /// Angle with the normal on the `Ω₂` side, when a ray exists there.
    pub theta2: Option<f64>,
    /// Arriving germ (direction is the velocity before the hit).
    pub incoming: PhasePoint,
    /// Reflected germ first, then the transmitted one.
    pub outgoing: Vec<PhasePoint>,
}

/// Advances `p` to its next boundary event.
pub fn step(sc: &Scenario, p: &PhasePoint) -> Result<InterfaceEvent> {
    let hit = next_hit(sc, p.position, p.dir, p.medium)?;
    let time = p.time + hit.distance / sc.speed(p.medium);
    let theta = incidence_angle(p.dir, hit.normal);
    let kind = classify_hit(hit.boundary, p.medium, theta, hit.grazing, sc.c1, sc.c2, sc.tol.angle).map_err(
        |e| match e {
            Error::GrazingOuter { .. } => Error::GrazingOuter {
                x: hit.point.x,
                y: hit.point.y,
            },
            e => e,
        },
    )?;
    let germ = |dir: Dir2, medium: Medium| PhasePoint {
        boundary: Some(hit.boundary),
        s: hit.s,
        position: hit.point,
        dir,
        medium,
        time,
    };
    let incoming = PhasePoint {
        position: hit.point,
        boundary: Some(hit.boundary),
        s: hit.s,
        time,
        ..*p
    };
    let reflected = germ(reflect(p.dir, hit.normal), p.medium);
    let (c_in, c_out) = (sc.speed(p.medium), sc.speed(p.medium.other()));
    let mut outgoing = vec![];
    let mut theta_other = None;
    let mut kind = kind;
    match kind {
        EventKind::OuterReflection | EventKind::TotalInternalReflection | EventKind::CriticalGliding => {
            outgoing.push(reflected)
        }
        EventKind::ReflectTransmit => {
            outgoing.push(reflected);
            match refract(p.dir, hit.normal, c_in, c_out)? {
                Some(t) => {
                    theta_other = Some(incidence_angle(t, hit.normal));
                    outgoing.push(germ(t, p.medium.other()));
                }
                // Collar edge: the transmitted ray does not exist after all.
                None => kind = EventKind::TotalInternalReflection,
            }
        }
        EventKind::Diffractive => outgoing.push(germ(p.dir, p.medium)),
        EventKind::OuterGliding => unreachable!("classify_hit never yields OuterGliding"),
    }
    let (theta1, theta2) = match (hit.boundary, p.medium) {
        (Boundary::Outer, _) => (theta, None),
        (Boundary::Inner, Medium::Outer) => (theta, theta_other),
        (Boundary::Inner, Medium::Inner) => (theta_other.unwrap_or(f64::NAN), Some(theta)),
    };
    Ok(InterfaceEvent {
        kind,
        boundary: hit.boundary,
        s: hit.s,
        point: hit.point,
        time,
        theta1,
        theta2,
        incoming,
        outgoing,
    })
}

/// Splitting-free path: follows the first outgoing germ (the reflected or
/// straight-on ray) for `n` events.
pub fn trace_path(sc: &Scenario, p0: &PhasePoint, n: usize) -> Result<Vec<InterfaceEvent>> {
    let mut out = Vec::with_capacity(n);
    let mut p = *p0;
    for _ in 0..n {
        let ev = step(sc, &p)?;
        p = ev.outgoing[0];
        out.push(ev);
    }
    Ok(out)
}
