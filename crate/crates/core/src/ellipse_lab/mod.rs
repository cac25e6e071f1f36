//! Billiards in an ellipse: caustic classes, focal orbits, and arcs that
//! satisfy GCC without being of the form `Γ(x₀)`.

use crate::error::{Error, Result};
use crate::gcc::{check_gcc_simple, GccVerdict};
use crate::geometry::{BoundaryCurve, CurveKind, Dir2, Point2, Vec2};
use crate::optics::{reflect, Boundary, Medium};
use crate::regions::{gamma_x0, BoundaryArc};
use crate::scenario::{Observation, Scenario};
use crate::tracer::next_hit;

/// Focus tolerance of the chord classification.
pub const TOL_FOCAL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CausticClass {
    Elliptic,
    Hyperbolic,
    Focal,
    MajorAxis,
    MinorAxis,
    Gliding,
}

impl CausticClass {
    pub fn label(self) -> &'static str {
        match self {
            CausticClass::Elliptic => "elliptic",
            CausticClass::Hyperbolic => "hyperbolic",
            CausticClass::Focal => "focal",
            CausticClass::MajorAxis => "major_axis",
            CausticClass::MinorAxis => "minor_axis",
            CausticClass::Gliding => "gliding",
        }
    }
}

/// Ellipse in its principal frame, `a ≥ b`.
#[derive(Debug, Clone, Copy)]
pub struct EllipseFrame {
    pub center: Point2,
    /// Direction of the major axis.
    pub angle: f64,
    pub a: f64,
    pub b: f64,
}

impl EllipseFrame {
    pub fn of(curve: &BoundaryCurve) -> Result<Self> {
        match *curve.kind() {
            CurveKind::Ellipse { center, a, b, angle } if a >= b => Ok(EllipseFrame { center, angle, a, b }),
            CurveKind::Ellipse { center, a, b, angle } => Ok(EllipseFrame {
                center,
                angle: angle + std::f64::consts::FRAC_PI_2,
                a: b,
                b: a,
            }),
            CurveKind::Circle { center, radius } => Ok(EllipseFrame {
                center,
                angle: 0.0,
                a: radius,
                b: radius,
            }),
            CurveKind::Radial { .. } => Err(Error::Validation("ellipse lab needs an ellipse".into())),
        }
    }

    pub fn c(&self) -> f64 {
        (self.a * self.a - self.b * self.b).max(0.0).sqrt()
    }

    /// `F₁ = (c, 0)` and `F₂ = (−c, 0)` in world coordinates.
    pub fn foci(&self) -> (Point2, Point2) {
        let c = self.c();
        (self.to_world(Point2::new(c, 0.0)), self.to_world(Point2::new(-c, 0.0)))
    }

    pub fn to_local(&self, p: Point2) -> Point2 {
        (p - self.center).rotate(-self.angle)
    }

    pub fn to_world(&self, p: Point2) -> Point2 {
        self.center + p.rotate(self.angle)
    }

    /// Point at eccentric angle `t` (radians).
    pub fn at(&self, t: f64) -> Point2 {
        self.to_world(Point2::new(self.a * t.cos(), self.b * t.sin()))
    }
}

/// Classifies the billiard chord `p → q` by where its line meets the
/// focal segment.
pub fn classify_caustic(curve: &BoundaryCurve, p: Point2, q: Point2, tol_geom: f64) -> Result<CausticClass> {
    let e = EllipseFrame::of(curve)?;
    let (p, q) = (e.to_local(p), e.to_local(q));
    let d = q - p;
    let len = d.norm();
    if len < tol_geom {
        return Ok(CausticClass::Gliding);
    }
    if p.y.abs() < tol_geom && q.y.abs() < tol_geom {
        return Ok(CausticClass::MajorAxis);
    }
    if p.x.abs() < tol_geom && q.x.abs() < tol_geom {
        return Ok(CausticClass::MinorAxis);
    }
    let c = e.c();
    let dist = |f: Point2| d.cross(f - p).abs() / len;
    if dist(Point2::new(c, 0.0)) < TOL_FOCAL || dist(Point2::new(-c, 0.0)) < TOL_FOCAL {
        return Ok(CausticClass::Focal);
    }
    // Open chord against the open focal segment on y = 0.
    if (p.y > 0.0) != (q.y > 0.0) && p.y != 0.0 && q.y != 0.0 {
        let x = p.x - p.y * d.x / d.y;
        if x.abs() < c {
            return Ok(CausticClass::Hyperbolic);
        }
    }
    Ok(CausticClass::Elliptic)
}

fn table(curve: &BoundaryCurve) -> Result<Scenario> {
    Scenario::new(curve.clone(), None, 1.0, 1.0, Observation::Full, f64::INFINITY)
}

/// Bounce points of the billiard orbit leaving `start` along `dir`,
/// starting with `start` itself.
pub fn orbit(curve: &BoundaryCurve, start: Point2, dir: Dir2, n: usize) -> Result<Vec<Point2>> {
    let sc = table(curve)?;
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(start);
    let (mut pos, mut dir) = (start, dir);
    for _ in 0..n {
        let h = next_hit(&sc, pos, dir, Medium::Outer)?;
        dir = reflect(dir, h.normal);
        pos = h.point;
        pts.push(pos);
    }
    Ok(pts)
}

#[derive(Debug, Clone)]
pub struct FocalRun {
    pub points: Vec<Point2>,
    /// `|angle to the major axis|` of each chord, in `[0, π/2]`.
    pub angles: Vec<f64>,
    /// Distance from each reflected chord's line to the focus it should pass
    /// through, before re-aiming.
    pub focus_miss: Vec<f64>,
}

/// Follows the orbit from `start` aimed at `F₁` for `n` bounces. Focal orbits
/// lie on the stable manifold of the major-axis 2-cycle, so rounding would
/// push a plainly traced orbit off it by a factor `(a+c)/(a−c)` squared per
/// period. After each reflection the direction is re-aimed at the next focus;
/// the discarded correction is reported in `focus_miss`.
pub fn focal_convergence(curve: &BoundaryCurve, start: Point2, n: usize) -> Result<FocalRun> {
    let e = EllipseFrame::of(curve)?;
    let sc = table(curve)?;
    let (f1, f2) = e.foci();
    let axis = Vec2::from_angle(e.angle);
    let mut dir = Dir2::try_new(f1 - start).ok_or_else(|| Error::Validation("start point is a focus".into()))?;
    let mut pos = start;
    let mut run = FocalRun {
        points: vec![start],
        angles: vec![],
        focus_miss: vec![0.0],
    };
    for k in 0..n {
        run.angles.push(axis.cross(dir.vec()).abs().atan2(axis.dot(dir.vec()).abs()));
        let h = next_hit(&sc, pos, dir, Medium::Outer)?;
        pos = h.point;
        run.points.push(pos);
        let reflected = reflect(dir, h.normal);
        let f = if k % 2 == 0 { f2 } else { f1 };
        run.focus_miss.push(reflected.vec().cross(f - pos).abs());
        // Chords along the major axis end at a vertex where the focus is
        // straight ahead or behind; keep the reflected direction there.
        dir = Dir2::try_new(f - pos)
            .filter(|d| d.dot(reflected.vec()) > 0.0)
            .unwrap_or(reflected);
    }
    Ok(run)
}

/// The arc of the GCC lemma for `x1` in the third quadrant of the principal
/// frame: from `x1` counter-clockwise through the fourth quadrant to `x2`,
/// the other end of the chord through `F₁`. Returns the arc and `x2`.
pub fn lemel_arc(curve: &BoundaryCurve, x1: Point2, tol_geom: f64) -> Result<(BoundaryArc, Point2)> {
    let e = EllipseFrame::of(curve)?;
    let l = e.to_local(x1);
    if !(l.x < 0.0 && l.y < 0.0) || curve.implicit(x1).abs() > tol_geom.max(1e-9) {
        return Err(Error::BadQuadrant { x: x1.x, y: x1.y });
    }
    let (f1, _) = e.foci();
    let dir = Dir2::try_new(f1 - x1).ok_or(Error::BadQuadrant { x: x1.x, y: x1.y })?;
    let hit = curve
        .intersect_ray(x1, dir, tol_geom)
        .ok_or_else(|| Error::Validation("chord through the focus does not return".into()))?;
    let arc = BoundaryArc::new(Boundary::Outer, curve.s_of_point(x1), hit.s);
    Ok((arc, hit.point))
}

/// `x₀` with `Γ(x₀) = Γ` within `tol` (Hausdorff, in parameter units), if
/// one exists. Arcs no longer than half the perimeter never qualify.
pub fn is_gamma_x0_form(curve: &BoundaryCurve, gamma: &BoundaryArc, tol: f64) -> Result<Option<Point2>> {
    if gamma.full || gamma.is_empty() || gamma.length() <= 0.5 {
        return Ok(None);
    }
    let (p, q) = (curve.frame_at(gamma.lo)?, curve.frame_at(gamma.hi)?);
    let (t, u) = (p.tangent.vec(), q.tangent.vec());
    let den = t.cross(u);
    if den.abs() < 1e-14 {
        return Ok(None);
    }
    let x0 = p.point + t * ((q.point - p.point).cross(u) / den);
    if curve.implicit(x0) <= 0.0 {
        return Ok(None);
    }
    let g = gamma_x0(curve, Boundary::Outer, x0)?;
    Ok((g.hausdorff(gamma) <= tol).then_some(x0))
}

/// GCC sampling verdicts for `Γ` and for `∂Ω ∖ Γ`. The complement of a
/// full arc is empty and reported as `None`.
pub fn both_sides_gcc(
    curve: &BoundaryCurve,
    gamma: &BoundaryArc,
    horizon: f64,
    n_s: usize,
    n_theta: usize,
) -> Result<(GccVerdict, Option<GccVerdict>)> {
    let on = check_gcc_simple(curve, gamma, horizon, n_s, n_theta)?;
    if gamma.full {
        return Ok((on, None));
    }
    let off = check_gcc_simple(curve, &gamma.complement(), horizon, n_s, n_theta)?;
    Ok((on, Some(off)))
}

/// Third-quadrant start whose lemma arc leaves room for the mirrored arc in
/// its complement: the chord through `F₁` must end before the antipode of
/// `x1`. Picks the eccentric angle with the widest such margin.
pub fn two_sided_lemel_start(curve: &BoundaryCurve, tol_geom: f64) -> Result<Option<Point2>> {
    let e = EllipseFrame::of(curve)?;
    let mut best: Option<(f64, Point2)> = None;
    for k in 1..360 {
        let t = std::f64::consts::PI * (1.0 + k as f64 / 720.0);
        let x1 = e.at(t);
        let (_, x2) = lemel_arc(curve, x1, tol_geom)?;
        let l2 = e.to_local(x2);
        let t2 = (l2.y / e.b).atan2(l2.x / e.a);
        let margin = (t - std::f64::consts::PI) - t2;
        if margin > best.map_or(0.0, |b| b.0) {
            best = Some((margin, x1));
        }
    }
    Ok(best.map(|b| b.1))
}

#[cfg(test)]
mod tests;
