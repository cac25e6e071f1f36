//! Closed strictly convex boundary curves.
//!
//! Every curve carries a native periodic parameter `u ∈ [0, 2π)` (polar angle
//! for circles and radial curves, eccentric angle for ellipses) and the
//! normalised arc-length parameter `s ∈ [0, 1)` used everywhere else. The
//! orientation is counter-clockwise and `s = 0` sits at the curve's anchor.

use std::f64::consts::{PI, TAU};

use super::arclength::ArcTable;
use super::vec2::{wrap_angle, wrap_param, Dir2, Point2, Vec2};
use crate::error::{Error, Result};

/// Below this angle (radians) between a ray and the tangent, a hit is grazing.
pub const TOL_TANGENCY: f64 = 1e-9;
/// Curvature floor for strict convexity.
pub const TOL_CURVATURE: f64 = 1e-12;
const ARC_REL_TOL: f64 = 1e-13;
const CONVEXITY_SAMPLES: usize = 720;

/// Radial function `r(φ)` of a star-shaped curve around its center.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// `r(φ) = a0 + Σ_k (cos[k-1]·cos kφ + sin[k-1]·sin kφ)`.
    Fourier {
        a0: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    /// Polar form of an axis-aligned ellipse with semi-axes `a`, `b`.
    Ellipse { a: f64, b: f64 },
}

impl RadialProfile {
    /// `(r, r', r'')` at polar angle `phi`.
    pub fn eval(&self, phi: f64) -> (f64, f64, f64) {
        match self {
            RadialProfile::Fourier { a0, cos, sin } => {
                let mut r = *a0;
                let (mut r1, mut r2) = (0.0, 0.0);
                let n = cos.len().max(sin.len());
                for k in 1..=n {
                    let ca = cos.get(k - 1).copied().unwrap_or(0.0);
                    let sa = sin.get(k - 1).copied().unwrap_or(0.0);
                    let kf = k as f64;
                    let (s, c) = (kf * phi).sin_cos();
                    r += ca * c + sa * s;
                    r1 += kf * (-ca * s + sa * c);
                    r2 += -kf * kf * (ca * c + sa * s);
                }
                (r, r1, r2)
            }
            RadialProfile::Ellipse { a, b } => {
                let (s, c) = phi.sin_cos();
                let (s2, c2) = (2.0 * phi).sin_cos();
                let d = a * a - b * b;
                let q = b * b * c * c + a * a * s * s;
                let q1 = d * s2;
                let q2 = 2.0 * d * c2;
                let ab = a * b;
                let r = ab / q.sqrt();
                let r1 = -0.5 * ab * q.powf(-1.5) * q1;
                let r2 = ab * (0.75 * q.powf(-2.5) * q1 * q1 - 0.5 * q.powf(-1.5) * q2);
                (r, r1, r2)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    Circle {
        center: Point2,
        radius: f64,
    },
    /// `angle` rotates the major axis counter-clockwise from the x axis.
    Ellipse {
        center: Point2,
        a: f64,
        b: f64,
        angle: f64,
    },
    /// Generic star-shaped convex curve; queries use sampling + root refinement.
    Radial {
        center: Point2,
        profile: RadialProfile,
        samples: usize,
    },
}

/// Tangent, outward normal and curvature at a boundary point.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub point: Point2,
    pub tangent: Dir2,
    pub normal: Dir2,
    pub curvature: f64,
}

/// First forward intersection of a ray with a curve.
#[derive(Debug, Clone, Copy)]
pub struct RayHit {
    pub s: f64,
    /// Native parameter of the hit.
    pub u: f64,
    pub point: Point2,
    pub distance: f64,
    pub grazing: bool,
}

#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    kind: CurveKind,
    table: Option<ArcTable>,
    perimeter: f64,
    anchor_u: f64,
    anchor_len: f64,
    extent: f64,
}

impl PartialEq for BoundaryCurve {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.anchor_u == other.anchor_u
    }
}

impl BoundaryCurve {
    pub fn circle(center: Point2, radius: f64) -> Result<Self> {
        Self::new(CurveKind::Circle { center, radius })
    }

    pub fn ellipse(center: Point2, a: f64, b: f64, angle: f64) -> Result<Self> {
        Self::new(CurveKind::Ellipse { center, a, b, angle })
    }

    pub fn radial(center: Point2, profile: RadialProfile, samples: usize) -> Result<Self> {
        Self::new(CurveKind::Radial {
            center,
            profile,
            samples,
        })
    }

    /// Builds the curve, checks strict convexity on a sample grid and anchors
    /// `s = 0` at the crossing of the positive x direction from the center.
    pub fn new(kind: CurveKind) -> Result<Self> {
        match &kind {
            CurveKind::Circle { radius, .. } if !(*radius > 0.0) => {
                return Err(Error::Validation(format!("circle radius {radius} must be positive")))
            }
            CurveKind::Ellipse { a, b, .. } if !(*a > 0.0 && *b > 0.0) => {
                return Err(Error::Validation(format!("ellipse semi-axes {a}, {b} must be positive")))
            }
            CurveKind::Radial { samples, .. } if *samples < 16 => {
                return Err(Error::Validation("radial curve needs at least 16 samples".into()))
            }
            _ => {}
        }
        let mut curve = BoundaryCurve {
            kind,
            table: None,
            perimeter: 0.0,
            anchor_u: 0.0,
            anchor_len: 0.0,
            extent: 0.0,
        };
        match curve.kind {
            CurveKind::Circle { radius, .. } => curve.perimeter = TAU * radius,
            _ => {
                let table = ArcTable::build(&|u| curve.speed(u), ARC_REL_TOL);
                curve.perimeter = table.perimeter();
                curve.table = Some(table);
            }
        }
        let mut extent: f64 = 0.0;
        for k in 0..CONVEXITY_SAMPLES {
            let u = TAU * k as f64 / CONVEXITY_SAMPLES as f64;
            let kappa = curve.curvature_u(u);
            if !(kappa > TOL_CURVATURE) {
                let s = curve.s_of_u(u);
                return Err(Error::NonConvex { s, curvature: kappa });
            }
            extent = extent.max((curve.pos(u) - curve.center()).norm());
        }
        curve.extent = extent;
        let u0 = curve.positive_x_crossing();
        curve.set_anchor_u(u0);
        Ok(curve)
    }

    /// Re-anchors `s = 0` at the boundary point closest to `p`.
    pub fn anchored_near(mut self, p: Point2) -> Self {
        let u = self.closest_u(p);
        self.set_anchor_u(u);
        self
    }

    fn set_anchor_u(&mut self, u: f64) {
        self.anchor_u = wrap_angle(u);
        self.anchor_len = self.length_to_u(self.anchor_u);
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn center(&self) -> Point2 {
        match &self.kind {
            CurveKind::Circle { center, .. }
            | CurveKind::Ellipse { center, .. }
            | CurveKind::Radial { center, .. } => *center,
        }
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Largest distance from the center to the curve (sampled).
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Native parameter of `s = 0`.
    pub fn anchor_u(&self) -> f64 {
        self.anchor_u
    }

    // ---- native parametrisation -------------------------------------------------

    pub fn pos(&self, u: f64) -> Point2 {
        match &self.kind {
            CurveKind::Circle { center, radius } => *center + Vec2::from_angle(u) * *radius,
            CurveKind::Ellipse { center, a, b, angle } => {
                *center + Vec2::new(a * u.cos(), b * u.sin()).rotate(*angle)
            }
            CurveKind::Radial { center, profile, .. } => *center + Vec2::from_angle(u) * profile.eval(u).0,
        }
    }

    fn derivs(&self, u: f64) -> (Vec2, Vec2) {
        match &self.kind {
            CurveKind::Circle { radius, .. } => {
                let e = Vec2::from_angle(u);
                (e.perp() * *radius, -e * *radius)
            }
            CurveKind::Ellipse { a, b, angle, .. } => {
                let (s, c) = u.sin_cos();
                (
                    Vec2::new(-a * s, b * c).rotate(*angle),
                    Vec2::new(-a * c, -b * s).rotate(*angle),
                )
            }
            CurveKind::Radial { profile, .. } => {
                let (r, r1, r2) = profile.eval(u);
                let er = Vec2::from_angle(u);
                let ep = er.perp();
                (er * r1 + ep * r, er * (r2 - r) + ep * (2.0 * r1))
            }
        }
    }

    /// `|dδ/du|`.
    pub fn speed(&self, u: f64) -> f64 {
        self.derivs(u).0.norm()
    }

    pub fn curvature_u(&self, u: f64) -> f64 {
        let (d1, d2) = self.derivs(u);
        d1.cross(d2) / d1.norm().powi(3)
    }

    pub fn frame_u(&self, u: f64) -> Frame {
        let (d1, d2) = self.derivs(u);
        let sp = d1.norm();
        let t = d1 / sp;
        Frame {
            point: self.pos(u),
            tangent: Dir2::new(t),
            normal: Dir2::new(Vec2::new(t.y, -t.x)),
            curvature: d1.cross(d2) / sp.powi(3),
        }
    }

    /// Native parameter of a point assumed to lie on (or near) the curve.
    pub fn u_of_point(&self, p: Point2) -> f64 {
        let q = p - self.center();
        match &self.kind {
            CurveKind::Circle { .. } | CurveKind::Radial { .. } => wrap_angle(q.angle()),
            CurveKind::Ellipse { a, b, angle, .. } => {
                let l = q.rotate(-angle);
                wrap_angle((l.y / b).atan2(l.x / a))
            }
        }
    }

    /// Negative strictly inside, zero on the curve, positive outside.
    pub fn implicit(&self, p: Point2) -> f64 {
        let q = p - self.center();
        match &self.kind {
            CurveKind::Circle { radius, .. } => q.norm() - radius,
            CurveKind::Ellipse { a, b, angle, .. } => {
                let l = q.rotate(-angle);
                (l.x / a).hypot(l.y / b) - 1.0
            }
            CurveKind::Radial { profile, .. } => q.norm() - profile.eval(q.angle()).0,
        }
    }

    fn length_to_u(&self, u: f64) -> f64 {
        match (&self.kind, &self.table) {
            (CurveKind::Circle { radius, .. }, _) => radius * wrap_angle(u),
            (_, Some(t)) => t.length_to(&|v| self.speed(v), u),
            _ => unreachable!(),
        }
    }

    fn u_at_length(&self, len: f64) -> f64 {
        match (&self.kind, &self.table) {
            (CurveKind::Circle { radius, .. }, _) => wrap_angle(len / radius),
            (_, Some(t)) => t.param_at(&|v| self.speed(v), len),
            _ => unreachable!(),
        }
    }

    /// Arc parameter `s ∈ [0, 1)` of native parameter `u`.
    pub fn s_of_u(&self, u: f64) -> f64 {
        wrap_param((self.length_to_u(u) - self.anchor_len) / self.perimeter)
    }

    pub fn u_of_s(&self, s: f64) -> f64 {
        self.u_at_length(self.anchor_len + wrap_param(s) * self.perimeter)
    }

    pub fn s_of_point(&self, p: Point2) -> f64 {
        self.s_of_u(self.u_of_point(p))
    }

    // ---- public queries ---------------------------------------------------------

    /// δ(s), with `s` taken mod 1.
    pub fn point_at(&self, s: f64) -> Point2 {
        self.pos(self.u_of_s(s))
    }

    /// Unit tangent (counter-clockwise), outward normal and curvature at δ(s).
    pub fn frame_at(&self, s: f64) -> Result<Frame> {
        let f = self.frame_u(self.u_of_s(s));
        if !(f.curvature > TOL_CURVATURE) {
            return Err(Error::NonConvex {
                s: wrap_param(s),
                curvature: f.curvature,
            });
        }
        Ok(f)
    }

    /// Strict interior test.
    pub fn contains(&self, p: Point2) -> bool {
        self.implicit(p) < -1e-12
    }

    /// First intersection of the ray `origin + t·dir`, `t > skip_eps`.
    pub fn intersect_ray(&self, origin: Point2, dir: Dir2, skip_eps: f64) -> Option<RayHit> {
        let t = match &self.kind {
            CurveKind::Circle { center, radius } => {
                let oc = origin - *center;
                let b = dir.dot(oc);
                let c = oc.norm_sq() - radius * radius;
                first_root(1.0, b, c, skip_eps, radius * radius)?
            }
            CurveKind::Ellipse { center, a, b, angle } => {
                let o = (origin - *center).rotate(-angle);
                let d = dir.vec().rotate(-angle);
                let o = Vec2::new(o.x / a, o.y / b);
                let d = Vec2::new(d.x / a, d.y / b);
                first_root(d.norm_sq(), o.dot(d), o.norm_sq() - 1.0, skip_eps, 1.0)?
            }
            CurveKind::Radial { samples, .. } => self.radial_ray_root(origin, dir, skip_eps, *samples)?,
        };
        let raw = origin + dir.vec() * t;
        let u = self.u_of_point(raw);
        let frame = self.frame_u(u);
        let grazing = dir.dot(frame.normal.vec()).abs() < TOL_TANGENCY.sin();
        Some(RayHit {
            s: self.s_of_u(u),
            u,
            point: frame.point,
            distance: t,
            grazing,
        })
    }

    fn radial_ray_root(&self, origin: Point2, dir: Dir2, skip_eps: f64, samples: usize) -> Option<f64> {
        let g = |t: f64| self.implicit(origin + dir.vec() * t);
        let span = (origin - self.center()).norm() + 1.5 * self.extent;
        let n = 4 * samples;
        let step = (span - skip_eps) / n as f64;
        let mut lo = skip_eps;
        let mut g_lo = g(lo);
        for k in 1..=n {
            let hi = skip_eps + step * k as f64;
            let g_hi = g(hi);
            if (g_lo < 0.0) != (g_hi < 0.0) {
                return Some(bisect(&g, lo, hi, g_lo));
            }
            lo = hi;
            g_lo = g_hi;
        }
        None
    }

    /// Parameters of the two tangency points seen from `external`, ordered so
    /// that the counter-clockwise arc from the first to the second is the
    /// region where `⟨x − external, n(x)⟩ > 0`.
    pub fn tangent_points_from(&self, external: Point2) -> Result<(f64, f64)> {
        if self.implicit(external) <= 1e-12 {
            return Err(Error::InsidePoint {
                x: external.x,
                y: external.y,
            });
        }
        let (u1, u2) = match &self.kind {
            CurveKind::Circle { center, radius } => {
                let q = external - *center;
                let half = (radius / q.norm()).acos();
                (q.angle() - half, q.angle() + half)
            }
            CurveKind::Ellipse { center, a, b, angle } => {
                let l = (external - *center).rotate(-angle);
                let (x, y) = (l.x / a, l.y / b);
                let r = x.hypot(y);
                let phi = y.atan2(x);
                let half = (1.0 / r).acos();
                (phi - half, phi + half)
            }
            CurveKind::Radial { samples, .. } => {
                let h = |u: f64| {
                    let (d1, _) = self.derivs(u);
                    d1.cross(self.pos(u) - external)
                };
                let n = 4 * samples;
                let mut roots = Vec::with_capacity(2);
                let mut lo = 0.0;
                let mut h_lo = h(lo);
                for k in 1..=n {
                    let hi = TAU * k as f64 / n as f64;
                    let h_hi = h(hi);
                    if (h_lo < 0.0) != (h_hi < 0.0) {
                        roots.push(bisect(&h, lo, hi, h_lo));
                    }
                    lo = hi;
                    h_lo = h_hi;
                }
                if roots.len() != 2 {
                    return Err(Error::InsidePoint {
                        x: external.x,
                        y: external.y,
                    });
                }
                (roots[0], roots[1])
            }
        };
        let (s1, s2) = (self.s_of_u(u1), self.s_of_u(u2));
        let mid = wrap_param(s1 + 0.5 * wrap_param(s2 - s1));
        let f = self.frame_u(self.u_of_s(mid));
        if (f.point - external).dot(f.normal.vec()) > 0.0 {
            Ok((s1, s2))
        } else {
            Ok((s2, s1))
        }
    }

    fn closest_u(&self, p: Point2) -> f64 {
        if let CurveKind::Circle { center, .. } = &self.kind {
            return wrap_angle((p - *center).angle());
        }
        let n = 1440;
        let d2 = |u: f64| (self.pos(u) - p).norm_sq();
        let (mut best, mut best_d) = (0.0, f64::INFINITY);
        for k in 0..n {
            let u = TAU * k as f64 / n as f64;
            let d = d2(u);
            if d < best_d {
                best = u;
                best_d = d;
            }
        }
        let h = TAU / n as f64;
        // Orthogonality residual has a simple root at the foot point.
        let g = |u: f64| (self.pos(u) - p).dot(self.derivs(u).0);
        let (g_lo, g_hi) = (g(best - h), g(best + h));
        if (g_lo < 0.0) != (g_hi < 0.0) {
            bisect(&g, best - h, best + h, g_lo)
        } else {
            golden_min(&d2, best - h, best + h, 1e-14)
        }
    }

    fn positive_x_crossing(&self) -> f64 {
        match &self.kind {
            CurveKind::Circle { .. } | CurveKind::Radial { .. } => 0.0,
            CurveKind::Ellipse { a, b, angle, .. } => {
                let d = Vec2::new(1.0, 0.0).rotate(-angle);
                wrap_angle((d.y / b).atan2(d.x / a))
            }
        }
    }

    /// Polyline through `n` points equally spaced in `s`.
    pub fn polyline(&self, n: usize) -> Vec<Point2> {
        (0..n).map(|k| self.point_at(k as f64 / n as f64)).collect()
    }

    /// Length of the diameter (largest chord), sampled.
    pub fn diameter(&self) -> f64 {
        let pts = self.polyline(256);
        let mut d: f64 = 0.0;
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                d = d.max(p.distance(*q));
            }
        }
        d
    }
}

/// Smallest root `t > skip` of `a t² + 2 b t + c = 0`; tangent double roots
/// within rounding are kept.
fn first_root(a: f64, b: f64, c: f64, skip: f64, scale: f64) -> Option<f64> {
    let mut disc = b * b - a * c;
    if disc < 0.0 {
        if disc > -1e-14 * scale * a {
            disc = 0.0;
        } else {
            return None;
        }
    }
    let sq = disc.sqrt();
    let q = -(b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 {
        (-b / a, -b / a)
    } else {
        let x1 = q / a;
        let x2 = c / q;
        (x1.min(x2), x1.max(x2))
    };
    if r1 > skip {
        Some(r1)
    } else if r2 > skip {
        Some(r2)
    } else {
        None
    }
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimiser on `[lo, hi]`.
pub(crate) fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Angle parameter helpers for ellipses given in degrees.
pub fn deg(x: f64) -> f64 {
    x * PI / 180.0
}
