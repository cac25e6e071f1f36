//! The iterative construction of the observed outer arc `Γ₁` and inner arc `Γ₂`.
//!
//! Arc conventions: `Γ(x₀) = (s₁, s₂)` counter-clockwise, so endpoint 1 is
//! `lo` and endpoint 2 is `hi`. The signed tangent `(−1)^{i+1} δ'(s_i)`
//! points from endpoint `i` into the arc.

use super::arc::{gamma_x0, BoundaryArc};
use crate::error::{Error, Result};
use crate::geometry::{wrap_param, BoundaryCurve, Dir2, Point2, Vec2, TOL_TANGENCY};
use crate::optics::{Boundary, Medium};
use crate::scenario::Scenario;
use crate::tracer::next_hit;

const SCAN: usize = 512;
const ROOT_TOL: f64 = 1e-14;
/// Parameter tolerance for the witness round trip.
pub const TOL_WITNESS: f64 = 1e-6;
/// `1 − cos` of the incidence angle below which a normal ray counts as normal to `∂Ω₂`.
pub const TOL_NORMAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Neither Step-3 line meets the inner boundary again.
    NoLineIntersection,
    /// An endpoint's inward normal meets the inclusion at normal incidence.
    NormalParallel,
    /// `Γ₂ⁿ = Γ₂ⁿ⁻¹` because the normal-ray filter stops further growth.
    Converged,
}

impl Termination {
    pub fn label(self) -> &'static str {
        match self {
            Termination::NoLineIntersection => "no_line_intersection",
            Termination::NormalParallel => "normal_parallel",
            Termination::Converged => "converged",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Iterate {
    pub n: usize,
    pub gamma1: BoundaryArc,
    pub gamma2: BoundaryArc,
    /// Whether each Step-3 line met the inner boundary again (false at n = 0).
    pub line_hit: [bool; 2],
}

#[derive(Debug, Clone)]
pub struct ConstructionState {
    pub n: usize,
    pub gamma_x0: BoundaryArc,
    pub gamma1: BoundaryArc,
    pub gamma2: BoundaryArc,
    pub history: Vec<Iterate>,
    pub reason: Termination,
    /// Step 1 found no root of `L` on a side where `L > 0`.
    pub degenerate: [bool; 2],
}

fn sign_of(i: usize) -> f64 {
    if i == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `L(δ(s))` for the signed tangent `sign · δ'(s)`, and the inner parameter
/// where the maximum is attained. The maximum over the direction cone of a
/// convex set seen from outside, against a direction outside the cone, sits
/// on one of the two tangent rays.
pub fn localisation_l(sc: &Scenario, s: f64, sign: f64) -> Result<(f64, f64)> {
    let inner = sc.inner()?;
    let f = sc.outer.frame_at(s)?;
    let v = f.tangent.vec() * sign;
    let (a, b) = inner.tangent_points_from(f.point)?;
    let cos = |u: f64| {
        let d = inner.point_at(u) - f.point;
        d.dot(v) / d.norm()
    };
    let (ca, cb) = (cos(a), cos(b));
    Ok(if ca >= cb { (ca, a) } else { (cb, b) })
}

fn bisect_pred(mut good: f64, mut bad: f64, pred: &dyn Fn(f64) -> bool) -> f64 {
    // `good`/`bad` are positions along a sweep; returns the last good position.
    while (bad - good).abs() > ROOT_TOL {
        let mid = 0.5 * (good + bad);
        if pred(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

fn bisect_root(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    while (b - a).abs() > ROOT_TOL {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Parameter reached by moving `d ≥ 0` away from endpoint `i` of `arc`.
fn outward(arc: &BoundaryArc, i: usize, d: f64) -> f64 {
    if i == 0 {
        wrap_param(arc.lo - d)
    } else {
        wrap_param(arc.hi + d)
    }
}

fn with_endpoint(arc: &BoundaryArc, i: usize, s: f64) -> BoundaryArc {
    if i == 0 {
        BoundaryArc::new(arc.boundary, s, arc.hi)
    } else {
        BoundaryArc::new(arc.boundary, arc.lo, s)
    }
}

fn endpoint(arc: &BoundaryArc, i: usize) -> f64 {
    if i == 0 {
        arc.lo
    } else {
        arc.hi
    }
}

/// Step 1: extends `Γ(x₀)` past each endpoint where `Ω₂` is not confined to
/// the `Γ(x₀)` side of the normal line, up to the first parameter where the
/// inward normal line touches `∂Ω₂`.
pub fn step1_gamma1_0(sc: &Scenario, x0: Point2) -> Result<(BoundaryArc, [bool; 2])> {
    let g = gamma_x0(&sc.outer, Boundary::Outer, x0)?;
    let mut arc = g;
    let mut degenerate = [false; 2];
    let reach = 0.5 * (1.0 - g.length());
    for i in 0..2 {
        let sign = sign_of(i);
        if localisation_l(sc, endpoint(&g, i), -sign)?.0 <= 0.0 {
            continue;
        }
        let l_at = |d: f64| localisation_l(sc, outward(&g, i, d), sign).map(|r| r.0);
        let l0 = l_at(0.0)?;
        if l0 == 0.0 {
            continue;
        }
        let mut prev = 0.0;
        let mut found = None;
        for k in 1..=SCAN {
            let d = reach * k as f64 / SCAN as f64;
            let l = l_at(d)?;
            if l == 0.0 || (l < 0.0) != (l0 < 0.0) {
                found = Some(bisect_root(&|d| l_at(d).unwrap_or(f64::NAN), prev, d));
                break;
            }
            prev = d;
        }
        match found {
            Some(d) => arc = with_endpoint(&arc, i, outward(&g, i, d)),
            None => degenerate[i] = true,
        }
    }
    Ok((arc, degenerate))
}

/// Step 2: `Γ₂⁰` runs counter-clockwise between the argmax points of `L` at
/// the two endpoints of `Γ₁⁰`.
pub fn step2_gamma2_0(sc: &Scenario, gamma1: &BoundaryArc) -> Result<BoundaryArc> {
    let (_, q1) = localisation_l(sc, gamma1.lo, 1.0)?;
    let (_, q2) = localisation_l(sc, gamma1.hi, -1.0)?;
    let arc = BoundaryArc::new(Boundary::Inner, q1, q2);
    if arc.is_empty() || arc.length() < 1e-12 {
        return Err(Error::EmptyGamma2 { s1: q1, s2: q2 });
    }
    Ok(arc)
}

/// Second intersection of the line through `p` and the curve point at `sq`,
/// or `None` when the line is tangent there.
fn other_intersection(curve: &BoundaryCurve, p: Point2, sq: f64) -> Result<Option<f64>> {
    let f = curve.frame_at(sq)?;
    let Some(d) = Dir2::try_new(f.point - p) else { return Ok(None) };
    if d.dot(f.normal.vec()).abs() < TOL_TANGENCY {
        return Ok(None);
    }
    let d = if d.dot(f.normal.vec()) > 0.0 { -d } else { d };
    Ok(curve.intersect_ray(f.point, d, 1e-9).filter(|h| !h.grazing).map(|h| h.s))
}

/// Where the outward normal ray from the inner point `s` lands on `∂Ω`.
fn normal_landing(sc: &Scenario, s: f64) -> Result<Option<f64>> {
    let f = sc.inner()?.frame_at(s)?;
    match next_hit(sc, f.point, f.normal, Medium::Outer) {
        Ok(h) if h.boundary == Boundary::Outer => Ok(Some(h.s)),
        Ok(_) => Ok(None),
        Err(Error::StuckRay { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Step 3: extends `Γ₂` along the lines from each outer endpoint through the
/// opposite inner endpoint, keeping the connected part whose outward normal
/// rays land in `Γ₁ⁿ⁻¹`. Returns the arc and which lines met `∂Ω₂` again.
pub fn extend_gamma2(sc: &Scenario, g1: &BoundaryArc, g2: &BoundaryArc) -> Result<(BoundaryArc, [bool; 2])> {
    let inner = sc.inner()?;
    let mut out = *g2;
    let mut hit = [false; 2];
    for i in 0..2 {
        let j = 1 - i;
        let p = sc.outer.point_at(endpoint(g1, i));
        let Some(check) = other_intersection(inner, p, endpoint(g2, j))? else { continue };
        hit[i] = true;
        if g2.contains(check) {
            continue;
        }
        // Candidate extension length, measured outward from endpoint i of Γ₂.
        let span = if i == 0 {
            wrap_param(g2.lo - check)
        } else {
            wrap_param(check - g2.hi)
        };
        if span >= 1.0 - g2.length() {
            continue;
        }
        let lands = |d: f64| -> bool {
            matches!(normal_landing(sc, outward(g2, i, d)), Ok(Some(s)) if g1.contains(s))
        };
        let mut good = 0.0;
        let mut reach = span;
        for k in 1..=SCAN {
            let d = span * k as f64 / SCAN as f64;
            if !lands(d) {
                reach = bisect_pred(good, d, &lands);
                break;
            }
            good = d;
        }
        if reach > 0.0 {
            out = with_endpoint(&out, i, outward(g2, i, reach));
        }
    }
    Ok((out, hit))
}

/// Step 4: pushes each outer endpoint back until the inward normal ray first
/// hits the corresponding endpoint of `Γ₂ⁿ`.
pub fn extend_gamma1(sc: &Scenario, g1: &BoundaryArc, g2: &BoundaryArc) -> Result<BoundaryArc> {
    let inner = sc.inner()?;
    let mut out = *g1;
    let reach = 0.5 * (1.0 - g1.length());
    for i in 0..2 {
        let q = inner.point_at(endpoint(g2, i));
        let h = |d: f64| -> f64 {
            let f = sc.outer.frame_at(outward(g1, i, d)).expect("outer frame");
            (-f.normal.vec()).cross(q - f.point)
        };
        let first_hit_is_q = |d: f64| -> bool {
            let f = sc.outer.frame_at(outward(g1, i, d)).expect("outer frame");
            match next_hit(sc, f.point, -f.normal, Medium::Outer) {
                Ok(hit) => hit.boundary == Boundary::Inner && (hit.point - q).norm() < 1e-7,
                Err(_) => false,
            }
        };
        let h0 = h(0.0);
        if h0.abs() < 1e-12 && first_hit_is_q(0.0) {
            continue;
        }
        let mut prev = 0.0;
        let mut h_prev = h0;
        for k in 1..=SCAN {
            let d = reach * k as f64 / SCAN as f64;
            let hd = h(d);
            if (hd < 0.0) != (h_prev < 0.0) {
                let root = bisect_root(&h, prev, d);
                if first_hit_is_q(root) {
                    out = with_endpoint(&out, i, outward(g1, i, root));
                    break;
                }
            }
            prev = d;
            h_prev = hd;
        }
    }
    Ok(out)
}

/// Whether the inward normal at the outer endpoint `i` meets `∂Ω₂` at normal incidence.
pub fn normal_parallel(sc: &Scenario, g1: &BoundaryArc, i: usize, tol: f64) -> Result<bool> {
    let f = sc.outer.frame_at(endpoint(g1, i))?;
    match next_hit(sc, f.point, -f.normal, Medium::Outer) {
        Ok(h) if h.boundary == Boundary::Inner => Ok(h.normal.dot(f.normal.vec()) > 1.0 - tol),
        _ => Ok(false),
    }
}

fn param_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Sine of the angle between the inward normal ray at outer `s` and the
/// normal of `∂Ω₂` where that ray first lands, with the inner parameter.
fn incidence_sine(sc: &Scenario, s: f64) -> Option<(f64, f64)> {
    let f = sc.outer.frame_at(s).ok()?;
    let h = next_hit(sc, f.point, -f.normal, Medium::Outer).ok()?;
    (h.boundary == Boundary::Inner).then(|| (f.normal.vec().cross(h.normal.vec()), h.s))
}

/// When side `i` has contracted geometrically for three iterations, the
/// nested arcs accumulate at the outer point whose inward normal meets `∂Ω₂`
/// at normal incidence. Locates that point past the current endpoint,
/// within a window sized from the observed contraction ratio.
fn accumulation_limit(sc: &Scenario, g1: &BoundaryArc, i: usize, moves: &[f64]) -> Result<Option<(f64, f64)>> {
    let [.., a, b, c] = moves else { return Ok(None) };
    if !(*a > 0.0 && *b > 0.0 && *c > 0.0) {
        return Ok(None);
    }
    let rho = (c / b).max(b / a);
    if !(rho < 0.999) {
        return Ok(None);
    }
    let window = (8.0 * c * rho / (1.0 - rho)).min(0.5 * (1.0 - g1.length()));
    let f = |d: f64| incidence_sine(sc, outward(g1, i, d)).map(|r| r.0);
    let Some(f0) = f(0.0) else { return Ok(None) };
    let mut prev = 0.0;
    for k in 1..=SCAN {
        let d = window * k as f64 / SCAN as f64;
        let Some(fd) = f(d) else { return Ok(None) };
        if fd == 0.0 || (fd < 0.0) != (f0 < 0.0) {
            let root = bisect_root(&|d| f(d).unwrap_or(f64::NAN), prev, d);
            let so = outward(g1, i, root);
            return Ok(incidence_sine(sc, so).map(|(_, si)| (so, si)));
        }
        prev = d;
    }
    Ok(None)
}

/// Runs Steps 1–5 from `x₀` until `Γ₂ⁿ = Γ₂ⁿ⁻¹` within `tol.arc`.
pub fn construct(sc: &Scenario, x0: Point2, max_iter: usize) -> Result<ConstructionState> {
    sc.inner()?;
    let g = gamma_x0(&sc.outer, Boundary::Outer, x0)?;
    let (mut g1, degenerate) = step1_gamma1_0(sc, x0)?;
    let mut g2 = step2_gamma2_0(sc, &g1)?;
    let mut history = vec![Iterate {
        n: 0,
        gamma1: g1,
        gamma2: g2,
        line_hit: [false; 2],
    }];
    let tol = sc.tol.arc;
    let mut moves: [Vec<f64>; 2] = [vec![], vec![]];
    for n in 1..=max_iter {
        let (mut g2_new, line_hit) = extend_gamma2(sc, &g1, &g2)?;
        let mut g1_new = extend_gamma1(sc, &g1, &g2_new)?;
        for i in 0..2 {
            moves[i].push(param_gap(endpoint(&g1, i), endpoint(&g1_new, i)));
            if let Some((so, si)) = accumulation_limit(sc, &g1_new, i, &moves[i])? {
                g1_new = with_endpoint(&g1_new, i, so);
                g2_new = with_endpoint(&g2_new, i, si);
            }
        }
        history.push(Iterate {
            n,
            gamma1: g1_new,
            gamma2: g2_new,
            line_hit,
        });
        // A side is settled once its endpoint stops moving or its outer
        // endpoint's inward normal meets ∂Ω₂ at normal incidence, which is
        // the limit an accumulating side approaches.
        let mut settled = true;
        let mut stalled_at_normal = false;
        for i in 0..2 {
            let moved = param_gap(endpoint(&g2, i), endpoint(&g2_new, i));
            if moved <= tol {
                continue;
            }
            if normal_parallel(sc, &g1_new, i, TOL_NORMAL)? {
                stalled_at_normal = true;
            } else {
                settled = false;
            }
        }
        g1 = g1_new;
        g2 = g2_new;
        if settled {
            let reason = if stalled_at_normal {
                Termination::NormalParallel
            } else if !line_hit[0] && !line_hit[1] {
                Termination::NoLineIntersection
            } else if normal_parallel(sc, &g1, 0, TOL_NORMAL)? || normal_parallel(sc, &g1, 1, TOL_NORMAL)? {
                Termination::NormalParallel
            } else {
                Termination::Converged
            };
            return Ok(ConstructionState {
                n,
                gamma_x0: g,
                gamma1: g1,
                gamma2: g2,
                history,
                reason,
                degenerate,
            });
        }
    }
    Err(Error::IterationBudget(max_iter))
}

fn line_intersection(p: Point2, u: Vec2, q: Point2, v: Vec2) -> Option<Point2> {
    let den = u.cross(v);
    if den.abs() < 1e-14 {
        return None;
    }
    let a = (q - p).cross(v) / den;
    Some(p + u * a)
}

/// A point `x₀²` outside `Ω̄₂` with `Γ(x₀²) = Γ₂` on the inner boundary:
/// the intersection of the tangent lines at the endpoints of `Γ₂`, or, when
/// they are parallel, of one tangent line with the line joining the other
/// endpoint to the opposite outer endpoint.
pub fn witness_x02(sc: &Scenario, g1: &BoundaryArc, g2: &BoundaryArc) -> Result<Point2> {
    let inner = sc.inner()?;
    let f1 = inner.frame_at(g2.lo)?;
    let f2 = inner.frame_at(g2.hi)?;
    let mut candidates = vec![];
    if let Some(x) = line_intersection(f1.point, f1.tangent.vec(), f2.point, f2.tangent.vec()) {
        candidates.push(x);
    }
    let p1 = sc.outer.point_at(g1.lo);
    let p2 = sc.outer.point_at(g1.hi);
    if let Some(x) = line_intersection(f1.point, f1.tangent.vec(), f2.point, p1 - f2.point) {
        candidates.push(x);
    }
    if let Some(x) = line_intersection(f2.point, f2.tangent.vec(), f1.point, p2 - f1.point) {
        candidates.push(x);
    }
    let mut best: Option<(f64, Point2)> = None;
    for x in candidates {
        if inner.implicit(x) <= 1e-12 {
            continue;
        }
        let Ok(arc) = gamma_x0(inner, Boundary::Inner, x) else { continue };
        let d = arc.hausdorff(g2);
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, x));
        }
    }
    match best {
        Some((d, x)) if d < TOL_WITNESS => Ok(x),
        Some((d, _)) => Err(Error::WitnessMismatch { hausdorff: d }),
        None => Err(Error::WitnessMismatch { hausdorff: f64::INFINITY }),
    }
}

/// The part of `Ω₁` left after the construction, bounded by `∂Ω ∖ Γ₁`,
/// `∂Ω₂ ∖ Γ₂` and the two bridging segments `l(δ(s_i¹), δ₂(s_i²))`.
#[derive(Debug, Clone)]
pub struct ResidualRegion {
    pub outer_arc: BoundaryArc,
    pub inner_arc: BoundaryArc,
    pub bridges: [(Point2, Point2); 2],
}

impl ResidualRegion {
    pub fn new(sc: &Scenario, g1: &BoundaryArc, g2: &BoundaryArc) -> Result<Self> {
        let inner = sc.inner()?;
        Ok(ResidualRegion {
            outer_arc: g1.complement(),
            inner_arc: g2.complement(),
            bridges: [
                (sc.outer.point_at(g1.lo), inner.point_at(g2.lo)),
                (sc.outer.point_at(g1.hi), inner.point_at(g2.hi)),
            ],
        })
    }

    /// Closed boundary polyline: outer arc from `δ(s₂¹)` to `δ(s₁¹)`, bridge to
    /// `δ₂(s₁²)`, inner arc backwards to `δ₂(s₂²)`, bridge back.
    pub fn polygon(&self, sc: &Scenario, n: usize) -> Result<Vec<Point2>> {
        let inner = sc.inner()?;
        let mut pts = vec![];
        let (oa, ia) = (&self.outer_arc, &self.inner_arc);
        for k in 0..=n {
            pts.push(sc.outer.point_at(oa.at(k as f64 / n as f64)));
        }
        for k in 0..=n {
            pts.push(inner.point_at(ia.at(1.0 - k as f64 / n as f64)));
        }
        Ok(pts)
    }
}
