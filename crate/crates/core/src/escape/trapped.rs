use crate::error::Result;
use crate::geometry::{wrap_param, Dir2, Point2};
use crate::optics::{classify_hit, incidence_angle, reflect, Boundary, EventKind, Medium};
use crate::regions::BoundaryArc;
use crate::scenario::Scenario;
use crate::tracer::{curve, next_hit, step, PhasePoint};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Total-internal-reflection bounces allowed on `∂Ω₂` between two outer hits.
const MAX_INNER: usize = 64;
const MAX_PERIOD: usize = 4;
const SCREEN: f64 = 0.5;
const TRUST: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    /// Normal incidence on `∂Ω` sends the ray back along itself, with TIR on `∂Ω₂`.
    TirRetroreflection,
    Other,
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitEvent {
    pub boundary: Boundary,
    pub s: f64,
    pub point: Point2,
    /// Outgoing direction.
    pub dir: Dir2,
    /// Incidence angle.
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct TrappedOrbit {
    pub events: Vec<OrbitEvent>,
    pub period_length: f64,
    pub period_time: f64,
    pub mechanism: Mechanism,
    /// Closure error of the first-return map after one period.
    pub residual: f64,
    /// Outer bounces per period.
    pub outer_period: usize,
}

/// The image of one outer bounce under the `Ω₁` dynamics in which `∂Ω₂`
/// only reflects totally.
#[derive(Debug, Clone)]
pub struct Return {
    pub s: f64,
    /// Angle of the outgoing direction from the inward normal, positive towards the counter-clockwise tangent.
    pub angle: f64,
    pub length: f64,
    /// Events after the start, ending with the outer hit.
    pub events: Vec<OrbitEvent>,
}

fn launch(sc: &Scenario, s: f64, angle: f64) -> Result<PhasePoint> {
    let f = sc.outer.frame_at(s)?;
    let dir = Dir2::new(-f.normal.vec() * angle.cos() + f.tangent.vec() * angle.sin());
    Ok(PhasePoint {
        boundary: Some(Boundary::Outer),
        s,
        position: f.point,
        dir,
        medium: Medium::Outer,
        time: 0.0,
    })
}

/// Follows the ray leaving `δ(s)` at `angle` to its next outer bounce.
/// `None` when it grazes or meets `∂Ω₂` below the critical angle, so that
/// part of it leaks into the inclusion.
pub fn outer_return(sc: &Scenario, s: f64, angle: f64) -> Option<Return> {
    let mut p = launch(sc, s, angle).ok()?;
    let mut events = vec![];
    let mut length = 0.0;
    for _ in 0..=MAX_INNER {
        let ev = step(sc, &p).ok()?;
        length += (ev.point - p.position).norm();
        let out = ev.outgoing[0];
        match ev.kind {
            EventKind::OuterReflection => {
                let f = sc.outer.frame_at(ev.s).ok()?;
                let a = out.dir.dot(f.tangent.vec()).atan2(-out.dir.dot(f.normal.vec()));
                events.push(OrbitEvent {
                    boundary: Boundary::Outer,
                    s: ev.s,
                    point: ev.point,
                    dir: out.dir,
                    theta: ev.theta1,
                });
                return Some(Return {
                    s: ev.s,
                    angle: a,
                    length,
                    events,
                });
            }
            EventKind::TotalInternalReflection => {
                events.push(OrbitEvent {
                    boundary: Boundary::Inner,
                    s: ev.s,
                    point: ev.point,
                    dir: out.dir,
                    theta: ev.theta1,
                });
                p = out;
            }
            _ => return None,
        }
    }
    None
}

fn wrap_diff(a: f64, b: f64) -> f64 {
    let d = wrap_param(a - b);
    if d > 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// A closed polygon of boundary points, one per bounce.
#[derive(Debug, Clone)]
struct Cycle {
    bounds: Vec<Boundary>,
    s: Vec<f64>,
}

impl Cycle {
    fn points(&self, sc: &Scenario) -> Option<Vec<(Point2, Dir2, Dir2)>> {
        self.bounds
            .iter()
            .zip(&self.s)
            .map(|(&b, &s)| {
                let f = curve(sc, b).ok()?.frame_at(s).ok()?;
                Some((f.point, f.tangent, f.normal))
            })
            .collect()
    }

    /// Derivative of the perimeter length in each bounce parameter, per unit
    /// arc length: the tangential mismatch between arriving and leaving
    /// directions. It vanishes exactly at specular reflections.
    fn gradient(&self, sc: &Scenario) -> Option<Vec<f64>> {
        let pts = self.points(sc)?;
        let m = pts.len();
        (0..m)
            .map(|i| {
                let (p, t, _) = pts[i];
                let u_in = Dir2::try_new(p - pts[(i + m - 1) % m].0)?;
                let u_out = Dir2::try_new(pts[(i + 1) % m].0 - p)?;
                Some((u_in.vec() - u_out.vec()).dot(t.vec()))
            })
            .collect()
    }

    /// Newton on the stationarity of the length, with a central-difference
    /// Hessian and a capped step.
    fn refine(&mut self, sc: &Scenario) -> Option<()> {
        let m = self.s.len();
        let h = 1e-6;
        let mut best = f64::INFINITY;
        let mut stalled = 0;
        for _ in 0..60 {
            let g = self.gradient(sc)?;
            let gn = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if gn < 1e-15 {
                return Some(());
            }
            if gn < 0.5 * best {
                best = gn;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled > 8 {
                    return (best < 1e-12).then_some(());
                }
            }
            let mut hess = DMatrix::<f64>::zeros(m, m);
            for j in 0..m {
                let mut plus = self.clone();
                plus.s[j] = wrap_param(plus.s[j] + h);
                let mut minus = self.clone();
                minus.s[j] = wrap_param(minus.s[j] - h);
                let (gp, gm) = (plus.gradient(sc)?, minus.gradient(sc)?);
                for i in 0..m {
                    hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
                }
            }
            let dx = hess.lu().solve(&DVector::from_vec(g))?;
            let scale = (TRUST / dx.amax()).min(1.0);
            for i in 0..m {
                self.s[i] = wrap_param(self.s[i] - scale * dx[i]);
            }
            if scale * dx.amax() < 1e-16 {
                return Some(());
            }
        }
        Some(())
    }

    /// Checks the polygon against the dynamics: every leg is the first hit
    /// from its start, inner bounces are total reflections and outer ones do
    /// not graze. Returns the orbit with the largest leg defect as residual.
    fn certify(&self, sc: &Scenario) -> Option<TrappedOrbit> {
        let pts = self.points(sc)?;
        let m = pts.len();
        let mut events = Vec::with_capacity(m);
        let mut length = 0.0;
        let mut residual = 0.0f64;
        for i in 0..m {
            let (p, _, n) = pts[i];
            let prev = pts[(i + m - 1) % m].0;
            let next = pts[(i + 1) % m].0;
            let u_in = Dir2::try_new(p - prev)?;
            let u_out = Dir2::try_new(next - p)?;
            let hit = next_hit(sc, p, u_out, Medium::Outer).ok()?;
            if hit.boundary != self.bounds[(i + 1) % m] {
                return None;
            }
            residual = residual.max((hit.point - next).norm());
            residual = residual.max((reflect(u_in, n).vec() - u_out.vec()).norm());
            let theta = incidence_angle(u_in, n);
            let kind = classify_hit(self.bounds[i], Medium::Outer, theta, false, sc.c1, sc.c2, sc.tol.angle).ok()?;
            let expected = match self.bounds[i] {
                Boundary::Outer => EventKind::OuterReflection,
                Boundary::Inner => EventKind::TotalInternalReflection,
            };
            if kind != expected || theta > std::f64::consts::FRAC_PI_2 - 1e-6 {
                return None;
            }
            length += (next - p).norm();
            events.push(OrbitEvent {
                boundary: self.bounds[i],
                s: self.s[i],
                point: p,
                dir: u_out,
                theta,
            });
        }
        if residual >= sc.tol.orbit.max(1e-12) {
            return None;
        }
        // Start the period at an outer bounce.
        let first = events.iter().position(|e| e.boundary == Boundary::Outer)?;
        events.rotate_left(first);
        let outer_period = events.iter().filter(|e| e.boundary == Boundary::Outer).count();
        let retro = events.iter().any(|e| e.boundary == Boundary::Outer && e.theta < 1e-8);
        let tir = events.iter().any(|e| e.boundary == Boundary::Inner);
        Some(TrappedOrbit {
            events,
            period_length: length,
            period_time: length / sc.c1,
            mechanism: if retro && tir {
                Mechanism::TirRetroreflection
            } else {
                Mechanism::Other
            },
            residual,
            outer_period,
        })
    }
}

/// The same cycle traversed once, removing repetitions of a shorter period.
fn primitive(c: Cycle) -> Cycle {
    let m = c.s.len();
    for p in 1..m {
        if m % p == 0
            && (0..m).all(|i| c.bounds[i] == c.bounds[(i + p) % m] && wrap_diff(c.s[i], c.s[(i + p) % m]).abs() < 1e-9)
        {
            return Cycle {
                bounds: c.bounds[..p].to_vec(),
                s: c.s[..p].to_vec(),
            };
        }
    }
    c
}

fn avoids(orbit: &TrappedOrbit, gamma1: &BoundaryArc, gamma2: Option<&BoundaryArc>) -> bool {
    orbit.events.iter().all(|e| match e.boundary {
        Boundary::Outer => !gamma1.contains(e.s),
        Boundary::Inner => !gamma2.is_some_and(|g| g.contains(e.s)),
    })
}

/// Orbits with one or more outer bounces per period, of period time at most
/// `horizon`, that never meet `Γ₁` (nor `Γ₂` when given) and only reflect
/// totally on `∂Ω₂`. Seeds on an `n_s × n_theta` grid of outer launch states,
/// refined by Newton on the closure map.
pub fn find_trapped_rays(
    sc: &Scenario,
    gamma1: &BoundaryArc,
    gamma2: Option<&BoundaryArc>,
    horizon: f64,
    n_s: usize,
    n_theta: usize,
) -> Result<Vec<TrappedOrbit>> {
    let n_s = n_s.max(1);
    let n_theta = n_theta.max(1);
    let half = std::f64::consts::FRAC_PI_2;
    let seeds: Vec<[f64; 2]> = (0..n_s)
        .flat_map(|i| {
            (0..n_theta).map(move |j| {
                [
                    (i as f64 + 0.5) / n_s as f64,
                    -half + (j as f64 + 0.5) * std::f64::consts::PI / n_theta as f64,
                ]
            })
        })
        .collect();
    // Closure residual of every seed after k = 1..MAX_PERIOD outer returns.
    let traces: Vec<Vec<(f64, Vec<OrbitEvent>)>> = seeds
        .par_iter()
        .map(|&x| {
            let (mut s, mut a) = (x[0], x[1]);
            let mut events = vec![];
            let mut out = vec![];
            for _ in 0..MAX_PERIOD {
                let Some(r) = outer_return(sc, s, a) else { break };
                s = r.s;
                a = r.angle;
                events.extend(r.events);
                out.push((wrap_diff(s, x[0]).hypot(a - x[1]), events.clone()));
            }
            out
        })
        .collect();
    let residual = |i: usize, j: usize, k: usize| traces[i * n_theta + j].get(k).map_or(f64::INFINITY, |t| t.0);
    // Refine only grid-local minima of the residual: near an unstable cycle
    // the residual is small only in a thin strip, which the minima track.
    let mut candidates = vec![];
    for i in 0..n_s {
        for j in 0..n_theta {
            for k in 0..MAX_PERIOD {
                let r = residual(i, j, k);
                if !(r < SCREEN) {
                    continue;
                }
                let mut is_min = true;
                for di in [n_s - 1, 0, 1] {
                    for dj in [-1i64, 0, 1] {
                        let jj = j as i64 + dj;
                        if (di == 0 && dj == 0) || jj < 0 || jj >= n_theta as i64 {
                            continue;
                        }
                        if residual((i + di) % n_s, jj as usize, k) < r {
                            is_min = false;
                        }
                    }
                }
                if is_min {
                    candidates.push((i * n_theta + j, k));
                }
            }
        }
    }
    let found: Vec<(usize, TrappedOrbit)> = candidates
        .par_iter()
        .filter_map(|&(idx, k)| {
            let events = &traces[idx][k].1;
            let mut cycle = Cycle {
                bounds: events.iter().map(|e| e.boundary).collect(),
                s: events.iter().map(|e| e.s).collect(),
            };
            cycle.refine(sc)?;
            let orbit = primitive(cycle).certify(sc)?;
            (orbit.period_time <= horizon && avoids(&orbit, gamma1, gamma2)).then_some((idx, orbit))
        })
        .collect();

    // Distinct cycles, ordered by the first seed that found them; a cycle is
    // kept at its shortest outer period.
    let mut out: Vec<TrappedOrbit> = vec![];
    for (_, orbit) in found {
        let same = |o: &TrappedOrbit| {
            let pts = |o: &TrappedOrbit| {
                o.events
                    .iter()
                    .filter(|e| e.boundary == Boundary::Outer)
                    .map(|e| e.point)
                    .collect::<Vec<_>>()
            };
            let (a, b) = (pts(o), pts(&orbit));
            a.iter().all(|p| b.iter().any(|q| (*p - *q).norm() < 1e-6))
                && b.iter().all(|p| a.iter().any(|q| (*p - *q).norm() < 1e-6))
        };
        match out.iter_mut().find(|o| same(o)) {
            Some(o) if orbit.outer_period < o.outer_period => *o = orbit,
            Some(_) => {}
            None => out.push(orbit),
        }
    }
    Ok(out)
}

impl TrappedOrbit {
    /// Incidence angle, from the `Ω₁` side, of every inner bounce.
    pub fn inner_angles(&self) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.boundary == Boundary::Inner)
            .map(|e| e.theta)
            .collect()
    }

    /// Launch state `(s, angle)` at the last outer event, which starts the period.
    pub fn launch(&self, sc: &Scenario) -> Option<(f64, f64)> {
        let e = self.events.iter().rev().find(|e| e.boundary == Boundary::Outer)?;
        let f = sc.outer.frame_at(e.s).ok()?;
        Some((e.s, e.dir.dot(f.tangent.vec()).atan2(-e.dir.dot(f.normal.vec()))))
    }
}
