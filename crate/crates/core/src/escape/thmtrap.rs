use crate::error::Result;
use crate::geometry::Dir2;
use crate::optics::{refract, Boundary, EventKind, Medium};
use crate::regions::BoundaryArc;
use crate::scenario::Scenario;
use crate::tracer::{next_hit, step, PhasePoint};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Refraction of the arriving ray.
    Plus,
    /// The `Ω₂` ray that refracts into the reflected branch.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationKind {
    /// Total internal reflection: no transmitted ray exists.
    NoTransmission,
    /// The transmitted branch's other end on `∂Ω₂` lies outside `Γ₂`.
    LandsOutside { branch: Branch, s: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct ThmtrapViolation {
    /// Outer launch parameter and angle from the inward normal.
    pub s: f64,
    pub angle: f64,
    /// Inner hit parameter.
    pub inner_s: f64,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone)]
pub struct ThmtrapReport {
    pub holds: bool,
    /// Number of sampled rays meeting the premise.
    pub checked: usize,
    pub counterexamples: Vec<ThmtrapViolation>,
}

fn check_one(sc: &Scenario, g1: &BoundaryArc, g2: &BoundaryArc, s: f64, angle: f64) -> Result<Option<Option<ThmtrapViolation>>> {
    let f = sc.outer.frame_at(s)?;
    let dir = Dir2::new(-f.normal.vec() * angle.cos() + f.tangent.vec() * angle.sin());
    let p = PhasePoint {
        boundary: Some(Boundary::Outer),
        s,
        position: f.point,
        dir,
        medium: Medium::Outer,
        time: 0.0,
    };
    let Ok(ev) = step(sc, &p) else { return Ok(None) };
    if ev.boundary != Boundary::Inner || g2.contains(ev.s) {
        return Ok(None);
    }
    if matches!(ev.kind, EventKind::Diffractive) {
        return Ok(None);
    }
    let reflected = ev.outgoing[0].dir;
    match next_hit(sc, ev.point, reflected, Medium::Outer) {
        Ok(h) if h.boundary == Boundary::Outer && !g1.contains(h.s) => {}
        _ => return Ok(None),
    }
    let violation = |kind| ThmtrapViolation {
        s,
        angle,
        inner_s: ev.s,
        kind,
    };
    if ev.kind != EventKind::ReflectTransmit {
        return Ok(Some(Some(violation(ViolationKind::NoTransmission))));
    }
    let normal = sc.inner()?.frame_at(ev.s)?.normal;
    let plus = ev.outgoing[1].dir;
    let Some(minus) = refract(-reflected, normal, sc.c1, sc.c2)? else {
        return Ok(Some(Some(violation(ViolationKind::NoTransmission))));
    };
    for (branch, d) in [(Branch::Plus, plus), (Branch::Minus, minus)] {
        let h = next_hit(sc, ev.point, d, Medium::Inner)?;
        if !g2.contains(h.s) {
            return Ok(Some(Some(violation(ViolationKind::LandsOutside { branch, s: h.s }))));
        }
    }
    Ok(Some(None))
}

/// For sampled `x ∈ ∂Ω ∖ Γ₁` and directions whose first hit lies in
/// `∂Ω₂ ∖ Γ₂` and whose reflection returns to `∂Ω ∖ Γ₁`, checks that both
/// transmitted branches at the inner hit have their other end in `Γ₂`.
pub fn check_thmtrap_hypothesis(
    sc: &Scenario,
    gamma1: &BoundaryArc,
    gamma2: &BoundaryArc,
    n_s: usize,
    n_theta: usize,
) -> Result<ThmtrapReport> {
    if gamma1.full || gamma2.full {
        return Ok(ThmtrapReport {
            holds: true,
            checked: 0,
            counterexamples: vec![],
        });
    }
    let rest = gamma1.complement();
    let n_s = n_s.max(1);
    let n_theta = n_theta.max(1);
    let results: Vec<Option<Option<ThmtrapViolation>>> = (0..n_s * n_theta)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n_theta, idx % n_theta);
            let s = rest.at((i as f64 + 0.5) / n_s as f64);
            let angle = -std::f64::consts::FRAC_PI_2 + (j as f64 + 0.5) * std::f64::consts::PI / n_theta as f64;
            check_one(sc, gamma1, gamma2, s, angle)
        })
        .collect::<Result<_>>()?;
    let checked = results.iter().filter(|r| r.is_some()).count();
    let counterexamples: Vec<_> = results.into_iter().flatten().flatten().collect();
    Ok(ThmtrapReport {
        holds: counterexamples.is_empty(),
        checked,
        counterexamples,
    })
}
