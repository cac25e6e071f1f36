use super::{curve, PhasePoint};
use crate::error::{Error, Result};
use crate::geometry::{wrap_param, Dir2, Point2};
use crate::optics::{Boundary, Medium};
use crate::regions::BoundaryArc;
use crate::scenario::Scenario;

#[derive(Debug, Clone)]
pub struct GlideTrajectory {
    /// `(time, s, point)` at every emission spacing and at the end.
    pub samples: Vec<(f64, f64, Point2)>,
    /// Transmitted germs into `Ω₁` at the critical angle (inner boundary only).
    pub germs: Vec<PhasePoint>,
    /// First time the glide enters `gamma`, if it does.
    pub observed_at: Option<f64>,
}

/// Glides along `boundary` from `s0` in direction `sign` (±1, counter-clockwise
/// positive) at the speed of the adjacent medium for `until` seconds.
pub fn glide(
    sc: &Scenario,
    boundary: Boundary,
    s0: f64,
    sign: f64,
    until: f64,
    spacing: f64,
    gamma: Option<&BoundaryArc>,
) -> Result<GlideTrajectory> {
    if !(spacing > 0.0) {
        return Err(Error::Validation(format!("glide spacing {spacing} must be positive")));
    }
    let c = curve(sc, boundary)?;
    let speed = match boundary {
        Boundary::Outer => sc.c1,
        Boundary::Inner => sc.c2,
    };
    let sign = sign.signum();
    let arc = speed * until.max(0.0);
    let perimeter = c.perimeter();
    let at = |len: f64| wrap_param(s0 + sign * len / perimeter);
    let theta_c = sc.critical_angle();

    let mut samples = vec![];
    let mut germs = vec![];
    let n = (arc / spacing * (1.0 + 1e-12)).floor() as usize;
    for k in 0..=n {
        let len = k as f64 * spacing;
        let s = at(len);
        samples.push((len / speed, s, c.point_at(s)));
        if k == 0 || boundary != Boundary::Inner {
            continue;
        }
        if let Some(th) = theta_c {
            let f = c.frame_at(s)?;
            let dir = Dir2::new(f.normal.vec() * th.cos() + f.tangent.vec() * (sign * th.sin()));
            germs.push(PhasePoint {
                boundary: Some(Boundary::Inner),
                s,
                position: f.point,
                dir,
                medium: Medium::Outer,
                time: len / speed,
            });
        }
    }
    if (n as f64) * spacing < arc {
        let s = at(arc);
        samples.push((until, s, c.point_at(s)));
    }

    let observed_at = gamma.filter(|g| g.boundary == boundary).and_then(|g| {
        if g.contains(s0) {
            return Some(0.0);
        }
        // Distance along the glide direction to the nearest endpoint of Γ.
        let d = if sign > 0.0 {
            wrap_param(g.lo - s0)
        } else {
            wrap_param(s0 - g.hi)
        };
        let t = d * perimeter / speed;
        (t < until).then_some(t)
    });
    Ok(GlideTrajectory {
        samples,
        germs,
        observed_at,
    })
}
