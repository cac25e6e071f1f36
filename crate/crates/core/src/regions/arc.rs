use crate::error::{Error, Result};
use crate::geometry::{wrap_param, BoundaryCurve, Dir2, Point2};
use crate::optics::Boundary;
use crate::scenario::{Observation, Scenario};

/// Open counter-clockwise arc `(lo, hi)` of a boundary in arc-length parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryArc {
    pub boundary: Boundary,
    pub lo: f64,
    pub hi: f64,
    /// The whole boundary; `lo`/`hi` are then ignored.
    pub full: bool,
}

impl BoundaryArc {
    pub fn new(boundary: Boundary, lo: f64, hi: f64) -> Self {
        BoundaryArc {
            boundary,
            lo: wrap_param(lo),
            hi: wrap_param(hi),
            full: false,
        }
    }

    pub fn full(boundary: Boundary) -> Self {
        BoundaryArc {
            boundary,
            lo: 0.0,
            hi: 0.0,
            full: true,
        }
    }

    pub fn empty(boundary: Boundary) -> Self {
        BoundaryArc::new(boundary, 0.0, 0.0)
    }

    pub fn is_empty(&self) -> bool {
        !self.full && self.lo == self.hi
    }

    /// Length as a fraction of the perimeter.
    pub fn length(&self) -> f64 {
        if self.full {
            1.0
        } else {
            wrap_param(self.hi - self.lo)
        }
    }

    /// Offset of `s` from `lo`, counter-clockwise, in `[0, 1)`.
    pub fn offset(&self, s: f64) -> f64 {
        wrap_param(s - self.lo)
    }

    /// Open-arc membership.
    pub fn contains(&self, s: f64) -> bool {
        self.contains_with_margin(s, 0.0)
    }

    /// Membership at least `margin` away from both endpoints.
    pub fn contains_with_margin(&self, s: f64, margin: f64) -> bool {
        if self.full {
            return true;
        }
        let o = self.offset(s);
        o > margin && o < self.length() - margin
    }

    /// `self ⊆ other` up to `tol` at the endpoints.
    pub fn is_subset_of(&self, other: &BoundaryArc, tol: f64) -> bool {
        if other.full || self.is_empty() {
            return true;
        }
        if self.full {
            return false;
        }
        let a = wrap_param(self.lo - other.lo + tol);
        a <= other.length() + tol && a + self.length() <= other.length() + 2.0 * tol
    }

    /// Complementary open arc.
    pub fn complement(&self) -> BoundaryArc {
        if self.full {
            return BoundaryArc::empty(self.boundary);
        }
        if self.is_empty() {
            return BoundaryArc::full(self.boundary);
        }
        BoundaryArc::new(self.boundary, self.hi, self.lo)
    }

    /// Midpoint parameter.
    pub fn mid(&self) -> f64 {
        wrap_param(self.lo + 0.5 * self.length())
    }

    /// Parameter at fraction `f ∈ [0, 1]` along the arc.
    pub fn at(&self, f: f64) -> f64 {
        wrap_param(self.lo + f * self.length())
    }

    /// Hausdorff distance between two arcs in the (periodic) parameter metric.
    pub fn hausdorff(&self, other: &BoundaryArc) -> f64 {
        if self.full && other.full {
            return 0.0;
        }
        if self.full || other.full {
            return 0.5 * (1.0 - self.length().min(other.length()));
        }
        let d = |a: f64, b: f64| {
            let w = wrap_param(a - b);
            w.min(1.0 - w)
        };
        d(self.lo, other.lo).max(d(self.hi, other.hi))
    }
}

/// `Γ(x₀) = {x ∈ ∂Ω : ⟨x − x₀, n(x)⟩ > 0}` as an arc of `curve`.
pub fn gamma_x0(curve: &BoundaryCurve, boundary: Boundary, x0: Point2) -> Result<BoundaryArc> {
    let (lo, hi) = curve.tangent_points_from(x0)?;
    Ok(BoundaryArc::new(boundary, lo, hi))
}

/// Parameter of the outer boundary point in polar direction `deg` about its center.
pub fn s_at_polar_angle(curve: &BoundaryCurve, deg: f64) -> Result<f64> {
    let d = Dir2::from_angle(deg.to_radians());
    curve
        .intersect_ray(curve.center(), d, 0.0)
        .map(|h| h.s)
        .ok_or_else(|| Error::Validation(format!("no boundary point at polar angle {deg}")))
}

/// The observation region `Γ ⊂ ∂Ω` named by the scenario.
pub fn observation_arc(sc: &Scenario) -> Result<BoundaryArc> {
    match sc.observation {
        Observation::Point(x0) => gamma_x0(&sc.outer, Boundary::Outer, x0),
        Observation::Arc { lo, hi } => Ok(BoundaryArc::new(Boundary::Outer, lo, hi)),
        Observation::Angles { lo, hi } => Ok(BoundaryArc::new(
            Boundary::Outer,
            s_at_polar_angle(&sc.outer, lo)?,
            s_at_polar_angle(&sc.outer, hi)?,
        )),
        Observation::Full => Ok(BoundaryArc::full(Boundary::Outer)),
    }
}
