//! Pointwise optical laws at a boundary: specular reflection, Snell–Descartes
//! refraction, the critical angle, and event classification.

use crate::error::{Error, Result};
use crate::geometry::{Dir2, Vec2};

/// Collar around the critical angle in which a hit counts as critical.
pub const TOL_ANGLE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Boundary {
    Outer,
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Medium {
    /// Between the outer boundary and the inclusion, speed `c₁`.
    Outer,
    /// Inside the inclusion, speed `c₂`.
    Inner,
}

impl Medium {
    pub fn other(self) -> Medium {
        match self {
            Medium::Outer => Medium::Inner,
            Medium::Inner => Medium::Outer,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Medium::Outer => 0,
            Medium::Inner => 1,
        }
    }
}

/// Classification of one boundary interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Specular reflection on the outer boundary.
    OuterReflection,
    /// Reflection plus transmission at the inclusion.
    ReflectTransmit,
    /// Incidence at the critical angle: reflection plus a gliding ray on the inclusion.
    CriticalGliding,
    /// Beyond the critical angle: the inclusion acts as an obstacle.
    TotalInternalReflection,
    /// Tangential contact with the inclusion; the ray passes straight on.
    Diffractive,
    /// A ray started as gliding along the outer boundary.
    OuterGliding,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::OuterReflection => "outer_reflection",
            EventKind::ReflectTransmit => "reflect_transmit",
            EventKind::CriticalGliding => "critical_gliding",
            EventKind::TotalInternalReflection => "total_internal_reflection",
            EventKind::Diffractive => "diffractive",
            EventKind::OuterGliding => "outer_gliding",
        }
    }
}

/// `d − 2⟨d, n⟩n`.
pub fn reflect(dir: Dir2, normal: Dir2) -> Dir2 {
    let n = normal.vec();
    Dir2::new(dir.vec() - n * (2.0 * dir.dot(n)))
}

/// Transmitted direction across an interface, or `None` beyond the critical
/// angle. The normal may point either way; the tangential orientation of the
/// incoming direction is kept.
pub fn refract(dir: Dir2, normal: Dir2, c_in: f64, c_out: f64) -> Result<Option<Dir2>> {
    if !(c_in > 0.0 && c_out > 0.0) {
        return Err(Error::NonPositiveSpeed { c_in, c_out });
    }
    let mut n = normal.vec();
    let mut cos_in = dir.dot(n);
    if cos_in < 0.0 {
        n = -n;
        cos_in = -cos_in;
    }
    let tangential = dir.vec() - n * cos_in;
    let ratio = c_out / c_in;
    let sin_out_sq = ratio * ratio * tangential.norm_sq();
    if sin_out_sq > 1.0 {
        return Ok(None);
    }
    let cos_out = (1.0 - sin_out_sq).sqrt();
    Ok(Some(Dir2::new(tangential * ratio + n * cos_out)))
}

/// `arcsin(c_slow / c_fast)`.
pub fn critical_angle(c_slow: f64, c_fast: f64) -> Result<f64> {
    if !(c_slow > 0.0 && c_fast > 0.0) {
        return Err(Error::NonPositiveSpeed {
            c_in: c_slow,
            c_out: c_fast,
        });
    }
    if c_slow > c_fast {
        return Err(Error::SpeedOrder { c_slow, c_fast });
    }
    Ok((c_slow / c_fast).asin())
}

/// Incidence angle in `[0, π/2]` between a direction and a normal line.
pub fn incidence_angle(dir: Dir2, normal: Dir2) -> f64 {
    dir.dot(normal.vec()).abs().min(1.0).acos()
}

/// Classifies a hit from its incidence angle (measured from the normal).
///
/// Rays from the slower side beyond the critical angle are totally reflected;
/// from the faster side the interface always transmits.
pub fn classify_hit(
    boundary: Boundary,
    incoming: Medium,
    theta: f64,
    grazing: bool,
    c1: f64,
    c2: f64,
    tol_angle: f64,
) -> Result<EventKind> {
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::NonPositiveSpeed { c_in: c1, c_out: c2 });
    }
    match boundary {
        Boundary::Outer => {
            if grazing {
                // Strict convexity rules out interior rays glancing off ∂Ω.
                return Err(Error::GrazingOuter { x: f64::NAN, y: f64::NAN });
            }
            Ok(EventKind::OuterReflection)
        }
        Boundary::Inner => {
            let (c_in, c_out) = match incoming {
                Medium::Outer => (c1, c2),
                Medium::Inner => (c2, c1),
            };
            if grazing && incoming == Medium::Outer {
                return Ok(EventKind::Diffractive);
            }
            if c_out <= c_in {
                return Ok(EventKind::ReflectTransmit);
            }
            let theta_c = (c_in / c_out).asin();
            if (theta - theta_c).abs() <= tol_angle {
                Ok(EventKind::CriticalGliding)
            } else if theta < theta_c {
                Ok(EventKind::ReflectTransmit)
            } else {
                Ok(EventKind::TotalInternalReflection)
            }
        }
    }
}

/// Rotates `v` so that it makes angle `theta` with `normal` on the side of `tangent`.
pub fn direction_at_angle(normal: Vec2, tangent: Vec2, theta: f64) -> Dir2 {
    Dir2::new(normal * theta.cos() + tangent * theta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn up() -> Dir2 {
        Dir2::new(Vec2::new(0.0, 1.0))
    }

    #[test]
    fn reflection_examples() {
        let h = 0.5 * SQRT2;
        let r = reflect(Dir2::new(Vec2::new(h, -h)), up());
        assert!((r.x() - h).abs() < 1e-15 && (r.y() - h).abs() < 1e-15);
        let r = reflect(Dir2::new(Vec2::new(0.0, -1.0)), up());
        assert!((r.y() - 1.0).abs() < 1e-15);
        let r = reflect(Dir2::new(Vec2::new(1.0, 0.0)), up());
        assert_eq!(r.vec(), Vec2::new(1.0, 0.0));
    }

    fn incident(theta: f64) -> Dir2 {
        // Heading down into the plane y < 0 with normal (0, 1).
        Dir2::new(Vec2::new(theta.sin(), -theta.cos()))
    }

    #[test]
    fn snell_examples() {
        let t = refract(incident(30f64.to_radians()), up(), 1.0, SQRT2).unwrap().unwrap();
        assert!((incidence_angle(t, up()) - FRAC_PI_4).abs() < 1e-12);
        assert!(t.x() > 0.0 && t.y() < 0.0);

        let t = refract(incident(0.0), up(), 1.0, 3.0).unwrap().unwrap();
        assert!(incidence_angle(t, up()).abs() < 1e-12);

        assert!(refract(incident(60f64.to_radians()), up(), 1.0, SQRT2)
            .unwrap()
            .is_none());
        assert!(matches!(
            refract(incident(0.1), up(), 0.0, 1.0),
            Err(Error::NonPositiveSpeed { .. })
        ));
    }

    #[test]
    fn critical_angles() {
        assert!((critical_angle(1.0, SQRT2).unwrap() - FRAC_PI_4).abs() < 1e-12);
        assert!((critical_angle(1.0, 2.0).unwrap() - FRAC_PI_6).abs() < 1e-15);
        assert!((critical_angle(1.5, 1.5).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(matches!(critical_angle(2.0, 1.0), Err(Error::SpeedOrder { .. })));
    }

    #[test]
    fn classification_examples() {
        let c = |b, m, th: f64, g| classify_hit(b, m, th, g, 1.0, SQRT2, TOL_ANGLE).unwrap();
        assert_eq!(c(Boundary::Inner, Medium::Outer, 30f64.to_radians(), false), EventKind::ReflectTransmit);
        let fig10 = (1.0 / 33f64.sqrt()).acos();
        assert!((fig10.to_degrees() - 79.98).abs() < 0.01);
        assert_eq!(c(Boundary::Inner, Medium::Outer, fig10, false), EventKind::TotalInternalReflection);
        assert_eq!(c(Boundary::Inner, Medium::Inner, 89f64.to_radians(), false), EventKind::ReflectTransmit);
        assert_eq!(c(Boundary::Inner, Medium::Outer, FRAC_PI_4, false), EventKind::CriticalGliding);
        assert_eq!(c(Boundary::Inner, Medium::Outer, FRAC_PI_2, true), EventKind::Diffractive);
        assert_eq!(c(Boundary::Outer, Medium::Outer, 0.3, false), EventKind::OuterReflection);
        assert!(matches!(
            classify_hit(Boundary::Outer, Medium::Outer, FRAC_PI_2, true, 1.0, SQRT2, TOL_ANGLE),
            Err(Error::GrazingOuter { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn reflect_is_involutive_and_unit(a in 0.0..std::f64::consts::TAU, b in 0.0..std::f64::consts::TAU) {
            let d = Dir2::from_angle(a);
            let n = Dir2::from_angle(b);
            let r = reflect(d, n);
            prop_assert!((r.vec().norm() - 1.0).abs() < 1e-12);
            let rr = reflect(r, n);
            prop_assert!((rr.vec() - d.vec()).norm() < 1e-12);
        }

        #[test]
        fn transmitted_angle_exceeds_incident(frac in 0.0..0.999f64, c2 in 1.0001f64..4.0) {
            let theta = frac * (1.0 / c2).asin();
            let t = refract(incident(theta), up(), 1.0, c2).unwrap().unwrap();
            let sin2 = t.x().abs();
            prop_assert!(theta == 0.0 || sin2 > theta.sin());
            prop_assert!((sin2 / c2 - theta.sin()).abs() < 1e-12);
        }

        #[test]
        fn refraction_is_reversible(theta in 0.0..1.5f64, c_in in 0.2f64..3.0, c_out in 0.2f64..3.0) {
            if let Some(t) = refract(incident(theta), up(), c_in, c_out).unwrap() {
                let back = refract(-t, up(), c_out, c_in).unwrap().unwrap();
                prop_assert!((back.vec() + incident(theta).vec()).norm() < 1e-10);
            }
        }

        #[test]
        fn classification_is_total(theta in 0.0..=FRAC_PI_2, g in any::<bool>(), inner in any::<bool>()) {
            let m = if inner { Medium::Inner } else { Medium::Outer };
            let first = classify_hit(Boundary::Inner, m, theta, g, 1.0, SQRT2, TOL_ANGLE);
            prop_assert!(first.is_ok());
            prop_assert_eq!(first, classify_hit(Boundary::Inner, m, theta, g, 1.0, SQRT2, TOL_ANGLE));
        }
    }
}
