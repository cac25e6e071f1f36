use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use std::f64::consts::{FRAC_PI_2, PI};

fn ellipse(a: f64, b: f64) -> BoundaryCurve {
    BoundaryCurve::ellipse(Point2::ZERO, a, b, 0.0).unwrap()
}

fn at_deg(e: &BoundaryCurve, deg: f64) -> Point2 {
    EllipseFrame::of(e).unwrap().at(deg.to_radians())
}

/// Parameter `λ` of the confocal conic `x²/(a²−λ) + y²/(b²−λ) = 1` tangent
/// to the line through `p` and `q`: an ellipse for `λ < b²`, a hyperbola
/// for `b² < λ < a²`.
fn confocal_lambda(a: f64, b: f64, p: Point2, q: Point2) -> f64 {
    let d = q - p;
    let n = Vec2::new(-d.y, d.x) / d.norm();
    let off = n.dot(p);
    a * a * n.x * n.x + b * b * n.y * n.y - off * off
}

#[test]
fn chord_examples() {
    let e = ellipse(4.0, 2.0);
    let cls = |p, q| classify_caustic(&e, p, q, 1e-9).unwrap();
    assert_eq!(cls(Point2::new(4.0, 0.0), Point2::new(-4.0, 0.0)), CausticClass::MajorAxis);
    assert_eq!(cls(Point2::new(0.0, 2.0), Point2::new(0.0, -2.0)), CausticClass::MinorAxis);
    assert_eq!(cls(at_deg(&e, 80.0), at_deg(&e, 100.0)), CausticClass::Elliptic);
    let (p, q) = (at_deg(&e, 80.0), at_deg(&e, 260.0));
    let x = p.x - p.y * (q.x - p.x) / (q.y - p.y);
    assert!(x.abs() < 2.0 * 3f64.sqrt());
    assert_eq!(cls(p, q), CausticClass::Hyperbolic);
    let f1 = Point2::new(2.0 * 3f64.sqrt(), 0.0);
    let top = Point2::new(0.0, 2.0);
    let hit = e.intersect_ray(top, Dir2::new(f1 - top), 1e-9).unwrap().point;
    assert_eq!(cls(top, hit), CausticClass::Focal);
    assert_eq!(cls(top, top), CausticClass::Gliding);
}

#[test]
fn caustic_class_is_invariant() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let (a, b) = (4.0, 2.0);
    let e = ellipse(a, b);
    let mut orbits = 0;
    while orbits < 1000 {
        let start = at_deg(&e, rng.gen_range(0.0..360.0));
        let end = at_deg(&e, rng.gen_range(0.0..360.0));
        let lam = confocal_lambda(a, b, start, end);
        if (start - end).norm() < 1e-3 || (lam - b * b).abs() < 1e-4 {
            continue;
        }
        orbits += 1;
        let want = if lam < b * b { CausticClass::Elliptic } else { CausticClass::Hyperbolic };
        let pts = orbit(&e, start, Dir2::new(end - start), 1000).unwrap();
        for w in pts.windows(2) {
            assert_eq!(classify_caustic(&e, w[0], w[1], 1e-9).unwrap(), want);
        }
    }
}

#[test]
fn focal_orbits() {
    let e = ellipse(4.0, 2.0);
    let run = focal_convergence(&e, Point2::new(0.0, 2.0), 200).unwrap();
    assert!(run.focus_miss.iter().all(|&m| m < 1e-9));
    let last = run.points[200];
    assert!(last.y.abs() < 1e-6 && (last.x.abs() - 4.0).abs() < 1e-6, "{last:?}");
    let k = run.angles.iter().position(|&t| t < 1e-12).unwrap();
    assert!(run.angles[..k].windows(2).all(|w| w[1] < w[0]));

    // Through F₂ from the same start: the mirror image.
    let f2 = Point2::new(-2.0 * 3f64.sqrt(), 0.0);
    let top = Point2::new(0.0, 2.0);
    let mirror = orbit(&e, top, Dir2::new(f2 - top), 5).unwrap();
    for (p, q) in run.points.iter().zip(&mirror) {
        assert!((p.x + q.x).abs() < 1e-9 && (p.y - q.y).abs() < 1e-9);
    }

    // On the major axis the orbit never leaves it.
    let run = focal_convergence(&e, Point2::new(-4.0, 0.0), 50).unwrap();
    assert!(run.points.iter().all(|p| p.y.abs() < 1e-12));

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let start = at_deg(&e, rng.gen_range(1.0..179.0));
        let run = focal_convergence(&e, start, 200).unwrap();
        assert!(run.angles[199] < 1e-6 && run.points[200].y.abs() < 1e-6, "{start:?}");
    }
}

#[test]
fn axis_orbits_have_period_two() {
    for (a, b) in [(4.0, 2.0), (2.0, 1.0), (3.0, 2.9)] {
        let e = ellipse(a, b);
        for start in [Point2::new(a, 0.0), Point2::new(0.0, -b)] {
            let pts = orbit(&e, start, Dir2::new(-start), 2).unwrap();
            assert!((pts[1] + start).norm() < 1e-10 && (pts[2] - start).norm() < 1e-10);
        }
    }
}

#[test]
fn lemel_arc_examples() {
    let e = ellipse(2.0, 1.0);
    let x1 = Point2::new(2.0 * 200f64.to_radians().cos(), 200f64.to_radians().sin());
    let (arc, x2) = lemel_arc(&e, x1, 1e-9).unwrap();
    // Line x1 + t (F₁ − x1) against x²/4 + y² = 1; t = 0 is x1.
    let d = Point2::new(3f64.sqrt(), 0.0) - x1;
    let qa = d.x * d.x / 4.0 + d.y * d.y;
    let qb = 2.0 * (x1.x * d.x / 4.0 + x1.y * d.y);
    let want = x1 + d * (-qb / qa);
    assert!((x2 - want).norm() < 1e-9, "{x2:?} {want:?}");
    assert!(x2.x > 0.0 && x2.y > 0.0);
    assert!(arc.contains(e.s_of_point(Point2::new(2.0, 0.0))));
    assert!(arc.contains(e.s_of_point(Point2::new(0.0, -1.0))));

    for bad in [Point2::new(2.0, 0.0), Point2::new(0.0, 1.0), at_deg(&e, 100.0), Point2::new(-1.0, -0.5)] {
        assert!(matches!(lemel_arc(&e, bad, 1e-9), Err(Error::BadQuadrant { .. })));
    }

    // x1 sliding down to (0, −b): the arc starts there and still holds (a, 0).
    let (arc, _) = lemel_arc(&e, at_deg(&e, 270.0 - 1e-6), 1e-9).unwrap();
    let bottom = e.s_of_point(Point2::new(0.0, -1.0));
    assert!((arc.lo - bottom).abs() < 1e-6);
    assert!(arc.contains(e.s_of_point(Point2::new(2.0, 0.0))));
}

#[test]
fn gamma_x0_form_examples() {
    let unit = BoundaryCurve::circle(Point2::ZERO, 1.0).unwrap();
    let g = BoundaryArc::new(Boundary::Outer, 1.0 / 6.0, 5.0 / 6.0);
    let x0 = is_gamma_x0_form(&unit, &g, 1e-8).unwrap().unwrap();
    assert!((x0 - Point2::new(2.0, 0.0)).norm() < 1e-8, "{x0:?}");
    assert!(is_gamma_x0_form(&unit, &BoundaryArc::full(Boundary::Outer), 1e-8).unwrap().is_none());

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for e in [ellipse(2.0, 1.0), ellipse(4.0, 2.0)] {
        let f = EllipseFrame::of(&e).unwrap();
        for _ in 0..20 {
            let x1 = f.at(rng.gen_range(PI + 0.01..1.5 * PI - 0.01));
            let (arc, _) = lemel_arc(&e, x1, 1e-9).unwrap();
            if arc.length() <= 0.5 {
                assert!(is_gamma_x0_form(&e, &arc, 1e-8).unwrap().is_none());
            }
            // Longer arcs are not of the form either: the tangent lines at
            // the ends meet at a point whose Γ(x₀) is a different arc.
            let alt = BoundaryArc::new(Boundary::Outer, arc.lo, arc.lo + 0.55);
            assert!(is_gamma_x0_form(&e, &alt, 1e-8).unwrap().map_or(true, |x| gamma_x0(&e, Boundary::Outer, x).unwrap().hausdorff(&alt) < 1e-8));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn gamma_x0_round_trip(a in 1.0f64..4.0, ratio in 0.3f64..1.0, phi in 0.0f64..(2.0 * PI), dist in 1.05f64..5.0) {
        let e = ellipse(a, a * ratio);
        let dir = Vec2::from_angle(phi);
        let reach = e.intersect_ray(Point2::ZERO, Dir2::new(dir), 0.0).unwrap().distance;
        let x0 = Point2::ZERO + dir * (reach * dist);
        let g = gamma_x0(&e, Boundary::Outer, x0).unwrap();
        let back = is_gamma_x0_form(&e, &g, 1e-8).unwrap();
        prop_assert!(back.is_some());
        prop_assert!((back.unwrap() - x0).norm() < 1e-6 * (1.0 + x0.norm()));
    }
}

#[test]
fn both_sides() {
    let e = ellipse(2.0, 1.0);
    let x1 = two_sided_lemel_start(&e, 1e-9).unwrap().expect("a two-sided start exists");
    let (arc, _) = lemel_arc(&e, x1, 1e-9).unwrap();
    let (on, off) = both_sides_gcc(&e, &arc, 200.0, 90, 46).unwrap();
    assert!(on.pass && off.as_ref().unwrap().pass);

    // A tiny arc away from the axes misses the major-axis 2-cycle.
    let f = EllipseFrame::of(&e).unwrap();
    let s = e.s_of_point(f.at(FRAC_PI_2 / 2.0));
    let tiny = BoundaryArc::new(Boundary::Outer, s - 0.002, s + 0.002);
    let (on, off) = both_sides_gcc(&e, &tiny, 200.0, 64, 32).unwrap();
    assert!(!on.pass && off.unwrap().pass);
    assert!(on.failures.iter().any(|w| w.period == Some(2)));

    let (on, off) = both_sides_gcc(&e, &BoundaryArc::full(Boundary::Outer), 50.0, 16, 8).unwrap();
    assert!(on.pass && off.is_none());
}

#[test]
fn lemel_arcs_satisfy_gcc() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for e in [ellipse(2.0, 1.0), ellipse(4.0, 2.0)] {
        let f = EllipseFrame::of(&e).unwrap();
        for _ in 0..4 {
            let x1 = f.at(rng.gen_range(PI + 0.01..1.5 * PI - 0.01));
            let (arc, _) = lemel_arc(&e, x1, 1e-9).unwrap();
            let v = check_gcc_simple(&e, &arc, 400.0, 90, 45).unwrap();
            assert!(v.pass, "{x1:?} {:?}", v.failures.first().map(|w| (w.s, w.theta)));
        }
    }
}
