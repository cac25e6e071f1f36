use super::*;
use crate::geometry::{BoundaryCurve, Point2, Vec2};
use crate::regions::{construct, observation_arc, s_at_polar_angle};
use crate::scenario::Observation;
use std::f64::consts::SQRT_2;

fn circle(c: Point2, r: f64) -> BoundaryCurve {
    BoundaryCurve::circle(c, r).unwrap()
}

fn concentric() -> (Scenario, Point2) {
    let x0 = Point2::new(3.0, 0.0);
    let sc = Scenario::new(
        circle(Point2::ZERO, 2.0),
        Some(circle(Point2::ZERO, 1.0)),
        1.0,
        SQRT_2,
        Observation::Point(x0),
        50.0,
    )
    .unwrap();
    (sc, x0)
}

fn figure10(c2: f64) -> Scenario {
    let outer = BoundaryCurve::ellipse(Point2::ZERO, 4.0, 2.0, 0.0).unwrap();
    Scenario::new(
        outer,
        Some(circle(Point2::ZERO, 1.0)),
        1.0,
        c2,
        Observation::Angles { lo: 90.0, hi: 270.0 },
        100.0,
    )
    .unwrap()
}

fn left_inner(sc: &Scenario) -> BoundaryArc {
    let inner = sc.inner().unwrap();
    BoundaryArc::new(
        Boundary::Inner,
        s_at_polar_angle(inner, 90.0).unwrap(),
        s_at_polar_angle(inner, 270.0).unwrap(),
    )
}

#[test]
fn escape_value_examples() {
    let (sc, _) = concentric();
    let inner = sc.inner().unwrap();
    for k in 0..1000 {
        let s = k as f64 / 1000.0;
        let n = inner.frame_at(s).unwrap().normal;
        assert!(escape_value(&sc, s, n).unwrap().abs() < 1e-9);
    }
    // Leaving the inclusion tangentially, the ray meets ∂Ω with ⟨ξ, δ'⟩ = r/R.
    let f = inner.frame_at(0.0).unwrap();
    let xi = Dir2::new(f.tangent.vec() + f.normal.vec() * 1e-9);
    assert!((escape_value(&sc, 0.0, xi).unwrap() - 0.5).abs() < 1e-8);

    // Inclusion shifted towards +x: the normal ray from the −x side drifts
    // the way a direct ray cast says it does.
    let sc = Scenario::new(
        circle(Point2::ZERO, 3.0),
        Some(circle(Point2::new(1.0, 0.0), 0.5)),
        1.0,
        2.0,
        Observation::Full,
        50.0,
    )
    .unwrap();
    let inner = sc.inner().unwrap();
    for deg in [150.0, 170.0, 190.0, 210.0] {
        let s = s_at_polar_angle(inner, deg).unwrap();
        let f = inner.frame_at(s).unwrap();
        let m = escape_value(&sc, s, f.normal).unwrap();
        // Oracle: chord of the outer circle along the normal, tangent at the far end.
        let (p, d) = (f.point, f.normal.vec());
        let b = p.dot(d);
        let t = -b + (b * b - p.norm_sq() + 9.0).sqrt();
        let q = p + d * t;
        let tangent = Vec2::new(-q.y, q.x) / 3.0;
        assert!((m - d.dot(tangent)).abs() < 1e-12);
        // For a circle about the origin ℳ is the angular momentum over R.
        assert!((m - p.cross(d) / 3.0).abs() < 1e-12);
        assert_eq!(m > 0.0, deg < 180.0, "{deg} {m}");
    }
}

#[test]
fn ueg_concentric_and_figure10() {
    let (sc, x0) = concentric();
    let st = construct(&sc, x0, 64).unwrap();
    let prof = is_uniformly_escaping(&sc, &st.gamma2, 1e-3).unwrap();
    assert!(prof.samples.len() >= 100);
    assert!(prof.samples.iter().all(|(_, m)| m.abs() < 1e-9));
    assert!(prof.uniformly_escaping && prof.stable_under_halving);

    let sc = figure10(SQRT_2);
    let prof = is_uniformly_escaping(&sc, &left_inner(&sc), 1e-3).unwrap();
    assert!(!prof.uniformly_escaping);
    assert!(!prof.violations.is_empty());

    let full = is_uniformly_escaping(&sc, &BoundaryArc::full(Boundary::Inner), 1e-3).unwrap();
    assert!(full.uniformly_escaping && full.samples.is_empty());
}

#[test]
fn figure10_orbit_is_found() {
    let sc = figure10(SQRT_2);
    let g1 = observation_arc(&sc).unwrap();
    let orbits = find_trapped_rays(&sc, &g1, None, 100.0, 256, 256).unwrap();
    let b = Point2::new(4.0 / 3.0, 4.0 * SQRT_2 / 3.0);
    let orbit = orbits
        .iter()
        .find(|o| o.events.iter().any(|e| (e.point - b).norm() < 1e-6))
        .expect("figure-10 orbit");
    let a = Point2::new(1.0, 0.0);
    assert!(orbit.events.iter().any(|e| (e.point - a).norm() < 1e-6));
    assert!((orbit.period_length - 44.0 / 33f64.sqrt()).abs() < 1e-10, "{}", orbit.period_length);
    for th in orbit.inner_angles() {
        assert!((th.cos() - 1.0 / 33f64.sqrt()).abs() < 1e-10);
    }
    assert_eq!(orbit.mechanism, Mechanism::TirRetroreflection);
    for e in orbit.events.iter().filter(|e| e.boundary == Boundary::Outer) {
        assert!(e.theta < 1e-10);
    }
}

#[test]
fn figure10_orbit_retraces_one_period() {
    let sc = figure10(SQRT_2);
    let g1 = observation_arc(&sc).unwrap();
    let orbits = find_trapped_rays(&sc, &g1, None, 100.0, 64, 64).unwrap();
    let orbit = orbits.iter().find(|o| (o.period_length - 44.0 / 33f64.sqrt()).abs() < 1e-9).unwrap();
    let (s0, a0) = orbit.launch(&sc).unwrap();
    let (mut s, mut a) = (s0, a0);
    for _ in 0..orbit.outer_period {
        let r = outer_return(&sc, s, a).unwrap();
        assert!(r.events.iter().all(|e| e.boundary == Boundary::Inner || !g1.contains(e.s)));
        s = r.s;
        a = r.angle;
    }
    assert!((s - s0).abs() < 1e-9 && (a - a0).abs() < 1e-9);
    // The cycle is strongly unstable: a launch error of 1e-7 grows by more
    // than two orders of magnitude in one period.
    let r1 = outer_return(&sc, s0 + 1e-7, a0).and_then(|r| outer_return(&sc, r.s, r.angle)).unwrap();
    assert!((r1.s - s0).abs() > 1e-5, "{} {}", r1.s, s0);
}

#[test]
fn trapped_search_controls() {
    let (sc, x0) = concentric();
    let st = construct(&sc, x0, 64).unwrap();
    assert!(find_trapped_rays(&sc, &st.gamma1, Some(&st.gamma2), 100.0, 256, 256).unwrap().is_empty());

    // A nearly opaque inclusion (θc ≈ 2.9°) traps many more cycles.
    let g1 = observation_arc(&figure10(SQRT_2)).unwrap();
    let few = find_trapped_rays(&figure10(SQRT_2), &g1, None, 100.0, 128, 128).unwrap().len();
    let many = find_trapped_rays(&figure10(20.0), &g1, None, 100.0, 128, 128).unwrap().len();
    assert!(few > 0 && many > few, "{few} {many}");
}

#[test]
fn thmtrap_examples() {
    let x0 = Point2::new(3.5, 0.0);
    let sc = Scenario::new(
        circle(Point2::ZERO, 3.0),
        Some(circle(Point2::ZERO, 1.0)),
        1.0,
        1.2,
        Observation::Point(x0),
        50.0,
    )
    .unwrap();
    let st = construct(&sc, x0, 64).unwrap();
    assert!(st.gamma2.length() > 0.5);
    let rep = check_thmtrap_hypothesis(&sc, &st.gamma1, &st.gamma2, 128, 128).unwrap();
    assert!(rep.holds && rep.checked > 1000, "{:?}", rep.counterexamples.first());

    let sc = figure10(SQRT_2);
    let g1 = observation_arc(&sc).unwrap();
    let rep = check_thmtrap_hypothesis(&sc, &g1, &left_inner(&sc), 128, 128).unwrap();
    assert!(!rep.holds);
    assert!(rep.counterexamples.iter().any(|v| v.kind == ViolationKind::NoTransmission));

    let rep = check_thmtrap_hypothesis(&sc, &g1, &BoundaryArc::full(Boundary::Inner), 16, 16).unwrap();
    assert!(rep.holds && rep.checked == 0);
}
