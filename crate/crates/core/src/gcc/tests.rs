use super::*;
use crate::geometry::{BoundaryCurve, Vec2};
use crate::regions::{construct, gamma_x0, observation_arc, s_at_polar_angle};
use crate::tracer::{trace_with, OUT1};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

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

fn seeded(graph: &ObsGraph, seeds: &[usize]) -> ObservationState {
    let mut labels = vec![None; graph.n];
    for &l in seeds {
        labels[l] = Some(0.0);
    }
    ObservationState { labels }
}

fn fixpoint(graph: &ObsGraph, seeds: &[usize]) -> Vec<bool> {
    propagate_observation(graph, &seeded(graph, seeds)).observed()
}

fn graph(n: usize, rules: Vec<Rule>) -> ObsGraph {
    ObsGraph {
        n,
        rules,
        slot_label: vec![],
    }
}

#[test]
fn interface_rule_examples() {
    // Labels 0..4 are γ₁⁻, γ₂⁻, γ₁⁺, γ₂⁺.
    let g = graph(4, vec![Rule::TwoOfFour([Some(0), Some(1), Some(2), Some(3)])]);
    assert_eq!(fixpoint(&g, &[2, 3]), vec![true; 4]);
    assert_eq!(fixpoint(&g, &[2]), vec![false, false, true, false]);
    // Gliding halves absent: the two Ω₁ half-rays say nothing about each other.
    let g = graph(2, vec![Rule::TwoOfFour([Some(0), None, Some(1), None])]);
    assert_eq!(fixpoint(&g, &[1]), vec![false, true]);
}

#[test]
fn recursive_observation_chain() {
    // Four interface events. Event k shares one half-ray with event k+1 and
    // gets one directly observed half-ray; the root is a half-ray of event 0.
    let mut rules = vec![];
    let shared = |k: usize| 10 + k;
    let direct = |k: usize| 20 + k;
    for k in 0..4 {
        let from_next = if k == 3 { 30 } else { shared(k + 1) };
        let root_side = if k == 0 { 0 } else { shared(k) };
        rules.push(Rule::TwoOfFour([Some(root_side), Some(40 + k), Some(direct(k)), Some(from_next)]));
    }
    let g = graph(50, rules);
    let mut seeds: Vec<usize> = (0..4).map(direct).collect();
    seeds.push(30);
    assert!(fixpoint(&g, &seeds)[0]);
    for skip in 0..seeds.len() {
        let partial: Vec<usize> = seeds.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &l)| l).collect();
        assert!(!fixpoint(&g, &partial)[0], "root observed without seed {}", seeds[skip]);
    }
}

fn chaotic(graph: &ObsGraph, seeds: &[usize], order: &[usize]) -> Vec<bool> {
    let mut obs = vec![false; graph.n];
    for &l in seeds {
        obs[l] = true;
    }
    loop {
        let mut changed = false;
        for &r in order {
            changed |= graph.rules[r].apply(&mut obs);
        }
        if !changed {
            return obs;
        }
    }
}

/// Least closed superset of the seeds by enumerating every labelling.
fn brute_force(graph: &ObsGraph, seeds: &[usize]) -> Vec<bool> {
    let n = graph.n;
    let mut least = (1u32 << n) - 1;
    let seed_mask = seeds.iter().fold(0u32, |m, &l| m | (1 << l));
    for mask in 0u32..(1 << n) {
        if mask & seed_mask != seed_mask {
            continue;
        }
        let obs: Vec<bool> = (0..n).map(|l| mask >> l & 1 == 1).collect();
        let closed = graph.rules.iter().all(|r| {
            let mut o = obs.clone();
            !r.apply(&mut o)
        });
        if closed {
            least &= mask;
        }
    }
    (0..n).map(|l| least >> l & 1 == 1).collect()
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = (ObsGraph, Vec<usize>)> {
    (2..=max_n).prop_flat_map(|n| {
        let label = 0..n;
        let rule = prop_oneof![
            (label.clone(), label.clone()).prop_map(|(a, b)| Rule::Equiv(a, b)),
            prop::array::uniform4(prop::option::weighted(0.85, label.clone())).prop_map(Rule::TwoOfFour),
        ];
        (prop::collection::vec(rule, 1..=n), prop::collection::vec(label, 0..=3))
            .prop_map(move |(rules, seeds)| (graph(n, rules), seeds))
    })
}

proptest! {
    #[test]
    fn worklist_matches_brute_force((g, seeds) in arb_graph(12)) {
        prop_assert_eq!(fixpoint(&g, &seeds), brute_force(&g, &seeds));
    }

    #[test]
    fn confluent_and_idempotent((g, seeds) in arb_graph(24), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let want = fixpoint(&g, &seeds);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..g.rules.len()).collect();
        for _ in 0..100 {
            order.shuffle(&mut rng);
            prop_assert_eq!(chaotic(&g, &seeds, &order), want.clone());
        }
        let once = propagate_observation(&g, &seeded(&g, &seeds));
        let twice = propagate_observation(&g, &once);
        prop_assert_eq!(once.labels, twice.labels);
    }

    #[test]
    fn time_reversal_symmetry((g, seeds) in arb_graph(16)) {
        let swapped = graph(
            g.n,
            g.rules
                .iter()
                .map(|r| match *r {
                    Rule::Equiv(a, b) => Rule::Equiv(b, a),
                    Rule::TwoOfFour([a, b, c, d]) => Rule::TwoOfFour([c, d, a, b]),
                })
                .collect(),
        );
        prop_assert_eq!(fixpoint(&g, &seeds), fixpoint(&swapped, &seeds));
    }

    #[test]
    fn monotone_in_seeds((g, seeds) in arb_graph(16), extra in 0usize..16) {
        let small = fixpoint(&g, &seeds);
        let mut more = seeds.clone();
        more.push(extra % g.n);
        let big = fixpoint(&g, &more);
        prop_assert!(small.iter().zip(&big).all(|(a, b)| !a || *b));
    }
}

#[test]
fn real_graphs_match_brute_force() {
    // Short forward/backward graphs of the concentric table have at most a
    // dozen half-rays; seed every single label and every pair.
    let (sc, x0) = concentric();
    let st = construct(&sc, x0, 64).unwrap();
    let mut checked = 0;
    for k in 0..40 {
        let s = k as f64 / 40.0;
        let theta = 0.3 + 0.06 * k as f64;
        let f = sc.inner().unwrap().frame_at(s).unwrap();
        let dir = Dir2::new(f.tangent.vec() * theta.cos() + f.normal.vec() * theta.sin());
        let p0 = PhasePoint::on_boundary(&sc, Boundary::Inner, s, dir, Medium::Outer).unwrap();
        let tree = trace_with(&sc, &p0, 2.5, 3, true, &st.gamma1).unwrap();
        let g = ObsGraph::from_tree(&tree);
        if g.n > 12 {
            continue;
        }
        checked += 1;
        for a in 0..g.n {
            for b in a..g.n {
                assert_eq!(fixpoint(&g, &[a, b]), brute_force(&g, &[a, b]));
            }
        }
    }
    assert!(checked >= 10, "{checked}");
}

fn chord_tree(sc: &Scenario, gamma: &BoundaryArc, from_deg: f64, to: Point2, horizon: f64) -> crate::tracer::RayTree {
    let s = s_at_polar_angle(&sc.outer, from_deg).unwrap();
    let p = sc.outer.point_at(s);
    let dir = Dir2::new(to - p);
    let p0 = PhasePoint::on_boundary(sc, Boundary::Outer, s, dir, Medium::Outer).unwrap();
    trace_with(sc, &p0, horizon, 8, false, gamma).unwrap()
}

#[test]
fn seeding_examples() {
    let (sc, x0) = concentric();
    let gamma = construct(&sc, x0, 64).unwrap().gamma1;
    let root_label = |g: &ObsGraph, t: &crate::tracer::RayTree| g.slot_label[t.root_event][t.root_slot].unwrap();

    // The chord from 0° to 90° misses the inclusion and lands mid-Γ.
    let tree = chord_tree(&sc, &gamma, 0.0, Point2::new(0.0, 2.0), 3.0);
    let g = ObsGraph::from_tree(&tree);
    let st = seed_observed(&sc, &tree, &g, None).unwrap();
    assert!((st.labels[root_label(&g, &tree)].unwrap() - 2.0 * SQRT_2).abs() < 1e-9);

    // Aimed exactly at the lower end of Γ: open arc, not seeded.
    let end = sc.outer.point_at(gamma.lo);
    let tree = chord_tree(&sc, &gamma, 0.0, end, 3.0);
    let g = ObsGraph::from_tree(&tree);
    let st = seed_observed(&sc, &tree, &g, None).unwrap();
    assert!(st.labels[root_label(&g, &tree)].is_none());

    // The same hit mid-Γ but grazing is not seeded.
    let mut tree = chord_tree(&sc, &gamma, 0.0, Point2::new(0.0, 2.0), 3.0);
    let hit = tree.events.iter().position(|e| e.in_gamma).unwrap();
    tree.events[hit].theta1 = Some(FRAC_PI_2);
    let g = ObsGraph::from_tree(&tree);
    assert!(seed_observed(&sc, &tree, &g, None).unwrap().labels.iter().all(Option::is_none));

    // Zero horizon: nothing is seen.
    let tree = chord_tree(&sc, &gamma, 0.0, Point2::new(0.0, 2.0), 0.0);
    let g = ObsGraph::from_tree(&tree);
    assert!(seed_observed(&sc, &tree, &g, None).unwrap().labels.iter().all(Option::is_none));
}

#[test]
fn critical_germs_need_gliding() {
    // Concentric critical orbits meet the inclusion at θc every time; only the
    // gliding halves can close the interface rule.
    let (sc, x0) = concentric();
    let st = construct(&sc, x0, 64).unwrap();
    let f = sc.inner().unwrap().frame_at(0.0).unwrap();
    let dir = Dir2::new(f.tangent.vec() * FRAC_PI_4.cos() + f.normal.vec() * FRAC_PI_4.sin());
    let p0 = PhasePoint::on_boundary(&sc, Boundary::Inner, 0.0, dir, Medium::Outer).unwrap();
    let tree = trace_with(&sc, &p0, 20.0, 8, true, &st.gamma1).unwrap();
    assert_eq!(tree.events[tree.root_event].kind, crate::optics::EventKind::CriticalGliding);
    assert_eq!(tree.root_slot, OUT1);
    assert!(matches!(verdict_of(&sc, &tree, None).unwrap(), Verdict::Undetermined { .. }));
    assert!(matches!(verdict_of(&sc, &tree, Some(&st.gamma2)).unwrap(), Verdict::Observed { .. }));
}

#[test]
fn gcc_simple_examples() {
    let unit = circle(Point2::ZERO, 1.0);
    let arc = |lo: f64, hi: f64| {
        BoundaryArc::new(
            Boundary::Outer,
            s_at_polar_angle(&unit, lo.to_degrees()).unwrap(),
            s_at_polar_angle(&unit, hi.to_degrees()).unwrap(),
        )
    };
    let v = check_gcc_simple(&unit, &arc(PI / 3.0, 5.0 * PI / 3.0), 50.0, 64, 32).unwrap();
    assert!(v.pass && v.max_time > 0.0 && v.max_time < 50.0, "{} {}", v.pass, v.max_time);

    let v = check_gcc_simple(&unit, &BoundaryArc::full(Boundary::Outer), 50.0, 64, 32).unwrap();
    assert!(v.pass && v.max_time <= 2.0 + 1e-12);

    let v = check_gcc_simple(&unit, &arc(PI / 8.0 - 0.05, PI / 8.0 + 0.05), 100.0, 64, 32).unwrap();
    assert!(!v.pass);
    let w = v
        .failures
        .iter()
        .find(|w| w.s == 0.0 && (w.theta - FRAC_PI_4).abs() < 1e-15)
        .expect("square orbit fails");
    assert_eq!(w.period, Some(4));
    for (k, p) in w.bounces.iter().take(5).enumerate() {
        let q = Vec2::from_angle(k as f64 * FRAC_PI_2);
        assert!((*p - q).norm() < 1e-9, "{k} {p:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]
    #[test]
    fn gamma_x0_arcs_satisfy_gcc(
        a in 1.0f64..3.0,
        ratio in 0.4f64..1.0,
        tilt in 0.0f64..PI,
        dist in 1.1f64..3.0,
        phi in 0.0f64..(2.0 * PI),
    ) {
        let curve = BoundaryCurve::ellipse(Point2::ZERO, a, a * ratio, tilt).unwrap();
        let dir = Vec2::from_angle(phi);
        let reach = curve.intersect_ray(Point2::ZERO, Dir2::new(dir), 0.0).unwrap().distance;
        let x0 = Point2::ZERO + dir * (reach * dist);
        let gamma = gamma_x0(&curve, Boundary::Outer, x0).unwrap();
        let v = check_gcc_simple(&curve, &gamma, 100.0 * a, 48, 24).unwrap();
        prop_assert!(v.pass, "{:?}", v.failures.first().map(|w| (w.s, w.theta)));
    }
}

#[test]
fn observability_examples() {
    let (sc, x0) = concentric();
    let st = construct(&sc, x0, 64).unwrap();
    let rep = check_observability(&sc, &st.gamma1, Some(&st.gamma2), 20.0, 32, 16, 8).unwrap();
    assert_eq!(rep.rows.len(), 3 * 32 * 15);
    assert!(matches!(rep.summary, Summary::AllObserved { max_time } if max_time > 0.0 && max_time < 20.0));
    assert!(rep.summary_line().starts_with("all 1440 samples observed"));

    let rep = check_observability(&sc, &st.gamma1, Some(&st.gamma2), 0.0, 8, 4, 8).unwrap();
    assert!(rep.rows.iter().all(|r| matches!(r.verdict, Verdict::Undetermined { .. })));
    assert_eq!(rep.summary, Summary::Undetermined { count: rep.rows.len() });
}

#[test]
fn figure10_has_trapped_witness() {
    let mut sc = Scenario::new(
        BoundaryCurve::ellipse(Point2::ZERO, 4.0, 2.0, 0.0).unwrap(),
        Some(circle(Point2::ZERO, 1.0)),
        1.0,
        SQRT_2,
        Observation::Angles { lo: 90.0, hi: 270.0 },
        100.0,
    )
    .unwrap();
    sc.caps.max_events = 4000;
    let gamma = observation_arc(&sc).unwrap();
    let rep = check_observability(&sc, &gamma, None, 20.0, 16, 8, 8).unwrap();
    assert!(matches!(rep.summary, Summary::Trapped { witnesses, .. } if witnesses >= 1), "{:?}", rep.summary);
    let w = rep.rows.iter().find(|r| r.verdict == Verdict::TrappedWitness).unwrap();
    // The witness cycle leaves the unobserved right half along the normal.
    assert!((w.theta - FRAC_PI_2).abs() < 1e-6 && !gamma.contains(w.s), "{w:?}");
    assert!(sc.outer.point_at(w.s).x > 0.0);
}
