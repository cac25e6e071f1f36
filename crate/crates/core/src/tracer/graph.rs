//! Ray-splitting graphs grown forward and backward in time from a root germ.
//!
//! Events are identified by their boundary point and tangential slowness
//! `p = ⟨d, t⟩ / c`, which all four half-rays at an interface point share.
//! A ray reached twice (periodic orbits, rays that are both reflected and
//! transmitted images) therefore maps to one node, so the structure is a
//! graph rather than a tree.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use super::{curve, next_hit, PhasePoint};
use crate::error::{Error, Result};
use crate::geometry::{wrap_param, Dir2, Point2, TOL_TANGENCY};
use crate::optics::{classify_hit, Boundary, EventKind, Medium};
use crate::regions::{observation_arc, BoundaryArc};
use crate::scenario::Scenario;

pub const IN1: usize = 0;
pub const IN2: usize = 1;
pub const OUT1: usize = 2;
pub const OUT2: usize = 3;

const KEY_CELL: f64 = 1e-6;
const KEY_TOL: f64 = 2e-7;

/// Why a half-ray was not expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Leaf {
    /// The event sits inside `Γ`.
    HitGamma,
    TimeExpired,
    DepthExpired,
    /// Critical incidence feeds a gliding ray.
    Gliding,
    /// Numerically degenerate continuation (near-tangent chord, slot mismatch).
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlotLink {
    Open,
    Segment(usize),
    Leaf(Leaf),
}

/// A half-ray at an event.
#[derive(Debug, Clone, Copy)]
pub struct Slot {
    /// Velocity of the half-ray at the event.
    pub dir: Dir2,
    pub medium: Medium,
    pub link: SlotLink,
}

#[derive(Debug, Clone)]
pub struct EventNode {
    pub kind: EventKind,
    pub boundary: Boundary,
    pub s: f64,
    pub point: Point2,
    /// Tangential slowness.
    pub p: f64,
    /// Time at discovery, relative to the root germ.
    pub time: f64,
    /// Medium changes on the discovery path.
    pub depth: usize,
    /// Medium of the segment through which the event was discovered.
    pub arrival: Medium,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub in_gamma: bool,
    /// Indexed by `IN1`, `IN2`, `OUT1`, `OUT2`.
    pub slots: [Option<Slot>; 4],
}

impl EventNode {
    pub fn slot_count(&self) -> usize {
        self.slots.iter().flatten().count()
    }
}

/// Straight piece of ray between two events, in forward-time orientation.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub medium: Medium,
    /// `(event, slot)` where the segment leaves (an `OUT` slot).
    pub from: (usize, usize),
    /// `(event, slot)` where it arrives (an `IN` slot).
    pub to: (usize, usize),
    pub start: Point2,
    pub end: Point2,
    pub length: f64,
    pub speed: f64,
    pub t0: f64,
    pub t1: f64,
}

#[derive(Debug, Clone)]
pub struct RayTree {
    pub root: PhasePoint,
    pub root_event: usize,
    pub root_slot: usize,
    pub events: Vec<EventNode>,
    pub segments: Vec<Segment>,
    pub horizon: f64,
    pub gamma: BoundaryArc,
}

impl RayTree {
    /// All unexpanded half-rays with their reasons, in event order.
    pub fn leaves(&self) -> Vec<(usize, usize, Leaf)> {
        let mut out = vec![];
        for (i, e) in self.events.iter().enumerate() {
            for (k, slot) in e.slots.iter().enumerate() {
                if let Some(Slot {
                    link: SlotLink::Leaf(l),
                    ..
                }) = slot
                {
                    out.push((i, k, *l));
                }
            }
            if e.kind == EventKind::CriticalGliding {
                out.push((i, usize::MAX, Leaf::Gliding));
            }
        }
        out
    }

    /// One row per event: time, boundary, s, kind, θ₁, θ₂, depth.
    pub fn events_csv(&self) -> String {
        let mut out = String::from("time,boundary,s,kind,theta1,theta2,depth\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        for e in &self.events {
            let b = match e.boundary {
                Boundary::Outer => "outer",
                Boundary::Inner => "inner",
            };
            let _ = writeln!(
                out,
                "{:.12e},{b},{:.12e},{},{},{},{}",
                e.time,
                e.s,
                e.kind.label(),
                opt(e.theta1),
                opt(e.theta2),
                e.depth
            );
        }
        out
    }
}

fn out_slot(m: Medium) -> usize {
    match m {
        Medium::Outer => OUT1,
        Medium::Inner => OUT2,
    }
}

fn in_slot(m: Medium) -> usize {
    match m {
        Medium::Outer => IN1,
        Medium::Inner => IN2,
    }
}

fn is_out(slot: usize) -> bool {
    slot >= OUT1
}

/// Builds an event node at a boundary point from its tangential slowness.
fn make_event(sc: &Scenario, boundary: Boundary, s: f64, p: f64, gamma: &BoundaryArc) -> Result<EventNode> {
    let c = curve(sc, boundary)?;
    let f = c.frame_at(s)?;
    let (t, n) = (f.tangent.vec(), f.normal.vec());
    let half = |tau: f64, sign_n: f64| {
        let nu = (1.0 - tau * tau).max(0.0).sqrt();
        Slot {
            dir: Dir2::new(t * tau + n * (sign_n * nu)),
            medium: Medium::Outer,
            link: SlotLink::Open,
        }
    };
    let mut slots = [None; 4];
    let mut theta1 = None;
    let mut theta2 = None;
    let kind;
    let mut in_gamma = false;
    match boundary {
        Boundary::Outer => {
            let tau = (p * sc.c1).clamp(-1.0, 1.0);
            slots[IN1] = Some(half(tau, 1.0));
            slots[OUT1] = Some(half(tau, -1.0));
            theta1 = Some(tau.abs().asin());
            kind = EventKind::OuterReflection;
            in_gamma = gamma.contains_with_margin(s, sc.tol.geom);
        }
        Boundary::Inner => {
            let tau1 = p * sc.c1;
            let tau2 = p * sc.c2;
            let has1 = tau1.abs() <= 1.0;
            let has2 = tau2.abs() < 1.0;
            let inner_slot = |sign_n: f64| Slot {
                medium: Medium::Inner,
                ..half(tau2, sign_n)
            };
            if has1 {
                let th1 = tau1.abs().asin();
                let grazing = (std::f64::consts::FRAC_PI_2 - th1) < TOL_TANGENCY;
                theta1 = Some(th1);
                kind = classify_hit(Boundary::Inner, Medium::Outer, th1, grazing, sc.c1, sc.c2, sc.tol.angle)?;
                if kind == EventKind::Diffractive {
                    let along = Slot {
                        dir: Dir2::new(t * tau1.signum()),
                        medium: Medium::Outer,
                        link: SlotLink::Open,
                    };
                    slots[IN1] = Some(along);
                    slots[OUT1] = Some(along);
                } else {
                    slots[IN1] = Some(half(tau1, -1.0));
                    slots[OUT1] = Some(half(tau1, 1.0));
                }
                if kind == EventKind::ReflectTransmit && has2 {
                    slots[IN2] = Some(inner_slot(1.0));
                    slots[OUT2] = Some(inner_slot(-1.0));
                    theta2 = Some(tau2.abs().asin());
                }
            } else {
                // Slow inclusion beyond its critical angle: the ray stays in Ω₂.
                kind = EventKind::TotalInternalReflection;
                slots[IN2] = Some(inner_slot(1.0));
                slots[OUT2] = Some(inner_slot(-1.0));
                theta2 = Some(tau2.abs().min(1.0).asin());
            }
        }
    }
    Ok(EventNode {
        kind,
        boundary,
        s,
        point: f.point,
        p,
        time: 0.0,
        depth: 0,
        arrival: Medium::Outer,
        theta1,
        theta2,
        in_gamma,
        slots,
    })
}

struct EventIndex {
    cells: HashMap<(Boundary, i64, i64), Vec<usize>>,
    n_s: i64,
}

impl EventIndex {
    fn new() -> Self {
        EventIndex {
            cells: HashMap::new(),
            n_s: (1.0 / KEY_CELL).round() as i64,
        }
    }

    fn cell(&self, s: f64, p: f64) -> (i64, i64) {
        ((s / KEY_CELL).floor() as i64, (p / KEY_CELL).floor() as i64)
    }

    fn find(&self, events: &[EventNode], b: Boundary, s: f64, p: f64) -> Option<usize> {
        let (cs, cp) = self.cell(s, p);
        for ds in -1..=1 {
            for dp in -1..=1 {
                let key = (b, (cs + ds).rem_euclid(self.n_s), cp + dp);
                if let Some(list) = self.cells.get(&key) {
                    for &i in list {
                        let e = &events[i];
                        let w = wrap_param(e.s - s);
                        if w.min(1.0 - w) < KEY_TOL && (e.p - p).abs() < KEY_TOL {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    fn insert(&mut self, b: Boundary, s: f64, p: f64, i: usize) {
        let (cs, cp) = self.cell(s, p);
        self.cells.entry((b, cs.rem_euclid(self.n_s), cp)).or_default().push(i);
    }
}

#[derive(PartialEq)]
struct Pending {
    key: f64,
    seq: usize,
    event: usize,
    slot: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (|t|, insertion order).
        other.key.total_cmp(&self.key).then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Grows the ray graph of `p0` with the scenario's observation region.
pub fn trace(sc: &Scenario, p0: &PhasePoint, horizon: f64, depth_cap: usize, reverse: bool) -> Result<RayTree> {
    let gamma = observation_arc(sc)?;
    trace_with(sc, p0, horizon, depth_cap, reverse, &gamma)
}

/// Grows the ray graph of `p0`: outgoing half-rays are followed forward in
/// time and, with `reverse`, incoming half-rays backward in time. Expansion
/// runs in order of `|t|`, stops at `|t| > horizon`, after `depth_cap`
/// medium changes, and at outer events inside `gamma`.
pub fn trace_with(
    sc: &Scenario,
    p0: &PhasePoint,
    horizon: f64,
    depth_cap: usize,
    reverse: bool,
    gamma: &BoundaryArc,
) -> Result<RayTree> {
    if !(horizon >= 0.0) {
        return Err(Error::Validation(format!("horizon {horizon} must be non-negative")));
    }
    let root_germ = project_root(sc, p0)?;
    let boundary = root_germ.boundary.expect("projected root lies on a boundary");
    let frame = curve(sc, boundary)?.frame_at(root_germ.s)?;
    let p = root_germ.dir.dot(frame.tangent.vec()) / sc.speed(root_germ.medium);
    let mut root = make_event(sc, boundary, root_germ.s, p, gamma)?;
    root.time = root_germ.time - p0.time;
    root.arrival = root_germ.medium;
    let root_slot = out_slot(root_germ.medium);
    match root.slots[root_slot] {
        Some(s) if (s.dir.vec() - root_germ.dir.vec()).norm() < 1e-6 => {}
        _ => {
            return Err(Error::Validation(format!(
                "root direction does not point into {:?} at s = {}",
                root_germ.medium, root_germ.s
            )))
        }
    }

    let mut tree = RayTree {
        root: *p0,
        root_event: 0,
        root_slot,
        events: vec![],
        segments: vec![],
        horizon,
        gamma: *gamma,
    };
    let mut index = EventIndex::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    index.insert(root.boundary, root.s, root.p, 0);
    let root_time = root.time;
    tree.events.push(root);
    let mut push_slots = |heap: &mut BinaryHeap<Pending>, tree: &mut RayTree, e: usize| {
        let ev = &mut tree.events[e];
        for k in 0..4 {
            let Some(slot) = ev.slots[k].as_mut() else { continue };
            if slot.link != SlotLink::Open {
                continue;
            }
            if !is_out(k) && !reverse {
                continue;
            }
            if ev.in_gamma && !(e == 0 && k == root_slot) {
                slot.link = SlotLink::Leaf(Leaf::HitGamma);
                continue;
            }
            heap.push(Pending {
                key: ev.time.abs(),
                seq,
                event: e,
                slot: k,
            });
            seq += 1;
        }
    };
    push_slots(&mut heap, &mut tree, 0);
    if root_time.abs() > horizon {
        for slot in tree.events[0].slots.iter_mut().flatten() {
            slot.link = SlotLink::Leaf(Leaf::TimeExpired);
        }
        heap.clear();
    }

    while let Some(Pending { event: e, slot: k, .. }) = heap.pop() {
        let ev = &tree.events[e];
        let slot = ev.slots[k].expect("queued slot exists");
        let (ev_time, ev_point, ev_depth, ev_arrival) = (ev.time, ev.point, ev.depth, ev.arrival);
        if slot.link != SlotLink::Open {
            continue;
        }
        let m = slot.medium;
        let depth = ev_depth + usize::from(m != ev_arrival);
        let set = |tree: &mut RayTree, link| tree.events[e].slots[k].as_mut().unwrap().link = link;
        if depth > depth_cap {
            set(&mut tree, SlotLink::Leaf(Leaf::DepthExpired));
            continue;
        }
        let forward = is_out(k);
        let travel = if forward { slot.dir } else { -slot.dir };
        let hit = match next_hit(sc, ev_point, travel, m) {
            Ok(h) => h,
            Err(Error::StuckRay { .. }) => {
                set(&mut tree, SlotLink::Leaf(Leaf::Degenerate));
                continue;
            }
            Err(err) => return Err(err),
        };
        let dt = hit.distance / sc.speed(m);
        let t_new = if forward { ev_time + dt } else { ev_time - dt };
        if t_new.abs() > horizon {
            set(&mut tree, SlotLink::Leaf(Leaf::TimeExpired));
            continue;
        }
        let p_new = slot.dir.dot(hit.tangent.vec()) / sc.speed(m);
        let other_slot = if forward { in_slot(m) } else { out_slot(m) };
        let (b_idx, fresh) = match index.find(&tree.events, hit.boundary, hit.s, p_new) {
            Some(i) => (i, false),
            None => {
                let mut node = make_event(sc, hit.boundary, hit.s, p_new, gamma)?;
                node.time = t_new;
                node.depth = depth;
                node.arrival = m;
                let i = tree.events.len();
                if i >= sc.caps.max_events {
                    return Err(Error::EventBudget(sc.caps.max_events));
                }
                index.insert(hit.boundary, hit.s, p_new, i);
                tree.events.push(node);
                (i, true)
            }
        };
        let target = tree.events[b_idx].slots[other_slot];
        let usable = match target {
            Some(s) => s.link == SlotLink::Open || matches!(s.link, SlotLink::Leaf(Leaf::HitGamma)),
            None => false,
        };
        if !usable {
            set(&mut tree, SlotLink::Leaf(Leaf::Degenerate));
            continue;
        }
        let (from, to, t0) = if forward {
            ((e, k), (b_idx, other_slot), ev_time)
        } else {
            ((b_idx, other_slot), (e, k), t_new)
        };
        let (start, end) = (tree.events[from.0].point, tree.events[to.0].point);
        let seg = Segment {
            medium: m,
            from,
            to,
            start,
            end,
            length: hit.distance,
            speed: sc.speed(m),
            t0,
            t1: t0 + dt,
        };
        let si = tree.segments.len();
        tree.segments.push(seg);
        set(&mut tree, SlotLink::Segment(si));
        tree.events[b_idx].slots[other_slot].as_mut().unwrap().link = SlotLink::Segment(si);
        if fresh {
            push_slots(&mut heap, &mut tree, b_idx);
        }
    }
    Ok(tree)
}

/// Interior starts are moved back along their ray to the boundary they came from.
fn project_root(sc: &Scenario, p0: &PhasePoint) -> Result<PhasePoint> {
    if p0.boundary.is_some() {
        let b = p0.boundary.unwrap();
        let c = curve(sc, b)?;
        return Ok(PhasePoint {
            position: c.point_at(p0.s),
            ..*p0
        });
    }
    let hit = next_hit(sc, p0.position, -p0.dir, p0.medium)?;
    Ok(PhasePoint {
        boundary: Some(hit.boundary),
        s: hit.s,
        position: hit.point,
        dir: p0.dir,
        medium: p0.medium,
        time: p0.time - hit.distance / sc.speed(p0.medium),
    })
}
