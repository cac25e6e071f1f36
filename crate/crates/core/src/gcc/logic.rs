use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::optics::{Boundary, EventKind};
use crate::regions::BoundaryArc;
use crate::scenario::Scenario;
use crate::tracer::{curve, glide, RayTree, IN1, IN2, OUT1, OUT2};

/// Propagation rule between half-ray labels.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    /// Both labels are observed together (reflection, TIR, diffractive pass).
    Equiv(usize, usize),
    /// Interface rule over `{γ₁⁻, γ₂⁻, γ₁⁺, γ₂⁺}`: two observed imply all
    /// four. A missing half-ray is never observed.
    TwoOfFour([Option<usize>; 4]),
}

impl Rule {
    fn labels(&self) -> Vec<usize> {
        match self {
            Rule::Equiv(a, b) => vec![*a, *b],
            Rule::TwoOfFour(ls) => ls.iter().flatten().copied().collect(),
        }
    }

    /// Applies the rule once to a boolean labelling; true if anything changed.
    pub fn apply(&self, obs: &mut [bool]) -> bool {
        match *self {
            Rule::Equiv(a, b) => {
                if obs[a] != obs[b] {
                    obs[a] = true;
                    obs[b] = true;
                    return true;
                }
                false
            }
            Rule::TwoOfFour(ls) => {
                let present: Vec<usize> = ls.iter().flatten().copied().collect();
                if present.iter().filter(|&&l| obs[l]).count() < 2 {
                    return false;
                }
                let mut changed = false;
                for l in present {
                    changed |= !obs[l];
                    obs[l] = true;
                }
                changed
            }
        }
    }
}

/// Half-ray labels and rules extracted from a ray graph. Slots joined by a
/// segment share one label.
#[derive(Debug, Clone, Default)]
pub struct ObsGraph {
    pub n: usize,
    pub rules: Vec<Rule>,
    /// Label of each `(event, slot)`.
    pub slot_label: Vec<[Option<usize>; 4]>,
}

impl ObsGraph {
    pub fn from_tree(tree: &RayTree) -> Self {
        let mut slot_label = vec![[None; 4]; tree.events.len()];
        let mut n = 0;
        for seg in &tree.segments {
            slot_label[seg.from.0][seg.from.1] = Some(n);
            slot_label[seg.to.0][seg.to.1] = Some(n);
            n += 1;
        }
        for (i, e) in tree.events.iter().enumerate() {
            for k in 0..4 {
                // Critical events carry the two gliding half-rays in the Ω₂ slots.
                let gliding = e.kind == EventKind::CriticalGliding && (k == IN2 || k == OUT2);
                if (e.slots[k].is_some() || gliding) && slot_label[i][k].is_none() {
                    slot_label[i][k] = Some(n);
                    n += 1;
                }
            }
        }
        let mut rules = vec![];
        for (i, e) in tree.events.iter().enumerate() {
            let l = slot_label[i];
            match e.kind {
                EventKind::ReflectTransmit | EventKind::CriticalGliding => {
                    rules.push(Rule::TwoOfFour([l[IN1], l[IN2], l[OUT1], l[OUT2]]))
                }
                _ => {
                    let present: Vec<usize> = l.iter().flatten().copied().collect();
                    if let [a, b] = present[..] {
                        rules.push(Rule::Equiv(a, b));
                    }
                }
            }
        }
        ObsGraph { n, rules, slot_label }
    }

    fn rules_of(&self) -> Vec<Vec<usize>> {
        let mut by = vec![vec![]; self.n];
        for (r, rule) in self.rules.iter().enumerate() {
            for l in rule.labels() {
                by[l].push(r);
            }
        }
        by
    }
}

/// Half-ray label: `Some(t)` once observed, with the time by which the
/// observation is established.
pub type Label = Option<f64>;

#[derive(Debug, Clone)]
pub struct ObservationState {
    pub labels: Vec<Label>,
}

impl ObservationState {
    pub fn observed(&self) -> Vec<bool> {
        self.labels.iter().map(Option::is_some).collect()
    }
}

/// Seeds the half-rays meeting `Γ` non-diffractively within the horizon:
/// both sides of every outer event strictly inside `Γ` whose incidence is
/// not grazing. At a critical event each gliding half-ray is seeded when the
/// glide along `∂Ω₂` (forward or backward in time) reaches `gamma2` within
/// the horizon. A zero horizon observes nothing.
pub fn seed_observed(sc: &Scenario, tree: &RayTree, graph: &ObsGraph, gamma2: Option<&BoundaryArc>) -> Result<ObservationState> {
    let mut labels: Vec<Label> = vec![None; graph.n];
    let mut seed = |l: Option<usize>, t: f64| {
        if let Some(l) = l {
            labels[l] = Some(labels[l].map_or(t, |u| u.min(t)));
        }
    };
    if tree.horizon <= 0.0 {
        return Ok(ObservationState { labels });
    }
    for (i, e) in tree.events.iter().enumerate() {
        let t = e.time.abs();
        if t > tree.horizon {
            continue;
        }
        let l = graph.slot_label[i];
        match (e.boundary, e.kind) {
            (Boundary::Outer, _) => {
                let grazing = e.theta1.map_or(true, |th| th > std::f64::consts::FRAC_PI_2 - sc.tol.angle);
                if e.in_gamma && !grazing {
                    seed(l[IN1], t);
                    seed(l[OUT1], t);
                }
            }
            (Boundary::Inner, EventKind::CriticalGliding) => {
                let Some(g2) = gamma2 else { continue };
                let spacing = curve(sc, Boundary::Inner)?.perimeter();
                let sign = e.p.signum();
                for (slot, dir) in [(OUT2, sign), (IN2, -sign)] {
                    let g = glide(sc, Boundary::Inner, e.s, dir, tree.horizon - t, spacing, Some(g2))?;
                    if let Some(tg) = g.observed_at {
                        seed(l[slot], t + tg);
                    }
                }
            }
            _ => {}
        }
    }
    Ok(ObservationState { labels })
}

struct Item(f64, usize);

impl PartialEq for Item {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Item {}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Least fixpoint of the rules above `state`. Labels are finalised in time
/// order, so each carries the smallest time over all derivations, where a
/// derivation takes the latest of its premises.
pub fn propagate_observation(graph: &ObsGraph, state: &ObservationState) -> ObservationState {
    let by = graph.rules_of();
    let mut done: Vec<Label> = vec![None; graph.n];
    let mut heap: BinaryHeap<Item> = state
        .labels
        .iter()
        .enumerate()
        .filter_map(|(l, t)| t.map(|t| Item(t, l)))
        .collect();
    while let Some(Item(t, l)) = heap.pop() {
        if done[l].is_some() {
            continue;
        }
        done[l] = Some(t);
        for &r in &by[l] {
            match graph.rules[r] {
                Rule::Equiv(a, b) => {
                    let o = if a == l { b } else { a };
                    if done[o].is_none() {
                        heap.push(Item(t, o));
                    }
                }
                Rule::TwoOfFour(ls) => {
                    let present = ls.iter().flatten();
                    if present.clone().filter(|&&x| done[x].is_some()).count() >= 2 {
                        for &x in present.filter(|&&x| done[x].is_none()) {
                            heap.push(Item(t, x));
                        }
                    }
                }
            }
        }
    }
    ObservationState { labels: done }
}
