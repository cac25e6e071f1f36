//! Observability verification: boolean propagation of observed half-rays
//! over ray-splitting graphs, a single-medium GCC sampler and the sampled
//! two-medium verdict.

mod logic;

pub use logic::{propagate_observation, seed_observed, Label, ObsGraph, ObservationState, Rule};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::escape::{find_trapped_rays, TrappedOrbit};
use crate::geometry::{BoundaryCurve, Dir2, Point2};
use crate::optics::{Boundary, Medium};
use crate::regions::BoundaryArc;
use crate::scenario::{Observation, Scenario};
use crate::tracer::{curve, next_hit, trace_with, Leaf, PhasePoint, RayTree};

/// Ray of a failed single-medium sample.
#[derive(Debug, Clone)]
pub struct GccWitness {
    pub s: f64,
    /// Angle from the counter-clockwise tangent.
    pub theta: f64,
    /// Bounce points, starting at the launch point.
    pub bounces: Vec<Point2>,
    /// Bounces per period when the orbit closes up.
    pub period: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct GccVerdict {
    pub pass: bool,
    /// Largest first hitting time of `Γ` over the passing samples.
    pub max_time: f64,
    pub samples: usize,
    pub failures: Vec<GccWitness>,
}

const WITNESS_BOUNCES: usize = 16;
const CLOSE_TOL: f64 = 1e-9;
/// Minimum seed grid of the trapped-orbit search.
const TRAP_GRID: usize = 64;

/// Grid `s_i = i/n_s`, `θ_j = jπ/n_θ` for `j = 1..n_θ−1`.
fn grid(n_s: usize, n_theta: usize) -> Vec<(f64, f64)> {
    (0..n_s)
        .flat_map(|i| (1..n_theta).map(move |j| (i as f64 / n_s as f64, j as f64 * std::f64::consts::PI / n_theta as f64)))
        .collect()
}

fn gcc_sample(sc: &Scenario, gamma: &BoundaryArc, horizon: f64, s: f64, theta: f64) -> Result<std::result::Result<f64, GccWitness>> {
    let f = sc.outer.frame_at(s)?;
    let mut dir = Dir2::new(f.tangent.vec() * theta.cos() - f.normal.vec() * theta.sin());
    let mut pos = f.point;
    let mut t = 0.0;
    let mut bounces = vec![pos];
    loop {
        let h = next_hit(sc, pos, dir, Medium::Outer)?;
        t += h.distance / sc.c1;
        if t > horizon {
            break;
        }
        if !h.grazing && gamma.contains_with_margin(h.s, sc.tol.geom) {
            return Ok(Ok(t));
        }
        dir = crate::optics::reflect(dir, h.normal);
        pos = h.point;
        if bounces.len() <= WITNESS_BOUNCES {
            bounces.push(pos);
        }
    }
    let period = bounces[1..].iter().position(|p| (*p - bounces[0]).norm() < CLOSE_TOL).map(|k| k + 1);
    Ok(Err(GccWitness { s, theta, bounces, period }))
}

/// Samples launch points and angles on a single-medium table and checks
/// that every ray meets `Γ` non-diffractively within `horizon`. The launch
/// bounce itself does not count.
pub fn check_gcc_simple(
    outer: &BoundaryCurve,
    gamma: &BoundaryArc,
    horizon: f64,
    n_s: usize,
    n_theta: usize,
) -> Result<GccVerdict> {
    if gamma.boundary != Boundary::Outer {
        return Err(Error::Validation("GCC region must lie on the outer boundary".into()));
    }
    let sc = Scenario::new(outer.clone(), None, 1.0, 1.0, Observation::Full, horizon)?;
    let pts = grid(n_s.max(1), n_theta.max(2));
    let res: Vec<_> = pts
        .par_iter()
        .map(|&(s, th)| gcc_sample(&sc, gamma, horizon, s, th))
        .collect::<Result<_>>()?;
    let mut max_time: f64 = 0.0;
    let mut failures = vec![];
    for r in res {
        match r {
            Ok(t) => max_time = max_time.max(t),
            Err(w) => failures.push(w),
        }
    }
    Ok(GccVerdict {
        pass: failures.is_empty(),
        max_time,
        samples: pts.len(),
        failures,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Observed { time: f64 },
    /// Truncated before the root could be observed.
    Undetermined { time_limited: bool, depth_limited: bool },
    /// Launch state of a certified trapped orbit that is not observed.
    TrappedWitness,
    /// Tracing failed (event budget, numerical breakdown).
    Failed(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Observed { .. } => "observed",
            Verdict::Undetermined { .. } => "undetermined",
            Verdict::TrappedWitness => "trapped_witness",
            Verdict::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleRow {
    pub boundary: Boundary,
    pub medium: Medium,
    pub s: f64,
    pub theta: f64,
    pub verdict: Verdict,
    /// Largest number of medium changes reached in the graph.
    pub depth_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Summary {
    AllObserved { max_time: f64 },
    Undetermined { count: usize },
    Trapped { witnesses: usize, undetermined: usize },
}

#[derive(Debug, Clone)]
pub struct ObservabilityReport {
    pub rows: Vec<SampleRow>,
    pub summary: Summary,
    /// Periodic orbits behind the trapped-witness rows, in row order.
    pub orbits: Vec<TrappedOrbit>,
}

impl ObservabilityReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("boundary,medium,s,theta,verdict,time,depth\n");
        for r in &self.rows {
            let time = match r.verdict {
                Verdict::Observed { time } => format!("{time:.9e}"),
                _ => String::new(),
            };
            out.push_str(&format!(
                "{},{},{:.9e},{:.9e},{},{},{}\n",
                boundary_label(r.boundary),
                medium_label(r.medium),
                r.s,
                r.theta,
                r.verdict.label(),
                time,
                r.depth_used
            ));
        }
        out
    }

    pub fn summary_line(&self) -> String {
        let n = self.rows.len();
        match self.summary {
            Summary::AllObserved { max_time } => format!("all {n} samples observed, max time {max_time:.6}"),
            Summary::Undetermined { count } => format!("{count} of {n} samples undetermined"),
            Summary::Trapped { witnesses, undetermined } => {
                format!("{witnesses} trapped witnesses, {undetermined} of {n} samples undetermined")
            }
        }
    }
}

fn boundary_label(b: Boundary) -> &'static str {
    match b {
        Boundary::Outer => "outer",
        Boundary::Inner => "inner",
    }
}

fn medium_label(m: Medium) -> &'static str {
    match m {
        Medium::Outer => "outer",
        Medium::Inner => "inner",
    }
}

/// Root verdict of one graph: the root germ is observed once its half-ray is.
/// `gamma2` is an inner arc already known to be observed (from the arc
/// construction); only gliding rays use it.
pub fn verdict_of(sc: &Scenario, tree: &RayTree, gamma2: Option<&BoundaryArc>) -> Result<Verdict> {
    let graph = ObsGraph::from_tree(tree);
    let state = propagate_observation(&graph, &seed_observed(sc, tree, &graph, gamma2)?);
    let root = graph.slot_label[tree.root_event][tree.root_slot].expect("root slot exists");
    Ok(match state.labels[root] {
        Some(time) => Verdict::Observed { time },
        None => {
            let leaves = tree.leaves();
            Verdict::Undetermined {
                time_limited: leaves.iter().any(|l| l.2 == Leaf::TimeExpired),
                depth_limited: leaves.iter().any(|l| l.2 == Leaf::DepthExpired),
            }
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn sample(sc: &Scenario, gamma: &BoundaryArc, gamma2: Option<&BoundaryArc>, horizon: f64, depth_cap: usize, b: Boundary, m: Medium, s: f64, theta: f64) -> SampleRow {
    let run = || -> Result<(Verdict, usize)> {
        let f = curve(sc, b)?.frame_at(s)?;
        // Normal facing the medium the germ enters.
        let into = match (b, m) {
            (Boundary::Outer, _) | (Boundary::Inner, Medium::Inner) => -f.normal.vec(),
            (Boundary::Inner, Medium::Outer) => f.normal.vec(),
        };
        let dir = Dir2::new(f.tangent.vec() * theta.cos() + into * theta.sin());
        let p0 = PhasePoint::on_boundary(sc, b, s, dir, m)?;
        // Labels only grow with the horizon, so the graph is grown in doubling
        // horizons and the first observed verdict is final.
        let mut h = (sc.outer.diameter() / sc.c1).min(horizon);
        loop {
            let tree = trace_with(sc, &p0, h, depth_cap, true, gamma)?;
            let depth = tree.events.iter().map(|e| e.depth).max().unwrap_or(0);
            let v = verdict_of(sc, &tree, gamma2)?;
            if h >= horizon || matches!(v, Verdict::Observed { .. }) {
                return Ok((v, depth));
            }
            h = (2.0 * h).min(horizon);
        }
    };
    let (verdict, depth_used) = run().unwrap_or_else(|e| (Verdict::Failed(e.to_string()), 0));
    SampleRow {
        boundary: b,
        medium: m,
        s,
        theta,
        verdict,
        depth_used,
    }
}

/// Sampled observability verdict. Phase points cover the outer boundary and
/// both sides of the inclusion on the `n_s × n_θ` grid; each is traced
/// forward and backward, seeded from `Γ` and propagated. If anything stays
/// unobserved, the trapped-orbit search runs and every orbit it certifies
/// outside `Γ` is appended as a witness row. `gamma2` feeds gliding rays
/// as in [`verdict_of`].
pub fn check_observability(
    sc: &Scenario,
    gamma: &BoundaryArc,
    gamma2: Option<&BoundaryArc>,
    horizon: f64,
    n_s: usize,
    n_theta: usize,
    depth_cap: usize,
) -> Result<ObservabilityReport> {
    if gamma.boundary != Boundary::Outer {
        return Err(Error::Validation("observation region must lie on the outer boundary".into()));
    }
    let mut families = vec![(Boundary::Outer, Medium::Outer)];
    if sc.inner.is_some() {
        families.push((Boundary::Inner, Medium::Outer));
        families.push((Boundary::Inner, Medium::Inner));
    }
    let pts = grid(n_s.max(1), n_theta.max(2));
    let jobs: Vec<_> = families
        .iter()
        .flat_map(|&(b, m)| pts.iter().map(move |&(s, th)| (b, m, s, th)))
        .collect();
    let mut rows: Vec<SampleRow> = jobs
        .par_iter()
        .map(|&(b, m, s, th)| sample(sc, gamma, gamma2, horizon, depth_cap, b, m, s, th))
        .collect();
    let undetermined = rows.iter().filter(|r| !matches!(r.verdict, Verdict::Observed { .. })).count();
    if undetermined == 0 {
        let max_time = rows
            .iter()
            .map(|r| match r.verdict {
                Verdict::Observed { time } => time,
                _ => 0.0,
            })
            .fold(0.0, f64::max);
        return Ok(ObservabilityReport {
            rows,
            summary: Summary::AllObserved { max_time },
            orbits: vec![],
        });
    }
    let mut orbits = vec![];
    if sc.inner.is_some() {
        for orbit in find_trapped_rays(sc, gamma, None, horizon, n_s.max(TRAP_GRID), n_theta.max(TRAP_GRID))? {
            let Some((s, angle)) = orbit.launch(sc) else { continue };
            let theta = std::f64::consts::FRAC_PI_2 - angle;
            let mut row = sample(sc, gamma, gamma2, horizon, depth_cap, Boundary::Outer, Medium::Outer, s, theta);
            if matches!(row.verdict, Verdict::Undetermined { .. }) {
                row.verdict = Verdict::TrappedWitness;
                orbits.push(orbit);
                rows.push(row);
            }
        }
    }
    let summary = if !orbits.is_empty() {
        Summary::Trapped {
            witnesses: orbits.len(),
            undetermined,
        }
    } else {
        Summary::Undetermined { count: undetermined }
    };
    Ok(ObservabilityReport { rows, summary, orbits })
}

#[cfg(test)]
mod tests;
