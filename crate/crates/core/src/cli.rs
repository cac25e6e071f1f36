//! Subcommand dispatch and artifact emission.
//!
//! Every subcommand writes `report.txt` (one `key: value` per line), one or
//! more CSV files and an SVG figure into the output directory. Exit codes:
//! 0 success or all observed, 1 usage or validation error, 2 undetermined,
//! 3 trapped witness.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ellipse_lab::{
    both_sides_gcc, classify_caustic, focal_convergence, is_gamma_x0_form, lemel_arc, orbit, two_sided_lemel_start,
    EllipseFrame,
};
use crate::error::{Error, Result};
use crate::escape::{check_thmtrap_hypothesis, find_trapped_rays, is_uniformly_escaping, TrappedOrbit};
use crate::gcc::{check_gcc_simple, check_observability, GccVerdict, Summary};
use crate::geometry::{Dir2, Point2};
use crate::optics::Boundary;
use crate::regions::{construct, observation_arc, s_at_polar_angle, witness_x02, BoundaryArc, ConstructionState};
use crate::scenario::{parse_scenario, Observation, Scenario};
use crate::svg::Scene;
use crate::tracer::{trace, PhasePoint};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNDETERMINED: i32 = 2;
pub const EXIT_TRAPPED: i32 = 3;

/// Arc-length step of the drift-map scan.
const UEG_STEP: f64 = 1e-3;
const FOCAL_BOUNCES: usize = 200;
const PORTRAIT_ORBITS: usize = 16;
const PORTRAIT_BOUNCES: usize = 200;
const DRAWN_FAILURES: usize = 8;

#[derive(Debug, Parser)]
#[command(name = "raysplit", version, about = "Two-medium billiards and boundary observability checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Trace the ray tree of the scenario's start ray.
    Trace(CommonArgs),
    /// Iterate the inner/outer observation-region construction.
    Construct(CommonArgs),
    /// Scan the drift map along the unobserved inner arc.
    CheckUeg(CommonArgs),
    /// Search for periodic rays avoiding the observation regions.
    CheckTrap(CommonArgs),
    /// Sample the geometric control condition for a single-medium table.
    CheckGcc(CommonArgs),
    /// Sample boundary observability over the full two-medium dynamics.
    CheckObs(CommonArgs),
    /// Caustics, focal orbits and lemma arcs in an elliptical table.
    Ellipse(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Trace,
    Construct,
    CheckUeg,
    CheckTrap,
    CheckGcc,
    CheckObs,
    Ellipse,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Trace => "trace",
            Kind::Construct => "construct",
            Kind::CheckUeg => "check-ueg",
            Kind::CheckTrap => "check-trap",
            Kind::CheckGcc => "check-gcc",
            Kind::CheckObs => "check-obs",
            Kind::Ellipse => "ellipse",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Command-line and environment overrides applied on top of the scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Default, Args)]
pub struct Overrides {
    /// Sampling grid as `N_SxN_THETA`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    #[arg(long, env = "RAYSPLIT_DEPTH_CAP")]
    pub depth: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "RAYSPLIT_MAX_EVENTS")]
    pub max_events: Option<usize>,
    #[arg(long, env = "RAYSPLIT_MAX_ITER")]
    pub max_iter: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, sc: &mut Scenario) -> Result<()> {
        if let Some((n_s, n_theta)) = self.grid {
            sc.sampling.n_s = n_s;
            sc.sampling.n_theta = n_theta;
        }
        if let Some(d) = self.depth {
            sc.caps.depth_cap = d;
        }
        if let Some(t) = self.horizon {
            sc.horizon = t;
        }
        if let Some(s) = self.seed {
            sc.sampling.seed = s;
        }
        if let Some(m) = self.max_events {
            sc.caps.max_events = m;
        }
        if let Some(m) = self.max_iter {
            sc.caps.max_iter = m;
        }
        sc.validate()
    }
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid `{s}` is not of the form NxM"))?;
    let n = |t: &str| {
        t.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| format!("grid size `{t}` is not a positive integer"))
    };
    Ok((n(a)?, n(b)?))
}

impl Command {
    pub fn split(self) -> (Kind, CommonArgs) {
        match self {
            Command::Trace(a) => (Kind::Trace, a),
            Command::Construct(a) => (Kind::Construct, a),
            Command::CheckUeg(a) => (Kind::CheckUeg, a),
            Command::CheckTrap(a) => (Kind::CheckTrap, a),
            Command::CheckGcc(a) => (Kind::CheckGcc, a),
            Command::CheckObs(a) => (Kind::CheckObs, a),
            Command::Ellipse(a) => (Kind::Ellipse, a),
        }
    }
}

/// Artifacts of one run, held in memory until written.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.0 == name).map(|f| f.1.as_str())
    }
}

/// Parses, overrides and runs; prints errors and returns the exit code.
pub fn main_with(cli: Cli) -> i32 {
    let (kind, args) = cli.command.split();
    let path = &args.scenario;
    let res = std::fs::read_to_string(path)
        .map_err(Error::from)
        .and_then(|text| parse_scenario(&text))
        .and_then(|mut sc| {
            args.overrides.apply(&mut sc)?;
            Ok(sc)
        })
        .and_then(|sc| run(kind, &sc, &args.out));
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            EXIT_USAGE
        }
    }
}

/// Runs `kind` on `sc` and writes the artifacts into `out_dir`.
pub fn run(kind: Kind, sc: &Scenario, out_dir: &Path) -> Result<i32> {
    let outcome = execute(kind, sc)?;
    std::fs::create_dir_all(out_dir)?;
    for (name, text) in &outcome.files {
        std::fs::write(out_dir.join(name), text)?;
    }
    Ok(outcome.code)
}

pub fn execute(kind: Kind, sc: &Scenario) -> Result<Outcome> {
    let mut report = format!("subcommand: {}\n", kind.name());
    let (code, mut files) = match kind {
        Kind::Trace => run_trace(sc, &mut report)?,
        Kind::Construct => run_construct(sc, &mut report)?,
        Kind::CheckUeg => run_ueg(sc, &mut report)?,
        Kind::CheckTrap => run_trap(sc, &mut report)?,
        Kind::CheckGcc => run_gcc(sc, &mut report)?,
        Kind::CheckObs => run_obs(sc, &mut report)?,
        Kind::Ellipse => run_ellipse(sc, &mut report)?,
    };
    let _ = writeln!(report, "exit: {code}");
    files.insert(0, ("report.txt".to_string(), report));
    Ok(Outcome { code, files })
}

type Files = Vec<(String, String)>;

fn base_scene(sc: &Scenario, gamma: &BoundaryArc) -> Scene {
    let mut scene = Scene::framed(&sc.outer);
    scene.curve(&sc.outer, "black");
    if let Some(inner) = &sc.inner {
        scene.curve(inner, "gray");
    }
    if !gamma.is_empty() {
        scene.arc(&sc.outer, gamma, "blue");
    }
    scene
}

fn construction(sc: &Scenario) -> Result<Option<ConstructionState>> {
    match (sc.observation.clone(), sc.inner.is_some()) {
        (Observation::Point(x0), true) => construct(sc, x0, sc.caps.max_iter).map(Some),
        _ => Ok(None),
    }
}

/// `Γ₂` from the construction when the observation is a point; otherwise the
/// inner arc named by the same angles, parameters or full range as `Γ`.
fn inner_region(sc: &Scenario, built: Option<&ConstructionState>) -> Result<BoundaryArc> {
    if let Some(st) = built {
        return Ok(st.gamma2);
    }
    let inner = sc.inner()?;
    Ok(match sc.observation {
        Observation::Angles { lo, hi } => {
            BoundaryArc::new(Boundary::Inner, s_at_polar_angle(inner, lo)?, s_at_polar_angle(inner, hi)?)
        }
        Observation::Arc { lo, hi } => BoundaryArc::new(Boundary::Inner, lo, hi),
        Observation::Full => BoundaryArc::full(Boundary::Inner),
        Observation::Point(_) => unreachable!("point observations are constructed"),
    })
}

fn arc_line(a: &BoundaryArc) -> String {
    if a.full {
        "full".into()
    } else {
        format!("{:.12} {:.12}", a.lo, a.hi)
    }
}

fn orbit_points(o: &TrappedOrbit) -> Vec<Point2> {
    o.events.iter().map(|e| e.point).collect()
}

fn run_trace(sc: &Scenario, report: &mut String) -> Result<(i32, Files)> {
    let start = sc
        .start
        .ok_or_else(|| Error::Validation("trace needs a [start] section".into()))?;
    let dir = Dir2::try_new(start.direction)
        .ok_or_else(|| Error::Validation("start direction must be nonzero".into()))?;
    let p0 = PhasePoint::interior(start.position, dir, start.medium, 0.0);
    let tree = trace(sc, &p0, sc.horizon, sc.caps.depth_cap, false)?;
    let _ = writeln!(report, "horizon: {}", sc.horizon);
    let _ = writeln!(report, "events: {}", tree.events.len());
    let _ = writeln!(report, "segments: {}", tree.segments.len());
    let _ = writeln!(report, "leaves: {}", tree.leaves().len());
    let mut scene = base_scene(sc, &tree.gamma);
    for seg in &tree.segments {
        scene.polyline(vec![seg.start, seg.end], "red");
    }
    scene.point(start.position, "green");
    Ok((
        EXIT_OK,
        vec![("events.csv".into(), tree.events_csv()), ("trace.svg".into(), scene.render())],
    ))
}

fn run_construct(sc: &Scenario, report: &mut String) -> Result<(i32, Files)> {
    if !matches!(sc.observation, Observation::Point(_)) {
        return Err(Error::Validation("construct needs a point observation".into()));
    }
    let st = construction(sc)?.ok_or_else(|| Error::Validation("construct needs an inner curve".into()))?;
    let _ = writeln!(report, "iterations: {}", st.n);
    let _ = writeln!(report, "termination: {}", st.reason.label());
    let _ = writeln!(report, "degenerate: {} {}", st.degenerate[0], st.degenerate[1]);
    let _ = writeln!(report, "gamma_x0: {}", arc_line(&st.gamma_x0));
    let _ = writeln!(report, "gamma1: {}", arc_line(&st.gamma1));
    let _ = writeln!(report, "gamma2: {}", arc_line(&st.gamma2));
    match witness_x02(sc, &st.gamma1, &st.gamma2) {
        Ok(w) => {
            let _ = writeln!(report, "witness_x02: {:.12} {:.12}", w.x, w.y);
        }
        Err(e) => {
            let _ = writeln!(report, "witness_x02: none ({e})");
        }
    }
    let mut csv = String::from("n,gamma1_lo,gamma1_hi,gamma2_lo,gamma2_hi,line_hit_plus,line_hit_minus\n");
    let inner = sc.inner()?;
    let mut scene = Scene::framed(&sc.outer);
    scene.curve(&sc.outer, "black");
    scene.curve(inner, "gray");
    for it in &st.history {
        let _ = writeln!(
            csv,
            "{},{:.12},{:.12},{:.12},{:.12},{},{}",
            it.n, it.gamma1.lo, it.gamma1.hi, it.gamma2.lo, it.gamma2.hi, it.line_hit[0], it.line_hit[1]
        );
        scene.arc(&sc.outer, &it.gamma1, "blue");
        scene.arc(inner, &it.gamma2, "orange");
    }
    Ok((
        EXIT_OK,
        vec![("construction.csv".into(), csv), ("construction.svg".into(), scene.render())],
    ))
}

fn run_ueg(sc: &Scenario, report: &mut String) -> Result<(i32, Files)> {
    let built = construction(sc)?;
    let g2 = inner_region(sc, built.as_ref())?;
    let prof = is_uniformly_escaping(sc, &g2, UEG_STEP)?;
    let _ = writeln!(report, "gamma2: {}", arc_line(&g2));
    let _ = writeln!(report, "samples: {}", prof.samples.len());
    let _ = writeln!(report, "uniformly_escaping: {}", prof.uniformly_escaping);
    let _ = writeln!(report, "violations: {}", prof.violations.len());
    let _ = writeln!(report, "stable_under_halving: {}", prof.stable_under_halving);
    let mut scene = base_scene(sc, &observation_arc(sc)?);
    scene.arc(sc.inner()?, &g2, "orange");
    let code = if prof.uniformly_escaping { EXIT_OK } else { EXIT_UNDETERMINED };
    Ok((code, vec![("escape.csv".into(), prof.csv()), ("escape.svg".into(), scene.render())]))
}

fn run_trap(sc: &Scenario, report: &mut String) -> Result<(i32, Files)> {
    let gamma = observation_arc(sc)?;
    let built = construction(sc)?;
    let g2 = inner_region(sc, built.as_ref())?;
    let (n_s, n_theta) = (sc.sampling.n_s, sc.sampling.n_theta);
    let orbits = find_trapped_rays(sc, &gamma, built.as_ref().map(|b| &b.gamma2), sc.horizon, n_s, n_theta)?;
    let thm = check_thmtrap_hypothesis(sc, &gamma, &g2, n_s, n_theta)?;
    let _ = writeln!(report, "trapped_orbits: {}", orbits.len());
    let mut csv = String::from("orbit,k,boundary,s,x,y,theta\n");
    let mut scene = base_scene(sc, &gamma);
    scene.arc(sc.inner()?, &g2, "orange");
    for (i, o) in orbits.iter().enumerate() {
        let _ = writeln!(
            report,
            "orbit {i}: events {} period_length {:.12} period_time {:.12} residual {:.3e} mechanism {:?}",
            o.events.len(),
            o.period_length,
            o.period_time,
            o.residual,
            o.mechanism
        );
        for (k, e) in o.events.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{i},{k},{},{:.12},{:.12},{:.12},{:.12}",
                boundary_name(e.boundary),
                e.s,
                e.point.x,
                e.point.y,
                e.theta
            );
        }
        scene.polyline(orbit_points(o), "red");
    }
    let _ = writeln!(report, "thmtrap_holds: {}", thm.holds);
    let _ = writeln!(report, "thmtrap_checked: {}", thm.checked);
    let _ = writeln!(report, "thmtrap_counterexamples: {}", thm.counterexamples.len());
    let code = if orbits.is_empty() { EXIT_OK } else { EXIT_TRAPPED };
    Ok((code, vec![("orbits.csv".into(), csv), ("orbits.svg".into(), scene.render())]))
}

fn boundary_name(b: Boundary) -> &'static str {
    match b {
        Boundary::Outer => "outer",
        Boundary::Inner => "inner",
    }
}

fn gcc_lines(report: &mut String, key: &str, v: &GccVerdict) {
    let _ = writeln!(report, "{key}_pass: {}", v.pass);
    let _ = writeln!(report, "{key}_samples: {}", v.samples);
    let _ = writeln!(report, "{key}_failures: {}", v.failures.len());
    let _ = writeln!(report, "{key}_max_time: {:.9}", v.max_time);
}

fn gcc_csv(v: &GccVerdict) -> String {
    let mut csv = String::from("s,theta,period,bounces\n");
    for w in &v.failures {
        let period = w.period.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{:.12},{:.12},{period},{}", w.s, w.theta, w.bounces.len());
    }
    csv
}

fn run_gcc(sc: &Scenario, report: &mut String) -> Result<(i32, Files)> {
    if sc.inner.is_some() {
        return Err(Error::Validation("check-gcc needs a scenario without an inner curve".into()));
    }
    let gamma = observation_arc(sc)?;
    let v = check_gcc_simple(&sc.outer, &gamma, sc.horizon, sc.sampling.n_s, sc.sampling.n_theta)?;
    gcc_lines(report, "gcc", &v);
    let mut scene = base_scene(sc, &gamma);
    for w in v.failures.iter().filter(|w| w.period.is_some()).take(DRAWN_FAILURES) {
        scene.polyline(w.bounces.clone(), "red");
    }
    let code = if v.pass {
        EXIT_OK
    } else if v.failures.iter().any(|w| w.period.is_some()) {
        EXIT_TRAPPED
    } else {
        EXIT_UNDETERMINED
    };
    Ok((code, vec![("gcc.csv".into(), gcc_csv(&v)), ("gcc.svg".into(), scene.render())]))
}

fn run_obs(sc: &Scenario, report: &mut String) -> Result<(i32, Files)> {
    let built = construction(sc)?;
    let gamma = match &built {
        Some(st) => st.gamma1,
        None => observation_arc(sc)?,
    };
    let g2 = built.as_ref().map(|b| b.gamma2);
    let rep = check_observability(
        sc,
        &gamma,
        g2.as_ref(),
        sc.horizon,
        sc.sampling.n_s,
        sc.sampling.n_theta,
        sc.caps.depth_cap,
    )?;
    let _ = writeln!(report, "samples: {}", rep.rows.len());
    let _ = writeln!(report, "summary: {}", rep.summary_line());
    let mut scene = base_scene(sc, &gamma);
    if let (Some(g2), Some(inner)) = (g2, &sc.inner) {
        scene.arc(inner, &g2, "orange");
    }
    for o in &rep.orbits {
        scene.polyline(orbit_points(o), "red");
    }
    let code = match rep.summary {
        Summary::AllObserved { .. } => EXIT_OK,
        Summary::Undetermined { .. } => EXIT_UNDETERMINED,
        Summary::Trapped { .. } => EXIT_TRAPPED,
    };
    Ok((
        code,
        vec![("observability.csv".into(), rep.csv()), ("observability.svg".into(), scene.render())],
    ))
}

fn run_ellipse(sc: &Scenario, report: &mut String) -> Result<(i32, Files)> {
    if sc.inner.is_some() {
        return Err(Error::Validation("ellipse needs a scenario without an inner curve".into()));
    }
    let table = &sc.outer;
    let frame = EllipseFrame::of(table)?;
    let tol = sc.tol.geom;
    let _ = writeln!(report, "semi_axes: {} {}", frame.a, frame.b);
    let gamma = observation_arc(sc)?;
    match is_gamma_x0_form(table, &gamma, 1e-8)? {
        Some(x0) => {
            let _ = writeln!(report, "gamma_x0_form: {:.12} {:.12}", x0.x, x0.y);
        }
        None => {
            let _ = writeln!(report, "gamma_x0_form: none");
        }
    }
    let mut scene = base_scene(sc, &gamma);

    // Phase portrait from seeded random chords.
    let mut rng = ChaCha8Rng::seed_from_u64(sc.sampling.seed);
    let mut csv = String::from("orbit,t,direction,class\n");
    for i in 0..PORTRAIT_ORBITS {
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let start = frame.at(t);
        let target = frame.at(t + rng.gen_range(0.2..std::f64::consts::TAU - 0.2));
        let dir = Dir2::new(target - start);
        let pts = orbit(table, start, dir, PORTRAIT_BOUNCES)?;
        let class = classify_caustic(table, pts[0], pts[1], tol)?;
        let _ = writeln!(csv, "{i},{t:.12},{:.12},{}", dir.angle(), class.label());
        if i < 4 {
            scene.polyline(pts.into_iter().take(40).collect(), "lightgray");
        }
    }

    let top = frame.to_world(Point2::new(0.0, frame.b));
    let run = focal_convergence(table, top, FOCAL_BOUNCES)?;
    let last = frame.to_local(*run.points.last().expect("focal run has points"));
    let _ = writeln!(report, "focal_bounces: {FOCAL_BOUNCES}");
    let _ = writeln!(report, "focal_final_abs_y: {:.3e}", last.y.abs());
    scene.polyline(run.points.iter().take(12).copied().collect(), "purple");
    let (f1, f2) = frame.foci();
    scene.point(f1, "black");
    scene.point(f2, "black");

    let mut files = vec![("caustics.csv".to_string(), csv)];
    let mut gcc_rows = String::new();
    match two_sided_lemel_start(table, tol)? {
        Some(x1) => {
            let (arc, x2) = lemel_arc(table, x1, tol)?;
            let _ = writeln!(report, "lemel_x1: {:.12} {:.12}", x1.x, x1.y);
            let _ = writeln!(report, "lemel_x2: {:.12} {:.12}", x2.x, x2.y);
            let (on, off) = both_sides_gcc(table, &arc, sc.horizon, sc.sampling.n_s, sc.sampling.n_theta)?;
            gcc_lines(report, "lemel_gamma", &on);
            gcc_rows.push_str(&gcc_csv(&on));
            if let Some(off) = off {
                gcc_lines(report, "lemel_complement", &off);
            }
            scene.arc(table, &arc, "green");
        }
        None => {
            let _ = writeln!(report, "lemel_x1: none");
        }
    }
    files.push(("lemel_gcc.csv".into(), gcc_rows));
    files.push(("ellipse.svg".into(), scene.render()));
    Ok((EXIT_OK, files))
}

#[cfg(test)]
mod tests;
