//! Problem instances and their line-oriented config format.
//!
//! ```text
//! # comments start with '#'
//! [outer]
//! kind = ellipse        # circle | ellipse | radial
//! center = 0, 0
//! a = 4
//! b = 2
//! [inner]
//! kind = circle
//! center = 0, 0
//! radius = 1
//! [speeds]
//! c1 = 1
//! c2 = sqrt(2)
//! [observation]
//! kind = angles         # point | arc | angles | full
//! lo = 90
//! hi = 270
//! horizon = 40
//! ```
//!
//! Every number may be an arithmetic expression (`sqrt(2)`, `pi/3`, `4/3`).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, CurveKind, Dir2, Point2, RadialProfile, Vec2};
use crate::optics::Medium;

/// How the observation region `Γ ⊂ ∂Ω` is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    /// `Γ(x₀)`, the part of `∂Ω` seen from the far side of `x₀`.
    Point(Point2),
    /// Counter-clockwise arc `(lo, hi)` in arc-length parameter.
    Arc { lo: f64, hi: f64 },
    /// Counter-clockwise arc between two polar angles (degrees) about the outer center.
    Angles { lo: f64, hi: f64 },
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Caps {
    /// Transmissions allowed along a path; reflections are free.
    pub depth_cap: usize,
    pub max_events: usize,
    pub max_iter: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            depth_cap: 8,
            max_events: 100_000,
            max_iter: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub geom: f64,
    pub angle: f64,
    pub arc: f64,
    pub mono: f64,
    pub orbit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            geom: 1e-9,
            angle: 1e-9,
            arc: 1e-10,
            mono: 1e-9,
            orbit: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub n_s: usize,
    pub n_theta: usize,
    /// Arc-length spacing of gliding emissions; `0` means perimeter / 256.
    pub glide_spacing: f64,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            n_s: 128,
            n_theta: 64,
            glide_spacing: 0.0,
            seed: 0,
        }
    }
}

/// Initial ray for the `trace` subcommand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartSpec {
    pub position: Point2,
    pub direction: Vec2,
    pub medium: Medium,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub outer: BoundaryCurve,
    pub inner: Option<BoundaryCurve>,
    pub c1: f64,
    pub c2: f64,
    pub allow_slow_inclusion: bool,
    pub observation: Observation,
    pub horizon: f64,
    pub caps: Caps,
    pub tol: Tolerances,
    pub sampling: Sampling,
    pub start: Option<StartSpec>,
}

impl Scenario {
    /// Scenario with default caps, tolerances and sampling, validated.
    pub fn new(
        outer: BoundaryCurve,
        inner: Option<BoundaryCurve>,
        c1: f64,
        c2: f64,
        observation: Observation,
        horizon: f64,
    ) -> Result<Self> {
        let sc = Scenario {
            outer,
            inner,
            c1,
            c2,
            allow_slow_inclusion: false,
            observation,
            horizon,
            caps: Caps::default(),
            tol: Tolerances::default(),
            sampling: Sampling::default(),
            start: None,
        };
        sc.finish()
    }

    /// Re-anchors the outer curve for a point observation and validates.
    pub fn finish(mut self) -> Result<Self> {
        if let Observation::Point(x0) = self.observation {
            self.outer = self.outer.clone().anchored_near(x0);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn speed(&self, m: Medium) -> f64 {
        match m {
            Medium::Outer => self.c1,
            Medium::Inner => self.c2,
        }
    }

    pub fn inner(&self) -> Result<&BoundaryCurve> {
        self.inner
            .as_ref()
            .ok_or_else(|| Error::Validation("scenario has no inner curve".into()))
    }

    pub fn critical_angle(&self) -> Option<f64> {
        (self.c2 > self.c1).then(|| (self.c1 / self.c2).asin())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::NonPositiveSpeed {
                c_in: self.c1,
                c_out: self.c2,
            });
        }
        if self.inner.is_some() && !self.allow_slow_inclusion && self.c2 <= self.c1 {
            return Err(Error::SpeedOrder {
                c_slow: self.c1,
                c_fast: self.c2,
            });
        }
        if !(self.horizon >= 0.0) {
            return Err(Error::Validation(format!("horizon {} must be non-negative", self.horizon)));
        }
        let t = &self.tol;
        for (name, v) in [
            ("geom", t.geom),
            ("angle", t.angle),
            ("arc", t.arc),
            ("mono", t.mono),
            ("orbit", t.orbit),
        ] {
            if !(v > 0.0) {
                return Err(Error::Validation(format!("tolerance {name} = {v} must be positive")));
            }
        }
        if self.caps.max_events == 0 || self.caps.max_iter == 0 {
            return Err(Error::Validation("max_events and max_iter must be positive".into()));
        }
        if self.sampling.n_s == 0 || self.sampling.n_theta < 2 {
            return Err(Error::Validation("sampling grid too small".into()));
        }
        if let Some(inner) = &self.inner {
            let c = clearance(&self.outer, inner);
            if !(c > 0.0) {
                return Err(Error::Validation(format!(
                    "clearance: inner curve must lie strictly inside the outer curve (min distance {c:.3e})"
                )));
            }
        }
        if let Observation::Point(x0) = self.observation {
            if self.outer.contains(x0) || self.outer.implicit(x0).abs() < 1e-12 {
                return Err(Error::InsidePoint { x: x0.x, y: x0.y });
            }
        }
        Ok(())
    }
}

/// Sampled minimum distance between the curves; negative if the inner curve
/// is not contained in the outer one.
pub fn clearance(outer: &BoundaryCurve, inner: &BoundaryCurve) -> f64 {
    let po = outer.polyline(1440);
    let pi = inner.polyline(720);
    let mut best = f64::INFINITY;
    for p in &pi {
        if !outer.contains(*p) {
            return -1.0;
        }
        for q in &po {
            best = best.min(p.distance(*q));
        }
    }
    best
}

// ---- parsing ---------------------------------------------------------------

type Section = BTreeMap<String, (usize, String)>;

fn sections(text: &str) -> Result<BTreeMap<String, (usize, Section)>> {
    let mut out: BTreeMap<String, (usize, Section)> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line_no, "unterminated section header"))?
                .trim()
                .to_string();
            if out.contains_key(&name) {
                return Err(parse_err(line_no, &format!("duplicate section [{name}]")));
            }
            out.insert(name.clone(), (line_no, Section::new()));
            current = Some(name);
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, "expected `key = value`"))?;
        let sec = current
            .as_ref()
            .ok_or_else(|| parse_err(line_no, "key outside of any section"))?;
        let entries = &mut out.get_mut(sec).unwrap().1;
        let key = k.trim().to_string();
        if entries.contains_key(&key) {
            return Err(parse_err(line_no, &format!("duplicate key `{key}`")));
        }
        entries.insert(key, (line_no, v.trim().to_string()));
    }
    Ok(out)
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

struct Reader<'a> {
    name: &'a str,
    header: usize,
    entries: Section,
}

impl<'a> Reader<'a> {
    fn num(&mut self, key: &str) -> Result<Option<f64>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => eval(&v, line).map(Some),
        }
    }

    fn req(&mut self, key: &str) -> Result<f64> {
        self.num(key)?
            .ok_or_else(|| parse_err(self.header, &format!("[{}] missing `{key}`", self.name)))
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => {
                if v.trim().is_empty() {
                    return Ok(Some(vec![]));
                }
                split_top(&v).iter().map(|e| eval(e, line)).collect::<Result<Vec<_>>>().map(Some)
            }
        }
    }

    fn point(&mut self, key: &str) -> Result<Option<Point2>> {
        let line = self.entries.get(key).map(|e| e.0).unwrap_or(self.header);
        match self.list(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some(Vec2::new(v[0], v[1]))),
            Some(_) => Err(parse_err(line, &format!("`{key}` needs two components"))),
        }
    }

    fn word(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>> {
        let line = self.entries.get(key).map(|e| e.0).unwrap_or(self.header);
        match self.num(key)? {
            None => Ok(None),
            Some(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e15 => Ok(Some(v as usize)),
            Some(v) => Err(parse_err(line, &format!("`{key}` = {v} is not a non-negative integer"))),
        }
    }

    fn boolean(&mut self, key: &str) -> Result<Option<bool>> {
        match self.word(key) {
            None => Ok(None),
            Some((_, v)) if v == "true" => Ok(Some(true)),
            Some((_, v)) if v == "false" => Ok(Some(false)),
            Some((line, v)) => Err(parse_err(line, &format!("`{key}` = {v} is not a boolean"))),
        }
    }

    fn done(self) -> Result<()> {
        if let Some((k, (line, _))) = self.entries.into_iter().next() {
            return Err(parse_err(line, &format!("unknown key `{k}` in [{}]", self.name)));
        }
        Ok(())
    }
}

/// Splits on commas that are not nested inside parentheses.
fn split_top(s: &str) -> Vec<String> {
    let mut parts = vec![];
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    parts.push(cur.trim().to_string());
    parts
}

fn eval(expr: &str, line: usize) -> Result<f64> {
    let v = meval::eval_str(expr).map_err(|e| parse_err(line, &format!("bad number `{expr}`: {e}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, &format!("`{expr}` is not finite")));
    }
    Ok(v)
}

fn parse_curve(mut r: Reader) -> Result<BoundaryCurve> {
    let (line, kind) = r
        .word("kind")
        .ok_or_else(|| parse_err(r.header, &format!("[{}] missing `kind`", r.name)))?;
    let center = r.point("center")?.unwrap_or(Point2::ZERO);
    let kind = match kind.as_str() {
        "circle" => CurveKind::Circle {
            center,
            radius: r.req("radius")?,
        },
        "ellipse" => CurveKind::Ellipse {
            center,
            a: r.req("a")?,
            b: r.req("b")?,
            angle: r.num("angle")?.unwrap_or(0.0),
        },
        "radial" => CurveKind::Radial {
            center,
            profile: RadialProfile::Fourier {
                a0: r.req("a0")?,
                cos: r.list("cos")?.unwrap_or_default(),
                sin: r.list("sin")?.unwrap_or_default(),
            },
            samples: r.count("samples")?.unwrap_or(512),
        },
        "radial_ellipse" => CurveKind::Radial {
            center,
            profile: RadialProfile::Ellipse {
                a: r.req("a")?,
                b: r.req("b")?,
            },
            samples: r.count("samples")?.unwrap_or(512),
        },
        other => return Err(parse_err(line, &format!("unknown curve kind `{other}`"))),
    };
    r.done()?;
    BoundaryCurve::new(kind)
}

fn parse_medium(line: usize, v: &str) -> Result<Medium> {
    match v {
        "outer" | "1" => Ok(Medium::Outer),
        "inner" | "2" => Ok(Medium::Inner),
        _ => Err(parse_err(line, &format!("unknown medium `{v}`"))),
    }
}

/// Parses and validates a scenario config.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut secs = sections(text)?;
    let known = [
        "outer",
        "inner",
        "speeds",
        "observation",
        "caps",
        "tolerances",
        "sampling",
        "start",
    ];
    if let Some((name, (line, _))) = secs.iter().find(|(n, _)| !known.contains(&n.as_str())) {
        return Err(parse_err(*line, &format!("unknown section [{name}]")));
    }
    let mut take = |name: &'static str| {
        secs.remove(name).map(|(header, entries)| Reader {
            name,
            header,
            entries,
        })
    };

    let outer = parse_curve(take("outer").ok_or_else(|| parse_err(1, "missing [outer] section"))?)?;
    let inner = take("inner").map(parse_curve).transpose()?;

    let mut c1 = 1.0;
    let mut c2 = 2f64.sqrt();
    let mut allow_slow = false;
    if let Some(mut r) = take("speeds") {
        c1 = r.num("c1")?.unwrap_or(c1);
        c2 = r.num("c2")?.unwrap_or(c2);
        allow_slow = r.boolean("allow_slow_inclusion")?.unwrap_or(false);
        r.done()?;
    }

    let mut observation = Observation::Full;
    let mut horizon = 50.0;
    if let Some(mut r) = take("observation") {
        let (line, kind) = r.word("kind").unwrap_or((r.header, "full".into()));
        observation = match kind.as_str() {
            "point" => Observation::Point(
                r.point("x0")?
                    .ok_or_else(|| parse_err(line, "point observation needs `x0`"))?,
            ),
            "arc" => Observation::Arc {
                lo: r.req("lo")?,
                hi: r.req("hi")?,
            },
            "angles" => Observation::Angles {
                lo: r.req("lo")?,
                hi: r.req("hi")?,
            },
            "full" => Observation::Full,
            other => return Err(parse_err(line, &format!("unknown observation kind `{other}`"))),
        };
        horizon = r.num("horizon")?.unwrap_or(horizon);
        r.done()?;
    }

    let mut caps = Caps::default();
    if let Some(mut r) = take("caps") {
        caps.depth_cap = r.count("depth_cap")?.unwrap_or(caps.depth_cap);
        caps.max_events = r.count("max_events")?.unwrap_or(caps.max_events);
        caps.max_iter = r.count("max_iter")?.unwrap_or(caps.max_iter);
        r.done()?;
    }

    let mut tol = Tolerances::default();
    if let Some(mut r) = take("tolerances") {
        tol.geom = r.num("geom")?.unwrap_or(tol.geom);
        tol.angle = r.num("angle")?.unwrap_or(tol.angle);
        tol.arc = r.num("arc")?.unwrap_or(tol.arc);
        tol.mono = r.num("mono")?.unwrap_or(tol.mono);
        tol.orbit = r.num("orbit")?.unwrap_or(tol.orbit);
        r.done()?;
    }

    let mut sampling = Sampling::default();
    if let Some(mut r) = take("sampling") {
        sampling.n_s = r.count("n_s")?.unwrap_or(sampling.n_s);
        sampling.n_theta = r.count("n_theta")?.unwrap_or(sampling.n_theta);
        sampling.glide_spacing = r.num("glide_spacing")?.unwrap_or(0.0);
        sampling.seed = r.count("seed")?.unwrap_or(0) as u64;
        r.done()?;
    }

    let mut start = None;
    if let Some(mut r) = take("start") {
        let header = r.header;
        let position = r
            .point("position")?
            .ok_or_else(|| parse_err(header, "[start] missing `position`"))?;
        let direction = r
            .point("direction")?
            .ok_or_else(|| parse_err(header, "[start] missing `direction`"))?;
        if Dir2::try_new(direction).is_none() {
            return Err(parse_err(header, "[start] direction must be non-zero"));
        }
        let medium = match r.word("medium") {
            Some((line, v)) => parse_medium(line, &v)?,
            None => Medium::Outer,
        };
        r.done()?;
        start = Some(StartSpec {
            position,
            direction,
            medium,
        });
    }

    Scenario {
        outer,
        inner,
        c1,
        c2,
        allow_slow_inclusion: allow_slow,
        observation,
        horizon,
        caps,
        tol,
        sampling,
        start,
    }
    .finish()
}

// ---- printing --------------------------------------------------------------

fn print_curve(out: &mut String, name: &str, c: &BoundaryCurve) {
    let _ = writeln!(out, "[{name}]");
    let pt = |p: Point2| format!("{:?}, {:?}", p.x, p.y);
    match c.kind() {
        CurveKind::Circle { center, radius } => {
            let _ = writeln!(out, "kind = circle\ncenter = {}\nradius = {radius:?}", pt(*center));
        }
        CurveKind::Ellipse { center, a, b, angle } => {
            let _ = writeln!(
                out,
                "kind = ellipse\ncenter = {}\na = {a:?}\nb = {b:?}\nangle = {angle:?}",
                pt(*center)
            );
        }
        CurveKind::Radial {
            center,
            profile,
            samples,
        } => match profile {
            RadialProfile::Fourier { a0, cos, sin } => {
                let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
                let _ = writeln!(
                    out,
                    "kind = radial\ncenter = {}\na0 = {a0:?}\ncos = {}\nsin = {}\nsamples = {samples}",
                    pt(*center),
                    join(cos),
                    join(sin)
                );
            }
            RadialProfile::Ellipse { a, b } => {
                let _ = writeln!(
                    out,
                    "kind = radial_ellipse\ncenter = {}\na = {a:?}\nb = {b:?}\nsamples = {samples}",
                    pt(*center)
                );
            }
        },
    }
    out.push('\n');
}

/// Config text that parses back to an equal scenario.
pub fn print_scenario(sc: &Scenario) -> String {
    let mut out = String::new();
    print_curve(&mut out, "outer", &sc.outer);
    if let Some(inner) = &sc.inner {
        print_curve(&mut out, "inner", inner);
    }
    let _ = writeln!(
        out,
        "[speeds]\nc1 = {:?}\nc2 = {:?}\nallow_slow_inclusion = {}\n",
        sc.c1, sc.c2, sc.allow_slow_inclusion
    );
    out.push_str("[observation]\n");
    match sc.observation {
        Observation::Point(p) => {
            let _ = writeln!(out, "kind = point\nx0 = {:?}, {:?}", p.x, p.y);
        }
        Observation::Arc { lo, hi } => {
            let _ = writeln!(out, "kind = arc\nlo = {lo:?}\nhi = {hi:?}");
        }
        Observation::Angles { lo, hi } => {
            let _ = writeln!(out, "kind = angles\nlo = {lo:?}\nhi = {hi:?}");
        }
        Observation::Full => out.push_str("kind = full\n"),
    }
    let _ = writeln!(out, "horizon = {:?}\n", sc.horizon);
    let c = &sc.caps;
    let _ = writeln!(
        out,
        "[caps]\ndepth_cap = {}\nmax_events = {}\nmax_iter = {}\n",
        c.depth_cap, c.max_events, c.max_iter
    );
    let t = &sc.tol;
    let _ = writeln!(
        out,
        "[tolerances]\ngeom = {:?}\nangle = {:?}\narc = {:?}\nmono = {:?}\norbit = {:?}\n",
        t.geom, t.angle, t.arc, t.mono, t.orbit
    );
    let s = &sc.sampling;
    let _ = writeln!(
        out,
        "[sampling]\nn_s = {}\nn_theta = {}\nglide_spacing = {:?}\nseed = {}",
        s.n_s, s.n_theta, s.glide_spacing, s.seed
    );
    if let Some(st) = &sc.start {
        let m = match st.medium {
            Medium::Outer => "outer",
            Medium::Inner => "inner",
        };
        let _ = writeln!(
            out,
            "\n[start]\nposition = {:?}, {:?}\ndirection = {:?}, {:?}\nmedium = {m}",
            st.position.x, st.position.y, st.direction.x, st.direction.y
        );
    }
    out
}
