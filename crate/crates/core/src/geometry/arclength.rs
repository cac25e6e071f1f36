//! Arc-length tables over a periodic native parameter in `[0, 2π)`.

use std::f64::consts::TAU;

// 5-point Gauss–Legendre on [-1, 1].
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

fn gauss_legendre(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Cumulative arc length sampled on a uniform grid of the native parameter.
#[derive(Debug, Clone)]
pub struct ArcTable {
    step: f64,
    cumulative: Vec<f64>,
}

impl ArcTable {
    /// Panel count is doubled until the perimeter estimate changes by less
    /// than `rel_tol` (relative).
    pub fn build(speed: &dyn Fn(f64) -> f64, rel_tol: f64) -> Self {
        let mut panels = 64usize;
        let mut table = Self::with_panels(speed, panels);
        loop {
            panels *= 2;
            let finer = Self::with_panels(speed, panels);
            let (a, b) = (table.perimeter(), finer.perimeter());
            table = finer;
            if (a - b).abs() <= rel_tol * b || panels >= 1 << 16 {
                return table;
            }
        }
    }

    fn with_panels(speed: &dyn Fn(f64) -> f64, panels: usize) -> Self {
        let step = TAU / panels as f64;
        let mut cumulative = Vec::with_capacity(panels + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for k in 0..panels {
            let lo = k as f64 * step;
            acc += gauss_legendre(speed, lo, lo + step);
            cumulative.push(acc);
        }
        Self { step, cumulative }
    }

    pub fn perimeter(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Arc length from native parameter 0 to `u` (`u` wrapped into `[0, 2π)`).
    pub fn length_to(&self, speed: &dyn Fn(f64) -> f64, u: f64) -> f64 {
        let u = u.rem_euclid(TAU);
        let panels = self.cumulative.len() - 1;
        let k = ((u / self.step) as usize).min(panels - 1);
        let lo = k as f64 * self.step;
        self.cumulative[k] + gauss_legendre(speed, lo, u)
    }

    /// Native parameter at arc length `len` (wrapped into `[0, perimeter)`).
    pub fn param_at(&self, speed: &dyn Fn(f64) -> f64, len: f64) -> f64 {
        let p = self.perimeter();
        let len = len.rem_euclid(p);
        let k = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&len).unwrap())
        {
            Ok(i) => i.min(self.cumulative.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.cumulative.len() - 2),
        };
        let lo = k as f64 * self.step;
        let hi = lo + self.step;
        let mut u = lo + (len - self.cumulative[k]) / speed(lo).max(1e-300);
        u = u.clamp(lo, hi);
        for _ in 0..30 {
            let f = self.cumulative[k] + gauss_legendre(speed, lo, u) - len;
            let du = f / speed(u);
            u = (u - du).clamp(lo, hi);
            if du.abs() < 1e-15 {
                break;
            }
        }
        u
    }
}
