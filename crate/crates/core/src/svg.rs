//! Minimal SVG 1.1 scenes with a fixed world-to-canvas mapping.

use std::fmt::Write as _;

use crate::geometry::{BoundaryCurve, Point2};
use crate::regions::BoundaryArc;

const CANVAS: f64 = 600.0;
const MARGIN: f64 = 20.0;
const CURVE_SAMPLES: usize = 512;

#[derive(Debug, Clone)]
pub enum Element {
    /// Closed boundary curve.
    Curve { points: Vec<Point2>, color: String },
    /// Thick stroke over part of a boundary.
    Arc { points: Vec<Point2>, color: String },
    Polyline { points: Vec<Point2>, color: String },
    Point { at: Point2, color: String },
}

#[derive(Debug, Clone)]
pub struct Scene {
    /// World box `(min, max)` mapped onto the canvas.
    pub bounds: (Point2, Point2),
    pub elements: Vec<Element>,
}

impl Scene {
    /// Scene framed on the bounding box of `frame`.
    pub fn framed(frame: &BoundaryCurve) -> Self {
        let pts = frame.polyline(CURVE_SAMPLES);
        let mut lo = pts[0];
        let mut hi = pts[0];
        for p in &pts {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        Scene {
            bounds: (lo, hi),
            elements: vec![],
        }
    }

    pub fn curve(&mut self, c: &BoundaryCurve, color: &str) {
        self.elements.push(Element::Curve {
            points: c.polyline(CURVE_SAMPLES),
            color: color.into(),
        });
    }

    pub fn arc(&mut self, c: &BoundaryCurve, arc: &BoundaryArc, color: &str) {
        let n = ((arc.length() * CURVE_SAMPLES as f64).ceil() as usize).max(2);
        let points = (0..=n).map(|k| c.point_at(arc.at(k as f64 / n as f64))).collect();
        self.elements.push(Element::Arc {
            points,
            color: color.into(),
        });
    }

    pub fn polyline(&mut self, points: Vec<Point2>, color: &str) {
        self.elements.push(Element::Polyline {
            points,
            color: color.into(),
        });
    }

    pub fn point(&mut self, at: Point2, color: &str) {
        self.elements.push(Element::Point { at, color: color.into() });
    }

    pub fn render(&self) -> String {
        render_svg(self)
    }
}

/// Renders the scene in element order. The larger extent of the bounds fills
/// the canvas minus a margin; y points up.
pub fn render_svg(scene: &Scene) -> String {
    let (lo, hi) = scene.bounds;
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let k = (CANVAS - 2.0 * MARGIN) / span;
    let map = |p: Point2| (MARGIN + (p.x - lo.x) * k, CANVAS - MARGIN - (p.y - lo.y) * k);
    let path = |pts: &[Point2]| {
        pts.iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for e in &scene.elements {
        let _ = match e {
            Element::Curve { points, color } => writeln!(
                out,
                r#"<polygon points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path(points)
            ),
            Element::Arc { points, color } => writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="5" stroke-opacity="0.6"/>"#,
                path(points)
            ),
            Element::Polyline { points, color } => writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
                path(points)
            ),
            Element::Point { at, color } => {
                let (x, y) = map(*at);
                writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="{color}"/>"#)
            }
        };
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::Boundary;

    #[test]
    fn element_order_and_count() {
        let outer = BoundaryCurve::circle(Point2::ZERO, 2.0).unwrap();
        let inner = BoundaryCurve::circle(Point2::ZERO, 1.0).unwrap();
        let mut scene = Scene::framed(&outer);
        scene.curve(&outer, "black");
        scene.curve(&inner, "gray");
        scene.arc(&outer, &BoundaryArc::new(Boundary::Outer, 0.1, 0.9), "blue");
        scene.polyline(vec![Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)], "red");
        scene.point(Point2::ZERO, "green");
        let svg = scene.render();
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 1);
        let pos = |s: &str| svg.find(s).unwrap();
        assert!(pos("gray") < pos("blue") && pos("blue") < pos("red"));
        // The origin lands in the middle of the canvas.
        assert!(svg.contains(r#"cx="300.000" cy="300.000""#));
        assert_eq!(svg, scene.render());
    }
}
