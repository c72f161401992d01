//! SVG frames of a planar scenario: one `<path>` per object and one
//! `<polyline>` per movable object tracing its reference point over time.

use std::fmt::Write as _;

use smoothspatial::geom::{ConvexPolygon, Point};
use smoothspatial::logic::Formula;
use smoothspatial::opt::{ObjectKind, PoseTable, Problem};
use smoothspatial::{Predicate, Shape};

/// World rectangle `[x0, x1] x [y0, y1]` shown by every frame of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Bounds {
    fn empty() -> Self {
        Self { x0: f64::INFINITY, y0: f64::INFINITY, x1: f64::NEG_INFINITY, y1: f64::NEG_INFINITY }
    }

    fn include(&mut self, p: Point<f64>) {
        self.x0 = self.x0.min(p.x);
        self.y0 = self.y0.min(p.y);
        self.x1 = self.x1.max(p.x);
        self.y1 = self.y1.max(p.y);
    }
}

fn outline(shape: &Shape<f64>) -> Vec<Point<f64>> {
    match shape {
        Shape::Polygon(p) => p.vertices().to_vec(),
        Shape::Box3(b) => vec![
            Point::new(b.min[0], b.min[1]),
            Point::new(b.max[0], b.min[1]),
            Point::new(b.max[0], b.max[1]),
            Point::new(b.min[0], b.max[1]),
        ],
    }
}

fn placed(problem: &Problem, poses: &PoseTable<f64>, t: usize) -> Vec<(String, bool, Vec<Point<f64>>)> {
    let mut m = 0;
    problem
        .objects()
        .iter()
        .map(|o| match &o.kind {
            ObjectKind::Movable { template, .. } => {
                let poly: ConvexPolygon<f64> = template.place(&poses[m][t]);
                m += 1;
                (o.name.clone(), true, poly.vertices().to_vec())
            }
            ObjectKind::Static { shape, .. } => (o.name.clone(), false, outline(shape)),
        })
        .collect()
}

/// Smallest padded rectangle containing every object in every frame.
pub fn bounds(problem: &Problem, frames: &[&PoseTable<f64>]) -> Bounds {
    let mut b = Bounds::empty();
    for poses in frames {
        for t in 0..=problem.horizon() {
            for (_, _, pts) in placed(problem, poses, t) {
                pts.into_iter().for_each(|p| b.include(p));
            }
        }
    }
    let pad = 0.05 * (b.x1 - b.x0).max(b.y1 - b.y0).max(1.0);
    Bounds { x0: b.x0 - pad, y0: b.y0 - pad, x1: b.x1 + pad, y1: b.y1 + pad }
}

/// Objects that appear as the container of an enclosure atom.
pub fn goal_names(phi: &Formula) -> Vec<String> {
    phi.atoms()
        .into_iter()
        .filter(|a| matches!(a.predicate, Predicate::EnclIn { .. }))
        .filter_map(|a| a.objects.get(1).cloned())
        .collect()
}

fn path_data(pts: &[Point<f64>]) -> String {
    let mut d = String::new();
    for (i, p) in pts.iter().enumerate() {
        let _ = write!(d, "{}{:.6} {:.6} ", if i == 0 { "M" } else { "L" }, p.x, -p.y);
    }
    d.push('Z');
    d
}

/// Frame of `poses`: objects at the final time step plus the paths.
pub fn render(problem: &Problem, poses: &PoseTable<f64>, goals: &[String], bounds: Bounds, caption: &str) -> String {
    let (w, h) = (bounds.x1 - bounds.x0, bounds.y1 - bounds.y0);
    let px = 640.0;
    let stroke = 0.004 * w.max(h);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}" width="{:.0}" height="{:.0}">"#,
        bounds.x0,
        -bounds.y1,
        w,
        h,
        px,
        px * h / w
    );
    let _ = writeln!(s, "<title>{}</title>", escape(caption));
    let last = problem.horizon();
    for (name, movable, pts) in placed(problem, poses, last) {
        let fill = if movable {
            "#4a7ebb"
        } else if goals.contains(&name) {
            "#7fc97f"
        } else {
            "#999999"
        };
        let _ = writeln!(
            s,
            r#"<path id="{}" d="{}" fill="{fill}" fill-opacity="0.6" stroke="black" stroke-width="{stroke:.6}"/>"#,
            escape(&name),
            path_data(&pts)
        );
    }
    for ((name, _, _), row) in problem.movable().zip(poses) {
        let pts: Vec<String> = row.iter().map(|p| format!("{:.6},{:.6}", p.x, -p.y)).collect();
        let _ = writeln!(
            s,
            r##"<polyline class="path" data-object="{}" points="{}" fill="none" stroke="#c0392b" stroke-width="{stroke:.6}"/>"##,
            escape(name),
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
