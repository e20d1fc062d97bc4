//! Plain SVG rendering of result documents.
//!
//! Plots are drawn in world coordinates: the `viewBox` is the data extent
//! and a `scale(1,-1)` group puts the y axis upward. Coordinates are written
//! with a fixed number of decimals so output is byte-stable.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::cli::{Event, ResultDocument, Solutions};
use crate::radial::{curve_point, RadialFunction};
use crate::sphere::{cross, dot, norm, Vec3};
use crate::square::{quad_vertices, Point2};
use crate::table::{FiberStatus, TableSolution};

/// Samples along the plotted curve.
pub const CURVE_SAMPLES: usize = 720;
const PIXELS: u32 = 640;
const CIRCLE_SAMPLES: usize = 240;

/// Writes [`render_svg`] to `path`.
pub fn emit_svg(doc: &ResultDocument, path: &Path) -> io::Result<()> {
    std::fs::write(path, render_svg(doc))
}

/// Planar plot for curve documents, sphere plot otherwise.
pub fn render_svg(doc: &ResultDocument) -> String {
    match &doc.curve {
        Some(h) => render_curve(doc, h),
        None => render_sphere(doc),
    }
}

struct Canvas {
    body: String,
    half: f64,
}

impl Canvas {
    fn new(half: f64) -> Self {
        Self { body: String::new(), half }
    }

    fn polyline(&mut self, pts: &[Point2], class: &str, closed: bool) {
        if pts.len() < 2 {
            return;
        }
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = write!(self.body, "    <{tag} class=\"{class}\" points=\"");
        for (i, p) in pts.iter().enumerate() {
            let sep = if i == 0 { "" } else { " " };
            let _ = write!(self.body, "{sep}{:.5},{:.5}", p[0], p[1]);
        }
        self.body.push_str("\"/>\n");
    }

    fn marker(&mut self, p: Point2, class: &str) {
        let r = 0.012 * self.half;
        let _ = writeln!(self.body, "    <circle class=\"{class}\" cx=\"{:.5}\" cy=\"{:.5}\" r=\"{r:.5}\"/>", p[0], p[1]);
    }

    fn finish(self) -> String {
        let h = self.half;
        let stroke = 0.004 * h;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PIXELS}\" height=\"{PIXELS}\" viewBox=\"{:.5} {:.5} {:.5} {:.5}\">",
            -h,
            -h,
            2.0 * h,
            2.0 * h
        );
        let _ = writeln!(
            out,
            "  <style>\n    polyline, polygon {{ fill: none; stroke-width: {stroke:.5}; }}\n    .curve {{ stroke: #222; }}\n    .square {{ stroke: #c0392b; }}\n    .table {{ stroke: #c0392b; }}\n    .grid {{ stroke: #bbb; }}\n    .grid-back {{ stroke: #e4e4e4; }}\n    .outline {{ stroke: #555; }}\n    .vertex {{ fill: #c0392b; }}\n    .vertex-back {{ fill: #f3b6ae; }}\n    .odd {{ fill: #27ae60; }}\n    .flagged {{ fill: #e67e22; }}\n  </style>"
        );
        out.push_str("  <g transform=\"scale(1,-1)\">\n");
        out.push_str(&self.body);
        out.push_str("  </g>\n</svg>\n");
        out
    }
}

fn render_curve(doc: &ResultDocument, h: &RadialFunction) -> String {
    let curve: Vec<Point2> = (0..CURVE_SAMPLES)
        .map(|k| curve_point(h, TAU * k as f64 / CURVE_SAMPLES as f64))
        .collect();
    let extent = curve.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max);
    let mut canvas = Canvas::new(1.1 * extent.max(f64::MIN_POSITIVE));
    canvas.polyline(&curve, "curve", true);

    let mut squares: Vec<[Point2; 4]> = match &doc.solutions {
        Solutions::Squares { squares } | Solutions::Parity { squares, .. } => {
            squares.iter().map(|s| s.vertices).collect()
        }
        Solutions::Trace { trace } => vec![trace.endpoint.vertices],
        _ => Vec::new(),
    };
    for event in &doc.events {
        if let Event::DegenerateFamily { square: Some(p), .. } = event {
            squares.push(quad_vertices(h, p));
        }
    }
    for sq in &squares {
        canvas.polyline(sq, "square", true);
        for v in sq {
            canvas.marker(*v, "vertex");
        }
    }
    canvas.finish()
}

/// Orthographic view from a fixed oblique direction.
struct View {
    dir: Vec3,
    right: Vec3,
    up: Vec3,
}

impl View {
    fn standard() -> Self {
        let dir = normalize([1.0, 0.6, 0.8]);
        let right = normalize(cross([0.0, 0.0, 1.0], dir));
        let up = cross(dir, right);
        Self { dir, right, up }
    }

    fn project(&self, p: Vec3) -> (Point2, bool) {
        ([dot(p, self.right), dot(p, self.up)], dot(p, self.dir) >= 0.0)
    }
}

fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Great circle through the orthonormal pair `(u, v)`, split into visible
/// and hidden runs.
fn draw_great_circle(canvas: &mut Canvas, view: &View, u: Vec3, v: Vec3) {
    let mut run: Vec<Point2> = Vec::new();
    let mut run_front = true;
    for k in 0..=CIRCLE_SAMPLES {
        let (s, c) = (TAU * k as f64 / CIRCLE_SAMPLES as f64).sin_cos();
        let p = [c * u[0] + s * v[0], c * u[1] + s * v[1], c * u[2] + s * v[2]];
        let (q, front) = view.project(p);
        if k > 0 && front != run_front {
            run.push(q);
            canvas.polyline(&run, if run_front { "grid" } else { "grid-back" }, false);
            run.clear();
        }
        run_front = front;
        run.push(q);
    }
    canvas.polyline(&run, if run_front { "grid" } else { "grid-back" }, false);
}

fn render_sphere(doc: &ResultDocument) -> String {
    let view = View::standard();
    let mut canvas = Canvas::new(1.1);
    let outline: Vec<Point2> = (0..CIRCLE_SAMPLES)
        .map(|k| {
            let (s, c) = (TAU * k as f64 / CIRCLE_SAMPLES as f64).sin_cos();
            [c, s]
        })
        .collect();
    canvas.polyline(&outline, "outline", true);
    for k in 0..6 {
        let (s, c) = (TAU * k as f64 / 12.0).sin_cos();
        draw_great_circle(&mut canvas, &view, [c, s, 0.0], [0.0, 0.0, 1.0]);
    }
    draw_great_circle(&mut canvas, &view, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);

    let mut tables: Vec<&TableSolution> = match &doc.solutions {
        Solutions::Tables { tables } => tables.iter().collect(),
        _ => Vec::new(),
    };
    for event in &doc.events {
        if let Event::DegenerateFamily { table: Some(t), .. } = event {
            tables.push(t);
        }
    }
    for t in tables {
        let projected: Vec<(Point2, bool)> = t.points.iter().map(|p| view.project(p.xyz())).collect();
        let quad: Vec<Point2> = projected.iter().map(|(q, _)| *q).collect();
        canvas.polyline(&quad, "table", true);
        for (q, front) in projected {
            canvas.marker(q, if front { "vertex" } else { "vertex-back" });
        }
    }
    if let Solutions::Sweep { report } = &doc.solutions {
        for point in &report.points {
            let (q, front) = view.project(point.x.xyz());
            if !front {
                continue;
            }
            let class = match point.status {
                FiberStatus::Generic { parity: 1, .. } => "odd",
                _ => "flagged",
            };
            canvas.marker(q, class);
        }
    }
    canvas.finish()
}
