//! SVG drawings of two-dimensional DoF regions: inner region shaded, outer
//! boundary dashed, inner vertices labelled with exact rationals.

use std::fmt::Write;

use thiserror::Error;

use crate::geometry::DofRegion;
use crate::rational::{pretty, to_f64, Rational};

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("can only draw two-dimensional regions, got dimension {0}")]
    Dimension(usize),
    #[error("region has no vertices")]
    Empty,
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Vertices of a convex polygon in counter-clockwise order.
fn ccw(points: &[Vec<Rational>]) -> Vec<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (to_f64(&p[0]), to_f64(&p[1]))).collect();
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sorted = pts;
    sorted.sort_by(|a, b| (a.1 - cy).atan2(a.0 - cx).total_cmp(&(b.1 - cy).atan2(b.0 - cx)));
    sorted
}

fn polygon_points(poly: &[(f64, f64)], scale: f64) -> String {
    poly.iter()
        .map(|(x, y)| format!("{:.2},{:.2}", MARGIN + x * scale, MARGIN + SIZE - y * scale))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders `inner` and `outer` on axes named by `labels` (horizontal first).
pub fn region_svg(title: &str, labels: [&str; 2], inner: &DofRegion, outer: &DofRegion) -> Result<String, PlotError> {
    for r in [inner, outer] {
        if r.dim != 2 {
            return Err(PlotError::Dimension(r.dim));
        }
        if r.vertices.is_empty() {
            return Err(PlotError::Empty);
        }
    }
    let extent = outer
        .vertices
        .iter()
        .chain(&inner.vertices)
        .flat_map(|v| v.iter().map(to_f64))
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let scale = SIZE / extent;
    let full = SIZE + 2.0 * MARGIN;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" viewBox="0 0 {full} {full}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(s, r#"<rect width="{full}" height="{full}" fill="white"/>"#);
    let (ox, oy) = (MARGIN, MARGIN + SIZE);
    let _ = writeln!(s, r#"<line x1="{ox}" y1="{oy}" x2="{}" y2="{oy}" stroke="black"/>"#, ox + SIZE);
    let _ = writeln!(s, r#"<line x1="{ox}" y1="{oy}" x2="{ox}" y2="{}" stroke="black"/>"#, MARGIN);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, ox + SIZE, oy + 35.0, escape(labels[0]));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="start">{}</text>"#, ox - 40.0, MARGIN - 20.0, escape(labels[1]));
    for tick in [0.0, 0.5, 1.0] {
        if tick > extent + 1e-12 {
            continue;
        }
        let p = tick * scale;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{tick}</text>"#, ox + p, oy + 18.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{tick}</text>"#, ox - 6.0, oy - p + 4.0);
    }

    let inner_poly = ccw(&inner.vertices);
    let outer_poly = ccw(&outer.vertices);
    let _ = writeln!(
        s,
        r##"<polygon class="inner" points="{}" fill="#9ecae1" fill-opacity="0.6" stroke="#3182bd" stroke-width="1.5"/>"##,
        polygon_points(&inner_poly, scale)
    );
    let _ = writeln!(
        s,
        r#"<polygon class="outer" points="{}" fill="none" stroke="black" stroke-width="1.5" stroke-dasharray="6,4"/>"#,
        polygon_points(&outer_poly, scale)
    );
    for v in &inner.vertices {
        let (x, y) = (MARGIN + to_f64(&v[0]) * scale, MARGIN + SIZE - to_f64(&v[1]) * scale);
        let _ = writeln!(s, r#"<circle class="vertex" cx="{x:.2}" cy="{y:.2}" r="3" fill="black"/>"#);
        let _ = writeln!(
            s,
            r#"<text class="vertex-label" x="{:.2}" y="{:.2}">({}, {})</text>"#,
            x + 5.0,
            y - 5.0,
            pretty(&v[0]),
            pretty(&v[1])
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
