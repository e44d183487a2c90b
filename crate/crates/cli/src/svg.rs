//! SVG overlays in unit-square coordinates.
//!
//! The drawing uses `viewBox="0 0 1 1"` with a y-flip, so a point `(x, y)` of
//! the rescaled box is written as is. Coordinates are printed in shortest
//! round-trip form; `read_polylines` recovers them exactly.

use std::fmt::Write;

use sos_core::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub class: String,
    pub stroke: String,
    pub curves: Vec<Vec<Point>>,
}

impl Layer {
    pub fn new(class: &str, stroke: &str, curves: Vec<Vec<Point>>) -> Self {
        Layer { class: class.into(), stroke: stroke.into(), curves }
    }
}

/// Draws closed curves; `title` goes into `<title>`, `scale` into `<desc>`.
pub fn render(title: &str, scale: &str, layers: &[Layer]) -> String {
    let mut s = String::new();
    s.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 1 1\">\n");
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, "<desc>{}</desc>", escape(scale));
    s.push_str("<g transform=\"matrix(1 0 0 -1 0 1)\" fill=\"none\" stroke-width=\"0.002\">\n");
    s.push_str("<rect class=\"box\" x=\"0\" y=\"0\" width=\"1\" height=\"1\" stroke=\"#999999\"/>\n");
    for layer in layers {
        let _ = writeln!(s, "<g class=\"{}\" stroke=\"{}\">", escape(&layer.class), escape(&layer.stroke));
        for c in &layer.curves {
            s.push_str("<polyline points=\"");
            for (k, p) in c.iter().enumerate() {
                if k > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{},{}", p.x, p.y);
            }
            s.push_str("\"/>\n");
        }
        s.push_str("</g>\n");
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Polylines grouped by layer class, in document order.
pub fn read_polylines(svg: &str) -> Vec<(String, Vec<Vec<Point>>)> {
    let mut out: Vec<(String, Vec<Vec<Point>>)> = Vec::new();
    for line in svg.lines() {
        if let Some(rest) = line.strip_prefix("<g class=\"") {
            let class = rest.split('"').next().unwrap_or_default().to_string();
            out.push((class, Vec::new()));
        } else if let Some(rest) = line.strip_prefix("<polyline points=\"") {
            let body = rest.split('"').next().unwrap_or_default();
            let curve = body
                .split_whitespace()
                .filter_map(|pair| {
                    let (x, y) = pair.split_once(',')?;
                    Some(Point::new(x.parse().ok()?, y.parse().ok()?))
                })
                .collect();
            if let Some(last) = out.last_mut() {
                last.1.push(curve);
            }
        }
    }
    out
}
