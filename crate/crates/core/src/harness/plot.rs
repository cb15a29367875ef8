//! Minimal SVG overlay of boundary curves.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::TrigShape;

pub const PLOT_SAMPLES: usize = 720;

const COLORS: [&str; 6] = [
    "#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
];
const DASHES: [&str; 4] = ["none", "8 4", "2 3", "10 3 2 3"];
const SIZE: f64 = 560.0;
const MARGIN: f64 = 40.0;
const LEGEND_ROW: f64 = 18.0;

fn sample(shape: &TrigShape) -> Vec<[f64; 2]> {
    (0..=PLOT_SAMPLES)
        .map(|i| {
            let t = 2.0 * PI * (i % PLOT_SAMPLES) as f64 / PLOT_SAMPLES as f64;
            let c = shape.center();
            let r = shape.eval_radius(t);
            [c[0] + r * t.cos(), c[1] + r * t.sin()]
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Standalone SVG document with one closed polyline per shape, equal axis
/// scaling and a legend.
pub fn render_svg(shapes: &[(TrigShape, String)]) -> Result<String> {
    if shapes.is_empty() {
        return Err(Error::Config("nothing to plot".into()));
    }
    let curves: Vec<Vec<[f64; 2]>> = shapes.iter().map(|(s, _)| sample(s)).collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in curves.iter().flatten() {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let scale = SIZE / extent;
    let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let to_px = |p: [f64; 2]| {
        (
            MARGIN + 0.5 * SIZE + (p[0] - mid[0]) * scale,
            MARGIN + 0.5 * SIZE - (p[1] - mid[1]) * scale,
        )
    };
    let width = SIZE + 2.0 * MARGIN;
    let height = width + LEGEND_ROW * shapes.len() as f64 + 10.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    );
    let (x0, y0) = to_px([mid[0] - 0.5 * extent, mid[1] - 0.5 * extent]);
    let _ = writeln!(
        svg,
        r##"<rect x="{x0:.2}" y="{:.2}" width="{SIZE}" height="{SIZE}" fill="none" stroke="#bbbbbb"/>"##,
        y0 - SIZE
    );
    if lo[0] <= 0.0 && hi[0] >= 0.0 || lo[1] <= 0.0 && hi[1] >= 0.0 {
        let (ox, oy) = to_px([0.0, 0.0]);
        let _ = writeln!(
            svg,
            r##"<path d="M {:.2} {oy:.2} H {:.2} M {ox:.2} {:.2} V {:.2}" stroke="#dddddd" fill="none"/>"##,
            x0,
            x0 + SIZE,
            y0 - SIZE,
            y0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{x0:.2}" y="{:.2}" font-family="sans-serif" font-size="11">[{:.3}, {:.3}] x [{:.3}, {:.3}]</text>"#,
        y0 + 14.0,
        mid[0] - 0.5 * extent,
        mid[0] + 0.5 * extent,
        mid[1] - 0.5 * extent,
        mid[1] + 0.5 * extent
    );
    for (i, ((_, label), pts)) in shapes.iter().zip(&curves).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = DASHES[i % DASHES.len()];
        let mut points = String::with_capacity(pts.len() * 16);
        for &p in pts {
            let (x, y) = to_px(p);
            let _ = write!(points, "{x:.3},{y:.3} ");
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6" stroke-dasharray="{dash}"><title>{}</title></polyline>"#,
            points.trim_end(),
            escape(label)
        );
        let ly = width + LEGEND_ROW * (i as f64 + 0.5);
        let _ = writeln!(
            svg,
            r#"<line x1="{MARGIN}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="1.6" stroke-dasharray="{dash}"/>"#,
            MARGIN + 36.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            MARGIN + 44.0,
            ly + 4.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn plot(shapes: &[(TrigShape, String)], path: &Path) -> Result<()> {
    let svg = render_svg(shapes)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, svg)?;
    Ok(())
}
