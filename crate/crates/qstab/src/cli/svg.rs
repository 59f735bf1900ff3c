//! Minimal SVG rendering of region scans: three layers of filled cells plus
//! point markers. Purely presentational; the CSV is the scientific output.

use crate::informativity::RegionGrid;
use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 40.0;

pub struct RegionLayers<'a> {
    pub cont: &'a RegionGrid,
    pub sampled: &'a RegionGrid,
    pub inflated: &'a RegionGrid,
}

fn map_x(a: f64, lo: f64, hi: f64) -> f64 {
    MARGIN + (a - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN)
}

fn map_y(b: f64, lo: f64, hi: f64) -> f64 {
    HEIGHT - MARGIN - (b - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN)
}

fn layer(out: &mut String, grid: &RegionGrid, color: &str, opacity: f64) {
    let (a_lo, a_hi) = (grid.a_values[0], *grid.a_values.last().unwrap());
    let (b_lo, b_hi) = (grid.b_values[0], *grid.b_values.last().unwrap());
    let cell_w = (WIDTH - 2.0 * MARGIN) / grid.a_values.len().max(1) as f64;
    let cell_h = (HEIGHT - 2.0 * MARGIN) / grid.b_values.len().max(1) as f64;
    for (i, &a) in grid.a_values.iter().enumerate() {
        for (j, &b) in grid.b_values.iter().enumerate() {
            if !grid.at(i, j) {
                continue;
            }
            let x = map_x(a, a_lo, a_hi) - 0.5 * cell_w;
            let y = map_y(b, b_lo, b_hi) - 0.5 * cell_h;
            writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cell_w:.2}" height="{cell_h:.2}" fill="{color}" fill-opacity="{opacity}"/>"#
            )
            .unwrap();
        }
    }
}

/// Render the three membership layers (inflated sampled set at the back,
/// sampled set, then the continuous set on top) and the given markers.
pub fn render(layers: &RegionLayers<'_>, markers: &[(f64, f64)]) -> String {
    let grid = layers.cont;
    let (a_lo, a_hi) = (grid.a_values[0], *grid.a_values.last().unwrap());
    let (b_lo, b_hi) = (grid.b_values[0], *grid.b_values.last().unwrap());
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    layer(&mut out, layers.inflated, "#f6c3bd", 1.0);
    layer(&mut out, layers.sampled, "#d0312d", 1.0);
    layer(&mut out, layers.cont, "#f79862", 0.85);
    writeln!(
        out,
        r#"<rect x="{m}" y="{m}" width="{w}" height="{h}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        w = WIDTH - 2.0 * MARGIN,
        h = HEIGHT - 2.0 * MARGIN
    )
    .unwrap();
    for &(a, b) in markers {
        if a < a_lo || a > a_hi || b < b_lo || b > b_hi {
            continue;
        }
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="black" stroke="white" stroke-width="1.5"/>"#,
            map_x(a, a_lo, a_hi),
            map_y(b, b_lo, b_hi)
        )
        .unwrap();
    }
    for (value, x, y, anchor) in [
        (a_lo, MARGIN, HEIGHT - MARGIN + 16.0, "middle"),
        (a_hi, WIDTH - MARGIN, HEIGHT - MARGIN + 16.0, "middle"),
    ] {
        writeln!(
            out,
            r#"<text x="{x:.1}" y="{y:.1}" font-size="12" text-anchor="{anchor}">a = {value}</text>"#
        )
        .unwrap();
    }
    for (value, y) in [(b_lo, HEIGHT - MARGIN), (b_hi, MARGIN)] {
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">b = {value}</text>"#,
            MARGIN - 4.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    out
}
