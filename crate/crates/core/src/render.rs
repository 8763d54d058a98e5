//! Text renderers: CSV for matrices and SVG heatmaps.

use std::fmt::Write;

use crate::linalg::DenseMatrix;

/// printf-style `%.{precision}e`: mantissa, `e`, sign, at least two exponent digits.
pub fn format_exp(value: f64, precision: usize) -> String {
    let s = format!("{value:.precision$e}");
    let Some((mantissa, exp)) = s.split_once('e') else {
        return s; // inf / NaN
    };
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

/// Row-major CSV, one matrix row per line, `%.6e` entries.
pub fn matrix_csv(m: &DenseMatrix) -> String {
    let mut out = String::with_capacity(m.rows() * m.cols() * 14);
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format_exp(m.get(r, c), 6));
        }
        out.push('\n');
    }
    out
}

fn gray(level: u8) -> String {
    format!("#{level:02x}{level:02x}{level:02x}")
}

/// Grayscale heatmap of a matrix: 0 is white, the largest entry black.
/// Runs of equal shade along a row are merged into one rectangle.
pub fn matrix_svg(m: &DenseMatrix) -> String {
    let max = m.as_slice().iter().fold(0.0_f64, |a, v| a.max(*v));
    let shade = |v: f64| -> u8 {
        if max > 0.0 {
            (255.0 * (1.0 - (v / max).clamp(0.0, 1.0))).round() as u8
        } else {
            255
        }
    };
    let (rows, cols) = (m.rows(), m.cols());
    let mut out = String::new();
    writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{cols}" height="{rows}" viewBox="0 0 {cols} {rows}" shape-rendering="crispEdges">"##
    )
    .unwrap();
    writeln!(out, r##"<rect width="{cols}" height="{rows}" fill="#ffffff"/>"##).unwrap();
    for r in 0..rows {
        let mut c = 0;
        while c < cols {
            let level = shade(m.get(r, c));
            let start = c;
            while c < cols && shade(m.get(r, c)) == level {
                c += 1;
            }
            if level != 255 {
                writeln!(
                    out,
                    r##"<rect x="{start}" y="{r}" width="{}" height="1" fill="{}"/>"##,
                    c - start,
                    gray(level)
                )
                .unwrap();
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Labelled heatmap for phase grids.
pub(crate) struct Heatmap<'a> {
    pub title: &'a str,
    pub x_title: &'a str,
    pub y_title: &'a str,
    pub x_labels: Vec<String>,
    /// Bottom row first.
    pub y_labels: Vec<String>,
    /// `fills[row][col]`, bottom row first.
    pub fills: Vec<Vec<String>>,
}

const CELL: usize = 40;
const LEFT: usize = 70;
const TOP: usize = 40;
const BOTTOM: usize = 60;

impl Heatmap<'_> {
    pub fn render(&self) -> String {
        let cols = self.x_labels.len();
        let rows = self.y_labels.len();
        let width = LEFT + cols * CELL + 20;
        let height = TOP + rows * CELL + BOTTOM;
        let mut out = String::new();
        writeln!(
            out,
            r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"##
        )
        .unwrap();
        writeln!(out, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##).unwrap();
        writeln!(
            out,
            r##"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"##,
            LEFT + cols * CELL / 2,
            escape(self.title)
        )
        .unwrap();
        for (r, row) in self.fills.iter().enumerate() {
            let y = TOP + (rows - 1 - r) * CELL;
            for (c, fill) in row.iter().enumerate() {
                let x = LEFT + c * CELL;
                writeln!(
                    out,
                    r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#808080" stroke-width="0.5"/>"##
                )
                .unwrap();
            }
        }
        for (c, label) in self.x_labels.iter().enumerate() {
            writeln!(
                out,
                r##"<text x="{}" y="{}" text-anchor="middle">{}</text>"##,
                LEFT + c * CELL + CELL / 2,
                TOP + rows * CELL + 15,
                escape(label)
            )
            .unwrap();
        }
        for (r, label) in self.y_labels.iter().enumerate() {
            writeln!(
                out,
                r##"<text x="{}" y="{}" text-anchor="end">{}</text>"##,
                LEFT - 6,
                TOP + (rows - 1 - r) * CELL + CELL / 2 + 4,
                escape(label)
            )
            .unwrap();
        }
        writeln!(
            out,
            r##"<text x="{}" y="{}" text-anchor="middle">{}</text>"##,
            LEFT + cols * CELL / 2,
            TOP + rows * CELL + 40,
            escape(self.x_title)
        )
        .unwrap();
        writeln!(
            out,
            r##"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"##,
            TOP + rows * CELL / 2,
            TOP + rows * CELL / 2,
            escape(self.y_title)
        )
        .unwrap();
        out.push_str("</svg>\n");
        out
    }
}

pub(crate) fn fraction_fill(fraction: f64) -> String {
    gray((255.0 * fraction.clamp(0.0, 1.0)).round() as u8)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
