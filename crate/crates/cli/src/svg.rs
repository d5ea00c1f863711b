//! Deterministic SVG rendering of the CSV files the CLI emits.
//!
//! The picture is a pure function of the CSV text and the title. The first
//! column is the x axis and every other numeric column is a series; empty
//! cells break a line. Columns named `vline:<label>` or `hline:<label>` hold
//! one value (first non-empty cell) drawn as a dashed reference line. A CSV
//! whose first column is not numeric is drawn as a text table.

use std::fmt::Write;

use anyhow::{bail, Context, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 620.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 440.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

struct Column {
    name: String,
    values: Vec<Option<f64>>,
}

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Axis {
        let v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return Axis { lo: 0.0, hi: 1.0, log: false };
        }
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo > 0.0 && hi / lo > 1e3 {
            return Axis { lo: lo.log10().floor(), hi: hi.log10().ceil(), log: true };
        }
        if lo == hi {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            return Axis { lo: lo - pad, hi: hi + pad, log: false };
        }
        Axis { lo, hi, log: false }
    }

    fn unit(&self, v: f64) -> Option<f64> {
        let t = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        Some((t - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let span = (self.hi - self.lo) as i64;
            let step = (span / 8 + 1).max(1);
            (self.lo as i64..=self.hi as i64)
                .filter(|e| (e - self.lo as i64) % step == 0)
                .map(|e| ((e as f64 - self.lo) / (self.hi - self.lo), format!("1e{e}")))
                .collect()
        } else {
            (0..=5)
                .map(|i| {
                    let f = i as f64 / 5.0;
                    (f, number(self.lo + f * (self.hi - self.lo)))
                })
                .collect()
        }
    }
}

fn number(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn parse(csv_text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new().from_reader(csv_text.as_bytes());
    let header: Vec<String> = reader.headers().context("reading CSV header")?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for row in reader.records() {
        rows.push(row?.iter().map(str::to_string).collect());
    }
    if header.is_empty() {
        bail!("CSV has no columns");
    }
    Ok((header, rows))
}

fn numeric(rows: &[Vec<String>], col: usize) -> Option<Vec<Option<f64>>> {
    rows.iter()
        .map(|r| {
            let cell = r.get(col).map(|s| s.trim()).unwrap_or("");
            if cell.is_empty() {
                Some(None)
            } else {
                cell.parse::<f64>().ok().map(Some)
            }
        })
        .collect()
}

/// Renders `csv_text` as an SVG document.
pub fn render(csv_text: &str, title: &str) -> Result<String> {
    let (header, rows) = parse(csv_text)?;
    let x = match numeric(&rows, 0) {
        Some(x) if x.iter().any(Option::is_some) => x,
        _ => return Ok(render_table(&header, &rows, title)),
    };
    let mut series = Vec::new();
    let mut vlines = Vec::new();
    let mut hlines = Vec::new();
    for (i, name) in header.iter().enumerate().skip(1) {
        let Some(values) = numeric(&rows, i) else { continue };
        let first = values.iter().flatten().next().copied();
        if let Some(label) = name.strip_prefix("vline:") {
            vlines.extend(first.map(|v| (label.to_string(), v)));
        } else if let Some(label) = name.strip_prefix("hline:") {
            hlines.extend(first.map(|v| (label.to_string(), v)));
        } else {
            series.push(Column { name: name.clone(), values });
        }
    }
    let xa = Axis::fit(x.iter().flatten().copied().chain(vlines.iter().map(|v| v.1)));
    let ya = Axis::fit(series.iter().flat_map(|c| c.values.iter().flatten().copied()).chain(hlines.iter().map(|v| v.1)));
    let px = |v: f64| xa.unit(v).map(|u| LEFT + u * (RIGHT - LEFT));
    let py = |v: f64| ya.unit(v).map(|u| BOTTOM - u * (BOTTOM - TOP));

    let mut out = header_svg(title);
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000"/>"##,
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    for (u, label) in xa.ticks() {
        let gx = LEFT + u * (RIGHT - LEFT);
        let _ = writeln!(out, r##"<line x1="{gx:.2}" y1="{BOTTOM:.2}" x2="{gx:.2}" y2="{:.2}" stroke="#000"/>"##, BOTTOM + 5.0);
        let _ = writeln!(out, r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, BOTTOM + 20.0, escape(&label));
    }
    for (u, label) in ya.ticks() {
        let gy = BOTTOM - u * (BOTTOM - TOP);
        let _ = writeln!(out, r##"<line x1="{:.2}" y1="{gy:.2}" x2="{LEFT:.2}" y2="{gy:.2}" stroke="#000"/>"##, LEFT - 5.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, gy + 4.0, escape(&label));
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 45.0,
        escape(&header[0])
    );
    for (k, col) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut segment: Vec<String> = Vec::new();
        let flush = |segment: &mut Vec<String>, out: &mut String| {
            if segment.len() > 1 {
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                    segment.join(" ")
                );
            } else if let Some(p) = segment.first() {
                let (cx, cy) = p.split_once(',').expect("point");
                let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="2" fill="{colour}"/>"#);
            }
            segment.clear();
        };
        for (xv, yv) in x.iter().zip(&col.values) {
            match (xv.and_then(px), yv.and_then(py)) {
                (Some(a), Some(b)) => segment.push(format!("{a:.2},{b:.2}")),
                _ => flush(&mut segment, &mut out),
            }
        }
        flush(&mut segment, &mut out);
        let ly = TOP + 16.0 * k as f64 + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/>"#,
            RIGHT + 15.0,
            RIGHT + 35.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, RIGHT + 40.0, ly + 4.0, escape(&col.name));
    }
    for (label, v) in &vlines {
        if let Some(gx) = px(*v) {
            let _ = writeln!(
                out,
                r##"<line x1="{gx:.2}" y1="{TOP:.2}" x2="{gx:.2}" y2="{BOTTOM:.2}" stroke="#555" stroke-dasharray="4 3"/>"##
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, gx + 3.0, TOP + 12.0, escape(label));
        }
    }
    for (label, v) in &hlines {
        if let Some(gy) = py(*v) {
            let _ = writeln!(
                out,
                r##"<line x1="{LEFT:.2}" y1="{gy:.2}" x2="{RIGHT:.2}" y2="{gy:.2}" stroke="#555" stroke-dasharray="4 3"/>"##
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, RIGHT - 3.0, gy - 4.0, escape(label));
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn header_svg(title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="25.00" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    out
}

fn render_table(header: &[String], rows: &[Vec<String>], title: &str) -> String {
    let mut out = header_svg(title);
    let col_width = (WIDTH - 20.0) / header.len().max(1) as f64;
    for (r, cells) in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)).enumerate() {
        let y = 50.0 + 16.0 * r as f64;
        for (c, cell) in cells.iter().enumerate() {
            let weight = if r == 0 { r#" font-weight="bold""# } else { "" };
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{y:.2}"{weight}>{}</text>"#,
                10.0 + c as f64 * col_width,
                escape(cell)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_input_same_bytes() {
        let csv = "x,a,b,vline:mark\n1,2,3,1.5\n2,4,,\n3,8,9,\n";
        let one = render(csv, "t").unwrap();
        assert_eq!(one, render(csv, "t").unwrap());
        assert!(one.starts_with("<svg"));
        assert!(one.contains("polyline"));
        assert!(one.contains("mark"));
    }

    #[test]
    fn wide_positive_ranges_use_log_axes() {
        let svg = render("n,m\n1,1\n1000000,5\n", "t").unwrap();
        assert!(svg.contains(">1e6<"));
    }

    #[test]
    fn text_first_column_renders_a_table() {
        let svg = render("method,miles\ncbi,1e9\n", "t").unwrap();
        assert!(svg.contains(">cbi<") && !svg.contains("polyline"));
    }

    #[test]
    fn escapes_markup() {
        let svg = render("x,a<b\n1,2\n2,3\n", "t&t").unwrap();
        assert!(svg.contains("a&lt;b") && svg.contains("t&amp;t"));
    }
}
