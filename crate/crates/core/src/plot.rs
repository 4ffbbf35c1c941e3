//! Minimal offline SVG rendering for paths, histograms and time series.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::stats::Histogram;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

/// A numeric CSV: one header row, then rows of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Validation("empty CSV".into()))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|e| {
                        Error::Validation(format!("row {}: {:?}: {e}", i + 1, v.trim()))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != columns.len() {
                return Err(Error::Validation(format!(
                    "row {} has {} fields, header has {}",
                    i + 1,
                    row.len(),
                    columns.len()
                )));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Validation("CSV has a header but no rows".into()));
        }
        Ok(NumericTable { columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Validation(format!("no column named {name:?}")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = extent(xs);
        let (y0, y1) = extent(ys);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn extent(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

fn open_svg(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
}

fn axes(out: &mut String, f: &Frame) {
    writeln!(
        out,
        r##"<rect x="{m}" y="{m}" width="{w}" height="{h}" fill="none" stroke="#888"/>"##,
        m = MARGIN,
        w = WIDTH - 2.0 * MARGIN,
        h = HEIGHT - 2.0 * MARGIN
    )
    .unwrap();
    for (x, y, anchor, label) in [
        (MARGIN, HEIGHT - MARGIN + 16.0, "start", f.x0),
        (WIDTH - MARGIN, HEIGHT - MARGIN + 16.0, "end", f.x1),
        (MARGIN - 4.0, HEIGHT - MARGIN, "end", f.y0),
        (MARGIN - 4.0, MARGIN + 10.0, "end", f.y1),
    ] {
        writeln!(
            out,
            r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="10" text-anchor="{anchor}">{}</text>"#,
            short(label)
        )
        .unwrap();
    }
}

fn short(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Blue-to-red ramp over `[0, 1]`.
fn time_color(u: f64) -> String {
    let u = u.clamp(0.0, 1.0);
    let r = (40.0 + 215.0 * u).round() as u8;
    let b = (255.0 - 215.0 * u).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

/// Path polyline, one segment per step, coloured from early (blue) to late
/// (red).
pub fn path_svg(xs: &[f64], ys: &[f64], title: &str) -> Result<String> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::Validation(
            "path needs matching, non-empty coordinates".into(),
        ));
    }
    let f = Frame::fit(xs.iter().copied(), ys.iter().copied());
    let mut out = String::new();
    open_svg(&mut out, title);
    axes(&mut out, &f);
    let segs = (xs.len() - 1).max(1) as f64;
    for k in 1..xs.len() {
        writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1"/>"#,
            f.px(xs[k - 1]),
            f.py(ys[k - 1]),
            f.px(xs[k]),
            f.py(ys[k]),
            time_color((k - 1) as f64 / segs)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn histogram_svg(h: &Histogram, title: &str) -> String {
    let peak = h.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let (x0, x1) = if h.max > h.min {
        (h.min, h.max)
    } else {
        (h.min - 0.5, h.min + 0.5)
    };
    let f = Frame {
        x0,
        x1,
        y0: 0.0,
        y1: peak,
    };
    let mut out = String::new();
    open_svg(&mut out, title);
    axes(&mut out, &f);
    let w = (x1 - x0) / h.counts.len() as f64;
    for (i, &c) in h.counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let left = f.px(x0 + i as f64 * w);
        let right = f.px(x0 + (i + 1) as f64 * w);
        let top = f.py(c as f64);
        writeln!(
            out,
            r##"<rect class="bin" x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#4682b4"/>"##,
            (right - left).max(0.5),
            f.py(0.0) - top
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

const SERIES_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// One polyline per named series against a shared abscissa.
pub fn series_svg(t: &[f64], series: &[(String, Vec<f64>)], title: &str) -> Result<String> {
    if t.is_empty() || series.is_empty() || series.iter().any(|(_, v)| v.len() != t.len()) {
        return Err(Error::Validation(
            "series must be non-empty and match the time axis".into(),
        ));
    }
    let f = Frame::fit(
        t.iter().copied(),
        series.iter().flat_map(|(_, v)| v.iter().copied()),
    );
    let mut out = String::new();
    open_svg(&mut out, title);
    axes(&mut out, &f);
    for (i, (name, v)) in series.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        let pts: Vec<String> = t
            .iter()
            .zip(v)
            .map(|(&a, &b)| format!("{:.2},{:.2}", f.px(a), f.py(b)))
            .collect();
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
            pts.join(" ")
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 90.0,
            MARGIN + 14.0 * (i + 1) as f64,
            escape(name)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_table() {
        let t = NumericTable::parse("a,b\n1,2\n3,4\n").unwrap();
        assert_eq!(t.column("b").unwrap(), vec![2.0, 4.0]);
        assert!(t.column("c").is_err());
        assert!(NumericTable::parse("").is_err());
        assert!(NumericTable::parse("a,b\n").is_err());
        assert!(NumericTable::parse("a,b\n1\n").is_err());
        assert!(NumericTable::parse("a\nx\n").is_err());
    }

    #[test]
    fn path_has_one_segment_per_step() {
        let svg = path_svg(&[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0], "p").unwrap();
        assert_eq!(svg.matches("<line").count(), 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn histogram_draws_occupied_bins() {
        let h = Histogram {
            min: 0.0,
            max: 3.0,
            counts: vec![1, 0, 4],
        };
        assert_eq!(histogram_svg(&h, "h").matches(r#"class="bin""#).count(), 2);
    }

    #[test]
    fn series_validation() {
        assert!(series_svg(&[0.0, 1.0], &[("a".into(), vec![1.0])], "s").is_err());
        let svg = series_svg(&[0.0, 1.0], &[("a<b".into(), vec![1.0, 2.0])], "s").unwrap();
        assert!(svg.contains("a&lt;b"));
    }
}
