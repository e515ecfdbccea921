//! Dependency-free SVG line and grouped-bar charts.
//!
//! Every plotted mark carries `data-series`, `data-x` and `data-value`
//! attributes whose numbers are rendered by [`fmt_value`], the same function
//! the CSV writers use, so plots can be checked against their CSV by text.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Shortest round-trip decimal form of `v`.
pub fn fmt_value(v: f64) -> String {
    format!("{v}")
}

/// One plotted quantity; `values[i]` belongs to the i-th x category.
/// `None` leaves a gap.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<Option<f64>>,
    /// Half-height of an error bar per point.
    pub errors: Vec<Option<f64>>,
    pub dashed: bool,
}

impl Series {
    pub fn new(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        let n = values.len();
        Series {
            name: name.into(),
            values,
            errors: vec![None; n],
            dashed: false,
        }
    }

    pub fn with_errors(mut self, errors: Vec<Option<f64>>) -> Self {
        self.errors = errors;
        self
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub categories: Vec<String>,
    pub series: Vec<Series>,
    /// Fixed y range; derived from the data when `None`.
    pub y_range: Option<(f64, f64)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    lo: f64,
    hi: f64,
}

impl Frame {
    fn y(&self, v: f64) -> f64 {
        let plot_h = HEIGHT - TOP - BOTTOM;
        let t = if self.hi > self.lo {
            (v - self.lo) / (self.hi - self.lo)
        } else {
            0.5
        };
        HEIGHT - BOTTOM - t.clamp(0.0, 1.0) * plot_h
    }
}

impl Chart {
    fn frame(&self) -> Frame {
        if let Some((lo, hi)) = self.y_range {
            return Frame { lo, hi };
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.series {
            for (v, e) in s.values.iter().zip(&s.errors) {
                if let Some(v) = v {
                    let e = e.unwrap_or(0.0);
                    lo = lo.min(v - e);
                    hi = hi.max(v + e);
                }
            }
        }
        if !lo.is_finite() {
            return Frame { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Frame {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn header(&self, out: &mut String, f: &Frame) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(
            out,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            esc(&self.title)
        );
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        let _ = writeln!(
            out,
            r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
        );
        for k in 0..=4 {
            let v = f.lo + (f.hi - f.lo) * k as f64 / 4.0;
            let y = f.y(v);
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3}</text>"#,
                x0 - 4.0,
                x0 - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            esc(&self.y_label)
        );
    }

    fn legend(&self, out: &mut String) {
        for (i, s) in self.series.iter().enumerate() {
            let y = TOP + 16.0 * i as f64;
            let x = WIDTH - RIGHT + 12.0;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                y,
                PALETTE[i % PALETTE.len()],
                x + 14.0,
                y + 9.0,
                esc(&s.name)
            );
        }
    }

    fn x_ticks(&self, out: &mut String, centre: impl Fn(usize) -> f64) {
        for (j, c) in self.categories.iter().enumerate() {
            let x = centre(j);
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                HEIGHT - BOTTOM + 16.0,
                esc(c)
            );
        }
    }

    fn error_bar(out: &mut String, f: &Frame, x: f64, v: f64, e: Option<f64>, colour: &str) {
        if let Some(e) = e {
            let _ = writeln!(
                out,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{colour}" data-std="{}"/>"#,
                f.y(v - e),
                f.y(v + e),
                fmt_value(e)
            );
        }
    }

    /// Points joined by lines, one polyline per series.
    pub fn to_line_svg(&self) -> String {
        let f = self.frame();
        let mut out = String::new();
        self.header(&mut out, &f);
        let n = self.categories.len().max(1);
        let step = (WIDTH - LEFT - RIGHT) / n as f64;
        let centre = |j: usize| LEFT + step * (j as f64 + 0.5);
        self.x_ticks(&mut out, centre);
        for (i, s) in self.series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = s
                .values
                .iter()
                .enumerate()
                .filter_map(|(j, v)| v.map(|v| format!("{:.1},{:.1}", centre(j), f.y(v))))
                .collect();
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="2"{dash} points="{}"/>"#,
                pts.join(" ")
            );
            for (j, v) in s.values.iter().enumerate() {
                let Some(v) = *v else { continue };
                Self::error_bar(
                    &mut out,
                    &f,
                    centre(j),
                    v,
                    s.errors.get(j).copied().flatten(),
                    colour,
                );
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{colour}" data-series="{}" data-x="{}" data-value="{}"/>"#,
                    centre(j),
                    f.y(v),
                    esc(&s.name),
                    esc(&self.categories[j]),
                    fmt_value(v)
                );
            }
        }
        self.legend(&mut out);
        out.push_str("</svg>\n");
        out
    }

    /// One bar group per category, one bar per series.
    pub fn to_bar_svg(&self) -> String {
        let mut f = self.frame();
        if self.y_range.is_none() {
            f.lo = f.lo.min(0.0);
        }
        let mut out = String::new();
        self.header(&mut out, &f);
        let n = self.categories.len().max(1);
        let group = (WIDTH - LEFT - RIGHT) / n as f64;
        let k = self.series.len().max(1);
        let bar = group * 0.8 / k as f64;
        let centre = |j: usize| LEFT + group * (j as f64 + 0.5);
        self.x_ticks(&mut out, centre);
        let base = f.y(f.lo.max(0.0).min(f.hi));
        for (i, s) in self.series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            for (j, v) in s.values.iter().enumerate() {
                let Some(v) = *v else { continue };
                let x = LEFT + group * j as f64 + group * 0.1 + bar * i as f64;
                let y = f.y(v);
                let _ = writeln!(
                    out,
                    r#"<rect x="{x:.1}" y="{:.1}" width="{bar:.1}" height="{:.1}" fill="{colour}" data-series="{}" data-x="{}" data-value="{}"/>"#,
                    y.min(base),
                    (base - y).abs(),
                    esc(&s.name),
                    esc(&self.categories[j]),
                    fmt_value(v)
                );
                Self::error_bar(
                    &mut out,
                    &f,
                    x + bar / 2.0,
                    v,
                    s.errors.get(j).copied().flatten(),
                    "black",
                );
            }
        }
        self.legend(&mut out);
        out.push_str("</svg>\n");
        out
    }
}

/// Values of every `data-value` attribute in document order.
pub fn data_values(svg: &str) -> Vec<String> {
    svg.match_indices("data-value=\"")
        .map(|(i, m)| {
            let rest = &svg[i + m.len()..];
            rest[..rest.find('"').unwrap_or(rest.len())].to_string()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart {
            title: "t <1>".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            categories: vec!["0".into(), "1".into(), "4+".into()],
            series: vec![
                Series::new("a", vec![Some(0.1), None, Some(0.30000000000000004)])
                    .with_errors(vec![Some(0.01), None, None]),
                Series::new("b", vec![Some(1.0), Some(0.5), Some(0.25)]).dashed(),
            ],
            y_range: Some((0.0, 1.0)),
        }
    }

    #[test]
    fn data_values_are_exact_round_trips() {
        for svg in [chart().to_line_svg(), chart().to_bar_svg()] {
            assert_eq!(
                data_values(&svg),
                ["0.1", "0.30000000000000004", "1", "0.5", "0.25"]
            );
            assert!(svg.contains("t &lt;1&gt;"));
            assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        assert_eq!(chart().to_line_svg(), chart().to_line_svg());
    }

    #[test]
    fn empty_chart_renders() {
        let c = Chart {
            series: vec![],
            y_range: None,
            ..chart()
        };
        assert!(data_values(&c.to_bar_svg()).is_empty());
    }
}
