//! Self-contained SVG line charts.

use std::fmt::Write as _;

use esdp_core::casestudies::CaseStudyOutput;
use esdp_core::fmt::sig6;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Base-2 logarithmic abscissa; requires positive x values.
    pub log2_x: bool,
    pub series: Vec<Series>,
}

impl Chart {
    /// One series per plotted column of a case-study table.
    pub fn from_case_study(out: &CaseStudyOutput) -> Self {
        let plotted: Vec<usize> = match out.name.as_str() {
            "case3_grinding" => vec![3],
            "case4_ethereum_randao" => vec![2],
            _ => (1..out.columns.len()).collect(),
        };
        let x = &out.columns[0];
        let unit = &out.columns[plotted[0]].unit;
        let series = plotted
            .iter()
            .map(|&c| Series {
                label: out.columns[c].name.clone(),
                points: out.rows.iter().map(|r| (r[0], r[c])).collect(),
            })
            .collect();
        Chart {
            title: out.name.clone(),
            x_label: format!("{} ({})", x.name, x.unit),
            y_label: if plotted.len() == 1 {
                format!("{} ({unit})", out.columns[plotted[0]].name)
            } else {
                format!("value ({unit})")
            },
            log2_x: out.log2_abscissa,
            series,
        }
    }

    pub fn render(&self) -> String {
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| self.x_of(p.0)));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1));
        let (x0, x1) = padded_range(xs);
        let (y0, y1) = padded_range(ys);
        let x_ticks = if self.log2_x {
            (x0.ceil() as i64..=x1.floor() as i64)
                .map(|e| e as f64)
                .collect()
        } else {
            nice_ticks(x0, x1)
        };
        let y_ticks = nice_ticks(y0, y1);
        let (x0, x1) = widen(x0, x1, &x_ticks);
        let (y0, y1) = widen(y0, y1, &y_ticks);

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let py = |y: f64| MARGIN_TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(
            svg,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        let _ = writeln!(svg, r##"<g stroke="#cccccc" stroke-width="0.5">"##);
        for &t in &x_ticks {
            let _ = writeln!(
                svg,
                r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/>"#,
                px(t),
                MARGIN_TOP,
                MARGIN_TOP + plot_h
            );
        }
        for &t in &y_ticks {
            let _ = writeln!(
                svg,
                r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}"/>"#,
                MARGIN_LEFT,
                py(t),
                MARGIN_LEFT + plot_w
            );
        }
        let _ = writeln!(svg, "</g>");

        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(svg, r#"<g text-anchor="middle">"#);
        for &t in &x_ticks {
            let label = if self.log2_x { sig6(t.exp2()) } else { sig6(t) };
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                px(t),
                MARGIN_TOP + plot_h + 18.0,
                label
            );
        }
        let _ = writeln!(svg, "</g>");
        let _ = writeln!(svg, r#"<g text-anchor="end">"#);
        for &t in &y_ticks {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                MARGIN_LEFT - 6.0,
                py(t) + 4.0,
                sig6(t)
            );
        }
        let _ = writeln!(svg, "</g>");
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 20.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        );

        for (n, s) in self.series.iter().enumerate() {
            let color = PALETTE[n % PALETTE.len()];
            let points: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(self.x_of(x)), py(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                points.join(" ")
            );
            let ly = MARGIN_TOP + 16.0 + 18.0 * n as f64;
            let lx = MARGIN_LEFT + plot_w - 150.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
                lx + 24.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 30.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }

    fn x_of(&self, x: f64) -> f64 {
        if self.log2_x {
            x.log2()
        } else {
            x
        }
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn widen(lo: f64, hi: f64, ticks: &[f64]) -> (f64, f64) {
    let lo = ticks.first().map_or(lo, |t| lo.min(*t));
    let hi = ticks.last().map_or(hi, |t| hi.max(*t));
    (lo, hi)
}

/// Round-numbered ticks (1, 2 or 5 times a power of ten) covering the range.
fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
