//! Standalone SVG rendering for the three chart shapes insights use:
//! scatter with a fitted trend line, bar charts, and side-by-side pies.
//!
//! The SVG is built as text with a fixed 640x400 canvas. Axes are drawn as
//! `<path>` elements so that the single `<line>` in a scatter chart is the
//! trend line; data points are `<circle>`, bars are `<rect>`, and each pie
//! is a `<g class="pie">` of `<path>` slices.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::table::format_number;

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

/// The chart shapes, one per pattern family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    ScatterWithTrendLine,
    Bar,
    PieComparison,
}

impl ChartKind {
    pub fn label(self) -> &'static str {
        match self {
            ChartKind::ScatterWithTrendLine => "scatter_with_trend_line",
            ChartKind::Bar => "bar",
            ChartKind::PieComparison => "pie_comparison",
        }
    }
}

/// A labeled series of (category, value) points.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(String, f64)>,
}

/// A rendered chart: its kind, title, underlying data, and SVG text.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDoc {
    pub kind: ChartKind,
    pub title: String,
    pub series: Vec<Series>,
    pub rendered: String,
}

pub fn xml_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

fn svg_open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = write!(
        out,
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" \
         font-family=\"sans-serif\">{}</text>",
        WIDTH / 2.0,
        xml_escape(title)
    );
}

fn plot_area() -> (f64, f64, f64, f64) {
    (
        MARGIN_LEFT,
        MARGIN_TOP,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM,
    )
}

/// Value range padded so flat data still has visible extent.
fn value_range(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { libm::fabs(lo) * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn axes_path(out: &mut String) {
    let (x0, y0, x1, y1) = plot_area();
    let _ = write!(
        out,
        "<path d=\"M {x0:.2} {y0:.2} L {x0:.2} {y1:.2} L {x1:.2} {y1:.2}\" fill=\"none\" \
         stroke=\"black\" stroke-width=\"1\"/>"
    );
}

fn y_tick_labels(out: &mut String, lo: f64, hi: f64) {
    let (x0, y0, _, y1) = plot_area();
    for step in 0..=4 {
        let fraction = step as f64 / 4.0;
        let value = lo + (hi - lo) * fraction;
        let y = y1 - (y1 - y0) * fraction;
        let rounded = libm::round(value * 100.0) / 100.0;
        let _ = write!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"10\" \
             font-family=\"sans-serif\">{}</text>",
            x0 - 6.0,
            y + 3.0,
            xml_escape(&format_number(rounded))
        );
    }
}

/// Scatter plot of (x, y) points with an ordinary least-squares trend line.
/// The trend line is the only `<line>` element in the output.
pub fn scatter_with_trend(title: &str, labels: &[String], xs: &[f64], ys: &[f64]) -> String {
    let (px0, py0, px1, py1) = plot_area();
    let (x_lo, x_hi) = value_range(xs);
    let (y_lo, y_hi) = value_range(ys);
    let map_x = |x: f64| px0 + (x - x_lo) / (x_hi - x_lo) * (px1 - px0);
    let map_y = |y: f64| py1 - (y - y_lo) / (y_hi - y_lo) * (py1 - py0);

    let mut out = String::new();
    svg_open(&mut out, title);
    axes_path(&mut out);
    y_tick_labels(&mut out, y_lo, y_hi);

    for ((&x, &y), label) in xs.iter().zip(ys).zip(labels) {
        let _ = write!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"steelblue\"/>",
            map_x(x),
            map_y(y)
        );
        let _ = write!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"10\" \
             font-family=\"sans-serif\">{}</text>",
            map_x(x),
            py1 + 14.0,
            xml_escape(label)
        );
    }

    // Least-squares fit y = intercept + slope * x.
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut covariance = 0.0;
    let mut variance = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        covariance += (x - mean_x) * (y - mean_y);
        variance += (x - mean_x) * (x - mean_x);
    }
    let slope = if variance > 0.0 { covariance / variance } else { 0.0 };
    let intercept = mean_y - slope * mean_x;
    let clamp_y = |y: f64| y.max(py0).min(py1);
    let _ = write!(
        out,
        "<line class=\"trend\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
         stroke=\"firebrick\" stroke-width=\"2\"/>",
        map_x(x_lo),
        clamp_y(map_y(intercept + slope * x_lo)),
        map_x(x_hi),
        clamp_y(map_y(intercept + slope * x_hi)),
    );

    out.push_str("</svg>");
    out
}

/// Vertical bar chart; bars grow from the zero line so negative values hang
/// downward. With `percent_of_total`, labels carry each bar's share.
pub fn bar_chart(
    title: &str,
    labels: &[String],
    values: &[f64],
    percent_of_total: bool,
) -> String {
    let (px0, py0, px1, py1) = plot_area();
    let mut range_values: Vec<f64> = values.to_vec();
    range_values.push(0.0);
    let (lo, hi) = value_range(&range_values);
    let map_y = |v: f64| py1 - (v - lo) / (hi - lo) * (py1 - py0);
    let zero_y = map_y(0.0);
    let total: f64 = values.iter().sum();

    let mut out = String::new();
    svg_open(&mut out, title);
    axes_path(&mut out);
    y_tick_labels(&mut out, lo, hi);

    let n = values.len().max(1) as f64;
    let slot = (px1 - px0) / n;
    let bar_width = slot * 0.7;
    for (i, (&value, label)) in values.iter().zip(labels).enumerate() {
        let x = px0 + slot * i as f64 + (slot - bar_width) / 2.0;
        let top = map_y(value).min(zero_y);
        let height = libm::fabs(map_y(value) - zero_y);
        let _ = write!(
            out,
            "<rect x=\"{x:.2}\" y=\"{top:.2}\" width=\"{bar_width:.2}\" \
             height=\"{height:.2}\" fill=\"steelblue\"/>"
        );
        let text = if percent_of_total && total != 0.0 {
            let pct = libm::round(value / total * 1000.0) / 10.0;
            alloc::format!("{} ({}%)", label, format_number(pct))
        } else {
            label.clone()
        };
        let _ = write!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"10\" \
             font-family=\"sans-serif\">{}</text>",
            x + bar_width / 2.0,
            py1 + 14.0,
            xml_escape(&text)
        );
    }

    out.push_str("</svg>");
    out
}

/// Two pies side by side, one `<g class="pie">` each, for comparing a
/// distribution before and after a condition.
pub fn dual_pie(
    title: &str,
    left_label: &str,
    left: &[(String, f64)],
    right_label: &str,
    right: &[(String, f64)],
) -> String {
    let mut out = String::new();
    svg_open(&mut out, title);
    let radius = 100.0;
    let cy = HEIGHT / 2.0 + 10.0;
    pie_group(&mut out, WIDTH * 0.27, cy, radius, left_label, left);
    pie_group(&mut out, WIDTH * 0.73, cy, radius, right_label, right);
    out.push_str("</svg>");
    out
}

fn pie_group(
    out: &mut String,
    cx: f64,
    cy: f64,
    radius: f64,
    label: &str,
    shares: &[(String, f64)],
) {
    const PALETTE: [&str; 6] = [
        "steelblue",
        "darkorange",
        "seagreen",
        "firebrick",
        "mediumpurple",
        "goldenrod",
    ];
    let total: f64 = shares.iter().map(|(_, v)| v).sum();
    let _ = write!(out, "<g class=\"pie\">");
    let _ = write!(
        out,
        "<text x=\"{cx:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\" \
         font-family=\"sans-serif\">{}</text>",
        cy + radius + 24.0,
        xml_escape(label)
    );
    if total <= 0.0 {
        let _ = write!(out, "</g>");
        return;
    }

    let mut angle = -core::f64::consts::FRAC_PI_2;
    for (i, (name, value)) in shares.iter().enumerate() {
        let share = value / total;
        if share <= 0.0 {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        if share >= 0.999_999 {
            let _ = write!(
                out,
                "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{radius:.2}\" fill=\"{color}\"/>"
            );
            let _ = write!(
                out,
                "<text x=\"{cx:.2}\" y=\"{cy:.2}\" text-anchor=\"middle\" font-size=\"10\" \
                 font-family=\"sans-serif\">{} (100%)</text>",
                xml_escape(name)
            );
            break;
        }
        let sweep = share * core::f64::consts::TAU;
        let x1 = cx + radius * libm::cos(angle);
        let y1 = cy + radius * libm::sin(angle);
        let x2 = cx + radius * libm::cos(angle + sweep);
        let y2 = cy + radius * libm::sin(angle + sweep);
        let large_arc = if sweep > core::f64::consts::PI { 1 } else { 0 };
        let _ = write!(
            out,
            "<path d=\"M {cx:.2} {cy:.2} L {x1:.2} {y1:.2} A {radius:.2} {radius:.2} 0 \
             {large_arc} 1 {x2:.2} {y2:.2} Z\" fill=\"{color}\" stroke=\"white\" \
             stroke-width=\"1\"/>"
        );
        let mid = angle + sweep / 2.0;
        let lx = cx + radius * 1.25 * libm::cos(mid);
        let ly = cy + radius * 1.25 * libm::sin(mid);
        let pct = libm::round(share * 1000.0) / 10.0;
        let _ = write!(
            out,
            "<text x=\"{lx:.2}\" y=\"{ly:.2}\" text-anchor=\"middle\" font-size=\"10\" \
             font-family=\"sans-serif\">{} ({}%)</text>",
            xml_escape(name),
            format_number(pct)
        );
        angle += sweep;
    }
    let _ = write!(out, "</g>");
}
