//! SVG rendering of plot specs.
//!
//! Output depends only on the spec: numbers are printed with six
//! significant digits and elements are written in layer order.

use std::fmt::Write as _;

use ellband_core::plot::{Layer, PlotSpec, Style};

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 16.0;
const MARGIN_BOTTOM: f64 = 52.0;
const TICKS: usize = 5;

/// Six significant digits, trailing zeros removed, no exponent for the
/// magnitudes that occur in pixel space and tick labels.
pub fn fmt6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return "0".to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&mag) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo > hi {
            return Range { lo: 0.0, hi: 1.0 };
        }
        if lo == hi {
            return Range {
                lo: lo - 0.5,
                hi: hi + 0.5,
            };
        }
        let pad = 0.04 * (hi - lo);
        Range {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn frac(&self, v: f64) -> f64 {
        ((v - self.lo) / (self.hi - self.lo)).clamp(-0.02, 1.02)
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / TICKS as f64;
    let base = 10f64.powf(raw.log10().floor());
    let m = raw / base;
    let k = if m < 1.5 {
        1.0
    } else if m < 3.0 {
        2.0
    } else if m < 7.0 {
        5.0
    } else {
        10.0
    };
    k * base
}

fn ticks(r: Range) -> Vec<f64> {
    let step = nice_step(r.hi - r.lo);
    let first = (r.lo / step).ceil() as i64;
    let last = (r.hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

struct Frame {
    x: Range,
    y: Range,
    left: f64,
    top: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + self.x.frac(x) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        let y = if y.is_nan() { self.y.lo } else { y };
        self.top + (1.0 - self.y.frac(y)) * self.h
    }

    fn point(&self, x: f64, y: f64) -> String {
        format!("{},{}", fmt6(self.px(x)), fmt6(self.py(y)))
    }
}

fn displayed(spec: &PlotSpec) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
    spec.layers
        .iter()
        .map(|l| match l {
            Layer::Band {
                x, lower, upper, ..
            } => (
                x.clone(),
                vec![spec.display_y(lower), spec.display_y(upper)],
            ),
            Layer::Line { x, y, .. } | Layer::Points { x, y, .. } => {
                (x.clone(), vec![spec.display_y(y)])
            }
        })
        .collect()
}

fn style_of(layer: &Layer) -> &Style {
    match layer {
        Layer::Band { style, .. } | Layer::Line { style, .. } | Layer::Points { style, .. } => {
            style
        }
    }
}

pub fn emit_svg(spec: &PlotSpec) -> String {
    let (width, height) = (spec.width.max(120) as f64, spec.height.max(120) as f64);
    let shown = displayed(spec);
    let xr = Range::of(shown.iter().flat_map(|(x, _)| x.iter().copied()));
    let yr = Range::of(
        shown
            .iter()
            .flat_map(|(_, ys)| ys.iter().flatten().copied()),
    );
    let f = Frame {
        x: xr,
        y: yr,
        left: MARGIN_LEFT,
        top: MARGIN_TOP,
        w: width - MARGIN_LEFT - MARGIN_RIGHT,
        h: height - MARGIN_TOP - MARGIN_BOTTOM,
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = fmt6(width),
        h = fmt6(height)
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        fmt6(width),
        fmt6(height)
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot-area"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath></defs>"#,
        fmt6(f.left),
        fmt6(f.top),
        fmt6(f.w),
        fmt6(f.h)
    );
    write_axes(&mut s, spec, &f);

    let _ = writeln!(s, r#"<g clip-path="url(#plot-area)">"#);
    for (layer, (x, ys)) in spec.layers.iter().zip(&shown) {
        let st = style_of(layer);
        match layer {
            Layer::Band { .. } => {
                let mut pts: Vec<String> =
                    x.iter().zip(&ys[1]).map(|(&a, &b)| f.point(a, b)).collect();
                pts.extend(x.iter().zip(&ys[0]).rev().map(|(&a, &b)| f.point(a, b)));
                let _ = writeln!(
                    s,
                    r#"<polygon class="band" points="{}" fill="{}" fill-opacity="{}" stroke="none"/>"#,
                    pts.join(" "),
                    escape(&st.color),
                    fmt6(st.opacity)
                );
            }
            Layer::Line { .. } => {
                let pts: Vec<String> = x.iter().zip(&ys[0]).map(|(&a, &b)| f.point(a, b)).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline class="expected" points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
                    pts.join(" "),
                    escape(&st.color),
                    fmt6(st.line_width)
                );
            }
            Layer::Points { label, .. } => {
                let _ = writeln!(
                    s,
                    r#"<g class="points" fill="{}" fill-opacity="{}">"#,
                    escape(&st.color),
                    fmt6(st.opacity)
                );
                let _ = writeln!(s, "<title>{}</title>", escape(label));
                for (&a, &b) in x.iter().zip(&ys[0]) {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{}" cy="{}" r="{}"/>"#,
                        fmt6(f.px(a)),
                        fmt6(f.py(b)),
                        fmt6(st.point_size)
                    );
                }
                let _ = writeln!(s, "</g>");
            }
        }
    }
    let _ = writeln!(s, "</g>");
    write_legend(&mut s, spec, &f);
    s.push_str("</svg>\n");
    s
}

fn write_axes(s: &mut String, spec: &PlotSpec, f: &Frame) {
    let (x0, x1) = (f.left, f.left + f.w);
    let (y0, y1) = (f.top + f.h, f.top);
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" stroke-width="1" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        fmt6(x0),
        fmt6(y0),
        fmt6(x1),
        fmt6(y0)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        fmt6(x0),
        fmt6(y0),
        fmt6(x0),
        fmt6(y1)
    );
    for t in ticks(f.x) {
        let px = f.px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{p}" y1="{}" x2="{p}" y2="{}"/>"#,
            fmt6(y0),
            fmt6(y0 + 4.0),
            p = fmt6(px)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" stroke="none">{}</text>"#,
            fmt6(px),
            fmt6(y0 + 16.0),
            fmt6(t)
        );
    }
    for t in ticks(f.y) {
        let py = f.py(t);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{p}" x2="{}" y2="{p}"/>"#,
            fmt6(x0 - 4.0),
            fmt6(x0),
            p = fmt6(py)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" stroke="none">{}</text>"#,
            fmt6(x0 - 6.0),
            fmt6(py + 4.0),
            fmt6(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" stroke="none">{}</text>"#,
        fmt6(f.left + f.w / 2.0),
        fmt6(y0 + 38.0),
        escape(&spec.x_label)
    );
    let cy = f.top + f.h / 2.0;
    let _ = writeln!(
        s,
        r#"<text x="14" y="{c}" text-anchor="middle" stroke="none" transform="rotate(-90 14 {c})">{}</text>"#,
        escape(&spec.y_label),
        c = fmt6(cy)
    );
    let _ = writeln!(s, "</g>");
}

fn write_legend(s: &mut String, spec: &PlotSpec, f: &Frame) {
    let labels: Vec<(&str, &Style)> = spec
        .layers
        .iter()
        .filter_map(|l| match l {
            Layer::Points { label, style, .. } => Some((label.as_str(), style)),
            _ => None,
        })
        .collect();
    if labels.len() < 2 {
        return;
    }
    let _ = writeln!(
        s,
        r#"<g class="legend" font-family="sans-serif" font-size="11">"#
    );
    for (i, (label, st)) in labels.iter().enumerate() {
        let y = f.top + 14.0 + 16.0 * i as f64;
        let x = f.left + 12.0;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="8" height="8" fill="{}"/>"#,
            fmt6(x),
            fmt6(y - 8.0),
            escape(&st.color)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            fmt6(x + 12.0),
            fmt6(y),
            escape(label)
        );
    }
    let _ = writeln!(s, "</g>");
}
