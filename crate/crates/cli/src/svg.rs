//! Static line plots, written by hand.

use std::fmt::Write;

use equibif_core::equivariant::Fired;
use equibif_core::report::BifurcationReport;

use crate::output::mode_columns;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Frame {
    x: [f64; 2],
    y: [f64; 2],
}

impl Frame {
    fn new(x: [f64; 2], ys: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        let x = if x[1] > x[0] { x } else { [x[0] - 0.5, x[0] + 0.5] };
        Self {
            x,
            y: [lo - pad, hi + pad],
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x[0]) / (self.x[1] - self.x[0]) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y[0]) / (self.y[1] - self.y[0]) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn open(title: &str, frame: &Frame, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<path d="M{x0} {y0}V{y1}H{x1}" fill="none" stroke="black"/>"#);
    for (v, anchor) in [(frame.x[0], "start"), (frame.x[1], "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="{anchor}">{}</text>"#,
            frame.px(v),
            y1 + 16.0,
            num(v)
        );
    }
    for v in frame.y {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            frame.py(v) + 4.0,
            num(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
    s
}

fn num(v: f64) -> String {
    format!("{v:.4}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn instant_markers(s: &mut String, report: &BifurcationReport, frame: &Frame) {
    for inst in &report.instants {
        let color = if inst.verdict.fired == Fired::None {
            "#999999"
        } else {
            "#d62728"
        };
        let x = frame.px(inst.parameter);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{MARGIN}" x2="{x:.2}" y2="{}" stroke="{color}" stroke-dasharray="4 3"/>"#,
            HEIGHT - MARGIN
        );
    }
}

/// Morse index staircase with dashed lines at the instants, red where the
/// criterion fired.
pub fn index_plot(report: &BifurcationReport) -> String {
    let points: Vec<(f64, f64)> = report
        .samples
        .iter()
        .filter_map(|s| s.morse_index.map(|i| (s.parameter, i as f64)))
        .collect();
    let frame = Frame::new(report.interval, points.iter().map(|p| p.1));
    let mut s = open(
        &format!("{}: Morse index", report.family),
        &frame,
        &report.parameter,
        "index",
    );
    if let Some(&(x, y)) = points.first() {
        let mut d = format!("M{:.2} {:.2}", frame.px(x), frame.py(y));
        for w in points.windows(2) {
            let _ = write!(d, "H{:.2}V{:.2}", frame.px(w[1].0), frame.py(w[1].1));
        }
        let _ = writeln!(
            s,
            r#"<path d="{d}" fill="none" stroke="{}" stroke-width="2"/>"#,
            PALETTE[0]
        );
    }
    instant_markers(&mut s, report, &frame);
    s.push_str("</svg>\n");
    s
}

/// One curve per mode with conjugate values; `None` if no sample has any.
pub fn conjugate_plot(report: &BifurcationReport) -> Option<String> {
    let (_, conj) = mode_columns(report);
    if conj.is_empty() {
        return None;
    }
    let series: Vec<Vec<(f64, f64)>> = conj
        .iter()
        .map(|label| {
            report
                .samples
                .iter()
                .filter_map(|s| {
                    let v = s.modes.iter().find(|m| &m.mode == label)?.conjugate_value?;
                    Some((s.parameter, v))
                })
                .collect()
        })
        .collect();
    let frame = Frame::new(report.interval, series.iter().flatten().map(|p| p.1).chain([0.0]));
    let mut s = open(
        &format!("{}: conjugate values", report.family),
        &frame,
        &report.parameter,
        "value",
    );
    let _ = writeln!(
        s,
        r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#cccccc"/>"##,
        WIDTH - MARGIN,
        y = frame.py(0.0)
    );
    for (i, (label, pts)) in conj.iter().zip(&series).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let d: Vec<String> = pts
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| {
                format!(
                    "{}{:.2} {:.2}",
                    if k == 0 { 'M' } else { 'L' },
                    frame.px(x),
                    frame.py(y)
                )
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            d.join("")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">mode {}</text>"#,
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * i as f64,
            escape(label)
        );
    }
    instant_markers(&mut s, report, &frame);
    s.push_str("</svg>\n");
    Some(s)
}
