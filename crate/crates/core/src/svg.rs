//! Hand-built SVG: cluster scatter plots and sweep line charts.

use std::fmt::Write as _;

use crate::cli::Aggregate;
use crate::clustering::Clustering;
use crate::dataio::DataMatrix;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;
const NOISE_COLOR: &str = "#9a9a9a";
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
];

/// Linear map from a data interval onto a pixel interval.
#[derive(Clone, Copy, Debug)]
struct Scale {
    lo: f64,
    hi: f64,
    start: f64,
    end: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, start: f64, end: f64) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Scale { lo, hi, start, end }
    }

    fn map(&self, v: f64) -> f64 {
        self.start + (v - self.lo) / (self.hi - self.lo) * (self.end - self.start)
    }
}

fn color(cluster: Option<usize>) -> &'static str {
    cluster.map_or(NOISE_COLOR, |c| PALETTE[c % PALETTE.len()])
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    s
}

/// One circle per point, using the first two coordinates (the second is
/// zero for one-dimensional data). Noise points are grey.
pub fn scatter(data: &DataMatrix, clustering: &Clustering, title: &str) -> String {
    let values = data.values();
    let y_of = |j: usize| if data.cols() > 1 { values[[j, 1]] } else { 0.0 };
    let xs = Scale::new(values.column(0).iter().copied(), MARGIN, WIDTH - MARGIN);
    let ys = Scale::new((0..data.rows()).map(y_of), HEIGHT - MARGIN, MARGIN);
    let mut s = open(title);
    for (j, label) in clustering.labels().iter().enumerate() {
        writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#,
            xs.map(values[[j, 0]]),
            ys.map(y_of(j)),
            color(*label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Mean curve per algorithm with a shaded mean ± std band.
pub fn line_chart(groups: &[Aggregate], x_label: &str, y_label: &str) -> String {
    let xs = Scale::new(groups.iter().map(|g| g.axis_value), MARGIN, WIDTH - MARGIN);
    let ys = Scale::new(
        groups
            .iter()
            .flat_map(|g| [g.f_mean - g.f_std, g.f_mean + g.f_std])
            .chain([0.0, 1.0]),
        HEIGHT - MARGIN,
        MARGIN,
    );
    let mut s = open(&format!("{y_label} vs {x_label}"));
    let (left, right) = (MARGIN, WIDTH - MARGIN);
    let (top, bottom) = (MARGIN, HEIGHT - MARGIN);
    writeln!(
        s,
        r#"<polyline points="{left},{top} {left},{bottom} {right},{bottom}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for (label, x, y, anchor) in [
        (format!("{:.3}", xs.lo), left, bottom + 16.0, "start"),
        (format!("{:.3}", xs.hi), right, bottom + 16.0, "end"),
        (format!("{:.2}", ys.lo), left - 4.0, bottom, "end"),
        (format!("{:.2}", ys.hi), left - 4.0, top + 4.0, "end"),
        (x_label.to_string(), WIDTH / 2.0, HEIGHT - 8.0, "middle"),
    ] {
        writeln!(
            s,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{}</text>"#,
            escape(&label)
        )
        .unwrap();
    }
    let mut algorithms = Vec::new();
    for g in groups {
        if !algorithms.contains(&g.algorithm) {
            algorithms.push(g.algorithm);
        }
    }
    for (i, algorithm) in algorithms.iter().enumerate() {
        let mut series: Vec<&Aggregate> = groups.iter().filter(|g| g.algorithm == *algorithm).collect();
        series.sort_by(|a, b| a.axis_value.total_cmp(&b.axis_value));
        let stroke = PALETTE[i % PALETTE.len()];
        let upper = series.iter().map(|g| (xs.map(g.axis_value), ys.map(g.f_mean + g.f_std)));
        let lower = series.iter().rev().map(|g| (xs.map(g.axis_value), ys.map(g.f_mean - g.f_std)));
        writeln!(
            s,
            r#"<polygon points="{}" fill="{stroke}" fill-opacity="0.15" stroke="none"/>"#,
            points(upper.chain(lower))
        )
        .unwrap();
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="2"/>"#,
            points(series.iter().map(|g| (xs.map(g.axis_value), ys.map(g.f_mean))))
        )
        .unwrap();
        let ly = top + 16.0 * i as f64;
        writeln!(
            s,
            r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="12" fill="{stroke}">{}</text>"#,
            right - 120.0,
            algorithm.name()
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn points(it: impl Iterator<Item = (f64, f64)>) -> String {
    it.map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ")
}
