// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Self-contained SVG charts.
//!
//! Output depends only on the input values: coordinates are printed with two
//! decimals and nothing time- or locale-dependent is emitted.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::RunReport;
use crate::num::Scalar;

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const SUCCESS_COLOR: &str = "#1f77b4";
const MISS_COLOR: &str = "#d62728";
const X_COLOR: &str = "#2ca02c";
const F_COLOR: &str = "#9467bd";
const DASH: &str = "6 4";

/// Most points per evolution polyline.
pub const MAX_COLUMNS: usize = 1000;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    out: String,
}

impl Frame {
    fn new(title: &str, x_label: &str) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + plot_w() / 2.0,
            esc(title)
        );
        // y axis is always a rate in [0, 1]
        for i in 0..=5 {
            let v = i as f64 / 5.0;
            let y = py(v);
            let _ = writeln!(
                out,
                r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"##,
                LEFT + plot_w(),
                LEFT - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            plot_w(),
            plot_h()
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w() / 2.0,
            H - 12.0,
            esc(x_label)
        );
        Frame { out }
    }

    fn finish(mut self, path: &Path) -> Result<()> {
        self.out.push_str("</svg>\n");
        std::fs::write(path, self.out).map_err(|e| Error::io(path, e))
    }
}

fn plot_w() -> f64 {
    W - LEFT - RIGHT
}

fn plot_h() -> f64 {
    H - TOP - BOTTOM
}

fn py(v: f64) -> f64 {
    TOP + plot_h() * (1.0 - v.clamp(0.0, 1.0))
}

fn polyline(points: &[(f64, f64)], color: &str, dashed: bool) -> String {
    let mut pts = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        if i > 0 {
            pts.push(' ');
        }
        let _ = write!(pts, "{x:.2},{y:.2}");
    }
    let dash = if dashed { format!(r#" stroke-dasharray="{DASH}""#) } else { String::new() };
    format!(r#"<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#)
}

fn legend_entry(out: &mut String, row: usize, label: &str, color: &str, dashed: bool) {
    let x = LEFT + plot_w() + 14.0;
    let y = TOP + 10.0 + 18.0 * row as f64;
    out.push_str(&polyline(&[(x, y), (x + 24.0, y)], color, dashed));
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 30.0, y + 4.0, esc(label));
}

/// Per-preset mean success and miss rates across seeds, drawn as one solid
/// success series and one dashed miss series per preset, in order of first
/// appearance.
pub fn emit_comparison_plot<T: Scalar>(reports: &[RunReport<T>], path: &Path) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::config("reports", "nothing to plot"));
    }
    let mut groups: Vec<(&str, Vec<&RunReport<T>>)> = Vec::new();
    for r in reports {
        match groups.iter_mut().find(|(p, _)| *p == r.preset) {
            Some((_, v)) => v.push(r),
            None => groups.push((&r.preset, vec![r])),
        }
    }
    let n = groups.len();
    let col = plot_w() / n as f64;
    let mut frame = Frame::new("Success and deadline miss rate by preset", "preset");
    let out = &mut frame.out;
    let mut success_pts = Vec::new();
    let mut miss_pts = Vec::new();
    for (i, (preset, rs)) in groups.iter().enumerate() {
        let k = rs.len() as f64;
        let s = rs.iter().map(|r| r.success_rate.as_f64()).sum::<f64>() / k;
        let m = rs.iter().map(|r| r.deadline_miss_rate.as_f64()).sum::<f64>() / k;
        let cx = LEFT + col * (i as f64 + 0.5);
        success_pts.push((cx, py(s)));
        miss_pts.push((cx, py(m)));
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h() + 16.0,
            esc(preset)
        );
        for (kind, v, color, dashed) in [("success", s, SUCCESS_COLOR, false), ("miss", m, MISS_COLOR, true)] {
            let label = format!("{preset} {kind}");
            let y = py(v);
            let _ = writeln!(out, r#"<g class="series" data-label="{}">"#, esc(&label));
            let _ = writeln!(out, "<title>{} {v:.3}</title>", esc(&label));
            out.push_str(&polyline(&[(cx - col * 0.3, y), (cx + col * 0.3, y)], color, dashed));
            let _ = writeln!(
                out,
                r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" fill="{color}">{v:.3}</text>"#,
                y - 5.0
            );
            out.push_str("</g>\n");
        }
    }
    out.push_str(&polyline(&success_pts, SUCCESS_COLOR, false));
    out.push('\n');
    out.push_str(&polyline(&miss_pts, MISS_COLOR, true));
    out.push('\n');
    legend_entry(out, 0, "success rate", SUCCESS_COLOR, false);
    legend_entry(out, 1, "deadline miss rate", MISS_COLOR, true);
    frame.finish(path)
}

/// Step series resampled to at most `columns` pixel columns. Each column
/// keeps its first, lowest, highest and last value, so short excursions to
/// either bound stay visible.
pub fn downsample(series: &[(f64, f64)], t0: f64, t1: f64, columns: usize) -> Vec<(f64, f64)> {
    if series.len() <= 2 * columns || t1 <= t0 {
        let mut out = Vec::with_capacity(series.len() * 2);
        for (i, &(t, v)) in series.iter().enumerate() {
            if i > 0 {
                out.push((t, series[i - 1].1));
            }
            out.push((t, v));
        }
        return out;
    }
    let width = (t1 - t0) / columns as f64;
    let mut out = Vec::new();
    let mut i = 0;
    for c in 0..columns {
        let end = if c + 1 == columns { f64::INFINITY } else { t0 + width * (c + 1) as f64 };
        let start = i;
        while i < series.len() && series[i].0 < end {
            i += 1;
        }
        if start == i {
            continue;
        }
        let chunk = &series[start..i];
        let (lo, hi) =
            chunk.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
        let t = chunk[0].0;
        out.push((t, chunk[0].1));
        out.push((t, lo));
        out.push((t, hi));
        out.push((chunk[chunk.len() - 1].0, chunk[chunk.len() - 1].1));
    }
    out
}

/// X threshold (solid) and measured failure rate (dashed) against time.
pub fn emit_evolution_plot<T: Scalar>(report: &RunReport<T>, path: &Path) -> Result<()> {
    let xs: Vec<(f64, f64)> = report.threshold_series.iter().map(|&(t, v)| (t.as_f64(), v.as_f64())).collect();
    let fs: Vec<(f64, f64)> = report.failure_series.iter().map(|&(t, v)| (t.as_f64(), v.as_f64())).collect();
    if xs.is_empty() {
        return Err(Error::config("report", "empty threshold series"));
    }
    let t0 = xs[0].0.min(fs.first().map_or(f64::INFINITY, |p| p.0));
    let t1 = xs[xs.len() - 1].0.max(fs.last().map_or(f64::NEG_INFINITY, |p| p.0));
    let span = if t1 > t0 { t1 - t0 } else { 1.0 };
    let px = |t: f64| LEFT + plot_w() * (t - t0) / span;
    let to_px = |s: &[(f64, f64)]| -> Vec<(f64, f64)> {
        downsample(s, t0, t1, MAX_COLUMNS).into_iter().map(|(t, v)| (px(t), py(v))).collect()
    };

    let title = format!("Threshold and failure rate, {} seed {}", report.preset, report.seed);
    let mut frame = Frame::new(&title, "time (h)");
    let out = &mut frame.out;
    for i in 0..=4 {
        let t = t0 + span * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{t:.0}</text>"#,
            px(t),
            TOP + plot_h() + 16.0
        );
    }
    for (label, s, color, dashed) in [("x_thresh", &xs, X_COLOR, false), ("f_measured", &fs, F_COLOR, true)] {
        let _ = writeln!(out, r#"<g class="series" data-label="{label}">"#);
        out.push_str(&polyline(&to_px(s), color, dashed));
        out.push_str("\n</g>\n");
    }
    legend_entry(out, 0, "X threshold", X_COLOR, false);
    legend_entry(out, 1, "measured failure rate", F_COLOR, true);
    frame.finish(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Counts;

    fn report(preset: &str, seed: u64, s: f64) -> RunReport<f64> {
        RunReport {
            preset: preset.into(),
            seed,
            success_rate: s,
            deadline_miss_rate: 1.0 - s,
            counts: Counts { completed: 1, missed: 0, killed: 0, rejected: 0 },
            mean_utilization: 0.5,
            threshold_series: vec![(0.0, 0.9), (1.0, 0.1), (2.0, 0.5)],
            failure_series: vec![(0.0, 0.0), (1.0, 0.4), (2.0, 0.2)],
        }
    }

    #[test]
    fn five_presets_give_ten_series() {
        let dir = tempfile::tempdir().unwrap();
        let rs: Vec<_> = (1..=5).map(|i| report(&format!("alg_{i}"), 1, 0.1 * i as f64)).collect();
        let p = dir.path().join("comparison.svg");
        emit_comparison_plot(&rs, &p).unwrap();
        let svg = std::fs::read_to_string(&p).unwrap();
        assert_eq!(svg.matches(r#"<g class="series""#).count(), 10);
        assert!(svg.contains(r#"data-label="alg_3 miss""#));
        assert_eq!(svg.matches(DASH).count(), 5 + 1 + 1);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn seeds_are_averaged_and_output_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let rs = vec![report("alg_1", 1, 0.2), report("alg_1", 2, 0.4)];
        let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
        emit_comparison_plot(&rs, &a).unwrap();
        emit_comparison_plot(&rs, &b).unwrap();
        let svg = std::fs::read_to_string(&a).unwrap();
        assert_eq!(svg, std::fs::read_to_string(&b).unwrap());
        assert!(svg.contains("alg_1 success 0.300"), "{svg}");
        assert_eq!(svg.matches(r#"<g class="series""#).count(), 2);
    }

    #[test]
    fn evolution_has_both_traces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("evolution_alg_4.svg");
        emit_evolution_plot(&report("alg_4", 7, 0.8), &p).unwrap();
        let svg = std::fs::read_to_string(&p).unwrap();
        assert!(svg.contains(r#"data-label="x_thresh""#) && svg.contains(r#"data-label="f_measured""#));
        assert!(svg.contains("alg_4 seed 7"));
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_comparison_plot::<f64>(&[], &dir.path().join("c.svg")).is_err());
        let mut r = report("alg_4", 1, 0.5);
        r.threshold_series.clear();
        assert!(emit_evolution_plot(&r, &dir.path().join("e.svg")).is_err());
        let r = report("alg_4", 1, 0.5);
        assert!(emit_evolution_plot(&r, &dir.path().join("missing/e.svg")).is_err());
    }

    #[test]
    fn downsampling_keeps_extremes() {
        // 0.5 everywhere except one sample at 0.9 and one at 0.1
        let mut s: Vec<(f64, f64)> = (0..10_000).map(|i| (i as f64, 0.5)).collect();
        s[1234].1 = 0.9;
        s[8765].1 = 0.1;
        let d = downsample(&s, 0.0, 9_999.0, 100);
        assert!(d.len() <= 400);
        assert!(d.iter().any(|p| p.1 == 0.9) && d.iter().any(|p| p.1 == 0.1));
        assert!(d.windows(2).all(|w| w[0].0 <= w[1].0));

        let short = downsample(&[(0.0, 1.0), (2.0, 0.0)], 0.0, 2.0, 100);
        assert_eq!(short, [(0.0, 1.0), (2.0, 1.0), (2.0, 0.0)]);
    }
}
