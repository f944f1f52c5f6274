//! Hand-written SVG line charts: mean curves with a shaded ±1 std band.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use psox_core::stats::summarize;
use psox_core::Benchmark;

use crate::error::{HarnessError, Result};
use crate::experiment::{write_file, CellKey, ResultsBundle};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub curves: Vec<Curve>,
    /// Draw point markers (useful for sparse x such as mutation rates).
    pub markers: bool,
}

impl Panel {
    /// Log axis iff every finite mean is strictly positive.
    pub fn log_scale(&self) -> bool {
        let mut any = false;
        for v in self
            .curves
            .iter()
            .flat_map(|c| &c.mean)
            .filter(|v| v.is_finite())
        {
            if *v <= 0.0 {
                return false;
            }
            any = true;
        }
        any
    }
}

/// Per-generation mean and std across runs. Runs of unequal length are cut
/// to the shortest.
pub fn curve_from_traces(label: impl Into<String>, runs: &[Vec<f64>]) -> Option<Curve> {
    let len = runs.iter().map(Vec::len).min()?;
    if len == 0 {
        return None;
    }
    let mut mean = Vec::with_capacity(len);
    let mut std = Vec::with_capacity(len);
    let mut column = Vec::with_capacity(runs.len());
    for g in 0..len {
        column.clear();
        column.extend(runs.iter().map(|r| r[g]));
        let (m, s) = summarize(&column).ok()?;
        mean.push(m);
        std.push(s);
    }
    Some(Curve {
        label: label.into(),
        x: (1..=len).map(|g| g as f64).collect(),
        mean,
        std,
    })
}

/// One curve per operator (and mutation, when the bundle has several).
pub fn convergence_panel(bundle: &ResultsBundle, problem: Benchmark) -> Option<Panel> {
    let cfg = bundle.config();
    let tag_mutation = cfg.mutations.len() > 1;
    let mut curves = Vec::new();
    for op in &cfg.operators {
        for m in &cfg.mutations {
            let key = CellKey {
                problem: problem.id(),
                operator: op.kind.label().to_string(),
                mutation: m.kind.label().to_string(),
            };
            let Some(runs) = bundle.traces.get(&key) else {
                continue;
            };
            let label = if tag_mutation {
                format!("{}-{}", key.operator, key.mutation)
            } else {
                key.operator.clone()
            };
            if let Some(c) = curve_from_traces(label, runs) {
                curves.push(c);
            }
        }
    }
    if curves.is_empty() {
        return None;
    }
    Some(Panel {
        title: format!("p{:02} {}", problem.id(), problem.name()),
        x_label: "generation".into(),
        y_label: "mean best-so-far".into(),
        curves,
        markers: false,
    })
}

/// Writes `p<NN>.svg` per requested problem into `out_dir`. Fails without
/// writing anything if any requested problem has no traces.
pub fn plot_convergence(
    bundle: &ResultsBundle,
    problems: &[Benchmark],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut panels = Vec::new();
    let mut missing = Vec::new();
    for &p in problems {
        match convergence_panel(bundle, p) {
            Some(panel) => panels.push((p, panel)),
            None => missing.push(p.id().to_string()),
        }
    }
    if problems.is_empty() || !missing.is_empty() {
        return Err(HarnessError::NoTraces(if problems.is_empty() {
            "(none requested)".into()
        } else {
            missing.join(", ")
        }));
    }
    let mut written = Vec::new();
    for (p, panel) in panels {
        let path = out_dir.join(format!("p{:02}.svg", p.id()));
        write_file(&path, &render_svg(&panel))?;
        written.push(path);
    }
    Ok(written)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn t(&self, v: f64) -> f64 {
        let v = if self.log {
            v.max(10f64.powf(self.lo)).log10()
        } else {
            v
        };
        ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let first = self.lo.ceil() as i64;
            let last = self.hi.floor() as i64;
            let span = (last - first).max(0) as usize;
            let step = (span / 7).max(1) as i64;
            (first..=last)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e as i32), format!("1e{e}")))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let decimals = (-step.log10().floor()).max(0.0) as usize;
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step + 1e-9).floor() as i64;
            (first..=last)
                .map(|k| {
                    let v = k as f64 * step;
                    (v, format!("{:.*}", decimals, v + 0.0))
                })
                .collect()
        }
    }
}

fn pad_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let d = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - d, hi + d)
    }
}

fn y_axis(panel: &Panel) -> Axis {
    let log = panel.log_scale();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in &panel.curves {
        for (m, s) in c.mean.iter().zip(&c.std) {
            if !m.is_finite() {
                continue;
            }
            let s = if s.is_finite() { *s } else { 0.0 };
            let (low, high) = if log {
                let low = if m - s > 0.0 { m - s } else { *m };
                (low.log10(), (m + s).log10())
            } else {
                (m - s, m + s)
            };
            lo = lo.min(low);
            hi = hi.max(high);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Axis {
            lo: 0.0,
            hi: 1.0,
            log: false,
        };
    }
    let (lo, hi) = if log {
        let (lo, hi) = (lo.floor(), hi.ceil());
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        }
    } else {
        pad_range(lo, hi)
    };
    Axis { lo, hi, log }
}

fn x_axis(panel: &Panel) -> Axis {
    let xs = panel.curves.iter().flat_map(|c| &c.x).copied();
    let lo = xs.clone().fold(f64::INFINITY, f64::min);
    let hi = xs.fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() {
        pad_range(lo, hi)
    } else {
        (0.0, 1.0)
    };
    Axis { lo, hi, log: false }
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders one panel as a standalone SVG document.
pub fn render_svg(panel: &Panel) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let xa = x_axis(panel);
    let ya = y_axis(panel);
    let px = |x: f64| LEFT + xa.t(x) * plot_w;
    let py = |y: f64| TOP + (1.0 - ya.t(y)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text class="title" x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        fmt2(LEFT + plot_w / 2.0),
        escape(&panel.title)
    );
    let _ = writeln!(
        s,
        r##"<rect class="frame" x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    );

    for (v, label) in ya.ticks() {
        let y = fmt2(py(v));
        let _ = writeln!(
            s,
            r##"<line class="ytick" x1="{LEFT}" x2="{}" y1="{y}" y2="{y}" stroke="#ddd"/><text x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">{}</text>"##,
            fmt2(LEFT + plot_w),
            fmt2(LEFT - 6.0),
            escape(&label)
        );
    }
    for (v, label) in xa.ticks() {
        let x = fmt2(px(v));
        let _ = writeln!(
            s,
            r##"<line class="xtick" x1="{x}" x2="{x}" y1="{}" y2="{}" stroke="#333"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"##,
            fmt2(TOP + plot_h),
            fmt2(TOP + plot_h + 5.0),
            fmt2(TOP + plot_h + 18.0),
            escape(&label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle">{}</text>"#,
        fmt2(LEFT + plot_w / 2.0),
        fmt2(HEIGHT - 14.0),
        escape(&panel.x_label)
    );
    let y_label = if ya.log {
        format!("{} (log scale)", panel.y_label)
    } else {
        panel.y_label.clone()
    };
    let _ = writeln!(
        s,
        r#"<text class="ylabel" transform="translate(18,{}) rotate(-90)" text-anchor="middle">{}</text>"#,
        fmt2(TOP + plot_h / 2.0),
        escape(&y_label)
    );

    for (i, c) in panel.curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64, f64)> =
            c.x.iter()
                .zip(&c.mean)
                .zip(&c.std)
                .filter(|((x, m), _)| x.is_finite() && m.is_finite())
                .map(|((x, m), sd)| (*x, *m, if sd.is_finite() { *sd } else { 0.0 }))
                .collect();
        if pts.is_empty() {
            continue;
        }
        let label = escape(&c.label);

        let mut band = String::new();
        for (k, (x, m, sd)) in pts.iter().enumerate() {
            let _ = write!(
                band,
                "{}{},{} ",
                if k == 0 { 'M' } else { 'L' },
                fmt2(px(*x)),
                fmt2(py(m + sd))
            );
        }
        for (x, m, sd) in pts.iter().rev() {
            let _ = write!(band, "L{},{} ", fmt2(px(*x)), fmt2(py(m - sd)));
        }
        band.push('Z');
        let _ = writeln!(
            s,
            r#"<path class="band" data-label="{label}" d="{band}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#
        );

        let mut line = String::new();
        for (k, (x, m, _)) in pts.iter().enumerate() {
            let _ = write!(
                line,
                "{}{},{} ",
                if k == 0 { 'M' } else { 'L' },
                fmt2(px(*x)),
                fmt2(py(*m))
            );
        }
        let _ = writeln!(
            s,
            r#"<path class="mean" data-label="{label}" d="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            line.trim_end()
        );
        if panel.markers {
            for (x, m, _) in &pts {
                let _ = writeln!(
                    s,
                    r#"<circle class="marker" cx="{}" cy="{}" r="3" fill="{color}"/>"#,
                    fmt2(px(*x)),
                    fmt2(py(*m))
                );
            }
        }

        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = LEFT + plot_w + 14.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{}" x2="{}" y1="{}" y2="{}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}" dominant-baseline="middle">{label}</text></g>"#,
            fmt2(lx),
            fmt2(lx + 22.0),
            fmt2(ly),
            fmt2(ly),
            fmt2(lx + 28.0),
            fmt2(ly)
        );
    }
    s.push_str("</svg>\n");
    s
}
