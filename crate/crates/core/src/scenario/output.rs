//! CSV logs, SVG plots, OFF meshes and metric reports.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::log::{channel_group, setpoint_for, SignalLog};
use crate::analysis::{detect_step, response_metrics_with_band, CrossSection, DetectedStep, Polytope, ResponseMetrics};
use crate::error::{Error, Result};

/// Writes `bytes` to a sibling temp file and renames it over `path`, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let ctx = |what: &str| format!("{what} {}", path.display());
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(ctx("creating temp file for"), e))?;
    f.write_all(bytes).map_err(|e| Error::io(ctx("writing"), e))?;
    f.sync_all().map_err(|e| Error::io(ctx("syncing"), e))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(ctx("renaming temp file onto"), e)
    })
}

/// CSV text: header `t,<channels>`, one row per sample, shortest
/// round-trip float formatting, LF endings.
pub fn csv_string(log: &SignalLog) -> String {
    let cols: Vec<&[f64]> = log.columns().map(|(_, c)| c).collect();
    let mut out = String::with_capacity(16 * (cols.len() + 1) * (log.len() + 1));
    out.push('t');
    for name in log.names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for k in 0..log.len() {
        let _ = write!(out, "{:?}", log.time(k));
        for c in &cols {
            let _ = write!(out, ",{:?}", c[k]);
        }
        out.push('\n');
    }
    out
}

pub fn export_csv(log: &SignalLog, path: &Path) -> Result<()> {
    write_atomic(path, csv_string(log).as_bytes())
}

pub fn read_csv(path: &Path) -> Result<SignalLog> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let loc = |line: usize| format!("{}: line {line}", path.display());
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse(loc(1), "empty file"))?;
    let mut names = header.split(',');
    if names.next() != Some("t") {
        return Err(Error::parse(loc(1), "first column must be `t`"));
    }
    let names: Vec<String> = names.map(str::to_string).collect();
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let values = line
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::parse(loc(i + 2), format!("`{v}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != names.len() + 1 {
            return Err(Error::parse(
                loc(i + 2),
                format!("expected {} fields, found {}", names.len() + 1, values.len()),
            ));
        }
        times.push(values[0]);
        rows.push(values);
    }
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    let mut log = SignalLog::new(dt, names)?;
    for r in rows {
        log.push_row(&r[1..])?;
    }
    Ok(log)
}

/// Step-response metrics for one channel against its setpoint channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMetrics {
    pub channel: String,
    pub step: DetectedStep,
    /// Times are measured from the step.
    pub metrics: ResponseMetrics,
}

/// Metrics for `channel` when its setpoint channel is in the log and
/// contains a single step; `Ok(None)` otherwise.
pub fn channel_metrics(log: &SignalLog, channel: &str, band: f64) -> Result<Option<ChannelMetrics>> {
    let signal = log.require(channel)?;
    let Some(setpoint) = setpoint_for(channel).and_then(|s| log.channel(&s)) else {
        return Ok(None);
    };
    let Some(step) = detect_step(signal, setpoint) else {
        return Ok(None);
    };
    let metrics = response_metrics_with_band(&signal[step.start..], log.dt, step.initial, step.target, band)?;
    Ok(Some(ChannelMetrics {
        channel: channel.to_string(),
        step,
        metrics,
    }))
}

fn opt_time(t: Option<f64>) -> String {
    t.map_or_else(|| "n/a".into(), |t| format!("{t:.4} s"))
}

/// Aligned key-value report.
pub fn metrics_table(items: &[ChannelMetrics], dt: f64) -> String {
    let mut out = String::new();
    for m in items {
        let r = &m.metrics;
        let _ = writeln!(out, "{}", m.channel);
        let _ = writeln!(
            out,
            "  {:<20}{:.4} -> {:.4} at t = {:.4} s",
            "step",
            m.step.initial + 0.0,
            m.step.target + 0.0,
            m.step.start as f64 * dt
        );
        let _ = writeln!(out, "  {:<20}{}", "rise_time", opt_time(r.rise_time));
        let _ = writeln!(out, "  {:<20}{}", "settling_time", opt_time(r.settling_time));
        let _ = writeln!(out, "  {:<20}{:.3} %", "overshoot", r.overshoot);
        let _ = writeln!(out, "  {:<20}{:.6}", "steady_state_error", r.steady_state_error);
    }
    out
}

/// Machine-readable rows; unavailable times are empty fields.
pub fn metrics_csv(items: &[ChannelMetrics], dt: f64) -> String {
    let mut out =
        String::from("channel,initial,target,step_time,rise_time,settling_time,overshoot_pct,steady_state_error\n");
    let opt = |t: Option<f64>| t.map_or_else(String::new, |t| format!("{t:?}"));
    for m in items {
        let r = &m.metrics;
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{},{},{:?},{:?}",
            m.channel,
            m.step.initial,
            m.step.target,
            m.step.start as f64 * dt,
            opt(r.rise_time),
            opt(r.settling_time),
            r.overshoot,
            r.steady_state_error
        );
    }
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const WIDTH: f64 = 960.0;
const PANEL_HEIGHT: f64 = 240.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 36.0;
const MAX_POINTS: usize = 2000;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

struct Series<'a> {
    name: &'a str,
    data: &'a [f64],
    colour: &'static str,
    dashed: bool,
}

/// SVG document with one panel per channel group. Setpoints are drawn
/// dashed over their channels and step metrics are annotated.
pub fn render_svg(log: &SignalLog, channels: &[&str], band: f64) -> Result<String> {
    let mut groups: Vec<(&'static str, Vec<&str>)> = Vec::new();
    for &c in channels {
        log.require(c)?;
        let g = channel_group(c);
        match groups.iter_mut().find(|(name, _)| *name == g) {
            Some((_, list)) => list.push(c),
            None => groups.push((g, vec![c])),
        }
    }
    let n = log.len();
    let t_end = log.time(n.saturating_sub(1)).max(log.dt).max(f64::MIN_POSITIVE);
    let stride = n.div_ceil(MAX_POINTS).max(1);
    let height = PANEL_HEIGHT * groups.len() as f64;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = PANEL_HEIGHT - TOP - BOTTOM;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for (p, (title, members)) in groups.iter().enumerate() {
        let y0 = p as f64 * PANEL_HEIGHT + TOP;
        let mut series = Vec::new();
        let mut annotations = Vec::new();
        for (i, &c) in members.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            series.push(Series {
                name: c,
                data: log.require(c)?,
                colour,
                dashed: false,
            });
            if let Some(sp) = setpoint_for(c) {
                if let Some(data) = log.channel(&sp) {
                    if !members.contains(&sp.as_str()) {
                        series.push(Series {
                            name: "",
                            data,
                            colour,
                            dashed: true,
                        });
                    }
                }
            }
            if let Some(m) = channel_metrics(log, c, band)? {
                annotations.push(format!(
                    "{c}: rise {}, settling {}, overshoot {:.2} %",
                    opt_time(m.metrics.rise_time),
                    opt_time(m.metrics.settling_time),
                    m.metrics.overshoot
                ));
            }
        }
        let (mut lo, mut hi) = series
            .iter()
            .flat_map(|s| s.data.iter().copied().filter(|v| v.is_finite()))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (-1.0, 1.0);
        }
        if hi - lo < 1e-9 * (1.0 + lo.abs()) {
            let pad = 0.5 * (1.0 + lo.abs()).min(1.0);
            (lo, hi) = (lo - pad, hi + pad);
        }
        let pad = 0.05 * (hi - lo);
        (lo, hi) = (lo - pad, hi + pad);
        let sx = |t: f64| LEFT + t / t_end * plot_w;
        let sy = |v: f64| y0 + (hi - v) / (hi - lo) * plot_h;

        let _ = writeln!(svg, r#"<g class="panel" id="panel{}">"#, p + 1);
        let _ = writeln!(
            svg,
            r#"<text x="{LEFT}" y="{:.1}" font-size="13" font-weight="bold">{}</text>"#,
            y0 - 8.0,
            esc(title)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{LEFT}" y="{y0:.1}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
        );
        for v in nice_ticks(lo, hi) {
            let y = sy(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
                LEFT + plot_w,
                LEFT - 4.0,
                y + 4.0,
                tick_label(v)
            );
        }
        for t in nice_ticks(0.0, t_end) {
            let x = sx(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#444"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
                y0 + plot_h,
                y0 + plot_h + 4.0,
                y0 + plot_h + 16.0,
                tick_label(t)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">t [s]</text>"#,
            LEFT + plot_w / 2.0,
            y0 + plot_h + 30.0
        );
        for s in &series {
            let mut pts = String::new();
            let mut k = 0;
            while k < n {
                let v = s.data[k];
                if v.is_finite() {
                    let _ = write!(pts, "{:.2},{:.2} ", sx(log.time(k)), sy(v));
                }
                k = if k + 1 < n && k + stride >= n {
                    n - 1
                } else {
                    k + stride
                };
            }
            let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.4"{dash} points="{}"/>"#,
                s.colour,
                pts.trim_end()
            );
        }
        for (i, s) in series.iter().filter(|s| !s.dashed).enumerate() {
            let y = y0 + 12.0 + 16.0 * i as f64;
            let x = LEFT + plot_w + 10.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-width="2"/><text x="{:.1}" y="{y:.1}">{}</text>"#,
                y - 4.0,
                x + 18.0,
                y - 4.0,
                s.colour,
                x + 22.0,
                esc(s.name)
            );
        }
        for (i, a) in annotations.iter().enumerate() {
            let _ = writeln!(
                svg,
                r##"<text class="metrics" x="{:.1}" y="{:.1}" fill="#222">{}</text>"##,
                LEFT + 6.0,
                y0 + 14.0 + 13.0 * i as f64,
                esc(a)
            );
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_plots(log: &SignalLog, channels: &[&str], path: &Path) -> Result<()> {
    render_plots_with_band(log, channels, crate::analysis::metrics::DEFAULT_SETTLING_BAND, path)
}

pub fn render_plots_with_band(log: &SignalLog, channels: &[&str], band: f64, path: &Path) -> Result<()> {
    write_atomic(path, render_svg(log, channels, band)?.as_bytes())
}

/// OFF mesh: vertices and fan-triangulated faces. Lower-dimensional sets
/// are written with their vertices and whatever faces they have.
pub fn off_string(polytope: &Polytope) -> String {
    let tris = polytope.triangles();
    let mut out = format!("OFF\n{} {} 0\n", polytope.vertices.len(), tris.len());
    for v in &polytope.vertices {
        let _ = writeln!(out, "{:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for t in &tris {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    out
}

pub fn export_polytope(polytope: &Polytope, path: &Path) -> Result<()> {
    write_atomic(path, off_string(polytope).as_bytes())
}

/// Cross-section polygon drawn in its plane basis with the basis axes.
pub fn section_svg(section: &CrossSection, title: &str) -> String {
    let size = 520.0;
    let margin = 40.0;
    let r = section
        .vertices
        .iter()
        .fold(0.0_f64, |m, p| m.max(p.x.abs()).max(p.y.abs()))
        .max(1e-9)
        * 1.1;
    let s = (size - 2.0 * margin) / (2.0 * r);
    let c = size / 2.0;
    let px = |x: f64| c + x * s;
    let py = |y: f64| c - y * s;
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="11">
<rect width="100%" height="100%" fill="white"/>
<text x="{margin}" y="22" font-size="13" font-weight="bold">{}</text>
"#,
        esc(title)
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{margin}" y1="{c}" x2="{}" y2="{c}" stroke="#999"/><line x1="{c}" y1="{margin}" x2="{c}" y2="{}" stroke="#999"/>"##,
        size - margin,
        size - margin
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}">u</text><text x="{}" y="{}">v</text><text x="{}" y="{}">{}</text><text x="{}" y="{}">{}</text>"#,
        size - margin + 4.0,
        c + 4.0,
        c + 4.0,
        margin - 4.0,
        px(r / 1.1) - 10.0,
        c + 14.0,
        tick_label(r / 1.1),
        c + 4.0,
        py(r / 1.1) + 4.0,
        tick_label(r / 1.1)
    );
    if !section.is_empty() {
        let pts: Vec<String> = section
            .vertices
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(p.x), py(p.y)))
            .collect();
        let _ = writeln!(
            svg,
            r##"<polygon points="{}" fill="#1f77b4" fill-opacity="0.25" stroke="#1f77b4" stroke-width="1.5"/>"##,
            pts.join(" ")
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{margin}" y="{}">area {:.4}</text>"#,
        size - 12.0,
        section.area()
    );
    svg.push_str("</svg>\n");
    svg
}

pub fn export_section_svg(section: &CrossSection, title: &str, path: &Path) -> Result<()> {
    write_atomic(path, section_svg(section, title).as_bytes())
}
