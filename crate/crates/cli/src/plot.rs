//! Self-contained SVG line plots of trajectory series.

use std::fmt::Write;

use lsqflow_core::Trajectory;

use crate::config::{PlotSpec, Series};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const MAX_POINTS: usize = 2000;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlotError {
    #[error("nothing to plot: the series selection is empty")]
    NothingToPlot,
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    #[error("series {0} is outside the state dimensions")]
    OutOfRange(String),
}

/// Expands `x`/`v` shorthands and checks indices against `N`, `m`.
pub fn resolve(series: &[Series], n: usize, m: usize) -> Result<Vec<Series>, PlotError> {
    let mut out = Vec::new();
    for s in series {
        match s {
            Series::AllX | Series::AllV => {
                for node in 1..=n {
                    for comp in 1..=m {
                        out.push(if *s == Series::AllX {
                            Series::X { node, comp }
                        } else {
                            Series::V { node, comp }
                        });
                    }
                }
            }
            Series::X { node, comp } | Series::V { node, comp } => {
                if *node > n || *comp > m {
                    return Err(PlotError::OutOfRange(s.name()));
                }
                out.push(s.clone());
            }
            Series::Error | Series::Cost => out.push(s.clone()),
        }
    }
    if out.is_empty() {
        return Err(PlotError::NothingToPlot);
    }
    Ok(out)
}

fn values(traj: &Trajectory, s: &Series) -> Vec<f64> {
    match *s {
        Series::X { node, comp } => traj.x_component(node, comp),
        Series::V { node, comp } => traj.v_component(node, comp),
        Series::Error => traj.errors(),
        Series::Cost => traj.samples.iter().map(|p| p.cost).collect(),
        Series::AllX | Series::AllV => unreachable!("expanded by resolve"),
    }
}

fn tick_label(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{x:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_plot(traj: &Trajectory, spec: &PlotSpec) -> Result<String, PlotError> {
    if spec.series.is_empty() {
        return Err(PlotError::NothingToPlot);
    }
    if traj.samples.is_empty() {
        return Err(PlotError::EmptyTrajectory);
    }
    let series = resolve(&spec.series, traj.n, traj.m)?;
    let times = traj.times();
    let data: Vec<Vec<f64>> = series.iter().map(|s| values(traj, s)).collect();

    let t0 = times[0];
    let t1 = *times.last().unwrap();
    let (t0, t1) = if t1 > t0 { (t0, t1) } else { (t0 - 1.0, t0 + 1.0) };
    let finite = data.iter().flatten().copied().filter(|y| y.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), y| (l.min(y), h.max(y)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
        lo -= 1.0;
        hi += 1.0;
    } else {
        let pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |t: f64| LEFT + (t - t0) / (t1 - t0) * pw;
    let py = |y: f64| TOP + (hi - y.clamp(lo, hi)) / (hi - lo) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let f = k as f64 / 5.0;
        let t = t0 + f * (t1 - t0);
        let y = lo + f * (hi - lo);
        let (xt, yt) = (px(t), py(y));
        let _ = writeln!(
            svg,
            r#"<line x1="{xt:.2}" y1="{:.2}" x2="{xt:.2}" y2="{:.2}" stroke="black"/><text x="{xt:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            tick_label(t)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{yt:.2}" x2="{LEFT}" y2="{yt:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            yt + 4.0,
            tick_label(y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(&spec.x_label)
    );
    if !spec.y_label.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&spec.y_label)
        );
    }

    let stride = times.len().div_ceil(MAX_POINTS).max(1);
    for (k, (s, ys)) in series.iter().zip(&data).enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut pts = String::new();
        for (j, (&t, &y)) in times.iter().zip(ys).enumerate() {
            if (j % stride == 0 || j + 1 == times.len()) && y.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", px(t), py(y));
            }
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{}"/>"#,
            pts.trim_end()
        );
        let ly = TOP + 12.0 + 16.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            s.name()
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
