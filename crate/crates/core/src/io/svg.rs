//! Minimal SVG 1.1 line charts of metrics columns.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::MetricsSeries;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Default)]
pub struct PlotOptions {
    pub title: String,
    pub log_y: bool,
    pub y_label: Option<String>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if (1e-2..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Renders one polyline per selected column against `t`.
///
/// On a log axis nonpositive samples are dropped and split the polyline.
pub fn render_plot_svg(series: &MetricsSeries<f64>, selection: &[String], opts: &PlotOptions) -> Result<String> {
    if selection.is_empty() {
        return Err(Error::EmptySelection);
    }
    let times = series.times();
    let columns = selection
        .iter()
        .map(|name| series.column(name).map(|v| (name.as_str(), v)))
        .collect::<Result<Vec<_>>>()?;

    let map_y = |v: f64| if opts.log_y { v.log10() } else { v };
    let usable = |v: f64| v.is_finite() && (!opts.log_y || v > 0.0);

    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in &times {
        x_lo = x_lo.min(t);
        x_hi = x_hi.max(t);
    }
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, vals) in &columns {
        for &v in vals.iter().filter(|&&v| usable(v)) {
            y_lo = y_lo.min(map_y(v));
            y_hi = y_hi.max(map_y(v));
        }
    }
    if !x_lo.is_finite() {
        x_lo = 0.0;
        x_hi = 1.0;
    }
    if !y_lo.is_finite() {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi <= y_lo {
        let pad = if y_lo == 0.0 { 1.0 } else { y_lo.abs() * 0.05 };
        y_lo -= pad;
        y_hi += pad;
    }

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |t: f64| LEFT + (t - x_lo) / (x_hi - x_lo) * pw;
    let py = |y: f64| TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&opts.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let xv = x_lo + f * (x_hi - x_lo);
        let x = px(xv);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            TOP,
            TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            tick_label(xv)
        );
        let yv = y_lo + f * (y_hi - y_lo);
        let y = py(yv);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + pw
        );
        let label = if opts.log_y {
            tick_label(10f64.powf(yv))
        } else {
            tick_label(yv)
        };
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">t</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 16.0
    );
    let y_label = opts.y_label.clone().unwrap_or_else(|| {
        if opts.log_y {
            "value (log scale)".into()
        } else {
            "value".into()
        }
    });
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&y_label)
    );

    for (n, (name, vals)) in columns.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let mut segment: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, s: &mut String| {
            if seg.len() >= 2 {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    seg.join(" ")
                );
            }
            seg.clear();
        };
        for (&t, &v) in times.iter().zip(vals) {
            if usable(v) {
                segment.push(format!("{:.2},{:.2}", px(t), py(map_y(v))));
            } else {
                flush(&mut segment, &mut s);
            }
        }
        flush(&mut segment, &mut s);

        let ly = TOP + 10.0 + 18.0 * n as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_plot_svg(
    series: &MetricsSeries<f64>,
    selection: &[String],
    opts: &PlotOptions,
    path: &Path,
) -> Result<()> {
    fs::write(path, render_plot_svg(series, selection, opts)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricsRecord;

    fn decaying() -> MetricsSeries<f64> {
        let mut s = MetricsSeries::new(2);
        for k in 1..=50 {
            let t = k as f64 * 0.1;
            s.push(MetricsRecord {
                t,
                u_norm: vec![1.0 + (-t).exp(), 1.0],
                w_norm: vec![0.5; 2],
                rho_norm: vec![0.1; 2],
                g_norm_sq: vec![2.0; 2],
                total_energy: 4.0,
                u_l4_total: 1.0,
                pairs: vec![if k > 45 { 0.0 } else { (-0.7 * t).exp() }],
            })
            .unwrap();
        }
        s
    }

    #[test]
    fn one_polyline_per_column_with_legend() {
        let sel = vec!["u_norm_1".to_string(), "u_norm_2".to_string()];
        let svg = render_plot_svg(
            &decaying(),
            &sel,
            &PlotOptions {
                title: "u".into(),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">u_norm_1</text>") && svg.contains(">u_norm_2</text>"));
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn log_axis_drops_zeros() {
        let sel = vec!["D_1_2".to_string()];
        let opts = PlotOptions {
            log_y: true,
            ..Default::default()
        };
        let svg = render_plot_svg(&decaying(), &sel, &opts).unwrap();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        assert_eq!(pts.split(' ').count(), 45);
        // straight line on a log axis: equal vertical steps
        let ys: Vec<f64> = pts
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        let d0 = ys[1] - ys[0];
        assert!(ys.windows(2).all(|w| ((w[1] - w[0]) - d0).abs() < 0.02));
    }

    #[test]
    fn errors_and_determinism() {
        let s = decaying();
        assert!(matches!(
            render_plot_svg(&s, &[], &PlotOptions::default()),
            Err(Error::EmptySelection)
        ));
        assert!(matches!(
            render_plot_svg(&s, &["nope".to_string()], &PlotOptions::default()),
            Err(Error::UnknownColumn(_))
        ));
        let sel = vec!["total_energy".to_string()];
        let a = render_plot_svg(&s, &sel, &PlotOptions::default()).unwrap();
        let b = render_plot_svg(&s, &sel, &PlotOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
