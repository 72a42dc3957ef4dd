//! Minimal static SVG line charts for the report panels.

use std::fmt::Write as _;
use std::path::Path;

use super::{write_file, Evaluation, RateSweep};
use crate::error::Result;
use crate::plan::{Band, ChannelPlan};

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom

struct Series {
    label: String,
    color: &'static str,
    points: Vec<(f64, f64)>,
    markers: bool,
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (x0, x1) = nice_range(x0, x1);
    let (y0, y1) = nice_range(y0, y1);
    let (ml, mr, mt, mb) = MARGIN;
    let pw = W - ml - mr;
    let ph = H - mt - mb;
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    for k in 0..=5 {
        let fx = x0 + (x1 - x0) * k as f64 / 5.0;
        let fy = y0 + (y1 - y0) * k as f64 / 5.0;
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{fx:.2}</text>"#, sx(fx), H - mb + 16.0).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{fy:.2}</text>"#, ml - 6.0, sy(fy) + 4.0).unwrap();
        writeln!(s, r##"<line x1="{ml}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/>"##, ml + pw, sy(fy), sy(fy)).unwrap();
    }
    writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x_label}</text>"#, ml + pw / 2.0, H - 10.0).unwrap();
    writeln!(s, r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{y_label}</text>"#, mt + ph / 2.0, mt + ph / 2.0).unwrap();
    writeln!(s, r#"<text x="{:.1}" y="18" text-anchor="middle">{title}</text>"#, ml + pw / 2.0).unwrap();
    for (n, ser) in series.iter().enumerate() {
        let path: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, ser.color, path.join(" ")).unwrap();
        if ser.markers {
            for p in &path {
                let (x, y) = p.split_once(',').unwrap();
                writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{}"/>"#, ser.color).unwrap();
            }
        }
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" fill="{}">{}</text>"#, ml + 8.0, mt + 16.0 + 14.0 * n as f64, ser.color, ser.label).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

const BAND_COLORS: [(Band, &str); 3] = [(Band::S, "#1f77b4"), (Band::C, "#2ca02c"), (Band::L, "#d62728")];

fn per_band(plan: &ChannelPlan, values: &[f64]) -> Vec<Series> {
    BAND_COLORS
        .iter()
        .filter_map(|&(band, color)| {
            let idx = plan.band_indices(band);
            (!idx.is_empty()).then(|| Series {
                label: format!("{band}-band"),
                color,
                points: idx
                    .iter()
                    .map(|&i| (plan.channels()[i].wavelength() * 1e9, values[i]))
                    .collect(),
                markers: false,
            })
        })
        .collect()
}

/// `snr.svg` and `launch.svg` against wavelength.
pub(super) fn write_channel_plots(plan: &ChannelPlan, ev: &Evaluation, out: &Path) -> Result<()> {
    let snr = chart("SNR after transmission", "wavelength [nm]", "SNR [dB]", &per_band(plan, &ev.snr.snr_db));
    write_file(&out.join("snr.svg"), &snr)?;
    let launch = chart("Launch power", "wavelength [nm]", "power [dBm]", &per_band(plan, &ev.launch.to_dbm()));
    write_file(&out.join("launch.svg"), &launch)
}

/// `rate_sweep.svg`: throughput against the number of code rates.
pub(super) fn write_rate_sweep_plot(sweep: &RateSweep, out: &Path) -> Result<()> {
    let pts: Vec<(f64, f64)> = sweep.rows.iter().map(|&(k, t)| (k as f64, t / 1e12)).collect();
    let (k0, k1) = (pts.first().map_or(1.0, |p| p.0), pts.last().map_or(1.0, |p| p.0));
    let series = [
        Series {
            label: "rate set".into(),
            color: "#1f77b4",
            points: pts,
            markers: true,
        },
        Series {
            label: "GMI bound".into(),
            color: "#7f7f7f",
            points: vec![(k0, sweep.bound / 1e12), (k1, sweep.bound / 1e12)],
            markers: false,
        },
    ];
    let svg = chart("Throughput vs number of code rates", "code rates K", "throughput [Tb/s]", &series);
    write_file(&out.join("rate_sweep.svg"), &svg)
}
