//! Result serialization: CSV emitters (exact, round-trippable decimal
//! formatting) and a self-contained SVG plot of BER curves.

use std::fmt::Write as _;
use std::path::Path;

use crate::distance::DistanceReport;
use crate::error::{Error, Result};
use crate::sim::BerResult;
use crate::waveform::BasebandSignal;

/// Column header of every BER CSV.
pub const BER_CSV_HEADER: &str = "ebn0_db,detector,K,bits,errors,ber,frames,low_confidence";
/// Column header of every distance-sweep CSV.
pub const DMIN_CSV_HEADER: &str = "K,d2_min,argmin_e,depth,nobs";
/// Column header of the modulated-sample debug dump.
pub const SAMPLES_CSV_HEADER: &str = "t,re,im";

/// Formats BER results as CSV. Floats use Rust's shortest round-trip decimal
/// form, so parsing a field back yields the in-memory value exactly.
pub fn ber_csv(results: &[BerResult]) -> String {
    let mut out = String::from(BER_CSV_HEADER);
    out.push('\n');
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.ebn0_db,
            r.detector_label,
            r.k,
            r.bits_sent,
            r.bit_errors,
            r.ber(),
            r.frames,
            u8::from(r.low_confidence())
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Formats a distance sweep as CSV; `argmin_e` renders like `[2 0 -2]`
/// (space-separated, so the field needs no quoting).
pub fn dmin_csv(reports: &[DistanceReport]) -> String {
    let mut out = String::from(DMIN_CSV_HEADER);
    out.push('\n');
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.k, r.d2_min, r.argmin_e, r.depth, r.n_obs
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Dumps complex baseband samples with their absolute times.
pub fn samples_csv(signal: &BasebandSignal) -> String {
    let mut out = String::from(SAMPLES_CSV_HEADER);
    out.push('\n');
    for (j, s) in signal.samples.iter().enumerate() {
        let t = signal.start_time + j as f64 * signal.sample_period;
        writeln!(out, "{},{},{}", t, s.re, s.im).expect("writing to a String cannot fail");
    }
    out
}

/// Writes `text` to `path`, wrapping failures with the offending path.
pub fn save_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

const PLOT_WIDTH: f64 = 760.0;
const PLOT_HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const SERIES_COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Renders BER curves (log-scale BER vs Eb/N0 in dB) as a standalone SVG
/// document. Results sharing a detector label and delay form one series;
/// zero-error points have no finite log-BER and are omitted.
pub fn ber_svg(results: &[BerResult], title: &str) -> String {
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for r in results {
        if r.bit_errors == 0 {
            continue;
        }
        let name = match r.detector_label.as_str() {
            label if r.k > 0 => format!("{label} K={}", r.k),
            label => label.to_string(),
        };
        let point = (r.ebn0_db, r.ber());
        match series.iter_mut().find(|(n, _)| *n == name) {
            Some((_, points)) => points.push(point),
            None => series.push((name, vec![point])),
        }
    }

    let xs = series.iter().flat_map(|(_, p)| p.iter().map(|&(x, _)| x));
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in xs {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
    }
    let ys = series.iter().flat_map(|(_, p)| p.iter().map(|&(_, y)| y));
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for y in ys {
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    let have_data = x_min.is_finite() && y_min > 0.0;
    if !have_data {
        (x_min, x_max, y_min, y_max) = (0.0, 10.0, 1e-5, 1.0);
    }
    if x_max - x_min < 1e-9 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    let log_floor = y_min.log10().floor();
    let log_ceil = (y_max.log10().ceil()).max(log_floor + 1.0);

    let x_span = x_max - x_min;
    let inner_w = PLOT_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let inner_h = PLOT_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_x = |v: f64| MARGIN_LEFT + (v - x_min) / x_span * inner_w;
    let to_y =
        |v: f64| MARGIN_TOP + (log_ceil - v.log10()) / (log_ceil - log_floor) * inner_h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PLOT_WIDTH}" height="{PLOT_HEIGHT}" viewBox="0 0 {PLOT_WIDTH} {PLOT_HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_LEFT + inner_w / 2.0,
        xml_escape(title)
    );

    // Decade grid lines and y tick labels.
    let mut decade = log_floor as i64;
    while decade <= log_ceil as i64 {
        let y = to_y(10f64.powi(decade as i32));
        let _ = write!(
            svg,
            r##"<line x1="{MARGIN_LEFT:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            MARGIN_LEFT + inner_w
        );
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{decade}</text>"#,
            MARGIN_LEFT - 8.0,
            y + 4.0
        );
        decade += 1;
    }
    // X ticks at a readable step.
    let step = nice_step(x_span);
    let mut tick = (x_min / step).ceil() * step;
    while tick <= x_max + 1e-9 {
        let x = to_x(tick);
        let _ = write!(
            svg,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#dddddd"/>"##,
            MARGIN_TOP,
            MARGIN_TOP + inner_h
        );
        let _ = write!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + inner_h + 18.0,
            (tick * 100.0).round() / 100.0
        );
        tick += step;
    }
    // Axes and labels.
    let _ = write!(
        svg,
        r#"<rect x="{MARGIN_LEFT:.1}" y="{MARGIN_TOP:.1}" width="{inner_w:.1}" height="{inner_h:.1}" fill="none" stroke="black"/>"#
    );
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Eb/N0 (dB)</text>"#,
        MARGIN_LEFT + inner_w / 2.0,
        PLOT_HEIGHT - 12.0
    );
    let _ = write!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">BER</text>"#,
        MARGIN_TOP + inner_h / 2.0,
        MARGIN_TOP + inner_h / 2.0
    );

    if series.is_empty() {
        let _ = write!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" fill="#888888">no nonzero BER points</text>"##,
            MARGIN_LEFT + inner_w / 2.0,
            MARGIN_TOP + inner_h / 2.0
        );
    }
    for (i, (name, points)) in series.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        let path: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", to_x(x), to_y(y)))
            .collect();
        let _ = write!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for &(x, y) in points {
            let _ = write!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                to_x(x),
                to_y(y)
            );
        }
        // Legend entry.
        let ly = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        let lx = MARGIN_LEFT + inner_w + 16.0;
        let _ = write!(
            svg,
            r#"<rect x="{lx:.1}" y="{:.1}" width="12" height="12" fill="{color}"/>"#,
            ly - 10.0
        );
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#,
            lx + 18.0,
            xml_escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 8.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let normalized = raw / magnitude;
    let factor = if normalized < 1.5 {
        1.0
    } else if normalized < 3.5 {
        2.0
    } else if normalized < 7.5 {
        5.0
    } else {
        10.0
    };
    factor * magnitude
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
