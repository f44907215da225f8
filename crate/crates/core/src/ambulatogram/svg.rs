//! Stacked timeline figure: measured counts above reference counts, one row
//! per zone. Output depends only on the inputs.

use std::fmt::Write as _;

use super::{Ambulatogram, AmbulatogramError};

const WIDTH: f64 = 1200.0;
const LEFT: f64 = 110.0;
const RIGHT: f64 = 20.0;
const ROW: f64 = 22.0;
const PANEL_GAP: f64 = 36.0;
const TOP: f64 = 40.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub title: String,
    /// Day-clock hour at scenario time 0.
    pub day_start_hours: f64,
    /// Day seconds per scenario second.
    pub compression: f64,
    /// Day hours between axis labels.
    pub label_every_hours: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self { title: String::new(), day_start_hours: 1.0, compression: 60.0, label_every_hours: 2.0 }
    }
}

impl SvgStyle {
    fn clock(&self, t: f64) -> String {
        let day_s = (self.day_start_hours * 3600.0 + t * self.compression).rem_euclid(86400.0);
        let minutes = (day_s / 60.0).round() as i64 % (24 * 60);
        format!("{:02}:{:02}", minutes / 60, minutes % 60)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(
    measured: &Ambulatogram,
    reference: &Ambulatogram,
    style: &SvgStyle,
) -> Result<String, AmbulatogramError> {
    if !measured.same_shape(reference) {
        return Err(AmbulatogramError::Mismatch);
    }
    let nz = measured.zones.len() as f64;
    let panel_h = nz * ROW;
    let height = TOP + 2.0 * (panel_h + PANEL_GAP) + 30.0;
    let plot_w = WIDTH - LEFT - RIGHT;
    let span = measured.t1 - measured.t0;
    let x_of = |t: f64| LEFT + (t - measured.t0) / span * plot_w;
    let peak = measured.max_count().max(reference.max_count()).max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !style.title.is_empty() {
        let _ = writeln!(s, r#"<text x="{LEFT:.0}" y="18" font-size="14">{}</text>"#, escape(&style.title));
    }

    for (p, (label, amb)) in [("measured", measured), ("reference", reference)].into_iter().enumerate() {
        let top = TOP + p as f64 * (panel_h + PANEL_GAP);
        let _ = writeln!(s, r#"<g class="{label}">"#);
        let _ = writeln!(s, r#"<text x="4" y="{:.2}" font-weight="bold">{label}</text>"#, top - 6.0);
        for (zi, (zone, row)) in amb.zones.iter().zip(&amb.counts).enumerate() {
            let y0 = top + zi as f64 * ROW;
            let base = y0 + ROW - 2.0;
            let color = PALETTE[zi % PALETTE.len()];
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT:.2}" y1="{base:.2}" x2="{:.2}" y2="{base:.2}" stroke="#cccccc"/>"##,
                WIDTH - RIGHT
            );
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, base - 4.0, escape(zone));
            // one rectangle per run of equal non-zero counts
            let mut b = 0;
            while b < row.len() {
                let c = row[b];
                let start = b;
                while b < row.len() && row[b] == c {
                    b += 1;
                }
                if c == 0 {
                    continue;
                }
                let (xa, xb) = (x_of(amb.bin_start(start)), x_of(amb.bin_end(b - 1)));
                let h = (ROW - 4.0) * c as f64 / peak;
                let _ = writeln!(
                    s,
                    r#"<rect x="{xa:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="{color}"><title>{} {}-{}: {c}</title></rect>"#,
                    base - h,
                    (xb - xa).max(0.5),
                    escape(zone),
                    style.clock(amb.bin_start(start)),
                    style.clock(amb.bin_end(b - 1))
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }

    // time axis in day-clock labels
    let axis_y = TOP + 2.0 * (panel_h + PANEL_GAP) - PANEL_GAP + 4.0;
    let step = style.label_every_hours * 3600.0 / style.compression;
    if step > 0.0 && step.is_finite() {
        let mut k = 0u32;
        loop {
            let t = measured.t0 + k as f64 * step;
            if t > measured.t1 + 1e-9 {
                break;
            }
            let x = x_of(t);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#999999"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                axis_y - 4.0,
                axis_y + 2.0,
                axis_y + 16.0,
                style.clock(t)
            );
            k += 1;
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
