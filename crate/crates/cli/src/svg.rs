//! Minimal SVG scatter of test-pose errors in the x-y plane.

use std::fmt::Write;

use calplan::montecarlo::Campaign;

/// Points drawn at most; the rest are summarized by the circle.
const MAX_POINTS: usize = 2000;
const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;

/// Scatter of `(dx, dy)` in mm with circles at the observed rms error and the
/// predicted `rho0`.
pub fn scatter(campaign: &Campaign, title: &str, predicted_rho0: f64) -> String {
    let pts: Vec<(f64, f64)> = campaign
        .trials
        .iter()
        .take(MAX_POINTS)
        .map(|t| (t.displacement.x * 1e3, t.displacement.y * 1e3))
        .collect();
    let rms = campaign.stats.rms_error * 1e3;
    let pred = predicted_rho0 * 1e3;
    let extent = pts
        .iter()
        .map(|(x, y)| x.abs().max(y.abs()))
        .fold(rms.max(pred), f64::max)
        .max(1e-12)
        * 1.1;
    let half = (SIZE - 2.0 * MARGIN) / 2.0;
    let c = SIZE / 2.0;
    let scale = half / extent;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{c}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{c}" x2="{:.1}" y2="{c}" stroke="gray"/><line x1="{c}" y1="{MARGIN}" x2="{c}" y2="{:.1}" stroke="gray"/>"#,
        SIZE - MARGIN,
        SIZE - MARGIN
    );
    for (x, y) in &pts {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.2" fill="steelblue" fill-opacity="0.5"/>"#,
            c + x * scale,
            c - y * scale
        );
    }
    let _ = writeln!(
        s,
        r#"<circle cx="{c}" cy="{c}" r="{:.2}" fill="none" stroke="crimson" stroke-width="1.5"/>"#,
        rms * scale
    );
    if pred.is_finite() {
        let _ = writeln!(
            s,
            r#"<circle cx="{c}" cy="{c}" r="{:.2}" fill="none" stroke="black" stroke-dasharray="4 3"/>"#,
            pred * scale
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{:.1}" font-size="11">dx, dy (mm), half-width {:.4} mm; red: rms {:.4} mm; dashed: predicted {:.4} mm</text>"#,
        SIZE - 12.0,
        extent,
        rms,
        pred
    );
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
