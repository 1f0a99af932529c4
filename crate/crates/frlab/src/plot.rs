//! Self-contained log-log SVG plots (base-2 axes).

use std::fmt::Write;

use fourier_ratio::stats::LineFit;

use crate::scan::Band;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Padded `[lo, hi]` covering `vals`, at least one octave wide.
fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1.0 {
        let mid = 0.5 * (lo + hi);
        lo = mid - 0.5;
        hi = mid + 0.5;
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Scatter of `points` on log₂ axes, the fitted line, and the slope band
/// drawn as a wedge through the centroid of the fit.  Non-positive points
/// are skipped.
pub fn loglog_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
    fit: Option<&LineFit>,
    band: Option<Band>,
) -> String {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log2(), y.log2()))
        .collect();
    let ln2 = std::f64::consts::LN_2;
    // fit is in natural logs: log₂y = a/ln2 + b log₂x
    let line = fit.map(|f| (f.intercept / ln2, f.slope));
    let (x0, x1) = range(logs.iter().map(|p| p.0));
    let (mut y0, mut y1) = range(logs.iter().map(|p| p.1));
    if let Some((a, b)) = line {
        let (ya, yb) = (a + b * x0, a + b * x1);
        y0 = y0.min(ya.min(yb));
        y1 = y1.max(ya.max(yb));
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath>"#
    );

    if let (Some((a, b)), Some(band)) = (line, band) {
        if band.lo.is_finite() && band.hi.is_finite() && !logs.is_empty() {
            let cx = logs.iter().map(|p| p.0).sum::<f64>() / logs.len() as f64;
            let cy = a + b * cx;
            let at = |slope: f64, x: f64| cy + slope * (x - cx);
            let _ = writeln!(
                s,
                r##"<polygon clip-path="url(#plot)" fill="#4a90d9" fill-opacity="0.15" stroke="none" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/>"##,
                sx(x0), sy(at(band.lo, x0)),
                sx(x1), sy(at(band.lo, x1)),
                sx(x1), sy(at(band.hi, x1)),
                sx(x0), sy(at(band.hi, x0)),
            );
        }
    }

    // axes and integer log₂ ticks
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let step = |lo: f64, hi: f64| ((hi - lo) / 8.0).ceil().max(1.0);
    let xs = step(x0, x1);
    let mut t = (x0 / xs).ceil() * xs;
    while t <= x1 {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle">2^{4}</text>"#,
            sx(t), TOP + ph, TOP + ph + 5.0, TOP + ph + 18.0, t as i64
        );
        t += xs;
    }
    let ys = step(y0, y1);
    let mut t = (y0 / ys).ceil() * ys;
    while t <= y1 {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/><text x="{3:.2}" y="{4:.2}" text-anchor="end">2^{5}</text>"#,
            LEFT - 5.0, sy(t), LEFT, LEFT - 8.0, sy(t) + 4.0, t as i64
        );
        t += ys;
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0:.1}" text-anchor="middle" transform="rotate(-90 16 {0:.1})">{1}</text>"#,
        TOP + ph / 2.0,
        escape(y_label)
    );

    if let Some((a, b)) = line {
        let _ = writeln!(
            s,
            r##"<line clip-path="url(#plot)" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#d0021b" stroke-width="1.5"/>"##,
            sx(x0), sy(a + b * x0), sx(x1), sy(a + b * x1)
        );
        let label = match band {
            Some(bd) => format!("slope {:.3}, band {}", b, bd.describe()),
            None => format!("slope {b:.3}"),
        };
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT + pw - 6.0,
            TOP + 16.0,
            escape(&label)
        );
    }
    for (x, y) in &logs {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="#222"/>"##,
            sx(*x),
            sy(*y)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_contains_points_line_and_band() {
        let pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0]
            .iter()
            .map(|&r: &f64| (r, r.powf(-0.25)))
            .collect();
        let fit = LineFit {
            slope: -0.25,
            intercept: 0.0,
            slope_stderr: 0.0,
        };
        let svg = loglog_svg("knapp <arc>", "R", "FR", &pts, Some(&fit), Some(Band::new(-0.4, -0.15)));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 4);
        assert!(svg.contains("<polygon"));
        assert!(svg.contains("stroke=\"#d0021b\""));
        assert!(svg.contains("knapp &lt;arc&gt;"));
    }

    #[test]
    fn nonpositive_points_skipped() {
        let svg = loglog_svg("t", "x", "y", &[(1.0, 0.0), (2.0, 1.0), (-1.0, 3.0)], None, None);
        assert_eq!(svg.matches("<circle").count(), 1);
    }
}
