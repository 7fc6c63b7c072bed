//! Static line plot of the topological functional over a sweep.

use std::fmt::Write;

use hopf_tda::functional::estimate_critical;

use crate::error::{CliError, Result};
use crate::io::SweepRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

#[derive(Clone, Debug, Default)]
pub struct PlotLabels {
    pub title: String,
    /// Name of the swept parameter for the x axis.
    pub parameter: String,
    /// Known critical value, drawn as a second marker.
    pub reference: Option<f64>,
}

/// Renders `H` against the parameter with a dashed marker at the estimated
/// critical value. Output depends only on the inputs.
pub fn render_svg(rows: &[SweepRow], labels: &PlotLabels) -> Result<String> {
    if rows.is_empty() {
        return Err(CliError::Config("cannot plot an empty sweep".into()));
    }
    if let Some(i) = rows.iter().position(|r| !(r.mu.is_finite() && r.h.is_finite())) {
        return Err(CliError::Parse {
            file: "sweep".into(),
            row: i + 2,
            message: "non-finite value".into(),
        });
    }
    let (mut x0, mut x1) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
        (a.min(r.mu), b.max(r.mu))
    });
    if x0 == x1 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let y1 = rows.iter().fold(0.0f64, |m, r| m.max(r.h));
    let y1 = if y1 > 0.0 { y1 * 1.05 } else { 1.0 };
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
    let sy = |y: f64| HEIGHT - BOTTOM - y / y1 * (HEIGHT - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(&labels.title));
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let (bx, by) = (sx(x0), sy(0.0));
    let _ = writeln!(
        s,
        r#"<path d="M{bx:.2},{:.2} L{bx:.2},{by:.2} L{:.2},{by:.2}" fill="none" stroke="black"/>"#,
        sy(y1),
        sx(x1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        sx(x0),
        by + 18.0,
        x0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        sx(x1),
        by + 18.0,
        x1
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">0</text>"#,
        bx - 6.0,
        by + 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
        bx - 6.0,
        sy(y1) + 4.0,
        y1
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (sx(x0) + sx(x1)) / 2.0,
        HEIGHT - 12.0,
        escape(&labels.parameter)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" transform="rotate(-90 18 {:.2})" text-anchor="middle">H</text>"#,
        (sy(0.0) + sy(y1)) / 2.0,
        (sy(0.0) + sy(y1)) / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(&labels.title)
    );

    let points: Vec<String> = rows.iter().map(|r| format!("{:.2},{:.2}", sx(r.mu), sy(r.h))).collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        points.join(" ")
    );

    let mut marker = |x: f64, colour: &str, label: &str| {
        if (x0..=x1).contains(&x) {
            let px = sx(x);
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{by:.2}" stroke="{colour}" stroke-dasharray="6 4"/>"#,
                sy(y1)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{colour}">{}</text>"#,
                px + 4.0,
                sy(y1) + 12.0,
                escape(label)
            );
        }
    };
    if rows.len() >= 2 {
        let mu: Vec<f64> = rows.iter().map(|r| r.mu).collect();
        let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let (_, mu_hat) = estimate_critical(&mu, &h)?;
        marker(mu_hat, "firebrick", &format!("estimate {mu_hat}"));
    }
    if let Some(r) = labels.reference {
        marker(r, "dimgray", &format!("reference {r}"));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(mu: f64, h: f64) -> SweepRow {
        SweepRow {
            mu,
            h,
            betti_l1: 0.0,
            delta_h: None,
        }
    }

    #[test]
    fn two_rows_give_one_two_vertex_polyline() {
        let svg = render_svg(&[row(0.0, 0.0), row(1.0, 2.0)], &PlotLabels::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let start = svg.find("points=\"").unwrap() + 8;
        let end = start + svg[start..].find('"').unwrap();
        assert_eq!(svg[start..end].split(' ').count(), 2);
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
    }

    #[test]
    fn deterministic() {
        let rows = [row(-1.0, 0.0), row(0.0, 0.1), row(1.0, 0.5)];
        let labels = PlotLabels {
            title: "t".into(),
            parameter: "mu".into(),
            reference: Some(0.0),
        };
        assert_eq!(render_svg(&rows, &labels).unwrap(), render_svg(&rows, &labels).unwrap());
        assert_eq!(
            render_svg(&rows, &labels).unwrap().matches("stroke-dasharray").count(),
            2
        );
    }

    #[test]
    fn empty_rejected() {
        assert!(render_svg(&[], &PlotLabels::default()).is_err());
    }
}
