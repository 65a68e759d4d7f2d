//! Kaplan–Meier step curves of both groups as a standalone SVG.

use std::fmt::Write;

use mdir_core::{build_risk_table, TwoSampleData};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;

/// Kaplan–Meier survival steps `(time, S(time))` for group 1 or group 2.
pub fn km_steps(data: &TwoSampleData, group1: bool) -> Vec<(f64, f64)> {
    let rt = build_risk_table(data);
    let mut s = 1.0;
    let mut out = vec![(0.0, 1.0)];
    for row in &rt.rows {
        let (y, d) = if group1 {
            (row.at_risk1, row.events1)
        } else {
            (row.at_risk2(), row.events2())
        };
        if d > 0 && y > 0 {
            s *= 1.0 - d as f64 / y as f64;
            out.push((row.time, s));
        }
    }
    out
}

pub fn km_svg(data: &TwoSampleData) -> String {
    let t_max = data.subjects().iter().map(|s| s.time).fold(0.0, f64::max).max(1e-12);
    let x = |t: f64| MARGIN + t / t_max * (WIDTH - 2.0 * MARGIN);
    let y = |p: f64| HEIGHT - MARGIN - p * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{MARGIN:.1} {MARGIN:.1} V{:.1} H{:.1}" stroke="black" fill="none"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    for k in 0..=5 {
        let p = k as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{p:.1}</text>"#,
            MARGIN - 6.0,
            y(p) + 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.0}</text>"#,
            x(t_max * p),
            HEIGHT - MARGIN + 16.0,
            t_max * p
        );
    }
    for (i, (colour, label)) in [("#1f77b4", &data.labels()[0]), ("#d62728", &data.labels()[1])]
        .into_iter()
        .enumerate()
    {
        let steps = km_steps(data, i == 0);
        let mut d = format!("M{:.1} {:.1}", x(0.0), y(1.0));
        for &(t, p) in &steps[1..] {
            let _ = write!(d, " H{:.1} V{:.1}", x(t), y(p));
        }
        let _ = write!(d, " H{:.1}", x(t_max));
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{colour}" stroke-width="1.6"/>"#);
        let ly = MARGIN + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="1.6"/>"#,
            WIDTH - MARGIN - 200.0,
            WIDTH - MARGIN - 170.0
        );
        let esc = label.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{esc}</text>"#,
            WIDTH - MARGIN - 164.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
