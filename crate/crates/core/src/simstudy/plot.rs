//! Static SVG line plots of power curves.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::run::SimReport;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const DASHES: [&str; 4] = ["", "8 4", "2 3", "8 3 2 3"];
const COLOURS: [&str; 6] = ["#1b1b1b", "#3465a4", "#cc0000", "#4e9a06", "#75507b", "#c17d11"];

/// One plot per scenario id, power against θ with one line per method.
pub fn power_curves_svg(reports: &[SimReport]) -> BTreeMap<String, String> {
    let mut by_id: BTreeMap<String, Vec<&SimReport>> = BTreeMap::new();
    for r in reports {
        by_id.entry(r.scenario_id.clone()).or_default().push(r);
    }
    by_id
        .into_iter()
        .map(|(id, rs)| (id.clone(), curve_svg(&id, &rs)))
        .collect()
}

fn curve_svg(title: &str, reports: &[&SimReport]) -> String {
    let theta_max = reports.iter().map(|r| r.theta).fold(0.0, f64::max).max(1e-12);
    let x = |t: f64| MARGIN + t / theta_max * (WIDTH - 2.0 * MARGIN);
    let y = |p: f64| HEIGHT - MARGIN - p * (HEIGHT - 2.0 * MARGIN);

    let mut methods: Vec<String> = Vec::new();
    for r in reports {
        for m in &r.methods {
            if !methods.contains(&m.method) {
                methods.push(m.method.clone());
            }
        }
    }

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    // axes
    let _ = writeln!(
        s,
        r#"<path d="M{:.1} {:.1} V{:.1} H{:.1}" stroke="black" fill="none"/>"#,
        MARGIN,
        MARGIN,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    for k in 0..=5 {
        let p = k as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.1}</text>"#,
            MARGIN - 6.0,
            y(p) + 4.0,
            p
        );
        let tv = theta_max * p;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.2}</text>"#,
            x(tv),
            HEIGHT - MARGIN + 16.0,
            tv
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">theta</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">rejection rate</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    for (i, method) in methods.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> = reports
            .iter()
            .filter_map(|r| r.rate(method).map(|m| (r.theta, m.rejection_rate)))
            .filter(|(_, p)| p.is_finite())
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let d: Vec<String> = pts.iter().map(|&(t, p)| format!("{:.1},{:.1}", x(t), y(p))).collect();
        let colour = COLOURS[i % COLOURS.len()];
        let dash = DASHES[i % DASHES.len()];
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.6" stroke-dasharray="{dash}"/>"#,
            d.join(" ")
        );
        let ly = MARGIN + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="1.6" stroke-dasharray="{dash}"/>"#,
            MARGIN + 12.0,
            MARGIN + 42.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            MARGIN + 48.0,
            ly + 4.0,
            escape(method)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
