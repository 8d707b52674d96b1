use std::fmt::Write;

use toral_rigidity::WeylChamberDecomposition;

const SIZE: f64 = 420.0;
const R: f64 = 150.0;

fn to_px(v: [f64; 2], scale: f64) -> (f64, f64) {
    let c = SIZE / 2.0;
    (c + scale * R * v[0], c - scale * R * v[1])
}

fn signs(s: &[i8]) -> String {
    s.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect()
}

/// Unit circle with the traces of the Weyl hyperplanes of a rank-2 action,
/// each chamber labelled by its sign vector and representative.
pub fn chamber_svg(d: &WeylChamberDecomposition) -> String {
    let mut out = String::new();
    let c = SIZE / 2.0;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(out, r#"<circle cx="{c}" cy="{c}" r="{R}" fill="none" stroke="black"/>"#);
    for (h, n) in d.hyperplanes.iter().enumerate() {
        let dir = [-n[1], n[0]];
        let (x1, y1) = to_px(dir, 1.0);
        let (x2, y2) = to_px([-dir[0], -dir[1]], 1.0);
        let _ = writeln!(out, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="steelblue"/>"#);
        let (lx, ly) = to_px(dir, 1.12);
        let _ = writeln!(out, r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" fill="steelblue">H{h}</text>"#);
    }
    for ch in &d.chambers {
        let Some(rep) = &ch.representative else { continue };
        let (a, b) = (rep[0] as f64, rep[1] as f64);
        let n = a.hypot(b);
        let (x, y) = to_px([a / n, b / n], 0.68);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle">{}</text><text x="{x:.2}" y="{:.2}" text-anchor="middle">({}, {})</text>"#,
            signs(&ch.signs),
            y + 13.0,
            rep[0],
            rep[1]
        );
    }
    out.push_str("</svg>\n");
    out
}
