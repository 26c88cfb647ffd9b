//! Hand-written SVG phase-plane plots of the switching plane Σ.
//!
//! The canvas is the square `[-L, L]²`, with `L` 1.2 times the largest
//! plotted coordinate (at least 1.2). Elements are emitted in a fixed order
//! and coordinates are rounded to three decimals in canvas units, so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;

use twofold::{Point3, SigmaPoint};

const SIZE: f64 = 600.0;

/// Orbit points are drawn with an oblique projection that lifts `z` along
/// the direction `(-OBLIQUE, OBLIQUE)` of the plane.
const OBLIQUE: f64 = 0.35;

pub fn project(p: Point3) -> SigmaPoint {
    SigmaPoint::new(p.x - OBLIQUE * p.z, p.y + OBLIQUE * p.z)
}

pub struct Line {
    pub slope: f64,
    pub label: String,
    pub class: &'static str,
}

#[derive(Default)]
pub struct Plot {
    pub title: String,
    /// Slope `m` of the return-region boundary ray `y = m x, x > 0`.
    pub return_boundary: Option<f64>,
    pub family_lines: Vec<Line>,
    pub points: Vec<SigmaPoint>,
    /// Closed curves, already projected.
    pub curves: Vec<Vec<SigmaPoint>>,
}

impl Plot {
    fn extent(&self) -> f64 {
        let m = self
            .points
            .iter()
            .chain(self.curves.iter().flatten())
            .filter(|p| p.x.is_finite() && p.y.is_finite())
            .fold(1.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
        1.2 * m
    }

    pub fn render(&self) -> String {
        let l = self.extent();
        let sx = |x: f64| (x + l) / (2.0 * l) * SIZE;
        let sy = |y: f64| (l - y) / (2.0 * l) * SIZE;
        let xy = |p: SigmaPoint| format!("{:.3},{:.3}", sx(p.x), sy(p.y));
        let mut s = String::new();
        let _ = writeln!(
            s,
            r##"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"##
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(
            s,
            "<desc>Switching plane; canvas [-L, L]^2 with L = {l:.6}</desc>"
        );

        let o = SigmaPoint::ORIGIN;
        let quadrants = [
            ("SwR+", "#d8ecd8", SigmaPoint::new(l, l)),
            ("SlR", "#d8e4f4", SigmaPoint::new(-l, l)),
            ("SwR-", "#ecdcc8", SigmaPoint::new(-l, -l)),
            ("EscR", "#f4d8e4", SigmaPoint::new(l, -l)),
        ];
        let _ = writeln!(s, r##"<g id="regions">"##);
        for (name, fill, corner) in quadrants {
            let (x0, x1) = (sx(o.x.min(corner.x)), sx(o.x.max(corner.x)));
            let (y0, y1) = (sy(o.y.max(corner.y)), sy(o.y.min(corner.y)));
            let _ = writeln!(
                s,
                r##"<rect class="region" data-region="{name}" x="{x0:.3}" y="{y0:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"##,
                x1 - x0,
                y1 - y0
            );
            let label = SigmaPoint::new(0.8 * corner.x, 0.9 * corner.y);
            let _ = writeln!(
                s,
                r##"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="14" text-anchor="middle">{}</text>"##,
                sx(label.x),
                sy(label.y),
                name
            );
        }
        let _ = writeln!(s, "</g>");

        let _ = writeln!(s, r##"<g id="folds" stroke="black" stroke-width="1.5">"##);
        let _ = writeln!(
            s,
            r##"<line class="fold" data-fold="S_X" x1="{:.3}" y1="0" x2="{:.3}" y2="{SIZE}"/>"##,
            sx(0.0),
            sx(0.0)
        );
        let _ = writeln!(
            s,
            r##"<line class="fold" data-fold="S_Y" x1="0" y1="{:.3}" x2="{SIZE}" y2="{:.3}"/>"##,
            sy(0.0),
            sy(0.0)
        );
        let _ = writeln!(s, "</g>");

        if let Some(m) = self.return_boundary {
            let t = l / m.abs().max(1.0);
            let _ = writeln!(
                s,
                r##"<polyline id="return-region" fill="none" stroke="#804000" stroke-width="1.5" stroke-dasharray="6 4" points="{} {} {}"/>"##,
                xy(SigmaPoint::new(0.0, -l)),
                xy(o),
                xy(SigmaPoint::new(t, m * t))
            );
        }

        if !self.family_lines.is_empty() {
            let _ = writeln!(s, r##"<g id="families" stroke-width="2">"##);
            for line in &self.family_lines {
                let t = l / line.slope.abs().max(1.0);
                let a = SigmaPoint::new(-t, -line.slope * t);
                let b = SigmaPoint::new(t, line.slope * t);
                let color = if line.class == "pseudo" {
                    "#c00000"
                } else {
                    "#006000"
                };
                let _ = writeln!(
                    s,
                    r##"<line class="{}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}"><title>{}</title></line>"##,
                    line.class,
                    sx(a.x),
                    sy(a.y),
                    sx(b.x),
                    sy(b.y),
                    escape(&line.label)
                );
            }
            let _ = writeln!(s, "</g>");
        }

        for (i, curve) in self.curves.iter().enumerate() {
            let pts: Vec<String> = curve.iter().map(|p| xy(*p)).collect();
            let _ = writeln!(
                s,
                r##"<polygon id="orbit-{i}" fill="none" stroke="#000080" stroke-width="2" points="{}"/>"##,
                pts.join(" ")
            );
        }

        if !self.points.is_empty() {
            let _ = writeln!(s, r##"<g id="iterates" fill="#000080">"##);
            for (k, p) in self.points.iter().enumerate() {
                if !(p.x.is_finite() && p.y.is_finite()) {
                    continue;
                }
                let _ = writeln!(
                    s,
                    r##"<circle data-k="{k}" cx="{:.3}" cy="{:.3}" r="4"/>"##,
                    sx(p.x),
                    sy(p.y)
                );
            }
            let pts: Vec<String> = self.points.iter().map(|p| xy(*p)).collect();
            let _ = writeln!(
                s,
                r##"<polyline fill="none" stroke="#000080" stroke-dasharray="2 3" points="{}"/>"##,
                pts.join(" ")
            );
            let _ = writeln!(s, "</g>");
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
