//! SVG rendering of a straight convex domain and a cloud of Gauss-image points.

use std::fmt::Write as _;

use gaussmap::lorentz::{BoundaryPiece, KleinPoint, StraightConvexDomain};

const SIZE: u32 = 640;
const MAX_POINTS: usize = 4000;
const CHORD_SAMPLES: usize = 64;

/// Klein to Poincaré disc: `k / (1 + √(1 − |k|²))`.
pub fn klein_to_poincare(p: [f64; 2]) -> [f64; 2] {
    let s = 1.0 + (1.0 - p[0] * p[0] - p[1] * p[1]).max(0.0).sqrt();
    [p[0] / s, p[1] / s]
}

fn path(points: impl IntoIterator<Item = [f64; 2]>) -> String {
    let mut d = String::new();
    for (k, p) in points.into_iter().enumerate() {
        let _ = write!(d, "{}{:.6},{:.6} ", if k == 0 { "M" } else { "L" }, p[0], p[1]);
    }
    d
}

fn circle_arc(start: f64, end: f64) -> String {
    let n = (((end - start).abs() / 0.01).ceil() as usize).max(2);
    path((0..=n).map(|k| {
        let t = start + (end - start) * k as f64 / n as f64;
        [t.cos(), t.sin()]
    }))
}

/// Unit circle, hull boundary and points. Chords are straight in the Klein model
/// and circular arcs in the Poincaré model.
pub fn klein_figure(domain: Option<&StraightConvexDomain>, points: &[KleinPoint], poincare: bool) -> String {
    let map = |p: [f64; 2]| if poincare { klein_to_poincare(p) } else { p };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="-1.05 -1.05 2.1 2.1">"#
    );
    let _ = writeln!(svg, r#"<g transform="scale(1,-1)" fill="none" stroke-linecap="round">"#);
    let _ = writeln!(svg, r##"<circle cx="0" cy="0" r="1" stroke="#444" stroke-width="0.004"/>"##);
    let stride = points.len().div_ceil(MAX_POINTS).max(1);
    let _ = writeln!(svg, r##"<g fill="#2a6fb0" stroke="none">"##);
    for p in points.iter().step_by(stride) {
        let q = map([p.y1, p.y2]);
        let _ = writeln!(svg, r#"<circle cx="{:.6}" cy="{:.6}" r="0.004"/>"#, q[0], q[1]);
    }
    let _ = writeln!(svg, "</g>");
    if let Some(d) = domain.filter(|d| !d.is_full_disc()) {
        for piece in d.pieces() {
            if let BoundaryPiece::Arc { start, end } = *piece {
                let _ =
                    writeln!(svg, r##"<path d="{}" stroke="#c0392b" stroke-width="0.012"/>"##, circle_arc(start, end));
            }
        }
        for (a, b) in d.chords() {
            let line = (0..=CHORD_SAMPLES).map(|k| {
                let t = k as f64 / CHORD_SAMPLES as f64;
                map([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
            });
            let _ = writeln!(svg, r##"<path d="{}" stroke="#c0392b" stroke-width="0.008"/>"##, path(line));
        }
    }
    let _ = writeln!(svg, "</g>\n</svg>");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaussmap::lorentz::CircleSubset;
    use std::f64::consts::PI;

    #[test]
    fn full_disc_is_the_circle_only() {
        let svg = klein_figure(Some(&StraightConvexDomain::full_disc()), &[], false);
        assert_eq!(svg.matches("<path").count(), 0);
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn ideal_triangle_has_three_chords() {
        let d = StraightConvexDomain::from_subset(&CircleSubset::from_points([0.0, 2.0, 4.0])).unwrap();
        let svg = klein_figure(Some(&d), &[], true);
        assert_eq!(svg.matches("<path").count(), 3);
    }

    #[test]
    fn poincare_map_fixes_the_circle_and_halves_small_points() {
        let b = klein_to_poincare([PI.cos(), PI.sin()]);
        assert!((b[0] + 1.0).abs() < 1e-12 && b[1].abs() < 1e-12);
        let s = klein_to_poincare([1e-4, 0.0]);
        assert!((s[0] - 5e-5).abs() < 1e-12);
        let k = [0.6, 0.3];
        let p = klein_to_poincare(k);
        let back = 2.0 / (1.0 + p[0] * p[0] + p[1] * p[1]);
        assert!((back * p[0] - k[0]).abs() < 1e-12 && (back * p[1] - k[1]).abs() < 1e-12);
    }
}
