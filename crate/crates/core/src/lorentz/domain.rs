//! Convex hulls of subsets of the boundary circle, seen in the Klein disc.
//!
//! Every point of the unit circle is an extreme point of the closed disc, so the
//! hull of a closed subset `S ⊂ S¹` is bounded by the arcs of `S` together with one
//! chord across each gap of `S¹ \ S`. The hull is the disc minus the caps cut off by
//! those chords, which makes membership and distance queries exact.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::KleinPoint;
use crate::error::{GeometryError, Result};
use crate::spatial::PointIndex;

/// Angular gaps below this are treated as touching.
const ANGLE_EPS: f64 = 1e-12;

fn normalize_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU - ANGLE_EPS {
        0.0
    } else {
        r
    }
}

fn unit(t: f64) -> [f64; 2] {
    [t.cos(), t.sin()]
}

/// A closed subset of `S¹`: finitely many points and closed counter-clockwise arcs,
/// all given by angles in radians.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CircleSubset {
    pub points: Vec<f64>,
    /// `(start, end)`; the arc runs counter-clockwise from `start` to `end`. An arc
    /// with `end − start ≥ 2π` is the full circle.
    pub arcs: Vec<(f64, f64)>,
}

impl CircleSubset {
    pub fn full_circle() -> Self {
        Self { points: vec![], arcs: vec![(0.0, TAU)] }
    }

    pub fn from_points(points: impl IntoIterator<Item = f64>) -> Self {
        Self { points: points.into_iter().collect(), arcs: vec![] }
    }

    pub fn from_arc(start: f64, end: f64) -> Self {
        Self { points: vec![], arcs: vec![(start, end)] }
    }
}

/// One piece of the hull boundary that lies on the circle. Consecutive pieces are
/// joined by chords.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPiece {
    Vertex {
        angle: f64,
    },
    /// Counter-clockwise arc; `end` may exceed `2π` when the arc wraps.
    Arc {
        start: f64,
        end: f64,
    },
}

impl BoundaryPiece {
    fn start(&self) -> f64 {
        match *self {
            BoundaryPiece::Vertex { angle } => angle,
            BoundaryPiece::Arc { start, .. } => start,
        }
    }

    fn end(&self) -> f64 {
        match *self {
            BoundaryPiece::Vertex { angle } => angle,
            BoundaryPiece::Arc { end, .. } => end,
        }
    }
}

/// A chord across a gap of the boundary subset, from angle `from` counter-clockwise
/// to `from + length`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Gap {
    from: f64,
    length: f64,
}

impl Gap {
    fn midpoint_direction(&self) -> [f64; 2] {
        unit(self.from + 0.5 * self.length)
    }

    /// Signed offset of `y` beyond the chord; positive inside the removed cap.
    fn excess(&self, y: [f64; 2]) -> f64 {
        let m = self.midpoint_direction();
        y[0] * m[0] + y[1] * m[1] - (0.5 * self.length).cos()
    }

    fn endpoints(&self) -> ([f64; 2], [f64; 2]) {
        (unit(self.from), unit(self.from + self.length))
    }
}

/// The convex hull of a closed subset of the boundary circle with non-empty interior.
#[derive(Debug, Clone, PartialEq)]
pub struct StraightConvexDomain {
    pieces: Vec<BoundaryPiece>,
    gaps: Vec<Gap>,
}

/// Builds the hull of the given boundary subset.
pub fn hull_of_circle_subset(subset: &CircleSubset) -> Result<StraightConvexDomain> {
    StraightConvexDomain::from_subset(subset)
}

impl StraightConvexDomain {
    pub fn full_disc() -> Self {
        Self { pieces: vec![BoundaryPiece::Arc { start: 0.0, end: TAU }], gaps: vec![] }
    }

    pub fn from_subset(subset: &CircleSubset) -> Result<Self> {
        // (start, length) intervals
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        for &t in &subset.points {
            if !t.is_finite() {
                return Err(GeometryError::Invalid("non-finite angle".into()));
            }
            intervals.push((normalize_angle(t), 0.0));
        }
        for &(s, e) in &subset.arcs {
            if !(s.is_finite() && e.is_finite()) {
                return Err(GeometryError::Invalid("non-finite arc".into()));
            }
            let raw = e - s;
            if raw >= TAU - ANGLE_EPS {
                return Ok(Self::full_disc());
            }
            let len = if raw >= 0.0 { raw } else { raw.rem_euclid(TAU) };
            intervals.push((normalize_angle(s), len));
        }
        if intervals.is_empty() {
            return Err(GeometryError::DegenerateHull("empty boundary subset".into()));
        }
        let Some(merged) = merge_on_circle(&intervals) else {
            return Ok(Self::full_disc());
        };

        let has_arc = merged.iter().any(|&(_, len)| len > ANGLE_EPS);
        if !has_arc && merged.len() < 3 {
            return Err(GeometryError::DegenerateHull(format!(
                "{} distinct boundary point(s); at least three are required",
                merged.len()
            )));
        }

        let pieces: Vec<BoundaryPiece> = merged
            .iter()
            .map(|&(s, len)| {
                if len > ANGLE_EPS {
                    BoundaryPiece::Arc { start: s, end: s + len }
                } else {
                    BoundaryPiece::Vertex { angle: s }
                }
            })
            .collect();
        let n = pieces.len();
        let gaps = (0..n)
            .map(|i| {
                let from = pieces[i].end();
                let to = pieces[(i + 1) % n].start();
                let mut length = (to - from).rem_euclid(TAU);
                if length <= ANGLE_EPS {
                    length = TAU;
                }
                Gap { from, length }
            })
            .filter(|g| g.length < TAU)
            .collect();
        Ok(Self { pieces, gaps })
    }

    pub fn pieces(&self) -> &[BoundaryPiece] {
        &self.pieces
    }

    /// Endpoints of the geodesic chords bounding the hull.
    pub fn chords(&self) -> Vec<([f64; 2], [f64; 2])> {
        self.gaps.iter().map(|g| g.endpoints()).collect()
    }

    pub fn is_full_disc(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Corner points of the boundary (isolated points and arc endpoints), counter-clockwise.
    pub fn vertices(&self) -> Vec<[f64; 2]> {
        if self.is_full_disc() {
            return vec![];
        }
        let mut out = Vec::new();
        for p in &self.pieces {
            match *p {
                BoundaryPiece::Vertex { angle } => out.push(unit(angle)),
                BoundaryPiece::Arc { start, end } => {
                    out.push(unit(start));
                    out.push(unit(end));
                }
            }
        }
        out
    }

    /// Arcs as `(start, end)` with both angles reduced to `[0, 2π)`, except the full
    /// circle which is `(0, 2π)`.
    pub fn arcs(&self) -> Vec<(f64, f64)> {
        self.pieces
            .iter()
            .filter_map(|p| match *p {
                BoundaryPiece::Arc { start, end } if end - start >= TAU - ANGLE_EPS => Some((0.0, TAU)),
                BoundaryPiece::Arc { start, end } => Some((normalize_angle(start), normalize_angle(end))),
                BoundaryPiece::Vertex { .. } => None,
            })
            .collect()
    }

    /// The boundary subset this hull was built from.
    pub fn boundary_support(&self) -> CircleSubset {
        let mut s = CircleSubset::default();
        for p in &self.pieces {
            match *p {
                BoundaryPiece::Vertex { angle } => s.points.push(angle),
                BoundaryPiece::Arc { start, end } => s.arcs.push((start, end)),
            }
        }
        s
    }

    /// Is `y` in the open interior of the hull?
    pub fn contains(&self, y: [f64; 2]) -> bool {
        y[0] * y[0] + y[1] * y[1] < 1.0 && self.gaps.iter().all(|g| g.excess(y) < 0.0)
    }

    pub fn contains_closed(&self, y: [f64; 2]) -> bool {
        y[0] * y[0] + y[1] * y[1] <= 1.0 && self.gaps.iter().all(|g| g.excess(y) <= 0.0)
    }

    /// Distance to the boundary, positive inside and negative outside.
    pub fn depth(&self, y: [f64; 2]) -> f64 {
        if !self.contains_closed(y) {
            return -self.distance_to(y);
        }
        let disc = 1.0 - y[0].hypot(y[1]);
        self.gaps.iter().map(|g| -g.excess(y)).fold(disc, f64::min)
    }

    /// Euclidean distance from `y` to the closed hull.
    pub fn distance_to(&self, y: [f64; 2]) -> f64 {
        if self.contains_closed(y) {
            return 0.0;
        }
        let r = y[0].hypot(y[1]);
        if self.is_full_disc() {
            return r - 1.0;
        }
        let mut best = f64::INFINITY;
        for g in &self.gaps {
            let (a, b) = g.endpoints();
            best = best.min(segment_distance(y, a, b));
        }
        let phi = y[1].atan2(y[0]);
        for p in &self.pieces {
            if let BoundaryPiece::Arc { start, end } = *p {
                let rel = (phi - start).rem_euclid(TAU);
                if r > 0.0 && rel <= end - start {
                    best = best.min((r - 1.0).abs());
                }
            }
        }
        best
    }

    /// Points of the boundary: arcs sampled at angular step `dtheta`, chords at
    /// Euclidean step `ds`.
    pub fn boundary_samples(&self, dtheta: f64, ds: f64) -> Vec<[f64; 2]> {
        let mut out = Vec::new();
        for p in &self.pieces {
            match *p {
                BoundaryPiece::Vertex { angle } => out.push(unit(angle)),
                BoundaryPiece::Arc { start, end } => {
                    let k = ((end - start) / dtheta).ceil().max(1.0) as usize;
                    for i in 0..=k {
                        out.push(unit(start + (end - start) * i as f64 / k as f64));
                    }
                }
            }
        }
        for g in &self.gaps {
            let (a, b) = g.endpoints();
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            let k = (len / ds).ceil().max(1.0) as usize;
            for i in 1..k {
                let t = i as f64 / k as f64;
                out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        out
    }

    /// Boundary samples plus a square lattice of interior points at spacing `ds`.
    pub fn probe_points(&self, dtheta: f64, ds: f64) -> Vec<[f64; 2]> {
        let mut out = self.boundary_samples(dtheta, ds);
        let n = (1.0 / ds).ceil() as i64;
        for i in -n..=n {
            for j in -n..=n {
                let y = [i as f64 * ds, j as f64 * ds];
                if self.contains(y) {
                    out.push(y);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({ "vertices": self.vertices(), "arcs": self.arcs() })
    }

    /// Inverse of [`to_json`](Self::to_json).
    pub fn from_json(v: &Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Wire {
            vertices: Vec<[f64; 2]>,
            arcs: Vec<(f64, f64)>,
        }
        let w: Wire = serde_json::from_value(v.clone()).map_err(|e| GeometryError::Invalid(e.to_string()))?;
        let mut subset = CircleSubset::default();
        for &(s, e) in &w.arcs {
            let end = if e < s { e + TAU } else { e };
            subset.arcs.push((s, end));
        }
        for v in &w.vertices {
            subset.points.push(v[1].atan2(v[0]));
        }
        Self::from_subset(&subset)
    }
}

impl Serialize for StraightConvexDomain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Union of `(start, length)` intervals on the circle, sorted by start. `None` when
/// the union is the whole circle.
fn merge_on_circle(intervals: &[(f64, f64)]) -> Option<Vec<(f64, f64)>> {
    let covered = |t: f64| intervals.iter().any(|&(s, len)| (t - s).rem_euclid(TAU) <= len);
    // cut the circle at an uncovered point just past some interval end
    let cut = intervals.iter().map(|&(s, len)| normalize_angle(s + len + 1e-10)).find(|&t| !covered(t))?;
    let mut shifted: Vec<(f64, f64)> = intervals.iter().map(|&(s, len)| ((s - cut).rem_euclid(TAU), len)).collect();
    shifted.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (s, len) in shifted {
        if let Some(last) = merged.last_mut() {
            if s <= last.0 + last.1 + ANGLE_EPS {
                last.1 = last.1.max(s + len - last.0);
                continue;
            }
        }
        merged.push((s, len));
    }
    let mut out: Vec<(f64, f64)> = merged.into_iter().map(|(s, len)| (normalize_angle(s + cut), len)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Some(out)
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

/// Both one-sided parts of a Hausdorff distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HausdorffReport {
    /// sup over the sample of the distance to the domain
    pub sample_to_domain: f64,
    /// sup over the domain of the distance to the sample
    pub domain_to_sample: f64,
    pub distance: f64,
}

/// Default angular step used to probe hull arcs.
pub const PROBE_DTHETA: f64 = TAU / 4096.0;
/// Default spacing used to probe chords and the hull interior.
pub const PROBE_SPACING: f64 = 0.005;

/// Symmetric Hausdorff distance between a finite sample and the closed hull.
pub fn hausdorff_distance(sample: &[KleinPoint], d: &StraightConvexDomain) -> Result<f64> {
    let pts: Vec<[f64; 2]> = sample.iter().map(|p| p.as_array()).collect();
    Ok(hausdorff_report(&pts, d, PROBE_DTHETA, PROBE_SPACING)?.distance)
}

pub fn hausdorff_report(
    sample: &[[f64; 2]],
    d: &StraightConvexDomain,
    dtheta: f64,
    spacing: f64,
) -> Result<HausdorffReport> {
    if sample.is_empty() {
        return Err(GeometryError::EmptySample);
    }
    let sample_to_domain = sample.iter().map(|&y| d.distance_to(y)).fold(0.0, f64::max);
    let index = PointIndex::new(sample);
    let domain_to_sample = d.probe_points(dtheta, spacing).iter().map(|q| index.nearest(q).1).fold(0.0, f64::max);
    Ok(HausdorffReport { sample_to_domain, domain_to_sample, distance: sample_to_domain.max(domain_to_sample) })
}

/// Hausdorff distance between the closed region bounded by a simple polygon and the
/// closed hull.
pub fn hausdorff_to_region(
    polygon: &[[f64; 2]],
    d: &StraightConvexDomain,
    dtheta: f64,
    spacing: f64,
) -> Result<HausdorffReport> {
    if polygon.len() < 3 {
        return Err(GeometryError::EmptySample);
    }
    // the distance to a convex set is convex, so its max over the region is at a vertex
    let sample_to_domain = polygon.iter().map(|&y| d.distance_to(y)).fold(0.0, f64::max);
    let region = PolygonRegion::new(polygon, 0.5 * spacing);
    let domain_to_sample = d
        .probe_points(dtheta, spacing)
        .iter()
        .map(|&q| if region.contains(q) { 0.0 } else { region.boundary_distance(q) })
        .fold(0.0, f64::max);
    Ok(HausdorffReport { sample_to_domain, domain_to_sample, distance: sample_to_domain.max(domain_to_sample) })
}

/// A simple polygon prepared for repeated membership and distance queries.
pub struct PolygonRegion<'a> {
    polygon: &'a [[f64; 2]],
    y_min: f64,
    strip: f64,
    strips: Vec<Vec<usize>>,
    samples: PointIndex,
    owner: Vec<usize>,
}

impl<'a> PolygonRegion<'a> {
    /// `resolution` bounds the spacing of the boundary samples used to locate the
    /// nearest edge.
    pub fn new(polygon: &'a [[f64; 2]], resolution: f64) -> Self {
        let n = polygon.len();
        let y_min = polygon.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        let y_max = polygon.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        let count = n.clamp(1, 4096);
        let strip = ((y_max - y_min) / count as f64).max(f64::MIN_POSITIVE);
        let mut strips = vec![Vec::new(); count];
        let (mut pts, mut owner) = (Vec::new(), Vec::new());
        for i in 0..n {
            let (a, b) = (polygon[i], polygon[(i + 1) % n]);
            let lo = (((a[1].min(b[1]) - y_min) / strip) as usize).min(count - 1);
            let hi = (((a[1].max(b[1]) - y_min) / strip) as usize).min(count - 1);
            for s in &mut strips[lo..=hi] {
                s.push(i);
            }
            let k = ((a[0] - b[0]).hypot(a[1] - b[1]) / resolution).ceil().max(1.0) as usize;
            for j in 0..k {
                let t = j as f64 / k as f64;
                pts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                owner.push(i);
            }
        }
        Self { polygon, y_min, strip, strips, samples: PointIndex::new(&pts), owner }
    }

    /// Even-odd rule.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let s = (p[1] - self.y_min) / self.strip;
        if s < 0.0 || s as usize >= self.strips.len() {
            return false;
        }
        let n = self.polygon.len();
        let mut inside = false;
        for &i in &self.strips[s as usize] {
            let (a, b) = (self.polygon[(i + 1) % n], self.polygon[i]);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        let n = self.polygon.len();
        let (k, _) = self.samples.nearest(&p);
        let e = self.owner[k];
        [e + n - 1, e, e + 1]
            .iter()
            .map(|&i| segment_distance(p, self.polygon[i % n], self.polygon[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Even-odd rule.
pub fn point_in_polygon(p: [f64; 2], polygon: &[[f64; 2]]) -> bool {
    let n = polygon.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[cfg(test)]
fn polygon_boundary_distance(p: [f64; 2], polygon: &[[f64; 2]]) -> f64 {
    let n = polygon.len();
    (0..n).map(|i| segment_distance(p, polygon[i], polygon[(i + 1) % n])).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn triangle() -> StraightConvexDomain {
        hull_of_circle_subset(&CircleSubset::from_points([0.0, PI, FRAC_PI_2])).unwrap()
    }

    #[test]
    fn triangle_hull_has_three_vertices() {
        let d = triangle();
        assert_eq!(d.pieces().len(), 3);
        assert!(d.arcs().is_empty());
        let v = d.vertices();
        assert_eq!(v.len(), 3);
        assert!((v[0][0] - 1.0).abs() < 1e-15 && v[1][1] > 0.99 && v[2][0] < -0.99);
    }

    #[test]
    fn full_circle_is_the_disc() {
        let d = hull_of_circle_subset(&CircleSubset::full_circle()).unwrap();
        assert!(d.is_full_disc());
        assert!(d.contains([0.99, 0.0]) && d.contains([-0.5, -0.7]));
        assert!(!d.contains([1.0, 0.0]));
        assert_eq!(d.to_json(), json!({"vertices": [], "arcs": [[0.0, TAU]]}));
    }

    #[test]
    fn half_circle_arc_gives_half_disc() {
        let d = hull_of_circle_subset(&CircleSubset::from_arc(-FRAC_PI_2, FRAC_PI_2)).unwrap();
        assert_eq!(d.arcs().len(), 1);
        assert!(d.contains([0.01, 0.9]) && d.contains([0.5, -0.5]));
        assert!(!d.contains([-0.01, 0.0]) && !d.contains([0.0, 0.3]));
        let (s, e) = d.arcs()[0];
        assert!((s - 3.0 * FRAC_PI_2).abs() < 1e-12 && (e - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn membership_examples() {
        let d = triangle();
        assert!(d.contains([0.0, 0.2]));
        assert!(!d.contains([0.0, -0.1]));
    }

    #[test]
    fn degenerate_subsets_are_rejected() {
        for s in [
            CircleSubset::default(),
            CircleSubset::from_points([0.3]),
            CircleSubset::from_points([0.3, 2.0]),
            CircleSubset::from_points([0.3, 0.3 + TAU, 2.0]),
        ] {
            assert!(matches!(hull_of_circle_subset(&s), Err(GeometryError::DegenerateHull(_))));
        }
        // a short arc alone still has interior
        assert!(hull_of_circle_subset(&CircleSubset::from_arc(0.0, 0.1)).is_ok());
    }

    #[test]
    fn overlapping_and_wrapping_arcs_merge() {
        let s = CircleSubset { points: vec![0.2], arcs: vec![(6.0, 6.5), (0.1, 1.0), (0.9, 2.0)] };
        let d = hull_of_circle_subset(&s).unwrap();
        assert_eq!(d.pieces().len(), 1);
        let s = CircleSubset { points: vec![], arcs: vec![(0.0, 4.0), (3.5, 6.3)] };
        assert!(hull_of_circle_subset(&s).unwrap().is_full_disc());
    }

    #[test]
    fn json_round_trip() {
        let s = CircleSubset { points: vec![2.5, 4.0], arcs: vec![(-0.5, 0.5)] };
        let d = hull_of_circle_subset(&s).unwrap();
        let back = StraightConvexDomain::from_json(&d.to_json()).unwrap();
        for y in [[0.0, 0.0], [0.9, 0.1], [-0.5, 0.3], [-0.3, -0.6], [0.2, -0.9]] {
            assert_eq!(d.contains(y), back.contains(y));
        }
    }

    #[test]
    fn distance_to_hull() {
        let d = triangle();
        assert_eq!(d.distance_to([0.1, 0.1]), 0.0);
        assert!((d.distance_to([0.0, -0.5]) - 0.5).abs() < 1e-15);
        assert!((d.distance_to([0.5, 0.5]) - 0.0).abs() < 1e-15);
        let outside = [0.6, 0.6];
        let chord_dist = (0.6 + 0.6 - 1.0) / 2f64.sqrt();
        assert!((d.distance_to(outside) - chord_dist).abs() < 1e-12);
    }

    #[test]
    fn single_point_sample_against_disc() {
        let d = StraightConvexDomain::full_disc();
        let h = hausdorff_distance(&[KleinPoint::new(0.0, 0.0).unwrap()], &d).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
        assert!(matches!(hausdorff_distance(&[], &d), Err(GeometryError::EmptySample)));
    }

    #[test]
    fn vertex_sample_of_triangle() {
        let d = triangle();
        let verts: Vec<[f64; 2]> = d.vertices();
        let r = hausdorff_report(&verts, &d, PROBE_DTHETA, 0.002).unwrap();
        assert_eq!(r.sample_to_domain, 0.0);
        // brute force over a fine lattice of the triangle
        let mut brute: f64 = 0.0;
        let n = 1000;
        for i in 0..=n {
            for j in 0..=n {
                let y = [-1.0 + 2.0 * i as f64 / n as f64, j as f64 / n as f64];
                if d.contains_closed(y) {
                    let m = verts.iter().map(|v| (v[0] - y[0]).hypot(v[1] - y[1])).fold(f64::INFINITY, f64::min);
                    brute = brute.max(m);
                }
            }
        }
        assert!((r.domain_to_sample - brute).abs() < 3e-3, "{} vs {}", r.domain_to_sample, brute);
    }

    #[test]
    fn dense_disc_sample_is_within_its_spacing() {
        let d = StraightConvexDomain::full_disc();
        let spacing = 0.02;
        let mut sample = vec![];
        let n = (1.0 / spacing) as i64;
        for i in -n..=n {
            for j in -n..=n {
                let y = [i as f64 * spacing, j as f64 * spacing];
                if y[0] * y[0] + y[1] * y[1] < 1.0 {
                    sample.push(y);
                }
            }
        }
        let r = hausdorff_report(&sample, &d, PROBE_DTHETA, 0.01).unwrap();
        assert!(r.distance <= spacing * 2f64.sqrt(), "{}", r.distance);
        assert!(r.distance > 0.0);
    }

    #[test]
    fn region_version_matches_polygon_hull() {
        // a square inscribed in the disc against the hull of its own vertices
        let angles = [0.25 * PI, 0.75 * PI, 1.25 * PI, 1.75 * PI];
        let d = hull_of_circle_subset(&CircleSubset::from_points(angles)).unwrap();
        let poly: Vec<[f64; 2]> = angles.iter().map(|&t| unit(t)).collect();
        let r = hausdorff_to_region(&poly, &d, PROBE_DTHETA, 0.01).unwrap();
        assert!(r.distance < 1e-12);
        let small: Vec<[f64; 2]> = poly.iter().map(|p| [0.5 * p[0], 0.5 * p[1]]).collect();
        let r = hausdorff_to_region(&small, &d, PROBE_DTHETA, 0.01).unwrap();
        assert!((r.distance - 0.5).abs() < 1e-12);
    }

    fn subset_strategy() -> impl Strategy<Value = CircleSubset> {
        (prop::collection::vec(0.0..TAU, 0..6), prop::collection::vec((0.0..TAU, 0.0..3.0f64), 0..3)).prop_map(
            |(points, arcs)| CircleSubset { points, arcs: arcs.into_iter().map(|(s, l)| (s, s + l)).collect() },
        )
    }

    proptest! {
        #[test]
        fn hulls_are_convex(s in subset_strategy(), a in (-1.0..1.0f64, -1.0..1.0f64), b in (-1.0..1.0f64, -1.0..1.0f64)) {
            if let Ok(d) = hull_of_circle_subset(&s) {
                let (a, b) = ([a.0, a.1], [b.0, b.1]);
                if d.contains(a) && d.contains(b) {
                    prop_assert!(d.contains([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]));
                }
            }
        }

        #[test]
        fn boundary_support_lies_in_the_closed_hull(s in subset_strategy()) {
            if let Ok(d) = hull_of_circle_subset(&s) {
                for &t in &s.points {
                    prop_assert!(d.distance_to(unit(t)) < 1e-12);
                }
                for v in d.boundary_samples(0.05, 0.05) {
                    prop_assert!(d.distance_to(v) < 1e-12);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn polygon_region_matches_brute_force(
            radii in prop::collection::vec(0.3..1.0f64, 5..40),
            qx in -1.2..1.2f64,
            qy in -1.2..1.2f64,
        ) {
            let n = radii.len();
            let poly: Vec<[f64; 2]> = radii
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    let t = TAU * k as f64 / n as f64;
                    [r * t.cos(), r * t.sin()]
                })
                .collect();
            let region = PolygonRegion::new(&poly, 0.01);
            let q = [qx, qy];
            prop_assert_eq!(region.contains(q), point_in_polygon(q, &poly));
            prop_assert!((region.boundary_distance(q) - polygon_boundary_distance(q, &poly)).abs() < 1e-12);
        }
    }
}
