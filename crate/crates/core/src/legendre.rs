//! Legendre-Fenchel conjugates of graph functions, finiteness of the conjugate on
//! the unit circle, and the comparison of the gradient image with the convex hull
//! of the finiteness set.
//!
//! Finiteness of `f*(y)` for `|y| = 1` is decided in two stages. The recession
//! margin `m(θ) = min_θ' λ_f(θ') − y·θ'`, with `λ_f` the two-radius slope of `f`,
//! separates clear cases: `m ≤ −δ_m` is infinite. On the circle `m` never exceeds
//! zero, so the remaining band is decided from the growth of the truncated
//! conjugate `S(ρ) = sup_{|x| ≤ ρ} x·y − f(x)` at `ρ = R, 2R, 4R`: fitting
//! `S(ρ) = c + sρ − a/ρ` gives the divergence rate `s = (2d₂ − d₁)/3R` from the
//! increments `d₁, d₂`, and `s ≤ τ` counts as finite.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{ChartGrid, Vec2};
use crate::error::{GeometryError, Result};
use crate::graphs::{entire_spacelike_check, SpacelikeGraph, SpacelikeReport};
use crate::lorentz::{hausdorff_to_region, CircleSubset, HausdorffReport, KleinPoint, StraightConvexDomain};
use crate::spatial::PointIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationStatus {
    /// The maximizer lies well inside the truncation disc.
    InteriorCertified,
    /// The maximizer is near `|x| = R`; the true value may be `+∞`.
    TruncationLimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegendreValue {
    pub value: f64,
    pub maximizer: [f64; 2],
    pub status: TruncationStatus,
}

const SCAN_RADII: usize = 24;
const SCAN_ANGLES: usize = 64;
const BOUNDARY_ANGLES: usize = 256;
const GOLDEN_ITERS: usize = 60;

/// Maximizes a function of the angle on `[a, b]` by golden-section search.
fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..iters {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    if gc >= gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// `max_θ ρ y·θ − f(ρθ)` on the circle `|x| = ρ`.
fn circle_sup(f: &SpacelikeGraph, y: Vec2, rho: f64, samples: usize) -> Result<(f64, f64)> {
    let g = |t: f64| -> Result<f64> {
        let x = Vec2::new(rho * t.cos(), rho * t.sin());
        Ok(x.dot(&y) - f.value(x)?)
    };
    let dt = TAU / samples as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..samples {
        let t = k as f64 * dt;
        let v = g(t)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    let refined = golden_max(|t| g(t).unwrap_or(f64::NEG_INFINITY), best.0 - dt, best.0 + dt, GOLDEN_ITERS);
    Ok(if refined.1 > best.1 { refined } else { best })
}

fn newton_interior(f: &SpacelikeGraph, y: Vec2, start: Vec2, r: f64) -> Option<(Vec2, f64)> {
    let objective = |x: Vec2| f.value(x).map(|v| x.dot(&y) - v).ok();
    let mut x = start;
    let mut obj = objective(x)?;
    for _ in 0..100 {
        let jet = f.jet(x).ok()?;
        let grad = y - jet.gradient;
        let d = jet.hessian.cholesky()?.solve(&grad);
        let decrement = grad.dot(&d);
        if decrement <= 1e-14 * (1.0 + x.norm()) {
            return Some(match objective(x + d) {
                Some(on) if on >= obj && (x + d).norm() <= r => (x + d, on),
                _ => (x, obj),
            });
        }
        let mut t = 1.0;
        loop {
            let xn = x + d * t;
            if xn.norm() <= r {
                if let Some(on) = objective(xn) {
                    if on >= obj + 1e-4 * t * decrement {
                        x = xn;
                        obj = on;
                        break;
                    }
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                return None;
            }
        }
    }
    None
}

/// `sup_{|x| ≤ R} x·y − f(x)`: coarse polar scan, Newton refinement inside the disc
/// when `f` has a usable Hessian, and a refined search on the boundary circle.
pub fn legendre_transform(f: &SpacelikeGraph, y: Vec2, r: f64) -> Result<LegendreValue> {
    if !(r > 0.0) {
        return Err(GeometryError::Invalid("truncation radius must be positive".into()));
    }
    let mut best = (Vec2::zeros(), -f.value(Vec2::zeros())?);
    for i in 1..=SCAN_RADII {
        let rho = r * i as f64 / SCAN_RADII as f64;
        for k in 0..SCAN_ANGLES {
            let t = TAU * k as f64 / SCAN_ANGLES as f64;
            let x = Vec2::new(rho * t.cos(), rho * t.sin());
            let v = x.dot(&y) - f.value(x)?;
            if v > best.1 || (v == best.1 && x.norm() < best.0.norm()) {
                best = (x, v);
            }
        }
    }
    if let Some((x, v)) = newton_interior(f, y, best.0, r) {
        if v >= best.1 {
            best = (x, v);
        }
    }
    let (t, v) = circle_sup(f, y, r, BOUNDARY_ANGLES)?;
    if v > best.1 {
        best = (Vec2::new(r * t.cos(), r * t.sin()), v);
    }
    let status = if best.0.norm() <= 0.9 * r {
        TruncationStatus::InteriorCertified
    } else {
        TruncationStatus::TruncationLimited
    };
    Ok(LegendreValue { value: best.1, maximizer: [best.0[0], best.0[1]], status })
}

/// Gradient values at the chart nodes; equals the Klein projection of the Gauss
/// map there.
pub fn gradient_image(f: &SpacelikeGraph, chart: &ChartGrid) -> Result<Vec<KleinPoint>> {
    let jets = f.spacelike_jets(chart)?;
    jets.values().iter().map(|j| KleinPoint::new(j.gradient[0], j.gradient[1])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinitenessParams {
    /// Truncation radius `R`.
    pub radius: f64,
    /// Margin threshold `δ_m`.
    pub delta_m: f64,
    /// Margins at or below `−δ_far` are infinite without further work.
    pub delta_far: f64,
    /// Largest fitted divergence rate counted as finite.
    pub tau: f64,
    /// Angular samples per circle used for the truncated conjugate.
    pub circle_samples: usize,
}

impl Default for FinitenessParams {
    fn default() -> Self {
        Self { radius: 50.0, delta_m: 1e-3, delta_far: 0.1, tau: 1e-5, circle_samples: 4096 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Finiteness {
    Finite,
    Infinite,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinitenessSample {
    pub theta: f64,
    pub margin: f64,
    /// Fitted divergence rate, when the margin test was inconclusive.
    pub rate: Option<f64>,
    pub verdict: Finiteness,
}

/// Asymptotic slopes `λ_f(θ) = (f(Rθ) − f(Rθ/2)) / (R/2)` on an angular grid.
#[derive(Debug, Clone, Serialize)]
pub struct LegendreProfile {
    pub radius: f64,
    pub angles: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl LegendreProfile {
    pub fn new(f: &SpacelikeGraph, radius: f64, n: usize) -> Result<Self> {
        let angles: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
        let slopes = angles
            .par_iter()
            .map(|&t| {
                let d = Vec2::new(t.cos(), t.sin());
                Ok((f.value(d * radius)? - f.value(d * (0.5 * radius))?) / (0.5 * radius))
            })
            .collect::<Result<_>>()?;
        Ok(Self { radius, angles, slopes })
    }

    /// `min_θ' λ_f(θ') − y·θ'` for `y = (cos θ, sin θ)`.
    pub fn margin(&self, theta: f64) -> f64 {
        self.angles.iter().zip(&self.slopes).map(|(t, l)| l - (theta - t).cos()).fold(f64::INFINITY, f64::min)
    }
}

/// Values of `f` on the circles `|x| = R, 2R, 4R`, used for truncated conjugates.
#[derive(Debug, Clone)]
pub struct CircleTables {
    radii: [f64; 3],
    values: [Vec<f64>; 3],
}

impl CircleTables {
    pub fn new(f: &SpacelikeGraph, radius: f64, samples: usize) -> Result<Self> {
        let radii = [radius, 2.0 * radius, 4.0 * radius];
        let mut values: [Vec<f64>; 3] = Default::default();
        for (v, &rho) in values.iter_mut().zip(&radii) {
            *v = (0..samples)
                .into_par_iter()
                .map(|k| {
                    let t = TAU * k as f64 / samples as f64;
                    f.value(Vec2::new(rho * t.cos(), rho * t.sin()))
                })
                .collect::<Result<_>>()?;
        }
        Ok(Self { radii, values })
    }

    /// `max_{|x| = ρ} x·y − f(x)` for each tabulated radius.
    pub fn sups(&self, f: &SpacelikeGraph, theta: f64) -> [f64; 3] {
        std::array::from_fn(|r| {
            let (rho, table) = (self.radii[r], &self.values[r]);
            let dt = TAU / table.len() as f64;
            let (k, v) = table
                .iter()
                .enumerate()
                .map(|(k, fv)| (k, rho * (k as f64 * dt - theta).cos() - fv))
                .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
            let g = |t: f64| {
                let x = Vec2::new(rho * t.cos(), rho * t.sin());
                f.value(x).map(|fv| rho * (t - theta).cos() - fv).unwrap_or(f64::NEG_INFINITY)
            };
            let t0 = k as f64 * dt;
            golden_max(g, t0 - dt, t0 + dt, GOLDEN_ITERS).1.max(v)
        })
    }

    /// Fitted divergence rate `s` of `S(ρ) = c + sρ − a/ρ`.
    pub fn divergence_rate(&self, f: &SpacelikeGraph, theta: f64) -> f64 {
        let s = self.sups(f, theta);
        let (d1, d2) = (s[1] - s[0], s[2] - s[1]);
        (2.0 * d2 - d1) / (3.0 * self.radii[0])
    }
}

/// Three-valued verdict at `θ`; `tables` resolve margins above `−δ_far`.
pub fn finiteness_test(
    f: &SpacelikeGraph,
    profile: &LegendreProfile,
    tables: &CircleTables,
    theta: f64,
    params: &FinitenessParams,
) -> FinitenessSample {
    let margin = profile.margin(theta);
    if margin >= params.delta_m {
        return FinitenessSample { theta, margin, rate: None, verdict: Finiteness::Finite };
    }
    if margin <= -params.delta_far {
        return FinitenessSample { theta, margin, rate: None, verdict: Finiteness::Infinite };
    }
    let rate = tables.divergence_rate(f, theta);
    let verdict = if !rate.is_finite() {
        Finiteness::Undecided
    } else if rate <= params.tau {
        Finiteness::Finite
    } else {
        Finiteness::Infinite
    };
    FinitenessSample { theta, margin, rate: Some(rate), verdict }
}

/// Finiteness verdicts on an angular grid and the circle subset they describe.
#[derive(Debug, Clone, Serialize)]
pub struct FinitenessSet {
    pub samples: Vec<FinitenessSample>,
    pub points: Vec<f64>,
    pub arcs: Vec<(f64, f64)>,
    pub undecided: usize,
}

impl FinitenessSet {
    pub fn from_samples(samples: Vec<FinitenessSample>) -> Self {
        let n = samples.len();
        let finite: Vec<bool> = samples.iter().map(|s| s.verdict == Finiteness::Finite).collect();
        let undecided = samples.iter().filter(|s| s.verdict == Finiteness::Undecided).count();
        let (mut points, mut arcs) = (vec![], vec![]);
        if n > 0 && finite.iter().all(|&b| b) {
            arcs.push((0.0, TAU));
        } else if let Some(gap) = finite.iter().position(|&b| !b) {
            // walk the circle starting just after a non-finite sample
            let mut k = 1;
            while k <= n {
                let idx = (gap + k) % n;
                if finite[idx] {
                    let start = k;
                    while k < n && finite[(gap + k + 1) % n] {
                        k += 1;
                    }
                    let (a, b) = (samples[(gap + start) % n].theta, samples[(gap + k) % n].theta);
                    if start == k {
                        points.push(a);
                    } else {
                        let b = if b < a { b + TAU } else { b };
                        arcs.push((a, b));
                    }
                }
                k += 1;
            }
        }
        points.sort_by(f64::total_cmp);
        arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { samples, points, arcs, undecided }
    }

    pub fn subset(&self) -> CircleSubset {
        CircleSubset { points: self.points.clone(), arcs: self.arcs.clone() }
    }

    pub fn hull(&self) -> Result<StraightConvexDomain> {
        if self.undecided == self.samples.len() {
            return Err(GeometryError::DegenerateHull("every finiteness sample is undecided".into()));
        }
        StraightConvexDomain::from_subset(&self.subset())
    }
}

/// Finiteness sweep over `n` equally spaced angles.
pub fn finiteness_sweep(f: &SpacelikeGraph, n: usize, params: &FinitenessParams) -> Result<FinitenessSet> {
    let profile = LegendreProfile::new(f, params.radius, n)?;
    let tables = CircleTables::new(f, params.radius, params.circle_samples)?;
    let samples: Vec<FinitenessSample> =
        profile.angles.par_iter().map(|&t| finiteness_test(f, &profile, &tables, t, params)).collect();
    Ok(FinitenessSet::from_samples(samples))
}

/// The straight convex domain spanned by the finiteness set of `f*` on the circle.
pub fn essential_hull(
    f: &SpacelikeGraph,
    n: usize,
    params: &FinitenessParams,
) -> Result<(StraightConvexDomain, FinitenessSet)> {
    let set = finiteness_sweep(f, n, params)?;
    Ok((set.hull()?, set))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremParams {
    /// Half-widths of the square charts `[−R_c, R_c]²`.
    pub extents: Vec<f64>,
    /// Nodes per side of each chart.
    pub nodes: usize,
    /// Samples per chart edge of the boundary loop mapped by `Df`.
    pub boundary_samples: usize,
    /// Angular samples of the finiteness sweep.
    pub angles: usize,
    pub finiteness: FinitenessParams,
    pub probe_dtheta: f64,
    pub probe_spacing: f64,
    /// Smallest accepted inclusion margin.
    pub inclusion_tol: f64,
    /// Smallest accepted distance between images of distinct nodes.
    pub min_separation: f64,
}

impl Default for TheoremParams {
    fn default() -> Self {
        Self {
            extents: vec![3.0, 6.0, 12.0],
            nodes: 101,
            boundary_samples: 1024,
            angles: 1024,
            finiteness: FinitenessParams::default(),
            probe_dtheta: crate::lorentz::PROBE_DTHETA,
            probe_spacing: crate::lorentz::PROBE_SPACING,
            inclusion_tol: 1e-6,
            min_separation: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtentResult {
    pub extent: f64,
    pub hausdorff: HausdorffReport,
    /// Smallest depth of a node image inside the hull; negative outside.
    pub inclusion_margin: f64,
    pub min_separation: f64,
    pub min_hessian_det: f64,
    pub injective: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub finiteness: FinitenessSet,
    pub hull: Option<StraightConvexDomain>,
    pub spacelike: SpacelikeReport,
    pub pinching: &'static str,
    pub hausdorff_by_extent: Vec<ExtentResult>,
    pub hausdorff_decreasing: bool,
    pub inclusion: bool,
    pub injectivity: bool,
    pub messages: Vec<String>,
    pub verdict: bool,
}

/// Image of the boundary of `[−e, e]²` under `Df`, counter-clockwise.
pub fn boundary_image(f: &SpacelikeGraph, extent: f64, per_side: usize) -> Result<Vec<[f64; 2]>> {
    let corners = [[-extent, -extent], [extent, -extent], [extent, extent], [-extent, extent]];
    let xs: Vec<Vec2> = (0..4)
        .flat_map(|c| {
            let (a, b) = (corners[c], corners[(c + 1) % 4]);
            (0..per_side).map(move |k| {
                let t = k as f64 / per_side as f64;
                Vec2::new(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
            })
        })
        .collect();
    xs.par_iter().map(|&x| f.gradient(x).map(|g| [g[0], g[1]])).collect()
}

fn extent_result(
    f: &SpacelikeGraph,
    hull: &StraightConvexDomain,
    extent: f64,
    p: &TheoremParams,
) -> Result<ExtentResult> {
    let chart = ChartGrid::square(extent, p.nodes)?;
    let jets = f.spacelike_jets(&chart)?;
    let images: Vec<[f64; 2]> = jets.values().iter().map(|j| [j.gradient[0], j.gradient[1]]).collect();
    let inclusion_margin = images.iter().map(|&y| hull.depth(y)).fold(f64::INFINITY, f64::min);
    let index = PointIndex::new(&images);
    let min_separation = images
        .iter()
        .enumerate()
        .filter_map(|(k, y)| index.nearest_excluding(y, Some(k)).map(|(_, d)| d))
        .fold(f64::INFINITY, f64::min);
    let min_hessian_det = jets.values().iter().map(|j| j.hessian.determinant()).fold(f64::INFINITY, f64::min);
    let polygon = boundary_image(f, extent, p.boundary_samples)?;
    let hausdorff = hausdorff_to_region(&polygon, hull, p.probe_dtheta, p.probe_spacing)?;
    Ok(ExtentResult {
        extent,
        hausdorff,
        inclusion_margin,
        min_separation,
        min_hessian_det,
        injective: min_separation > p.min_separation && min_hessian_det > 0.0,
    })
}

/// Compares the gradient image of `f` over growing charts with the hull of the
/// finiteness set of `f*`. Pinching of the curvature is assumed beyond the charts.
pub fn theorem_check(f: &SpacelikeGraph, p: &TheoremParams) -> Result<TheoremReport> {
    let largest = p.extents.iter().copied().fold(f64::NAN, f64::max);
    if p.extents.is_empty() || !(largest > 0.0) || p.nodes < 3 || p.boundary_samples == 0 {
        return Err(GeometryError::Invalid(
            "theorem check needs positive extents, nodes >= 3 and boundary samples".into(),
        ));
    }
    let mut messages = vec![];
    let spacelike = entire_spacelike_check(f, &ChartGrid::square(largest, p.nodes)?);
    if !spacelike.pass {
        messages.push("precondition failed: not a convex spacelike graph on the largest chart".to_string());
    }
    if !spacelike.pinched_negative {
        messages.push("precondition failed: curvature not pinched negative on the largest chart".to_string());
    }
    let finiteness = finiteness_sweep(f, p.angles, &p.finiteness)?;
    let hull = match finiteness.hull() {
        Ok(h) => Some(h),
        Err(e) => {
            messages.push(format!("no hull: {e}"));
            None
        }
    };
    let hausdorff_by_extent: Vec<ExtentResult> = match &hull {
        Some(h) => p.extents.iter().map(|&e| extent_result(f, h, e, p)).collect::<Result<_>>()?,
        None => vec![],
    };
    let hausdorff_decreasing =
        hausdorff_by_extent.windows(2).all(|w| w[1].hausdorff.distance < w[0].hausdorff.distance);
    let inclusion = hausdorff_by_extent.iter().all(|r| r.inclusion_margin >= -p.inclusion_tol);
    let injectivity = hausdorff_by_extent.iter().all(|r| r.injective);
    if !hausdorff_decreasing {
        messages.push("Hausdorff distance does not decrease with the extent".to_string());
    }
    if !inclusion {
        messages.push("gradient image leaves the hull beyond the inclusion tolerance".to_string());
    }
    if !injectivity {
        messages.push("gradient map is not injective on the nodes".to_string());
    }
    let verdict = hull.is_some() && spacelike.pass && spacelike.pinched_negative && hausdorff_decreasing && injectivity;
    Ok(TheoremReport {
        finiteness,
        hull,
        spacelike,
        pinching: "asserted beyond chart",
        hausdorff_by_extent,
        hausdorff_decreasing,
        inclusion,
        injectivity,
        messages,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{conjugate_construct, ClosedForm, Potential, CONJUGATE_TABLE_RESOLUTION};
    use proptest::prelude::*;

    const DT: f64 = TAU / 1024.0;

    fn half_disc() -> SpacelikeGraph {
        conjugate_construct(Potential::HalfDisc { eps: 0.1 }, CONJUGATE_TABLE_RESOLUTION).unwrap()
    }

    fn three_point() -> SpacelikeGraph {
        conjugate_construct(
            Potential::ThreePoint { eps: 0.1, angles: [0.0, 342.0 * DT, 683.0 * DT] },
            CONJUGATE_TABLE_RESOLUTION,
        )
        .unwrap()
    }

    fn angle_gap(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d)
    }

    #[test]
    fn hyperboloid_transform_is_minus_sqrt() {
        let f = SpacelikeGraph::hyperboloid();
        for y in [[0.0, 0.0], [0.3, -0.4], [0.6, 0.2]] {
            let y = Vec2::new(y[0], y[1]);
            let l = legendre_transform(&f, y, 50.0).unwrap();
            assert!((l.value + (1.0 - y.norm_squared()).sqrt()).abs() < 1e-10, "{y}: {}", l.value);
            assert_eq!(l.status, TruncationStatus::InteriorCertified);
        }
        let far = legendre_transform(&f, Vec2::new(0.99999, 0.0), 50.0).unwrap();
        assert_eq!(far.status, TruncationStatus::TruncationLimited);
    }

    #[test]
    fn affine_transform_is_finite_only_at_slope() {
        let f = SpacelikeGraph::closed_form(ClosedForm::Affine { slope: [0.3, -0.1], offset: 0.5 });
        let at = legendre_transform(&f, Vec2::new(0.3, -0.1), 50.0).unwrap();
        assert!((at.value + 0.5).abs() < 1e-12);
        let (a, b) = (
            legendre_transform(&f, Vec2::new(0.4, -0.1), 50.0).unwrap(),
            legendre_transform(&f, Vec2::new(0.4, -0.1), 100.0).unwrap(),
        );
        assert_eq!(a.status, TruncationStatus::TruncationLimited);
        assert!((b.value - a.value - 50.0 * 0.1).abs() < 1e-9);
    }

    #[test]
    fn hyperboloid_is_finite_everywhere_on_the_circle() {
        let f = SpacelikeGraph::hyperboloid();
        let (hull, set) = essential_hull(&f, 256, &FinitenessParams::default()).unwrap();
        assert!(hull.is_full_disc());
        assert!(set.samples.iter().all(|s| s.verdict == Finiteness::Finite));
    }

    #[test]
    fn affine_is_infinite_everywhere_on_the_circle() {
        let f = SpacelikeGraph::closed_form(ClosedForm::Affine { slope: [0.2, 0.1], offset: 0.0 });
        let set = finiteness_sweep(&f, 128, &FinitenessParams::default()).unwrap();
        assert!(set.samples.iter().all(|s| s.verdict == Finiteness::Infinite));
        assert!(matches!(essential_hull(&f, 128, &FinitenessParams::default()), Err(GeometryError::DegenerateHull(_))));
    }

    #[test]
    fn affine_theorem_check_reports_the_failed_precondition() {
        let f = SpacelikeGraph::closed_form(ClosedForm::Affine { slope: [0.2, 0.1], offset: 0.0 });
        let p = TheoremParams { angles: 128, nodes: 21, ..TheoremParams::default() };
        let r = theorem_check(&f, &p).unwrap();
        assert!(!r.verdict);
        assert!(r.hull.is_none());
        assert!(r.messages.iter().any(|m| m.contains("curvature not pinched negative")));
    }

    #[test]
    fn half_disc_finiteness_is_the_right_half() {
        let f = half_disc();
        let set = finiteness_sweep(&f, 1024, &FinitenessParams::default()).unwrap();
        assert!(set.points.is_empty());
        assert_eq!(set.arcs.len(), 1, "{:?}", set.arcs);
        let (a, b) = set.arcs[0];
        assert!(angle_gap(a, -0.25 * TAU) <= 2.0 * DT, "{a}");
        assert!(angle_gap(b, 0.25 * TAU) <= 2.0 * DT, "{b}");
        let pi = set.samples.iter().find(|s| (s.theta - 0.5 * TAU).abs() < 1e-12).unwrap();
        assert_eq!(pi.verdict, Finiteness::Infinite);
    }

    #[test]
    fn three_point_finiteness_is_the_vertices() {
        let f = three_point();
        let set = finiteness_sweep(&f, 1024, &FinitenessParams::default()).unwrap();
        assert!(set.arcs.is_empty(), "{:?}", set.arcs);
        assert_eq!(set.points.len(), 3);
        for (p, k) in set.points.iter().zip([0.0, 342.0, 683.0]) {
            assert!(angle_gap(*p, k * DT) <= 2.0 * DT);
        }
    }

    #[test]
    fn finiteness_set_wraps_around_zero() {
        let mk = |theta: f64, finite: bool| FinitenessSample {
            theta,
            margin: 0.0,
            rate: None,
            verdict: if finite { Finiteness::Finite } else { Finiteness::Infinite },
        };
        let samples: Vec<_> = (0..8).map(|k| mk(k as f64 * TAU / 8.0, matches!(k, 0 | 1 | 4 | 7))).collect();
        let set = FinitenessSet::from_samples(samples);
        assert_eq!(set.points, vec![4.0 * TAU / 8.0]);
        assert_eq!(set.arcs.len(), 1);
        let (a, b) = set.arcs[0];
        assert!((a - 7.0 * TAU / 8.0).abs() < 1e-12 && (b - (TAU + TAU / 8.0)).abs() < 1e-12);
    }

    #[test]
    fn hyperboloid_theorem_distances_match_closed_form() {
        let f = SpacelikeGraph::hyperboloid();
        let p = TheoremParams { angles: 256, nodes: 41, ..TheoremParams::default() };
        let r = theorem_check(&f, &p).unwrap();
        assert!(r.verdict, "{:?}", r.messages);
        for e in &r.hausdorff_by_extent {
            let expected = 1.0 - e.extent / (1.0 + e.extent * e.extent).sqrt();
            assert!((e.hausdorff.distance - expected).abs() < 0.1 * expected, "{} {}", e.extent, e.hausdorff.distance);
        }
    }

    #[test]
    fn gradient_image_stays_inside_the_half_disc() {
        let f = half_disc();
        let hull = StraightConvexDomain::from_subset(&CircleSubset::from_arc(-0.25 * TAU, 0.25 * TAU)).unwrap();
        for y in gradient_image(&f, &ChartGrid::square(24.0, 41).unwrap()).unwrap() {
            assert!(hull.depth(y.as_array()) > 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fenchel_young(x1 in -10.0..10.0f64, x2 in -10.0..10.0f64, r in 0.0..0.95f64, t in 0.0..TAU) {
            let f = three_point();
            let (x, y) = (Vec2::new(x1, x2), Vec2::new(r * t.cos(), r * t.sin()));
            let l = legendre_transform(&f, y, 50.0).unwrap();
            prop_assert!(f.value(x).unwrap() + l.value >= x.dot(&y) - 1e-8);
        }

        #[test]
        fn transform_is_convex(a in 0.0..0.9f64, b in 0.0..TAU, c in 0.0..0.9f64, d in 0.0..TAU) {
            let f = SpacelikeGraph::hyperboloid();
            let (p, q) = (Vec2::new(a * b.cos(), a * b.sin()), Vec2::new(c * d.cos(), c * d.sin()));
            let v = |y: Vec2| legendre_transform(&f, y, 50.0).unwrap().value;
            prop_assert!(v((p + q) / 2.0) <= 0.5 * (v(p) + v(q)) + 1e-9);
        }

        #[test]
        fn margins_are_lipschitz(k in 0usize..256) {
            let f = SpacelikeGraph::closed_form(ClosedForm::HyperboloidBump { amplitude: 0.05 });
            let profile = LegendreProfile::new(&f, 50.0, 256).unwrap();
            let dt = TAU / 256.0;
            let (a, b) = (profile.margin(k as f64 * dt), profile.margin((k + 1) as f64 * dt));
            prop_assert!((a - b).abs() <= 2.0 * dt);
        }
    }
}
