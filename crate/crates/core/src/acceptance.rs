//! The desk-scale acceptance suite. Each check returns its verdict with the
//! measured quantities; `selftest` and the acceptance test target both run these.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chart::Christoffel;
use crate::chart::{gauss_curvature, ChartGrid, Field, Mat2, StencilOrder, Vec2, INTERIOR_MARGIN};
use crate::convergence::Convergence;
use crate::error::{GeometryError, Result};
use crate::frames::{
    align_to_gauss_map, default_base_frame, holonomy_residual, integrate_frame, position_error, FrameCoefficients,
    FrameData, GraphCoefficients, IntegrationOptions,
};
use crate::graphs::{
    conjugate_construct, first_fundamental_form, metric_from_gradient, ClosedForm, Potential, SpacelikeGraph,
    CONJUGATE_TABLE_RESOLUTION,
};
use crate::harmonic::{
    curvature_ratio_check, extract_b, first_variation, one_harmonic_residual, JacobianMode, MapBetweenCharts,
    PerturbationRegion,
};
use crate::legendre::{
    essential_hull, finiteness_sweep, legendre_transform, theorem_check, FinitenessParams, TheoremParams,
};
use crate::lorentz::{BoundaryPiece, FrameState, LorentzIsometry, MinkVector};

pub const MIN_ORDER: f64 = 1.8;
/// Stencil for the curvature identities; the second-order stencil misses the
/// `h = 0.05` tolerances and is reported alongside.
pub const IDENTITY_ORDER: StencilOrder = StencilOrder::Fourth;
/// Angular samples used by the finiteness sweeps.
pub const SWEEP_ANGLES: usize = 1024;
/// Vertex angles of the three-point family, in sweep samples.
pub const THREE_POINT_SAMPLES: [f64; 3] = [0.0, 342.0, 683.0];

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub metrics: Value,
}

impl Criterion {
    fn from_result(id: u8, name: &'static str, r: Result<(bool, Value)>) -> Self {
        match r {
            Ok((pass, metrics)) => Self { id, name, pass, metrics },
            Err(e) => Self { id, name, pass: false, metrics: json!({ "error": e.to_string() }) },
        }
    }

    pub fn line(&self) -> String {
        format!("criterion {} {}: {}", self.id, if self.pass { "PASS" } else { "FAIL" }, self.name)
    }
}

pub fn half_disc() -> Result<SpacelikeGraph> {
    conjugate_construct(Potential::HalfDisc { eps: 0.1 }, CONJUGATE_TABLE_RESOLUTION)
}

pub fn three_point_angles() -> [f64; 3] {
    THREE_POINT_SAMPLES.map(|k| k * TAU / SWEEP_ANGLES as f64)
}

pub fn three_point() -> Result<SpacelikeGraph> {
    conjugate_construct(Potential::ThreePoint { eps: 0.1, angles: three_point_angles() }, CONJUGATE_TABLE_RESOLUTION)
}

fn interior_max(grid: &ChartGrid, v: Vec<f64>) -> Result<f64> {
    Ok(Field::from_values(*grid, v)?.max_abs_interior(INTERIOR_MARGIN))
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn hyperboloid_identities(h: f64, order: StencilOrder) -> Result<[f64; 3]> {
    let s = SpacelikeGraph::hyperboloid();
    let chart = ChartGrid::square_with_spacing(3.0, h)?;
    let g = first_fundamental_form(&s, &chart)?;
    let k = gauss_curvature(&g, order)?;
    let m = MapBetweenCharts::gauss_map_of(&s, &chart, JacobianMode::FiniteDifference(order))?;
    let b = extract_b(&m)?;
    let curvature = interior_max(&chart, k.values().iter().map(|k| k + 1.0).collect())?;
    let shape = interior_max(&chart, b.values().iter().map(|b| (b - Mat2::identity()).norm()).collect())?;
    let gauss = interior_max(&chart, k.values().iter().zip(b.values()).map(|(k, b)| k + b.determinant()).collect())?;
    Ok([curvature, shape, gauss])
}

/// Curvature, shape operator and Gauss equation of the hyperboloid on `[−3,3]²`.
pub fn criterion_1() -> Criterion {
    Criterion::from_result(
        1,
        "hyperboloid identities",
        (|| {
            let (c, f) =
                (hyperboloid_identities(0.05, IDENTITY_ORDER)?, hyperboloid_identities(0.025, IDENTITY_ORDER)?);
            let reference = hyperboloid_identities(0.05, StencilOrder::Second)?;
            let tols = [1e-3, 1e-3, 5e-3];
            let names = ["curvature_plus_one", "shape_operator_minus_identity", "gauss_equation"];
            let mut pass = true;
            let mut metrics = serde_json::Map::new();
            for i in 0..3 {
                let conv = Convergence::new(c[i], f[i]);
                pass &= c[i] <= tols[i] && conv.reaches(MIN_ORDER);
                metrics.insert(
                names[i].into(),
                json!({ "tolerance": tols[i], "convergence": conv, "second_order_stencil_at_coarse": reference[i] }),
            );
            }
            Ok((pass, Value::Object(metrics)))
        })(),
    )
}

fn closed_form_residual(c: ClosedForm, h: f64, shear: Option<f64>) -> Result<f64> {
    let chart = ChartGrid::square_with_spacing(1.0, h)?;
    let mut m = MapBetweenCharts::gauss_map_of(&SpacelikeGraph::closed_form(c), &chart, JacobianMode::Exact)?;
    if let Some(k) = shear {
        m = m.sheared(k)?;
    }
    one_harmonic_residual(&m, StencilOrder::Second)
}

/// Codazzi decay for the strictly convex closed forms and the sheared control.
pub fn criterion_2() -> Criterion {
    Criterion::from_result(
        2,
        "Codazzi residual of Gauss maps",
        (|| {
            let families = [
                ClosedForm::Hyperboloid { radius: 1.0 },
                ClosedForm::Hyperboloid { radius: 2.0 },
                ClosedForm::HyperboloidBump { amplitude: 0.05 },
            ];
            let mut pass = true;
            let mut rows = vec![];
            for c in families {
                let conv =
                    Convergence::new(closed_form_residual(c, 0.05, None)?, closed_form_residual(c, 0.025, None)?);
                pass &= conv.reaches(MIN_ORDER);
                rows.push(json!({ "family": c, "convergence": conv }));
            }
            let (a, b) = (
                closed_form_residual(ClosedForm::hyperboloid(), 0.05, Some(0.3))?,
                closed_form_residual(ClosedForm::hyperboloid(), 0.025, Some(0.3))?,
            );
            let decrease = 1.0 - b / a;
            pass &= decrease < 0.1;
            Ok((
                pass,
                json!({ "families": rows, "sheared": { "coarse": a, "fine": b, "relative_decrease": decrease } }),
            ))
        })(),
    )
}

/// First variation of the energy over a seeded ensemble of bumps.
pub fn criterion_3(seed: u64) -> Criterion {
    Criterion::from_result(
        3,
        "first variation of the energy",
        (|| {
            let chart = ChartGrid::square_with_spacing(1.0, 0.025)?;
            let m = MapBetweenCharts::gauss_map_of(&SpacelikeGraph::hyperboloid(), &chart, JacobianMode::Exact)?;
            let sheared = m.sheared(0.3)?;
            let ensemble = PerturbationRegion::ensemble(&chart, seed, 20);
            let (mut base, mut control) = (0f64, 0f64);
            for p in &ensemble {
                base = base.max(first_variation(&m, p, 1e-3)?.abs());
                control = control.max(first_variation(&sheared, p, 1e-3)?.abs());
            }
            let pass = base <= 1e-3 && control >= 10.0 * base;
            Ok((
                pass,
                json!({ "seed": seed, "bumps": ensemble.len(), "t": 1e-3, "max_first_variation": base, "sheared_max": control }),
            ))
        })(),
    )
}

struct NonCodazzi;

impl FrameCoefficients for NonCodazzi {
    fn at(&self, u: f64, _: f64) -> Result<FrameData> {
        Ok(FrameData { g: Mat2::identity(), gamma: Christoffel::default(), b: Mat2::new(1.0, 0.0, 0.0, 1.0 + u) })
    }
}

/// Frame reconstruction of the hyperboloid and alignment with a moved Gauss map.
pub fn criterion_4() -> Criterion {
    Criterion::from_result(
        4,
        "frame reconstruction round trip",
        (|| {
            let s = SpacelikeGraph::hyperboloid();
            let chart = ChartGrid::square_with_spacing(1.0, 0.01)?;
            let base = chart.center_node();
            let g0 = metric_from_gradient(s.gradient(Vec2::zeros())?);
            let opts = IntegrationOptions { tol_gc: Some(1e-2), ..Default::default() };
            let mut r = integrate_frame(&GraphCoefficients(&s), &chart, base, &default_base_frame(&g0)?, &opts)?;
            let position = position_error(&r, base, &s)?;
            let a0 = LorentzIsometry::boost(0.8, 2.0).compose(&LorentzIsometry::rotation(-0.6));
            let target = MapBetweenCharts::gauss_map_of(&s, &chart, JacobianMode::Exact)?.post_isometry(&a0)?;
            let al = align_to_gauss_map(&mut r, &target, base, 1e-6)?;
            let recovered = al.isometry.distance(&a0);

            let coarse = ChartGrid::square_with_spacing(1.0, 0.02)?;
            let frame = FrameState::standard(MinkVector::new(0.0, 0.0, 0.0));
            let strict = IntegrationOptions { tol_gc: Some(1e-3), ..Default::default() };
            let rejected = matches!(
                integrate_frame(&NonCodazzi, &coarse, coarse.center_node(), &frame, &strict),
                Err(GeometryError::GaussCodazzi { .. })
            );
            let corrupt_holonomy = holonomy_residual(&NonCodazzi, &coarse, coarse.center_node(), &frame, 1)?;
            let pass = position <= 1e-6
                && r.holonomy_residual <= 1e-6
                && recovered <= 1e-8
                && (rejected || corrupt_holonomy >= 1e-2);
            Ok((
                pass,
                json!({
                    "step": 0.01,
                    "position_error": position,
                    "holonomy_residual": r.holonomy_residual,
                    "isometry_error": recovered,
                    "gauss_residual": al.gauss_residual,
                    "corrupted": { "rejected": rejected, "holonomy_residual": corrupt_holonomy },
                }),
            ))
        })(),
    )
}

/// Truncated conjugates: hyperboloid values, Fenchel-Young, affine essential domain.
pub fn criterion_5(seed: u64) -> Criterion {
    Criterion::from_result(
        5,
        "Legendre transforms",
        (|| {
            let r = 50.0;
            let hyp = SpacelikeGraph::hyperboloid();
            let mut hyperboloid_error: f64 = 0.0;
            for i in 0..=9 {
                for k in 0..24 {
                    let (rho, t) = (0.1 * i as f64, TAU * k as f64 / 24.0);
                    let y = Vec2::new(rho * t.cos(), rho * t.sin());
                    let v = legendre_transform(&hyp, y, r)?.value;
                    hyperboloid_error = hyperboloid_error.max((v + (1.0 - rho * rho).sqrt()).abs());
                }
            }

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut fenchel_young: f64 = f64::INFINITY;
            let mut pairs = 0usize;
            for f in [hyp.clone(), half_disc()?] {
                let xs: Vec<Vec2> =
                    (0..50).map(|_| Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0))).collect();
                let ys: Vec<Vec2> = (0..100)
                    .map(|_| {
                        let (rho, t): (f64, f64) = (rng.gen_range(0.0..0.98), rng.gen_range(0.0..TAU));
                        Vec2::new(rho * t.cos(), rho * t.sin())
                    })
                    .collect();
                let fx: Vec<f64> = xs.iter().map(|&x| f.value(x)).collect::<Result<_>>()?;
                for &y in &ys {
                    let conj = legendre_transform(&f, y, r)?.value;
                    for (x, v) in xs.iter().zip(&fx) {
                        fenchel_young = fenchel_young.min(v + conj - x.dot(&y));
                        pairs += 1;
                    }
                }
            }

            let slope = [0.3, -0.1];
            let affine = SpacelikeGraph::closed_form(ClosedForm::Affine { slope, offset: 0.5 });
            let mut finite = vec![];
            for i in -19..=19 {
                for j in -19..=19 {
                    let y = Vec2::new(0.05 * i as f64, 0.05 * j as f64);
                    if y.norm() > 0.95 {
                        continue;
                    }
                    let growth =
                        legendre_transform(&affine, y, 2.0 * r)?.value - legendre_transform(&affine, y, r)?.value;
                    if growth <= 1e-6 {
                        finite.push([y[0], y[1]]);
                    }
                }
            }
            let single =
                finite.len() == 1 && (finite[0][0] - slope[0]).abs() < 1e-12 && (finite[0][1] - slope[1]).abs() < 1e-12;
            let circle = finiteness_sweep(&affine, 256, &FinitenessParams::default())?;
            let circle_empty = circle.points.is_empty() && circle.arcs.is_empty();
            let pass = hyperboloid_error <= 2e-2 && fenchel_young >= -1e-8 && single && circle_empty;
            Ok((
                pass,
                json!({
                    "radius": r,
                    "hyperboloid_max_error": hyperboloid_error,
                    "fenchel_young": { "pairs": pairs, "min_gap": fenchel_young },
                    "affine": { "finite_nodes": finite, "circle_empty": circle_empty },
                }),
            ))
        })(),
    )
}

/// Gradient images against hulls of finiteness sets for three families.
pub fn criterion_6() -> Criterion {
    Criterion::from_result(
        6,
        "gradient image and hull of the finiteness set",
        (|| {
            let dt = TAU / SWEEP_ANGLES as f64;
            let hyp = theorem_check(&SpacelikeGraph::hyperboloid(), &TheoremParams::default())?;
            let mut hyp_pass = hyp.verdict && hyp.hull.as_ref().is_some_and(|h| h.is_full_disc());
            let mut hyp_rows = vec![];
            for e in &hyp.hausdorff_by_extent {
                let expected = 1.0 - e.extent / (1.0 + e.extent * e.extent).sqrt();
                hyp_pass &= (e.hausdorff.distance - expected).abs() <= 0.1 * expected;
                hyp_rows.push(json!({ "extent": e.extent, "hausdorff": e.hausdorff.distance, "expected": expected }));
            }
            hyp_pass &= hyp.hausdorff_decreasing;

            let hd = theorem_check(
                &half_disc()?,
                &TheoremParams { extents: vec![3.0, 6.0, 12.0, 24.0], ..TheoremParams::default() },
            )?;
            let arcs = hd.finiteness.arcs.clone();
            let arc_ok = hd.finiteness.points.is_empty()
                && arcs.len() == 1
                && angle_gap(arcs[0].0, -0.25 * TAU) <= 2.0 * dt
                && angle_gap(arcs[0].1, 0.25 * TAU) <= 2.0 * dt;
            let hull_ok = hd.hull.as_ref().is_some_and(|h| match h.pieces() {
                [BoundaryPiece::Arc { start, end }] => {
                    angle_gap(*start, -0.25 * TAU) <= 2.0 * dt && angle_gap(*end, 0.25 * TAU) <= 2.0 * dt
                }
                _ => false,
            });
            let hd_pass = arc_ok && hull_ok && hd.hausdorff_decreasing && hd.injectivity;

            let (tri, set) = essential_hull(&three_point()?, SWEEP_ANGLES, &FinitenessParams::default())?;
            let mut tri_pass = set.arcs.is_empty()
                && set.points.len() == 3
                && tri.pieces().iter().filter(|p| matches!(p, BoundaryPiece::Vertex { .. })).count() == 3;
            if tri_pass {
                for (p, t) in set.points.iter().zip(three_point_angles()) {
                    tri_pass &= angle_gap(*p, t) <= 2.0 * dt;
                }
            }
            Ok((
                hyp_pass && hd_pass && tri_pass,
                json!({
                    "hyperboloid": { "pass": hyp_pass, "extents": hyp_rows },
                    "half_disc": {
                        "pass": hd_pass,
                        "arcs": arcs,
                        "hausdorff": hd.hausdorff_by_extent.iter().map(|e| json!([e.extent, e.hausdorff.distance])).collect::<Vec<_>>(),
                        "injectivity": hd.injectivity,
                        "inclusion_margin": hd.hausdorff_by_extent.iter().map(|e| e.inclusion_margin).fold(f64::INFINITY, f64::min),
                    },
                    "three_point": { "pass": tri_pass, "points": set.points, "expected": three_point_angles() },
                }),
            ))
        })(),
    )
}

fn ratio_residual(s: &SpacelikeGraph, h: f64, order: StencilOrder) -> Result<f64> {
    let chart = ChartGrid::square_with_spacing(1.0, h)?;
    let m = MapBetweenCharts::gauss_map_of(s, &chart, JacobianMode::FiniteDifference(order))?;
    curvature_ratio_check(m.source_metric(), &extract_b(&m)?, order)
}

/// `K_{g(B·,B·)} = K_g / det B` for the hyperboloid and the half-disc surface.
pub fn criterion_7() -> Criterion {
    Criterion::from_result(
        7,
        "curvature ratio identity",
        (|| {
            let mut pass = true;
            let mut rows = serde_json::Map::new();
            for (name, s) in [("hyperboloid", SpacelikeGraph::hyperboloid()), ("half_disc", half_disc()?)] {
                let conv = Convergence::new(
                    ratio_residual(&s, 0.05, IDENTITY_ORDER)?,
                    ratio_residual(&s, 0.025, IDENTITY_ORDER)?,
                );
                pass &= conv.coarse <= 5e-3 && conv.reaches(MIN_ORDER);
                let reference = ratio_residual(&s, 0.05, StencilOrder::Second)?;
                rows.insert(name.into(), json!({ "convergence": conv, "second_order_stencil_at_coarse": reference }));
            }
            Ok((pass, Value::Object(rows)))
        })(),
    )
}

/// Criteria one through seven.
pub fn run_suite(seed: u64) -> Vec<Criterion> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(seed),
        criterion_4(),
        criterion_5(seed),
        criterion_6(),
        criterion_7(),
    ]
}
