//! One-harmonic maps into the hyperbolic plane: extraction of the positive root `B`
//! of the pullback metric, the Codazzi test, and the variational test.
//!
//! The energy density is `‖∂F‖ = (s₁ + s₂)/2`, with `s₁, s₂` the singular values of
//! `dF` measured with the source metric `g` and the target metric `h`. Identity maps
//! have density one, and when `F*h = g(B·,B·)` the density is `tr B / 2`.

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::chart::{
    codazzi_residual, gauss_curvature, map_jacobian, pullback_metric, sym_positive_root, ChartGrid, EuclideanMetric,
    Field, KleinMetric, Mat2, MetricField, ScalarField, StencilOrder, TargetMetric, TensorField, Vec2, VectorField,
    INTERIOR_MARGIN,
};
use crate::error::{GeometryError, Result};
use crate::graphs::SpacelikeGraph;
use crate::lorentz::{klein_lift, klein_lift_differential, klein_project, KleinPoint, LorentzIsometry, MinkVector};

/// Metric on the target chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Target {
    /// The hyperbolic plane in Klein coordinates.
    Klein,
    /// `λ δ_ij`.
    Euclidean(f64),
}

impl TargetMetric for Target {
    fn metric_at(&self, y: Vec2) -> Result<Mat2> {
        match self {
            Self::Klein => KleinMetric.metric_at(y),
            Self::Euclidean(l) => EuclideanMetric(*l).metric_at(y),
        }
    }
}

/// How the differential of a Gauss map is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JacobianMode {
    /// `dF = Hess f` from the graph's exact derivatives.
    Exact,
    /// Finite differences of the sampled values.
    FiniteDifference(StencilOrder),
}

/// A map `F` from a source chart with metric `g` to a target chart with metric `h`,
/// sampled on the source grid together with its Jacobian.
#[derive(Debug, Clone)]
pub struct MapBetweenCharts {
    values: VectorField,
    jacobian: TensorField,
    g: MetricField,
    target: Target,
}

impl MapBetweenCharts {
    pub fn new(values: VectorField, jacobian: TensorField, g: MetricField, target: Target) -> Result<Self> {
        if values.grid() != jacobian.grid() || values.grid() != g.grid() {
            return Err(GeometryError::GridMismatch);
        }
        Ok(Self { values, jacobian, g, target })
    }

    /// Jacobian by finite differences of `values`.
    pub fn sampled(values: VectorField, g: MetricField, target: Target, order: StencilOrder) -> Result<Self> {
        let jacobian = map_jacobian(&values, order)?;
        Self::new(values, jacobian, g, target)
    }

    /// The Gauss map of a graph in Klein coordinates, `F = Df`, with source metric
    /// the first fundamental form.
    pub fn gauss_map_of(s: &SpacelikeGraph, chart: &ChartGrid, mode: JacobianMode) -> Result<Self> {
        let jets = s.spacelike_jets(chart)?;
        let values = jets.map(|j| j.gradient);
        let g = MetricField::new(jets.map(|j| crate::graphs::metric_from_gradient(j.gradient)))?;
        match mode {
            JacobianMode::Exact => {
                if !s.has_exact_derivatives() {
                    return Err(GeometryError::Invalid("graph has no exact Hessian".into()));
                }
                let jacobian = jets.map(|j| j.hessian);
                Self::new(values, jacobian, g, Target::Klein)
            }
            JacobianMode::FiniteDifference(order) => Self::sampled(values, g, Target::Klein, order),
        }
    }

    pub fn grid(&self) -> &ChartGrid {
        self.values.grid()
    }

    pub fn values(&self) -> &VectorField {
        &self.values
    }

    pub fn jacobian(&self) -> &TensorField {
        &self.jacobian
    }

    pub fn source_metric(&self) -> &MetricField {
        &self.g
    }

    pub fn target(&self) -> Target {
        self.target
    }

    /// `T ∘ F` for a target-chart map `T` given with its differential.
    pub fn compose_target(&self, t: impl Fn(Vec2) -> Result<(Vec2, Mat2)>) -> Result<Self> {
        let mapped = self.values.try_zip_with(&self.jacobian, |_, y, j| {
            let (ty, dt) = t(*y)?;
            Ok((ty, dt * j))
        })?;
        let values = mapped.map(|p| p.0);
        let jacobian = mapped.map(|p| p.1);
        Self::new(values, jacobian, self.g.clone(), self.target)
    }

    /// Post-composition with a hyperbolic isometry acting on Klein coordinates.
    pub fn post_isometry(&self, a: &LorentzIsometry) -> Result<Self> {
        if self.target != Target::Klein {
            return Err(GeometryError::Invalid("isometries act on the Klein target only".into()));
        }
        self.compose_target(|y| klein_isometry(a, y))
    }

    /// Post-composition with the shear `(y₁, y₂) → (y₁ + k y₂, y₂)`.
    pub fn sheared(&self, k: f64) -> Result<Self> {
        self.compose_target(|y| Ok((Vec2::new(y[0] + k * y[1], y[1]), Mat2::new(1.0, k, 0.0, 1.0))))
    }

    /// `F*h`.
    pub fn pullback(&self) -> Result<MetricField> {
        self.check_orientation()?;
        pullback_metric(&self.values, &self.jacobian, &self.target)
    }

    fn check_orientation(&self) -> Result<()> {
        for (node, j) in self.jacobian.values().iter().enumerate() {
            let det = j.determinant();
            if !(det > 0.0) {
                return Err(GeometryError::Degenerate { node, det });
            }
        }
        Ok(())
    }
}

/// An isometry of the hyperbolic plane in Klein coordinates, with its differential.
pub fn klein_isometry(a: &LorentzIsometry, y: Vec2) -> Result<(Vec2, Mat2)> {
    let p = klein_lift(KleinPoint::new(y[0], y[1])?)?;
    let x = a.apply(p.vector());
    let dl = klein_lift_differential([y[0], y[1]])?;
    let image = klein_project(a.apply_point(p));
    let proj =
        |v: MinkVector| Vec2::new(v.x1 / x.x3 - x.x1 * v.x3 / (x.x3 * x.x3), v.x2 / x.x3 - x.x2 * v.x3 / (x.x3 * x.x3));
    let c0 = proj(a.apply(dl[0]));
    let c1 = proj(a.apply(dl[1]));
    Ok((Vec2::new(image.y1, image.y2), Mat2::from_columns(&[c0, c1])))
}

/// The `g`-self-adjoint positive root of `F*h`.
pub fn extract_b(m: &MapBetweenCharts) -> Result<TensorField> {
    sym_positive_root(&m.g, &m.pullback()?)
}

/// Largest Codazzi residual of [`extract_b`] over interior nodes.
pub fn one_harmonic_residual(m: &MapBetweenCharts, order: StencilOrder) -> Result<f64> {
    let b = extract_b(m)?;
    Ok(codazzi_residual(&m.g, &b, order)?.max_abs_interior(INTERIOR_MARGIN))
}

/// Resolution-aware pass threshold `C·h^1.8` for Codazzi residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodazziTolerance {
    pub constant: f64,
}

impl CodazziTolerance {
    pub const EXPONENT: f64 = 1.8;

    /// Ten times the residual measured at a calibration spacing.
    pub fn calibrate(residual: f64, h: f64) -> Self {
        Self { constant: 10.0 * residual.max(crate::convergence::NOISE_FLOOR) / h.powf(Self::EXPONENT) }
    }

    pub fn at(&self, h: f64) -> f64 {
        self.constant * h.powf(Self::EXPONENT)
    }
}

/// `(s₁ + s₂)/2` from the source metric and the pullback at one node.
pub fn energy_density_at(g: &Mat2, q: &Mat2) -> Option<f64> {
    let s = g.try_inverse()? * q;
    let det = s.determinant();
    let tr = s.trace();
    if !(det >= 0.0) || !(tr >= 0.0) {
        return None;
    }
    Some(0.5 * (tr + 2.0 * det.sqrt()).max(0.0).sqrt())
}

pub fn energy_density(m: &MapBetweenCharts) -> Result<ScalarField> {
    let q = m.pullback()?;
    m.g.try_zip_with(q.field(), |node, g, q| {
        energy_density_at(g, q).ok_or(GeometryError::Degenerate { node, det: f64::NAN })
    })
}

/// A rectangle of nodes `[i0, i1] × [j0, j1]`, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeRect {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl NodeRect {
    pub fn whole(grid: &ChartGrid) -> Self {
        Self { i0: 0, i1: grid.n_u - 1, j0: 0, j1: grid.n_v - 1 }
    }

    /// Smallest node rectangle containing `[u0, u1] × [v0, v1]`, clipped to the grid.
    pub fn covering(grid: &ChartGrid, u0: f64, u1: f64, v0: f64, v1: f64) -> Self {
        let lo = |x: f64, min: f64, h: f64, n: usize| (((x - min) / h).floor().max(0.0) as usize).min(n - 1);
        let hi = |x: f64, min: f64, h: f64, n: usize| (((x - min) / h).ceil().max(0.0) as usize).min(n - 1);
        Self {
            i0: lo(u0, grid.u_min, grid.h_u(), grid.n_u),
            i1: hi(u1, grid.u_min, grid.h_u(), grid.n_u),
            j0: lo(v0, grid.v_min, grid.h_v(), grid.n_v),
            j1: hi(v1, grid.v_min, grid.h_v(), grid.n_v),
        }
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        let wi = if i == self.i0 || i == self.i1 { 0.5 } else { 1.0 };
        let wj = if j == self.j0 || j == self.j1 { 0.5 } else { 1.0 };
        wi * wj
    }

    fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.j0..=self.j1).flat_map(move |j| (self.i0..=self.i1).map(move |i| (i, j)))
    }
}

fn integrate(grid: &ChartGrid, omega: &NodeRect, f: impl Fn(usize) -> Result<f64>) -> Result<f64> {
    let cell = grid.h_u() * grid.h_v();
    let mut total = 0.0;
    for (i, j) in omega.nodes() {
        total += omega.weight(i, j) * f(grid.index(i, j))?;
    }
    Ok(total * cell)
}

/// `∫_Ω ‖∂F‖ dArea_g` by the trapezoid rule.
pub fn energy(m: &MapBetweenCharts, omega: &NodeRect) -> Result<f64> {
    energy_of(m, omega, |k| Ok((m.values.values()[k], m.jacobian.values()[k])))
}

fn energy_of(m: &MapBetweenCharts, omega: &NodeRect, at: impl Fn(usize) -> Result<(Vec2, Mat2)>) -> Result<f64> {
    integrate(m.grid(), omega, |k| {
        let (y, j) = at(k)?;
        let det = j.determinant();
        if !(det > 0.0) {
            return Err(GeometryError::Degenerate { node: k, det });
        }
        let g = &m.g.values()[k];
        let q = j.transpose() * m.target.metric_at(y)? * j;
        let density = energy_density_at(g, &q).ok_or(GeometryError::Degenerate { node: k, det })?;
        Ok(density * g.determinant().sqrt())
    })
}

fn bump_profile(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let w = 1.0 - s * s;
    (w.powi(4), -8.0 * s * w.powi(3))
}

/// `V(u) = d · β(s₁) β(s₂)` with `β(s) = (1 − s²)⁴` in the rectangle's normalized
/// coordinates; vanishes to third order on its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub half_width: [f64; 2],
    pub direction: [f64; 2],
}

impl Bump {
    pub fn eval(&self, u: f64, v: f64) -> (Vec2, Mat2) {
        let s1 = (u - self.center[0]) / self.half_width[0];
        let s2 = (v - self.center[1]) / self.half_width[1];
        let (b1, d1) = bump_profile(s1);
        let (b2, d2) = bump_profile(s2);
        let d = Vec2::new(self.direction[0], self.direction[1]);
        let grad = Vec2::new(d1 * b2 / self.half_width[0], b1 * d2 / self.half_width[1]);
        (d * (b1 * b2), d * grad.transpose())
    }
}

/// A compactly supported perturbation field: a sum of bumps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationRegion {
    pub bumps: Vec<Bump>,
}

impl PerturbationRegion {
    pub fn single(b: Bump) -> Self {
        Self { bumps: vec![b] }
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self { bumps: self.bumps.iter().chain(&other.bumps).copied().collect() }
    }

    /// Random bump with unit sup-norm on a sub-rectangle covering 20–50% of each
    /// chart side, kept two cells away from the chart edge.
    pub fn random(grid: &ChartGrid, rng: &mut impl Rng) -> Self {
        let mut axis = |min: f64, max: f64, h: f64| {
            let len = max - min;
            let half = 0.5 * len * rng.gen_range(0.2..0.5);
            let lo = min + half + 2.0 * h;
            let hi = max - half - 2.0 * h;
            (rng.gen_range(lo..hi), half)
        };
        let (cu, hu) = axis(grid.u_min, grid.u_max, grid.h_u());
        let (cv, hv) = axis(grid.v_min, grid.v_max, grid.h_v());
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        Self::single(Bump { center: [cu, cv], half_width: [hu, hv], direction: [angle.cos(), angle.sin()] })
    }

    /// `n` random single-bump regions from a ChaCha stream seeded with `seed`.
    pub fn ensemble(grid: &ChartGrid, seed: u64, n: usize) -> Vec<Self> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| Self::random(grid, &mut rng)).collect()
    }

    pub fn eval(&self, u: f64, v: f64) -> (Vec2, Mat2) {
        self.bumps.iter().fold((Vec2::zeros(), Mat2::zeros()), |(a, b), bump| {
            let (x, y) = bump.eval(u, v);
            (a + x, b + y)
        })
    }

    /// Nodes covering the support.
    pub fn support(&self, grid: &ChartGrid) -> NodeRect {
        let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for b in &self.bumps {
            u0 = u0.min(b.center[0] - b.half_width[0]);
            u1 = u1.max(b.center[0] + b.half_width[0]);
            v0 = v0.min(b.center[1] - b.half_width[1]);
            v1 = v1.max(b.center[1] + b.half_width[1]);
        }
        if self.bumps.is_empty() {
            return NodeRect { i0: 0, i1: 0, j0: 0, j1: 0 };
        }
        NodeRect::covering(grid, u0, u1, v0, v1)
    }
}

/// `(E(F + tV) − E(F − tV)) / 2t` over the support of `V`.
pub fn first_variation(m: &MapBetweenCharts, p: &PerturbationRegion, t: f64) -> Result<f64> {
    if p.bumps.is_empty() {
        return Ok(0.0);
    }
    let omega = p.support(m.grid());
    let grid = *m.grid();
    let shifted = |sign: f64| {
        energy_of(m, &omega, |k| {
            let (u, v) = grid.coords(k);
            let (dv, ddv) = p.eval(u, v);
            Ok((m.values.values()[k] + dv * (sign * t), m.jacobian.values()[k] + ddv * (sign * t)))
        })
    };
    Ok((shifted(1.0)? - shifted(-1.0)?) / (2.0 * t))
}

/// First variation at `t` and `t/2` with their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationProbe {
    pub at_t: f64,
    pub at_half_t: f64,
    pub richardson_ratio: f64,
}

pub fn first_variation_probe(m: &MapBetweenCharts, p: &PerturbationRegion, t: f64) -> Result<VariationProbe> {
    let at_t = first_variation(m, p, t)?;
    let at_half_t = first_variation(m, p, 0.5 * t)?;
    Ok(VariationProbe { at_t, at_half_t, richardson_ratio: at_t / at_half_t })
}

/// Largest `|K_{g(B·,B·)} − K_g / det B|` over interior nodes.
pub fn curvature_ratio_check(g: &MetricField, b: &TensorField, order: StencilOrder) -> Result<f64> {
    let q = g.try_zip_with(b, |node, gm, bm| {
        let det = bm.determinant();
        if det.abs() < 1e-14 {
            return Err(GeometryError::Degenerate { node, det });
        }
        let q = bm.transpose() * gm * bm;
        Ok(0.5 * (q + q.transpose()))
    })?;
    let q = MetricField::new(q)?;
    let kq = gauss_curvature(&q, order)?;
    let kg = gauss_curvature(g, order)?;
    let r: Vec<f64> =
        (0..g.grid().len()).map(|k| kq.values()[k] - kg.values()[k] / b.values()[k].determinant()).collect();
    Ok(Field::from_values(*g.grid(), r)?.max_abs_interior(INTERIOR_MARGIN))
}
