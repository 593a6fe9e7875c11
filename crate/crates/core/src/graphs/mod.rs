//! Entire spacelike graphs `σ(x) = (x, f(x))` in Minkowski 3-space.

mod conjugate;
mod sampled;

pub use conjugate::{conjugate_construct, ConjugateGraph, Potential, CONJUGATE_TABLE_RESOLUTION};
pub use sampled::SampledGraph;

use std::sync::Arc;

use serde::Serialize;

use crate::chart::{ChartGrid, Field, Mat2, MetricField, ScalarField, TensorField, Vec2, INTERIOR_MARGIN};
use crate::error::{GeometryError, Result};
use crate::lorentz::{HyperboloidPoint, MinkVector};

/// Default `ε_L`.
pub const LIPSCHITZ_MARGIN: f64 = 1e-6;

/// Value, gradient and Hessian of `f` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vec2,
    pub hessian: Mat2,
}

impl Jet {
    fn negated(self) -> Self {
        Self { value: -self.value, gradient: -self.gradient, hessian: -self.hessian }
    }
}

/// Closed-form families with exact derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ClosedForm {
    /// `√(r² + |x|²)`, curvature `−1/r²`.
    Hyperboloid { radius: f64 },
    /// `√(1 + |x|²) + a·exp(−|x|²/2)`.
    HyperboloidBump { amplitude: f64 },
    /// `a·x + c`.
    Affine { slope: [f64; 2], offset: f64 },
}

impl ClosedForm {
    pub fn hyperboloid() -> Self {
        Self::Hyperboloid { radius: 1.0 }
    }

    pub fn jet(&self, x: Vec2) -> Jet {
        match *self {
            Self::Hyperboloid { radius } => hyperboloid_jet(radius, x),
            Self::HyperboloidBump { amplitude } => {
                let base = hyperboloid_jet(1.0, x);
                let e = amplitude * (-0.5 * x.norm_squared()).exp();
                Jet {
                    value: base.value + e,
                    gradient: base.gradient - x * e,
                    hessian: base.hessian + (x * x.transpose() - Mat2::identity()) * e,
                }
            }
            Self::Affine { slope, offset } => {
                let a = Vec2::new(slope[0], slope[1]);
                Jet { value: a.dot(&x) + offset, gradient: a, hessian: Mat2::zeros() }
            }
        }
    }
}

fn hyperboloid_jet(r: f64, x: Vec2) -> Jet {
    let s2 = r * r + x.norm_squared();
    let s = s2.sqrt();
    Jet { value: s, gradient: x / s, hessian: (Mat2::identity() * s2 - x * x.transpose()) / (s2 * s) }
}

#[derive(Debug, Clone)]
pub enum GraphSource {
    ClosedForm(ClosedForm),
    Conjugate(Arc<ConjugateGraph>),
    Sampled(Arc<SampledGraph>),
}

/// The function `f` of an entire graph, with the spacelike margin `ε_L`.
#[derive(Debug, Clone)]
pub struct SpacelikeGraph {
    source: GraphSource,
    lipschitz_margin: f64,
    reflected: bool,
}

impl SpacelikeGraph {
    pub fn new(source: GraphSource) -> Self {
        Self { source, lipschitz_margin: LIPSCHITZ_MARGIN, reflected: false }
    }

    pub fn closed_form(c: ClosedForm) -> Self {
        Self::new(GraphSource::ClosedForm(c))
    }

    pub fn hyperboloid() -> Self {
        Self::closed_form(ClosedForm::hyperboloid())
    }

    pub fn with_margin(mut self, eps: f64) -> Self {
        self.lipschitz_margin = eps;
        self
    }

    pub fn source(&self) -> &GraphSource {
        &self.source
    }

    pub fn lipschitz_margin(&self) -> f64 {
        self.lipschitz_margin
    }

    /// Whether `f` was replaced by `−f` to make the graph convex-up.
    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    pub fn has_exact_derivatives(&self) -> bool {
        !matches!(self.source, GraphSource::Sampled(_))
    }

    /// Jet of `f` without the spacelike check.
    pub fn jet(&self, x: Vec2) -> Result<Jet> {
        let jet = match &self.source {
            GraphSource::ClosedForm(c) => c.jet(x),
            GraphSource::Conjugate(c) => c.jet(x)?,
            GraphSource::Sampled(s) => s.jet(x)?,
        };
        Ok(if self.reflected { jet.negated() } else { jet })
    }

    /// Jet of `f`, failing where `|Df| > 1 − ε_L`.
    pub fn spacelike_jet(&self, x: Vec2) -> Result<Jet> {
        let jet = self.jet(x)?;
        let grad_norm = jet.gradient.norm();
        if !(grad_norm <= 1.0 - self.lipschitz_margin) {
            return Err(GeometryError::NotSpacelike { x1: x[0], x2: x[1], grad_norm });
        }
        Ok(jet)
    }

    pub fn value(&self, x: Vec2) -> Result<f64> {
        Ok(self.jet(x)?.value)
    }

    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        Ok(self.jet(x)?.gradient)
    }

    pub fn jets(&self, chart: &ChartGrid) -> Result<Field<Jet>> {
        Field::par_try_from_fn(*chart, |u, v| self.jet(Vec2::new(u, v)))
    }

    pub fn spacelike_jets(&self, chart: &ChartGrid) -> Result<Field<Jet>> {
        Field::par_try_from_fn(*chart, |u, v| self.spacelike_jet(Vec2::new(u, v)))
    }

    /// Replaces `f` by `−f` when the Hessian trace over the chart is negative on
    /// average, so that convex-up is the working orientation.
    pub fn orient_convex_up(mut self, chart: &ChartGrid) -> Result<Self> {
        let jets = self.jets(chart)?;
        let trace: f64 = jets.values().iter().map(|j| j.hessian.trace()).sum();
        if trace < 0.0 {
            self.reflected = !self.reflected;
        }
        Ok(self)
    }
}

/// `g = I − Df Dfᵀ`.
pub fn metric_from_gradient(p: Vec2) -> Mat2 {
    Mat2::identity() - p * p.transpose()
}

/// `B = g⁻¹ II` with `II = Hess f / √(1 − |Df|²)`.
pub fn shape_operator_from_jet(jet: &Jet) -> Mat2 {
    let p = jet.gradient;
    let w = (1.0 - p.norm_squared()).sqrt();
    // (I − ppᵀ)⁻¹ = I + ppᵀ/(1 − |p|²)
    let g_inv = Mat2::identity() + p * p.transpose() / (w * w);
    g_inv * jet.hessian / w
}

pub fn first_fundamental_form(s: &SpacelikeGraph, chart: &ChartGrid) -> Result<MetricField> {
    let jets = s.spacelike_jets(chart)?;
    MetricField::new(jets.map(|j| metric_from_gradient(j.gradient)))
}

/// Future unit normal `(Df, 1)/√(1 − |Df|²)`.
pub fn gauss_map(s: &SpacelikeGraph, x: Vec2) -> Result<HyperboloidPoint> {
    let p = s.spacelike_jet(x)?.gradient;
    normal_from_gradient(p)
}

pub fn normal_from_gradient(p: Vec2) -> Result<HyperboloidPoint> {
    let w = (1.0 - p.norm_squared()).sqrt();
    HyperboloidPoint::new(MinkVector::new(p[0] / w, p[1] / w, 1.0 / w))
}

pub fn shape_operator(s: &SpacelikeGraph, chart: &ChartGrid) -> Result<TensorField> {
    let jets = s.spacelike_jets(chart)?;
    shape_operator_from_jets(&jets)
}

pub fn shape_operator_from_jets(jets: &Field<Jet>) -> Result<TensorField> {
    let b = jets.map(shape_operator_from_jet);
    for (k, (j, bm)) in jets.values().iter().zip(b.values()).enumerate() {
        let gb = metric_from_gradient(j.gradient) * bm;
        let defect = (gb[(0, 1)] - gb[(1, 0)]).abs() / (1.0 + gb.amax());
        if defect > crate::chart::TOL_SYM {
            return Err(GeometryError::NotSelfAdjoint { node: k, defect });
        }
    }
    Ok(b)
}

/// `K_g = −det B`.
pub fn curvature_via_gauss_equation(s: &SpacelikeGraph, chart: &ChartGrid) -> Result<ScalarField> {
    Ok(shape_operator(s, chart)?.map(|b| -b.determinant()))
}

/// Estimated range of `K_g` over a chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureBounds {
    pub k_inf: f64,
    pub k_sup: f64,
}

impl CurvatureBounds {
    /// `−c₁ ≤ K ≤ −c₂` with `c₂ > 0`.
    pub fn pinched_negative(&self) -> bool {
        self.k_sup < -1e-9
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpacelikeReport {
    pub spacelike: bool,
    pub max_gradient_norm: f64,
    pub convex: bool,
    pub min_hessian_eigenvalue: f64,
    pub curvature_bounds: Option<CurvatureBounds>,
    pub pinched_negative: bool,
    pub pinching_scope: &'static str,
    pub reflected: bool,
    pub messages: Vec<String>,
    pub pass: bool,
}

/// Report-only audit of the spacelike and convexity hypotheses over a chart.
pub fn entire_spacelike_check(s: &SpacelikeGraph, chart: &ChartGrid) -> SpacelikeReport {
    let mut messages = vec![];
    let jets = match s.jets(chart) {
        Ok(j) => j,
        Err(e) => {
            return SpacelikeReport {
                spacelike: false,
                max_gradient_norm: f64::NAN,
                convex: false,
                min_hessian_eigenvalue: f64::NAN,
                curvature_bounds: None,
                pinched_negative: false,
                pinching_scope: "on chart only",
                reflected: s.is_reflected(),
                messages: vec![format!("evaluation failed: {e}")],
                pass: false,
            }
        }
    };
    let max_gradient_norm = jets.values().iter().map(|j| j.gradient.norm()).fold(0.0, f64::max);
    let spacelike = max_gradient_norm <= 1.0 - s.lipschitz_margin;
    if !spacelike {
        messages.push(format!("not spacelike: max |Df| = {max_gradient_norm} exceeds 1 - {}", s.lipschitz_margin));
    }
    let min_hessian_eigenvalue =
        jets.values().iter().map(|j| j.hessian.symmetric_eigenvalues().min()).fold(f64::INFINITY, f64::min);
    let convex = min_hessian_eigenvalue > 0.0;
    if !convex {
        messages.push(format!("not strictly convex: min Hessian eigenvalue {min_hessian_eigenvalue:e}"));
    }
    let curvature_bounds = if spacelike {
        shape_operator_from_jets(&jets).ok().map(|b| {
            let k = b.map(|m| -m.determinant());
            let (k_inf, k_sup) = k.min_max_interior(0);
            CurvatureBounds { k_inf, k_sup }
        })
    } else {
        None
    };
    let pinched_negative = curvature_bounds.is_some_and(|b| b.pinched_negative());
    if !pinched_negative {
        messages.push("curvature not pinched negative".into());
    }
    SpacelikeReport {
        spacelike,
        max_gradient_norm,
        convex,
        min_hessian_eigenvalue,
        curvature_bounds,
        pinched_negative,
        pinching_scope: "on chart only",
        reflected: s.is_reflected(),
        messages,
        pass: spacelike && convex,
    }
}

/// Largest `|K_g + det B|` over interior nodes, with `K_g` from finite differences
/// of the first fundamental form.
pub fn gauss_equation_residual(
    s: &SpacelikeGraph,
    chart: &ChartGrid,
    order: crate::chart::StencilOrder,
) -> Result<f64> {
    let jets = s.spacelike_jets(chart)?;
    let g = MetricField::new(jets.map(|j| metric_from_gradient(j.gradient)))?;
    let k = crate::chart::gauss_curvature(&g, order)?;
    let b = shape_operator_from_jets(&jets)?;
    let r = k.zip_with(&b, |k, b| k + b.determinant())?;
    Ok(r.max_abs_interior(INTERIOR_MARGIN))
}
