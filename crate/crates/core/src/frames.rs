//! Reconstruction of an immersion from its first fundamental form `g` and shape
//! operator `B` by integrating the moving-frame system along grid lines:
//!
//! `∂ᵢσ = eᵢ`, `∂ᵢeⱼ = Γᵏᵢⱼ eₖ + IIᵢⱼ ν`, `∂ᵢν = Bᵏᵢ eₖ`, with `IIᵢⱼ = g_jk Bᵏᵢ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{
    christoffel, codazzi_residual, gauss_curvature, ChartGrid, Christoffel, Field, Mat2, MetricField, StencilOrder,
    TensorField, Vec2, INTERIOR_MARGIN,
};
use crate::error::{GeometryError, Result};
use crate::graphs::{metric_from_gradient, shape_operator_from_jet, SpacelikeGraph};
use crate::harmonic::MapBetweenCharts;
use crate::lorentz::{
    klein_lift, klein_lift_differential, mink_inner, orthonormal_alignment, FrameState, HyperboloidPoint, KleinPoint,
    LorentzIsometry, MinkVector,
};

/// `g`, its Christoffel symbols and `B` at a point.
#[derive(Debug, Clone, Copy)]
pub struct FrameData {
    pub g: Mat2,
    pub gamma: Christoffel,
    pub b: Mat2,
}

/// Coefficients of the frame equations as functions on the chart.
pub trait FrameCoefficients: Sync {
    fn at(&self, u: f64, v: f64) -> Result<FrameData>;
}

/// Closed-form coefficients of a graph with exact derivatives:
/// `Γᵏᵢⱼ = −(g⁻¹Df)ₖ (Hess f)ᵢⱼ`.
pub struct GraphCoefficients<'a>(pub &'a SpacelikeGraph);

impl FrameCoefficients for GraphCoefficients<'_> {
    fn at(&self, u: f64, v: f64) -> Result<FrameData> {
        let jet = self.0.spacelike_jet(Vec2::new(u, v))?;
        let g = metric_from_gradient(jet.gradient);
        let w = g.try_inverse().ok_or(GeometryError::NotPositiveDefinite { node: 0 })? * jet.gradient;
        let h = jet.hessian;
        let gamma =
            Christoffel(std::array::from_fn(|k| std::array::from_fn(|i| std::array::from_fn(|j| -w[k] * h[(i, j)]))));
        Ok(FrameData { g, gamma, b: shape_operator_from_jet(&jet) })
    }
}

/// Coefficients known at the nodes of a chart, with `Γ` from finite differences of
/// `g`; values between nodes by bilinear interpolation.
pub struct TabulatedCoefficients {
    g: MetricField,
    gamma: Field<Christoffel>,
    b: TensorField,
}

impl TabulatedCoefficients {
    pub fn new(g: MetricField, b: TensorField, order: StencilOrder) -> Result<Self> {
        if g.grid() != b.grid() {
            return Err(GeometryError::GridMismatch);
        }
        let gamma = christoffel(&g, order)?;
        Ok(Self { g, gamma, b })
    }
}

impl FrameCoefficients for TabulatedCoefficients {
    fn at(&self, u: f64, v: f64) -> Result<FrameData> {
        let grid = self.g.grid();
        let tol = 1e-9 * (grid.h_u() + grid.h_v());
        if u < grid.u_min - tol || u > grid.u_max + tol || v < grid.v_min - tol || v > grid.v_max + tol {
            return Err(GeometryError::OutsideChart { x1: u, x2: v });
        }
        let su = ((u - grid.u_min) / grid.h_u()).clamp(0.0, (grid.n_u - 1) as f64);
        let sv = ((v - grid.v_min) / grid.h_v()).clamp(0.0, (grid.n_v - 1) as f64);
        let i = (su.floor() as usize).min(grid.n_u - 2);
        let j = (sv.floor() as usize).min(grid.n_v - 2);
        let (a, c) = (su - i as f64, sv - j as f64);
        let mut out = FrameData { g: Mat2::zeros(), gamma: Christoffel::default(), b: Mat2::zeros() };
        for (ii, jj, w) in
            [(i, j, (1.0 - a) * (1.0 - c)), (i + 1, j, a * (1.0 - c)), (i, j + 1, (1.0 - a) * c), (i + 1, j + 1, a * c)]
        {
            if w == 0.0 {
                continue;
            }
            out.g += self.g.at(ii, jj) * w;
            out.b += self.b.at(ii, jj) * w;
            let gm = self.gamma.at(ii, jj);
            for k in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        out.gamma.0[k][p][q] += w * gm.0[k][p][q];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `g` and `B` of some coefficients sampled at the nodes of `chart`.
pub fn tabulate(c: &dyn FrameCoefficients, chart: &ChartGrid) -> Result<(MetricField, TensorField)> {
    let data = Field::par_try_from_fn(*chart, |u, v| c.at(u, v))?;
    Ok((MetricField::new(data.map(|d| d.g))?, data.map(|d| d.b)))
}

/// Largest `|K_g + det B|` and Codazzi residual over interior nodes.
pub fn gauss_codazzi_residuals(g: &MetricField, b: &TensorField, order: StencilOrder) -> Result<(f64, f64)> {
    let k = gauss_curvature(g, order)?;
    let gauss = k.zip_with(b, |k, b| k + b.determinant())?.max_abs_interior(INTERIOR_MARGIN);
    let codazzi = codazzi_residual(g, b, order)?.max_abs_interior(INTERIOR_MARGIN);
    Ok((gauss, codazzi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationOptions {
    /// RK4 steps per grid cell.
    pub substeps: usize,
    pub tol_frame: f64,
    /// Gauss-Codazzi tolerance; `None` skips the precondition.
    pub tol_gc: Option<f64>,
    pub order: StencilOrder,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self { substeps: 1, tol_frame: 1e-4, tol_gc: None, order: StencilOrder::Second }
    }
}

type State = [MinkVector; 4];

fn rhs(dir: usize, d: &FrameData, s: &State) -> State {
    let [_, e1, e2, n] = *s;
    let e = [e1, e2];
    let ii = d.g * d.b;
    let de = |j: usize| d.gamma.0[0][dir][j] * e1 + d.gamma.0[1][dir][j] * e2 + ii[(j, dir)] * n;
    [e[dir], de(0), de(1), d.b[(0, dir)] * e1 + d.b[(1, dir)] * e2]
}

fn axpy(s: &State, k: &State, h: f64) -> State {
    std::array::from_fn(|i| s[i] + h * k[i])
}

/// Integrates from `(u, v)` along direction `dir` for `cells` cells of `h` (signed).
fn march(
    c: &dyn FrameCoefficients,
    dir: usize,
    start: (f64, f64),
    mut s: State,
    h: f64,
    cells: usize,
    substeps: usize,
) -> Result<Vec<State>> {
    let dt = h / substeps as f64;
    let pos = |t: f64| if dir == 0 { (start.0 + t, start.1) } else { (start.0, start.1 + t) };
    let mut out = Vec::with_capacity(cells);
    for cell in 0..cells {
        for step in 0..substeps {
            let t0 = cell as f64 * h + step as f64 * dt;
            let p0 = pos(t0);
            let pm = pos(t0 + 0.5 * dt);
            let p1 = pos(t0 + dt);
            let (d0, dm, d1) = (c.at(p0.0, p0.1)?, c.at(pm.0, pm.1)?, c.at(p1.0, p1.1)?);
            let k1 = rhs(dir, &d0, &s);
            let k2 = rhs(dir, &dm, &axpy(&s, &k1, 0.5 * dt));
            let k3 = rhs(dir, &dm, &axpy(&s, &k2, 0.5 * dt));
            let k4 = rhs(dir, &d1, &axpy(&s, &k3, dt));
            s = std::array::from_fn(|i| s[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        out.push(s);
    }
    Ok(out)
}

fn to_state(f: &FrameState) -> State {
    [f.position, f.e1, f.e2, f.normal]
}

fn to_frame(s: &State) -> FrameState {
    FrameState { position: s[0], e1: s[1], e2: s[2], normal: s[3] }
}

/// Integrates a full line through node `(i, j)` along `dir`, returning states
/// indexed by position on the line.
fn full_line(
    c: &dyn FrameCoefficients,
    grid: &ChartGrid,
    dir: usize,
    (i, j): (usize, usize),
    s: State,
    substeps: usize,
) -> Result<Vec<State>> {
    let (n, pos, h) = if dir == 0 { (grid.n_u, i, grid.h_u()) } else { (grid.n_v, j, grid.h_v()) };
    let start = (grid.u(i), grid.v(j));
    let fwd = march(c, dir, start, s, h, n - 1 - pos, substeps)?;
    let back = march(c, dir, start, s, -h, pos, substeps)?;
    let mut line = Vec::with_capacity(n);
    line.extend(back.into_iter().rev());
    line.push(s);
    line.extend(fwd);
    Ok(line)
}

/// Integrates along the base line in `first`, then along every line in the other
/// direction; frames in node order.
fn sweep(
    c: &dyn FrameCoefficients,
    grid: &ChartGrid,
    base_node: usize,
    base: &FrameState,
    first: usize,
    substeps: usize,
) -> Result<Vec<FrameState>> {
    let (bi, bj) = grid.node(base_node);
    let seed = full_line(c, grid, first, (bi, bj), to_state(base), substeps)?;
    let second = 1 - first;
    let lines: Vec<Vec<State>> = seed
        .par_iter()
        .enumerate()
        .map(|(p, s)| {
            let node = if first == 0 { (p, bj) } else { (bi, p) };
            full_line(c, grid, second, node, *s, substeps)
        })
        .collect::<Result<_>>()?;
    let mut frames = vec![to_frame(&seed[0]); grid.len()];
    for (p, line) in lines.iter().enumerate() {
        for (q, s) in line.iter().enumerate() {
            let (i, j) = if first == 0 { (p, q) } else { (q, p) };
            frames[grid.index(i, j)] = to_frame(s);
        }
    }
    Ok(frames)
}

/// Default base frame at a node with metric `g`: `eᵢ` the columns of `Lᵀ` for the
/// Cholesky factor `g = LLᵀ`, lying in the horizontal plane, and `ν = (0,0,1)`.
pub fn default_base_frame(g: &Mat2) -> Result<FrameState> {
    let l = g.cholesky().ok_or(GeometryError::NotPositiveDefinite { node: 0 })?.l();
    let lt = l.transpose();
    Ok(FrameState {
        position: MinkVector::new(0.0, 0.0, 0.0),
        e1: MinkVector::new(lt[(0, 0)], lt[(1, 0)], 0.0),
        e2: MinkVector::new(lt[(0, 1)], lt[(1, 1)], 0.0),
        normal: MinkVector::E3,
    })
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub grid: ChartGrid,
    /// Frames from integrating along `u` first, then along `v`.
    pub frames: Vec<FrameState>,
    pub g: MetricField,
    pub b: TensorField,
    pub holonomy_residual: f64,
    /// Largest Gram defect divided by `1 + path length`.
    pub max_gram_drift: f64,
    pub gauss_residual: Option<f64>,
    pub isometry: Option<LorentzIsometry>,
}

impl ReconstructionResult {
    pub fn positions(&self) -> Vec<MinkVector> {
        self.frames.iter().map(|f| f.position).collect()
    }
}

fn check_precondition(g: &MetricField, b: &TensorField, opts: &IntegrationOptions) -> Result<()> {
    if let Some(tol) = opts.tol_gc {
        let (gauss, codazzi) = gauss_codazzi_residuals(g, b, opts.order)?;
        if gauss > tol || codazzi > tol {
            return Err(GeometryError::GaussCodazzi { gauss, codazzi, tolerance: tol });
        }
    }
    Ok(())
}

fn both_orders(
    c: &dyn FrameCoefficients,
    chart: &ChartGrid,
    base_node: usize,
    base: &FrameState,
    substeps: usize,
) -> Result<(Vec<FrameState>, f64)> {
    let uv = sweep(c, chart, base_node, base, 0, substeps)?;
    let vu = sweep(c, chart, base_node, base, 1, substeps)?;
    let holonomy = uv.iter().zip(&vu).map(|(a, b)| (a.position - b.position).euclidean_norm()).fold(0.0, f64::max);
    Ok((uv, holonomy))
}

/// Integrates the frame system from `base` at `base_node`.
pub fn integrate_frame(
    c: &dyn FrameCoefficients,
    chart: &ChartGrid,
    base_node: usize,
    base: &FrameState,
    opts: &IntegrationOptions,
) -> Result<ReconstructionResult> {
    let (g, b) = tabulate(c, chart)?;
    check_precondition(&g, &b, opts)?;
    let (frames, holonomy_residual) = both_orders(c, chart, base_node, base, opts.substeps)?;
    let (bi, bj) = chart.node(base_node);
    let mut max_gram_drift: f64 = 0.0;
    for (k, f) in frames.iter().enumerate() {
        let (i, j) = chart.node(k);
        let path = (i.abs_diff(bi) as f64) * chart.h_u() + (j.abs_diff(bj) as f64) * chart.h_v();
        let gm = g.values()[k];
        let drift = f.gram_defect(gm[(0, 0)], gm[(0, 1)], gm[(1, 1)]);
        if drift > 100.0 * opts.tol_frame * (1.0 + path) {
            return Err(GeometryError::FrameDrift { drift });
        }
        max_gram_drift = max_gram_drift.max(drift / (1.0 + path));
    }
    Ok(ReconstructionResult {
        grid: *chart,
        frames,
        g,
        b,
        holonomy_residual,
        max_gram_drift,
        gauss_residual: None,
        isometry: None,
    })
}

/// Sup-norm difference between `u`-then-`v` and `v`-then-`u` integration of `σ`.
/// Not gated on the Gauss-Codazzi precondition, so it can measure how badly
/// non-integrable data fails.
pub fn holonomy_residual(
    c: &dyn FrameCoefficients,
    chart: &ChartGrid,
    base_node: usize,
    base: &FrameState,
    substeps: usize,
) -> Result<f64> {
    Ok(both_orders(c, chart, base_node, base, substeps)?.1)
}

/// Largest distance between reconstructed positions and the graph `(x, f(x))`,
/// after moving the reconstruction's base frame onto the graph's.
pub fn position_error(r: &ReconstructionResult, base_node: usize, s: &SpacelikeGraph) -> Result<f64> {
    let truth = |k: usize| -> Result<FrameState> {
        let (u, v) = r.grid.coords(k);
        let j = s.spacelike_jet(Vec2::new(u, v))?;
        let n = crate::graphs::normal_from_gradient(j.gradient)?.vector();
        Ok(FrameState {
            position: MinkVector::new(u, v, j.value),
            e1: MinkVector::new(1.0, 0.0, j.gradient[0]),
            e2: MinkVector::new(0.0, 1.0, j.gradient[1]),
            normal: n,
        })
    };
    let tb = truth(base_node)?;
    let rb = r.frames[base_node];
    let a = orthonormal_alignment(&rb, &tb)?;
    let mut err: f64 = 0.0;
    for (k, f) in r.frames.iter().enumerate() {
        let (u, v) = r.grid.coords(k);
        let p = tb.position + a.apply(f.position - rb.position);
        let t = MinkVector::new(u, v, s.value(Vec2::new(u, v))?);
        err = err.max((p - t).euclidean_norm());
    }
    Ok(err)
}

/// Largest difference between the metric induced by the reconstructed positions
/// (finite differences) and `g`, over interior nodes.
pub fn induced_metric_error(r: &ReconstructionResult, order: StencilOrder) -> Result<f64> {
    let comps: Vec<Field<Vec2>> = [0usize, 1, 2]
        .iter()
        .map(|&c| {
            let vals = r.frames.iter().map(|f| [f.position.x1, f.position.x2, f.position.x3][c]).collect();
            let f = Field::from_values(r.grid, vals)?;
            let du = crate::chart::fd_derivative(&f, crate::chart::Direction::U, order)?;
            let dv = crate::chart::fd_derivative(&f, crate::chart::Direction::V, order)?;
            du.zip_with(&dv, |a, b| Vec2::new(*a, *b))
        })
        .collect::<Result<_>>()?;
    let mut err: f64 = 0.0;
    for k in 0..r.grid.len() {
        if !r.grid.is_interior(k, INTERIOR_MARGIN) {
            continue;
        }
        let d = |i: usize| MinkVector::new(comps[0].values()[k][i], comps[1].values()[k][i], comps[2].values()[k][i]);
        let (a, b) = (d(0), d(1));
        let gm = r.g.values()[k];
        err = err
            .max((mink_inner(a, a) - gm[(0, 0)]).abs())
            .max((mink_inner(a, b) - gm[(0, 1)]).abs())
            .max((mink_inner(b, b) - gm[(1, 1)]).abs());
    }
    Ok(err)
}

#[derive(Debug, Clone, Serialize)]
pub struct Alignment {
    pub isometry: LorentzIsometry,
    pub gauss_residual: f64,
    /// Largest distance between the per-node alignment isometries and the base one.
    pub alignment_variation: f64,
    pub pullback_mismatch: f64,
    #[serde(skip)]
    pub aligned_positions: Vec<MinkVector>,
}

/// Frame `(∂₁ν, ∂₂ν, ν)` of the reconstructed Gauss map at node `k`.
fn gauss_frame(r: &ReconstructionResult, k: usize) -> FrameState {
    let f = &r.frames[k];
    let b = r.b.values()[k];
    FrameState {
        position: f.normal,
        e1: b[(0, 0)] * f.e1 + b[(1, 0)] * f.e2,
        e2: b[(0, 1)] * f.e1 + b[(1, 1)] * f.e2,
        normal: f.normal,
    }
}

/// Frame `(∂₁F, ∂₂F, F)` of a map into the hyperboloid given in Klein coordinates.
fn target_frame(t: &MapBetweenCharts, k: usize) -> Result<FrameState> {
    let y = t.values().values()[k];
    let p = klein_lift(KleinPoint::new(y[0], y[1])?)?.vector();
    let dl = klein_lift_differential([y[0], y[1]])?;
    let j = t.jacobian().values()[k];
    let col = |i: usize| j[(0, i)] * dl[0] + j[(1, i)] * dl[1];
    Ok(FrameState { position: p, e1: col(0), e2: col(1), normal: p })
}

fn gram2(f: &FrameState) -> Mat2 {
    Mat2::new(mink_inner(f.e1, f.e1), mink_inner(f.e1, f.e2), mink_inner(f.e2, f.e1), mink_inner(f.e2, f.e2))
}

/// Finds `A` with `F = A ∘ G_σ` at the base node and measures how well it holds on
/// the whole chart.
pub fn align_to_gauss_map(
    r: &mut ReconstructionResult,
    target: &MapBetweenCharts,
    base_node: usize,
    tol_pullback: f64,
) -> Result<Alignment> {
    if target.grid() != &r.grid {
        return Err(GeometryError::GridMismatch);
    }
    let n = r.grid.len();
    let sources: Vec<FrameState> = (0..n).map(|k| gauss_frame(r, k)).collect();
    let targets: Vec<FrameState> = (0..n).map(|k| target_frame(target, k)).collect::<Result<_>>()?;
    let pullback_mismatch = sources
        .iter()
        .zip(&targets)
        .map(|(s, t)| {
            let (a, b) = (gram2(s), gram2(t));
            (a - b).amax() / (1.0 + b.amax())
        })
        .fold(0.0, f64::max);
    if pullback_mismatch > tol_pullback {
        return Err(GeometryError::PullbackMismatch { mismatch: pullback_mismatch, tolerance: tol_pullback });
    }
    let a = orthonormal_alignment(&sources[base_node], &targets[base_node])?;
    let per_node: Vec<LorentzIsometry> =
        sources.par_iter().zip(&targets).map(|(s, t)| orthonormal_alignment(s, t)).collect::<Result<_>>()?;
    let alignment_variation = per_node.iter().map(|p| p.distance(&a)).fold(0.0, f64::max);
    let mut gauss_residual: f64 = 0.0;
    for (s, t) in sources.iter().zip(&targets) {
        let moved = a.apply_point(HyperboloidPoint::normalize(s.normal)?);
        gauss_residual = gauss_residual.max(moved.distance(HyperboloidPoint::normalize(t.normal)?));
    }
    r.gauss_residual = Some(gauss_residual);
    r.isometry = Some(a);
    Ok(Alignment {
        isometry: a,
        gauss_residual,
        alignment_variation,
        pullback_mismatch,
        aligned_positions: r.frames.iter().map(|f| a.apply(f.position)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::JacobianMode;

    struct Constant(FrameData);

    impl FrameCoefficients for Constant {
        fn at(&self, _: f64, _: f64) -> Result<FrameData> {
            Ok(self.0)
        }
    }

    fn flat() -> Constant {
        Constant(FrameData { g: Mat2::identity(), gamma: Christoffel::default(), b: Mat2::zeros() })
    }

    #[test]
    fn flat_data_gives_the_plane() {
        let chart = ChartGrid::square(1.0, 21).unwrap();
        let base = chart.center_node();
        let r = integrate_frame(
            &flat(),
            &chart,
            base,
            &FrameState::standard(MinkVector::new(0.0, 0.0, 0.0)),
            &IntegrationOptions::default(),
        )
        .unwrap();
        for (k, f) in r.frames.iter().enumerate() {
            let (u, v) = chart.coords(k);
            assert!((f.position - MinkVector::new(u, v, 0.0)).euclidean_norm() < 1e-14);
        }
        assert!(r.holonomy_residual < 1e-14);
    }

    #[test]
    fn hyperboloid_round_trip() {
        let s = SpacelikeGraph::hyperboloid();
        let chart = ChartGrid::square_with_spacing(1.0, 0.01).unwrap();
        let base = chart.center_node();
        let g0 = metric_from_gradient(s.gradient(Vec2::zeros()).unwrap());
        let opts = IntegrationOptions { tol_gc: Some(1e-2), ..Default::default() };
        let mut r =
            integrate_frame(&GraphCoefficients(&s), &chart, base, &default_base_frame(&g0).unwrap(), &opts).unwrap();
        assert!(r.holonomy_residual < 1e-6, "{}", r.holonomy_residual);
        assert!(position_error(&r, base, &s).unwrap() < 1e-6);
        assert!(induced_metric_error(&r, StencilOrder::Second).unwrap() < 1e-3);

        let a0 = LorentzIsometry::boost(0.8, 2.0).compose(&LorentzIsometry::rotation(-0.6));
        let f = MapBetweenCharts::gauss_map_of(&s, &chart, JacobianMode::Exact).unwrap();
        let moved = f.post_isometry(&a0).unwrap();
        let al = align_to_gauss_map(&mut r, &moved, base, 1e-6).unwrap();
        assert!(al.isometry.distance(&a0) < 1e-8, "{}", al.isometry.distance(&a0));
        assert!(al.gauss_residual < 1e-6 && al.alignment_variation < 1e-6);
        let al = align_to_gauss_map(&mut r, &f, base, 1e-6).unwrap();
        assert!(al.isometry.distance(&LorentzIsometry::identity()) < 1e-8);
    }

    #[test]
    fn non_codazzi_data_is_rejected_and_shows_holonomy() {
        struct Corrupt;
        impl FrameCoefficients for Corrupt {
            fn at(&self, u: f64, _: f64) -> Result<FrameData> {
                Ok(FrameData {
                    g: Mat2::identity(),
                    gamma: Christoffel::default(),
                    b: Mat2::new(1.0, 0.0, 0.0, 1.0 + u),
                })
            }
        }
        let chart = ChartGrid::square_with_spacing(1.0, 0.02).unwrap();
        let base = chart.center_node();
        let frame = FrameState::standard(MinkVector::new(0.0, 0.0, 0.0));
        let opts = IntegrationOptions { tol_gc: Some(1e-3), ..Default::default() };
        assert!(matches!(
            integrate_frame(&Corrupt, &chart, base, &frame, &opts),
            Err(GeometryError::GaussCodazzi { .. })
        ));
        let h1 = holonomy_residual(&Corrupt, &chart, base, &frame, 1).unwrap();
        let h2 = holonomy_residual(&Corrupt, &chart.refined(), chart.refined().center_node(), &frame, 1).unwrap();
        assert!(h1 >= 1e-2 && h2 >= 0.9 * h1, "{h1} {h2}");
    }

    #[test]
    fn tabulated_coefficients_converge() {
        let s = SpacelikeGraph::closed_form(crate::graphs::ClosedForm::HyperboloidBump { amplitude: 0.05 });
        let err = |h: f64| {
            let chart = ChartGrid::square_with_spacing(1.0, h).unwrap();
            let (g, b) = tabulate(&GraphCoefficients(&s), &chart).unwrap();
            let c = TabulatedCoefficients::new(g.clone(), b, StencilOrder::Second).unwrap();
            let base = chart.center_node();
            let r = integrate_frame(
                &c,
                &chart,
                base,
                &default_base_frame(&g.values()[base]).unwrap(),
                &IntegrationOptions::default(),
            )
            .unwrap();
            position_error(&r, base, &s).unwrap()
        };
        let (e1, e2) = (err(0.05), err(0.025));
        assert!(crate::chart::observed_order(e1, e2) > 1.8, "{e1} {e2}");
    }
}
