use nalgebra::Matrix3;

use super::{
    fd_derivative, fd_second, same_grid, Direction, Field, Mat2, MetricField, ScalarField, StencilOrder, TensorField,
    Vec2, VectorField,
};
use crate::error::{GeometryError, Result};

/// Tolerance on `g`-self-adjointness of shape-operator candidates.
pub const TOL_SYM: f64 = 1e-9;
/// Relative tolerance on `g(B·,B·) = q` after taking the positive root.
pub const TOL_ROOT: f64 = 1e-9;

/// Christoffel symbols `Γᵏᵢⱼ` at one point, indexed `[k][i][j]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Christoffel(pub [[[f64; 2]; 2]; 2]);

impl Christoffel {
    /// Levi-Civita symbols from the metric and its first derivatives `dg[l] = ∂_l g`.
    pub fn from_metric(g: &Mat2, dg: [&Mat2; 2]) -> Option<Self> {
        let inv = g.try_inverse()?;
        let mut out = [[[0.0; 2]; 2]; 2];
        for (k, out_k) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    out_k[i][j] = 0.5
                        * (0..2).map(|l| inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])).sum::<f64>();
                }
            }
        }
        Some(Self(out))
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.0[k][i][j]
    }

    /// `Γ(i)` as a matrix acting on components: `(Γ(i) w)ᵏ = Γᵏᵢₗ wˡ`.
    pub fn contracted(&self, i: usize) -> Mat2 {
        Mat2::new(self.0[0][i][0], self.0[0][i][1], self.0[1][i][0], self.0[1][i][1])
    }
}

pub type ChristoffelField = Field<Christoffel>;

/// Levi-Civita connection of `g` from finite differences of its components.
pub fn christoffel(g: &MetricField, order: StencilOrder) -> Result<ChristoffelField> {
    let gu = fd_derivative(g.field(), Direction::U, order)?;
    let gv = fd_derivative(g.field(), Direction::V, order)?;
    let values = (0..g.grid().len())
        .map(|k| {
            Christoffel::from_metric(&g.values()[k], [&gu.values()[k], &gv.values()[k]])
                .ok_or(GeometryError::NotPositiveDefinite { node: k })
        })
        .collect::<Result<Vec<_>>>()?;
    Field::from_values(*g.grid(), values)
}

/// Gaussian curvature of `g` by the Brioschi formula.
pub fn gauss_curvature(g: &MetricField, order: StencilOrder) -> Result<ScalarField> {
    use Direction::{U, V};
    let f = g.field();
    let du = fd_derivative(f, U, order)?;
    let dv = fd_derivative(f, V, order)?;
    let duu = fd_second(f, U, U, order)?;
    let dvv = fd_second(f, V, V, order)?;
    let duv = fd_second(f, U, V, order)?;
    let values = (0..g.grid().len())
        .map(|k| {
            let m = &f.values()[k];
            let (e, ff, gg) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
            let (e_u, f_u, g_u) = (du.values()[k][(0, 0)], du.values()[k][(0, 1)], du.values()[k][(1, 1)]);
            let (e_v, f_v, g_v) = (dv.values()[k][(0, 0)], dv.values()[k][(0, 1)], dv.values()[k][(1, 1)]);
            let e_vv = dvv.values()[k][(0, 0)];
            let g_uu = duu.values()[k][(1, 1)];
            let f_uv = duv.values()[k][(0, 1)];
            let det = e * gg - ff * ff;
            if !(det > 0.0) {
                return Err(GeometryError::NotPositiveDefinite { node: k });
            }
            let m1 = Matrix3::new(
                -0.5 * e_vv + f_uv - 0.5 * g_uu,
                0.5 * e_u,
                f_u - 0.5 * e_v,
                f_v - 0.5 * g_u,
                e,
                ff,
                0.5 * g_v,
                ff,
                gg,
            );
            let m2 = Matrix3::new(0.0, 0.5 * e_v, 0.5 * g_u, 0.5 * e_v, e, ff, 0.5 * g_u, ff, gg);
            Ok((m1.determinant() - m2.determinant()) / (det * det))
        })
        .collect::<Result<Vec<_>>>()?;
    Field::from_values(*g.grid(), values)
}

fn self_adjoint_defect(g: &Mat2, b: &Mat2) -> f64 {
    let gb = g * b;
    (gb[(0, 1)] - gb[(1, 0)]).abs() / (1.0 + gb.amax())
}

/// Pointwise `g`-norm of `d^∇B(∂_u, ∂_v) = ∇_u(B∂_v) − ∇_v(B∂_u)`.
///
/// Coordinate fields commute, so the bracket term of the exterior derivative is
/// absent.
pub fn codazzi_residual(g: &MetricField, b: &TensorField, order: StencilOrder) -> Result<ScalarField> {
    same_grid(g.grid(), b.grid())?;
    for (k, (gm, bm)) in g.values().iter().zip(b.values()).enumerate() {
        let defect = self_adjoint_defect(gm, bm);
        if defect > TOL_SYM {
            return Err(GeometryError::NotSelfAdjoint { node: k, defect });
        }
    }
    let gamma = christoffel(g, order)?;
    let bu = fd_derivative(b, Direction::U, order)?;
    let bv = fd_derivative(b, Direction::V, order)?;
    let values = (0..g.grid().len())
        .map(|k| {
            let bm = &b.values()[k];
            let gam = &gamma.values()[k];
            let b_col_u = bm.column(0).into_owned();
            let b_col_v = bm.column(1).into_owned();
            let w: Vec2 = bu.values()[k].column(1) - bv.values()[k].column(0) + gam.contracted(0) * b_col_v
                - gam.contracted(1) * b_col_u;
            (w.transpose() * g.values()[k] * w)[(0, 0)].max(0.0).sqrt()
        })
        .collect();
    Field::from_values(*g.grid(), values)
}

/// The unique `g`-self-adjoint positive-definite `B` with `g(B·,B·) = q` at one node.
///
/// With `g = LLᵀ`, the symmetric matrix `C = LᵀBL⁻ᵀ` satisfies `C² = L⁻¹qL⁻ᵀ`, so `C`
/// is the principal root of that SPD matrix and `B = L⁻ᵀCLᵀ`.
pub fn sym_positive_root_at(g: &Mat2, q: &Mat2) -> Option<Mat2> {
    let l = g.cholesky()?.l();
    let l_inv = l.try_inverse()?;
    let m = l_inv * q * l_inv.transpose();
    let m = 0.5 * (m + m.transpose());
    let (det, tr) = (m.determinant(), m.trace());
    if !(det > 0.0 && tr > 0.0) {
        return None;
    }
    let sd = det.sqrt();
    let root = (m + Mat2::identity() * sd) / (tr + 2.0 * sd).sqrt();
    Some(l_inv.transpose() * root * l.transpose())
}

/// [`sym_positive_root_at`] at every node, verified against `q`.
pub fn sym_positive_root(g: &MetricField, q: &MetricField) -> Result<TensorField> {
    same_grid(g.grid(), q.grid())?;
    g.try_zip_with(q.field(), |k, gm, qm| {
        let b = sym_positive_root_at(gm, qm).ok_or(GeometryError::NotPositiveDefinite { node: k })?;
        let residual = (b.transpose() * gm * b - qm).amax() / qm.amax();
        if residual > TOL_ROOT {
            return Err(GeometryError::NotPositiveDefinite { node: k });
        }
        Ok(b)
    })
}

/// A Riemannian metric on a target chart, evaluated pointwise.
pub trait TargetMetric: Sync {
    fn metric_at(&self, y: Vec2) -> Result<Mat2>;
}

/// `λ · δ_ij`.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanMetric(pub f64);

impl TargetMetric for EuclideanMetric {
    fn metric_at(&self, _: Vec2) -> Result<Mat2> {
        Ok(Mat2::identity() * self.0)
    }
}

/// The hyperbolic metric of the Klein disc,
/// `h = I/(1−|y|²) + yyᵀ/(1−|y|²)²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct KleinMetric;

impl TargetMetric for KleinMetric {
    fn metric_at(&self, y: Vec2) -> Result<Mat2> {
        let w = 1.0 - y.norm_squared();
        if !(w > 0.0) {
            return Err(GeometryError::OutsideDisc { y1: y[0], y2: y[1] });
        }
        Ok(Mat2::identity() / w + y * y.transpose() / (w * w))
    }
}

/// Jacobian `J[(a, i)] = ∂Fᵃ/∂uⁱ` of a sampled map by finite differences.
pub fn map_jacobian(values: &VectorField, order: StencilOrder) -> Result<TensorField> {
    let du = fd_derivative(values, Direction::U, order)?;
    let dv = fd_derivative(values, Direction::V, order)?;
    du.zip_with(&dv, |a, b| Mat2::from_columns(&[*a, *b]))
}

/// `(F*h)_ij = h(∂_iF, ∂_jF)`, given the map's values and Jacobian on the source grid.
pub fn pullback_metric(values: &VectorField, jacobian: &TensorField, h: &dyn TargetMetric) -> Result<MetricField> {
    let q = values.try_zip_with(jacobian, |_, y, j| {
        let hm = h.metric_at(*y)?;
        let q = j.transpose() * hm * j;
        Ok(0.5 * (q + q.transpose()))
    })?;
    MetricField::new(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartGrid;
    use proptest::prelude::*;

    fn interior_max(f: &ScalarField) -> f64 {
        f.max_abs_interior(crate::chart::INTERIOR_MARGIN)
    }

    #[test]
    fn flat_metric_has_no_connection() {
        let grid = ChartGrid::square(1.0, 11).unwrap();
        let g = MetricField::from_fn(grid, |_, _| Mat2::identity()).unwrap();
        let gam = christoffel(&g, StencilOrder::Second).unwrap();
        assert!(gam.values().iter().all(|c| c.0.iter().flatten().flatten().all(|x| x.abs() < 1e-14)));
        assert!(interior_max(&gauss_curvature(&g, StencilOrder::Second).unwrap()) < 1e-12);
    }

    #[test]
    fn conformal_exponential_metric() {
        // g = e^{2u} I: Γ¹₁₁ = 1, Γ¹₂₂ = −1, Γ²₁₂ = Γ²₂₁ = 1, others 0
        let expected = |k: usize, i: usize, j: usize| match (k, i, j) {
            (0, 0, 0) => 1.0,
            (0, 1, 1) => -1.0,
            (1, 0, 1) | (1, 1, 0) => 1.0,
            _ => 0.0,
        };
        let mut errs = vec![];
        for h in [0.05, 0.025] {
            let grid = ChartGrid::square_with_spacing(0.5, h).unwrap();
            let g = MetricField::from_fn(grid, |u, _| Mat2::identity() * (2.0 * u).exp()).unwrap();
            let gam = christoffel(&g, StencilOrder::Second).unwrap();
            let mut e: f64 = 0.0;
            for (n, c) in gam.values().iter().enumerate() {
                if grid.is_interior(n, 2) {
                    for k in 0..2 {
                        for i in 0..2 {
                            for j in 0..2 {
                                assert_eq!(c.get(k, i, j), c.get(k, j, i));
                                e = e.max((c.get(k, i, j) - expected(k, i, j)).abs());
                            }
                        }
                    }
                }
            }
            errs.push(e);
        }
        assert!(errs[0] < 5e-3, "{errs:?}");
        assert!(crate::chart::observed_order(errs[0], errs[1]) > 1.8);
    }

    #[test]
    fn graph_metric_connection_vanishes_at_critical_point() {
        let grid = ChartGrid::square_with_spacing(1.0, 0.05).unwrap();
        let g = MetricField::from_fn(grid, |u, v| {
            let s = (1.0 + u * u + v * v).sqrt();
            let p = Vec2::new(u / s, v / s);
            Mat2::identity() - p * p.transpose()
        })
        .unwrap();
        let gam = christoffel(&g, StencilOrder::Second).unwrap();
        let c = gam.values()[grid.center_node()];
        assert!(c.0.iter().flatten().flatten().all(|x| x.abs() < 1e-3));
    }

    #[test]
    fn round_sphere_has_curvature_one() {
        // spherical coordinates (u = polar angle, v = azimuth) away from the poles
        let mut errs = vec![];
        for n in [81, 161] {
            let grid = ChartGrid::new(0.6, 2.4, 0.0, 1.5, n, n).unwrap();
            let g = MetricField::from_fn(grid, |u, _| Mat2::new(1.0, 0.0, 0.0, u.sin().powi(2))).unwrap();
            let k = gauss_curvature(&g, StencilOrder::Second).unwrap();
            errs.push(
                k.values()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| grid.is_interior(*i, 2))
                    .map(|(_, x)| (x - 1.0).abs())
                    .fold(0.0, f64::max),
            );
        }
        assert!(errs[0] < 1e-2, "{errs:?}");
        assert!(crate::chart::observed_order(errs[0], errs[1]) > 1.8, "{errs:?}");
    }

    #[test]
    fn identity_tensor_is_codazzi_for_any_metric() {
        let grid = ChartGrid::square_with_spacing(1.0, 0.05).unwrap();
        let g = MetricField::from_fn(grid, |u, v| Mat2::new(2.0 + u.sin(), 0.3 * v, 0.3 * v, 1.5 + u * v)).unwrap();
        let b = Field::from_fn(grid, |_, _| Mat2::identity());
        assert!(interior_max(&codazzi_residual(&g, &b, StencilOrder::Second).unwrap()) < 1e-12);
    }

    #[test]
    fn non_codazzi_tensor_is_detected() {
        let grid = ChartGrid::square_with_spacing(1.0, 0.05).unwrap();
        let g = MetricField::from_fn(grid, |_, _| Mat2::identity()).unwrap();
        let b = Field::from_fn(grid, |u, _| Mat2::new(1.0, 0.0, 0.0, 1.0 + u));
        let r = codazzi_residual(&g, &b, StencilOrder::Second).unwrap();
        assert!(r.values().iter().all(|x| (x - 1.0).abs() < 1e-9));
    }

    #[test]
    fn codazzi_requires_self_adjoint_input() {
        let grid = ChartGrid::square(1.0, 9).unwrap();
        let g = MetricField::from_fn(grid, |_, _| Mat2::identity()).unwrap();
        let b = Field::from_fn(grid, |_, _| Mat2::new(1.0, 0.5, 0.0, 1.0));
        assert!(matches!(codazzi_residual(&g, &b, StencilOrder::Second), Err(GeometryError::NotSelfAdjoint { .. })));
    }

    #[test]
    fn positive_root_examples() {
        let id = Mat2::identity();
        let b = sym_positive_root_at(&id, &id).unwrap();
        assert!((b - id).amax() < 1e-15);
        let b = sym_positive_root_at(&id, &Mat2::new(4.0, 0.0, 0.0, 9.0)).unwrap();
        assert!((b - Mat2::new(2.0, 0.0, 0.0, 3.0)).amax() < 1e-14);
        let g = Mat2::new(2.0, 0.3, 0.3, 0.7);
        assert!((sym_positive_root_at(&g, &g).unwrap() - id).amax() < 1e-14);
        assert!(sym_positive_root_at(&id, &Mat2::new(1.0, 0.0, 0.0, -1.0)).is_none());
    }

    #[test]
    fn curvature_and_connection_scaling() {
        let grid = ChartGrid::square_with_spacing(0.8, 0.05).unwrap();
        let g = MetricField::from_fn(grid, |u, v| {
            Mat2::new(1.0 + 0.3 * u * u, 0.1 * u * v, 0.1 * u * v, 1.0 + 0.2 * v.sin().powi(2))
        })
        .unwrap();
        let lambda = 3.7;
        let gl = g.scaled(lambda).unwrap();
        let k = gauss_curvature(&g, StencilOrder::Second).unwrap();
        let kl = gauss_curvature(&gl, StencilOrder::Second).unwrap();
        for (a, b) in k.values().iter().zip(kl.values()) {
            assert!((a / lambda - b).abs() < 1e-10 * (1.0 + a.abs()));
        }
        let c = christoffel(&g, StencilOrder::Second).unwrap();
        let cl = christoffel(&gl, StencilOrder::Second).unwrap();
        for (a, b) in c.values().iter().zip(cl.values()) {
            for (x, y) in a.0.iter().flatten().flatten().zip(b.0.iter().flatten().flatten()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pullback_examples() {
        let grid = ChartGrid::square(1.0, 9).unwrap();
        let ident = Field::from_fn(grid, Vec2::new);
        let jac = map_jacobian(&ident, StencilOrder::Second).unwrap();
        let q = pullback_metric(&ident, &jac, &EuclideanMetric(1.5)).unwrap();
        assert!(q.values().iter().all(|m| (m - Mat2::identity() * 1.5).amax() < 1e-12));

        let scaled = Field::from_fn(grid, |u, v| Vec2::new(2.0 * u, 2.0 * v));
        let jac = map_jacobian(&scaled, StencilOrder::Second).unwrap();
        let q = pullback_metric(&scaled, &jac, &EuclideanMetric(1.0)).unwrap();
        assert!(q.values().iter().all(|m| (m - Mat2::identity() * 4.0).amax() < 1e-12));
    }

    #[test]
    fn klein_metric_at_origin_and_radially() {
        let h = KleinMetric.metric_at(Vec2::zeros()).unwrap();
        assert_eq!(h, Mat2::identity());
        // radial length element is dr/(1−r²)
        let r: f64 = 0.6;
        let h = KleinMetric.metric_at(Vec2::new(r, 0.0)).unwrap();
        assert!((h[(0, 0)] - 1.0 / (1.0 - r * r).powi(2)).abs() < 1e-12);
        assert!((h[(1, 1)] - 1.0 / (1.0 - r * r)).abs() < 1e-12);
        assert!(KleinMetric.metric_at(Vec2::new(1.0, 0.0)).is_err());
    }

    fn spd() -> impl Strategy<Value = Mat2> {
        (0.2..3.0f64, 0.2..3.0f64, -1.0..1.0f64).prop_map(|(a, c, t)| {
            let b = t * (a * c).sqrt() * 0.9;
            Mat2::new(a, b, b, c)
        })
    }

    proptest! {
        #[test]
        fn positive_root_reconstructs_q(g in spd(), q in spd()) {
            let b = sym_positive_root_at(&g, &q).unwrap();
            let gb = g * b;
            prop_assert!((gb[(0, 1)] - gb[(1, 0)]).abs() < 1e-12 * (1.0 + gb.amax()));
            prop_assert!((b.transpose() * g * b - q).amax() < 1e-12 * (1.0 + q.amax()));
            // positive definite with respect to g: real positive eigenvalues
            let tr = b.trace();
            let det = b.determinant();
            prop_assert!(tr > 0.0 && det > 0.0 && tr * tr >= 4.0 * det - 1e-12);
        }
    }
}
