//! Fields sampled on rectangular coordinate charts and finite-difference calculus
//! on them.
//!
//! Values are stored node-major: node `(i, j)` (column `i` along `u`, row `j` along
//! `v`) lives at index `j * n_u + i`. Operations that combine fields require them to
//! share the same [`ChartGrid`]; nothing is ever resampled implicitly.

mod io;
mod tensor;

pub use io::{field_from_csv, field_to_csv, grid_header, CsvComponents};
pub use tensor::{
    christoffel, codazzi_residual, gauss_curvature, map_jacobian, pullback_metric, sym_positive_root,
    sym_positive_root_at, Christoffel, ChristoffelField, EuclideanMetric, KleinMetric, TargetMetric, TOL_ROOT, TOL_SYM,
};

use std::ops::{Add, Deref, Mul, Sub};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};

pub type Mat2 = Matrix2<f64>;
pub type Vec2 = Vector2<f64>;

/// Nodes closer than this many cells to the chart edge are edge nodes; one-sided
/// stencils reach them and the stated accuracy only holds away from them.
pub const INTERIOR_MARGIN: usize = 2;

/// A uniform rectangular sampling of a coordinate chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartGrid {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub n_u: usize,
    pub n_v: usize,
}

impl ChartGrid {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64, n_u: usize, n_v: usize) -> Result<Self> {
        if n_u < 5 || n_v < 5 {
            return Err(GeometryError::InvalidGrid(format!("need at least 5 nodes per axis, got {n_u}x{n_v}")));
        }
        if !(u_max > u_min && v_max > v_min) || ![u_min, u_max, v_min, v_max].iter().all(|x| x.is_finite()) {
            return Err(GeometryError::InvalidGrid("extents must be finite with max > min".into()));
        }
        Ok(Self { u_min, u_max, v_min, v_max, n_u, n_v })
    }

    /// `[−extent, extent]²` with `n` nodes per axis.
    pub fn square(extent: f64, n: usize) -> Result<Self> {
        Self::new(-extent, extent, -extent, extent, n, n)
    }

    /// `[−extent, extent]²` with spacing as close as possible to `h` (odd node count,
    /// so the origin is a node).
    pub fn square_with_spacing(extent: f64, h: f64) -> Result<Self> {
        let cells = (2.0 * extent / h).round().max(4.0) as usize;
        let cells = cells + cells % 2;
        Self::square(extent, cells + 1)
    }

    /// The same chart with every cell split in two.
    pub fn refined(&self) -> Self {
        Self { n_u: 2 * self.n_u - 1, n_v: 2 * self.n_v - 1, ..*self }
    }

    pub fn h_u(&self) -> f64 {
        (self.u_max - self.u_min) / (self.n_u - 1) as f64
    }

    pub fn h_v(&self) -> f64 {
        (self.v_max - self.v_min) / (self.n_v - 1) as f64
    }

    /// The larger of the two spacings.
    pub fn spacing(&self) -> f64 {
        self.h_u().max(self.h_v())
    }

    pub fn len(&self) -> usize {
        self.n_u * self.n_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_u + i
    }

    pub fn node(&self, k: usize) -> (usize, usize) {
        (k % self.n_u, k / self.n_u)
    }

    pub fn u(&self, i: usize) -> f64 {
        if i + 1 == self.n_u {
            self.u_max
        } else {
            self.u_min + i as f64 * self.h_u()
        }
    }

    pub fn v(&self, j: usize) -> f64 {
        if j + 1 == self.n_v {
            self.v_max
        } else {
            self.v_min + j as f64 * self.h_v()
        }
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.node(k);
        (self.u(i), self.v(j))
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u_min && u <= self.u_max && v >= self.v_min && v <= self.v_max
    }

    /// Node at least `margin` cells away from every edge.
    pub fn is_interior(&self, k: usize, margin: usize) -> bool {
        let (i, j) = self.node(k);
        i >= margin && j >= margin && i + margin < self.n_u && j + margin < self.n_v
    }

    /// Node closest to `(u, v)`.
    pub fn nearest_node(&self, u: f64, v: f64) -> usize {
        let i = ((u - self.u_min) / self.h_u()).round().clamp(0.0, (self.n_u - 1) as f64) as usize;
        let j = ((v - self.v_min) / self.h_v()).round().clamp(0.0, (self.n_v - 1) as f64) as usize;
        self.index(i, j)
    }

    /// Node nearest the chart centre.
    pub fn center_node(&self) -> usize {
        self.index(self.n_u / 2, self.n_v / 2)
    }

    /// Indices of the boundary nodes, counter-clockwise starting at `(u_min, v_min)`.
    pub fn boundary_loop(&self) -> Vec<usize> {
        let (nu, nv) = (self.n_u, self.n_v);
        let mut out = Vec::with_capacity(2 * (nu + nv));
        out.extend((0..nu).map(|i| self.index(i, 0)));
        out.extend((1..nv).map(|j| self.index(nu - 1, j)));
        out.extend((0..nu - 1).rev().map(|i| self.index(i, nv - 1)));
        out.extend((1..nv - 1).rev().map(|j| self.index(0, j)));
        out
    }
}

/// Values that can be differenced: closed under addition and real scaling.
pub trait FieldValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl FieldValue for Vec2 {
    fn zero() -> Self {
        Vec2::zeros()
    }
}

impl FieldValue for Mat2 {
    fn zero() -> Self {
        Mat2::zeros()
    }
}

/// Values sampled at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: ChartGrid,
    values: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type VectorField = Field<Vec2>;
/// A (1,1)-tensor `Bⁱⱼ`, stored as the matrix with entry `(i, j)`.
pub type TensorField = Field<Mat2>;

impl<T> Field<T> {
    pub fn from_values(grid: ChartGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GeometryError::InvalidGrid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: ChartGrid, mut f: impl FnMut(f64, f64) -> T) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (u, v) = grid.coords(k);
                f(u, v)
            })
            .collect();
        Self { grid, values }
    }

    pub fn try_from_fn<E>(grid: ChartGrid, mut f: impl FnMut(f64, f64) -> Result<T, E>) -> Result<Self, E> {
        let values = (0..grid.len())
            .map(|k| {
                let (u, v) = grid.coords(k);
                f(u, v)
            })
            .collect::<Result<Vec<_>, E>>()?;
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.values[self.grid.index(i, j)]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Field<U> {
        Field { grid: self.grid, values: self.values.iter().map(f).collect() }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with<U, V>(&self, other: &Field<U>, mut f: impl FnMut(&T, &U) -> V) -> Result<Field<V>> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Field { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect() })
    }

    pub fn try_zip_with<U, V>(
        &self,
        other: &Field<U>,
        mut f: impl FnMut(usize, &T, &U) -> Result<V>,
    ) -> Result<Field<V>> {
        same_grid(&self.grid, &other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(k, (a, b))| f(k, a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Field { grid: self.grid, values })
    }
}

impl<T: Send> Field<T> {
    /// [`Field::try_from_fn`] evaluated over the nodes in parallel.
    pub fn par_try_from_fn(grid: ChartGrid, f: impl Fn(f64, f64) -> Result<T> + Sync) -> Result<Self> {
        use rayon::prelude::*;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (u, v) = grid.coords(k);
                f(u, v)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, values })
    }
}

impl ScalarField {
    /// Maximum of `|value|` over nodes at least `margin` cells from the edge.
    pub fn max_abs_interior(&self, margin: usize) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(k, _)| self.grid.is_interior(*k, margin))
            .map(|(_, x)| x.abs())
            .fold(0.0, f64::max)
    }

    pub fn min_max_interior(&self, margin: usize) -> (f64, f64) {
        self.values
            .iter()
            .enumerate()
            .filter(|(k, _)| self.grid.is_interior(*k, margin))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &x)| (lo.min(x), hi.max(x)))
    }
}

pub(crate) fn same_grid(a: &ChartGrid, b: &ChartGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(GeometryError::GridMismatch)
    }
}

/// A symmetric positive-definite 2×2 field, e.g. a Riemannian metric `g_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField(Field<Mat2>);

impl MetricField {
    pub fn new(field: Field<Mat2>) -> Result<Self> {
        for (k, m) in field.values.iter().enumerate() {
            let sym = (m[(0, 1)] - m[(1, 0)]).abs() <= 1e-12 * (1.0 + m.amax());
            if !sym || !(m[(0, 0)] > 0.0) || !(m.determinant() > 0.0) {
                return Err(GeometryError::NotPositiveDefinite { node: k });
            }
        }
        Ok(Self(field))
    }

    pub fn from_fn(grid: ChartGrid, f: impl FnMut(f64, f64) -> Mat2) -> Result<Self> {
        Self::new(Field::from_fn(grid, f))
    }

    pub fn field(&self) -> &Field<Mat2> {
        &self.0
    }

    pub fn into_field(self) -> Field<Mat2> {
        self.0
    }

    /// `λ · g` for a constant `λ > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.0.map(|m| m * lambda))
    }
}

impl Deref for MetricField {
    type Target = Field<Mat2>;
    fn deref(&self) -> &Field<Mat2> {
        &self.0
    }
}

/// Coordinate direction on a chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    U,
    V,
}

/// Formal accuracy order of the difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StencilOrder {
    #[default]
    Second,
    Fourth,
}

impl StencilOrder {
    pub fn from_int(order: u32) -> Result<Self> {
        match order {
            2 => Ok(Self::Second),
            4 => Ok(Self::Fourth),
            o => Err(GeometryError::Invalid(format!("stencil order must be 2 or 4, got {o}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Self::Second => 2,
            Self::Fourth => 4,
        }
    }
}

fn line_layout(grid: &ChartGrid, dir: Direction) -> (usize, usize, usize, f64) {
    // (points per line, number of lines, stride along the line, spacing)
    match dir {
        Direction::U => (grid.n_u, grid.n_v, 1, grid.h_u()),
        Direction::V => (grid.n_v, grid.n_u, grid.n_u, grid.h_v()),
    }
}

fn line_start(grid: &ChartGrid, dir: Direction, line: usize) -> usize {
    match dir {
        Direction::U => line * grid.n_u,
        Direction::V => line,
    }
}

fn weighted<T: FieldValue>(vals: &[T], base: usize, stride: usize, idx: &[(isize, f64)]) -> T {
    idx.iter().fold(T::zero(), |acc, &(off, w)| acc + vals[(base as isize + off * stride as isize) as usize] * w)
}

/// Applies a 1-D stencil family along every grid line. `stencil(i, n)` returns the
/// (offset, weight) pairs for position `i` of a line of length `n`.
fn apply_along<T: FieldValue>(
    field: &Field<T>,
    dir: Direction,
    scale: f64,
    stencil: impl Fn(usize, usize) -> Vec<(isize, f64)>,
) -> Field<T> {
    let grid = field.grid;
    let (n, lines, stride, _) = line_layout(&grid, dir);
    let mut out = vec![T::zero(); grid.len()];
    let tables: Vec<Vec<(isize, f64)>> = (0..n).map(|i| stencil(i, n)).collect();
    for line in 0..lines {
        let start = line_start(&grid, dir, line);
        for (i, st) in tables.iter().enumerate() {
            let k = start + i * stride;
            out[k] = weighted(&field.values, k, stride, st) * scale;
        }
    }
    Field { grid, values: out }
}

fn first_stencil(order: StencilOrder, i: usize, n: usize) -> Vec<(isize, f64)> {
    let mirror = |s: Vec<(isize, f64)>| s.into_iter().map(|(o, w)| (-o, -w)).collect::<Vec<_>>();
    match order {
        StencilOrder::Second => {
            let edge = vec![(0, -1.5), (1, 2.0), (2, -0.5)];
            if i == 0 {
                edge
            } else if i + 1 == n {
                mirror(edge)
            } else {
                vec![(-1, -0.5), (1, 0.5)]
            }
        }
        StencilOrder::Fourth => {
            let c = 1.0 / 12.0;
            let e0 = vec![(0, -25.0 * c), (1, 48.0 * c), (2, -36.0 * c), (3, 16.0 * c), (4, -3.0 * c)];
            let e1 = vec![(-1, -3.0 * c), (0, -10.0 * c), (1, 18.0 * c), (2, -6.0 * c), (3, c)];
            if i == 0 {
                e0
            } else if i == 1 {
                e1
            } else if i + 1 == n {
                mirror(e0)
            } else if i + 2 == n {
                mirror(e1)
            } else {
                vec![(-2, c), (-1, -8.0 * c), (1, 8.0 * c), (2, -c)]
            }
        }
    }
}

fn second_stencil(order: StencilOrder, i: usize, n: usize) -> Vec<(isize, f64)> {
    let mirror = |s: Vec<(isize, f64)>| s.into_iter().map(|(o, w)| (-o, w)).collect::<Vec<_>>();
    match order {
        StencilOrder::Second => {
            let edge = vec![(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)];
            if i == 0 {
                edge
            } else if i + 1 == n {
                mirror(edge)
            } else {
                vec![(-1, 1.0), (0, -2.0), (1, 1.0)]
            }
        }
        StencilOrder::Fourth => {
            let c = 1.0 / 12.0;
            let e0 =
                vec![(0, 45.0 * c), (1, -154.0 * c), (2, 214.0 * c), (3, -156.0 * c), (4, 61.0 * c), (5, -10.0 * c)];
            let e1 = vec![(-1, 10.0 * c), (0, -15.0 * c), (1, -4.0 * c), (2, 14.0 * c), (3, -6.0 * c), (4, c)];
            if i == 0 {
                e0
            } else if i == 1 {
                e1
            } else if i + 1 == n {
                mirror(e0)
            } else if i + 2 == n {
                mirror(e1)
            } else {
                vec![(-2, -c), (-1, 16.0 * c), (0, -30.0 * c), (1, 16.0 * c), (2, -c)]
            }
        }
    }
}

fn check_stencil_fits(grid: &ChartGrid, dir: Direction, needed: usize) -> Result<()> {
    let (n, ..) = line_layout(grid, dir);
    if n < needed {
        return Err(GeometryError::InvalidGrid(format!("{n} nodes along the line, stencil needs {needed}")));
    }
    Ok(())
}

/// First derivative along `dir`: central differences inside, one-sided stencils of
/// the same order at the edges.
pub fn fd_derivative<T: FieldValue>(field: &Field<T>, dir: Direction, order: StencilOrder) -> Result<Field<T>> {
    check_stencil_fits(&field.grid, dir, if order == StencilOrder::Second { 3 } else { 5 })?;
    let (.., h) = line_layout(&field.grid, dir);
    Ok(apply_along(field, dir, 1.0 / h, |i, n| first_stencil(order, i, n)))
}

/// Second derivative `∂²/∂a∂b`. Pure derivatives use compact stencils; the mixed
/// one composes two first derivatives.
pub fn fd_second<T: FieldValue>(field: &Field<T>, a: Direction, b: Direction, order: StencilOrder) -> Result<Field<T>> {
    if a != b {
        return fd_derivative(&fd_derivative(field, a, order)?, b, order);
    }
    check_stencil_fits(&field.grid, a, if order == StencilOrder::Second { 4 } else { 6 })?;
    let (.., h) = line_layout(&field.grid, a);
    Ok(apply_along(field, a, 1.0 / (h * h), |i, n| second_stencil(order, i, n)))
}

/// Gradient `(∂_u, ∂_v)` of a field.
pub fn fd_gradient<T: FieldValue>(field: &Field<T>, order: StencilOrder) -> Result<[Field<T>; 2]> {
    Ok([fd_derivative(field, Direction::U, order)?, fd_derivative(field, Direction::V, order)?])
}

/// Observed convergence order from errors at spacing `h` and `h/2`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(f: &ScalarField, exact: impl Fn(f64, f64) -> f64, margin: usize) -> f64 {
        let g = f.grid();
        (0..g.len())
            .filter(|&k| g.is_interior(k, margin))
            .map(|k| {
                let (u, v) = g.coords(k);
                (f.values()[k] - exact(u, v)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn grid_invariants() {
        assert!(ChartGrid::new(0.0, 1.0, 0.0, 1.0, 4, 10).is_err());
        assert!(ChartGrid::new(1.0, 1.0, 0.0, 1.0, 10, 10).is_err());
        let g = ChartGrid::new(-1.0, 1.0, 0.0, 2.0, 11, 21).unwrap();
        assert!((g.h_u() - 0.2).abs() < 1e-15 && (g.h_v() - 0.1).abs() < 1e-15);
        assert_eq!(g.coords(g.index(10, 20)), (1.0, 2.0));
        let r = g.refined();
        assert_eq!((r.n_u, r.n_v), (21, 41));
        assert_eq!(g.boundary_loop().len(), 2 * (11 + 21) - 4);
        let s = ChartGrid::square_with_spacing(3.0, 0.05).unwrap();
        assert_eq!(s.n_u, 121);
        assert_eq!(s.coords(s.center_node()), (0.0, 0.0));
    }

    #[test]
    fn quadratics_are_exact_for_second_order() {
        let g = ChartGrid::new(-1.0, 1.0, -1.0, 1.0, 21, 21).unwrap();
        let f = Field::from_fn(g, |u, _| u * u);
        let d = fd_derivative(&f, Direction::U, StencilOrder::Second).unwrap();
        assert!(max_err(&d, |u, _| 2.0 * u, 0) < 1e-12);
        let dd = fd_second(&f, Direction::U, Direction::U, StencilOrder::Second).unwrap();
        assert!(max_err(&dd, |_, _| 2.0, 0) < 1e-9);
        let dv = fd_derivative(&f, Direction::V, StencilOrder::Second).unwrap();
        assert!(max_err(&dv, |_, _| 0.0, 0) < 1e-12);
    }

    #[test]
    fn constants_differentiate_to_zero() {
        let g = ChartGrid::square(1.0, 9).unwrap();
        let f = Field::from_fn(g, |_, _| 3.5);
        for order in [StencilOrder::Second, StencilOrder::Fourth] {
            for dir in [Direction::U, Direction::V] {
                assert!(fd_derivative(&f, dir, order).unwrap().max_abs_interior(0) < 1e-12);
                assert!(fd_second(&f, dir, dir, order).unwrap().max_abs_interior(0) < 1e-9);
            }
        }
    }

    #[test]
    fn sine_convergence_orders() {
        for (order, expected) in [(StencilOrder::Second, 2.0), (StencilOrder::Fourth, 4.0)] {
            let errs: Vec<f64> = [0.1, 0.05]
                .iter()
                .map(|&h| {
                    let g = ChartGrid::square_with_spacing(1.0, h).unwrap();
                    let f = Field::from_fn(g, |u, v| u.sin() * v.cos());
                    let d = fd_derivative(&f, Direction::U, order).unwrap();
                    // edges included: one-sided stencils keep the order
                    max_err(&d, |u, v| u.cos() * v.cos(), 0)
                })
                .collect();
            let p = observed_order(errs[0], errs[1]);
            assert!((p - expected).abs() < 0.3, "{order:?}: observed {p}");
        }
    }

    #[test]
    fn second_derivative_orders() {
        for (order, expected) in [(StencilOrder::Second, 2.0), (StencilOrder::Fourth, 4.0)] {
            let errs: Vec<f64> = [0.1, 0.05]
                .iter()
                .map(|&h| {
                    let g = ChartGrid::square_with_spacing(1.0, h).unwrap();
                    let f = Field::from_fn(g, |u, v| (u + 0.5 * v).exp());
                    let uu = fd_second(&f, Direction::U, Direction::U, order).unwrap();
                    let uv = fd_second(&f, Direction::U, Direction::V, order).unwrap();
                    max_err(&uu, |u, v| (u + 0.5 * v).exp(), 0).max(max_err(&uv, |u, v| 0.5 * (u + 0.5 * v).exp(), 0))
                })
                .collect();
            let p = observed_order(errs[0], errs[1]);
            assert!(p > expected - 0.3, "{order:?}: observed {p}");
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = Field::from_fn(ChartGrid::square(1.0, 9).unwrap(), |u, _| u);
        let b = Field::from_fn(ChartGrid::square(1.0, 11).unwrap(), |u, _| u);
        assert_eq!(a.zip_with(&b, |x, y| x + y).unwrap_err(), GeometryError::GridMismatch);
    }

    #[test]
    fn metric_field_rejects_indefinite_values() {
        let g = ChartGrid::square(1.0, 5).unwrap();
        assert!(MetricField::from_fn(g, |_, _| Mat2::new(1.0, 0.0, 0.0, -1.0)).is_err());
        assert!(MetricField::from_fn(g, |_, _| Mat2::new(1.0, 0.2, 0.3, 1.0)).is_err());
        assert!(MetricField::from_fn(g, |_, _| Mat2::new(1.0, 0.2, 0.2, 1.0)).is_ok());
    }
}
