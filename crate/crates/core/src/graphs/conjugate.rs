use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

use super::{GraphSource, Jet, SpacelikeGraph};
use crate::chart::{Mat2, Vec2};
use crate::error::{GeometryError, Result};

/// Side of the coarse table scanned when Newton's method cannot be started.
pub const CONJUGATE_TABLE_RESOLUTION: usize = 256;

const NEWTON_MAX_ITER: usize = 200;

/// Convex potentials `phi` on a subset of the closed unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "potential", rename_all = "kebab-case")]
pub enum Potential {
    /// `−√(1 − |y|²)` on the disc; its conjugate is the hyperboloid.
    Disc,
    /// `−√(1 − |y|²) − ε ln y₁` on `{y₁ > 0}`.
    HalfDisc { eps: f64 },
    /// `−√(1 − |y|²) − ε Σ √ℓₖ` on the ideal triangle with the given vertex angles,
    /// `ℓₖ` the affine distance to the k-th side. Finite at the three vertices.
    ThreePoint { eps: f64, angles: [f64; 3] },
    /// `0` at `a`, `+∞` elsewhere.
    Point { a: [f64; 2] },
}

fn disc_hessian(y: Vec2, w: f64) -> Mat2 {
    Mat2::identity() / w + y * y.transpose() / (w * w * w)
}

struct Side {
    normal: Vec2,
    offset: f64,
}

impl Potential {
    fn sides(angles: &[f64; 3]) -> [Side; 3] {
        let mut a = angles.map(|t| t.rem_euclid(TAU));
        a.sort_by(f64::total_cmp);
        std::array::from_fn(|k| {
            let from = a[k];
            let len = if k == 2 { a[0] + TAU - a[2] } else { a[k + 1] - a[k] };
            let mid = from + 0.5 * len;
            Side { normal: Vec2::new(mid.cos(), mid.sin()), offset: (0.5 * len).cos() }
        })
    }

    /// Whether `y` lies in the open domain where `phi` is smooth.
    pub fn contains(&self, y: Vec2) -> bool {
        if y.norm_squared() >= 1.0 {
            return false;
        }
        match self {
            Self::Disc => true,
            Self::HalfDisc { .. } => y[0] > 0.0,
            Self::ThreePoint { angles, .. } => Self::sides(angles).iter().all(|s| s.offset - s.normal.dot(&y) > 0.0),
            Self::Point { a } => y[0] == a[0] && y[1] == a[1],
        }
    }

    pub fn value(&self, y: Vec2) -> f64 {
        if !self.contains(y) {
            return f64::INFINITY;
        }
        -(1.0 - y.norm_squared()).sqrt() + self.extra(y).0
    }

    pub fn gradient(&self, y: Vec2) -> Vec2 {
        y / (1.0 - y.norm_squared()).sqrt() + self.extra(y).1
    }

    pub fn hessian(&self, y: Vec2) -> Mat2 {
        disc_hessian(y, (1.0 - y.norm_squared()).sqrt()) + self.extra(y).2
    }

    /// Value, gradient and Hessian of `phi + √(1 − |y|²)`.
    fn extra(&self, y: Vec2) -> (f64, Vec2, Mat2) {
        match self {
            Self::Disc | Self::Point { .. } => (0.0, Vec2::zeros(), Mat2::zeros()),
            Self::HalfDisc { eps } => {
                (-eps * y[0].ln(), Vec2::new(-eps / y[0], 0.0), Mat2::new(eps / (y[0] * y[0]), 0.0, 0.0, 0.0))
            }
            Self::ThreePoint { eps, angles } => {
                Self::sides(angles).iter().fold((0.0, Vec2::zeros(), Mat2::zeros()), |(v, g, h), s| {
                    let l = s.offset - s.normal.dot(&y);
                    let r = l.sqrt();
                    (
                        v - eps * r,
                        g + s.normal * (0.5 * eps / r),
                        h + s.normal * s.normal.transpose() * (0.25 * eps / (l * r)),
                    )
                })
            }
        }
    }

    /// A point of the open domain used to start searches.
    pub fn interior_point(&self) -> Vec2 {
        match self {
            Self::Disc => Vec2::zeros(),
            Self::HalfDisc { .. } => Vec2::new(0.5, 0.0),
            Self::ThreePoint { angles, .. } => angles.iter().map(|t| Vec2::new(t.cos(), t.sin())).sum::<Vec2>() / 3.0,
            Self::Point { a } => Vec2::new(a[0], a[1]),
        }
    }
}

struct Optimum {
    z: Vec2,
    y: Vec2,
    w: f64,
    value: f64,
}

fn hyperboloid_coords(y: Vec2) -> Vec2 {
    y / (1.0 - y.norm_squared()).sqrt()
}

/// `f(x) = sup_y (x·y − phi(y))`, evaluated by damped Newton in the coordinates
/// `y = z/√(1 + |z|²)`.
#[derive(Debug, Clone)]
pub struct ConjugateGraph {
    potential: Potential,
    spacing: f64,
    table: Vec<(Vec2, f64)>,
}

impl ConjugateGraph {
    pub fn new(potential: Potential, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(GeometryError::Invalid("conjugate table needs resolution >= 2".into()));
        }
        let spacing = 2.0 / resolution as f64;
        let table: Vec<(Vec2, f64)> = match potential {
            Potential::Point { a } => vec![(Vec2::new(a[0], a[1]), 0.0)],
            _ => (0..resolution * resolution)
                .filter_map(|k| {
                    let y = Vec2::new(
                        -1.0 + spacing * (0.5 + (k % resolution) as f64),
                        -1.0 + spacing * (0.5 + (k / resolution) as f64),
                    );
                    potential.contains(y).then(|| (y, potential.value(y)))
                })
                .collect(),
        };
        if table.is_empty() {
            return Err(GeometryError::Invalid("potential has an empty domain at this resolution".into()));
        }
        Ok(Self { potential, spacing, table })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Maximizer `y*` of `x·y − phi(y)`.
    pub fn maximizer(&self, x: Vec2) -> Result<Vec2> {
        self.solve(x).map(|o| o.y)
    }

    fn solve(&self, x: Vec2) -> Result<Optimum> {
        if let Potential::Point { a } = self.potential {
            let y = Vec2::new(a[0], a[1]);
            return Ok(Optimum { z: hyperboloid_coords(y), y, w: (1.0 - y.norm_squared()).sqrt(), value: x.dot(&y) });
        }
        let start = if self.potential.contains(x / (1.0 + x.norm_squared()).sqrt()) {
            x
        } else {
            hyperboloid_coords(self.potential.interior_point())
        };
        if let Some(o) = self.newton(x, start) {
            return Ok(o);
        }
        if let Some(o) = self.newton_flat(x, start / (1.0 + start.norm_squared()).sqrt()) {
            return Ok(o);
        }
        if let Some(o) = self.continuation(x) {
            return Ok(o);
        }
        let (y0, _) = self.scan(x);
        if let Some(o) = self.newton(x, hyperboloid_coords(y0)).or_else(|| self.newton_flat(x, y0)) {
            return Ok(o);
        }
        if self.on_boundary_ring(y0) {
            return Err(GeometryError::BoundaryMaximizer { x1: x[0], x2: x[1] });
        }
        Err(GeometryError::Invalid(format!("conjugate maximization did not converge at ({}, {})", x[0], x[1])))
    }

    fn scan(&self, x: Vec2) -> (Vec2, f64) {
        let mut best = (self.table[0].0, f64::NEG_INFINITY);
        for &(y, phi) in &self.table {
            let val = x.dot(&y) - phi;
            if val > best.1 || (val == best.1 && y.norm() < best.0.norm()) {
                best = (y, val);
            }
        }
        best
    }

    fn on_boundary_ring(&self, y: Vec2) -> bool {
        let d = 1.5 * self.spacing;
        [Vec2::new(d, 0.0), Vec2::new(-d, 0.0), Vec2::new(0.0, d), Vec2::new(0.0, -d)]
            .iter()
            .any(|o| !self.potential.contains(y + o))
    }

    /// `x·y(z) − phi(y(z))` with its derivatives in `z`, where `y = z/√(1 + |z|²)`.
    fn objective(&self, x: Vec2, z: Vec2) -> Option<(f64, Vec2, Mat2, Vec2, f64)> {
        let w = 1.0 / (1.0 + z.norm_squared()).sqrt();
        let y = z * w;
        if !self.potential.contains(y) {
            return None;
        }
        let (w3, xz) = (w * w * w, x.dot(&z) + 1.0);
        let zz = z * z.transpose();
        let mut value = xz * w;
        let mut grad = x * w - z * (xz * w3);
        let mut hess =
            -(x * z.transpose() + z * x.transpose()) * w3 - (Mat2::identity() * w3 - zz * (3.0 * w3 * w * w)) * xz;
        let (e, ge, he) = self.potential.extra(y);
        let jac = Mat2::identity() * w - zz * w3;
        let gz = ge.dot(&z);
        let curv =
            -(ge * z.transpose() + z * ge.transpose() + Mat2::identity() * gz) * w3 + zz * (3.0 * w3 * w * w * gz);
        value -= e;
        grad -= jac.transpose() * ge;
        hess -= jac.transpose() * he * jac + curv;
        Some((value, grad, hess, y, w))
    }

    /// Damped Newton directly in `y`; slower near the circle but keeps straight
    /// sides straight.
    fn newton_flat(&self, x: Vec2, start: Vec2) -> Option<Optimum> {
        let phi = &self.potential;
        let objective = |y: Vec2| x.dot(&y) - phi.value(y);
        let mut y = start;
        if !phi.contains(y) {
            return None;
        }
        for _ in 0..NEWTON_MAX_ITER {
            let r = x - phi.gradient(y);
            let d = phi.hessian(y).cholesky()?.solve(&r);
            let decrement = r.dot(&d);
            if decrement <= 1e-14 * (1.0 + x.norm()) {
                let y = if phi.contains(y + d) { y + d } else { y };
                let w = (1.0 - y.norm_squared()).sqrt();
                return Some(Optimum { z: y / w, y, w, value: objective(y) });
            }
            let f0 = objective(y);
            let mut t = 1.0;
            loop {
                let yn = y + d * t;
                if phi.contains(yn) && objective(yn) >= f0 + 1e-4 * t * decrement {
                    y = yn;
                    break;
                }
                t *= 0.5;
                if t < 1e-12 {
                    return None;
                }
            }
        }
        None
    }

    /// Follows the maximizer along `s·x`, doubling `s` up to one.
    fn continuation(&self, x: Vec2) -> Option<Optimum> {
        let steps = x.norm().log2().ceil().max(0.0) as i32 + 1;
        let mut z = hyperboloid_coords(self.potential.interior_point());
        for k in (0..=steps).rev() {
            z = self.newton(x * 0.5f64.powi(k), z)?.z;
        }
        self.newton(x, z)
    }

    fn newton(&self, x: Vec2, start: Vec2) -> Option<Optimum> {
        let mut z = start;
        let (mut value, mut grad, mut hess, mut y, mut w) = self.objective(x, z)?;
        for _ in 0..NEWTON_MAX_ITER {
            let neg = -hess;
            let mut shift = 0.0;
            let d = loop {
                if let Some(c) = (neg + Mat2::identity() * shift).cholesky() {
                    break c.solve(&grad);
                }
                shift = if shift == 0.0 { 1e-12 * (1.0 + neg.amax()) } else { 10.0 * shift };
            };
            let decrement = grad.dot(&d);
            if decrement <= 1e-14 * (1.0 + x.norm()) {
                return Some(match self.objective(x, z + d) {
                    Some((value, _, _, y, w)) => Optimum { z: z + d, y, w, value },
                    None => Optimum { z, y, w, value },
                });
            }
            let mut t = 1.0;
            loop {
                if let Some(next) = self.objective(x, z + d * t) {
                    if next.0 >= value + 1e-4 * t * decrement {
                        z += d * t;
                        (value, grad, hess, y, w) = next;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    return (decrement <= 1e-12 * (1.0 + x.norm())).then_some(Optimum { z, y, w, value });
                }
            }
        }
        None
    }

    pub fn jet(&self, x: Vec2) -> Result<Jet> {
        let o = self.solve(x)?;
        let hessian = match self.potential {
            Potential::Point { .. } => Mat2::zeros(),
            _ => {
                let h = disc_hessian(o.y, o.w) + self.potential.extra(o.y).2;
                h.try_inverse().ok_or_else(|| GeometryError::Invalid("singular potential Hessian".into()))?
            }
        };
        Ok(Jet { value: o.value, gradient: o.y, hessian: 0.5 * (hessian + hessian.transpose()) })
    }
}

/// The entire graph whose Legendre transform is `phi`.
pub fn conjugate_construct(phi: Potential, resolution: usize) -> Result<SpacelikeGraph> {
    Ok(SpacelikeGraph::new(GraphSource::Conjugate(Arc::new(ConjugateGraph::new(phi, resolution)?))))
}
