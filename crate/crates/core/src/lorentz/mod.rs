//! Minkowski space ℝ^{2,1}, the hyperboloid and Klein models of the hyperbolic
//! plane, and the group SO₀(2,1) acting on them.
//!
//! The bilinear form is `⟨x,y⟩ = x₁y₁ + x₂y₂ − x₃y₃`. The hyperbolic plane is the
//! upper sheet `{⟨x,x⟩ = −1, x₃ > 0}` and the Klein model is its radial projection
//! to the unit disc at height one.

mod domain;

pub use domain::{
    hausdorff_distance, hausdorff_report, hausdorff_to_region, hull_of_circle_subset, point_in_polygon, BoundaryPiece,
    CircleSubset, HausdorffReport, PolygonRegion, StraightConvexDomain, PROBE_DTHETA, PROBE_SPACING,
};

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};

/// Tolerance on the hyperboloid and isometry invariants.
pub const TOL_MODEL: f64 = 1e-9;
/// Points of the Klein model must stay this far inside the unit circle.
pub const TOL_DISC: f64 = 1e-12;
/// Default relative tolerance on the Gram matrices compared by frame alignment.
pub const TOL_ALIGN: f64 = 1e-8;

/// A vector of ℝ^{2,1}.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MinkVector {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl MinkVector {
    pub const E1: MinkVector = MinkVector::new(1.0, 0.0, 0.0);
    pub const E2: MinkVector = MinkVector::new(0.0, 1.0, 0.0);
    pub const E3: MinkVector = MinkVector::new(0.0, 0.0, 1.0);

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn to_vector3(self) -> Vector3<f64> {
        Vector3::new(self.x1, self.x2, self.x3)
    }

    pub fn from_vector3(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// Euclidean norm of the coordinates (not the Lorentzian one).
    pub fn euclidean_norm(self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }
}

impl Add for MinkVector {
    type Output = MinkVector;
    fn add(self, o: MinkVector) -> MinkVector {
        MinkVector::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl Sub for MinkVector {
    type Output = MinkVector;
    fn sub(self, o: MinkVector) -> MinkVector {
        MinkVector::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl Neg for MinkVector {
    type Output = MinkVector;
    fn neg(self) -> MinkVector {
        MinkVector::new(-self.x1, -self.x2, -self.x3)
    }
}

impl Mul<f64> for MinkVector {
    type Output = MinkVector;
    fn mul(self, s: f64) -> MinkVector {
        MinkVector::new(self.x1 * s, self.x2 * s, self.x3 * s)
    }
}

impl Mul<MinkVector> for f64 {
    type Output = MinkVector;
    fn mul(self, v: MinkVector) -> MinkVector {
        v * self
    }
}

/// The Minkowski product `x₁y₁ + x₂y₂ − x₃y₃`.
pub fn mink_inner(x: MinkVector, y: MinkVector) -> f64 {
    x.x1 * y.x1 + x.x2 * y.x2 - x.x3 * y.x3
}

/// `J = diag(1, 1, −1)`, the Gram matrix of the standard basis.
pub fn minkowski_gram() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))
}

/// A point of the upper sheet of the hyperboloid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperboloidPoint(MinkVector);

impl HyperboloidPoint {
    pub fn new(v: MinkVector) -> Result<Self> {
        let defect = mink_inner(v, v) + 1.0;
        if !v.is_finite() || defect.abs() > TOL_MODEL * (1.0 + v.x3 * v.x3) || v.x3 <= 0.0 {
            return Err(GeometryError::NotOnHyperboloid { defect, x3: v.x3 });
        }
        Ok(Self(v))
    }

    /// Rescales a future timelike vector onto the hyperboloid.
    pub fn normalize(v: MinkVector) -> Result<Self> {
        let q = -mink_inner(v, v);
        if !(q > 0.0) || v.x3 <= 0.0 {
            return Err(GeometryError::NotOnHyperboloid { defect: 1.0 - q, x3: v.x3 });
        }
        Ok(Self(v * (1.0 / q.sqrt())))
    }

    pub fn origin() -> Self {
        Self(MinkVector::E3)
    }

    pub fn vector(self) -> MinkVector {
        self.0
    }

    /// Hyperbolic distance, evaluated through the Minkowski chord length so that it
    /// stays accurate for nearby points.
    pub fn distance(self, other: HyperboloidPoint) -> f64 {
        let d = self.0 - other.0;
        let chord = mink_inner(d, d).max(0.0).sqrt();
        2.0 * (chord / 2.0).asinh()
    }
}

/// A point of the Klein disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KleinPoint {
    pub y1: f64,
    pub y2: f64,
}

impl KleinPoint {
    pub fn new(y1: f64, y2: f64) -> Result<Self> {
        if !(y1 * y1 + y2 * y2 < 1.0) {
            return Err(GeometryError::OutsideDisc { y1, y2 });
        }
        Ok(Self { y1, y2 })
    }

    pub fn norm(self) -> f64 {
        self.y1.hypot(self.y2)
    }

    pub fn as_array(self) -> [f64; 2] {
        [self.y1, self.y2]
    }
}

/// Radial projection of the hyperboloid to the disc at height one.
pub fn klein_project(p: HyperboloidPoint) -> KleinPoint {
    let v = p.vector();
    KleinPoint { y1: v.x1 / v.x3, y2: v.x2 / v.x3 }
}

/// Inverse of [`klein_project`].
pub fn klein_lift(y: KleinPoint) -> Result<HyperboloidPoint> {
    let r2 = y.y1 * y.y1 + y.y2 * y.y2;
    if !(r2.sqrt() < 1.0 - TOL_DISC) {
        return Err(GeometryError::OutsideDisc { y1: y.y1, y2: y.y2 });
    }
    let s = 1.0 / (1.0 - r2).sqrt();
    Ok(HyperboloidPoint(MinkVector::new(y.y1 * s, y.y2 * s, s)))
}

/// Differential of [`klein_lift`]: columns are the images of `∂/∂y₁`, `∂/∂y₂`.
pub fn klein_lift_differential(y: [f64; 2]) -> Result<[MinkVector; 2]> {
    let r2 = y[0] * y[0] + y[1] * y[1];
    if !(r2 < 1.0) {
        return Err(GeometryError::OutsideDisc { y1: y[0], y2: y[1] });
    }
    let w = 1.0 - r2;
    let s = w.powf(-0.5);
    let s3 = s / w;
    // d/dy_k (y_i s) = δ_ik s + y_i y_k s³ ; d/dy_k s = y_k s³
    let col = |k: usize| {
        let dk = |i: usize| if i == k { 1.0 } else { 0.0 };
        MinkVector::new(dk(0) * s + y[0] * y[k] * s3, dk(1) * s + y[1] * y[k] * s3, y[k] * s3)
    };
    Ok([col(0), col(1)])
}

/// An element of SO₀(2,1), acting linearly on ℝ^{2,1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzIsometry {
    m: Matrix3<f64>,
}

impl Serialize for LorentzIsometry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl LorentzIsometry {
    pub fn identity() -> Self {
        Self { m: Matrix3::identity() }
    }

    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let defect = Self::defect(&m);
        if !(defect <= TOL_MODEL * (1.0 + m.norm_squared())) || m[(2, 2)] <= 0.0 {
            return Err(GeometryError::NotLorentzIsometry { defect });
        }
        Ok(Self { m })
    }

    /// Largest violation of `mᵀJm = J` and `det m = 1`.
    fn defect(m: &Matrix3<f64>) -> f64 {
        let j = minkowski_gram();
        let gram = (m.transpose() * j * m - j).amax();
        gram.max((m.determinant() - 1.0).abs())
    }

    /// Rotation by `angle` about the x₃-axis.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { m: Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0) }
    }

    /// Boost of the given rapidity along the horizontal direction at `angle`.
    pub fn boost(rapidity: f64, angle: f64) -> Self {
        let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
        let along_x1 = Matrix3::new(ch, 0.0, sh, 0.0, 1.0, 0.0, sh, 0.0, ch);
        let r = Self::rotation(angle).m;
        Self { m: r * along_x1 * r.transpose() }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.m;
        [0, 1, 2].map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)]])
    }

    pub fn apply(&self, v: MinkVector) -> MinkVector {
        MinkVector::from_vector3(&(self.m * v.to_vector3()))
    }

    pub fn apply_point(&self, p: HyperboloidPoint) -> HyperboloidPoint {
        HyperboloidPoint(self.apply(p.vector()))
    }

    pub fn compose(&self, other: &LorentzIsometry) -> LorentzIsometry {
        LorentzIsometry { m: self.m * other.m }
    }

    /// `A⁻¹ = J Aᵀ J`.
    pub fn inverse(&self) -> LorentzIsometry {
        let j = minkowski_gram();
        LorentzIsometry { m: j * self.m.transpose() * j }
    }

    /// Max-entry distance between the matrices.
    pub fn distance(&self, other: &LorentzIsometry) -> f64 {
        (self.m - other.m).amax()
    }
}

/// Position, tangent frame and future unit normal of an immersed surface at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameState {
    pub position: MinkVector,
    pub e1: MinkVector,
    pub e2: MinkVector,
    pub normal: MinkVector,
}

impl FrameState {
    /// The frame at the apex of the hyperboloid: standard basis, normal `(0,0,1)`.
    pub fn standard(position: MinkVector) -> Self {
        Self { position, e1: MinkVector::E1, e2: MinkVector::E2, normal: MinkVector::E3 }
    }

    /// Columns `e₁, e₂, ν` as a matrix.
    pub fn basis_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.e1.to_vector3(), self.e2.to_vector3(), self.normal.to_vector3()])
    }

    /// Minkowski Gram matrix of `(e₁, e₂, ν)`.
    pub fn gram(&self) -> Matrix3<f64> {
        let b = self.basis_matrix();
        b.transpose() * minkowski_gram() * b
    }

    /// Largest violation of `⟨eᵢ,ν⟩ = 0`, `⟨ν,ν⟩ = −1`, compared with the given
    /// tangent Gram matrix.
    pub fn gram_defect(&self, g11: f64, g12: f64, g22: f64) -> f64 {
        let gram = self.gram();
        let target = Matrix3::new(g11, g12, 0.0, g12, g22, 0.0, 0.0, 0.0, -1.0);
        (gram - target).amax()
    }

    pub fn transformed(&self, a: &LorentzIsometry) -> FrameState {
        FrameState {
            position: a.apply(self.position),
            e1: a.apply(self.e1),
            e2: a.apply(self.e2),
            normal: a.apply(self.normal),
        }
    }
}

/// The Lorentz isometry taking the frame `(e₁, e₂, ν)` of `src` to that of `dst`.
///
/// Positions are ignored: the isometry is linear.
pub fn frame_alignment_isometry(src: &FrameState, dst: &FrameState) -> Result<LorentzIsometry> {
    frame_alignment_isometry_with_tol(src, dst, TOL_ALIGN)
}

pub fn frame_alignment_isometry_with_tol(
    src: &FrameState,
    dst: &FrameState,
    tol_align: f64,
) -> Result<LorentzIsometry> {
    for f in [src, dst] {
        let gram = f.gram();
        let spacelike = gram[(0, 0)] > 0.0 && gram[(0, 0)] * gram[(1, 1)] - gram[(0, 1)].powi(2) > 0.0;
        if !spacelike || f.normal.x3 <= 0.0 {
            return Err(GeometryError::Invalid("frame is not a spacelike frame with future normal".into()));
        }
    }
    let (gs, gd) = (src.gram(), dst.gram());
    let mismatch = (gs - gd).amax() / (1.0 + gs.amax());
    if mismatch > tol_align {
        return Err(GeometryError::FrameMismatch { mismatch, tolerance: tol_align });
    }
    let ms = src.basis_matrix();
    let inv = ms.try_inverse().ok_or_else(|| GeometryError::Invalid("source frame is singular".into()))?;
    let a = dst.basis_matrix() * inv;
    LorentzIsometry::from_matrix(a).map_err(|_| GeometryError::FrameMismatch { mismatch, tolerance: tol_align })
}

/// Lorentz-orthonormal frame built from `(t₁, t₂, n)` by Gram-Schmidt, starting
/// from the timelike `n`; returned as columns `(ê₁, ê₂, n̂)`.
pub fn orthonormalize(t1: MinkVector, t2: MinkVector, n: MinkVector) -> Result<Matrix3<f64>> {
    let nn = -mink_inner(n, n);
    if !(nn > 0.0) || n.x3 <= 0.0 {
        return Err(GeometryError::Invalid("normal is not future timelike".into()));
    }
    let n = n * (1.0 / nn.sqrt());
    let a = t1 + mink_inner(t1, n) * n;
    let aa = mink_inner(a, a);
    let b0 = t2 + mink_inner(t2, n) * n;
    if !(aa > 0.0) {
        return Err(GeometryError::Invalid("tangent vectors are degenerate".into()));
    }
    let a = a * (1.0 / aa.sqrt());
    let b = b0 - mink_inner(b0, a) * a;
    let bb = mink_inner(b, b);
    if !(bb > 0.0) {
        return Err(GeometryError::Invalid("tangent vectors are degenerate".into()));
    }
    let b = b * (1.0 / bb.sqrt());
    Ok(Matrix3::from_columns(&[a.to_vector3(), b.to_vector3(), n.to_vector3()]))
}

/// The isometry taking the orthonormalized frame of `src` to that of `dst`.
///
/// Unlike [`frame_alignment_isometry`] this does not require the two Gram matrices
/// to agree; it is exact when they do.
pub fn orthonormal_alignment(src: &FrameState, dst: &FrameState) -> Result<LorentzIsometry> {
    let os = orthonormalize(src.e1, src.e2, src.normal)?;
    let od = orthonormalize(dst.e1, dst.e2, dst.normal)?;
    let j = minkowski_gram();
    LorentzIsometry::from_matrix(od * j * os.transpose() * j)
}

#[cfg(test)]
mod tests {
    use super::*;

    use proptest::prelude::*;

    #[test]
    fn inner_product_examples() {
        assert_eq!(mink_inner(MinkVector::new(1.0, 2.0, 3.0), MinkVector::new(4.0, 5.0, 6.0)), -4.0);
        assert_eq!(mink_inner(MinkVector::E3, MinkVector::E3), -1.0);
        assert_eq!(mink_inner(MinkVector::E1, MinkVector::E1), 1.0);
        assert_eq!(mink_inner(MinkVector::E2, MinkVector::E2), 1.0);
    }

    #[test]
    fn klein_projection_examples() {
        let o = klein_project(HyperboloidPoint::origin());
        assert_eq!((o.y1, o.y2), (0.0, 0.0));

        let p = HyperboloidPoint::new(MinkVector::new(1.0, 0.0, 2f64.sqrt())).unwrap();
        let y = klein_project(p);
        assert!((y.y1 - 1.0 / 2f64.sqrt()).abs() < 1e-15 && y.y2 == 0.0);

        let p = HyperboloidPoint::new(MinkVector::new(1.0 / 3f64.sqrt(), 0.0, 2.0 / 3f64.sqrt())).unwrap();
        assert!((klein_project(p).y1 - 0.5).abs() < 1e-15);

        assert!(HyperboloidPoint::new(MinkVector::new(1.0, 0.0, 1.0)).is_err());
        assert!(HyperboloidPoint::new(MinkVector::new(0.0, 0.0, -1.0)).is_err());
    }

    #[test]
    fn klein_lift_examples() {
        let p = klein_lift(KleinPoint::new(0.0, 0.0).unwrap()).unwrap().vector();
        assert_eq!(p, MinkVector::E3);
        let p = klein_lift(KleinPoint::new(0.5, 0.0).unwrap()).unwrap().vector();
        assert!((p.x1 - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((p.x3 - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(klein_lift(KleinPoint { y1: 1.0, y2: 0.0 }).is_err());
        assert!(KleinPoint::new(0.8, 0.6).is_err());
    }

    #[test]
    fn lift_differential_matches_difference_quotient() {
        let y = [0.3, -0.45];
        let d = klein_lift_differential(y).unwrap();
        let h = 1e-6;
        for k in 0..2 {
            let mut yp = y;
            let mut ym = y;
            yp[k] += h;
            ym[k] -= h;
            let fp = klein_lift(KleinPoint { y1: yp[0], y2: yp[1] }).unwrap().vector();
            let fm = klein_lift(KleinPoint { y1: ym[0], y2: ym[1] }).unwrap().vector();
            let fd = (fp - fm) * (0.5 / h);
            assert!((fd - d[k]).euclidean_norm() < 1e-8);
        }
    }

    #[test]
    fn alignment_of_identical_frames_is_identity() {
        let f = FrameState::standard(MinkVector::E3);
        let a = frame_alignment_isometry(&f, &f).unwrap();
        assert!(a.distance(&LorentzIsometry::identity()) < 1e-15);
    }

    #[test]
    fn alignment_recovers_rotation() {
        let f = FrameState::standard(MinkVector::E3);
        let r = LorentzIsometry::rotation(0.7);
        let a = frame_alignment_isometry(&f, &f.transformed(&r)).unwrap();
        assert!(a.distance(&r) < 1e-14);
    }

    #[test]
    fn alignment_rejects_non_isometric_frames() {
        let f = FrameState::standard(MinkVector::E3);
        let mut g = f;
        g.e1 = g.e1 * 2.0;
        assert!(matches!(frame_alignment_isometry(&f, &g), Err(GeometryError::FrameMismatch { .. })));
    }

    #[test]
    fn rejects_improper_matrices() {
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        assert!(LorentzIsometry::from_matrix(flip).is_err());
        let time_reversal = Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, -1.0));
        assert!(LorentzIsometry::from_matrix(time_reversal).is_err());
        assert!(LorentzIsometry::from_matrix(*LorentzIsometry::boost(1.3, 0.2).matrix()).is_ok());
    }

    #[test]
    fn hyperbolic_distance_along_a_geodesic() {
        let p = LorentzIsometry::boost(0.8, 0.0).apply_point(HyperboloidPoint::origin());
        assert!((p.distance(HyperboloidPoint::origin()) - 0.8).abs() < 1e-14);
    }

    fn isometry_strategy() -> impl Strategy<Value = LorentzIsometry> {
        (-3.0..3.0f64, 0.0..2.5f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, z, t, b)| {
            LorentzIsometry::rotation(a).compose(&LorentzIsometry::boost(z, t)).compose(&LorentzIsometry::rotation(b))
        })
    }

    fn vector_strategy() -> impl Strategy<Value = MinkVector> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b, c)| MinkVector::new(a, b, c))
    }

    proptest! {
        #[test]
        fn inner_product_is_symmetric_and_bilinear(x in vector_strategy(), y in vector_strategy(), z in vector_strategy(), s in -3.0..3.0f64) {
            prop_assert_eq!(mink_inner(x, y), mink_inner(y, x));
            let lhs = mink_inner(x * s + z, y);
            let rhs = s * mink_inner(x, y) + mink_inner(z, y);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn isometries_preserve_the_form(a in isometry_strategy(), x in vector_strategy(), y in vector_strategy()) {
            prop_assert!(LorentzIsometry::from_matrix(*a.matrix()).is_ok());
            let lhs = mink_inner(a.apply(x), a.apply(y));
            let bound = 1e-10 * (1.0 + x.euclidean_norm() * y.euclidean_norm()) * (1.0 + a.matrix().norm_squared());
            prop_assert!((lhs - mink_inner(x, y)).abs() <= bound);
            prop_assert!(a.compose(&a.inverse()).distance(&LorentzIsometry::identity()) < 1e-9);
        }

        #[test]
        fn klein_round_trips(r in 0.0..0.999f64, t in 0.0..std::f64::consts::TAU) {
            let y = KleinPoint::new(r * t.cos(), r * t.sin()).unwrap();
            let back = klein_project(klein_lift(y).unwrap());
            prop_assert!((back.y1 - y.y1).abs() < 1e-15 && (back.y2 - y.y2).abs() < 1e-15);
            let p = klein_lift(y).unwrap();
            let again = klein_lift(klein_project(p)).unwrap();
            prop_assert!((again.vector() - p.vector()).euclidean_norm() <= 1e-10 * p.vector().x3);
        }

        #[test]
        fn alignment_recovers_random_isometries(a in isometry_strategy(), g12 in -0.4..0.4f64, g22 in 0.5..2.0f64) {
            // a frame with tangent Gram [[1, g12], [g12, g22]] at the apex
            let e2 = MinkVector::new(g12, (g22 - g12 * g12).sqrt(), 0.0);
            let src = FrameState { position: MinkVector::E3, e1: MinkVector::E1, e2, normal: MinkVector::E3 };
            let rec = frame_alignment_isometry(&src, &src.transformed(&a)).unwrap();
            prop_assert!(rec.distance(&a) <= 1e-8 * (1.0 + a.matrix().amax()));
        }
    }
}
