//! Uniform sampling on the unit sphere and construction of the orthonormal
//! frames used to orient increment ellipsoids.
//!
//! The frame `Q` attached to a unit vector `u` satisfies `Q e1 = u`; the
//! tilted frame `Q^alpha` satisfies `Q^alpha e_alpha = u` where
//! `e_alpha = e1 cos(alpha) + e2 sin(alpha)`. Any orthogonal matrix with
//! these properties induces the same walk law, so we fix a deterministic
//! Householder construction.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};
use crate::rng::RngStream;

/// Unit-norm tolerance used by [`UnitVector::new`] and the frame builders.
pub const UNIT_TOL: f64 = 1e-12;

/// Below this distance from `e1` the Householder vector `e1 - target`
/// degenerates and the reflection is built through `e1 + target` instead.
const NEAR_E1_TOL: f64 = 1e-8;

/// A vector on the unit sphere `S^{d-1}`, `d >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Validates the unit-norm invariant (within `1e-12`).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::BadDimension { expected: "d >= 1".into(), got: 0 });
        }
        let n = norm(&coords);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnitNorm { norm: n });
        }
        Ok(UnitVector(coords))
    }

    /// The standard basis vector `e_axis` (zero-based) in dimension `dim`.
    pub fn basis(dim: usize, axis: usize) -> Self {
        assert!(axis < dim, "basis axis out of range");
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        UnitVector(v)
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn from_direction(v: &[f64]) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::BadDimension { expected: "d >= 1".into(), got: 0 });
        }
        let n = norm(v);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotUnitNorm { norm: n });
        }
        Ok(UnitVector(v.iter().map(|x| x / n).collect()))
    }

    /// Direction of `x` from the origin, with the convention that the hat of
    /// the zero vector is `e1`.
    pub fn radial_direction(x: &[f64]) -> Self {
        let n = norm(x);
        if n == 0.0 {
            UnitVector::basis(x.len(), 0)
        } else {
            UnitVector(x.iter().map(|c| c / n).collect())
        }
    }

    /// Wraps coordinates already known to be unit norm (e.g. straight out of
    /// [`sample_sphere_into`]) without re-validating.
    pub(crate) fn new_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!((norm(&coords) - 1.0).abs() <= UNIT_TOL);
        UnitVector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Deref for UnitVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A `d x d` matrix with `Q^T Q = I` within `1e-12` entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMatrix(Matrix);

impl OrthogonalMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        let defect = m.orthogonality_defect();
        if defect > UNIT_TOL {
            return Err(Error::BadParameter {
                name: "orthogonality defect",
                value: defect,
                requirement: "|Q^T Q - I| <= 1e-12 entrywise",
            });
        }
        Ok(OrthogonalMatrix(m))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.0.mul_vec(v)
    }
}

/// Uniform draw on `S^{dim-1}`, realized by normalizing a vector of
/// independent standard Gaussians. In dimension 1 this returns `+1` or `-1`
/// with equal probability.
pub fn sample_unit_sphere(dim: usize, rng: &mut RngStream) -> Result<UnitVector> {
    if dim == 0 {
        return Err(Error::BadDimension { expected: "d >= 1".into(), got: 0 });
    }
    let mut v = vec![0.0; dim];
    sample_sphere_into(&mut v, rng);
    Ok(UnitVector(v))
}

/// Allocation-free body of [`sample_unit_sphere`] for hot loops.
pub(crate) fn sample_sphere_into(buf: &mut [f64], rng: &mut RngStream) {
    debug_assert!(!buf.is_empty());
    loop {
        for c in buf.iter_mut() {
            *c = rng.standard_normal();
        }
        let n = norm(buf);
        if n > 1e-100 {
            for c in buf.iter_mut() {
                *c /= n;
            }
            return;
        }
        // Astronomically unlikely degenerate draw; resample.
    }
}

/// Orthogonal `Q` with `Q e1 = target`, built as a Householder reflection.
///
/// For `target` within `1e-8` of `e1` the reflection through `e1 - target`
/// is ill-conditioned, so the reflection through `e1 + target` composed with
/// `diag(-1, 1, ..., 1)` is used instead; at `target == e1` that product is
/// exactly the identity.
pub fn frame_to(target: &UnitVector) -> OrthogonalMatrix {
    let d = target.dim();
    let mut e1_minus = target.coords().iter().map(|c| -c).collect::<Vec<f64>>();
    e1_minus[0] += 1.0;
    if norm(&e1_minus) < NEAR_E1_TOL {
        let mut w = target.coords().to_vec();
        w[0] += 1.0;
        let h = householder(d, &w);
        // Compose with diag(-1, 1, ..., 1): negate the first column.
        let q = Matrix::from_fn(d, |i, j| if j == 0 { -h.get(i, 0) } else { h.get(i, j) });
        OrthogonalMatrix(q)
    } else {
        OrthogonalMatrix(householder(d, &e1_minus))
    }
}

/// Reflection `I - 2 v v^T / <v, v>`.
fn householder(dim: usize, v: &[f64]) -> Matrix {
    let c = -2.0 / dot(v, v);
    Matrix::scaled_identity_plus_outer(dim, 1.0, c, v, v)
}

/// Orthogonal `Q` with `Q e_alpha = target`, where
/// `e_alpha = e1 cos(alpha) + e2 sin(alpha)`.
///
/// Built as `frame_to(target)` composed with the planar rotation taking
/// `e_alpha` to `e1`; at `alpha = 0` this is exactly `frame_to(target)`.
pub fn tilted_frame_to(target: &UnitVector, alpha: f64) -> Result<OrthogonalMatrix> {
    let d = target.dim();
    if d < 2 {
        return Err(Error::BadDimension { expected: "d >= 2 (e2 must exist)".into(), got: d });
    }
    if !(0.0..std::f64::consts::PI).contains(&alpha) {
        return Err(Error::BadParameter {
            name: "alpha",
            value: alpha,
            requirement: "alpha in [0, pi)",
        });
    }
    if alpha == 0.0 {
        return Ok(frame_to(target));
    }
    let (sin_a, cos_a) = alpha.sin_cos();
    let mut rot = Matrix::identity(d);
    rot.set(0, 0, cos_a);
    rot.set(0, 1, sin_a);
    rot.set(1, 0, -sin_a);
    rot.set(1, 1, cos_a);
    Ok(OrthogonalMatrix(frame_to(target).matrix().mul(&rot)))
}

/// Point on the ellipse centred at `x` with semi-axis `sqrt(2) a` along the
/// radial direction and `sqrt(2) b` along the transverse direction, at
/// parameter `phi`. At `x = 0` the axes default to `e1`, `e2`.
pub fn ellipse_point_2d(x: [f64; 2], a: f64, b: f64, phi: f64) -> Result<[f64; 2]> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    if !(phi > -std::f64::consts::PI && phi <= std::f64::consts::PI) {
        return Err(Error::BadParameter {
            name: "phi",
            value: phi,
            requirement: "phi in (-pi, pi]",
        });
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let (sin_p, cos_p) = phi.sin_cos();
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if r == 0.0 {
        return Ok([sqrt2 * a * cos_p, sqrt2 * b * sin_p]);
    }
    let radial = [x[0] / r, x[1] / r];
    let perp = [-radial[1], radial[0]];
    Ok([
        x[0] + sqrt2 * a * radial[0] * cos_p + sqrt2 * b * perp[0] * sin_p,
        x[1] + sqrt2 * a * radial[1] * cos_p + sqrt2 * b * perp[1] * sin_p,
    ])
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParameter { name, value, requirement: "must be finite and > 0" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Welford;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn sphere_dim0_rejected() {
        let mut rng = RngStream::new(0, 0);
        assert!(sample_unit_sphere(0, &mut rng).is_err());
    }

    #[test]
    fn sphere_dim1_is_signs_with_equal_frequency() {
        let mut rng = RngStream::new(11, 0);
        let n = 100_000;
        let mut plus = 0usize;
        for _ in 0..n {
            let z = sample_unit_sphere(1, &mut rng).unwrap();
            assert!(z[0] == 1.0 || z[0] == -1.0);
            if z[0] == 1.0 {
                plus += 1;
            }
        }
        let freq = plus as f64 / n as f64;
        let se = 0.5 / (n as f64).sqrt();
        assert!((freq - 0.5).abs() <= 3.0 * se, "freq = {freq}");
    }

    #[test]
    fn sphere_draws_are_unit_norm() {
        let mut rng = RngStream::new(3, 1);
        for dim in [1, 2, 3, 5, 8] {
            for _ in 0..100 {
                let z = sample_unit_sphere(dim, &mut rng).unwrap();
                assert!((norm(&z) - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sphere_second_moment_is_identity_over_d() {
        // E[zeta zeta^T] = I/3 in dimension 3; checked entrywise at 5 sigma.
        let mut rng = RngStream::new(17, 0);
        let d = 3;
        let n = 1_000_000usize;
        let mut acc = vec![Welford::new(); d * d];
        for _ in 0..n {
            let z = sample_unit_sphere(d, &mut rng).unwrap();
            for i in 0..d {
                for j in 0..d {
                    acc[i * d + j].push(z[i] * z[j]);
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                let cell = &acc[i * d + j];
                let want = if i == j { 1.0 / d as f64 } else { 0.0 };
                let dev = (cell.mean() - want).abs();
                assert!(
                    dev <= 5.0 * cell.standard_error(),
                    "entry ({i},{j}): dev {dev} vs 5*SE {}",
                    5.0 * cell.standard_error()
                );
            }
        }
    }

    #[test]
    fn sphere_mean_is_zero() {
        let mut rng = RngStream::new(23, 0);
        let d = 4;
        let n = 1_000_000usize;
        let mut sums = vec![0.0; d];
        for _ in 0..n {
            let z = sample_unit_sphere(d, &mut rng).unwrap();
            for (s, c) in sums.iter_mut().zip(z.coords()) {
                *s += c;
            }
        }
        let se = 1.0 / ((d * n) as f64).sqrt();
        for s in sums {
            assert!((s / n as f64).abs() <= 5.0 * se);
        }
    }

    #[test]
    fn frame_to_e1_is_identity() {
        let q = frame_to(&UnitVector::basis(4, 0));
        assert_eq!(q.matrix().max_abs_diff(&Matrix::identity(4)), 0.0);
    }

    #[test]
    fn frame_to_minus_e1_is_reflection() {
        // Householder through v = 2 e1 gives diag(-1, 1, 1) exactly.
        let target = UnitVector::new(vec![-1.0, 0.0, 0.0]).unwrap();
        let q = frame_to(&target);
        let want = Matrix::from_fn(3, |i, j| {
            if i != j {
                0.0
            } else if i == 0 {
                -1.0
            } else {
                1.0
            }
        });
        assert_eq!(q.matrix().max_abs_diff(&want), 0.0);
    }

    #[test]
    fn frame_to_maps_e1_to_target() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..50 {
            let target = sample_unit_sphere(5, &mut rng).unwrap();
            let q = frame_to(&target);
            let image = q.apply(&UnitVector::basis(5, 0));
            assert!(norm(&crate::linalg::sub(&image, &target)) <= 1e-12);
            assert!(q.matrix().orthogonality_defect() <= 1e-12);
        }
    }

    #[test]
    fn frame_to_near_e1_is_stable() {
        let eps = 1e-9;
        let target = UnitVector::from_direction(&[1.0, eps, 0.0]).unwrap();
        let q = frame_to(&target);
        assert!(q.matrix().orthogonality_defect() <= 1e-12);
        let image = q.apply(&UnitVector::basis(3, 0));
        assert!(norm(&crate::linalg::sub(&image, &target)) <= 1e-12);
    }

    #[test]
    fn tilted_frame_alpha_zero_matches_frame_to() {
        let mut rng = RngStream::new(8, 0);
        let target = sample_unit_sphere(3, &mut rng).unwrap();
        let q0 = tilted_frame_to(&target, 0.0).unwrap();
        let q = frame_to(&target);
        assert_eq!(q0.matrix().max_abs_diff(q.matrix()), 0.0);
    }

    #[test]
    fn tilted_frame_maps_e_alpha_to_target() {
        let alpha = std::f64::consts::FRAC_PI_2;
        let target = UnitVector::basis(2, 1);
        let q = tilted_frame_to(&target, alpha).unwrap();
        let e_alpha = [alpha.cos(), alpha.sin()];
        let image = q.apply(&e_alpha);
        assert!(norm(&crate::linalg::sub(&image, &target)) <= 1e-12);
    }

    #[test]
    fn tilted_frame_random_target_d3() {
        let mut rng = RngStream::new(13, 0);
        let alpha = std::f64::consts::FRAC_PI_4;
        for _ in 0..50 {
            let target = sample_unit_sphere(3, &mut rng).unwrap();
            let q = tilted_frame_to(&target, alpha).unwrap();
            let e_alpha = [alpha.cos(), alpha.sin(), 0.0];
            let image = q.apply(&e_alpha);
            assert!(norm(&crate::linalg::sub(&image, &target)) <= 1e-12);
            assert!(q.matrix().orthogonality_defect() <= 1e-12);
        }
    }

    #[test]
    fn tilted_frame_rejects_dim1_and_bad_alpha() {
        let t1 = UnitVector::basis(1, 0);
        assert!(tilted_frame_to(&t1, 0.5).is_err());
        let t2 = UnitVector::basis(2, 0);
        assert!(tilted_frame_to(&t2, std::f64::consts::PI).is_err());
        assert!(tilted_frame_to(&t2, -0.1).is_err());
    }

    #[test]
    fn ellipse_point_examples() {
        let sqrt2 = std::f64::consts::SQRT_2;
        let a = 1.5;
        let p = ellipse_point_2d([1.0, 0.0], a, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(p[0], 1.0 + sqrt2 * a, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-15);

        let b = 2.5;
        let p0 = ellipse_point_2d([0.0, 0.0], 1.0, b, std::f64::consts::FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(p0[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p0[1], sqrt2 * b, epsilon = 1e-15);

        // x = (3,4): x-hat = (0.6, 0.8), so phi = pi retreats radially.
        let p_pi = ellipse_point_2d([3.0, 4.0], 1.0, 1.0, std::f64::consts::PI).unwrap();
        assert_abs_diff_eq!(p_pi[0], 3.0 - sqrt2 * 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(p_pi[1], 4.0 - sqrt2 * 0.8, epsilon = 1e-12);
    }

    #[test]
    fn ellipse_point_rejects_bad_parameters() {
        assert!(ellipse_point_2d([1.0, 0.0], 0.0, 1.0, 0.0).is_err());
        assert!(ellipse_point_2d([1.0, 0.0], 1.0, -1.0, 0.0).is_err());
        assert!(ellipse_point_2d([1.0, 0.0], 1.0, 1.0, 4.0).is_err());
    }

    proptest! {
        #[test]
        fn frames_stay_orthogonal(raw in proptest::collection::vec(-1.0f64..1.0, 2..7), alpha in 0.0f64..3.1) {
            prop_assume!(norm(&raw) > 1e-3);
            let target = UnitVector::from_direction(&raw).unwrap();
            let q = frame_to(&target);
            prop_assert!(q.matrix().orthogonality_defect() <= 1e-12);
            let image = q.apply(&UnitVector::basis(target.dim(), 0));
            prop_assert!(norm(&crate::linalg::sub(&image, &target)) <= 1e-12);
            let qa = tilted_frame_to(&target, alpha).unwrap();
            prop_assert!(qa.matrix().orthogonality_defect() <= 1e-12);
        }

        #[test]
        fn ellipse_points_satisfy_ellipse_equation(
            x0 in -50.0f64..50.0, x1 in -50.0f64..50.0,
            a in 0.1f64..4.0, b in 0.1f64..4.0,
            phi in -std::f64::consts::PI..=std::f64::consts::PI,
        ) {
            // The parameter interval is half-open at -pi.
            prop_assume!(phi > -std::f64::consts::PI);
            let x = [x0, x1];
            let p = ellipse_point_2d(x, a, b, phi).unwrap();
            let delta = [p[0] - x[0], p[1] - x[1]];
            let xhat = UnitVector::radial_direction(&x);
            let perp = [-xhat[1], xhat[0]];
            let sqrt2 = std::f64::consts::SQRT_2;
            let u = dot(&delta, &xhat) / (sqrt2 * a);
            let v = dot(&delta, &perp) / (sqrt2 * b);
            prop_assert!((u * u + v * v - 1.0).abs() <= 1e-10);
        }
    }
}
