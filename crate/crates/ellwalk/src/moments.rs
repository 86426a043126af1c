//! Closed-form increment moments, the constants `U` and `V`, and the
//! predicted radial moment functions.
//!
//! For the elliptic kernel the limiting covariance along the ray through `u`
//! is `sigma^2(u) = a^2 u u^T + b^2 (I - u u^T)`, which gives the radial
//! variance `U = <u, sigma^2(u) u> = a^2` and total variance
//! `V = trace(sigma^2(u)) = a^2 + (d-1) b^2`; for the tilted kernel
//! `U = a^2 cos^2(alpha) + b^2 sin^2(alpha)` with the same `V`. The radial
//! increment moments then satisfy `2 r mu1(r) -> V - U` and `mu2(r) -> U` as
//! `r -> infinity`; [`exact_radial_moments_quadrature`] evaluates both at
//! finite `r` to quadrature accuracy, serving as the oracle for Monte Carlo
//! estimates.

use crate::error::{Error, Result};
use crate::geometry::{tilted_frame_to, UnitVector};
use crate::kernels::{Kernel, WalkSpec};
use crate::linalg::Matrix;
use crate::quadrature::GaussJacobi;
use serde::{Deserialize, Serialize};

/// A symmetric positive semi-definite matrix of second moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix(Matrix);

impl CovarianceMatrix {
    /// Validates symmetry (1e-12 entrywise) and positive semi-definiteness
    /// (all eigenvalues at least -1e-10).
    pub fn new(m: Matrix) -> Result<Self> {
        let asym = m.symmetry_defect();
        if asym > 1e-12 {
            return Err(Error::BadParameter {
                name: "symmetry defect",
                value: asym,
                requirement: "|m_ij - m_ji| <= 1e-12",
            });
        }
        let eigs = m.symmetric_eigenvalues();
        if let Some(&min) = eigs.first() {
            if min < -1e-10 {
                return Err(Error::BadParameter {
                    name: "smallest eigenvalue",
                    value: min,
                    requirement: ">= -1e-10 (positive semi-definite)",
                });
            }
        }
        Ok(CovarianceMatrix(m))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Quadratic form `<u, M u>`.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        crate::linalg::dot(u, &self.0.mul_vec(u))
    }
}

/// Decay regime of `eps(r)`, the operator-norm gap between the finite-`x`
/// covariance and its limit along rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "delta0", rename_all = "snake_case")]
pub enum EpsDecay {
    /// The covariance equals its limit at every point (built-in kernels).
    IdenticallyZero,
    /// `eps(r) = O(r^-delta0)` for the given `delta0 > 0`.
    PolynomialDecay(f64),
    /// No decay information; the boundary case is then unclassifiable.
    Unknown,
}

/// The limiting radial variance `U` and total variance `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvConstants {
    pub u: f64,
    pub v: f64,
    pub eps_decay: EpsDecay,
}

impl UvConstants {
    /// Validates `0 < U <= V`.
    pub fn new(u: f64, v: f64, eps_decay: EpsDecay) -> Result<Self> {
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::BadParameter { name: "U", value: u, requirement: "0 < U" });
        }
        if !(v >= u && v.is_finite()) {
            return Err(Error::BadParameter {
                name: "V",
                value: v,
                requirement: "U <= V (radial variance cannot exceed total)",
            });
        }
        if let EpsDecay::PolynomialDecay(delta0) = eps_decay {
            if delta0.is_nan() || delta0 <= 0.0 {
                return Err(Error::BadParameter {
                    name: "delta0",
                    value: delta0,
                    requirement: "delta0 > 0",
                });
            }
        }
        Ok(UvConstants { u, v, eps_decay })
    }
}

/// Asymptotic prediction for the radial increment moments at radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialMomentPrediction {
    pub r: f64,
    /// Predicted `E[R_1 - R_0] = (V - U) / (2 r)`.
    pub mu1: f64,
    /// Predicted `E[(R_1 - R_0)^2] = U`.
    pub mu2: f64,
    /// Scale of the neglected correction, `O(r^-delta)` with `delta` taken
    /// as 1 for bounded jumps. Reported as metadata, never added.
    pub error_scale: f64,
}

/// Limiting covariance `sigma^2(u)` of the increment along the ray through
/// `u`, in closed form.
pub fn sigma_sq(u: &UnitVector, spec: &WalkSpec) -> Result<CovarianceMatrix> {
    if u.dim() != spec.dim {
        return Err(Error::DimensionMismatch { left: u.dim(), right: spec.dim });
    }
    let d = spec.dim;
    let (a2, b2) = (spec.a * spec.a, spec.b * spec.b);
    match spec.kernel {
        Kernel::Elliptic | Kernel::Parametrized2d => {
            // a^2 u u^T + b^2 (I - u u^T).
            let m = Matrix::scaled_identity_plus_outer(d, b2, a2 - b2, u, u);
            CovarianceMatrix::new(m)
        }
        Kernel::Tilted => {
            // (1/d) Q^alpha_u D^2 (Q^alpha_u)^T with D = sqrt(d) diag(a, b, ..., b),
            // i.e. b^2 I + (a^2 - b^2) w w^T for w = Q^alpha_u e1.
            let q = tilted_frame_to(u, spec.alpha)?;
            let w: Vec<f64> = (0..d).map(|i| q.matrix().get(i, 0)).collect();
            let m = Matrix::scaled_identity_plus_outer(d, b2, a2 - b2, &w, &w);
            CovarianceMatrix::new(m)
        }
        Kernel::Custom1d(_) => Err(Error::UnsupportedKernel {
            operation: "sigma_sq",
            kernel: spec.kernel.name().into(),
        }),
    }
}

/// The constants `(U, V)` for a built-in kernel. The built-in kernels have
/// position-independent covariance along rays, so `eps(r)` is identically
/// zero and the boundary case `2U = V` is classifiable.
pub fn uv_constants(spec: &WalkSpec) -> Result<UvConstants> {
    spec.validate()?;
    let d = spec.dim as f64;
    let (a2, b2) = (spec.a * spec.a, spec.b * spec.b);
    match spec.kernel {
        Kernel::Elliptic | Kernel::Parametrized2d => {
            UvConstants::new(a2, a2 + (d - 1.0) * b2, EpsDecay::IdenticallyZero)
        }
        Kernel::Tilted => {
            let (sin_a, cos_a) = spec.alpha.sin_cos();
            UvConstants::new(
                a2 * cos_a * cos_a + b2 * sin_a * sin_a,
                a2 + (d - 1.0) * b2,
                EpsDecay::IdenticallyZero,
            )
        }
        Kernel::Custom1d(_) => Err(Error::UnsupportedKernel {
            operation: "uv_constants",
            kernel: spec.kernel.name().into(),
        }),
    }
}

/// Asymptotic radial moment prediction at radius `r`.
pub fn predicted_radial_moments(r: f64, spec: &WalkSpec) -> Result<RadialMomentPrediction> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::BadParameter { name: "r", value: r, requirement: "r > 0" });
    }
    let uv = uv_constants(spec)?;
    Ok(RadialMomentPrediction {
        r,
        mu1: (uv.v - uv.u) / (2.0 * r),
        mu2: uv.u,
        error_scale: 1.0 / r,
    })
}

/// Exact radial increment moments `(mu1(r), mu2(r))` of the elliptic kernel
/// by Gauss-Jacobi quadrature against the sphere marginal.
///
/// The radial law depends on the sphere draw only through `t = <e1, zeta>`,
/// whose density is proportional to `(1 - t^2)^{(d-3)/2}`; the rule with
/// `alpha = beta = (d-3)/2` absorbs it exactly. The radius change is
/// evaluated in the cancellation-free form
/// `g - r = (2 a sqrt(d) r t + (a^2 - b^2) d t^2 + b^2 d) / (g + r)`.
///
/// The reported values use `quad_points` nodes; a rule with half as many
/// nodes provides the error estimate, and disagreement beyond 1e-8 is
/// reported as non-convergence.
pub fn exact_radial_moments_quadrature(
    r: f64,
    spec: &WalkSpec,
    quad_points: usize,
) -> Result<(f64, f64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::BadParameter { name: "r", value: r, requirement: "r > 0" });
    }
    if quad_points < 64 {
        return Err(Error::BadParameter {
            name: "quad_points",
            value: quad_points as f64,
            requirement: "at least 64 nodes",
        });
    }
    match spec.kernel {
        Kernel::Elliptic | Kernel::Parametrized2d => {}
        _ => {
            return Err(Error::UnsupportedKernel {
                operation: "exact_radial_moments_quadrature",
                kernel: spec.kernel.name().into(),
            })
        }
    }
    if spec.dim < 2 {
        return Err(Error::BadDimension { expected: "d >= 2".into(), got: spec.dim });
    }

    let (coarse_mu1, coarse_mu2) = radial_moments_with_rule(r, spec, quad_points / 2)?;
    let (mu1, mu2) = radial_moments_with_rule(r, spec, quad_points)?;
    let est_err = (mu1 - coarse_mu1).abs().max((mu2 - coarse_mu2).abs());
    if est_err > 1e-8 {
        return Err(Error::QuadratureNotConverged { estimated_error: est_err });
    }
    Ok((mu1, mu2))
}

fn radial_moments_with_rule(r: f64, spec: &WalkSpec, n: usize) -> Result<(f64, f64)> {
    let d = spec.dim as f64;
    let lambda = (d - 3.0) / 2.0;
    let rule = GaussJacobi::new(n, lambda, lambda)?;
    let (a, b) = (spec.a, spec.b);
    let radius_change = |t: f64| {
        let u = 2.0 * a * d.sqrt() * r * t + (a * a - b * b) * d * t * t + b * b * d;
        let m = r + a * d.sqrt() * t;
        let g = (m * m + b * b * d * (1.0 - t * t)).sqrt();
        u / (g + r)
    };
    let mu1 = rule.expectation(radius_change);
    let mu2 = rule.expectation(|t| {
        let h = radius_change(t);
        h * h
    });
    Ok((mu1, mu2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_unit_sphere;
    use crate::rng::RngStream;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn sigma_sq_standard_frame_is_diagonal() {
        let spec = WalkSpec::elliptic(2, 1.0, 2.0).unwrap();
        let m = sigma_sq(&UnitVector::basis(2, 0), &spec).unwrap();
        assert_eq!(m.matrix().get(0, 0), 1.0);
        assert_eq!(m.matrix().get(1, 1), 4.0);
        assert_eq!(m.matrix().get(0, 1), 0.0);
        assert_eq!(m.matrix().get(1, 0), 0.0);
    }

    #[test]
    fn sigma_sq_isotropic_when_axes_equal() {
        let spec = WalkSpec::elliptic(3, 1.5, 1.5).unwrap();
        let mut rng = RngStream::new(1, 0);
        let u = sample_unit_sphere(3, &mut rng).unwrap();
        let m = sigma_sq(&u, &spec).unwrap();
        let want = Matrix::identity(3).scale(2.25);
        assert!(m.matrix().max_abs_diff(&want) <= 1e-12);
    }

    #[test]
    fn sigma_sq_hand_expanded_example() {
        // d = 3, u = (1,1,1)/sqrt(3), a = 2, b = 1:
        // b^2 I + (a^2 - b^2) u u^T has diagonal 2 and off-diagonal 1.
        let spec = WalkSpec::elliptic(3, 2.0, 1.0).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let u = UnitVector::new(vec![s, s, s]).unwrap();
        let m = sigma_sq(&u, &spec).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 } else { 1.0 };
                assert_abs_diff_eq!(m.matrix().get(i, j), want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sigma_sq_rejects_custom_kernel() {
        let spec = WalkSpec::custom_1d(crate::kernels::Custom1dParams::default()).unwrap();
        assert!(sigma_sq(&UnitVector::basis(1, 0), &spec).is_err());
        assert!(uv_constants(&spec).is_err());
    }

    #[test]
    fn sigma_sq_eigenvalues_are_axes_squared() {
        let spec = WalkSpec::elliptic(4, 2.0, 0.5).unwrap();
        let mut rng = RngStream::new(2, 0);
        let u = sample_unit_sphere(4, &mut rng).unwrap();
        let eigs = sigma_sq(&u, &spec).unwrap().matrix().symmetric_eigenvalues();
        assert_abs_diff_eq!(eigs[0], 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(eigs[1], 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(eigs[2], 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(eigs[3], 4.0, epsilon = 1e-10);
    }

    #[test]
    fn uv_constants_examples() {
        let uv = uv_constants(&WalkSpec::elliptic(2, 1.0, 2.0).unwrap()).unwrap();
        assert_eq!((uv.u, uv.v), (1.0, 5.0));
        assert_eq!(uv.eps_decay, EpsDecay::IdenticallyZero);

        let uv = uv_constants(&WalkSpec::elliptic(4, 1.5, 1.5).unwrap()).unwrap();
        assert_eq!((uv.u, uv.v), (2.25, 9.0));

        // Tilt by pi/2 swaps the roles of a and b in the radial variance.
        let uv = uv_constants(&WalkSpec::tilted(2, 2.0, 1.0, std::f64::consts::FRAC_PI_2).unwrap())
            .unwrap();
        assert_abs_diff_eq!(uv.u, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(uv.v, 5.0, epsilon = 1e-15);
    }

    #[test]
    fn uv_constants_rejects_degenerate() {
        assert!(UvConstants::new(0.0, 1.0, EpsDecay::Unknown).is_err());
        assert!(UvConstants::new(2.0, 1.0, EpsDecay::Unknown).is_err());
        assert!(UvConstants::new(1.0, 2.0, EpsDecay::PolynomialDecay(0.0)).is_err());
        assert!(UvConstants::new(1.0, 1.0, EpsDecay::Unknown).is_ok()); // U = V allowed
    }

    #[test]
    fn predicted_radial_moments_examples() {
        let spec = WalkSpec::elliptic(2, 1.0, 2.0).unwrap();
        let p = predicted_radial_moments(100.0, &spec).unwrap();
        assert_abs_diff_eq!(p.mu1, 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(p.mu2, 1.0, epsilon = 1e-15);

        let iso = WalkSpec::elliptic(2, 1.0, 1.0).unwrap();
        let p = predicted_radial_moments(10.0, &iso).unwrap();
        assert_abs_diff_eq!(p.mu1, 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(p.mu2, 1.0, epsilon = 1e-15);

        // mu1 scales as 1/r; mu2 does not move.
        let p1 = predicted_radial_moments(7.0, &spec).unwrap();
        let p10 = predicted_radial_moments(70.0, &spec).unwrap();
        assert_abs_diff_eq!(p1.mu1 / p10.mu1, 10.0, epsilon = 1e-12);
        assert_eq!(p1.mu2, p10.mu2);
    }

    #[test]
    fn quadrature_moments_approach_limits() {
        let spec = WalkSpec::elliptic(2, 1.0, 2.0).unwrap();
        let (mu1, mu2) = exact_radial_moments_quadrature(1e4, &spec, 128).unwrap();
        assert!((mu2 - 1.0).abs() <= 1e-3, "mu2(1e4) = {mu2}");
        assert!((2.0 * 1e4 * mu1 - 4.0).abs() <= 1e-2, "2 r mu1(1e4) = {}", 2.0 * 1e4 * mu1);
    }

    #[test]
    fn quadrature_error_decays_along_radius_grid() {
        // |2 r mu1 - (V-U)| and |mu2 - U| must shrink by at least 5x per
        // decade of r.
        let spec = WalkSpec::elliptic(3, 2.0, 1.0).unwrap();
        let uv = uv_constants(&spec).unwrap();
        let mut err1 = Vec::new();
        let mut err2 = Vec::new();
        for r in [10.0, 100.0, 1000.0, 10000.0] {
            let (mu1, mu2) = exact_radial_moments_quadrature(r, &spec, 128).unwrap();
            err1.push((2.0 * r * mu1 - (uv.v - uv.u)).abs());
            err2.push((mu2 - uv.u).abs());
        }
        for errs in [&err1, &err2] {
            for pair in errs.windows(2) {
                assert!(
                    pair[1] <= 0.2 * pair[0],
                    "error did not decay: {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn quadrature_agrees_with_elementary_rules() {
        // Independent integration routes, plain formulas throughout.
        let change = |r: f64, d: f64, a: f64, b: f64, t: f64| {
            (r * r + 2.0 * a * d.sqrt() * r * t + (a * a - b * b) * d * t * t + b * b * d).sqrt()
                - r
        };

        // d = 3: the sphere marginal is flat on [-1, 1], so composite
        // Simpson against the bare integrand is a second oracle.
        let spec = WalkSpec::elliptic(3, 2.0, 1.0).unwrap();
        for r in [5.0, 50.0] {
            let (mu1, mu2) = exact_radial_moments_quadrature(r, &spec, 128).unwrap();
            let simpson = |f: &dyn Fn(f64) -> f64| {
                let n = 4000usize;
                let dt = 2.0 / n as f64;
                let mut acc = f(-1.0) + f(1.0);
                for k in 1..n {
                    let t = -1.0 + k as f64 * dt;
                    acc += f(t) * if k % 2 == 1 { 4.0 } else { 2.0 };
                }
                acc * dt / 3.0
            };
            let h = |t: f64| change(r, 3.0, 2.0, 1.0, t);
            assert_abs_diff_eq!(mu1, simpson(&h) / 2.0, epsilon = 1e-9);
            assert_abs_diff_eq!(mu2, simpson(&|t| h(t) * h(t)) / 2.0, epsilon = 1e-9);
        }

        // d = 2: substituting t = cos(theta) removes the endpoint weight and
        // leaves a smooth periodic integrand, where the trapezoid rule
        // converges spectrally.
        let spec2 = WalkSpec::elliptic(2, 1.0, 2.0).unwrap();
        for r in [5.0, 50.0] {
            let (mu1, mu2) = exact_radial_moments_quadrature(r, &spec2, 128).unwrap();
            let trapezoid = |f: &dyn Fn(f64) -> f64| {
                let n = 2000usize;
                let dth = std::f64::consts::PI / n as f64;
                let mut acc = 0.5 * (f(0.0) + f(std::f64::consts::PI));
                for k in 1..n {
                    acc += f(k as f64 * dth);
                }
                acc * dth / std::f64::consts::PI
            };
            let h = |theta: f64| change(r, 2.0, 1.0, 2.0, theta.cos());
            assert_abs_diff_eq!(mu1, trapezoid(&h), epsilon = 1e-9);
            assert_abs_diff_eq!(mu2, trapezoid(&|th| h(th) * h(th)), epsilon = 1e-9);
        }
    }

    #[test]
    fn quadrature_rejects_bad_arguments() {
        let spec = WalkSpec::elliptic(2, 1.0, 2.0).unwrap();
        assert!(exact_radial_moments_quadrature(0.0, &spec, 128).is_err());
        assert!(exact_radial_moments_quadrature(10.0, &spec, 32).is_err());
        let tilted = WalkSpec::tilted(2, 1.0, 2.0, 0.3).unwrap();
        assert!(exact_radial_moments_quadrature(10.0, &tilted, 128).is_err());
    }

    #[test]
    fn covariance_matrix_rejects_asymmetric_and_indefinite() {
        let mut m = Matrix::identity(2);
        m.set(0, 1, 0.5);
        assert!(CovarianceMatrix::new(m).is_err());
        let mut neg = Matrix::identity(2);
        neg.set(0, 0, -1.0);
        assert!(CovarianceMatrix::new(neg).is_err());
        // Rounding-level negative eigenvalues stay within the tolerance.
        let mut near = Matrix::zeros(2);
        near.set(0, 0, 1e-12);
        near.set(1, 1, -1e-12);
        assert!(CovarianceMatrix::new(near).is_ok());
    }

    proptest! {
        #[test]
        fn trace_and_radial_form_match_uv(
            raw in proptest::collection::vec(-1.0f64..1.0, 2..6),
            a in 0.2f64..3.0,
            b in 0.2f64..3.0,
            alpha in 0.0f64..3.1,
        ) {
            prop_assume!(crate::linalg::norm(&raw) > 1e-3);
            let u = UnitVector::from_direction(&raw).unwrap();
            let dim = u.dim();
            for spec in [
                WalkSpec::elliptic(dim, a, b).unwrap(),
                WalkSpec::tilted(dim, a, b, alpha).unwrap(),
            ] {
                let uv = uv_constants(&spec).unwrap();
                let m = sigma_sq(&u, &spec).unwrap();
                prop_assert!((m.trace() - uv.v).abs() <= 1e-12 * uv.v.max(1.0));
                prop_assert!((m.quadratic_form(&u) - uv.u).abs() <= 1e-12 * uv.v.max(1.0));
            }
        }

        #[test]
        fn sigma_and_uv_scale_quadratically(
            a in 0.2f64..2.0,
            b in 0.2f64..2.0,
            lambda_pow in -2i32..3,
        ) {
            // Powers of two scale without rounding, so equality is exact.
            let lambda = 2.0f64.powi(lambda_pow);
            let u = UnitVector::basis(3, 0);
            let spec = WalkSpec::elliptic(3, a, b).unwrap();
            let scaled = WalkSpec::elliptic(3, lambda * a, lambda * b).unwrap();
            let m = sigma_sq(&u, &spec).unwrap().matrix().scale(lambda * lambda);
            let ms = sigma_sq(&u, &scaled).unwrap();
            prop_assert!(ms.matrix().max_abs_diff(&m) == 0.0);
            let uv = uv_constants(&spec).unwrap();
            let uvs = uv_constants(&scaled).unwrap();
            prop_assert!(uvs.u == lambda * lambda * uv.u);
            prop_assert!(uvs.v == lambda * lambda * uv.v);
        }
    }
}
