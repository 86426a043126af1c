//! Gauss-Jacobi quadrature for integrals against the weight
//! `(1 - t)^alpha (1 + t)^beta` on [-1, 1].
//!
//! The radial increment moments of the walk are 1-D integrals against the
//! first-coordinate marginal of the uniform sphere distribution, whose
//! density is proportional to `(1 - t^2)^{(d-3)/2}`. Choosing
//! `alpha = beta = (d-3)/2` absorbs that weight exactly, including the
//! endpoint singularities that appear at `d = 2`.
//!
//! Nodes and weights come from the Golub-Welsch algorithm: eigenvalues of the
//! symmetric tridiagonal recurrence matrix, with weights read off the first
//! eigenvector components accumulated during the implicit-shift QL sweep.

use crate::error::{Error, Result};

/// A fixed Gauss-Jacobi rule.
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussJacobi {
    /// Builds an `n`-point rule for the weight `(1-t)^alpha (1+t)^beta`.
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadParameter {
                name: "quad_points",
                value: n as f64,
                requirement: "at least 2 nodes",
            });
        }
        if !(alpha > -1.0 && alpha.is_finite()) {
            return Err(Error::BadParameter {
                name: "alpha",
                value: alpha,
                requirement: "alpha > -1",
            });
        }
        if !(beta > -1.0 && beta.is_finite()) {
            return Err(Error::BadParameter { name: "beta", value: beta, requirement: "beta > -1" });
        }

        // Monic Jacobi recurrence coefficients.
        let ab = alpha + beta;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n]; // off[k] couples k-1 and k, off[0] unused
        diag[0] = (beta - alpha) / (ab + 2.0);
        for k in 1..n {
            let kf = k as f64;
            let denom = 2.0 * kf + ab;
            diag[k] = (beta * beta - alpha * alpha) / (denom * (denom + 2.0));
            let b2 = if k == 1 {
                4.0 * (alpha + 1.0) * (beta + 1.0) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0))
            } else {
                4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab)
                    / (denom * denom * (denom + 1.0) * (denom - 1.0))
            };
            off[k] = b2.sqrt();
        }

        // First row of the eigenvector matrix, accumulated alongside QL.
        let mut z = vec![0.0; n];
        z[0] = 1.0;
        tridiag_ql(&mut diag, &mut off, &mut z)?;

        // Total mass of the weight: 2^(a+b+1) * B(a+1, b+1).
        let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_beta(alpha + 1.0, beta + 1.0)).exp();

        let mut pairs: Vec<(f64, f64)> =
            diag.iter().zip(&z).map(|(&x, &zi)| (x, mu0 * zi * zi)).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(GaussJacobi { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `w(t) f(t)` over [-1, 1].
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Total weight mass, i.e. the integral of the bare weight function.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Expectation of `f` under the normalized weight.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.integrate(f) / self.total_weight()
    }
}

/// Implicit-shift QL for a symmetric tridiagonal matrix.
///
/// `diag` holds the diagonal; `off[1..]` the subdiagonal. On return `diag`
/// holds the eigenvalues (unordered) and `z` the corresponding entries of
/// one accumulated eigenvector row (initialize `z = e1` to obtain first
/// components).
fn tridiag_ql(diag: &mut [f64], off: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 1 {
        return Ok(());
    }
    // Shift the subdiagonal so off[i] couples i and i+1.
    for i in 1..n {
        off[i - 1] = off[i];
    }
    off[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::QuadratureNotConverged { estimated_error: off[l].abs() });
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut broke_early = false;
            for i in (l..m).rev() {
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    broke_early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                // Accumulate the tracked eigenvector row.
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if broke_early {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

/// Natural log of the gamma function for positive arguments (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    assert!(x > 0.0, "ln_gamma requires a positive argument");
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Natural log of the beta function `B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}
