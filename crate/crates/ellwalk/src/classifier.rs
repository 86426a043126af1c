//! Exact recurrence/transience verdicts.
//!
//! For a zero-drift walk whose covariance stabilizes along rays with radial
//! variance `U` and total variance `V`, the walk is transient when `2U < V`
//! and recurrent when `2U > V`; the boundary `2U = V` is recurrent provided
//! the covariance converges to its limit at a polynomial rate (and in
//! particular when it is exactly constant along rays, as for the built-in
//! kernels). In one dimension, bounded-moment zero-drift walks are recurrent
//! outright, spatially homogeneous or not.

use crate::error::{Error, Result};
use crate::kernels::WalkSpec;
use crate::moments::{uv_constants, EpsDecay, UvConstants};
use serde::{Deserialize, Serialize};

/// Relative tolerance on `2U - V` below which the walk counts as critical.
pub const CRITICAL_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Transient,
    Recurrent,
    /// Recurrent with `2U = V`; recurrence here additionally needs the
    /// covariance to settle at a polynomial rate, which built-in kernels do.
    CriticalRecurrent,
    /// The boundary case without decay information: no verdict applies.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionUsed {
    TheoremUV,
    CorollaryElliptic,
    TiltedCriterion,
    OneDimensional,
}

/// A classification together with its `(U, V)` evidence.
///
/// The one-dimensional criterion involves no `(U, V)` pair, so the evidence
/// fields are optional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    #[serde(rename = "U", skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(rename = "V", skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    /// Signed margin `2U - V`; callers near the boundary can judge
    /// sensitivity from it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub criterion_used: CriterionUsed,
}

impl Verdict {
    /// Both plain and critical recurrence satisfy the recurrence definition;
    /// the split is informational.
    pub fn is_recurrent(&self) -> bool {
        matches!(self.kind, VerdictKind::Recurrent | VerdictKind::CriticalRecurrent)
    }

    pub fn is_definite(&self) -> bool {
        self.kind != VerdictKind::Indeterminate
    }
}

/// Classifies from the constants `(U, V)` directly.
///
/// `2U < V` is transient, `2U > V` recurrent. Equality (within relative
/// tolerance 1e-12) is critically recurrent when the covariance decay is
/// known to be at least polynomial, and indeterminate when it is unknown —
/// the boundary verdict genuinely requires the decay hypothesis.
pub fn classify_uv(uv: &UvConstants) -> Verdict {
    classify_uv_as(uv, CriterionUsed::TheoremUV)
}

fn classify_uv_as(uv: &UvConstants, criterion_used: CriterionUsed) -> Verdict {
    let margin = 2.0 * uv.u - uv.v;
    let scale = (2.0 * uv.u).max(uv.v);
    let kind = if margin.abs() <= CRITICAL_REL_TOL * scale {
        match uv.eps_decay {
            EpsDecay::IdenticallyZero | EpsDecay::PolynomialDecay(_) => {
                VerdictKind::CriticalRecurrent
            }
            EpsDecay::Unknown => VerdictKind::Indeterminate,
        }
    } else if margin < 0.0 {
        VerdictKind::Transient
    } else {
        VerdictKind::Recurrent
    };
    Verdict { kind, u: Some(uv.u), v: Some(uv.v), margin: Some(margin), criterion_used }
}

/// Classifies the elliptic walk: transient exactly when `a^2 < (d-1) b^2`,
/// recurrent otherwise, critically so on the boundary. `dim = 1` is
/// redirected to the one-dimensional criterion (the 1-D elliptic walk is a
/// bounded two-point walk, so its hypotheses hold).
pub fn classify_elliptic(dim: usize, a: f64, b: f64) -> Result<Verdict> {
    if dim == 0 {
        return Err(Error::BadDimension { expected: "d >= 1".into(), got: 0 });
    }
    if dim == 1 {
        crate::geometry::check_positive("a", a)?;
        crate::geometry::check_positive("b", b)?;
        return Ok(classify_1d(true));
    }
    let spec = WalkSpec::elliptic(dim, a, b)?;
    Ok(classify_uv_as(&uv_constants(&spec)?, CriterionUsed::CorollaryElliptic))
}

/// Classifies the tilted walk: transient exactly when
/// `(a^2 - b^2) cos(2 alpha) < (d - 2) b^2`, which is the criterion
/// `2U < V` with `U = a^2 cos^2(alpha) + b^2 sin^2(alpha)`.
pub fn classify_tilted(dim: usize, a: f64, b: f64, alpha: f64) -> Result<Verdict> {
    let spec = WalkSpec::tilted(dim, a, b, alpha)?;
    Ok(classify_uv_as(&uv_constants(&spec)?, CriterionUsed::TiltedCriterion))
}

/// One-dimensional verdict: any walk with bounded p-th moments (p > 2),
/// zero drift, and a uniform variance floor is recurrent. Without those
/// hypotheses no verdict applies — heavy-tailed oscillating walks can be
/// transient even with zero median drift.
pub fn classify_1d(assumptions_ok: bool) -> Verdict {
    Verdict {
        kind: if assumptions_ok { VerdictKind::Recurrent } else { VerdictKind::Indeterminate },
        u: None,
        v: None,
        margin: None,
        criterion_used: CriterionUsed::OneDimensional,
    }
}

/// Classifies a walk spec with the most specific applicable criterion.
pub fn classify_spec(spec: &WalkSpec) -> Result<Verdict> {
    spec.validate()?;
    match &spec.kernel {
        crate::kernels::Kernel::Elliptic | crate::kernels::Kernel::Parametrized2d => {
            classify_elliptic(spec.dim, spec.a, spec.b)
        }
        crate::kernels::Kernel::Tilted => classify_tilted(spec.dim, spec.a, spec.b, spec.alpha),
        crate::kernels::Kernel::Custom1d(params) => {
            Ok(classify_1d(params.variance_floor() > 0.0))
        }
    }
}
