//! Single-step increment laws and full-trajectory simulation.
//!
//! Four kernels are built in:
//!
//! * `Elliptic` — the d-dimensional elliptic walk. The increment at `x` is
//!   `b*sqrt(d)*zeta + (a-b)*sqrt(d)*xhat*<xhat, zeta>` for `zeta` uniform on
//!   the sphere, which places it on an ellipsoid with radial semi-axis
//!   `a*sqrt(d)` and transverse semi-axes `b*sqrt(d)`.
//! * `Parametrized2d` — the planar walk whose next position is drawn
//!   "uniformly in parameter" on the ellipse centred at the current position;
//!   distributionally the d = 2 elliptic walk.
//! * `Tilted` — as `Elliptic`, but the distinguished axis makes a fixed angle
//!   `alpha` with the radial direction.
//! * `Custom1d` — a user-configurable 1-D kernel with a finitely supported,
//!   zero-mean jump law on each half-line; the default jumps `+-1` on
//!   `x >= 0` and `+-2` on `x < 0`.

use crate::error::{Error, Result};
use crate::geometry::{
    check_positive, ellipse_point_2d, sample_sphere_into, tilted_frame_to, UnitVector,
};
use crate::linalg::{dot, norm};
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};

/// Which single-step law drives the walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Kernel {
    Elliptic,
    Parametrized2d,
    Tilted,
    Custom1d(Custom1dParams),
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Elliptic => "elliptic",
            Kernel::Parametrized2d => "parametrized2d",
            Kernel::Tilted => "tilted",
            Kernel::Custom1d(_) => "custom1d",
        }
    }
}

/// A finitely supported jump law: pairs of (jump, probability).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpLaw {
    atoms: Vec<(f64, f64)>,
}

impl JumpLaw {
    /// Validates that probabilities are positive and sum to one, the law has
    /// zero mean, and its variance is nonzero.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::BadJumpLaw("no atoms".into()));
        }
        let mut total = 0.0;
        let mut mean = 0.0;
        let mut second = 0.0;
        for &(jump, prob) in &atoms {
            if !jump.is_finite() {
                return Err(Error::BadJumpLaw(format!("non-finite jump {jump}")));
            }
            if !(prob > 0.0 && prob <= 1.0) {
                return Err(Error::BadJumpLaw(format!("probability {prob} outside (0, 1]")));
            }
            total += prob;
            mean += prob * jump;
            second += prob * jump * jump;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadJumpLaw(format!("probabilities sum to {total}, not 1")));
        }
        if mean.abs() > 1e-12 {
            return Err(Error::BadJumpLaw(format!("law has mean {mean}, not 0")));
        }
        if second <= 0.0 {
            return Err(Error::BadJumpLaw("law has zero variance".into()));
        }
        Ok(JumpLaw { atoms })
    }

    /// Symmetric two-point law `+-magnitude` with probability 1/2 each.
    pub fn symmetric_two_point(magnitude: f64) -> Result<Self> {
        check_positive("jump magnitude", magnitude)?;
        JumpLaw::new(vec![(magnitude, 0.5), (-magnitude, 0.5)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Second moment `E[J^2]` (equals the variance; the mean is zero).
    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|&(j, p)| p * j * j).sum()
    }

    pub fn max_abs_jump(&self) -> f64 {
        self.atoms.iter().map(|&(j, _)| j.abs()).fold(0.0, f64::max)
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let u = rng.uniform01();
        let mut acc = 0.0;
        for &(jump, prob) in &self.atoms {
            acc += prob;
            if u < acc {
                return jump;
            }
        }
        // Rounding can leave acc marginally below 1; fall back to the last atom.
        self.atoms.last().unwrap().0
    }
}

/// Spatially non-homogeneous 1-D jump laws, one per half-line.
///
/// The default is deliberately non-homogeneous (`+-1` on the nonnegative
/// half-line, `+-2` on the negative one) so that 1-D recurrence is exercised
/// away from the spatially homogeneous case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Custom1dParams {
    nonneg: JumpLaw,
    neg: JumpLaw,
}

impl Custom1dParams {
    pub fn new(nonneg: JumpLaw, neg: JumpLaw) -> Self {
        Custom1dParams { nonneg, neg }
    }

    /// Jump law in force at position `x`.
    pub fn law_at(&self, x: f64) -> &JumpLaw {
        if x >= 0.0 {
            &self.nonneg
        } else {
            &self.neg
        }
    }

    /// Uniform lower bound on `E[J^2]` over all positions.
    pub fn variance_floor(&self) -> f64 {
        self.nonneg.second_moment().min(self.neg.second_moment())
    }

    pub fn max_abs_jump(&self) -> f64 {
        self.nonneg.max_abs_jump().max(self.neg.max_abs_jump())
    }
}

impl Default for Custom1dParams {
    fn default() -> Self {
        Custom1dParams {
            nonneg: JumpLaw::symmetric_two_point(1.0).unwrap(),
            neg: JumpLaw::symmetric_two_point(2.0).unwrap(),
        }
    }
}

/// Full parametrization of a walk model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    pub dim: usize,
    /// Radial semi-axis scale.
    pub a: f64,
    /// Transverse semi-axis scale.
    pub b: f64,
    /// Tilt angle in [0, pi); only the tilted kernel uses it.
    #[serde(default)]
    pub alpha: f64,
    pub kernel: Kernel,
}

impl WalkSpec {
    pub fn elliptic(dim: usize, a: f64, b: f64) -> Result<Self> {
        WalkSpec { dim, a, b, alpha: 0.0, kernel: Kernel::Elliptic }.validated()
    }

    pub fn parametrized_2d(a: f64, b: f64) -> Result<Self> {
        WalkSpec { dim: 2, a, b, alpha: 0.0, kernel: Kernel::Parametrized2d }.validated()
    }

    pub fn tilted(dim: usize, a: f64, b: f64, alpha: f64) -> Result<Self> {
        WalkSpec { dim, a, b, alpha, kernel: Kernel::Tilted }.validated()
    }

    pub fn custom_1d(params: Custom1dParams) -> Result<Self> {
        WalkSpec { dim: 1, a: 1.0, b: 1.0, alpha: 0.0, kernel: Kernel::Custom1d(params) }
            .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::BadDimension { expected: "d >= 1".into(), got: 0 });
        }
        check_positive("a", self.a)?;
        check_positive("b", self.b)?;
        if !(0.0..std::f64::consts::PI).contains(&self.alpha) {
            return Err(Error::BadParameter {
                name: "alpha",
                value: self.alpha,
                requirement: "alpha in [0, pi)",
            });
        }
        match &self.kernel {
            Kernel::Elliptic => {}
            Kernel::Parametrized2d => {
                if self.dim != 2 {
                    return Err(Error::BadSpec(format!(
                        "parametrized2d requires dim = 2, got {}",
                        self.dim
                    )));
                }
            }
            Kernel::Tilted => {
                if self.dim < 2 {
                    return Err(Error::BadSpec(format!(
                        "tilted requires dim >= 2, got {}",
                        self.dim
                    )));
                }
            }
            Kernel::Custom1d(_) => {
                if self.dim != 1 {
                    return Err(Error::BadSpec(format!(
                        "custom1d requires dim = 1, got {}",
                        self.dim
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_kernel(&self, operation: &'static str, want: &str) -> Result<()> {
        if self.kernel.name() == want {
            Ok(())
        } else {
            Err(Error::UnsupportedKernel { operation, kernel: self.kernel.name().into() })
        }
    }

    /// Exact upper bound on the increment norm, where one exists.
    pub fn jump_bound(&self) -> f64 {
        let d = self.dim as f64;
        match &self.kernel {
            Kernel::Elliptic | Kernel::Tilted => d.sqrt() * self.a.max(self.b),
            Kernel::Parametrized2d => std::f64::consts::SQRT_2 * self.a.max(self.b),
            Kernel::Custom1d(params) => params.max_abs_jump(),
        }
    }
}

/// Increment of the elliptic kernel written into `out`:
/// `b*sqrt(d)*zeta + (a-b)*sqrt(d)*xhat*<xhat, zeta>`, with `xhat = e1` at
/// the origin. Shared by the public step function and the fast walker so
/// that both produce bit-identical positions.
fn elliptic_increment_into(x: &[f64], a: f64, b: f64, zeta: &[f64], out: &mut [f64]) {
    let d = x.len() as f64;
    let iso = b * d.sqrt();
    let rad = (a - b) * d.sqrt();
    let r = norm(x);
    if r == 0.0 {
        let t = zeta[0];
        for (i, o) in out.iter_mut().enumerate() {
            *o = iso * zeta[i];
        }
        out[0] += rad * t;
    } else {
        let t = dot(x, zeta) / r;
        for (i, o) in out.iter_mut().enumerate() {
            *o = iso * zeta[i] + rad * (x[i] / r) * t;
        }
    }
}

/// One step of the elliptic kernel from `x` driven by the sphere draw `zeta`.
pub fn elliptic_step(x: &[f64], spec: &WalkSpec, zeta: &UnitVector) -> Result<Vec<f64>> {
    spec.check_kernel("elliptic_step", "elliptic")?;
    if x.len() != spec.dim || zeta.dim() != spec.dim {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: if zeta.dim() != spec.dim { zeta.dim() } else { spec.dim },
        });
    }
    let mut inc = vec![0.0; x.len()];
    elliptic_increment_into(x, spec.a, spec.b, zeta, &mut inc);
    Ok(x.iter().zip(&inc).map(|(xi, di)| xi + di).collect())
}

/// One step of the tilted kernel: `x + Q^alpha_xhat * D * zeta` with
/// `D = sqrt(d) * diag(a, b, ..., b)`.
pub fn tilted_step(x: &[f64], spec: &WalkSpec, zeta: &UnitVector) -> Result<Vec<f64>> {
    spec.check_kernel("tilted_step", "tilted")?;
    if x.len() != spec.dim || zeta.dim() != spec.dim {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: if zeta.dim() != spec.dim { zeta.dim() } else { spec.dim },
        });
    }
    let d = spec.dim as f64;
    let frame = tilted_frame_to(&UnitVector::radial_direction(x), spec.alpha)?;
    let mut scaled: Vec<f64> = zeta.iter().map(|z| d.sqrt() * spec.b * z).collect();
    scaled[0] = d.sqrt() * spec.a * zeta[0];
    let inc = frame.apply(&scaled);
    Ok(x.iter().zip(&inc).map(|(xi, di)| xi + di).collect())
}

/// One step of the planar parametrized kernel at ellipse parameter `phi`.
pub fn parametrized_2d_step(x: &[f64], spec: &WalkSpec, phi: f64) -> Result<[f64; 2]> {
    spec.check_kernel("parametrized_2d_step", "parametrized2d")?;
    if x.len() != 2 {
        return Err(Error::DimensionMismatch { left: x.len(), right: 2 });
    }
    ellipse_point_2d([x[0], x[1]], spec.a, spec.b, phi)
}

/// One step of a custom 1-D kernel.
pub fn custom_1d_step(x: f64, params: &Custom1dParams, rng: &mut RngStream) -> f64 {
    x + params.law_at(x).sample(rng)
}

/// Radius after one elliptic step, given the radial driver `t = <xhat, zeta>`.
///
/// Computed in the grouped form `(r + a*sqrt(d)*t)^2 + b^2*d*(1 - t^2)`,
/// which is algebraically identical to
/// `r^2 + 2a*sqrt(d)*r*t + (a^2-b^2)*d*t^2 + b^2*d` and never goes negative
/// under rounding.
pub fn radial_step(r: f64, spec: &WalkSpec, t: f64) -> Result<f64> {
    match spec.kernel {
        Kernel::Elliptic | Kernel::Parametrized2d => {}
        _ => {
            return Err(Error::UnsupportedKernel {
                operation: "radial_step",
                kernel: spec.kernel.name().into(),
            })
        }
    }
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::BadParameter { name: "t", value: t, requirement: "|t| <= 1" });
    }
    if r.is_nan() || r < 0.0 {
        return Err(Error::BadParameter { name: "r", value: r, requirement: "r >= 0" });
    }
    Ok(radial_next(r, spec.dim as f64, spec.a, spec.b, t))
}

#[inline]
fn radial_next(r: f64, d: f64, a: f64, b: f64, t: f64) -> f64 {
    let m = r + a * d.sqrt() * t;
    (m * m + b * b * d * (1.0 - t * t)).sqrt()
}

/// Radius after one tilted step, given the first two sphere coordinates.
pub fn tilted_radial_step(r: f64, spec: &WalkSpec, t1: f64, t2: f64) -> Result<f64> {
    spec.check_kernel("tilted_radial_step", "tilted")?;
    if t1 * t1 + t2 * t2 > 1.0 + 1e-12 {
        return Err(Error::BadParameter {
            name: "t1^2 + t2^2",
            value: t1 * t1 + t2 * t2,
            requirement: "t1^2 + t2^2 <= 1",
        });
    }
    let (sin_a, cos_a) = spec.alpha.sin_cos();
    Ok(tilted_radial_next(r, spec.dim as f64, spec.a, spec.b, sin_a, cos_a, t1, t2))
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn tilted_radial_next(r: f64, d: f64, a: f64, b: f64, sin_a: f64, cos_a: f64, t1: f64, t2: f64) -> f64 {
    let rsq = r * r
        + 2.0 * d.sqrt() * r * (a * t1 * cos_a + b * t2 * sin_a)
        + (a * a - b * b) * d * t1 * t1
        + b * b * d;
    rsq.max(0.0).sqrt()
}

/// A walk in full d-dimensional state with reusable scratch buffers.
pub struct Walker {
    spec: WalkSpec,
    pos: Vec<f64>,
    zeta: Vec<f64>,
    inc: Vec<f64>,
    steps_taken: usize,
}

impl Walker {
    pub fn new(spec: &WalkSpec, start: &[f64]) -> Result<Self> {
        spec.validate()?;
        if start.len() != spec.dim {
            return Err(Error::DimensionMismatch { left: start.len(), right: spec.dim });
        }
        if start.iter().any(|c| !c.is_finite()) {
            return Err(Error::BadParameter {
                name: "start",
                value: f64::NAN,
                requirement: "all coordinates finite",
            });
        }
        Ok(Walker {
            spec: spec.clone(),
            pos: start.to_vec(),
            zeta: vec![0.0; spec.dim],
            inc: vec![0.0; spec.dim],
            steps_taken: 0,
        })
    }

    pub fn position(&self) -> &[f64] {
        &self.pos
    }

    pub fn radius(&self) -> f64 {
        norm(&self.pos)
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// Moves the walker back to `start` without touching the RNG; used for
    /// repeated one-step draws from a fixed position.
    pub fn reset_to(&mut self, start: &[f64]) {
        assert_eq!(start.len(), self.pos.len());
        self.pos.copy_from_slice(start);
    }

    /// Advances one step in place. Reports overflow instead of saturating.
    pub fn advance(&mut self, rng: &mut RngStream) -> Result<()> {
        match &self.spec.kernel {
            Kernel::Elliptic => {
                sample_sphere_into(&mut self.zeta, rng);
                elliptic_increment_into(&self.pos, self.spec.a, self.spec.b, &self.zeta, &mut self.inc);
                for (p, d) in self.pos.iter_mut().zip(&self.inc) {
                    *p += d;
                }
            }
            Kernel::Parametrized2d => {
                let phi = rng.uniform_angle();
                let next = parametrized_2d_step(&self.pos, &self.spec, phi)?;
                self.pos.copy_from_slice(&next);
            }
            Kernel::Tilted => {
                sample_sphere_into(&mut self.zeta, rng);
                let zeta = UnitVector::new_unchecked(self.zeta.clone());
                let next = tilted_step(&self.pos, &self.spec, &zeta)?;
                self.pos.copy_from_slice(&next);
            }
            Kernel::Custom1d(params) => {
                self.pos[0] = custom_1d_step(self.pos[0], params, rng);
            }
        }
        self.steps_taken += 1;
        if self.pos.iter().any(|c| !c.is_finite()) {
            return Err(Error::Overflow { step: self.steps_taken });
        }
        Ok(())
    }
}

/// The radial process of a walk, advanced without full d-dimensional state.
///
/// For the elliptic and tilted kernels the radius is itself a Markov chain,
/// so radial experiments can run d-fold cheaper than full-space ones. For
/// the 1-D custom kernel the signed position is kept and the radius is its
/// absolute value.
pub struct RadialWalker {
    spec: WalkSpec,
    state: RadialState,
    zeta: Vec<f64>,
}

enum RadialState {
    Radius(f64),
    Signed(f64),
}

impl RadialWalker {
    pub fn new(spec: &WalkSpec, start_radius: f64) -> Result<Self> {
        spec.validate()?;
        if !(start_radius >= 0.0 && start_radius.is_finite()) {
            return Err(Error::BadParameter {
                name: "start_radius",
                value: start_radius,
                requirement: "finite and >= 0",
            });
        }
        let state = match spec.kernel {
            Kernel::Custom1d(_) => RadialState::Signed(start_radius),
            _ => RadialState::Radius(start_radius),
        };
        Ok(RadialWalker { spec: spec.clone(), state, zeta: vec![0.0; spec.dim] })
    }

    pub fn radius(&self) -> f64 {
        match self.state {
            RadialState::Radius(r) => r,
            RadialState::Signed(x) => x.abs(),
        }
    }

    /// Moves the walker back to `radius` without touching the RNG; used for
    /// repeated one-step draws from a fixed radius. For the signed 1-D state
    /// this places the walker on the nonnegative half-line.
    pub fn reset_radius(&mut self, radius: f64) {
        match &mut self.state {
            RadialState::Radius(r) => *r = radius,
            RadialState::Signed(x) => *x = radius,
        }
    }

    /// Advances one step and returns the new radius.
    pub fn advance(&mut self, rng: &mut RngStream) -> f64 {
        match (&mut self.state, &self.spec.kernel) {
            (RadialState::Radius(r), Kernel::Elliptic) => {
                sample_sphere_into(&mut self.zeta, rng);
                *r = radial_next(*r, self.spec.dim as f64, self.spec.a, self.spec.b, self.zeta[0]);
                *r
            }
            (RadialState::Radius(r), Kernel::Parametrized2d) => {
                let t = rng.uniform_angle().cos();
                *r = radial_next(*r, 2.0, self.spec.a, self.spec.b, t);
                *r
            }
            (RadialState::Radius(r), Kernel::Tilted) => {
                sample_sphere_into(&mut self.zeta, rng);
                let (sin_a, cos_a) = self.spec.alpha.sin_cos();
                *r = tilted_radial_next(
                    *r,
                    self.spec.dim as f64,
                    self.spec.a,
                    self.spec.b,
                    sin_a,
                    cos_a,
                    self.zeta[0],
                    self.zeta[1],
                );
                *r
            }
            (RadialState::Signed(x), Kernel::Custom1d(params)) => {
                *x = custom_1d_step(*x, params, rng);
                x.abs()
            }
            _ => unreachable!("state/kernel pairing is fixed at construction"),
        }
    }
}

/// Ordered positions of one walk plus the spec and stream that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    spec: WalkSpec,
    seed: u64,
    stream_id: u64,
    dim: usize,
    positions: Vec<f64>,
}

impl Trajectory {
    pub fn spec(&self) -> &WalkSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of steps `n`; the trajectory holds `n + 1` positions.
    pub fn step_count(&self) -> usize {
        self.positions.len() / self.dim - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn position(&self, k: usize) -> &[f64] {
        &self.positions[k * self.dim..(k + 1) * self.dim]
    }

    pub fn positions(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.dim)
    }

    pub fn radius(&self, k: usize) -> f64 {
        norm(self.position(k))
    }

    pub fn max_increment_norm(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.step_count() {
            let a = self.position(k);
            let b = self.position(k + 1);
            let inc: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
            worst = worst.max(norm(&inc));
        }
        worst
    }
}

/// Simulates `n_steps` steps of the walk from `start`.
///
/// Deterministic given `(spec, start, n_steps, rng stream)`: the same stream
/// reproduces the same trajectory bit for bit.
pub fn simulate(
    spec: &WalkSpec,
    start: &[f64],
    n_steps: usize,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(Error::BadParameter {
            name: "n_steps",
            value: 0.0,
            requirement: "n_steps >= 1",
        });
    }
    let mut walker = Walker::new(spec, start)?;
    let mut positions = Vec::with_capacity((n_steps + 1) * spec.dim);
    positions.extend_from_slice(start);
    for _ in 0..n_steps {
        walker.advance(rng)?;
        positions.extend_from_slice(walker.position());
    }
    Ok(Trajectory {
        spec: spec.clone(),
        seed: rng.seed(),
        stream_id: rng.stream_id(),
        dim: spec.dim,
        positions,
    })
}
