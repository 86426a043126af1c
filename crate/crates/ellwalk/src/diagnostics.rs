//! Statistical experiments: return probabilities, occupation fractions,
//! non-confinement, and the exact 1-D Lyapunov drift.
//!
//! Recurrence is an infinite-time property that no finite simulation can
//! certify, so these experiments are framed as ordered comparisons and trend
//! checks against the classifier's verdicts, never as proofs. Censored walks
//! are always counted and reported, never dropped.
//!
//! Walks are parallelized with one RNG stream per walk (stream ids
//! `base..base+n_walks` derived from the caller's stream), so results do not
//! depend on scheduling or thread count.

use crate::error::{Error, Result};
use crate::kernels::{Custom1dParams, RadialWalker, Walker, WalkSpec};
use crate::rng::RngStream;
use crate::stats::{bootstrap_mean_ci, wilson_interval, ConfidenceInterval, Z_95};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    ReturnProbability,
    OccupationFraction,
    NonConfinement,
    LyapunovDrift,
}

/// One labeled value, optionally with a confidence interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Statistic {
    pub label: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<ConfidenceInterval>,
}

/// Results of one experiment plus an echo of its configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub experiment: Experiment,
    pub statistics: Vec<Statistic>,
    pub config: Vec<(String, String)>,
}

impl DiagnosticReport {
    fn new(experiment: Experiment) -> Self {
        DiagnosticReport { experiment, statistics: Vec::new(), config: Vec::new() }
    }

    fn push(&mut self, label: impl Into<String>, value: f64) {
        self.statistics.push(Statistic { label: label.into(), value, ci: None });
    }

    fn push_ci(&mut self, label: impl Into<String>, ci: ConfidenceInterval) {
        self.statistics.push(Statistic { label: label.into(), value: ci.estimate, ci: Some(ci) });
    }

    fn echo(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.into(), value.to_string()));
    }

    fn echo_spec(&mut self, spec: &WalkSpec) {
        self.echo("kernel", spec.kernel.name());
        self.echo("dim", spec.dim);
        self.echo("a", spec.a);
        self.echo("b", spec.b);
        self.echo("alpha", spec.alpha);
    }

    pub fn statistic(&self, label: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.label == label)
    }

    pub fn value(&self, label: &str) -> Option<f64> {
        self.statistic(label).map(|s| s.value)
    }

    /// Structural invariants: probabilities in [0, 1], intervals containing
    /// their point estimates.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for s in &self.statistics {
            let is_probability = s.label.starts_with("p_")
                || s.label.starts_with("fraction_")
                || s.label.starts_with("tau_tail_ge_");
            if is_probability && !(0.0..=1.0).contains(&s.value) {
                return Err(format!("{} = {} escapes [0, 1]", s.label, s.value));
            }
            if let Some(ci) = &s.ci {
                if !ci.contains(s.value) {
                    return Err(format!(
                        "interval [{}, {}] misses estimate {} for {}",
                        ci.low, ci.high, s.value, s.label
                    ));
                }
            }
        }
        Ok(())
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (sx, sy): (f64, f64) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

fn positive_int_grid(limit: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut m = 10usize;
    while m < limit {
        grid.push(m);
        m = m.saturating_mul(10);
    }
    grid.push(limit);
    grid
}

enum WalkOutcome {
    Hit(usize),
    Exit(usize),
    Censored,
}

/// Estimates the probability of reaching the ball of radius `r` before first
/// leaving the ball of radius `cap_radius`, starting from `start_radius`,
/// along with the empirical tail of the hitting time.
pub fn return_probability_experiment(
    spec: &WalkSpec,
    r: f64,
    cap_radius: f64,
    start_radius: f64,
    n_walks: usize,
    step_cap: usize,
    rng: &RngStream,
) -> Result<DiagnosticReport> {
    if !(r > 0.0 && r < cap_radius) {
        return Err(Error::DegenerateGeometry(format!(
            "need 0 < r < R, got r = {r}, R = {cap_radius}"
        )));
    }
    if !(start_radius >= r && start_radius <= cap_radius) {
        return Err(Error::DegenerateGeometry(format!(
            "start radius {start_radius} outside [r, R] = [{r}, {cap_radius}]"
        )));
    }
    if n_walks == 0 || step_cap == 0 {
        return Err(Error::BadParameter {
            name: "n_walks/step_cap",
            value: 0.0,
            requirement: "must be >= 1",
        });
    }
    spec.validate()?;

    let base = rng.stream_id();
    let outcomes: Vec<WalkOutcome> = (0..n_walks as u64)
        .into_par_iter()
        .map(|w| {
            let mut walk_rng = rng.substream(base.wrapping_add(w));
            let mut walker = RadialWalker::new(spec, start_radius).expect("validated spec");
            if walker.radius() <= r {
                return WalkOutcome::Hit(0);
            }
            for step in 1..=step_cap {
                let radius = walker.advance(&mut walk_rng);
                if radius <= r {
                    return WalkOutcome::Hit(step);
                }
                if radius > cap_radius {
                    return WalkOutcome::Exit(step);
                }
            }
            WalkOutcome::Censored
        })
        .collect();

    let hits = outcomes.iter().filter(|o| matches!(o, WalkOutcome::Hit(_))).count();
    let exits = outcomes.iter().filter(|o| matches!(o, WalkOutcome::Exit(_))).count();
    let censored = n_walks - hits - exits;

    let mut report = DiagnosticReport::new(Experiment::ReturnProbability);
    report.push("walks", n_walks as f64);
    report.push("hits", hits as f64);
    report.push("exits", exits as f64);
    report.push("censored", censored as f64);
    if hits > 0 {
        let total: usize =
            outcomes.iter().filter_map(|o| if let WalkOutcome::Hit(s) = o { Some(s) } else { None }).sum();
        report.push("mean_tau_given_hit", total as f64 / hits as f64);
    }
    if exits > 0 {
        let total: usize =
            outcomes.iter().filter_map(|o| if let WalkOutcome::Exit(s) = o { Some(s) } else { None }).sum();
        report.push("mean_steps_to_exit", total as f64 / exits as f64);
    }
    if hits + exits > 0 {
        report.push_ci(
            "p_return_before_exit",
            wilson_interval(hits as u64, (hits + exits) as u64, Z_95),
        );
    }
    // Tail of the hitting time over all walks; non-hitting walks never
    // return within the horizon, so they count in every tail bin.
    let mut log_points = Vec::new();
    for m in positive_int_grid(step_cap) {
        let at_least = outcomes
            .iter()
            .filter(|o| match o {
                WalkOutcome::Hit(step) => *step >= m,
                WalkOutcome::Exit(_) | WalkOutcome::Censored => true,
            })
            .count();
        let ci = wilson_interval(at_least as u64, n_walks as u64, Z_95);
        if ci.estimate > 0.0 && ci.estimate < 1.0 {
            log_points.push(((m as f64).ln(), ci.estimate.ln()));
        }
        report.push_ci(format!("tau_tail_ge_{m}"), ci);
    }
    // Descriptive power-law fit of the tail; the exponent is reported, not
    // asserted — the true tail of a critically recurrent walk can be heavier
    // than the generic lower bound suggests.
    if let Some(slope) = least_squares_slope(&log_points) {
        report.push("tau_tail_exponent", slope);
    }
    report.echo_spec(spec);
    report.echo("r", r);
    report.echo("R", cap_radius);
    report.echo("start_radius", start_radius);
    report.echo("n_walks", n_walks);
    report.echo("step_cap", step_cap);
    report.echo("seed", rng.seed());
    report.echo("stream_base", base);
    Ok(report)
}

/// Fraction of the first `n` positions inside the ball of radius `radius`,
/// for each checkpoint `n`.
pub fn occupation_fraction(
    traj: &crate::kernels::Trajectory,
    radius: f64,
    checkpoints: &[usize],
) -> Result<Vec<(usize, f64)>> {
    crate::geometry::check_positive("radius", radius)?;
    let available = traj.step_count() + 1;
    if checkpoints.iter().any(|&n| n == 0 || n > available) {
        return Err(Error::BadParameter {
            name: "checkpoints",
            value: f64::NAN,
            requirement: "each checkpoint n must satisfy 1 <= n <= positions",
        });
    }
    let mut order: Vec<usize> = (0..checkpoints.len()).collect();
    order.sort_by_key(|&i| checkpoints[i]);

    let mut results = vec![(0usize, 0.0f64); checkpoints.len()];
    let mut inside = 0usize;
    let mut next = 0usize;
    for k in 0..available {
        while next < order.len() && checkpoints[order[next]] == k {
            results[order[next]] = (k, inside as f64 / k as f64);
            next += 1;
        }
        if traj.radius(k) <= radius {
            inside += 1;
        }
    }
    while next < order.len() {
        let n = checkpoints[order[next]];
        results[order[next]] = (n, inside as f64 / n as f64);
        next += 1;
    }
    Ok(results)
}

/// Mean occupation fraction of the ball of radius `radius` across `n_walks`
/// independent walks started at radius `start_radius`, evaluated at each
/// checkpoint. Uses the radial recursion, so no trajectory is stored.
pub fn occupation_experiment(
    spec: &WalkSpec,
    radius: f64,
    checkpoints: &[usize],
    n_walks: usize,
    start_radius: f64,
    rng: &RngStream,
) -> Result<DiagnosticReport> {
    crate::geometry::check_positive("radius", radius)?;
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadParameter {
            name: "checkpoints",
            value: f64::NAN,
            requirement: "nonempty and strictly ascending",
        });
    }
    if checkpoints[0] == 0 {
        return Err(Error::BadParameter {
            name: "checkpoints",
            value: 0.0,
            requirement: "checkpoints start at n >= 1",
        });
    }
    if n_walks == 0 {
        return Err(Error::BadParameter {
            name: "n_walks",
            value: 0.0,
            requirement: "must be >= 1",
        });
    }
    spec.validate()?;

    let base = rng.stream_id();
    let horizon = *checkpoints.last().unwrap();
    let per_walk: Vec<Vec<f64>> = (0..n_walks as u64)
        .into_par_iter()
        .map(|w| {
            let mut walk_rng = rng.substream(base.wrapping_add(w));
            let mut walker = RadialWalker::new(spec, start_radius).expect("validated spec");
            let mut fractions = Vec::with_capacity(checkpoints.len());
            let mut inside = 0usize;
            let mut next = 0usize;
            for k in 0..horizon {
                if walker.radius() <= radius {
                    inside += 1;
                }
                // The count now covers positions X_0 ... X_k, i.e. n = k + 1.
                if checkpoints[next] == k + 1 {
                    fractions.push(inside as f64 / (k + 1) as f64);
                    next += 1;
                    if next == checkpoints.len() {
                        break;
                    }
                }
                walker.advance(&mut walk_rng);
            }
            fractions
        })
        .collect();

    let mut report = DiagnosticReport::new(Experiment::OccupationFraction);
    let mut boot_rng = rng.substream(base.wrapping_add(n_walks as u64));
    for (i, &n) in checkpoints.iter().enumerate() {
        let samples: Vec<f64> = per_walk.iter().map(|f| f[i]).collect();
        let ci = bootstrap_mean_ci(&samples, 1000, 0.95, &mut boot_rng);
        report.push_ci(format!("fraction_at_{n}"), ci);
    }
    report.echo_spec(spec);
    report.echo("radius", radius);
    report.echo("start_radius", start_radius);
    report.echo("n_walks", n_walks);
    report.echo("checkpoints", format!("{checkpoints:?}"));
    report.echo("seed", rng.seed());
    report.echo("stream_base", base);
    Ok(report)
}

/// Fraction of walks whose running maximum displacement from the start
/// reaches `x_threshold` within `m` steps, over a grid of horizons
/// `m <= n`, together with the descriptive constant
/// `c_hat(m) = (1 - p_hat(m)) * m / (1 + x)^2` suggested by the martingale
/// maximal inequality.
pub fn non_confinement_check(
    spec: &WalkSpec,
    x_threshold: f64,
    n: usize,
    n_walks: usize,
    rng: &RngStream,
) -> Result<DiagnosticReport> {
    crate::geometry::check_positive("x_threshold", x_threshold)?;
    if n == 0 || n_walks == 0 {
        return Err(Error::BadParameter {
            name: "n/n_walks",
            value: 0.0,
            requirement: "must be >= 1",
        });
    }
    spec.validate()?;

    let base = rng.stream_id();
    // First passage of the displacement over the threshold, censored at n.
    let first_passage: Vec<Option<usize>> = (0..n_walks as u64)
        .into_par_iter()
        .map(|w| {
            let mut walk_rng = rng.substream(base.wrapping_add(w));
            let origin = vec![0.0; spec.dim];
            let mut walker = Walker::new(spec, &origin).expect("validated spec");
            for step in 1..=n {
                walker.advance(&mut walk_rng).expect("bounded jumps cannot overflow");
                if walker.radius() >= x_threshold {
                    return Some(step);
                }
            }
            None
        })
        .collect();

    let mut report = DiagnosticReport::new(Experiment::NonConfinement);
    let mut c_max = 0.0f64;
    for m in positive_int_grid(n) {
        let hits = first_passage.iter().filter(|t| t.is_some_and(|s| s <= m)).count();
        let ci = wilson_interval(hits as u64, n_walks as u64, Z_95);
        let c_hat = (1.0 - ci.estimate) * m as f64 / (1.0 + x_threshold).powi(2);
        c_max = c_max.max(c_hat);
        report.push_ci(format!("p_hat_at_{m}"), ci);
        report.push(format!("c_hat_at_{m}"), c_hat);
    }
    report.push("c_hat_max", c_max);
    report.echo_spec(spec);
    report.echo("x_threshold", x_threshold);
    report.echo("n", n);
    report.echo("n_walks", n_walks);
    report.echo("seed", rng.seed());
    report.echo("stream_base", base);
    Ok(report)
}

/// Exact drift of the Lyapunov function `f(x) = log(1 + |x|)` under the
/// 1-D kernel at position `x`: a finite sum over the jump law's atoms, with
/// no Monte Carlo error.
pub fn lyapunov_drift_1d(params: &Custom1dParams, x: f64) -> f64 {
    let here = x.abs().ln_1p();
    params
        .law_at(x)
        .atoms()
        .iter()
        .map(|&(jump, prob)| prob * ((x + jump).abs().ln_1p() - here))
        .sum()
}

/// Evaluates the exact Lyapunov drift on a grid and reports the largest
/// grid point with positive drift (the drift need only be nonpositive far
/// from the origin).
pub fn lyapunov_experiment(params: &Custom1dParams, grid: &[f64]) -> Result<DiagnosticReport> {
    if grid.is_empty() {
        return Err(Error::BadParameter {
            name: "grid",
            value: 0.0,
            requirement: "at least one point",
        });
    }
    let mut report = DiagnosticReport::new(Experiment::LyapunovDrift);
    let mut largest_positive: Option<f64> = None;
    for &x in grid {
        let drift = lyapunov_drift_1d(params, x);
        report.push(format!("drift_at_{x:.6}"), drift);
        if drift > 0.0 {
            largest_positive =
                Some(largest_positive.map_or(x.abs(), |best: f64| best.max(x.abs())));
        }
    }
    if let Some(x) = largest_positive {
        report.push("largest_abs_x_with_positive_drift", x);
    }
    report.echo("grid_len", grid.len());
    report.echo("variance_floor", params.variance_floor());
    Ok(report)
}
