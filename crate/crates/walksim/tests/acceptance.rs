//! Acceptance suite: every criterion below runs at its stated tolerance and
//! prints one pass line (visible with `--nocapture`; a failed assert prints
//! the failure instead).
//!
//! Statistical criteria use fixed seeds, so the suite is deterministic.

use ellwalk::diagnostics::{non_confinement_check, occupation_experiment, return_probability_experiment};
use ellwalk::estimators::{estimate_increment_moments, estimate_radial_moments};
use ellwalk::geometry::{sample_unit_sphere, UnitVector};
use ellwalk::kernels::{elliptic_step, radial_step};
use ellwalk::linalg::{dot, norm};
use ellwalk::{
    classify_elliptic, classify_tilted, exact_radial_moments_quadrature, sigma_sq,
    Custom1dParams, RngStream, VerdictKind, WalkSpec,
};
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::Command;

fn pass(n: u32, name: &str, detail: &str) {
    println!("criterion {n} ({name}): PASS {detail}");
}

/// Criterion 1: empirical increment second moments match the closed form
/// a^2 xhat xhat^T + b^2 (I - xhat xhat^T) entrywise within 5 standard
/// errors, across (d, a, b) in {2,3,5} x {1,2} x {1,2} and 5 random
/// positions each, 1e6 samples per cell.
#[test]
fn criterion_1_covariance_oracle() {
    let mut cells: Vec<(WalkSpec, Vec<f64>)> = Vec::new();
    let mut pos_rng = RngStream::new(0xC0FFEE, 0);
    for &d in &[2usize, 3, 5] {
        for &a in &[1.0, 2.0] {
            for &b in &[1.0, 2.0] {
                let spec = WalkSpec::elliptic(d, a, b).unwrap();
                for _ in 0..5 {
                    let radius = 1.0 + 49.0 * pos_rng.uniform01();
                    let dir = sample_unit_sphere(d, &mut pos_rng).unwrap();
                    let x: Vec<f64> = dir.iter().map(|c| radius * c).collect();
                    cells.push((spec.clone(), x));
                }
            }
        }
    }
    cells.par_iter().enumerate().for_each(|(cell, (spec, x))| {
        let mut rng = RngStream::new(0xACC1, cell as u64);
        let report = estimate_increment_moments(spec, x, 1_000_000, &mut rng).unwrap();
        let oracle = sigma_sq(&UnitVector::radial_direction(x), spec).unwrap();
        for i in 0..spec.dim {
            for j in 0..spec.dim {
                let dev = (report.cov_hat.get(i, j) - oracle.matrix().get(i, j)).abs();
                let bound = 5.0 * report.se_cov.get(i, j);
                assert!(
                    dev <= bound,
                    "cell {cell} (d={} a={} b={}) entry ({i},{j}): |dev| {dev} > 5 SE {bound}",
                    spec.dim,
                    spec.a,
                    spec.b
                );
            }
        }
    });
    pass(1, "covariance oracle", "- 60 cells x 1e6 samples, all entries within 5 SE");
}

/// Criterion 2: the radial recursion driven by the same sphere draws as the
/// full-space walk reproduces |X_n| within 1e-6 over 1e4 steps, 20 seeds.
#[test]
fn criterion_2_radial_coupling() {
    let specs =
        [WalkSpec::elliptic(2, 1.0, 2.0).unwrap(), WalkSpec::elliptic(3, 2.0, 1.0).unwrap()];
    let mut worst_overall = 0.0f64;
    for seed in 0..20u64 {
        let spec = &specs[(seed % 2) as usize];
        let mut rng = RngStream::new(0xACC2, seed);
        let mut pos = vec![0.0; spec.dim];
        let mut r = 0.0f64;
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let zeta = sample_unit_sphere(spec.dim, &mut rng).unwrap();
            let xhat = UnitVector::radial_direction(&pos);
            let t = dot(&xhat, &zeta).clamp(-1.0, 1.0);
            pos = elliptic_step(&pos, spec, &zeta).unwrap();
            r = radial_step(r, spec, t).unwrap();
            worst = worst.max((norm(&pos) - r).abs());
        }
        assert!(worst <= 1e-6, "seed {seed}: radius gap {worst} > 1e-6");
        worst_overall = worst_overall.max(worst);
    }
    pass(2, "radial coupling", &format!("- worst gap {worst_overall:.2e} over 20 seeds"));
}

/// Criterion 3: the classifier reproduces the exact truth table on the
/// parameter grid with zero tolerance; the tilted classifier at alpha = 0
/// agrees everywhere; the isotropic walk is recurrent only in d <= 2.
#[test]
fn criterion_3_classification_truth_table() {
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    for d in 2..=6usize {
        for &a in &grid {
            for &b in &grid {
                let verdict = classify_elliptic(d, a, b).unwrap();
                // Independent route: the displayed inequality, exact on this
                // dyadic grid.
                let lhs = a * a;
                let rhs = (d as f64 - 1.0) * (b * b);
                let expected = if lhs < rhs {
                    VerdictKind::Transient
                } else if lhs == rhs {
                    VerdictKind::CriticalRecurrent
                } else {
                    VerdictKind::Recurrent
                };
                assert_eq!(verdict.kind, expected, "d={d} a={a} b={b}");

                let tilted = classify_tilted(d, a, b, 0.0).unwrap();
                assert_eq!(tilted.kind, verdict.kind, "tilted alpha=0 at d={d} a={a} b={b}");
            }
        }
    }
    // Isotropic row: recurrent for d in {1, 2}, transient for d >= 3.
    for &a in &grid {
        assert!(classify_elliptic(1, a, a).unwrap().is_recurrent());
        assert!(classify_elliptic(2, a, a).unwrap().is_recurrent());
        for d in 3..=6 {
            assert_eq!(classify_elliptic(d, a, a).unwrap().kind, VerdictKind::Transient);
        }
    }
    pass(3, "classification truth table", "- 125-cell grid exact, tilted agrees, isotropic row exact");
}

/// Criterion 4: quadrature reproduces the radial moment limits for
/// d=2, a=1, b=2 (mu2(1e4) within 1e-3 of U = 1; 2e4 * mu1(1e4) within
/// 1e-2 of V - U = 4), and 1e6 Monte Carlo samples at r = 1e3 match the
/// quadrature value within max(5 SE, 1e-2).
#[test]
fn criterion_4_radial_moment_limits() {
    let spec = WalkSpec::elliptic(2, 1.0, 2.0).unwrap();
    let (mu1, mu2) = exact_radial_moments_quadrature(1e4, &spec, 128).unwrap();
    assert!((mu2 - 1.0).abs() <= 1e-3, "mu2(1e4) = {mu2}");
    assert!((2.0 * 1e4 * mu1 - 4.0).abs() <= 1e-2, "2e4 mu1(1e4) = {}", 2.0 * 1e4 * mu1);

    let (_, mu2_oracle) = exact_radial_moments_quadrature(1e3, &spec, 128).unwrap();
    let mut rng = RngStream::new(0xACC4, 0);
    let table = estimate_radial_moments(&spec, &[1e3], 1_000_000, &mut rng).unwrap();
    let row = &table[0];
    let tol = (5.0 * row.se_mu2).max(1e-2);
    assert!(
        (row.mu2_hat - mu2_oracle).abs() <= tol,
        "mu2_hat {} vs quadrature {mu2_oracle} (tol {tol})",
        row.mu2_hat
    );
    pass(
        4,
        "radial moment limits",
        &format!("- mu2(1e4) = {mu2:.6}, 2e4 mu1(1e4) = {:.6}, MC gap {:.2e}", 2.0 * 1e4 * mu1,
            (row.mu2_hat - mu2_oracle).abs()),
    );
}

/// Criterion 5: with r=5, start=20, R=200, 2000 walks, step cap 1e6, the
/// recurrent walk (a=2, b=1) returns strictly more often than the transient
/// one (a=1, b=2), with non-overlapping 95% intervals.
#[test]
fn criterion_5_behavioral_separation() {
    let recurrent = WalkSpec::elliptic(2, 2.0, 1.0).unwrap();
    let transient = WalkSpec::elliptic(2, 1.0, 2.0).unwrap();
    let rng_rec = RngStream::new(0xACC5, 0);
    let rng_tra = RngStream::new(0xACC5, 1 << 32);
    let rep_rec =
        return_probability_experiment(&recurrent, 5.0, 200.0, 20.0, 2000, 1_000_000, &rng_rec)
            .unwrap();
    let rep_tra =
        return_probability_experiment(&transient, 5.0, 200.0, 20.0, 2000, 1_000_000, &rng_tra)
            .unwrap();
    let ci_rec = rep_rec.statistic("p_return_before_exit").unwrap().ci.unwrap();
    let ci_tra = rep_tra.statistic("p_return_before_exit").unwrap().ci.unwrap();
    assert!(
        ci_rec.estimate > ci_tra.estimate && ci_rec.low > ci_tra.high,
        "intervals overlap: recurrent [{}, {}] vs transient [{}, {}]",
        ci_rec.low,
        ci_rec.high,
        ci_tra.low,
        ci_tra.high
    );
    assert_eq!(rep_rec.value("censored"), Some(0.0), "recurrent walks censored");
    pass(
        5,
        "behavioral separation",
        &format!(
            "- recurrent p = {:.3} [{:.3}, {:.3}] > transient p = {:.3} [{:.3}, {:.3}]",
            ci_rec.estimate, ci_rec.low, ci_rec.high, ci_tra.estimate, ci_tra.low, ci_tra.high
        ),
    );
}

/// Criterion 6: for the recurrent walk (d=2, a=2, b=1) the mean occupation
/// fraction of B_10 over 200 walks at n = 1e6 is below half its value at
/// n = 1e4 — recurrence with vanishing time fraction.
#[test]
fn criterion_6_nullity_trend() {
    let spec = WalkSpec::elliptic(2, 2.0, 1.0).unwrap();
    let rng = RngStream::new(0xACC6, 0);
    let report =
        occupation_experiment(&spec, 10.0, &[10_000, 1_000_000], 200, 0.0, &rng).unwrap();
    let early = report.value("fraction_at_10000").unwrap();
    let late = report.value("fraction_at_1000000").unwrap();
    assert!(
        late < 0.5 * early,
        "occupation fraction did not halve: f(1e4) = {early}, f(1e6) = {late}"
    );
    pass(6, "nullity trend", &format!("- f(1e4) = {early:.4}, f(1e6) = {late:.4}"));
}

/// Criterion 7: for the isotropic walk in d = 3, at least 99% of 2000 walks
/// reach displacement 10 within 1e5 steps, and the confinement shape
/// (1 - p_hat(n)) * n / (1 + x)^2 stays bounded by a single constant over
/// n in {1e3, 1e4, 1e5}.
#[test]
fn criterion_7_non_confinement() {
    let spec = WalkSpec::elliptic(3, 1.0, 1.0).unwrap();
    let rng = RngStream::new(0xACC7, 0);
    let report = non_confinement_check(&spec, 10.0, 100_000, 2000, &rng).unwrap();
    let p_final = report.value("p_hat_at_100000").unwrap();
    assert!(p_final >= 0.99, "p_hat(1e5) = {p_final} < 0.99");
    let mut c_values = Vec::new();
    for m in [1000usize, 10_000, 100_000] {
        c_values.push(report.value(&format!("c_hat_at_{m}")).unwrap());
    }
    let c_bound = 1.0;
    for (m, c) in [1000usize, 10_000, 100_000].iter().zip(&c_values) {
        assert!(*c <= c_bound, "c_hat({m}) = {c} exceeds the constant bound {c_bound}");
    }
    pass(
        7,
        "non-confinement",
        &format!("- p_hat(1e5) = {p_final:.4}, c_hat over grid = {c_values:?}"),
    );
}

/// Criterion 8: the exact drift of log(1 + |x|) under the default 1-D
/// kernel is nonpositive at every grid point with |x| >= 10 — exact
/// arithmetic, zero tolerance.
#[test]
fn criterion_8_one_dimensional_lyapunov_drift() {
    let params = Custom1dParams::default();
    // 50 log-spaced magnitudes in [10, 1e4], mirrored: a 100-point grid.
    let mut grid = Vec::new();
    for k in 0..50 {
        let x = 10.0 * (1000.0f64.ln() * k as f64 / 49.0).exp();
        grid.push(x);
        grid.push(-x);
    }
    assert_eq!(grid.len(), 100);
    let mut worst = f64::NEG_INFINITY;
    for &x in &grid {
        let drift = ellwalk::diagnostics::lyapunov_drift_1d(&params, x);
        assert!(drift <= 0.0, "drift at x = {x} is {drift} > 0");
        worst = worst.max(drift);
    }
    pass(8, "1-D Lyapunov drift", &format!("- max drift over grid = {worst:.3e} <= 0"));
}

/// Criterion 9: simulate output is byte-identical across repeated runs and
/// across thread counts 1 and 8.
#[test]
fn criterion_9_determinism() {
    let dir = std::env::temp_dir().join(format!("walksim-acc9-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str, threads: &str| -> PathBuf {
        let path = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_walksim"))
            .args([
                "simulate", "--dim", "2", "--a", "1", "--b", "2",
                "--steps", "20000", "--walks", "8", "--seed", "42",
                "--threads", threads,
                "--out", path.to_str().unwrap(),
            ])
            .status()
            .expect("spawn walksim");
        assert!(status.success());
        path
    };
    let a = std::fs::read(run("a.csv", "1")).unwrap();
    let b = std::fs::read(run("b.csv", "1")).unwrap();
    let c = std::fs::read(run("c.csv", "8")).unwrap();
    let d = std::fs::read(run("d.csv", "8")).unwrap();
    assert_eq!(a, b, "two single-threaded runs differ");
    assert_eq!(c, d, "two 8-thread runs differ");
    assert_eq!(a, c, "thread count changed the output bytes");
    pass(9, "determinism", &format!("- {} bytes identical across runs and thread counts", a.len()));
}
