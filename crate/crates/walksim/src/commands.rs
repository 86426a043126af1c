//! Implementations of the five subcommands.

use crate::manifest::ManifestBuilder;
use crate::{
    ClassifyArgs, DiagnoseArgs, EpsDecayArg, EstimateArgs, EstimateMode, ExperimentArg, FormatArg,
    KernelArg, PlotdataArgs, SimulateArgs,
};
use ellwalk::diagnostics::{
    lyapunov_experiment, non_confinement_check, occupation_experiment,
    return_probability_experiment,
};
use ellwalk::estimators::{estimate_increment_moments, estimate_radial_moments};
use ellwalk::{
    classify_elliptic, classify_tilted, classify_uv, exact_radial_moments_quadrature,
    Custom1dParams, EpsDecay, JumpLaw, RngStream, UvConstants, Walker, WalkSpec,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

type CliError = Box<dyn std::error::Error>;
type CliResult = Result<ExitCode, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    msg.into().into()
}

/// Floats in CSV files carry 17 significant digits so that parsing them
/// back reproduces the exact f64.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|tok| tok.trim().parse::<f64>().map_err(|e| usage(format!("bad {what} '{tok}': {e}"))))
        .collect()
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|tok| tok.trim().parse::<usize>().map_err(|e| usage(format!("bad {what} '{tok}': {e}"))))
        .collect()
}

/// Builds the walk spec from common CLI flags. With no explicit kernel the
/// elliptic law is used, or the tilted law when --alpha is present.
fn build_spec(
    dim: usize,
    a: f64,
    b: f64,
    alpha: Option<f64>,
    kernel: Option<KernelArg>,
) -> Result<WalkSpec, CliError> {
    let kind = kernel.unwrap_or(if alpha.is_some() { KernelArg::Tilted } else { KernelArg::Elliptic });
    let alpha_val = alpha.unwrap_or(0.0);
    if alpha.is_some() && kind != KernelArg::Tilted {
        return Err(usage("--alpha only applies to the tilted kernel"));
    }
    let spec = match kind {
        KernelArg::Elliptic => WalkSpec::elliptic(dim, a, b),
        KernelArg::Parametrized2d => WalkSpec::parametrized_2d(a, b),
        KernelArg::Tilted => WalkSpec::tilted(dim, a, b, alpha_val),
        KernelArg::Custom1d => WalkSpec::custom_1d(Custom1dParams::default()),
    }?;
    if kind == KernelArg::Parametrized2d && dim != 2 {
        return Err(usage("--kernel parametrized2d requires --dim 2"));
    }
    if kind == KernelArg::Custom1d && dim != 1 {
        return Err(usage("--kernel custom1d requires --dim 1"));
    }
    Ok(spec)
}

fn print_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let text = serde_json::to_string(value)?;
    println!("{text}");
    Ok(text)
}

/// Writes a JSON report to `out` (if given) together with its manifest.
fn maybe_write_report(
    out: &Option<PathBuf>,
    text: &str,
    spec: Option<WalkSpec>,
    seed: u64,
) -> Result<(), CliError> {
    if let Some(path) = out {
        let builder = ManifestBuilder::new(spec, seed);
        std::fs::write(path, format!("{text}\n"))?;
        builder.write(std::slice::from_ref(path))?;
    }
    Ok(())
}

pub fn run_classify(args: ClassifyArgs) -> CliResult {
    let model_mode = args.dim.is_some() || args.a.is_some() || args.b.is_some();
    let raw_mode = args.u.is_some() || args.v.is_some();
    if model_mode && raw_mode {
        return Err(usage("choose either --dim/--a/--b or --u/--v, not both"));
    }
    let verdict = if raw_mode {
        let u = args.u.ok_or_else(|| usage("raw mode needs --u"))?;
        let v = args.v.ok_or_else(|| usage("raw mode needs --v"))?;
        if args.alpha.is_some() {
            return Err(usage("--alpha has no meaning in raw --u/--v mode"));
        }
        let decay = match args.eps_decay {
            EpsDecayArg::Zero => EpsDecay::IdenticallyZero,
            EpsDecayArg::Poly => EpsDecay::PolynomialDecay(args.delta0.unwrap_or(1.0)),
            EpsDecayArg::Unknown => EpsDecay::Unknown,
        };
        classify_uv(&UvConstants::new(u, v, decay)?)
    } else if model_mode {
        let dim = args.dim.ok_or_else(|| usage("model mode needs --dim"))?;
        let a = args.a.ok_or_else(|| usage("model mode needs --a"))?;
        let b = args.b.ok_or_else(|| usage("model mode needs --b"))?;
        match args.alpha {
            Some(alpha) => classify_tilted(dim, a, b, alpha)?,
            None => classify_elliptic(dim, a, b)?,
        }
    } else {
        return Err(usage("pass --dim/--a/--b for a model or --u/--v for raw constants"));
    };
    print_json(&verdict)?;
    Ok(if verdict.is_definite() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

pub fn run_simulate(args: SimulateArgs) -> CliResult {
    let spec = build_spec(args.dim, args.a, args.b, args.alpha, args.kernel)?;
    if args.steps == 0 || args.walks == 0 || args.thin == 0 {
        return Err(usage("--steps, --walks, and --thin must be at least 1"));
    }
    let start = match &args.start {
        Some(s) => {
            let v = parse_f64_list(s, "--start coordinate")?;
            if v.len() != spec.dim {
                return Err(usage(format!(
                    "--start has {} coordinates, spec dimension is {}",
                    v.len(),
                    spec.dim
                )));
            }
            v
        }
        None => vec![0.0; spec.dim],
    };

    let builder = ManifestBuilder::new(Some(spec.clone()), args.seed);

    let file = std::fs::File::create(&args.out)
        .map_err(|e| usage(format!("cannot write {}: {e}", args.out.display())))?;
    let mut writer = std::io::BufWriter::new(file);
    if args.format == FormatArg::Csv {
        write!(writer, "walk_id,step")?;
        for i in 1..=spec.dim {
            write!(writer, ",x{i}")?;
        }
        writeln!(writer)?;
    }

    let mut failures: Vec<(usize, ellwalk::Error)> = Vec::new();
    if args.walks == 1 {
        // A single walk streams straight to disk, so arbitrarily long
        // trajectories never accumulate in memory.
        let mut sink = StreamSink { writer: &mut writer, error: None };
        let err = render_walk(&spec, &start, &args, 0, &mut sink);
        if let Some(io_err) = sink.error {
            return Err(io_err.into());
        }
        if let Some(err) = err {
            failures.push((0, err));
        }
    } else {
        // One buffer per walk, rendered in parallel on independent RNG
        // streams, then written in walk order so output bytes are
        // scheduling-independent.
        let rendered: Vec<(Vec<u8>, Option<ellwalk::Error>)> = (0..args.walks as u64)
            .into_par_iter()
            .map(|walk_id| {
                let mut buf = Vec::new();
                let err = render_walk(&spec, &start, &args, walk_id, &mut buf);
                (buf, err)
            })
            .collect();
        for (walk_id, (buf, err)) in rendered.into_iter().enumerate() {
            writer.write_all(&buf)?;
            if let Some(err) = err {
                failures.push((walk_id, err));
            }
        }
    }
    writer.flush()?;
    drop(writer);

    builder.write(std::slice::from_ref(&args.out))?;

    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for (walk_id, err) in failures {
            eprintln!("walksim: walk {walk_id} aborted: {err} (partial output kept)");
        }
        Ok(ExitCode::from(1))
    }
}

/// Byte sink for rendered rows: an in-memory buffer per walk in the
/// parallel path, or the output file itself in the streaming path.
trait RowSink {
    fn push(&mut self, bytes: &[u8]);
}

impl RowSink for Vec<u8> {
    fn push(&mut self, bytes: &[u8]) {
        self.extend_from_slice(bytes);
    }
}

struct StreamSink<'a, W: Write> {
    writer: &'a mut W,
    error: Option<std::io::Error>,
}

impl<W: Write> RowSink for StreamSink<'_, W> {
    fn push(&mut self, bytes: &[u8]) {
        if self.error.is_none() {
            if let Err(e) = self.writer.write_all(bytes) {
                self.error = Some(e);
            }
        }
    }
}

fn render_walk<S: RowSink>(
    spec: &WalkSpec,
    start: &[f64],
    args: &SimulateArgs,
    walk_id: u64,
    sink: &mut S,
) -> Option<ellwalk::Error> {
    let mut rng = RngStream::new(args.seed, walk_id);
    let mut walker = match Walker::new(spec, start) {
        Ok(w) => w,
        Err(e) => return Some(e),
    };
    let emit = |sink: &mut S, step: usize, pos: &[f64]| match args.format {
        FormatArg::Csv => {
            let mut line = format!("{walk_id},{step}");
            for c in pos {
                line.push(',');
                line.push_str(&fmt_f64(*c));
            }
            line.push('\n');
            sink.push(line.as_bytes());
        }
        FormatArg::Jsonl => {
            let coords: Vec<String> = pos.iter().map(|c| fmt_f64(*c)).collect();
            let line =
                format!("{{\"walk_id\":{walk_id},\"step\":{step},\"x\":[{}]}}\n", coords.join(","));
            sink.push(line.as_bytes());
        }
    };
    emit(sink, 0, walker.position());
    for step in 1..=args.steps {
        if let Err(e) = walker.advance(&mut rng) {
            return Some(e);
        }
        if step % args.thin == 0 {
            emit(sink, step, walker.position());
        }
    }
    None
}

#[derive(Serialize)]
struct RadialRow {
    r: f64,
    n_samples: usize,
    mu1_hat: f64,
    mu2_hat: f64,
    se_mu1: f64,
    se_mu2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu1_quad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu2_quad: Option<f64>,
}

pub fn run_estimate(args: EstimateArgs) -> CliResult {
    let spec = build_spec(args.dim, args.a, args.b, args.alpha, args.kernel)?;
    let mut rng = RngStream::new(args.seed, 0);
    let text = match args.mode {
        EstimateMode::Increment => {
            let x = match &args.x {
                Some(s) => parse_f64_list(s, "--x coordinate")?,
                None => vec![0.0; spec.dim],
            };
            if x.len() != spec.dim {
                return Err(usage(format!(
                    "--x has {} coordinates, spec dimension is {}",
                    x.len(),
                    spec.dim
                )));
            }
            let report = estimate_increment_moments(&spec, &x, args.samples, &mut rng)?;
            let at_origin = x.iter().all(|&c| c == 0.0);
            let mut value = json!({
                "mode": "increment",
                "spec": spec,
                "seed": args.seed,
                "report": report,
            });
            if at_origin {
                value["metadata"] =
                    json!({ "x_hat_convention": "x is the origin; its radial direction is e1" });
            }
            print_json(&value)?
        }
        EstimateMode::Radial => {
            let radii = parse_f64_list(
                args.radii.as_deref().ok_or_else(|| usage("radial mode needs --radii"))?,
                "--radii entry",
            )?;
            let table = estimate_radial_moments(&spec, &radii, args.samples, &mut rng)?;
            let rows: Vec<RadialRow> = table
                .iter()
                .map(|e| {
                    let oracle = exact_radial_moments_quadrature(e.r, &spec, args.quad_points).ok();
                    RadialRow {
                        r: e.r,
                        n_samples: e.n_samples,
                        mu1_hat: e.mu1_hat,
                        mu2_hat: e.mu2_hat,
                        se_mu1: e.se_mu1,
                        se_mu2: e.se_mu2,
                        mu1_quad: oracle.map(|(m1, _)| m1),
                        mu2_quad: oracle.map(|(_, m2)| m2),
                    }
                })
                .collect();
            print_json(&json!({
                "mode": "radial",
                "spec": spec,
                "seed": args.seed,
                "rows": rows,
            }))?
        }
        EstimateMode::Quadrature => {
            let r = args.r.ok_or_else(|| usage("quadrature mode needs --r"))?;
            let (mu1, mu2) = exact_radial_moments_quadrature(r, &spec, args.quad_points)?;
            // Exact values: deliberately no standard-error columns.
            print_json(&json!({
                "mode": "quadrature",
                "spec": spec,
                "r": r,
                "quad_points": args.quad_points,
                "mu1": mu1,
                "mu2": mu2,
            }))?
        }
    };
    maybe_write_report(&args.out, &text, Some(spec), args.seed)?;
    Ok(ExitCode::SUCCESS)
}

pub fn run_diagnose(args: DiagnoseArgs) -> CliResult {
    let rng = RngStream::new(args.seed, 0);
    if args.experiment == ExperimentArg::Return
        && (args.compare_a.is_some() || args.compare_b.is_some())
    {
        return run_diagnose_return_pair(&args, &rng);
    }
    let (report, spec_for_manifest) = match args.experiment {
        ExperimentArg::Return => {
            let spec = build_spec(args.dim, args.a, args.b, args.alpha, args.kernel)?;
            let report = return_probability_experiment(
                &spec,
                args.r,
                args.big_r,
                args.start_radius,
                args.walks,
                args.step_cap,
                &rng,
            )?;
            (report, Some(spec))
        }
        ExperimentArg::Occupation => {
            let spec = build_spec(args.dim, args.a, args.b, args.alpha, args.kernel)?;
            let checkpoints = parse_usize_list(&args.checkpoints, "--checkpoints entry")?;
            let report = occupation_experiment(
                &spec,
                args.radius,
                &checkpoints,
                args.walks,
                0.0,
                &rng,
            )?;
            (report, Some(spec))
        }
        ExperimentArg::Nonconfinement => {
            let spec = build_spec(args.dim, args.a, args.b, args.alpha, args.kernel)?;
            let report = non_confinement_check(&spec, args.x_threshold, args.n, args.walks, &rng)?;
            (report, Some(spec))
        }
        ExperimentArg::Lyapunov => {
            let params = Custom1dParams::new(
                JumpLaw::symmetric_two_point(args.pos_jump)?,
                JumpLaw::symmetric_two_point(args.neg_jump)?,
            );
            let grid = lyapunov_grid(args.x_min, args.x_max, args.grid_points)?;
            let report = lyapunov_experiment(&params, &grid)?;
            (report, None)
        }
    };
    let text = print_json(&report)?;
    maybe_write_report(&args.out, &text, spec_for_manifest, args.seed)?;
    Ok(ExitCode::SUCCESS)
}

/// Runs the return experiment for the primary spec and a comparison spec
/// with different axis scales, emitting both sets of intervals in one
/// report. The comparison uses a disjoint block of RNG streams.
fn run_diagnose_return_pair(args: &DiagnoseArgs, rng: &RngStream) -> CliResult {
    let ca = args.compare_a.ok_or_else(|| usage("comparison needs both --compare-a and --compare-b"))?;
    let cb = args.compare_b.ok_or_else(|| usage("comparison needs both --compare-a and --compare-b"))?;
    let primary_spec = build_spec(args.dim, args.a, args.b, args.alpha, args.kernel)?;
    let comparison_spec = build_spec(args.dim, ca, cb, args.alpha, args.kernel)?;
    let primary = return_probability_experiment(
        &primary_spec,
        args.r,
        args.big_r,
        args.start_radius,
        args.walks,
        args.step_cap,
        rng,
    )?;
    let comparison_rng = rng.substream(rng.stream_id().wrapping_add(1 << 32));
    let comparison = return_probability_experiment(
        &comparison_spec,
        args.r,
        args.big_r,
        args.start_radius,
        args.walks,
        args.step_cap,
        &comparison_rng,
    )?;
    let text = print_json(&serde_json::json!({
        "experiment": "return_probability",
        "primary": primary,
        "comparison": comparison,
    }))?;
    maybe_write_report(&args.out, &text, Some(primary_spec), args.seed)?;
    Ok(ExitCode::SUCCESS)
}

/// Log-spaced grid on [x_min, x_max], mirrored to negative x.
fn lyapunov_grid(x_min: f64, x_max: f64, points_per_sign: usize) -> Result<Vec<f64>, CliError> {
    if !(x_min > 0.0 && x_max > x_min) || points_per_sign < 2 {
        return Err(usage("need 0 < --x-min < --x-max and --grid-points >= 2"));
    }
    let ratio = (x_max / x_min).ln();
    let mut grid = Vec::with_capacity(2 * points_per_sign);
    for k in 0..points_per_sign {
        let x = x_min * (ratio * k as f64 / (points_per_sign - 1) as f64).exp();
        grid.push(-x);
        grid.push(x);
    }
    grid.sort_by(|p, q| p.partial_cmp(q).unwrap());
    Ok(grid)
}

pub fn run_plotdata(args: PlotdataArgs) -> CliResult {
    let content = std::fs::read_to_string(&args.input)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.input.display())))?;
    let mut lines = content.lines();
    let header = lines.next().ok_or_else(|| usage("input file is empty"))?;
    let columns: Vec<&str> = header.split(',').collect();
    let is_trajectory = columns.len() >= 3
        && columns[..2] == ["walk_id", "step"]
        && columns[2..].iter().enumerate().all(|(i, c)| **c == format!("x{}", i + 1));
    if !is_trajectory {
        return Err(usage(format!("unrecognized trajectory header '{header}'")));
    }
    if columns.len() != 4 {
        return Err(usage(format!(
            "trajectory dimension is {}; plot data needs d = 2 (projection flags not implemented)",
            columns.len() - 2
        )));
    }

    // Keep coordinate fields verbatim so no precision is lost in transit.
    let mut rows: Vec<(u64, u64, String, String)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(usage(format!("malformed row {} in input", lineno + 2)));
        }
        let walk_id: u64 =
            fields[0].parse().map_err(|e| usage(format!("bad walk_id '{}': {e}", fields[0])))?;
        let step: u64 =
            fields[1].parse().map_err(|e| usage(format!("bad step '{}': {e}", fields[1])))?;
        rows.push((walk_id, step, fields[2].to_string(), fields[3].to_string()));
    }
    if rows.is_empty() {
        return Err(usage("input holds no trajectory rows"));
    }

    let chosen = match args.walk {
        Some(id) => id,
        None => {
            let first = rows[0].0;
            if rows.iter().any(|r| r.0 != first) {
                return Err(usage("input holds several walks; choose one with --walk"));
            }
            first
        }
    };
    let mut selected: Vec<&(u64, u64, String, String)> =
        rows.iter().filter(|r| r.0 == chosen).collect();
    if selected.is_empty() {
        return Err(usage(format!("walk {chosen} not present in input")));
    }
    selected.sort_by_key(|r| r.1);
    let max_step = selected.last().unwrap().1;

    let builder = ManifestBuilder::new(None, 0);
    let file = std::fs::File::create(&args.out)
        .map_err(|e| usage(format!("cannot write {}: {e}", args.out.display())))?;
    let mut writer = std::io::BufWriter::new(file);
    writeln!(writer, "step,x1,x2,t_norm")?;
    for (_, step, x1, x2) in selected {
        let t_norm = if max_step == 0 { 0.0 } else { *step as f64 / max_step as f64 };
        writeln!(writer, "{step},{x1},{x2},{}", fmt_f64(t_norm))?;
    }
    writer.flush()?;
    drop(writer);
    builder.write(std::slice::from_ref(&args.out))?;
    Ok(ExitCode::SUCCESS)
}
