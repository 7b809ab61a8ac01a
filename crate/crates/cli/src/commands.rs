//! Subcommand implementations.

use std::fs;
use std::path::Path;
use std::sync::Mutex;

use anyhow::{anyhow, Context};

use odokit_core::analysis::build_report;
use odokit_core::anomaly::{self, RepairPolicy, ScanConfig};
use odokit_core::ingest::{self, LogDocument};
use odokit_core::odometry::{self, heading_from_magnetometer};
use odokit_core::simulator::{self, MotionPlan, NoiseModel, Segment, RNG_ALGORITHM};
use odokit_core::smoothing::{kalman_smooth, redrive_poses, KalmanConfig};
use odokit_core::{Pose, RobotGeometry, TrajectoryPoint, UpdateMode};

use crate::{
    plot, presets, AnalyzeArgs, CliError, CliResult, ReportArgs, ScanArgs, SimulateArgs,
    SmoothArgs, TrackArgs,
};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn data(err: impl Into<anyhow::Error>) -> CliError {
    CliError::Data(err.into())
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read `{}`", path.display()))
        .map_err(CliError::Data)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents)
        .with_context(|| format!("cannot write `{}`", path.display()))
        .map_err(CliError::Data)
}

/// Write to the given path, or to stdout when none was requested.
fn write_output(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Read and parse a log, sending parser diagnostics to stderr.
fn load_log(path: &Path) -> CliResult<LogDocument> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    match ingest::parse_log(&text, &name) {
        Ok((doc, diagnostics)) => {
            for d in &diagnostics {
                eprintln!("{name}: {d}");
            }
            Ok(doc)
        }
        Err(ingest::ParseError::NoValidRows { diagnostics }) => {
            for d in &diagnostics {
                eprintln!("{name}: {d}");
            }
            Err(data(anyhow!("`{name}`: no valid rows")))
        }
        Err(err) => Err(data(anyhow!("`{name}`: {err}"))),
    }
}

/// Commanded speed/duration from either a preset or the explicit pair.
fn resolve_commanded(
    preset: &Option<String>,
    speed_mm_s: Option<f64>,
    duration_s: Option<f64>,
) -> CliResult<(f64, f64)> {
    match (preset, speed_mm_s, duration_s) {
        (Some(name), None, None) => presets::preset(name)
            .ok_or_else(|| usage(format!("unknown preset `{name}` (expected test1..test7)"))),
        (None, Some(speed), Some(duration)) => Ok((speed, duration)),
        _ => Err(usage(
            "provide either --preset or both --speed-mm-s and --duration-s",
        )),
    }
}

/// Parse the `key=val,...` noise spec on top of the defaults.
fn resolve_noise(spec: Option<&str>, seed: u64) -> CliResult<NoiseModel> {
    let mut noise = NoiseModel {
        seed,
        ..NoiseModel::default()
    };
    let Some(spec) = spec else {
        return Ok(noise);
    };
    for part in spec.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| usage(format!("noise entry `{part}` is not key=val")))?;
        let float = || -> CliResult<f64> {
            value
                .parse()
                .map_err(|_| usage(format!("cannot parse noise value `{value}` for `{key}`")))
        };
        match key {
            "quantize" => {
                noise.quantize = match value {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => {
                        return Err(usage(format!(
                            "noise quantize must be true/false, got `{value}`"
                        )))
                    }
                }
            }
            "sigma" => noise.gaussian_sigma = float()?,
            "spike_prob" => noise.spike_prob = float()?,
            "spike_mag" => noise.spike_magnitude = float()?,
            "bias_left" => noise.wheel_bias.0 = float()?,
            "bias_right" => noise.wheel_bias.1 = float()?,
            "bias" => {
                let b = float()?;
                noise.wheel_bias = (b, b);
            }
            other => {
                return Err(usage(format!(
                    "unknown noise key `{other}` (expected quantize, sigma, spike_prob, \
                     spike_mag, bias_left, bias_right, bias)"
                )))
            }
        }
    }
    Ok(noise)
}

/// Mean compass heading over the magnetometer readings, reported to stderr;
/// never fused into the pose update.
fn compass_note(doc: &LogDocument) {
    if !doc.has_magnetometer {
        return;
    }
    let mut sum_sin = 0.0;
    let mut sum_cos = 0.0;
    let mut count = 0usize;
    for s in &doc.samples {
        if let Some(m) = s.mag {
            if let Ok(h) = heading_from_magnetometer(f64::from(m.x), f64::from(m.y)) {
                sum_sin += h.sin();
                sum_cos += h.cos();
                count += 1;
            }
        }
    }
    if count > 0 {
        let mean = sum_sin.atan2(sum_cos);
        eprintln!(
            "compass: {count} magnetometer readings, mean heading {mean:.4} rad \
             (reported only, not fused)"
        );
    }
}

fn track_points(
    doc: &LogDocument,
    geom: &RobotGeometry,
    mode: UpdateMode,
) -> CliResult<Vec<TrajectoryPoint>> {
    odometry::track(&doc.samples, geom, mode, Pose::origin())
        .map_err(|e| data(anyhow!("`{}`: {e}", doc.source_name)))
}

pub(crate) fn track_cmd_single(args: &TrackArgs, input: &Path) -> CliResult<()> {
    let doc = load_log(input)?;
    compass_note(&doc);
    let points = track_points(&doc, &args.geometry, args.mode)?;
    write_output(args.output.as_deref(), &ingest::write_trajectory(&points))?;
    if let Some(plot_path) = &args.plot {
        write_file(plot_path, &plot::emit_plot(&points, None).map_err(data)?)?;
    }
    Ok(())
}

pub(crate) fn track(args: TrackArgs) -> CliResult<()> {
    if args.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    if args.input.len() == 1 {
        return track_cmd_single(&args, &args.input[0]);
    }

    // batch mode: outputs are partitioned per input under a directory
    let out_dir = args
        .output
        .as_deref()
        .ok_or_else(|| usage("batch tracking requires --output <directory>"))?;
    if args.plot.is_some() {
        return Err(usage("--plot is only available with a single --input"));
    }
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create `{}`", out_dir.display()))
        .map_err(CliError::Data)?;

    let jobs = args.jobs.min(args.input.len());
    let chunk_size = args.input.len().div_ceil(jobs);
    let failures: Mutex<Vec<String>> = Mutex::new(Vec::new());
    let geom = &args.geometry;
    let mode = args.mode;
    let failures_ref = &failures;
    std::thread::scope(|scope| {
        for chunk in args.input.chunks(chunk_size) {
            scope.spawn(move || {
                for input in chunk {
                    let result = track_batch_one(input, out_dir, geom, mode);
                    if let Err(err) = result {
                        let msg = match err {
                            CliError::Usage(m) => m,
                            CliError::Data(e) => format!("{e:#}"),
                        };
                        failures_ref
                            .lock()
                            .expect("failure list poisoned")
                            .push(format!("{}: {msg}", input.display()));
                    }
                }
            });
        }
    });
    let failures = failures.into_inner().expect("failure list poisoned");
    if failures.is_empty() {
        Ok(())
    } else {
        Err(data(anyhow!(
            "{} of {} inputs failed:\n  {}",
            failures.len(),
            args.input.len(),
            failures.join("\n  ")
        )))
    }
}

fn track_batch_one(
    input: &Path,
    out_dir: &Path,
    geom: &RobotGeometry,
    mode: UpdateMode,
) -> CliResult<()> {
    let doc = load_log(input)?;
    let points = track_points(&doc, geom, mode)?;
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "log".to_string());
    let out = out_dir.join(format!("{stem}.trajectory.csv"));
    write_file(&out, &ingest::write_trajectory(&points))
}

pub(crate) fn simulate(args: SimulateArgs) -> CliResult<()> {
    let (speed, duration) = resolve_commanded(&args.preset, args.speed_mm_s, args.duration_s)?;
    let noise = resolve_noise(args.noise.as_deref(), args.seed)?;
    let plan = MotionPlan {
        segments: vec![Segment::Straight {
            speed_mm_s: speed,
            duration_s: duration,
        }],
        dt_s: args.dt_s,
    };
    let result = simulator::simulate(&plan, &args.geometry, &noise).map_err(data)?;

    if !noise.quantize {
        eprintln!(
            "warning: quantize=false emits fractional counts; the canonical log format \
             requires integers, so this file will not re-parse"
        );
    }
    write_file(&args.output, &ingest::write_log(&result.log))?;
    if let Some(truth_path) = &args.truth {
        write_file(truth_path, &ingest::write_truth(&result.truth))?;
    }
    if let Some(meta_path) = &args.meta {
        let meta = serde_json::json!({
            "rng_algorithm": RNG_ALGORITHM,
            "seed": noise.seed,
            "speed_mm_s": speed,
            "duration_s": duration,
            "dt_s": args.dt_s,
            "samples": result.log.samples.len(),
            "quantize": noise.quantize,
            "gaussian_sigma": noise.gaussian_sigma,
            "spike_prob": noise.spike_prob,
            "spike_magnitude": noise.spike_magnitude,
            "wheel_bias": [noise.wheel_bias.0, noise.wheel_bias.1],
        });
        let mut text = serde_json::to_string_pretty(&meta).expect("meta serializes");
        text.push('\n');
        write_file(meta_path, &text)?;
    }
    eprintln!(
        "simulate: rng={RNG_ALGORITHM} seed={} samples={} -> {}",
        noise.seed,
        result.log.samples.len(),
        args.output.display()
    );
    Ok(())
}

pub(crate) fn scan(args: ScanArgs) -> CliResult<()> {
    if args.repaired.is_some() && args.policy == RepairPolicy::FlagOnly {
        return Err(usage(
            "--repaired requires --policy hold or --policy interp",
        ));
    }
    let doc = load_log(&args.input)?;
    let cfg = ScanConfig {
        max_delta_per_step: args.max_delta,
        reference_dt: args.reference_dt,
        policy: args.policy,
    };
    let mut report = anomaly::scan(&doc.samples, &args.geometry, &cfg)
        .map_err(|e| data(anyhow!("`{}`: {e}", args.input.display())))?;
    eprintln!(
        "scan: {} flagged steps over {} samples (threshold {} counts per {} s)",
        report.flagged_steps.len(),
        doc.samples.len(),
        cfg.max_delta_per_step,
        cfg.reference_dt
    );
    write_output(
        args.output.as_deref(),
        &ingest::write_scan_report(&report, cfg.policy),
    )?;
    if let Some(repaired_path) = &args.repaired {
        let (samples, notes) = anomaly::repair(&doc.samples, &report, &cfg);
        report.repaired = true;
        for note in &notes {
            eprintln!("repair: step {} {}: {}", note.step, note.side, note.message);
        }
        let repaired_doc = LogDocument::new(samples, doc.source_name.clone());
        write_file(repaired_path, &ingest::write_log(&repaired_doc))?;
    }
    Ok(())
}

pub(crate) fn smooth(args: SmoothArgs) -> CliResult<()> {
    let doc = load_log(&args.input)?;
    let points = track_points(&doc, &args.geometry, args.mode)?;
    // accumulated tracking already yields a continuous heading sequence,
    // which is what the linear filter expects
    let headings: Vec<f64> = points.iter().map(|p| p.pose.theta).collect();
    let cfg = KalmanConfig::new(args.q, args.r);
    let smoothed = kalman_smooth(&headings, &cfg).map_err(data)?;

    let out_points: Vec<TrajectoryPoint> = if args.replay_pose {
        let poses = redrive_poses(&points, &smoothed, Pose::origin());
        points
            .iter()
            .zip(poses)
            .map(|(p, pose)| TrajectoryPoint { pose, ..*p })
            .collect()
    } else {
        points
    };
    write_output(
        args.output.as_deref(),
        &ingest::write_smoothed_trajectory(&out_points, &smoothed),
    )
}

pub(crate) fn analyze(args: AnalyzeArgs) -> CliResult<()> {
    let (speed, duration) = resolve_commanded(&args.preset, args.speed_mm_s, args.duration_s)?;
    let doc = load_log(&args.input)?;
    let points = track_points(&doc, &args.geometry, args.mode)?;
    let report = build_report(&points, speed, duration, args.actual_m, args.mode)
        .map_err(|e| data(anyhow!("`{}`: {e}", args.input.display())))?;
    write_output(
        args.output.as_deref(),
        &ingest::write_report(&report, &args.geometry),
    )?;
    if let Some(plot_path) = &args.plot {
        write_file(
            plot_path,
            &plot::emit_plot(&points, report.fit.as_ref()).map_err(data)?,
        )?;
    }
    Ok(())
}

pub(crate) fn report(args: ReportArgs) -> CliResult<()> {
    let (speed, duration) = resolve_commanded(&args.preset, args.speed_mm_s, args.duration_s)?;
    let doc = load_log(&args.input)?;
    let cfg = ScanConfig {
        max_delta_per_step: args.max_delta,
        reference_dt: args.reference_dt,
        policy: args.policy,
    };
    let mut scan_report = anomaly::scan(&doc.samples, &args.geometry, &cfg)
        .map_err(|e| data(anyhow!("`{}`: {e}", args.input.display())))?;
    eprintln!(
        "scan: {} flagged steps (policy {})",
        scan_report.flagged_steps.len(),
        cfg.policy
    );

    let samples = if cfg.policy != RepairPolicy::FlagOnly && !scan_report.is_clean() {
        let (repaired, notes) = anomaly::repair(&doc.samples, &scan_report, &cfg);
        for note in &notes {
            eprintln!("repair: step {} {}: {}", note.step, note.side, note.message);
        }
        scan_report.repaired = true;
        repaired
    } else {
        doc.samples.clone()
    };

    let mut points = odometry::track(&samples, &args.geometry, args.mode, Pose::origin())
        .map_err(|e| data(anyhow!("`{}`: {e}", args.input.display())))?;
    anomaly::apply_flags(&mut points, &scan_report);

    let run_report = build_report(&points, speed, duration, args.actual_m, args.mode)
        .map_err(|e| data(anyhow!("`{}`: {e}", args.input.display())))?;

    write_output(
        args.output.as_deref(),
        &ingest::write_report(&run_report, &args.geometry),
    )?;
    if let Some(traj_path) = &args.trajectory {
        write_file(traj_path, &ingest::write_trajectory(&points))?;
    }
    if let Some(scan_path) = &args.scan_json {
        write_file(
            scan_path,
            &ingest::write_scan_report(&scan_report, cfg.policy),
        )?;
    }
    if let Some(plot_path) = &args.plot {
        write_file(
            plot_path,
            &plot::emit_plot(&points, run_report.fit.as_ref()).map_err(data)?,
        )?;
    }
    Ok(())
}
