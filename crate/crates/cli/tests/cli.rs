//! In-process CLI tests: subcommand behaviour, exit codes, determinism, and
//! the pipeline-equals-library golden check.

use std::fs;
use std::path::Path;

use odokit_core::ingest::{parse_log, write_log, write_trajectory};
use odokit_core::odometry::track;
use odokit_core::simulator::{inject_spike, simulate, MotionPlan, NoiseModel};
use odokit_core::{Pose, RobotGeometry, UpdateMode, WheelSide};

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["odokit"];
    argv.extend_from_slice(args);
    odokit::run(argv)
}

fn write_sim_log(path: &Path, noise: &NoiseModel, speed: f64, duration: f64) {
    let plan = MotionPlan::straight(speed, duration);
    let result = simulate(&plan, &RobotGeometry::roomba_600(), noise).unwrap();
    fs::write(path, write_log(&result.log)).unwrap();
}

#[test]
fn track_pipeline_equals_library_composition() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("run.csv");
    write_sim_log(&log_path, &NoiseModel::default(), 75.0, 20.0);
    let out_path = dir.path().join("traj.csv");

    let code = run(&[
        "track",
        "--input",
        log_path.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    // library route over the same file
    let text = fs::read_to_string(&log_path).unwrap();
    let (doc, _) = parse_log(&text, "run.csv").unwrap();
    let points = track(
        &doc.samples,
        &RobotGeometry::roomba_600(),
        UpdateMode::Accumulated,
        Pose::origin(),
    )
    .unwrap();
    assert_eq!(
        fs::read_to_string(&out_path).unwrap(),
        write_trajectory(&points)
    );
}

#[test]
fn simulate_is_byte_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (path, seed) in [(&a, "42"), (&b, "42"), (&c, "43")] {
        let code = run(&[
            "simulate",
            "--preset",
            "test1",
            "--noise",
            "sigma=4,spike_prob=0.01",
            "--seed",
            seed,
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let (a, b, c) = (
        fs::read(&a).unwrap(),
        fs::read(&b).unwrap(),
        fs::read(&c).unwrap(),
    );
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn scan_reports_and_repairs_an_injected_spike() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("spiked.csv");
    let plan = MotionPlan::straight(75.0, 30.0);
    let result = simulate(&plan, &RobotGeometry::roomba_600(), &NoiseModel::default()).unwrap();
    let spiked = inject_spike(&result.log, 12, WheelSide::Left, 400.0).unwrap();
    fs::write(&log_path, write_log(&spiked)).unwrap();

    let scan_path = dir.path().join("scan.json");
    let repaired_path = dir.path().join("repaired.csv");
    let code = run(&[
        "scan",
        "--input",
        log_path.to_str().unwrap(),
        "--policy",
        "hold",
        "--output",
        scan_path.to_str().unwrap(),
        "--repaired",
        repaired_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    let scan: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&scan_path).unwrap()).unwrap();
    assert_eq!(scan["policy"], "hold");
    assert_eq!(scan["flagged_steps"].as_array().unwrap().len(), 1);
    assert_eq!(scan["flagged_steps"][0]["step"], 12);
    assert_eq!(scan["flagged_steps"][0]["side"], "left");

    // the repaired log rescans clean
    let rescan_path = dir.path().join("rescan.json");
    let code = run(&[
        "scan",
        "--input",
        repaired_path.to_str().unwrap(),
        "--output",
        rescan_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let rescan: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&rescan_path).unwrap()).unwrap();
    assert!(rescan["flagged_steps"].as_array().unwrap().is_empty());
}

#[test]
fn scan_repaired_requires_a_repairing_policy() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("x.csv");
    write_sim_log(&log_path, &NoiseModel::default(), 75.0, 5.0);
    let code = run(&[
        "scan",
        "--input",
        log_path.to_str().unwrap(),
        "--repaired",
        dir.path().join("y.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
}

#[test]
fn smooth_appends_theta_smooth_column() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("noisy.csv");
    let noise = NoiseModel {
        gaussian_sigma: 6.0,
        seed: 5,
        ..NoiseModel::default()
    };
    write_sim_log(&log_path, &noise, 75.0, 30.0);
    let out = dir.path().join("smooth.csv");
    let code = run(&[
        "smooth",
        "--input",
        log_path.to_str().unwrap(),
        "--q",
        "1e-6",
        "--r",
        "0.0076",
        "--replay-pose",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.ends_with(",theta_smooth_rad"));
    assert_eq!(text.lines().count(), 61); // header + 60 steps
}

#[test]
fn analyze_reports_the_preset_theoretical_distance() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("t1.csv");
    write_sim_log(&log_path, &NoiseModel::default(), 75.0, 65.0);
    let report_path = dir.path().join("report.json");
    let code = run(&[
        "analyze",
        "--input",
        log_path.to_str().unwrap(),
        "--preset",
        "test1",
        "--actual-m",
        "5.83",
        "--output",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["theoretical_distance_m"], 4.875);
    assert_eq!(report["actual_distance_m"], 5.83);
    assert_eq!(report["mode"], "accumulated");
    let measured = report["measured_distance_m"].as_f64().unwrap();
    assert!((measured - 4.875).abs() < 0.002);
}

#[test]
fn report_marks_flags_and_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("spiked.csv");
    let plan = MotionPlan::straight(75.0, 30.0);
    let result = simulate(&plan, &RobotGeometry::roomba_600(), &NoiseModel::default()).unwrap();
    let spiked = inject_spike(&result.log, 20, WheelSide::Right, 500.0).unwrap();
    fs::write(&log_path, write_log(&spiked)).unwrap();

    let report_path = dir.path().join("report.json");
    let traj_path = dir.path().join("traj.csv");
    let scan_path = dir.path().join("scan.json");
    let plot_path = dir.path().join("plot.svg");
    let code = run(&[
        "report",
        "--input",
        log_path.to_str().unwrap(),
        "--speed-mm-s",
        "75",
        "--duration-s",
        "30",
        "--policy",
        "hold",
        "--output",
        report_path.to_str().unwrap(),
        "--trajectory",
        traj_path.to_str().unwrap(),
        "--scan-json",
        scan_path.to_str().unwrap(),
        "--plot",
        plot_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    let traj = fs::read_to_string(&traj_path).unwrap();
    let flagged_rows: Vec<&str> = traj.lines().filter(|l| l.ends_with(",1")).collect();
    assert_eq!(flagged_rows.len(), 1);
    assert!(flagged_rows[0].starts_with("20,"));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    // hold repair zeroes the spiked delta: half a step of distance is lost
    let measured = report["measured_distance_m"].as_f64().unwrap();
    assert!((measured - 2.25).abs() < 0.05, "measured {measured}");
    assert!(fs::read_to_string(&plot_path).unwrap().starts_with("<svg"));
    assert!(fs::read_to_string(&scan_path)
        .unwrap()
        .contains("\"step\": 20"));
}

#[test]
fn batch_track_partitions_outputs_per_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut inputs = Vec::new();
    for i in 0..3 {
        let p = dir.path().join(format!("run{i}.csv"));
        let noise = NoiseModel {
            seed: i,
            ..NoiseModel::default()
        };
        write_sim_log(&p, &noise, 50.0 + 10.0 * i as f64, 10.0);
        inputs.push(p);
    }
    let out_dir = dir.path().join("out");
    let mut args = vec!["track"];
    let input_strs: Vec<String> = inputs
        .iter()
        .map(|p| p.to_str().unwrap().to_string())
        .collect();
    for s in &input_strs {
        args.push("--input");
        args.push(s);
    }
    let out_str = out_dir.to_str().unwrap().to_string();
    args.extend_from_slice(&["--output", &out_str, "--jobs", "2"]);
    assert_eq!(run(&args), 0);

    for i in 0..3 {
        let traj = out_dir.join(format!("run{i}.trajectory.csv"));
        let text = fs::read_to_string(&traj).unwrap();
        assert_eq!(text.lines().count(), 21); // header + 20 steps
    }
}

#[test]
fn minimal_two_sample_log_tracks_to_one_zero_row() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("tiny.csv");
    fs::write(
        &log_path,
        "t_s,left_counts,right_counts,mag_x,mag_y,mag_z\n0,500,500,,,\n0.5,500,500,,,\n",
    )
    .unwrap();
    let out = dir.path().join("tiny.traj.csv");
    let code = run(&[
        "track",
        "--input",
        log_path.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    lines.next(); // header
    let row = lines.next().unwrap();
    assert!(row.starts_with("1,0.500000,0.000000,0.000000,0.000000"));
    assert!(lines.next().is_none());
}

#[test]
fn exit_codes_separate_usage_from_data_errors() {
    // unknown flag
    assert_eq!(run(&["track", "--bogus"]), 1);
    // unknown subcommand
    assert_eq!(run(&["fly"]), 1);
    // preset and explicit motion are mutually exclusive
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("ok.csv");
    write_sim_log(&log_path, &NoiseModel::default(), 75.0, 5.0);
    assert_eq!(
        run(&[
            "analyze",
            "--input",
            log_path.to_str().unwrap(),
            "--preset",
            "test1",
            "--speed-mm-s",
            "75",
            "--duration-s",
            "65",
        ]),
        1
    );
    // missing file is a data error
    assert_eq!(run(&["track", "--input", "/nonexistent/никогда.csv"]), 2);
    // malformed log is a data error
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "not,a,log\n1,2,3\n").unwrap();
    assert_eq!(run(&["track", "--input", bad.to_str().unwrap()]), 2);
    // log whose rows are all invalid is a data error
    let empty = dir.path().join("allbad.csv");
    fs::write(
        &empty,
        "t_s,left_counts,right_counts,mag_x,mag_y,mag_z\nx,y,z,,,\n",
    )
    .unwrap();
    assert_eq!(run(&["track", "--input", empty.to_str().unwrap()]), 2);
}

#[test]
fn track_plot_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("run.csv");
    let noise = NoiseModel {
        gaussian_sigma: 3.0,
        seed: 11,
        ..NoiseModel::default()
    };
    write_sim_log(&log_path, &noise, 100.0, 15.0);
    let mut plots = Vec::new();
    for name in ["p1.svg", "p2.svg"] {
        let plot_path = dir.path().join(name);
        let out_path = dir.path().join(format!("{name}.csv"));
        let code = run(&[
            "track",
            "--input",
            log_path.to_str().unwrap(),
            "--output",
            out_path.to_str().unwrap(),
            "--plot",
            plot_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        plots.push(fs::read(&plot_path).unwrap());
    }
    assert_eq!(plots[0], plots[1]);
}
