//! Command-line front end wiring the dead-reckoning pipeline together:
//! ingest -> anomaly scan -> tracking -> smoothing -> analysis, plus the
//! ground-truth simulator and plot emission.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
//! standard error; outputs are deterministic given identical inputs and
//! seeds.

mod commands;
pub mod plot;
pub mod presets;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use odokit_core::{RepairPolicy, RobotGeometry, UpdateMode};

pub use plot::{emit_plot, PlotError};

#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

pub(crate) type CliResult<T> = Result<T, CliError>;

impl From<anyhow::Error> for CliError {
    fn from(err: anyhow::Error) -> Self {
        CliError::Data(err)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "odokit",
    version,
    about = "Dead-reckoning toolkit for differential-drive encoder logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert an encoder log into a trajectory CSV
    Track(TrackArgs),
    /// Synthesize an encoder log (and optional ground truth) from a motion plan
    Simulate(SimulateArgs),
    /// Scan a log for encoder anomalies and optionally write a repaired log
    Scan(ScanArgs),
    /// Kalman-smooth the dead-reckoned heading sequence
    Smooth(SmoothArgs),
    /// Build the run report (distances, position fit, drift) for a log
    Analyze(AnalyzeArgs),
    /// Track, scan and analyze in one pass
    Report(ReportArgs),
}

fn parse_mode(s: &str) -> Result<UpdateMode, String> {
    s.parse()
}

fn parse_policy(s: &str) -> Result<RepairPolicy, String> {
    s.parse()
}

/// `roomba-600`, or `D,W,C` (wheel diameter mm, wheelbase mm, counts/rev)
/// with an optional fourth `M` for the counter modulus (0 disables
/// unwrapping; the default is the 16-bit modulus 65536).
fn parse_geometry(s: &str) -> Result<RobotGeometry, String> {
    if !s.contains(',') {
        return match s {
            "roomba-600" => Ok(RobotGeometry::roomba_600()),
            other => Err(format!(
                "unknown geometry preset `{other}` (expected `roomba-600` or `D,W,C[,M]`)"
            )),
        };
    }
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(format!(
            "expected `D,W,C` or `D,W,C,M`, got {} fields",
            parts.len()
        ));
    }
    let mut nums = [0.0f64; 3];
    for (slot, (name, part)) in nums.iter_mut().zip([
        ("wheel diameter", parts[0]),
        ("wheelbase", parts[1]),
        ("counts per revolution", parts[2]),
    ]) {
        *slot = part
            .parse()
            .map_err(|_| format!("cannot parse {name} `{part}`"))?;
    }
    let wrap = match parts.get(3) {
        None => Some(65_536),
        Some(raw) => {
            let m: u32 = raw
                .parse()
                .map_err(|_| format!("cannot parse wrap modulus `{raw}`"))?;
            (m != 0).then_some(m)
        }
    };
    RobotGeometry::new(nums[0], nums[1], nums[2], wrap).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct TrackArgs {
    /// Input log CSV; repeat to batch-process several logs
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Trajectory CSV path (stdout if omitted); a directory when batching
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "roomba-600", value_parser = parse_geometry)]
    geometry: RobotGeometry,
    /// Heading handling: `literal` or `accumulated`
    #[arg(long, default_value = "accumulated", value_parser = parse_mode)]
    mode: UpdateMode,
    /// Also write an SVG scatter of the positions (single input only)
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Worker threads for batch processing
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Named straight-run preset (test1..test7)
    #[arg(long)]
    preset: Option<String>,
    /// Commanded speed in mm/s (with --duration-s)
    #[arg(long)]
    speed_mm_s: Option<f64>,
    /// Commanded duration in seconds (with --speed-mm-s)
    #[arg(long)]
    duration_s: Option<f64>,
    /// Sample period in seconds
    #[arg(long, default_value_t = 0.5)]
    dt_s: f64,
    /// Noise spec `key=val,...`: quantize, sigma, spike_prob, spike_mag,
    /// bias_left, bias_right, bias
    #[arg(long)]
    noise: Option<String>,
    /// Seed for the chacha8 generator
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "roomba-600", value_parser = parse_geometry)]
    geometry: RobotGeometry,
    /// Log CSV path
    #[arg(long, required = true)]
    output: PathBuf,
    /// Also write the ground-truth pose CSV
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Also write a JSON sidecar recording the plan, seed and RNG algorithm
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long, required = true)]
    input: PathBuf,
    /// Count budget per reference step
    #[arg(long, default_value_t = 300.0)]
    max_delta: f64,
    /// Step duration the budget refers to, in seconds
    #[arg(long, default_value_t = 0.5)]
    reference_dt: f64,
    /// Repair policy: `flag`, `hold` or `interp`
    #[arg(long, default_value = "flag", value_parser = parse_policy)]
    policy: RepairPolicy,
    #[arg(long, default_value = "roomba-600", value_parser = parse_geometry)]
    geometry: RobotGeometry,
    /// Scan report JSON path (stdout if omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the repaired log here (requires a repairing --policy)
    #[arg(long)]
    repaired: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SmoothArgs {
    #[arg(long, required = true)]
    input: PathBuf,
    /// Smoothed trajectory CSV path (stdout if omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "roomba-600", value_parser = parse_geometry)]
    geometry: RobotGeometry,
    #[arg(long, default_value = "accumulated", value_parser = parse_mode)]
    mode: UpdateMode,
    /// Process variance of the heading random walk (rad^2/step)
    #[arg(long, default_value_t = 1e-6)]
    q: f64,
    /// Measurement variance (rad^2)
    #[arg(long, default_value_t = 0.0076)]
    r: f64,
    /// Re-drive the positions from the smoothed headings
    #[arg(long)]
    replay_pose: bool,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long, required = true)]
    input: PathBuf,
    /// Commanded-motion preset (test1..test7), for the theoretical distance
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    speed_mm_s: Option<f64>,
    #[arg(long)]
    duration_s: Option<f64>,
    /// Physically measured run length in metres, echoed into the report
    #[arg(long)]
    actual_m: Option<f64>,
    #[arg(long, default_value = "roomba-600", value_parser = parse_geometry)]
    geometry: RobotGeometry,
    #[arg(long, default_value = "accumulated", value_parser = parse_mode)]
    mode: UpdateMode,
    /// Report JSON path (stdout if omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write an SVG scatter with the fitted line
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long, required = true)]
    input: PathBuf,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    speed_mm_s: Option<f64>,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    actual_m: Option<f64>,
    #[arg(long, default_value = "roomba-600", value_parser = parse_geometry)]
    geometry: RobotGeometry,
    #[arg(long, default_value = "accumulated", value_parser = parse_mode)]
    mode: UpdateMode,
    #[arg(long, default_value_t = 300.0)]
    max_delta: f64,
    #[arg(long, default_value_t = 0.5)]
    reference_dt: f64,
    /// Repair policy applied before tracking: `flag`, `hold` or `interp`
    #[arg(long, default_value = "flag", value_parser = parse_policy)]
    policy: RepairPolicy,
    /// Report JSON path (stdout if omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the (flag-annotated) trajectory CSV
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Also write the scan report JSON
    #[arg(long)]
    scan_json: Option<PathBuf>,
    /// Also write an SVG scatter with the fitted line
    #[arg(long)]
    plot: Option<PathBuf>,
}

/// Parse and dispatch; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return 0;
            }
            eprint!("{err}");
            return 1;
        }
    };
    let result = match cli.command {
        Command::Track(args) => commands::track(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Scan(args) => commands::scan(args),
        Command::Smooth(args) => commands::smooth(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Report(args) => commands::report(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Data(err)) => {
            eprintln!("error: {err:#}");
            2
        }
    }
}
