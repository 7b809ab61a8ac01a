//! Canonical file formats: the encoder log CSV, trajectory CSV, truth CSV
//! and the run/scan report JSON documents.
//!
//! Log format: header `t_s,left_counts,right_counts,mag_x,mag_y,mag_z`, one
//! row per sample. Times are decimal seconds, counts are integers, the three
//! magnetometer cells are optional integers (empty cells allowed). UTF-8
//! with LF line endings, trailing newline optional. Output is locale
//! independent: '.' decimal point, ',' separator, always.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::RunReport;
use crate::anomaly::{AnomalyReport, RepairPolicy};
use crate::geometry::RobotGeometry;
use crate::odometry::{EncoderSample, MagReading, Pose, TrajectoryPoint};

pub const LOG_HEADER: &str = "t_s,left_counts,right_counts,mag_x,mag_y,mag_z";
pub const TRAJECTORY_HEADER: &str =
    "n,t_s,delta_left,delta_right,beta_mm,mu_rad,theta_rad,x_mm,y_mm,v_mm_s,flagged";
pub const SMOOTHED_TRAJECTORY_HEADER: &str =
    "n,t_s,delta_left,delta_right,beta_mm,mu_rad,theta_rad,x_mm,y_mm,v_mm_s,flagged,theta_smooth_rad";
pub const TRUTH_HEADER: &str = "t_s,x_mm,y_mm,theta_rad";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// One parser finding, tied to a 1-based line number of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseDiagnostic {
    pub line_number: usize,
    pub severity: Severity,
    pub message: String,
}

impl std::fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "line {}: {}: {}",
            self.line_number, self.severity, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("malformed header: expected `{LOG_HEADER}`, got `{found}`")]
    MalformedHeader { found: String },
    #[error("no valid rows ({} rows rejected)", diagnostics.len())]
    NoValidRows { diagnostics: Vec<ParseDiagnostic> },
}

/// A validated encoder log.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDocument {
    pub samples: Vec<EncoderSample<f64>>,
    pub source_name: String,
    pub has_magnetometer: bool,
}

impl LogDocument {
    pub fn new(samples: Vec<EncoderSample<f64>>, source_name: impl Into<String>) -> Self {
        let has_magnetometer = samples.iter().any(|s| s.mag.is_some());
        Self {
            samples,
            source_name: source_name.into(),
            has_magnetometer,
        }
    }
}

fn diag(line_number: usize, severity: Severity, message: impl Into<String>) -> ParseDiagnostic {
    ParseDiagnostic {
        line_number,
        severity,
        message: message.into(),
    }
}

/// Parse the canonical log CSV. Rows that fail validation are dropped, each
/// with exactly one diagnostic; a log whose data rows all fail is a parse
/// failure.
pub fn parse_log(
    text: &str,
    source_name: &str,
) -> Result<(LogDocument, Vec<ParseDiagnostic>), ParseError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("").trim_end_matches('\r');
    if header != LOG_HEADER {
        return Err(ParseError::MalformedHeader {
            found: header.to_string(),
        });
    }

    let mut samples: Vec<EncoderSample<f64>> = Vec::new();
    let mut diagnostics: Vec<ParseDiagnostic> = Vec::new();
    let mut data_rows = 0usize;

    for (idx, raw_line) in lines.enumerate() {
        let line_number = idx + 2; // header is line 1
        let line = raw_line.trim_end_matches('\r');
        data_rows += 1;

        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            diagnostics.push(diag(
                line_number,
                Severity::Error,
                format!("expected 6 fields, got {}", fields.len()),
            ));
            continue;
        }

        let t = match fields[0].parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => t,
            Ok(t) => {
                diagnostics.push(diag(
                    line_number,
                    Severity::Error,
                    format!("time must be finite and non-negative, got {t}"),
                ));
                continue;
            }
            Err(_) => {
                diagnostics.push(diag(
                    line_number,
                    Severity::Error,
                    format!("cannot parse time `{}`", fields[0]),
                ));
                continue;
            }
        };
        if let Some(last) = samples.last() {
            if t <= last.t {
                diagnostics.push(diag(
                    line_number,
                    Severity::Error,
                    format!("non-monotonic time: {t} does not increase past {}", last.t),
                ));
                continue;
            }
        }

        // counts must be integers; i64 parsing enforces that
        let mut counts = [0f64; 2];
        let mut bad_count = false;
        for (slot, (name, field)) in counts
            .iter_mut()
            .zip([("left", fields[1]), ("right", fields[2])])
        {
            match field.parse::<i64>() {
                Ok(c) => *slot = c as f64,
                Err(_) => {
                    diagnostics.push(diag(
                        line_number,
                        Severity::Error,
                        format!("cannot parse {name} counts `{field}` (integer required)"),
                    ));
                    bad_count = true;
                    break;
                }
            }
        }
        if bad_count {
            continue;
        }

        let mag_fields = [fields[3], fields[4], fields[5]];
        let present = mag_fields.iter().filter(|f| !f.is_empty()).count();
        let mag = match present {
            0 => None,
            3 => {
                let mut vals = [0i32; 3];
                let mut ok = true;
                for (v, field) in vals.iter_mut().zip(mag_fields) {
                    match field.parse::<i32>() {
                        Ok(x) => *v = x,
                        Err(_) => {
                            diagnostics.push(diag(
                                line_number,
                                Severity::Error,
                                format!("cannot parse magnetometer value `{field}`"),
                            ));
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                Some(MagReading {
                    x: vals[0],
                    y: vals[1],
                    z: vals[2],
                })
            }
            _ => {
                // keep the row, drop the partial reading
                diagnostics.push(diag(
                    line_number,
                    Severity::Warning,
                    "partial magnetometer reading ignored (all three of mag_x, mag_y, mag_z \
                     required)",
                ));
                None
            }
        };

        let mut sample = EncoderSample::new(t, counts[0], counts[1]);
        if let Some(m) = mag {
            sample = sample.with_mag(m);
        }
        samples.push(sample);
    }

    if data_rows > 0 && samples.is_empty() {
        return Err(ParseError::NoValidRows { diagnostics });
    }
    Ok((LogDocument::new(samples, source_name), diagnostics))
}

/// Format a count cell: integral values print as integers, anything else
/// (simulator output with quantization off) with full round-trip precision.
fn push_count(out: &mut String, c: f64) {
    if c.fract() == 0.0 && c.abs() < 9.007_199_254_740_992e15 {
        let _ = write!(out, "{}", c as i64);
    } else {
        let _ = write!(out, "{c}");
    }
}

/// Render a log document in the canonical format. `parse_log` of the result
/// reproduces the document exactly.
pub fn write_log(doc: &LogDocument) -> String {
    let mut out = String::with_capacity(32 * (doc.samples.len() + 1));
    out.push_str(LOG_HEADER);
    out.push('\n');
    for s in &doc.samples {
        let _ = write!(out, "{},", s.t);
        push_count(&mut out, s.left);
        out.push(',');
        push_count(&mut out, s.right);
        match s.mag {
            Some(m) => {
                let _ = write!(out, ",{},{},{}", m.x, m.y, m.z);
            }
            None => out.push_str(",,,"),
        }
        out.push('\n');
    }
    out
}

fn push_trajectory_row(out: &mut String, p: &TrajectoryPoint<f64>) {
    let _ = write!(
        out,
        "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
        p.n,
        p.t,
        p.delta_left,
        p.delta_right,
        p.beta,
        p.mu,
        p.pose.theta,
        p.pose.x,
        p.pose.y,
        p.v,
        u8::from(p.flagged)
    );
}

/// Trajectory CSV: one row per step, numeric fields with six decimals,
/// byte-deterministic for identical input.
pub fn write_trajectory(points: &[TrajectoryPoint<f64>]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for p in points {
        push_trajectory_row(&mut out, p);
        out.push('\n');
    }
    out
}

/// Trajectory CSV with the smoothed heading appended as a final column.
/// `smoothed` must be parallel to `points`.
pub fn write_smoothed_trajectory(points: &[TrajectoryPoint<f64>], smoothed: &[f64]) -> String {
    debug_assert_eq!(points.len(), smoothed.len());
    let mut out = String::with_capacity(72 * (points.len() + 1));
    out.push_str(SMOOTHED_TRAJECTORY_HEADER);
    out.push('\n');
    for (p, s) in points.iter().zip(smoothed) {
        push_trajectory_row(&mut out, p);
        let _ = write!(out, ",{s:.6}");
        out.push('\n');
    }
    out
}

/// Ground-truth CSV emitted by the simulator.
pub fn write_truth(truth: &[(f64, Pose<f64>)]) -> String {
    let mut out = String::with_capacity(40 * (truth.len() + 1));
    out.push_str(TRUTH_HEADER);
    out.push('\n');
    for (t, pose) in truth {
        let _ = writeln!(out, "{},{:.6},{:.6},{:.6}", t, pose.x, pose.y, pose.theta);
    }
    out
}

#[derive(Serialize)]
struct FitDoc {
    slope: f64,
    intercept: f64,
    r2: f64,
}

#[derive(Serialize)]
struct GeometryDoc {
    wheel_diameter_mm: f64,
    wheelbase_mm: f64,
    counts_per_rev: f64,
    wrap_modulus: Option<u32>,
}

#[derive(Serialize)]
struct ReportDoc {
    actual_distance_m: Option<f64>,
    theoretical_distance_m: f64,
    measured_distance_m: f64,
    fit: Option<FitDoc>,
    drift_deg: f64,
    mode: String,
    geometry: GeometryDoc,
}

/// Run report JSON (pretty-printed, trailing newline, fixed key order).
pub fn write_report(report: &RunReport<f64>, geom: &RobotGeometry<f64>) -> String {
    let doc = ReportDoc {
        actual_distance_m: report.actual_distance_m,
        theoretical_distance_m: report.theoretical_distance_m,
        measured_distance_m: report.measured_distance_m,
        fit: report.fit.map(|f| FitDoc {
            slope: f.slope,
            intercept: f.intercept,
            r2: f.r2,
        }),
        drift_deg: report.drift_deg,
        mode: report.mode.to_string(),
        geometry: GeometryDoc {
            wheel_diameter_mm: geom.wheel_diameter_mm(),
            wheelbase_mm: geom.wheelbase_mm(),
            counts_per_rev: geom.counts_per_rev(),
            wrap_modulus: geom.wrap_modulus(),
        },
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
    out.push('\n');
    out
}

#[derive(Serialize)]
struct FlagDoc {
    step: usize,
    side: String,
    observed: f64,
    allowed: f64,
}

#[derive(Serialize)]
struct ScanDoc {
    flagged_steps: Vec<FlagDoc>,
    policy: String,
}

/// Scan report JSON.
pub fn write_scan_report(report: &AnomalyReport, policy: RepairPolicy) -> String {
    let doc = ScanDoc {
        flagged_steps: report
            .flagged_steps
            .iter()
            .map(|f| FlagDoc {
                step: f.step,
                side: f.side.to_string(),
                observed: f.observed,
                allowed: f.allowed,
            })
            .collect(),
        policy: policy.to_string(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("scan report serializes");
    out.push('\n');
    out
}
