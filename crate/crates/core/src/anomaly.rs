//! Threshold-based error scanning of encoder logs, plus offline repair
//! policies.
//!
//! A wheel delta that exceeds the per-step count threshold is flagged; left
//! and right wheels are checked independently. The threshold scales with the
//! actual step duration so logs recorded at other rates than the reference
//! stay scannable.

use std::collections::HashSet;

use crate::geometry::RobotGeometry;
use crate::odometry::{self, EncoderSample, OdometryError, TrajectoryPoint, WheelSide};
use crate::scalar::Real;

/// What to do with flagged steps.
///
/// `FlagOnly` reports and leaves the log untouched. `HoldLast` repeats the
/// previous cumulative count at the flagged step and shifts every later
/// count by the implied offset, so the flagged delta becomes zero while all
/// following deltas are preserved (the offline analogue of rejecting a
/// reading and keeping the previous one). `Interpolate` replaces the flagged
/// sample value with the linear interpolation between the nearest unflagged
/// neighbours, rounded to an integer; this suits transient single-sample
/// glitches rather than persistent counter jumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RepairPolicy {
    #[default]
    FlagOnly,
    HoldLast,
    Interpolate,
}

impl std::fmt::Display for RepairPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RepairPolicy::FlagOnly => "flag",
            RepairPolicy::HoldLast => "hold",
            RepairPolicy::Interpolate => "interp",
        })
    }
}

impl std::str::FromStr for RepairPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flag" => Ok(RepairPolicy::FlagOnly),
            "hold" => Ok(RepairPolicy::HoldLast),
            "interp" => Ok(RepairPolicy::Interpolate),
            other => Err(format!(
                "unknown repair policy `{other}` (expected `flag`, `hold` or `interp`)"
            )),
        }
    }
}

/// Scanner configuration. `max_delta_per_step` is the count budget for one
/// `reference_dt`-long step; the allowed delta for a step of duration `dt`
/// is scaled by `dt / reference_dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub max_delta_per_step: f64,
    pub reference_dt: f64,
    pub policy: RepairPolicy,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            max_delta_per_step: 300.0,
            reference_dt: 0.5,
            policy: RepairPolicy::FlagOnly,
        }
    }
}

/// One threshold violation: step `n` covers the sample pair (n-1, n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlaggedStep {
    pub step: usize,
    pub side: WheelSide,
    /// Magnitude of the unwrapped delta that tripped the threshold.
    pub observed: f64,
    pub allowed: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnomalyReport {
    pub flagged_steps: Vec<FlaggedStep>,
    pub repaired: bool,
}

impl AnomalyReport {
    pub fn is_clean(&self) -> bool {
        self.flagged_steps.is_empty()
    }
}

/// Note emitted by `repair` when a flag could not be handled by the
/// requested policy (e.g. interpolation at the log boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct RepairNote {
    pub step: usize,
    pub side: WheelSide,
    pub message: String,
}

/// Scan consecutive sample pairs and flag every wheel whose unwrapped delta
/// magnitude strictly exceeds the scaled threshold.
pub fn scan(
    samples: &[EncoderSample<f64>],
    geom: &RobotGeometry<f64>,
    cfg: &ScanConfig,
) -> Result<AnomalyReport, OdometryError> {
    if samples.len() < 2 {
        return Err(OdometryError::EmptyLog);
    }
    let mut flagged_steps = Vec::new();
    for (i, pair) in samples.windows(2).enumerate() {
        let (prev, curr) = (&pair[0], &pair[1]);
        let (dl, dr) = odometry::delta_counts(prev, curr, geom)?;
        let dt = curr.t - prev.t;
        let allowed = cfg.max_delta_per_step * (dt / cfg.reference_dt);
        for (side, delta) in [(WheelSide::Left, dl), (WheelSide::Right, dr)] {
            if delta.abs() > allowed {
                flagged_steps.push(FlaggedStep {
                    step: i + 1,
                    side,
                    observed: delta.abs(),
                    allowed,
                });
            }
        }
    }
    Ok(AnomalyReport {
        flagged_steps,
        repaired: false,
    })
}

/// Apply the configured repair policy to a sample log.
///
/// The report must come from scanning the same samples. Returns the repaired
/// log together with notes about any policy fallbacks.
pub fn repair(
    samples: &[EncoderSample<f64>],
    report: &AnomalyReport,
    cfg: &ScanConfig,
) -> (Vec<EncoderSample<f64>>, Vec<RepairNote>) {
    let mut out = samples.to_vec();
    let mut notes = Vec::new();
    if report.is_clean() || cfg.policy == RepairPolicy::FlagOnly {
        return (out, notes);
    }

    let flagged: HashSet<(usize, WheelSide)> = report
        .flagged_steps
        .iter()
        .map(|f| (f.step, f.side))
        .collect();

    // Flags that end up handled by the hold-last pass below.
    let mut hold: HashSet<(usize, WheelSide)> = HashSet::new();

    match cfg.policy {
        RepairPolicy::Interpolate => {
            for f in &report.flagged_steps {
                let side = f.side;
                // Nearest unflagged neighbours in the original series. Step
                // indices flag the later sample of a pair, so sample 0 is
                // always available as a lower neighbour.
                let lower = (0..f.step).rev().find(|&j| !flagged.contains(&(j, side)));
                let upper = (f.step + 1..samples.len()).find(|&j| !flagged.contains(&(j, side)));
                match (lower, upper) {
                    (Some(j), Some(k)) => {
                        let (a, b) = (&samples[j], &samples[k]);
                        let frac = (samples[f.step].t - a.t) / (b.t - a.t);
                        let value =
                            (a.count(side) + (b.count(side) - a.count(side)) * frac).round();
                        out[f.step].set_count(side, value);
                    }
                    _ => {
                        // Boundary sample: no neighbour to interpolate
                        // toward, fall back to holding the previous count.
                        notes.push(RepairNote {
                            step: f.step,
                            side,
                            message: "unrepairable boundary: interpolation needs an \
                                      unflagged neighbour on both sides; held previous count"
                                .to_string(),
                        });
                        hold.insert((f.step, side));
                    }
                }
            }
        }
        RepairPolicy::HoldLast => {
            hold = flagged;
        }
        RepairPolicy::FlagOnly => unreachable!(),
    }

    if !hold.is_empty() {
        // Holding a count changes the level of the cumulative series from
        // that sample onward; carry the offset so later deltas survive.
        let mut offset = [0.0f64; 2];
        let idx = |side: WheelSide| match side {
            WheelSide::Left => 0,
            WheelSide::Right => 1,
        };
        for i in 0..out.len() {
            for side in [WheelSide::Left, WheelSide::Right] {
                let mut c = out[i].count(side) + offset[idx(side)];
                if i > 0 && hold.contains(&(i, side)) {
                    let prev = out[i - 1].count(side);
                    offset[idx(side)] += prev - c;
                    c = prev;
                }
                out[i].set_count(side, c);
            }
        }
    }

    (out, notes)
}

/// Mark trajectory points whose step index appears in the report.
pub fn apply_flags<R: Real>(points: &mut [TrajectoryPoint<R>], report: &AnomalyReport) {
    let flagged: HashSet<usize> = report.flagged_steps.iter().map(|f| f.step).collect();
    for p in points.iter_mut() {
        if flagged.contains(&p.n) {
            p.flagged = true;
        }
    }
}
