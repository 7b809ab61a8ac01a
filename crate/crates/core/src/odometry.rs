//! Per-step dead-reckoning: counter deltas, distance and heading increments,
//! and the pose update that folds them into a trajectory.
//!
//! Conventions: millimetres, radians, seconds. Heading zero points along +y
//! and positive heading increments correspond to the right wheel leading
//! (the sine goes on x, the cosine on y). The compass heading helper is
//! provided for reporting only; it is never fused into the pose update.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::RobotGeometry;
use crate::scalar::{real, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdometryError {
    #[error("sample times must be strictly increasing (t={curr} follows t={prev})")]
    NonMonotonicTime { prev: f64, curr: f64 },
    #[error("time step must be positive (got {0})")]
    ZeroTimeStep(f64),
    #[error("magnetometer field is degenerate (mx = my = 0)")]
    DegenerateField,
    #[error("at least two samples are required")]
    EmptyLog,
}

/// Which drive wheel a delta, flag or fault refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WheelSide {
    Left,
    Right,
}

impl fmt::Display for WheelSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WheelSide::Left => "left",
            WheelSide::Right => "right",
        })
    }
}

/// Raw three-axis magnetometer reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MagReading {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

/// One timestamped raw reading: cumulative wheel counts plus an optional
/// magnetometer triple.
///
/// Counts are held as scalars so that simulator output can carry sub-count
/// precision when quantization is disabled; canonical log files always
/// contain integral counts (the parser enforces this).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderSample<R: Real> {
    /// Timestamp in seconds; strictly increasing within a log.
    pub t: R,
    /// Cumulative left-wheel count.
    pub left: R,
    /// Cumulative right-wheel count.
    pub right: R,
    pub mag: Option<MagReading>,
}

impl<R: Real> EncoderSample<R> {
    pub fn new(t: R, left: R, right: R) -> Self {
        Self {
            t,
            left,
            right,
            mag: None,
        }
    }

    pub fn with_mag(mut self, mag: MagReading) -> Self {
        self.mag = Some(mag);
        self
    }

    pub fn count(&self, side: WheelSide) -> R {
        match side {
            WheelSide::Left => self.left,
            WheelSide::Right => self.right,
        }
    }

    pub fn set_count(&mut self, side: WheelSide, value: R) {
        match side {
            WheelSide::Left => self.left = value,
            WheelSide::Right => self.right = value,
        }
    }
}

/// Planar pose. `theta` is the accumulated heading in radians, measured from
/// the +y axis with the sign convention of the update equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<R: Real> {
    pub x: R,
    pub y: R,
    pub theta: R,
}

impl<R: Real> Pose<R> {
    pub fn new(x: R, y: R, theta: R) -> Self {
        Self { x, y, theta }
    }

    pub fn origin() -> Self {
        Self {
            x: R::zero(),
            y: R::zero(),
            theta: R::zero(),
        }
    }

    /// Euclidean distance to another pose, ignoring heading.
    pub fn distance_to(&self, other: &Self) -> R {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// How per-step heading increments enter the position update.
///
/// `Literal` applies each increment directly to the sine/cosine terms, so the
/// frame never actually rotates; it reproduces the raw update equations and
/// only tracks heading for straight-commanded runs. `Accumulated` folds each
/// increment into a running heading first, which is the kinematically
/// correct rule and the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateMode {
    Literal,
    #[default]
    Accumulated,
}

impl fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateMode::Literal => "literal",
            UpdateMode::Accumulated => "accumulated",
        })
    }
}

impl FromStr for UpdateMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(UpdateMode::Literal),
            "accumulated" => Ok(UpdateMode::Accumulated),
            other => Err(format!(
                "unknown update mode `{other}` (expected `literal` or `accumulated`)"
            )),
        }
    }
}

/// Per-step derived state for one consecutive sample pair.
///
/// Point `n` covers the pair (n-1, n), so indices start at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint<R: Real> {
    pub n: usize,
    /// Timestamp of the later sample in the pair.
    pub t: R,
    pub delta_left: R,
    pub delta_right: R,
    /// Step travel distance in mm (mean of the two wheel increments).
    pub beta: R,
    /// Step heading increment in radians.
    pub mu: R,
    pub pose: Pose<R>,
    /// Step speed in mm/s (`beta` over the step duration).
    pub v: R,
    /// Anomaly mark; set by the scanner, never by tracking itself.
    pub flagged: bool,
}

/// Unwrap a raw counter difference to its representative in (-M/2, M/2].
fn unwrap_delta<R: Real>(raw: R, modulus: u32) -> R {
    let m = real::<R>(f64::from(modulus));
    let half = m / real::<R>(2.0);
    let mut d = raw % m;
    if d > half {
        d = d - m;
    } else if d <= -half {
        d = d + m;
    }
    d
}

/// Per-wheel count differences between two consecutive samples, unwrapped
/// when the geometry declares a counter modulus.
pub fn delta_counts<R: Real>(
    prev: &EncoderSample<R>,
    curr: &EncoderSample<R>,
    geom: &RobotGeometry<R>,
) -> Result<(R, R), OdometryError> {
    if curr.t <= prev.t {
        return Err(OdometryError::NonMonotonicTime {
            prev: prev.t.to_f64().unwrap_or(f64::NAN),
            curr: curr.t.to_f64().unwrap_or(f64::NAN),
        });
    }
    let dl = curr.left - prev.left;
    let dr = curr.right - prev.right;
    Ok(match geom.wrap_modulus() {
        Some(m) => (unwrap_delta(dl, m), unwrap_delta(dr, m)),
        None => (dl, dr),
    })
}

/// Step travel distance in mm: the mean of the two wheel deltas divided by
/// the counts-per-mm constant.
pub fn step_distance<R: Real>(delta_left: R, delta_right: R, geom: &RobotGeometry<R>) -> R {
    ((delta_right + delta_left) / real(2.0)) / geom.counts_per_mm()
}

/// Step heading increment in radians: the differential delta converted to
/// degrees through the counts-per-degree constant, then to radians.
pub fn step_heading_change<R: Real>(delta_left: R, delta_right: R, geom: &RobotGeometry<R>) -> R {
    ((delta_right - delta_left) / geom.counts_per_degree()) * R::PI() / real(180.0)
}

/// Apply one step of the position update.
pub fn advance_pose<R: Real>(pose: Pose<R>, beta: R, mu: R, mode: UpdateMode) -> Pose<R> {
    match mode {
        UpdateMode::Literal => Pose {
            x: pose.x + beta * mu.sin(),
            y: pose.y + beta * mu.cos(),
            // The raw equations never rotate the frame; the step increment is
            // stored so it remains inspectable.
            theta: mu,
        },
        UpdateMode::Accumulated => {
            let theta = pose.theta + mu;
            Pose {
                x: pose.x + beta * theta.sin(),
                y: pose.y + beta * theta.cos(),
                theta,
            }
        }
    }
}

/// Step speed in mm/s.
pub fn step_speed<R: Real>(beta: R, dt: R) -> Result<R, OdometryError> {
    if dt <= R::zero() {
        return Err(OdometryError::ZeroTimeStep(dt.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(beta / dt)
}

/// Step acceleration in mm/s^2 from two consecutive speeds.
pub fn step_acceleration<R: Real>(v: R, v_prev: R, dt: R) -> Result<R, OdometryError> {
    if dt <= R::zero() {
        return Err(OdometryError::ZeroTimeStep(dt.to_f64().unwrap_or(f64::NAN)));
    }
    Ok((v - v_prev) / dt)
}

/// Compass heading from the horizontal magnetometer components, in
/// (-pi, pi]. Reported alongside trajectories; not used in the pose update.
pub fn heading_from_magnetometer<R: Real>(mx: R, my: R) -> Result<R, OdometryError> {
    if mx == R::zero() && my == R::zero() {
        return Err(OdometryError::DegenerateField);
    }
    Ok(my.atan2(mx))
}

/// Fold a sample log into a trajectory: deltas, step distance and heading
/// increment, pose update and speed for every consecutive pair.
pub fn track<R: Real>(
    samples: &[EncoderSample<R>],
    geom: &RobotGeometry<R>,
    mode: UpdateMode,
    origin: Pose<R>,
) -> Result<Vec<TrajectoryPoint<R>>, OdometryError> {
    if samples.len() < 2 {
        return Err(OdometryError::EmptyLog);
    }
    let mut points = Vec::with_capacity(samples.len() - 1);
    let mut pose = origin;
    for (i, pair) in samples.windows(2).enumerate() {
        let (prev, curr) = (&pair[0], &pair[1]);
        let (delta_left, delta_right) = delta_counts(prev, curr, geom)?;
        let beta = step_distance(delta_left, delta_right, geom);
        let mu = step_heading_change(delta_left, delta_right, geom);
        pose = advance_pose(pose, beta, mu, mode);
        let v = step_speed(beta, curr.t - prev.t)?;
        points.push(TrajectoryPoint {
            n: i + 1,
            t: curr.t,
            delta_left,
            delta_right,
            beta,
            mu,
            pose,
            v,
            flagged: false,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roomba() -> RobotGeometry<f64> {
        RobotGeometry::roomba_600()
    }

    #[test]
    fn delta_counts_plain_difference() {
        let prev = EncoderSample::new(0.0, 40.0, 100.0);
        let curr = EncoderSample::new(0.5, 60.0, 250.0);
        let (dl, dr) = delta_counts(&prev, &curr, &roomba()).unwrap();
        assert_eq!(dl, 20.0);
        assert_eq!(dr, 150.0);
    }

    /// Brute-force oracle: among {d, d + M, d - M}, the representative with
    /// minimal magnitude (ties resolved to +M/2).
    fn unwrap_oracle(d: f64, m: f64) -> f64 {
        let mut best = d;
        for cand in [d + m, d - m] {
            if cand.abs() < best.abs() || (cand.abs() == best.abs() && cand > best) {
                best = cand;
            }
        }
        best
    }

    #[test]
    fn delta_counts_unwraps_forward_wrap() {
        let prev = EncoderSample::new(0.0, 65530.0, 0.0);
        let curr = EncoderSample::new(0.5, 10.0, 0.0);
        let (dl, _) = delta_counts(&prev, &curr, &roomba()).unwrap();
        assert_eq!(dl, unwrap_oracle(10.0 - 65530.0, 65536.0));
        assert_eq!(dl, 16.0);
    }

    #[test]
    fn delta_counts_unwraps_backward_wrap() {
        let prev = EncoderSample::new(0.0, 0.0, 10.0);
        let curr = EncoderSample::new(0.5, 0.0, 65530.0);
        let (_, dr) = delta_counts(&prev, &curr, &roomba()).unwrap();
        assert_eq!(dr, unwrap_oracle(65530.0 - 10.0, 65536.0));
        assert_eq!(dr, -16.0);
    }

    #[test]
    fn delta_counts_half_modulus_boundary() {
        // Exactly +M/2 stays +M/2; the interval is (-M/2, M/2].
        assert_eq!(unwrap_delta(32768.0, 65536), 32768.0);
        assert_eq!(unwrap_delta(-32768.0, 65536), 32768.0);
    }

    #[test]
    fn delta_counts_rejects_non_monotonic_time() {
        let prev = EncoderSample::new(1.0, 0.0, 0.0);
        let curr = EncoderSample::new(1.0, 5.0, 5.0);
        assert_eq!(
            delta_counts(&prev, &curr, &roomba()),
            Err(OdometryError::NonMonotonicTime {
                prev: 1.0,
                curr: 1.0
            })
        );
    }

    #[test]
    fn step_distance_zero_for_zero_deltas() {
        assert_eq!(step_distance(0.0, 0.0, &roomba()), 0.0);
    }

    #[test]
    fn step_distance_direct_evaluation() {
        // 225 / 2.2493898... = 100.027, checked on an independent calculator
        let beta = step_distance(225.0, 225.0, &roomba());
        assert!((beta - 100.03).abs() < 0.01, "got {beta}");
    }

    #[test]
    fn step_distance_in_place_turn_cancels() {
        for mag in [1.0, 500.0, 12345.0] {
            assert_eq!(step_distance(-mag, mag, &roomba()), 0.0);
        }
    }

    #[test]
    fn step_heading_change_zero_when_equal() {
        assert_eq!(step_heading_change(120.0, 120.0, &roomba()), 0.0);
    }

    #[test]
    fn step_heading_change_full_revolution() {
        let mu = step_heading_change(0.0, 3321.33, &roomba());
        assert!((mu - std::f64::consts::TAU).abs() < 1e-3, "got {mu}");
    }

    #[test]
    fn step_heading_change_one_degree() {
        let mu = step_heading_change(0.0, 9.226, &roomba());
        assert!((mu - std::f64::consts::PI / 180.0).abs() < 1e-4, "got {mu}");
    }

    #[test]
    fn advance_pose_straight_travels_along_y() {
        for mode in [UpdateMode::Literal, UpdateMode::Accumulated] {
            let p = advance_pose(Pose::origin(), 100.0, 0.0, mode);
            assert_eq!((p.x, p.y), (0.0, 100.0));
        }
    }

    #[test]
    fn advance_pose_quarter_turn_travels_along_x() {
        let mu = std::f64::consts::FRAC_PI_2;
        for mode in [UpdateMode::Literal, UpdateMode::Accumulated] {
            let p = advance_pose(Pose::origin(), 100.0, mu, mode);
            assert!((p.x - 100.0).abs() < 1e-9);
            assert!(p.y.abs() < 1e-9);
        }
    }

    #[test]
    fn advance_pose_modes_diverge_over_two_turns() {
        // Two quarter-turn steps of 100 mm each: the accumulated rule keeps
        // rotating the frame, the literal rule applies the same increment
        // twice.
        let mu = std::f64::consts::FRAC_PI_2;
        let mut acc = Pose::origin();
        let mut lit = Pose::origin();
        for _ in 0..2 {
            acc = advance_pose(acc, 100.0, mu, UpdateMode::Accumulated);
            lit = advance_pose(lit, 100.0, mu, UpdateMode::Literal);
        }
        assert!((acc.x - 100.0).abs() < 1e-6, "got {acc:?}");
        assert!((acc.y + 100.0).abs() < 1e-6, "got {acc:?}");
        assert!((lit.x - 200.0).abs() < 1e-6, "got {lit:?}");
        assert!(lit.y.abs() < 1e-6, "got {lit:?}");
    }

    #[test]
    fn step_speed_examples() {
        assert_eq!(step_speed(37.5, 0.5).unwrap(), 75.0);
        assert_eq!(step_speed(0.0, 2.0).unwrap(), 0.0);
        assert_eq!(step_speed(50.0, 0.25).unwrap(), 200.0);
        assert_eq!(step_speed(10.0, 0.0), Err(OdometryError::ZeroTimeStep(0.0)));
    }

    #[test]
    fn step_acceleration_examples() {
        assert_eq!(step_acceleration(75.0, 75.0, 0.5).unwrap(), 0.0);
        assert_eq!(step_acceleration(80.0, 70.0, 0.5).unwrap(), 20.0);
        assert_eq!(step_acceleration(0.0, 75.0, 0.5).unwrap(), -150.0);
        assert!(step_acceleration(1.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn heading_from_magnetometer_quadrants() {
        assert_eq!(heading_from_magnetometer(1.0, 0.0).unwrap(), 0.0);
        assert!(
            (heading_from_magnetometer(0.0, 1.0).unwrap() - std::f64::consts::FRAC_PI_2).abs()
                < 1e-12
        );
        // (-1, -1) lands in the third quadrant: -3pi/4
        let h = heading_from_magnetometer(-1.0, -1.0).unwrap();
        assert!(
            (h + 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-12,
            "got {h}"
        );
        assert_eq!(
            heading_from_magnetometer(0.0, 0.0),
            Err(OdometryError::DegenerateField)
        );
    }

    #[test]
    fn track_requires_two_samples() {
        let one = [EncoderSample::new(0.0, 0.0, 0.0)];
        assert_eq!(
            track(&one, &roomba(), UpdateMode::Accumulated, Pose::origin()),
            Err(OdometryError::EmptyLog)
        );
    }

    #[test]
    fn track_equal_counts_yields_single_zero_point() {
        let samples = [
            EncoderSample::new(0.0, 500.0, 500.0),
            EncoderSample::new(0.5, 500.0, 500.0),
        ];
        let points = track(&samples, &roomba(), UpdateMode::Accumulated, Pose::origin()).unwrap();
        assert_eq!(points.len(), 1);
        let p = &points[0];
        assert_eq!(p.n, 1);
        assert_eq!(p.beta, 0.0);
        assert_eq!(p.v, 0.0);
        assert_eq!(p.pose, Pose::origin());
        assert!(!p.flagged);
    }

    #[test]
    fn track_propagates_non_monotonic_time() {
        let samples = [
            EncoderSample::new(0.0, 0.0, 0.0),
            EncoderSample::new(0.5, 10.0, 10.0),
            EncoderSample::new(0.4, 20.0, 20.0),
        ];
        assert!(matches!(
            track(&samples, &roomba(), UpdateMode::Accumulated, Pose::origin()),
            Err(OdometryError::NonMonotonicTime { .. })
        ));
    }
}
