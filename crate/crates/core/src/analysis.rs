//! Run evaluation: the three-distance reconciliation, ordinary least squares
//! with R^2, and the endpoint drift bearing.

use thiserror::Error;

use crate::odometry::{TrajectoryPoint, UpdateMode};
use crate::scalar::{real, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("at least two points are required for a linear fit")]
    NotEnoughPoints,
    #[error("all x values are identical; the fit is degenerate")]
    DegenerateX,
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("total path length is zero; drift is undefined")]
    ZeroPath,
}

/// Ordinary least-squares line fit with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionFit<R: Real> {
    pub slope: R,
    pub intercept: R,
    pub r2: R,
    pub n_points: usize,
}

/// The per-run summary: commanded vs encoder-derived distances, the position
/// fit and the endpoint drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunReport<R: Real> {
    /// Physically measured run length, when the operator supplied one.
    pub actual_distance_m: Option<R>,
    pub theoretical_distance_m: R,
    pub measured_distance_m: R,
    /// Fit of the (x, y) positions; absent when the x spread is degenerate
    /// (e.g. a perfectly straight +y run).
    pub fit: Option<RegressionFit<R>>,
    pub drift_deg: R,
    pub mode: UpdateMode,
}

/// Distance implied by the commanded speed and duration, in metres.
pub fn theoretical_distance<R: Real>(speed_mm_s: R, duration_s: R) -> R {
    speed_mm_s * duration_s / real(1000.0)
}

/// Distance the encoders saw: the sum of absolute step distances, in metres.
pub fn measured_distance<R: Real>(points: &[TrajectoryPoint<R>]) -> R {
    points.iter().fold(R::zero(), |acc, p| acc + p.beta.abs()) / real(1000.0)
}

/// Least-squares line through `(x, y)` points, minimising the squared
/// y-residuals. With zero total variation in y the fit is exact and `r2` is
/// 1 by convention.
pub fn linear_fit<R: Real>(points: &[(R, R)]) -> Result<RegressionFit<R>, AnalysisError> {
    let n = points.len();
    if n < 2 {
        return Err(AnalysisError::NotEnoughPoints);
    }
    let n_r = real::<R>(n as f64);
    let mut mean_x = R::zero();
    let mut mean_y = R::zero();
    for &(x, y) in points {
        mean_x = mean_x + x;
        mean_y = mean_y + y;
    }
    mean_x = mean_x / n_r;
    mean_y = mean_y / n_r;

    let mut sxx = R::zero();
    let mut sxy = R::zero();
    for &(x, y) in points {
        let dx = x - mean_x;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * (y - mean_y);
    }
    if sxx == R::zero() {
        return Err(AnalysisError::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let mut ss_res = R::zero();
    let mut ss_tot = R::zero();
    for &(x, y) in points {
        let e = y - (slope * x + intercept);
        ss_res = ss_res + e * e;
        let d = y - mean_y;
        ss_tot = ss_tot + d * d;
    }
    let r2 = if ss_tot == R::zero() {
        R::one()
    } else {
        // round-off can push an essentially perfect fit a hair below zero
        (R::one() - ss_res / ss_tot).max(R::zero())
    };
    Ok(RegressionFit {
        slope,
        intercept,
        r2,
        n_points: n,
    })
}

/// Bearing of the final position from the tracking origin, in degrees from
/// the +y axis; positive toward +x (rightward of the commanded direction).
///
/// Positions are taken relative to the conventional (0, 0) origin.
pub fn drift_metric<R: Real>(points: &[TrajectoryPoint<R>]) -> Result<R, AnalysisError> {
    if points.is_empty() {
        return Err(AnalysisError::EmptyTrajectory);
    }
    let path = points.iter().fold(R::zero(), |acc, p| acc + p.beta.abs());
    if path == R::zero() {
        return Err(AnalysisError::ZeroPath);
    }
    let last = points.last().expect("nonempty").pose;
    Ok(last.x.atan2(last.y) * real(180.0) / R::PI())
}

/// Assemble the full run report from a trajectory and the commanded motion.
pub fn build_report<R: Real>(
    points: &[TrajectoryPoint<R>],
    commanded_speed_mm_s: R,
    commanded_duration_s: R,
    actual_m: Option<R>,
    mode: UpdateMode,
) -> Result<RunReport<R>, AnalysisError> {
    if points.is_empty() {
        return Err(AnalysisError::EmptyTrajectory);
    }
    let positions: Vec<(R, R)> = points.iter().map(|p| (p.pose.x, p.pose.y)).collect();
    let fit = match linear_fit(&positions) {
        Ok(fit) => Some(fit),
        Err(AnalysisError::DegenerateX | AnalysisError::NotEnoughPoints) => None,
        Err(other) => return Err(other),
    };
    Ok(RunReport {
        actual_distance_m: actual_m,
        theoretical_distance_m: theoretical_distance(commanded_speed_mm_s, commanded_duration_s),
        measured_distance_m: measured_distance(points),
        fit,
        drift_deg: drift_metric(points)?,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odometry::Pose;

    fn point(n: usize, beta: f64, x: f64, y: f64) -> TrajectoryPoint<f64> {
        TrajectoryPoint {
            n,
            t: 0.5 * n as f64,
            delta_left: 0.0,
            delta_right: 0.0,
            beta,
            mu: 0.0,
            pose: Pose::new(x, y, 0.0),
            v: beta / 0.5,
            flagged: false,
        }
    }

    #[test]
    fn theoretical_distance_matches_commanded_runs() {
        assert_eq!(theoretical_distance(75.0, 65.0), 4.875);
        assert_eq!(theoretical_distance(150.0, 39.0), 5.85);
        assert_eq!(theoretical_distance(0.0, 123.0), 0.0);
    }

    #[test]
    fn measured_distance_sums_absolute_steps() {
        assert_eq!(measured_distance::<f64>(&[]), 0.0);
        let points = [point(1, 40.0, 0.0, 40.0), point(2, -10.0, 0.0, 30.0)];
        assert!((measured_distance(&points) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_recovers_an_exact_line() {
        let points: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let x = i as f64 * 3.7 - 20.0;
                (x, 16.828 * x + 2705.0)
            })
            .collect();
        let fit = linear_fit(&points).unwrap();
        assert!((fit.slope - 16.828).abs() < 1e-9, "slope {}", fit.slope);
        assert!(
            (fit.intercept - 2705.0).abs() < 1e-9,
            "intercept {}",
            fit.intercept
        );
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert_eq!(fit.n_points, 40);
    }

    #[test]
    fn linear_fit_unit_slope() {
        let fit = linear_fit::<f64>(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_matches_normal_equations_oracle() {
        // independent route: slope and intercept straight from the raw
        // normal equations, no centering
        let points: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let x = (i as f64 * 0.83).sin() * 12.0 + i as f64 * 0.1;
                let y = 3.0 * x - 7.0 + ((i as u64 * 2654435761 % 97) as f64 - 48.0) * 0.2;
                (x, y)
            })
            .collect();
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;

        let fit = linear_fit(&points).unwrap();
        assert!((fit.slope - slope).abs() <= 1e-9 * slope.abs().max(1.0));
        assert!((fit.intercept - intercept).abs() <= 1e-9 * intercept.abs().max(1.0));
    }

    #[test]
    fn linear_fit_degenerate_inputs() {
        assert_eq!(
            linear_fit(&[(1.0, 2.0)]),
            Err(AnalysisError::NotEnoughPoints)
        );
        assert_eq!(
            linear_fit(&[(3.0, 1.0), (3.0, 2.0), (3.0, 5.0)]),
            Err(AnalysisError::DegenerateX)
        );
        // all y equal: exact horizontal fit, r2 = 1 by convention
        let fit = linear_fit(&[(0.0, 4.0), (1.0, 4.0), (2.0, 4.0)]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.intercept, 4.0);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn drift_is_zero_for_a_straight_northward_run() {
        let points = [point(1, 50.0, 0.0, 50.0), point(2, 50.0, 0.0, 100.0)];
        assert_eq!(drift_metric(&points).unwrap(), 0.0);
    }

    #[test]
    fn drift_bearing_of_the_diagonal_is_45_degrees() {
        let points = [point(1, 141.4, 100.0, 100.0)];
        assert!((drift_metric(&points).unwrap() - 45.0).abs() < 1e-12);
    }

    #[test]
    fn drift_requires_a_nonzero_path() {
        assert_eq!(
            drift_metric::<f64>(&[]),
            Err(AnalysisError::EmptyTrajectory)
        );
        let stationary = [point(1, 0.0, 0.0, 0.0)];
        assert_eq!(drift_metric(&stationary), Err(AnalysisError::ZeroPath));
    }

    #[test]
    fn build_report_assembles_the_three_distances() {
        let points: Vec<_> = (1..=130)
            .map(|n| point(n, 37.5, 0.0, 37.5 * n as f64))
            .collect();
        let report = build_report(&points, 75.0, 65.0, None, UpdateMode::Accumulated).unwrap();
        assert_eq!(report.theoretical_distance_m, 4.875);
        assert!((report.measured_distance_m - 4.875).abs() < 2e-3);
        assert!(report.drift_deg.abs() < 0.1);
        // straight +y run: x never varies, so the position fit is degenerate
        assert!(report.fit.is_none());
        assert_eq!(report.actual_distance_m, None);
    }

    #[test]
    fn build_report_echoes_the_actual_distance() {
        let points = [point(1, 100.0, 3.0, 100.0)];
        let report =
            build_report(&points, 75.0, 65.0, Some(5.83), UpdateMode::Accumulated).unwrap();
        assert_eq!(report.actual_distance_m, Some(5.83));
    }

    #[test]
    fn build_report_rejects_an_empty_trajectory() {
        assert_eq!(
            build_report::<f64>(&[], 75.0, 65.0, None, UpdateMode::Accumulated),
            Err(AnalysisError::EmptyTrajectory)
        );
    }

    #[test]
    fn regression_shift_and_scale_invariances() {
        let base: Vec<(f64, f64)> = (0..60)
            .map(|i| {
                let x = i as f64 * 0.25;
                (x, 2.0 * x + 1.0 + ((i * 7919 % 13) as f64 - 6.0) * 0.3)
            })
            .collect();
        let fit = linear_fit(&base).unwrap();

        let shifted: Vec<(f64, f64)> = base.iter().map(|&(x, y)| (x, y + 42.0)).collect();
        let fit_shift = linear_fit(&shifted).unwrap();
        assert!((fit_shift.slope - fit.slope).abs() < 1e-9);
        assert!((fit_shift.intercept - (fit.intercept + 42.0)).abs() < 1e-9);
        assert!((fit_shift.r2 - fit.r2).abs() < 1e-9);

        let scaled: Vec<(f64, f64)> = base.iter().map(|&(x, y)| (x, y * 3.0)).collect();
        let fit_scale = linear_fit(&scaled).unwrap();
        assert!((fit_scale.slope - 3.0 * fit.slope).abs() < 1e-9);
        assert!((fit_scale.intercept - 3.0 * fit.intercept).abs() < 1e-9);
        assert!((fit_scale.r2 - fit.r2).abs() < 1e-9);
    }
}
