//! Scalar Kalman smoothing of heading sequences.
//!
//! The state model is a random walk on the heading: predict inflates the
//! variance by `q`, update blends the measurement in by the gain
//! `k = v / (v + r)`. Angles must be unwrapped (continuous) before
//! filtering; a linear filter straddling the +-pi seam is wrong.

use thiserror::Error;

use crate::odometry::{Pose, TrajectoryPoint};
use crate::scalar::{real, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmoothingError {
    #[error("invalid filter config: {0}")]
    InvalidConfig(&'static str),
}

/// Random-walk filter parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanConfig<R: Real> {
    /// Process variance added per step (rad^2/step).
    pub process_variance: R,
    /// Measurement variance (rad^2).
    pub measurement_variance: R,
    pub initial_estimate: R,
    pub initial_variance: R,
}

impl<R: Real> KalmanConfig<R> {
    pub fn new(q: R, r: R) -> Self {
        Self {
            process_variance: q,
            measurement_variance: r,
            initial_estimate: R::zero(),
            initial_variance: R::one(),
        }
    }

    fn validate(&self) -> Result<(), SmoothingError> {
        if !(self.process_variance >= R::zero() && self.process_variance.is_finite()) {
            return Err(SmoothingError::InvalidConfig(
                "process variance must be finite and >= 0",
            ));
        }
        if !(self.measurement_variance >= R::zero() && self.measurement_variance.is_finite()) {
            return Err(SmoothingError::InvalidConfig(
                "measurement variance must be finite and >= 0",
            ));
        }
        if !(self.initial_variance > R::zero() && self.initial_variance.is_finite()) {
            return Err(SmoothingError::InvalidConfig(
                "initial variance must be finite and > 0",
            ));
        }
        if self.process_variance + self.measurement_variance == R::zero() {
            return Err(SmoothingError::InvalidConfig(
                "process and measurement variance cannot both be zero",
            ));
        }
        Ok(())
    }
}

/// Streaming scalar filter: O(1) state, one update per measurement.
#[derive(Debug, Clone, Copy)]
pub struct ScalarKalman<R: Real> {
    estimate: R,
    variance: R,
    q: R,
    r: R,
}

impl<R: Real> ScalarKalman<R> {
    pub fn new(cfg: &KalmanConfig<R>) -> Result<Self, SmoothingError> {
        cfg.validate()?;
        Ok(Self {
            estimate: cfg.initial_estimate,
            variance: cfg.initial_variance,
            q: cfg.process_variance,
            r: cfg.measurement_variance,
        })
    }

    pub fn estimate(&self) -> R {
        self.estimate
    }

    pub fn variance(&self) -> R {
        self.variance
    }

    /// Predict-update cycle for one measurement; returns the new estimate.
    pub fn update(&mut self, z: R) -> R {
        self.variance = self.variance + self.q;
        let gain = self.variance / (self.variance + self.r);
        if gain == R::one() {
            // r = 0: trust the measurement outright, bit-exactly.
            self.estimate = z;
        } else {
            self.estimate = self.estimate + gain * (z - self.estimate);
        }
        self.variance = self.variance * (R::one() - gain);
        self.estimate
    }
}

/// Filter a pre-unwrapped heading sequence; the output has the same length.
pub fn kalman_smooth<R: Real>(
    headings: &[R],
    cfg: &KalmanConfig<R>,
) -> Result<Vec<R>, SmoothingError> {
    let mut filter = ScalarKalman::new(cfg)?;
    Ok(headings.iter().map(|&z| filter.update(z)).collect())
}

/// Unwrap a sequence of angles in (-pi, pi] into a continuous sequence:
/// each step takes the minimal-magnitude equivalent of the raw jump.
pub fn unwrap_angles<R: Real>(raw: &[R]) -> Vec<R> {
    let mut out = Vec::with_capacity(raw.len());
    let mut prev_raw = R::zero();
    let mut prev_out = R::zero();
    for (i, &a) in raw.iter().enumerate() {
        if i == 0 {
            out.push(a);
        } else {
            let tau = R::PI() * real(2.0);
            let jump = a - prev_raw;
            let minimal = jump - tau * ((jump - R::PI()) / tau).ceil();
            out.push(prev_out + minimal);
        }
        prev_raw = a;
        prev_out = *out.last().expect("just pushed");
    }
    out
}

/// Re-drive the position update with smoothed headings: each step reuses the
/// point's travel distance but points it along the smoothed heading.
pub fn redrive_poses<R: Real>(
    points: &[TrajectoryPoint<R>],
    smoothed: &[R],
    origin: Pose<R>,
) -> Vec<Pose<R>> {
    let mut poses = Vec::with_capacity(points.len());
    let mut x = origin.x;
    let mut y = origin.y;
    for (p, &theta) in points.iter().zip(smoothed) {
        x = x + p.beta * theta.sin();
        y = y + p.beta * theta.cos();
        poses.push(Pose::new(x, y, theta));
    }
    poses
}
