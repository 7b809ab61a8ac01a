//! Robot geometry and the conversion constants it induces.
//!
//! Two constants fall out of the drivetrain dimensions: encoder counts per
//! millimetre of wheel travel, and differential counts (right minus left)
//! per degree of in-place rotation. Everything downstream converts raw
//! counter deltas through these two numbers.

use thiserror::Error;

use crate::scalar::{real, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{name} must be positive and finite (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("wrap modulus must be at least 2 (got {0})")]
    InvalidWrapModulus(u32),
}

/// Fixed geometry of a differential-drive robot.
///
/// `wrap_modulus`, when present, is the modulus of the raw cumulative
/// counters (65536 for 16-bit hardware); deltas are then unwrapped to the
/// nearest representative. `None` disables unwrapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotGeometry<R: Real> {
    wheel_diameter_mm: R,
    wheelbase_mm: R,
    counts_per_rev: R,
    wrap_modulus: Option<u32>,
}

impl<R: Real> RobotGeometry<R> {
    pub fn new(
        wheel_diameter_mm: R,
        wheelbase_mm: R,
        counts_per_rev: R,
        wrap_modulus: Option<u32>,
    ) -> Result<Self, GeometryError> {
        fn positive<R: Real>(name: &'static str, v: R) -> Result<(), GeometryError> {
            if v.is_finite() && v > R::zero() {
                Ok(())
            } else {
                Err(GeometryError::NonPositive {
                    name,
                    value: v.to_f64().unwrap_or(f64::NAN),
                })
            }
        }
        positive("wheel diameter", wheel_diameter_mm)?;
        positive("wheelbase", wheelbase_mm)?;
        positive("counts per revolution", counts_per_rev)?;
        if let Some(m) = wrap_modulus {
            if m < 2 {
                return Err(GeometryError::InvalidWrapModulus(m));
            }
        }
        Ok(Self {
            wheel_diameter_mm,
            wheelbase_mm,
            counts_per_rev,
            wrap_modulus,
        })
    }

    /// iRobot Create 2 drivetrain: 72 mm wheels, 235 mm wheelbase,
    /// 508.8 counts per wheel revolution, 16-bit cumulative counters.
    pub fn roomba_600() -> Self {
        Self {
            wheel_diameter_mm: real(72.0),
            wheelbase_mm: real(235.0),
            counts_per_rev: real(508.8),
            wrap_modulus: Some(65536),
        }
    }

    pub fn wheel_diameter_mm(&self) -> R {
        self.wheel_diameter_mm
    }

    pub fn wheelbase_mm(&self) -> R {
        self.wheelbase_mm
    }

    pub fn counts_per_rev(&self) -> R {
        self.counts_per_rev
    }

    pub fn wrap_modulus(&self) -> Option<u32> {
        self.wrap_modulus
    }

    /// Encoder counts per millimetre of wheel travel.
    ///
    /// One wheel revolution covers `pi * wheel_diameter` millimetres and
    /// emits `counts_per_rev` counts.
    pub fn counts_per_mm(&self) -> R {
        self.counts_per_rev / (R::PI() * self.wheel_diameter_mm)
    }

    /// Differential counts (right minus left) per degree of in-place rotation.
    ///
    /// During a full in-place revolution each wheel traces a circle whose
    /// diameter is the wheelbase, so the differential arc is twice the
    /// wheelbase circumference; dividing by 360 gives the per-degree value.
    pub fn counts_per_degree(&self) -> R {
        self.wheelbase_mm * R::PI() * self.counts_per_mm() * real(2.0) / real(360.0)
    }
}
