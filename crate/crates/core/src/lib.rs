//! Dead-reckoning toolkit for differential-drive robots.
//!
//! Converts wheel-encoder logs into trajectories with the count-to-distance
//! and count-to-heading constants derived from the drivetrain geometry,
//! scans logs for encoder faults and repairs them, smooths headings with a
//! scalar Kalman filter, and evaluates runs (distance reconciliation, linear
//! fit, drift). A seeded simulator generates ground-truth runs and synthetic
//! logs for verifying the whole pipeline at desk scale.
//!
//! The math modules are generic over the scalar type via [`Real`]
//! (`f32`/`f64`); the aliases below fix `f64`, which is what the file
//! formats and the CLI use.

pub mod analysis;
pub mod anomaly;
pub mod geometry;
pub mod ingest;
pub mod odometry;
pub mod scalar;
pub mod simulator;
pub mod smoothing;

pub use analysis::AnalysisError;
pub use anomaly::{AnomalyReport, FlaggedStep, RepairNote, RepairPolicy, ScanConfig};
pub use geometry::GeometryError;
pub use ingest::{LogDocument, ParseDiagnostic, ParseError, Severity};
pub use odometry::{MagReading, OdometryError, UpdateMode, WheelSide};
pub use scalar::Real;
pub use simulator::{MotionPlan, NoiseModel, Segment, SimulationResult, SimulatorError};
pub use smoothing::SmoothingError;

/// Default-scalar (`f64`) aliases of the generic types.
pub type RobotGeometry = geometry::RobotGeometry<f64>;
pub type Pose = odometry::Pose<f64>;
pub type EncoderSample = odometry::EncoderSample<f64>;
pub type TrajectoryPoint = odometry::TrajectoryPoint<f64>;
pub type KalmanConfig = smoothing::KalmanConfig<f64>;
pub type RegressionFit = analysis::RegressionFit<f64>;
pub type RunReport = analysis::RunReport<f64>;
