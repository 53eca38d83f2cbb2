//! Hand posture reconstruction from glove measurements.
//!
//! A glove reports `m` linear measurements `y = H x + ν` of an `n`-DoF joint
//! angle vector `x` with `m < n`. The estimators in this crate pick, among the
//! infinitely many postures consistent with `y`, the one that is most likely
//! under a Gaussian prior `N(μ_o, P_o)` learned from a corpus of grasps.
//!
//! The crate is organised the same way the reconstruction pipeline runs:
//!
//! * [`hand_model`]: the 15-DoF kinematic layout and selection matrices.
//! * [`prior`]: pose sets, the Gaussian prior, synergies and the Q-Q
//!   normality diagnostic.
//! * [`estimators`]: pseudo-inverse, constrained Mahalanobis (null-space,
//!   Lagrangian and conditional-Gaussian forms) and minimum variance
//!   estimation (information and Sherman-Morrison-Woodbury forms).
//! * [`calibration`]: measurement matrix and noise covariance from paired data.
//! * [`simulator`]: seeded synthetic glove measurements and the
//!   reconstruction experiment.
//! * [`stats`]: error metrics and the two-sample test battery.
//! * [`reporting`]: JSON and markdown evaluation reports.
//!
//! All angles are in degrees.

pub mod calibration;
pub mod error;
pub mod estimators;
pub mod hand_model;
pub mod io;
pub mod linalg;
pub mod prior;
pub mod reporting;
pub mod simulator;
pub mod stats;

pub use calibration::{estimate_measurement_matrix, estimate_noise_covariance, CalibrationSet};
pub use error::{Error, Result};
pub use estimators::{Estimate, MeasurementModel, Method, MveGain};
pub use hand_model::{default_hand_model, selection_matrix, DofDescriptor, HandModel};
pub use prior::{build_prior, normality_diagnostic, synergies, PoseSet, PriorModel};
pub use reporting::{render_report, EvaluationReport, ReportFormat};
pub use simulator::{run_reconstruction_experiment, simulate_measurements, SimulationConfig};
pub use stats::{select_and_compare, ErrorSummary, TestKind, TestResult};

pub use nalgebra::{DMatrix, DVector};
