//! Penalized Finsler geometry on SU(2^n).
//!
//! Computes lengths and distance bounds under the penalty metric `F_p`,
//! runs the standard three-step gate simulation (projection, slicing,
//! product-formula synthesis), and checks the inequalities that tie gate
//! counts to geodesic lengths.

pub mod bounds;
pub mod chart;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metric;
pub mod path;
pub mod pauli;
pub mod rng;
pub mod simulation;

pub use bounds::{
    check_segment_distortion, check_sim_sandwich, corollary2_scaling, estimate_distortion, theorem1_bounds,
    theorem2_bounds, BoundReport,
};
pub use chart::{chart_segment_rho, exp_coords, log_coords, ChartPoint, Unitary};
pub use error::{Error, Result};
pub use metric::{distortion_constants, minkowski_norm, MetricConfig, PenaltyMetric, TangentNorm};
pub use path::{distance_lower, distance_upper, path_endpoint, path_length, OptimizerSettings, Path, Segment};
pub use pauli::{decompose, enumerate_basis, partition_k, reconstruct, CoeffVector, PauliString};
pub use simulation::{simulate, synthesize_gates, Schedule, SimulationOptions, SimulationResult};
