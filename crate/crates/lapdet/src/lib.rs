//! Detectability and stabilizability certificates for dynamical systems
//! represented as weighted graphs.
//!
//! The state of such a system diffuses along edges, `ẋ = -Lx` with `L` the
//! graph Laplacian. Sampling at a fixed step gives `x_{k+1} = e^{-L·Δt}x_k`,
//! and for a strongly connected graph that transition matrix is positive and
//! right stochastic: every direction except the all-ones consensus mode is
//! strictly contracted in the infinity norm. The crate certifies uniform
//! detectability from that structure (any output with a nonzero row sum
//! excites the consensus mode), cross-checks it numerically through the
//! observability Gramian and the unobservable subspace, extends the analysis
//! to piecewise-constant parameter-varying schedules, and witnesses the
//! result operationally with a bounded-covariance Kalman filter.
//!
//! Modules:
//! * [`graph`] — weighted simple (di)graphs, Laplacians, strong
//!   connectivity, a brute-force irreducibility oracle, generators, and the
//!   text file format;
//! * [`matfun`] — matrix exponential (scaling-and-squaring Padé) and a
//!   truncated-series oracle;
//! * [`certs`] — positivity / right-stochasticity / norm-uniqueness
//!   certificates with machine-readable evidence;
//! * [`detect`] — detectability and stabilizability, certificate and
//!   numeric routes;
//! * [`dynamics`] — discretization, simulation, LPV schedules and their
//!   transition products;
//! * [`estimation`] — time-varying Kalman filter with Joseph-form updates.

pub mod certs;
pub mod detect;
pub mod dynamics;
pub mod estimation;
pub mod graph;
mod linalg;
pub mod matfun;
pub mod matrix;

pub use certs::{
    check_inf_norm_uniqueness, check_positivity, check_right_stochastic, StochasticityEvidence,
};
pub use detect::{
    certify_detectability, certify_stabilizability, detectability_report,
    gramian_lower_bound_witness, numeric_detectability, observability_gramian,
    DetectabilityReport, NumericDetectability, OutputSpec,
};
pub use dynamics::{
    discretize, load_schedule, lpv_detectability, lpv_transition, parse_schedule_json, simulate,
    DiscreteSystem, LpvSchedule, LpvSegment, Trajectory,
};
pub use estimation::{
    kalman_step, run_estimator, run_estimator_lpv, EstimationTrace, KalmanConfig,
};
pub use graph::{
    format_graph, generate_graph, is_irreducible_bruteforce, parse_graph, Edge, GraphKind,
    WeightedGraph,
};
pub use matfun::{expm, expm_taylor_oracle, induced_inf_norm, row_sums, ExpmResult};
pub use matrix::DenseMatrix;
