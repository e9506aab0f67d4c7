//! Time-varying discrete Kalman filter over graph systems. Detectability is
//! witnessed operationally: certified-detectable pairs keep the error
//! covariance bounded, while unobservable components with process noise
//! accumulate variance without bound.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::detect::{DetectError, OutputSpec};
use crate::dynamics::{DiscreteSystem, DynError, LpvSchedule};
use crate::linalg::{psd_sqrt, symmetric_min_eigenvalue};
use crate::matrix::DenseMatrix;

#[derive(Debug, Error)]
pub enum EstimError {
    #[error("{matrix} must be square, got {rows}x{cols}")]
    NotSquare { matrix: &'static str, rows: usize, cols: usize },
    #[error("{matrix} is not symmetric")]
    NotSymmetric { matrix: &'static str },
    #[error("{matrix} is not positive semidefinite")]
    NotPsd { matrix: &'static str },
    #[error("{matrix} is not positive definite")]
    NotPd { matrix: &'static str },
    #[error("dimension mismatch: {what}")]
    Dims { what: String },
    #[error("innovation covariance is numerically singular")]
    SingularInnovation,
    #[error("estimator runs need at least 1 step")]
    TooFewSteps,
    #[error(transparent)]
    Output(#[from] DetectError),
    #[error(transparent)]
    Dynamics(#[from] DynError),
}

/// Noise and prior covariances for a filter run. Symmetry and definiteness
/// are validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanConfig {
    process_noise: DenseMatrix,
    measurement_noise: DenseMatrix,
    initial_covariance: DenseMatrix,
}

impl KalmanConfig {
    pub fn new(
        process_noise: DenseMatrix,
        measurement_noise: DenseMatrix,
        initial_covariance: DenseMatrix,
    ) -> Result<Self, EstimError> {
        require_symmetric("process noise", &process_noise)?;
        require_symmetric("measurement noise", &measurement_noise)?;
        require_symmetric("initial covariance", &initial_covariance)?;
        if initial_covariance.rows() != process_noise.rows() {
            return Err(EstimError::Dims {
                what: format!(
                    "process noise is {0}x{0} but initial covariance is {1}x{1}",
                    process_noise.rows(),
                    initial_covariance.rows()
                ),
            });
        }
        let psd_floor = -1e-10 * process_noise.max_abs().max(1.0);
        if symmetric_min_eigenvalue(&process_noise) < psd_floor {
            return Err(EstimError::NotPsd { matrix: "process noise" });
        }
        if measurement_noise.to_na().cholesky().is_none() {
            return Err(EstimError::NotPd { matrix: "measurement noise" });
        }
        if initial_covariance.to_na().cholesky().is_none() {
            return Err(EstimError::NotPd { matrix: "initial covariance" });
        }
        Ok(Self { process_noise, measurement_noise, initial_covariance })
    }

    /// Diagonal configuration `Q = q·I`, `R = r·I`, `P0 = p0·I`.
    pub fn diagonal(n: usize, m: usize, q: f64, r: f64, p0: f64) -> Result<Self, EstimError> {
        Self::new(
            DenseMatrix::identity(n).scale(q),
            DenseMatrix::identity(m).scale(r),
            DenseMatrix::identity(n).scale(p0),
        )
    }

    pub fn process_noise(&self) -> &DenseMatrix {
        &self.process_noise
    }

    pub fn measurement_noise(&self) -> &DenseMatrix {
        &self.measurement_noise
    }

    pub fn initial_covariance(&self) -> &DenseMatrix {
        &self.initial_covariance
    }

    pub fn state_dim(&self) -> usize {
        self.process_noise.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.measurement_noise.rows()
    }
}

fn require_symmetric(name: &'static str, m: &DenseMatrix) -> Result<(), EstimError> {
    if !m.is_square() {
        return Err(EstimError::NotSquare { matrix: name, rows: m.rows(), cols: m.cols() });
    }
    let asym = (m - &m.transpose()).frobenius_norm();
    if asym > 1e-12 * m.frobenius_norm().max(1.0) {
        return Err(EstimError::NotSymmetric { matrix: name });
    }
    Ok(())
}

/// Per-step record of a filter run: estimates, `trace(P_k)`, and estimation
/// error norms, all of equal length (step 0 included).
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationTrace {
    pub estimates: Vec<Vec<f64>>,
    pub covariance_traces: Vec<f64>,
    pub error_norms: Vec<f64>,
}

impl EstimationTrace {
    /// CSV rendering with header `k,trace_P,err_norm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,trace_P,err_norm\n");
        for k in 0..self.covariance_traces.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                k, self.covariance_traces[k], self.error_norms[k]
            ));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.covariance_traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covariance_traces.is_empty()
    }
}

/// One predict/update cycle. Predict: `x⁻ = A·x̂`, `P⁻ = A·P·Aᵀ + Q`.
/// Update with gain `K = P⁻Cᵀ(CP⁻Cᵀ + R)⁻¹` and the Joseph-form covariance
/// `P = (I-KC)·P⁻·(I-KC)ᵀ + K·R·Kᵀ`, which preserves symmetry and positive
/// semidefiniteness.
pub fn kalman_step(
    a: &DenseMatrix,
    c: &DenseMatrix,
    cfg: &KalmanConfig,
    prior_estimate: &[f64],
    prior_cov: &DenseMatrix,
    measurement: &[f64],
) -> Result<(Vec<f64>, DenseMatrix), EstimError> {
    let n = cfg.state_dim();
    let m = cfg.output_dim();
    check_dims(a, c, cfg)?;
    if prior_estimate.len() != n {
        return Err(EstimError::Dims {
            what: format!("prior estimate has length {}, expected {n}", prior_estimate.len()),
        });
    }
    if prior_cov.rows() != n || prior_cov.cols() != n {
        return Err(EstimError::Dims {
            what: format!(
                "prior covariance is {}x{}, expected {n}x{n}",
                prior_cov.rows(),
                prior_cov.cols()
            ),
        });
    }
    if measurement.len() != m {
        return Err(EstimError::Dims {
            what: format!("measurement has length {}, expected {m}", measurement.len()),
        });
    }

    // Predict.
    let x_minus = a.matvec(prior_estimate);
    let p_minus = &(&(a * prior_cov) * &a.transpose()) + &cfg.process_noise;

    // Gain via an SPD solve of the innovation covariance.
    let cp = c * &p_minus;
    let innovation_cov = &(&cp * &c.transpose()) + &cfg.measurement_noise;
    let chol = innovation_cov.to_na().cholesky().ok_or(EstimError::SingularInnovation)?;
    let gain_t = chol.solve(&cp.to_na());
    let gain = DenseMatrix::from_na(&gain_t).transpose();

    // Update.
    let predicted_output = c.matvec(&x_minus);
    let residual: Vec<f64> =
        measurement.iter().zip(&predicted_output).map(|(y, cy)| y - cy).collect();
    let correction = gain.matvec(&residual);
    let estimate: Vec<f64> =
        x_minus.iter().zip(&correction).map(|(x, dx)| x + dx).collect();

    let i_kc = &DenseMatrix::identity(n) - &(&gain * c);
    let joseph = &(&i_kc * &p_minus) * &i_kc.transpose();
    let gain_noise = &(&gain * &cfg.measurement_noise) * &gain.transpose();
    let cov = &joseph + &gain_noise;

    Ok((estimate, cov))
}

fn check_dims(a: &DenseMatrix, c: &DenseMatrix, cfg: &KalmanConfig) -> Result<(), EstimError> {
    let n = cfg.state_dim();
    let m = cfg.output_dim();
    if a.rows() != n || a.cols() != n {
        return Err(EstimError::Dims {
            what: format!("state matrix is {}x{}, expected {n}x{n}", a.rows(), a.cols()),
        });
    }
    if c.rows() != m || c.cols() != n {
        return Err(EstimError::Dims {
            what: format!("output matrix is {}x{}, expected {m}x{n}", c.rows(), c.cols()),
        });
    }
    Ok(())
}

/// Simulates the true system under seeded Gaussian process and measurement
/// noise, runs the filter on the measurements alone, and records the trace.
/// Deterministic for a fixed seed.
pub fn run_estimator(
    sys: &DiscreteSystem,
    cfg: &KalmanConfig,
    true_x0: &[f64],
    est_x0: &[f64],
    steps: usize,
    seed: u64,
) -> Result<EstimationTrace, EstimError> {
    run_with_transitions(|_| &sys.a_d, &sys.c, cfg, true_x0, est_x0, steps, seed)
}

/// [`run_estimator`] for a piecewise-constant schedule: step `k` uses the
/// transition of segment `k mod f`, cycling through the schedule.
pub fn run_estimator_lpv(
    schedule: &LpvSchedule,
    out: &OutputSpec,
    cfg: &KalmanConfig,
    true_x0: &[f64],
    est_x0: &[f64],
    steps: usize,
    seed: u64,
) -> Result<EstimationTrace, EstimError> {
    let transitions = schedule.segment_transitions()?;
    let c = out.output_matrix(schedule.node_count())?;
    run_with_transitions(
        |k| &transitions[k % transitions.len()],
        &c,
        cfg,
        true_x0,
        est_x0,
        steps,
        seed,
    )
}

fn run_with_transitions<'a>(
    transition_at: impl Fn(usize) -> &'a DenseMatrix,
    c: &DenseMatrix,
    cfg: &KalmanConfig,
    true_x0: &[f64],
    est_x0: &[f64],
    steps: usize,
    seed: u64,
) -> Result<EstimationTrace, EstimError> {
    if steps < 1 {
        return Err(EstimError::TooFewSteps);
    }
    let n = cfg.state_dim();
    if true_x0.len() != n || est_x0.len() != n {
        return Err(EstimError::Dims {
            what: format!(
                "initial states have lengths {} and {}, expected {n}",
                true_x0.len(),
                est_x0.len()
            ),
        });
    }
    check_dims(transition_at(0), c, cfg)?;

    let q_sqrt = psd_sqrt(cfg.process_noise());
    let r_sqrt = psd_sqrt(cfg.measurement_noise());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = cfg.output_dim();

    let mut x_true = true_x0.to_vec();
    let mut x_est = est_x0.to_vec();
    let mut cov = cfg.initial_covariance().clone();

    let mut trace = EstimationTrace {
        estimates: Vec::with_capacity(steps + 1),
        covariance_traces: Vec::with_capacity(steps + 1),
        error_norms: Vec::with_capacity(steps + 1),
    };
    record(&mut trace, &x_est, &cov, &x_true);

    for k in 0..steps {
        let a = transition_at(k);
        let process = q_sqrt.matvec(&standard_normal(&mut rng, n));
        x_true = a.matvec(&x_true);
        for (x, w) in x_true.iter_mut().zip(&process) {
            *x += w;
        }
        let noise = r_sqrt.matvec(&standard_normal(&mut rng, m));
        let mut y = c.matvec(&x_true);
        for (yi, v) in y.iter_mut().zip(&noise) {
            *yi += v;
        }

        let (next_est, next_cov) = kalman_step(a, c, cfg, &x_est, &cov, &y)?;
        x_est = next_est;
        cov = next_cov;
        record(&mut trace, &x_est, &cov, &x_true);
    }
    Ok(trace)
}

fn record(trace: &mut EstimationTrace, x_est: &[f64], cov: &DenseMatrix, x_true: &[f64]) {
    trace.estimates.push(x_est.to_vec());
    trace.covariance_traces.push(cov.trace());
    let err = x_est
        .iter()
        .zip(x_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    trace.error_norms.push(err);
}

fn standard_normal(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}
