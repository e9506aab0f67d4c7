//! Spectral certificates for heat kernels of connected graphs: strict
//! positivity, right stochasticity, and uniqueness (up to sign) of the
//! induced infinity-norm maximizer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::DenseMatrix;

/// Positivity threshold scale relative to the largest entry magnitude.
pub const POSITIVITY_TOL_SCALE: f64 = 1e-12;
/// Default tolerance for the stochasticity evidence.
pub const STOCHASTICITY_TOL: f64 = 1e-10;
/// `‖M·1‖_∞` must be within this of 1.
const NORM_AT_ONES_TOL: f64 = 1e-10;
/// Every other unit vector must map strictly below `1 -` this margin.
const STRICT_DECREASE_MARGIN: f64 = 1e-12;
/// Exhaustive ±1 sign patterns are enumerated up to this dimension.
const SIGN_PATTERN_MAX_DIM: usize = 10;
const MIN_TRIALS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum CertError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not strictly inside the unit interval with unit row sums; norm-uniqueness check requires a positive right stochastic matrix")]
    NotRightStochastic,
    #[error("need at least {min} trials, got {trials}")]
    TooFewTrials { trials: usize, min: usize },
}

/// Evidence gathered while checking that a matrix is right stochastic with
/// entries strictly inside (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticityEvidence {
    pub min_entry: f64,
    pub max_entry: f64,
    pub max_row_sum_deviation: f64,
    pub passed: bool,
}

/// Default entry-positivity tolerance for a matrix: scales with the largest
/// entry magnitude so large time steps with tiny (but genuine) off-diagonal
/// mass still pass.
pub fn default_positivity_tol(m: &DenseMatrix) -> f64 {
    POSITIVITY_TOL_SCALE * m.max_abs()
}

/// True iff every entry exceeds `tol` (default: `1e-12` times the largest
/// entry magnitude).
pub fn check_positivity(m: &DenseMatrix, tol: Option<f64>) -> bool {
    let tol = tol.unwrap_or_else(|| default_positivity_tol(m));
    m.data().iter().all(|&v| v > tol)
}

/// Checks that all entries lie in `(tol, 1 - tol)` and every row sums to 1
/// within `tol` (default `1e-10`).
pub fn check_right_stochastic(m: &DenseMatrix, tol: Option<f64>) -> StochasticityEvidence {
    let tol = tol.unwrap_or(STOCHASTICITY_TOL);
    let mut min_entry = f64::INFINITY;
    let mut max_entry = f64::NEG_INFINITY;
    for &v in m.data() {
        min_entry = min_entry.min(v);
        max_entry = max_entry.max(v);
    }
    if m.data().is_empty() {
        min_entry = 0.0;
        max_entry = 0.0;
    }
    let max_row_sum_deviation =
        m.row_sums().iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    let passed =
        min_entry > tol && max_entry < 1.0 - tol && max_row_sum_deviation <= tol;
    StochasticityEvidence { min_entry, max_entry, max_row_sum_deviation, passed }
}

/// Verifies that the all-ones direction is the unique infinity-norm
/// maximizer of `m`, up to sign: `‖m·1‖_∞ = 1` while every other sampled or
/// enumerated sign-pattern unit vector maps strictly inside the unit ball.
///
/// Requires `m` to pass [`check_right_stochastic`] (otherwise the claim does
/// not apply) and at least 100 trials. Since `‖m·(-v)‖ = ‖m·v‖`, the vectors
/// `±1` are excluded together.
pub fn check_inf_norm_uniqueness(
    m: &DenseMatrix,
    trials: usize,
    seed: u64,
) -> Result<bool, CertError> {
    if !m.is_square() {
        return Err(CertError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if trials < MIN_TRIALS {
        return Err(CertError::TooFewTrials { trials, min: MIN_TRIALS });
    }
    if !check_right_stochastic(m, None).passed {
        return Err(CertError::NotRightStochastic);
    }
    let n = m.rows();

    let ones = vec![1.0; n];
    let norm_at_ones = inf_norm_of(&m.matvec(&ones));
    if (norm_at_ones - 1.0).abs() > NORM_AT_ONES_TOL {
        return Ok(false);
    }

    let contracts = |v: &[f64]| inf_norm_of(&m.matvec(v)) < 1.0 - STRICT_DECREASE_MARGIN;

    // Random vectors on the unit sphere faces: each coordinate uniform in
    // [-1, 1], then one coordinate forced to ±1.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let face = rng.gen_range(0..n);
        v[face] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        if is_constant_sign_vector(&v) {
            continue;
        }
        if !contracts(&v) {
            return Ok(false);
        }
    }

    // Deterministic adversarial set: every ±1 sign pattern except ±1.
    if n <= SIGN_PATTERN_MAX_DIM {
        for bits in 1..(1u32 << n) - 1 {
            let v: Vec<f64> =
                (0..n).map(|i| if bits & (1 << i) != 0 { 1.0 } else { -1.0 }).collect();
            if !contracts(&v) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn inf_norm_of(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn is_constant_sign_vector(v: &[f64]) -> bool {
    v.iter().all(|&x| x == 1.0) || v.iter().all(|&x| x == -1.0)
}
