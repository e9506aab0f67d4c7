//! Dense matrix functions: the matrix exponential via scaling-and-squaring
//! with diagonal Padé approximants, plus a slow truncated-series oracle used
//! by the test suites.
//!
//! The exponential follows Higham, "The Scaling and Squaring Method for the
//! Matrix Exponential Revisited", SIAM J. Matrix Anal. Appl. 26(4), 2005:
//! the Padé degree (3, 5, 7, 9, or 13) is selected by 1-norm thresholds and
//! degree 13 is used with scaling at the top level.

use thiserror::Error;

use crate::matrix::DenseMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum MatfunError {
    #[error("matrix exponential requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("Pade denominator is numerically singular")]
    SingularDenominator,
    #[error("matrix exponential overflowed (input 1-norm {norm:.3e})")]
    Overflow { norm: f64 },
}

/// Matrix exponential together with diagnostics of the evaluation.
#[derive(Debug, Clone)]
pub struct ExpmResult {
    /// The computed exponential.
    pub value: DenseMatrix,
    /// Number of squarings applied after the Padé evaluation.
    pub scaling_squarings: u32,
    /// Leading-order model of the backward-error bound that drives the
    /// degree selection: `u * (eta / theta_m)^(2m+1)` with `eta` the 1-norm
    /// of the (scaled) input. Diagnostic only.
    pub estimated_backward_error: f64,
}

// 1-norm thresholds theta_m from Higham (2005), Table 2.3.
const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Unit roundoff (half the machine epsilon).
const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Computes `e^A` for a square matrix.
pub fn expm(a: &DenseMatrix) -> Result<ExpmResult, MatfunError> {
    if !a.is_square() {
        return Err(MatfunError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(ExpmResult {
            value: DenseMatrix::zeros(0, 0),
            scaling_squarings: 0,
            estimated_backward_error: 0.0,
        });
    }

    let norm = a.one_norm();
    let (degree, theta, squarings) = if norm <= THETA_3 {
        (3, THETA_3, 0)
    } else if norm <= THETA_5 {
        (5, THETA_5, 0)
    } else if norm <= THETA_7 {
        (7, THETA_7, 0)
    } else if norm <= THETA_9 {
        (9, THETA_9, 0)
    } else {
        let s = ((norm / THETA_13).log2().ceil()).max(0.0) as u32;
        (13, THETA_13, s)
    };

    let scaled = if squarings > 0 { a.scale(0.5f64.powi(squarings as i32)) } else { a.clone() };
    let eta = if squarings > 0 { scaled.one_norm() } else { norm };

    let (u, v) = match degree {
        3 => pade_uv(&scaled, &B3),
        5 => pade_uv(&scaled, &B5),
        7 => pade_uv(&scaled, &B7),
        9 => pade_uv(&scaled, &B9),
        _ => pade13_uv(&scaled),
    };

    // r_m(A) = (V - U)^{-1} (V + U)
    let numer = (&v + &u).to_na();
    let denom = (&v - &u).to_na();
    let solved = denom.lu().solve(&numer).ok_or(MatfunError::SingularDenominator)?;
    let mut result = DenseMatrix::from_na(&solved);

    for _ in 0..squarings {
        result = &result * &result;
    }
    if !result.data().iter().all(|v| v.is_finite()) {
        return Err(MatfunError::Overflow { norm });
    }

    let estimated_backward_error = UNIT_ROUNDOFF * (eta / theta).powi(2 * degree + 1);
    Ok(ExpmResult { value: result, scaling_squarings: squarings, estimated_backward_error })
}

/// U (odd part, premultiplied by A) and V (even part) of the degree-m Padé
/// approximant, for m <= 9 where all powers fit comfortably.
fn pade_uv(a: &DenseMatrix, b: &[f64]) -> (DenseMatrix, DenseMatrix) {
    let n = a.rows();
    let a2 = a * a;
    let mut even_powers = vec![DenseMatrix::identity(n)];
    for _ in 0..(b.len() - 2) / 2 {
        even_powers.push(even_powers.last().unwrap() * &a2);
    }

    let mut odd_sum = DenseMatrix::zeros(n, n);
    let mut even_sum = DenseMatrix::zeros(n, n);
    for (k, pow) in even_powers.iter().enumerate() {
        odd_sum = &odd_sum + &pow.scale(b[2 * k + 1]);
        even_sum = &even_sum + &pow.scale(b[2 * k]);
    }
    (a * &odd_sum, even_sum)
}

/// Degree-13 evaluation using the factored form that needs only A^2, A^4, A^6.
fn pade13_uv(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = a.rows();
    let eye = DenseMatrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let w1 = &(&a6.scale(B13[13]) + &a4.scale(B13[11])) + &a2.scale(B13[9]);
    let w2 = &(&(&a6.scale(B13[7]) + &a4.scale(B13[5])) + &a2.scale(B13[3])) + &eye.scale(B13[1]);
    let u = a * &(&(&w1 * &a6) + &w2);

    let v1 = &(&a6.scale(B13[12]) + &a4.scale(B13[10])) + &a2.scale(B13[8]);
    let v2 = &(&(&a6.scale(B13[6]) + &a4.scale(B13[4])) + &a2.scale(B13[2])) + &eye.scale(B13[0]);
    let v = &(&v1 * &a6) + &v2;
    (u, v)
}

/// Truncated exponential series `sum_{k=0}^{terms-1} A^k / k!`, evaluated in
/// Horner form. Test oracle only: accuracy degrades once `‖A‖₁` grows past
/// a few units, so keep inputs small.
pub fn expm_taylor_oracle(a: &DenseMatrix, terms: usize) -> DenseMatrix {
    assert!(a.is_square(), "taylor oracle requires a square matrix");
    assert!(terms >= 1, "taylor oracle requires at least one term");
    let eye = DenseMatrix::identity(a.rows());
    let mut sum = eye.clone();
    for k in (1..terms).rev() {
        sum = &eye + &(&a.scale(1.0 / k as f64) * &sum);
    }
    sum
}

/// Induced infinity norm: the maximum absolute row sum.
pub fn induced_inf_norm(m: &DenseMatrix) -> f64 {
    m.inf_norm()
}

/// Per-row sums of a matrix.
pub fn row_sums(m: &DenseMatrix) -> Vec<f64> {
    m.row_sums()
}
