//! Slow, independent reference transforms for validation.
//!
//! The forward oracle is the dense O(n²) connection sum with Neumaier
//! compensated accumulation, so its rounding error stays near one ulp
//! regardless of length. The inverse oracle never touches the inverse
//! connection formula: it back-substitutes the upper-triangular forward
//! system directly, giving an error model independent of the fast
//! inverse path. Inputs are magnitude-guarded by default because a
//! compensated sum of wildly scaled terms would report meaningless
//! digits; the guard can be lifted explicitly.
//!
//! Also here: the normalized max-difference metric and the seeded
//! decaying random vectors used throughout the tests and benches.

use crate::gamma_ratio::lambda_vector;
use crate::Direction;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};
use std::fmt;

/// Default bound on input magnitudes accepted by the oracle.
pub const ORACLE_MAGNITUDE_LIMIT: f64 = 65536.0;

/// Errors from the reference transforms and the error metric.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// Input holds a NaN or infinity.
    NotFinite { index: usize },
    /// Input magnitude above the guard; pass a larger limit to allow it.
    TooLarge { index: usize, value: f64, limit: f64 },
    /// Metric arguments must have equal lengths.
    LengthMismatch { got: usize, want: usize },
    /// The metric is undefined against an all-zero reference.
    ZeroReference,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::NotFinite { index } => {
                write!(f, "input entry {index} is not finite")
            }
            OracleError::TooLarge { index, value, limit } => {
                write!(
                    f,
                    "input entry {index} has magnitude {value:e}, above the oracle guard {limit:e}"
                )
            }
            OracleError::LengthMismatch { got, want } => {
                write!(f, "length mismatch: {got} vs reference {want}")
            }
            OracleError::ZeroReference => {
                write!(f, "relative error is undefined for an all-zero reference")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Running compensated sum; the correction term picks up whatever the
/// naive addition rounds away, even when the addend dominates.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    s: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn value(self) -> f64 {
        self.s + self.c
    }
}

fn check_input(f: &[f64], limit: f64) -> Result<(), OracleError> {
    for (index, &x) in f.iter().enumerate() {
        if !x.is_finite() {
            return Err(OracleError::NotFinite { index });
        }
        if x.abs() > limit {
            return Err(OracleError::TooLarge {
                index,
                value: x,
                limit,
            });
        }
    }
    Ok(())
}

/// Reference transform with the default magnitude guard.
pub fn oracle_transform(direction: Direction, f: &[f64]) -> Result<Vec<f64>, OracleError> {
    oracle_transform_with(direction, f, ORACLE_MAGNITUDE_LIMIT)
}

/// Reference transform with an explicit magnitude guard; pass infinity
/// to accept any finite input.
pub fn oracle_transform_with(
    direction: Direction,
    f: &[f64],
    limit: f64,
) -> Result<Vec<f64>, OracleError> {
    check_input(f, limit)?;
    let n = f.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lambda = lambda_vector(n).expect("length is positive");
    match direction {
        Direction::LegendreToChebyshev => Ok(forward_compensated(f, &lambda)),
        Direction::ChebyshevToLegendre => Ok(backsolve(f, &lambda)),
    }
}

/// Compensated dense forward sum z_i = scale_i · Σ_k λ_k λ_{k+i} f_{i+2k}.
fn forward_compensated(f: &[f64], lambda: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut z = vec![0.0; n];
    for (i, zi) in z.iter_mut().enumerate() {
        let mut acc = Neumaier::default();
        let mut k = 0;
        while i + 2 * k < n {
            acc.add(lambda[k] * lambda[k + i] * f[i + 2 * k]);
            k += 1;
        }
        // Dividing by pi (rather than multiplying by its reciprocal)
        // keeps the first unit vector an exact fixed point.
        *zi = if i == 0 {
            acc.value() / PI
        } else {
            acc.value() * FRAC_2_PI
        };
    }
    z
}

/// Solves the forward system for the inverse map: the forward matrix is
/// upper triangular on each parity class with diagonal λ₀λ_i, so given
/// Chebyshev coefficients g the Legendre coefficients come from one
/// compensated back-substitution of λ₀λ_i f_i = c_i(π/2)g_i − Σ_{k≥1} ….
fn backsolve(g: &[f64], lambda: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut f = vec![0.0; n];
    for i in (0..n).rev() {
        let rhs = if i == 0 { PI * g[0] } else { FRAC_PI_2 * g[i] };
        let mut acc = Neumaier::default();
        acc.add(rhs);
        let mut k = 1;
        while i + 2 * k < n {
            acc.add(-(lambda[k] * lambda[k + i] * f[i + 2 * k]));
            k += 1;
        }
        f[i] = acc.value() / (lambda[0] * lambda[i]);
    }
    f
}

/// Normalized max difference: max|got − want| / max|want|. Lengths must
/// agree and the reference must not be identically zero.
pub fn e_inf(got: &[f64], want: &[f64]) -> Result<f64, OracleError> {
    if got.len() != want.len() {
        return Err(OracleError::LengthMismatch {
            got: got.len(),
            want: want.len(),
        });
    }
    let scale = want.iter().fold(0.0_f64, |a, w| a.max(w.abs()));
    if scale == 0.0 {
        return Err(OracleError::ZeroReference);
    }
    let diff = got
        .iter()
        .zip(want)
        .fold(0.0_f64, |a, (g, w)| a.max((g - w).abs()));
    Ok(diff / scale)
}

/// Recipe for a seeded test vector with entries u_k/(k+1)^decay, u_k
/// uniform in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub len: usize,
    pub seed: u64,
    pub decay: f64,
}

/// Generates the vector described by `spec`. The stream is the raw
/// ChaCha8 64-bit output mapped to [0, 1) by taking the top 53 bits, so
/// equal specs give bitwise equal vectors on every platform.
pub fn random_decaying(spec: &RandomSpec) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.len)
        .map(|k| {
            let u = (rng.next_u64() >> 11) as f64 * (0.5f64).powi(53);
            u / ((k + 1) as f64).powf(spec.decay)
        })
        .collect()
}
