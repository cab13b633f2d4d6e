//! Evaluation of the gamma quotient Λ(z) = Γ(z+1/2)/Γ(z+1).
//!
//! Every entry of the Legendre/Chebyshev connection matrices is a product
//! or ratio of Λ values, so this function has to be both fast and accurate
//! to the last bit. Three facts make that possible:
//!
//! * Λ(z) = τ(z+1/4)/√(z+1/4), where τ has a rapidly converging expansion
//!   in inverse powers of (z+1/4)²: τ(u) ≈ 1 − 1/(2⁶u²) + 21/(2¹³u⁴)
//!   − 671/(2¹⁹u⁶) + 180323/(2²⁷u⁸). Five terms reach machine precision
//!   once z > 19.88; four, three and two terms suffice beyond z = 40,
//!   134 and 1844.
//! * Λ satisfies Λ(z) = Λ(z−1)·(z−1/2)/z, so small arguments are reached
//!   by shifting up past the series region, evaluating the series, and
//!   recurring back down (at most 27 multiply/divide steps).
//! * Integer vectors λ_k = Λ(k) follow from the recursion seeded at
//!   Λ(0) = √π, re-anchored by the series at every 8th index to stop
//!   rounding drift.
//!
//! The recursion and the series are carried in double-double arithmetic
//! internally, so scalar and vector values come out correctly rounded;
//! the cheaper plain-double series (`lambda_approx`) is reserved for bulk
//! kernel sampling where a couple of ulps are irrelevant.

use crate::dd::{two_sum, Dd};
use std::fmt;

/// √π, correctly rounded; Λ(0) and the seed of the integer recursion.
pub const SQRT_PI: f64 = 1.772_453_850_905_516_027_3;

/// Low word of √π in double-double representation.
const SQRT_PI_LO: f64 = -7.666_586_499_825_799e-17;

/// Below this argument the asymptotic series is no longer trusted and the
/// shift-and-recur fallback takes over.
pub(crate) const SERIES_THRESHOLD: f64 = 19.88;

/// The shift recursion anchors its series evaluation above this point.
/// Past 26 the series remainder is below a quarter ulp, so the values the
/// recursion hands back down are correctly rounded, not merely accurate
/// to an ulp as they are just past the series threshold.
const SHIFT_TARGET: f64 = 26.0;

/// τ expansion coefficients; all five are exact dyadic doubles.
const TAU_COEFF: [f64; 5] = [
    1.0,
    -1.0 / 64.0,
    21.0 / 8_192.0,
    -671.0 / 524_288.0,
    180_323.0 / 134_217_728.0,
];

/// Errors from the Λ evaluation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaError {
    /// `terms_needed` requires a positive lower bound on the argument.
    NonPositiveZMin(f64),
    /// Λ is only defined here for z ≥ 0.
    NegativeArgument(f64),
    /// `lambda_vector` needs at least one entry.
    EmptyVector,
}

impl fmt::Display for GammaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaError::NonPositiveZMin(z) => {
                write!(f, "terms_needed requires z_min > 0, got {z}")
            }
            GammaError::NegativeArgument(z) => {
                write!(f, "lambda is not evaluated for negative arguments, got {z}")
            }
            GammaError::EmptyVector => write!(f, "lambda_vector requires n >= 1"),
        }
    }
}

impl std::error::Error for GammaError {}

/// Smallest τ term count that keeps relative error at machine precision
/// for every argument ≥ `z_min`.
///
/// Returns 5 for any `z_min` ≤ 40 (arguments at or below 19.88 are the
/// caller's business: `lambda_scalar` reaches them by shifting, which
/// itself uses the 5-term series above 20).
///
/// # Examples
///
/// ```
/// use fastconnect::terms_needed;
/// assert_eq!(terms_needed(2000.0).unwrap(), 2);
/// assert_eq!(terms_needed(200.0).unwrap(), 3);
/// assert_eq!(terms_needed(50.0).unwrap(), 4);
/// ```
pub fn terms_needed(z_min: f64) -> Result<usize, GammaError> {
    if !(z_min > 0.0) {
        return Err(GammaError::NonPositiveZMin(z_min));
    }
    Ok(if z_min > 1844.0 {
        2
    } else if z_min > 134.0 {
        3
    } else if z_min > 40.0 {
        4
    } else {
        5
    })
}

/// Plain-double τ series; valid for z above `SERIES_THRESHOLD` with the
/// term count from `terms_needed`. Carries ≤ 2 ulps of error.
fn series_f64(z: f64, terms: usize) -> f64 {
    let u = z + 0.25;
    let v = 1.0 / (u * u);
    let mut acc = TAU_COEFF[terms - 1];
    for k in (0..terms - 1).rev() {
        acc = acc * v + TAU_COEFF[k];
    }
    acc / u.sqrt()
}

/// Double-double τ series evaluated at u = z + 1/4, which the caller
/// supplies exactly (the shift path needs u beyond plain-double range).
fn series_dd(u: Dd, terms: usize) -> Dd {
    let v = Dd::from_f64(1.0).div(u.mul(u));
    let mut acc = Dd::from_f64(TAU_COEFF[terms - 1]);
    for k in (0..terms - 1).rev() {
        acc = acc.mul(v).add_f64(TAU_COEFF[k]);
    }
    acc.div(u.sqrt())
}

/// Full-accuracy Λ in double-double, any z ≥ 0.
fn lambda_dd(z: f64) -> Dd {
    if z == 0.0 {
        return Dd::new(SQRT_PI, SQRT_PI_LO);
    }
    if z > SERIES_THRESHOLD {
        return series_dd(two_sum(z, 0.25), 5);
    }
    // Shift up past the series region, evaluate there, recur back down
    // through Λ(x) = Λ(x+1)·(x+1)/(x+1/2). At most 27 steps. Every
    // argument z+k is carried exactly as a double-double: rounding it to
    // a plain double would let consecutive steps disagree about the
    // recursion point and drift by an ulp every few steps.
    let m = (SHIFT_TARGET - z).floor() as usize + 1;
    let mut val = series_dd(two_sum(z, m as f64 + 0.25), 5);
    for k in (0..m).rev() {
        let num = two_sum(z, k as f64 + 1.0);
        let den = two_sum(z, k as f64 + 0.5);
        val = val.mul(num).div(den);
    }
    val
}

/// Bulk-sampling path: plain-double series with a truncated term count.
/// Arguments at or below the series threshold fall back to the exact
/// shifted evaluation (they only occur for unusually small block sizes).
pub(crate) fn lambda_approx(z: f64, terms: usize) -> f64 {
    if z > SERIES_THRESHOLD {
        series_f64(z, terms)
    } else {
        lambda_dd(z).to_f64()
    }
}

/// Λ(z) for a single z ≥ 0, correctly rounded.
///
/// # Examples
///
/// ```
/// use fastconnect::{lambda_scalar, gamma_ratio::SQRT_PI};
/// assert_eq!(lambda_scalar(0.0).unwrap(), SQRT_PI);
/// assert!((lambda_scalar(1.0).unwrap() - SQRT_PI / 2.0).abs() < 1e-16);
/// ```
pub fn lambda_scalar(z: f64) -> Result<f64, GammaError> {
    if !(z >= 0.0) {
        return Err(GammaError::NegativeArgument(z));
    }
    Ok(lambda_dd(z).to_f64())
}

/// The integer vector λ_k = Λ(k) for k = 0..n.
///
/// Built by the seeded recursion with a fresh series evaluation at every
/// 8th index beyond the series threshold; the running value is kept in
/// double-double so each stored entry is correctly rounded. Relative
/// error stays below 1e-15 for all indices up to 2²³ and beyond.
pub fn lambda_vector(n: usize) -> Result<Vec<f64>, GammaError> {
    if n == 0 {
        return Err(GammaError::EmptyVector);
    }
    let mut values = Vec::with_capacity(n);
    let mut chain = Dd::new(SQRT_PI, SQRT_PI_LO);
    values.push(chain.to_f64());
    for i in 1..n {
        if i % 8 == 0 && (i as f64) > SERIES_THRESHOLD {
            chain = series_dd(two_sum(i as f64, 0.25), 5);
        } else {
            chain = chain.mul_f64(i as f64 - 0.5).div_f64(i as f64);
        }
        values.push(chain.to_f64());
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Distance in representable doubles; both arguments must be finite
    /// and of the same sign.
    fn ulps(a: f64, b: f64) -> u64 {
        (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
    }

    // Reference values computed with a 60-digit Γ-ratio evaluation before
    // the implementation was written.
    const LAMBDA_100: f64 = 0.099_875_078_612_625_182_106_11;
    const LAMBDA_1E4: f64 = 0.009_999_875_000_781_298_827_484;
    const LAMBDA_1E6: f64 = 0.000_999_999_875_000_007_812_504_9;
    const LAMBDA_8388600: f64 = 0.000_345_267_142_492_602_371_006_9;
    // Coincides with 2/sqrt(pi) but is frozen independently like the rest.
    #[allow(clippy::approx_constant)]
    const LAMBDA_HALF: f64 = 1.128_379_167_095_512_573_896;
    const LAMBDA_7_25: f64 = 0.365_047_234_826_412_098_368_3;
    const LAMBDA_19_5: f64 = 0.225_008_570_288_660_629_653_6;
    const LAMBDA_20_5: f64 = 0.219_520_556_379_181_102_101;
    const LAMBDA_100_75: f64 = 0.099_503_566_612_352_116_093_62;

    #[test]
    fn term_counts_match_thresholds() {
        assert_eq!(terms_needed(2000.0).unwrap(), 2);
        assert_eq!(terms_needed(200.0).unwrap(), 3);
        assert_eq!(terms_needed(50.0).unwrap(), 4);
        assert_eq!(terms_needed(25.0).unwrap(), 5);
        assert_eq!(terms_needed(1.0).unwrap(), 5);
        // Threshold values themselves still need the larger count.
        assert_eq!(terms_needed(40.0).unwrap(), 5);
        assert_eq!(terms_needed(134.0).unwrap(), 4);
        assert_eq!(terms_needed(1844.0).unwrap(), 3);
        assert_eq!(terms_needed(40.000001).unwrap(), 4);
    }

    #[test]
    fn term_count_rejects_bad_input() {
        assert!(terms_needed(0.0).is_err());
        assert!(terms_needed(-3.0).is_err());
        assert!(terms_needed(f64::NAN).is_err());
    }

    #[test]
    fn scalar_matches_closed_forms() {
        assert_eq!(lambda_scalar(0.0).unwrap(), SQRT_PI);
        // Λ(1) = √π/2 and halving is exact, so this is bit-for-bit.
        assert_eq!(lambda_scalar(1.0).unwrap(), SQRT_PI * 0.5);
        assert!(lambda_scalar(-1e-9).is_err());
        assert!(lambda_scalar(f64::NAN).is_err());
    }

    #[test]
    fn scalar_matches_frozen_references() {
        for (z, want) in [
            (100.0, LAMBDA_100),
            (0.5, LAMBDA_HALF),
            (7.25, LAMBDA_7_25),
            (19.5, LAMBDA_19_5),
            (20.5, LAMBDA_20_5),
            (100.75, LAMBDA_100_75),
        ] {
            let got = lambda_scalar(z).unwrap();
            assert!(
                ulps(got, want) <= 1,
                "lambda({z}) = {got:e}, reference {want:e}"
            );
            assert!((got / want - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn vector_small_cases() {
        assert!(lambda_vector(0).is_err());
        assert_eq!(lambda_vector(1).unwrap(), vec![SQRT_PI]);
        let v = lambda_vector(3).unwrap();
        assert_eq!(v[0], SQRT_PI);
        assert_eq!(v[1], SQRT_PI * 0.5);
        assert!(ulps(v[2], SQRT_PI * 0.375) <= 1, "lambda_2 = {:e}", v[2]);
    }

    #[test]
    fn vector_is_positive_and_strictly_decreasing() {
        let v = lambda_vector(4096).unwrap();
        for k in 1..v.len() {
            assert!(v[k] > 0.0);
            assert!(v[k] < v[k - 1], "not decreasing at k = {k}");
        }
    }

    #[test]
    fn vector_ratio_law() {
        let v = lambda_vector(1 << 16).unwrap();
        for k in 1..v.len() {
            let got = v[k] / v[k - 1];
            let want = (k as f64 - 0.5) / k as f64;
            assert!(ulps(got, want) <= 2, "ratio off at k = {k}: {got:e} vs {want:e}");
        }
    }

    #[test]
    fn scalar_and_vector_agree() {
        let v = lambda_vector(4096).unwrap();
        for (k, &vk) in v.iter().enumerate() {
            let s = lambda_scalar(k as f64).unwrap();
            assert!(ulps(s, vk) <= 5, "k = {k}: scalar {s:e} vector {vk:e}");
        }
    }

    #[test]
    fn vector_hits_frozen_references_at_large_indices() {
        let v = lambda_vector((1 << 23) + 1).unwrap();
        for (idx, want) in [
            (10_000usize, LAMBDA_1E4),
            (1_000_000, LAMBDA_1E6),
            (8_388_600, LAMBDA_8388600),
        ] {
            let got = v[idx];
            assert!(
                (got / want - 1.0).abs() < 1e-15,
                "index {idx}: {got:e} vs {want:e}"
            );
        }
    }

    #[test]
    fn truncated_series_agree_above_their_thresholds() {
        // Each truncated path stays within ~1 ulp of the true value above
        // its threshold, so any two of them sit within 2 ulps of each
        // other (2 ulps is the measured worst case, not just a bound).
        let zs: Vec<f64> = (0..200)
            .map(|t| 20.0 * (1e6f64 / 20.0).powf(t as f64 / 199.0))
            .collect();
        for &z in &zs {
            let full = series_f64(z, 5);
            let exact = lambda_scalar(z).unwrap();
            for (terms, threshold) in [(4usize, 40.0), (3, 134.0), (2, 1844.0)] {
                if z > threshold {
                    let trunc = series_f64(z, terms);
                    assert!(
                        ulps(trunc, full) <= 2,
                        "z = {z}, {terms}-term vs 5-term: {trunc:e} vs {full:e}"
                    );
                    assert!(ulps(trunc, exact) <= 2);
                }
            }
        }
    }

    #[test]
    fn asymptotic_approach_from_below() {
        // Λ(z)·√z increases toward 1 with growing z.
        let mut prev = 0.0;
        for t in 0..=20 {
            let z = 1e3 * (2.0f64).powi(t);
            let val = lambda_scalar(z).unwrap() * z.sqrt();
            assert!(val < 1.0, "z = {z}: {val}");
            assert!(val > prev, "not increasing at z = {z}");
            prev = val;
        }
    }
}
