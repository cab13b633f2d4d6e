//! Chebyshev machinery: fixed-size DCT-II, Vandermonde matrices on
//! uniform parity grids, and the exact triangular basis-change matrices
//! that move expansions between an interval and its half-intervals.
//!
//! The transform works with Chebyshev expansions of one fixed small
//! order M per plan (18 by default), so the DCT here is a direct O(M²)
//! matrix application per axis rather than an FFT; at this size that is
//! both faster in practice and bit-stable across runs.
//!
//! The basis-change matrices B(l) satisfy T_k((Y+2l−1)/2) =
//! Σ_j B(l)[k][j] T_j(Y): they re-expand a Chebyshev polynomial of the
//! parent interval on its left (l = 0) or right (l = 1) half. They are
//! built exactly, in big-rational arithmetic, as W⁻¹·V(l)·W where W maps
//! monomials to Chebyshev coefficients, and only then rounded to floats;
//! every entry is a dyadic rational, so for moderate M the float entries
//! are exact.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::PI;
use std::fmt;

/// Errors from the fixed-size Chebyshev operations.
#[derive(Debug, Clone, PartialEq)]
pub enum ChebError {
    /// Matrix input whose length is not the expected M×M.
    WrongSize { expected: usize, got: usize },
    /// Sizes must be at least 1.
    ZeroSize,
    /// Basis-change construction overflows exact integer range.
    Overflow(usize),
    /// Parity selectors are 0 or 1.
    BadParity(usize),
}

impl fmt::Display for ChebError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChebError::WrongSize { expected, got } => {
                write!(f, "expected a square matrix of {expected} entries, got {got}")
            }
            ChebError::ZeroSize => write!(f, "sizes must be at least 1"),
            ChebError::Overflow(m) => {
                write!(f, "basis-change matrices are exact only up to M = 64, got {m}")
            }
            ChebError::BadParity(s) => write!(f, "parity must be 0 or 1, got {s}"),
        }
    }
}

impl std::error::Error for ChebError {}

/// First-quadrant cosine table: q[t] = cos(tπ/(2m)) for t ∈ [0, m], with
/// the endpoint cos(π/2) pinned to exactly zero.
fn quarter_cos(m: usize) -> Vec<f64> {
    let mut q = vec![0.0; m + 1];
    for (t, slot) in q.iter_mut().enumerate().take(m) {
        *slot = (t as f64 * PI / (2 * m) as f64).cos();
    }
    q
}

/// cos(tπ/(2m)) for any integer t, folded into the first quadrant so that
/// the trigonometric symmetries (sign flips, period) hold bitwise.
fn folded_cos(q: &[f64], m: usize, t: usize) -> f64 {
    let t = t % (4 * m);
    let v = if t <= m {
        q[t]
    } else if t <= 2 * m {
        -q[2 * m - t]
    } else if t <= 3 * m {
        -q[t - 2 * m]
    } else {
        q[4 * m - t]
    };
    // Normalize −0.0 from the folds that land on a zero of the cosine.
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// Chebyshev–Gauss nodes cos((j+1/2)π/m), largest first.
///
/// Built from the folded quarter-period table, so X[m−1−j] = −X[j] holds
/// bitwise (an odd-length middle node is exactly zero); the kernel
/// sampling symmetries depend on that.
pub fn gauss_nodes(m: usize) -> Vec<f64> {
    let q = quarter_cos(m);
    (0..m).map(|j| folded_cos(&q, m, 2 * j + 1)).collect()
}

/// T_k(x) by the three-term recurrence.
pub fn cheb_t(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for _ in 1..k {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    cur
}

/// Two-dimensional DCT-II of fixed size, with the cosine table cached.
#[derive(Debug, Clone)]
pub struct Dct2 {
    m: usize,
    /// cos[k·m + j] = cos(k(j+1/2)π/m).
    cos: Vec<f64>,
}

impl Dct2 {
    pub fn new(m: usize) -> Result<Self, ChebError> {
        if m == 0 {
            return Err(ChebError::ZeroSize);
        }
        // cos(k(j+1/2)π/m) = cos(k(2j+1)·π/(2m)); folding the integer
        // phase k(2j+1) into the first quadrant keeps orthogonality sums
        // cancelling to well below an ulp, where evaluating the cosine at
        // large arguments would lose digits to argument reduction.
        let q = quarter_cos(m);
        let mut cos = vec![0.0; m * m];
        for k in 0..m {
            for j in 0..m {
                cos[k * m + j] = folded_cos(&q, m, k * (2 * j + 1));
            }
        }
        Ok(Dct2 { m, cos })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// â_{kl} = 4/(c_k c_l M²) Σ_m Σ_n a_{mn} cos(k(m+1/2)π/M)
    /// cos(l(n+1/2)π/M), with c_0 = 2 and c_k = 1 otherwise. Row-major
    /// M×M in and out.
    pub fn transform(&self, a: &[f64]) -> Result<Vec<f64>, ChebError> {
        let m = self.m;
        if a.len() != m * m {
            return Err(ChebError::WrongSize {
                expected: m * m,
                got: a.len(),
            });
        }
        // First axis: tmp[k][n] = Σ_m cos[k][m]·a[m][n].
        let mut tmp = vec![0.0; m * m];
        for k in 0..m {
            let row = &self.cos[k * m..(k + 1) * m];
            for (mi, &w) in row.iter().enumerate() {
                let src = &a[mi * m..(mi + 1) * m];
                let dst = &mut tmp[k * m..(k + 1) * m];
                for n in 0..m {
                    dst[n] += w * src[n];
                }
            }
        }
        // Second axis plus normalization.
        let mut out = vec![0.0; m * m];
        let scale = 4.0 / (m * m) as f64;
        for k in 0..m {
            let src = &tmp[k * m..(k + 1) * m];
            for l in 0..m {
                let row = &self.cos[l * m..(l + 1) * m];
                let mut acc = 0.0;
                for n in 0..m {
                    acc += row[n] * src[n];
                }
                let ck = if k == 0 { 2.0 } else { 1.0 };
                let cl = if l == 0 { 2.0 } else { 1.0 };
                out[k * m + l] = acc * scale / (ck * cl);
            }
        }
        Ok(out)
    }
}

/// One-shot convenience wrapper around `Dct2` for an M×M input.
pub fn dct2_2d(a: &[f64], m: usize) -> Result<Vec<f64>, ChebError> {
    Dct2::new(m)?.transform(a)
}

/// Lower-triangular half-interval basis change, row-major M×M.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularMap {
    /// Half-interval selector: 0 maps to the left half, 1 to the right.
    pub l: usize,
    pub m: usize,
    /// entries[k·m + j] is the coefficient of T_j(Y) in T_k((Y+2l−1)/2).
    pub entries: Vec<f64>,
}

impl TriangularMap {
    pub fn at(&self, k: usize, j: usize) -> f64 {
        self.entries[k * self.m + j]
    }
}

/// x^n = Σ_j w[n][j] T_j, nonzero for j ≤ n with n−j even:
/// w[n][j] = 2/(c_j 2^n)·binom(n, (n−j)/2).
fn build_w(m: usize) -> Vec<Vec<BigRational>> {
    let mut w = vec![vec![BigRational::zero(); m]; m];
    for n in 0..m {
        for j in (n % 2..=n).step_by(2) {
            let cj = if j == 0 { 2 } else { 1 };
            let num = BigInt::from(2) * binomial(BigInt::from(n), BigInt::from((n - j) / 2));
            let den = BigInt::from(cj) * (BigInt::one() << n);
            w[n][j] = BigRational::new(num, den);
        }
    }
    w
}

/// T_n = Σ_j w⁻¹[n][j] x^j, nonzero for j ≤ n with n−j even:
/// w⁻¹[n][j] = n(−1)^((n−j)/2) 2^j/(n+j)·binom((n+j)/2, (n−j)/2),
/// with the single exception w⁻¹[0][0] = 1.
fn build_w_inv(m: usize) -> Vec<Vec<BigRational>> {
    let mut w = vec![vec![BigRational::zero(); m]; m];
    w[0][0] = BigRational::one();
    for n in 1..m {
        for j in (n % 2..=n).step_by(2) {
            let half_diff = (n - j) / 2;
            let mut num = BigInt::from(n)
                * (BigInt::one() << j)
                * binomial(BigInt::from((n + j) / 2), BigInt::from(half_diff));
            if half_diff % 2 == 1 {
                num = -num;
            }
            w[n][j] = BigRational::new(num, BigInt::from(n + j));
        }
    }
    w
}

/// Monomial composition with x = (Y+2l−1)/2:
/// v[n][j] = binom(n, n−j)(2l−1)^(n−j)/2^n for j ≤ n.
fn build_v(l: usize, m: usize) -> Vec<Vec<BigRational>> {
    let mut v = vec![vec![BigRational::zero(); m]; m];
    for n in 0..m {
        for j in 0..=n {
            let mut num = binomial(BigInt::from(n), BigInt::from(n - j));
            if l == 0 && (n - j) % 2 == 1 {
                num = -num;
            }
            v[n][j] = BigRational::new(num, BigInt::one() << n);
        }
    }
    v
}

fn mat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let m = a.len();
    let mut out = vec![vec![BigRational::zero(); m]; m];
    for i in 0..m {
        for k in 0..m {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[k][j].is_zero() {
                    let prod = &a[i][k] * &b[k][j];
                    out[i][j] += prod;
                }
            }
        }
    }
    out
}

/// Exact rational B(l) = W⁻¹·V(l)·W.
fn build_b_rational(l: usize, m: usize) -> Vec<Vec<BigRational>> {
    let w = build_w(m);
    let w_inv = build_w_inv(m);
    let v = build_v(l, m);
    mat_mul(&mat_mul(&w_inv, &v), &w)
}

/// Basis-change matrix for one half-interval, exact for M ≤ 64.
///
/// # Examples
///
/// ```
/// use fastconnect::cheb_tools::build_b;
/// let b0 = build_b(0, 4).unwrap();
/// assert_eq!(&b0.entries[4..6], &[-0.5, 0.5]);
/// ```
pub fn build_b(l: usize, m: usize) -> Result<TriangularMap, ChebError> {
    if l > 1 {
        return Err(ChebError::BadParity(l));
    }
    if m == 0 {
        return Err(ChebError::ZeroSize);
    }
    if m > 64 {
        return Err(ChebError::Overflow(m));
    }
    let exact = build_b_rational(l, m);
    let mut entries = vec![0.0; m * m];
    for (k, row) in exact.iter().enumerate() {
        for (j, val) in row.iter().enumerate() {
            entries[k * m + j] = val.to_f64().expect("dyadic entry fits in f64");
        }
    }
    Ok(TriangularMap { l, m, entries })
}

/// Chebyshev values on the uniform parity grid of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeSet {
    pub sigma: usize,
    pub h: usize,
    pub m: usize,
    /// entries[row·m + k] = T_k(−1 + (2·row+σ)/h), row ∈ [0, h).
    pub entries: Vec<f64>,
}

impl VandermondeSet {
    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.m..(r + 1) * self.m]
    }
}

/// T_k at the h uniform grid points X_m = −1 + (2m+σ)/h, for k < M.
///
/// Grid points lie in [−1, 1); evaluation is the three-term recurrence.
pub fn vandermonde(sigma: usize, h: usize, m: usize) -> Result<VandermondeSet, ChebError> {
    if sigma > 1 {
        return Err(ChebError::BadParity(sigma));
    }
    if h == 0 || m == 0 {
        return Err(ChebError::ZeroSize);
    }
    let mut entries = vec![0.0; h * m];
    for row in 0..h {
        let x = (2 * row + sigma) as f64 / h as f64 - 1.0;
        let out = &mut entries[row * m..(row + 1) * m];
        out[0] = 1.0;
        if m > 1 {
            out[1] = x;
            for k in 2..m {
                out[k] = 2.0 * x * out[k - 1] - out[k - 2];
            }
        }
    }
    Ok(VandermondeSet {
        sigma,
        h,
        m,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn dct_of_ones_is_unit_at_origin() {
        let m = 18;
        let a = vec![1.0; m * m];
        let ahat = dct2_2d(&a, m).unwrap();
        for k in 0..m {
            for l in 0..m {
                let want = if k == 0 && l == 0 { 1.0 } else { 0.0 };
                assert!(
                    (ahat[k * m + l] - want).abs() <= 1e-15,
                    "({k},{l}): {}",
                    ahat[k * m + l]
                );
            }
        }
    }

    #[test]
    fn dct_picks_out_first_mode() {
        let m = 18;
        let nodes = gauss_nodes(m);
        let mut a = vec![0.0; m * m];
        for mi in 0..m {
            for n in 0..m {
                a[mi * m + n] = nodes[mi];
            }
        }
        let ahat = dct2_2d(&a, m).unwrap();
        for k in 0..m {
            for l in 0..m {
                let want = if k == 1 && l == 0 { 1.0 } else { 0.0 };
                assert!((ahat[k * m + l] - want).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn dct_roundtrips_through_evaluation() {
        let m = 18;
        // Deterministic full-rank-ish input.
        let mut a = vec![0.0; m * m];
        for mi in 0..m {
            for n in 0..m {
                a[mi * m + n] = (1.3 * mi as f64 + 0.7).sin() * (2.1 * n as f64 - 0.4).cos();
            }
        }
        let ahat = dct2_2d(&a, m).unwrap();
        let nodes = gauss_nodes(m);
        let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for mi in 0..m {
            for n in 0..m {
                let mut acc = 0.0;
                for k in 0..m {
                    for l in 0..m {
                        acc += ahat[k * m + l] * cheb_t(k, nodes[mi]) * cheb_t(l, nodes[n]);
                    }
                }
                assert!(
                    (acc - a[mi * m + n]).abs() <= 1e-14 * scale,
                    "({mi},{n}): {acc} vs {}",
                    a[mi * m + n]
                );
            }
        }
    }

    #[test]
    fn dct_rejects_wrong_size() {
        assert!(dct2_2d(&[1.0; 10], 18).is_err());
        assert!(Dct2::new(0).is_err());
    }

    #[test]
    fn gauss_nodes_are_symmetric_bitwise() {
        for m in [17usize, 18] {
            let x = gauss_nodes(m);
            for j in 0..m / 2 {
                assert_eq!(x[j].to_bits(), (-x[m - 1 - j]).to_bits());
            }
            if m % 2 == 1 {
                assert_eq!(x[m / 2].to_bits(), 0.0f64.to_bits());
            }
            for j in 1..m {
                assert!(x[j] < x[j - 1]);
            }
        }
    }

    #[test]
    fn b_rows_match_closed_forms() {
        let b0 = build_b(0, 18).unwrap();
        let rows0: [&[f64]; 4] = [
            &[1.0],
            &[-0.5, 0.5],
            &[-0.25, -1.0, 0.25],
            &[0.25, 0.375, -0.75, 0.125],
        ];
        for (k, want) in rows0.iter().enumerate() {
            for (j, w) in want.iter().enumerate() {
                assert_eq!(b0.at(k, j), *w, "B(0)[{k}][{j}]");
            }
            for j in want.len()..18 {
                assert_eq!(b0.at(k, j), 0.0);
            }
        }
        let b1 = build_b(1, 18).unwrap();
        let row3: [f64; 4] = [-0.25, 0.375, 0.75, 0.125];
        for (j, w) in row3.iter().enumerate() {
            assert_eq!(b1.at(3, j), *w, "B(1)[3][{j}]");
        }
    }

    #[test]
    fn b_halves_differ_only_in_odd_diagonal_signs() {
        let m = 18;
        let b0 = build_b(0, m).unwrap();
        let b1 = build_b(1, m).unwrap();
        for k in 0..m {
            for j in 0..m {
                if j > k {
                    assert_eq!(b0.at(k, j), 0.0);
                    assert_eq!(b1.at(k, j), 0.0);
                } else {
                    let sign = if (k - j) % 2 == 1 { -1.0 } else { 1.0 };
                    // Exact dyadic entries: plain equality is the right test.
                    assert_eq!(b1.at(k, j), sign * b0.at(k, j));
                }
            }
        }
    }

    #[test]
    fn b_reexpands_chebyshev_on_half_interval() {
        let b0 = build_b(0, 18).unwrap();
        let y = 0.3;
        let mut acc = 0.0;
        for j in 0..=7 {
            acc += b0.at(7, j) * cheb_t(j, y);
        }
        let want = cheb_t(7, (y - 1.0) / 2.0);
        assert!((acc - want).abs() <= 1e-15, "{acc} vs {want}");
    }

    #[test]
    fn b_entries_are_dyadic() {
        for l in 0..2 {
            let exact = build_b_rational(l, 18);
            for row in &exact {
                for val in row {
                    let den = val.denom().abs().to_biguint().unwrap();
                    assert_eq!(den.count_ones(), 1, "denominator {den} not a power of two");
                }
            }
        }
    }

    #[test]
    fn w_and_w_inv_are_exact_inverses() {
        let m = 18;
        let w = build_w(m);
        let w_inv = build_w_inv(m);
        let prod = mat_mul(&w_inv, &w);
        for i in 0..m {
            for j in 0..m {
                let want = if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                };
                assert_eq!(prod[i][j], want, "(W⁻¹W)[{i}][{j}]");
            }
        }
    }

    #[test]
    fn b_rejects_out_of_range_sizes() {
        assert_eq!(build_b(0, 65), Err(ChebError::Overflow(65)));
        assert_eq!(build_b(0, 0), Err(ChebError::ZeroSize));
        assert_eq!(build_b(2, 18), Err(ChebError::BadParity(2)));
    }

    #[test]
    fn vandermonde_matches_grid() {
        let v = vandermonde(0, 32, 18).unwrap();
        for k in 0..18 {
            let want = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(v.row(0)[k], want, "T_{k}(−1)");
        }
        let v1 = vandermonde(1, 32, 18).unwrap();
        let x = -1.0 + 63.0 / 32.0;
        assert_eq!(x, 0.96875);
        assert_eq!(v1.row(31)[1], 0.96875);
        for set in [&v, &v1] {
            for r in 0..set.h {
                assert_eq!(set.row(r)[0], 1.0);
                for k in 0..set.m {
                    assert!(set.row(r)[k].abs() <= 1.0 + 1e-12);
                }
            }
        }
        assert!(vandermonde(2, 32, 18).is_err());
        assert!(vandermonde(0, 0, 18).is_err());
    }
}
