//! The continuous connection kernels and their sampling on block grids.
//!
//! Away from the diagonal the connection matrices agree with smooth
//! two-variable kernels: 𝒜(x, y) = Λ((y−x)/2)·Λ((y+x)/2) in the
//! Legendre-to-Chebyshev direction, and
//! ℒ(x, y) = 2(x+1/2)y / ((x+y)(x+y+1)(x−y+1)) · Λ((y−x)/2)/Λ((x+y)/2)
//! in the reverse direction. Each hierarchical submatrix is the kernel
//! sampled on a tensor Chebyshev–Gauss grid, ready for a 2-D DCT.
//!
//! Sampling exploits two structural facts. The factor Λ((y−x)/2) only
//! depends on the column offset of the submatrix, which takes exactly
//! two values per level (4h and 6h), so it is evaluated once per level
//! per offset class; it is also persymmetric on the grid, so only the
//! upper anti-triangle is evaluated and the rest mirrored bitwise. The
//! factor Λ((x+y)/2) is symmetric, so its lower triangle is mirrored
//! too. Together this cuts Λ evaluations per submatrix to (M²+M)/2.

use crate::cheb_tools::gauss_nodes;
use crate::gamma_ratio::{lambda_approx, lambda_scalar, terms_needed};
use crate::hierarchy::Decomposition;
use crate::Direction;
use std::fmt;

/// Errors from kernel evaluation and sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    /// Kernels are defined for 0 ≤ x ≤ y.
    Domain { x: f64, y: f64 },
    /// Submatrix coordinates outside the decomposition.
    BadIndex { level: usize, block: usize, r: usize },
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::Domain { x, y } => {
                write!(f, "kernel arguments require 0 <= x <= y, got ({x}, {y})")
            }
            KernelError::BadIndex { level, block, r } => {
                write!(f, "no submatrix (level {level}, block {block}, r {r})")
            }
        }
    }
}

impl std::error::Error for KernelError {}

/// Legendre-to-Chebyshev kernel 𝒜(x, y) = Λ((y−x)/2)·Λ((y+x)/2).
///
/// At integer arguments with even y−x this reproduces the nonzero
/// connection-matrix entries.
pub fn kernel_a(x: f64, y: f64) -> Result<f64, KernelError> {
    if !(x >= 0.0 && y >= x) {
        return Err(KernelError::Domain { x, y });
    }
    let minus = lambda_scalar((y - x) / 2.0).expect("nonnegative by domain check");
    let plus = lambda_scalar((y + x) / 2.0).expect("nonnegative by domain check");
    Ok(minus * plus)
}

/// Chebyshev-to-Legendre kernel ℒ(x, y); the removable point (0, 0)
/// returns its diagonal limit 1/2.
///
/// The continuous kernel has a pole along y = x+1; that line stays
/// strictly between the integer diagonals where matrix entries live and
/// outside every sampled block grid.
pub fn kernel_l(x: f64, y: f64) -> Result<f64, KernelError> {
    if !(x >= 0.0 && y >= x) {
        return Err(KernelError::Domain { x, y });
    }
    if x == 0.0 && y == 0.0 {
        return Ok(0.5);
    }
    let pref = 2.0 * (x + 0.5) * y / ((x + y) * (x + y + 1.0) * (x - y + 1.0));
    let minus = lambda_scalar((y - x) / 2.0).expect("nonnegative by domain check");
    let plus = lambda_scalar((y + x) / 2.0).expect("nonnegative by domain check");
    Ok(pref * (minus / plus))
}

/// Per-level cache of the persymmetric Λ⁻ factors.
///
/// A level's submatrices sit at column offsets 4h (r ∈ {0, 2}) or 6h
/// (r = 1), so two M×M grids of Λ((y−x)/2) values cover every submatrix
/// of the level.
#[derive(Debug, Clone)]
pub struct LevelCache {
    pub level: usize,
    pub h: usize,
    pub m: usize,
    /// τ term count valid for every argument appearing on this level.
    pub terms: usize,
    /// Fresh Λ evaluations spent building the cache: M²+M.
    pub lambda_evals: u64,
    minus_near: Vec<f64>,
    minus_far: Vec<f64>,
    nodes: Vec<f64>,
}

/// Fill one persymmetric Λ⁻ grid: entry (m, n) holds
/// Λ((Δ + h(X_n − X_m))/2). Only m+n ≤ M−1 is evaluated; the mirror
/// (m, n) → (M−1−n, M−1−m) is exact because the node set is symmetric.
fn fill_minus(
    delta: f64,
    h: f64,
    nodes: &[f64],
    terms: usize,
    evals: &mut u64,
) -> Vec<f64> {
    let m = nodes.len();
    let mut g = vec![0.0; m * m];
    for mi in 0..m {
        for n in 0..m - mi {
            let arg = (delta + h * (nodes[n] - nodes[mi])) * 0.5;
            g[mi * m + n] = lambda_approx(arg, terms);
            *evals += 1;
        }
        for n in m - mi..m {
            g[mi * m + n] = g[(m - 1 - n) * m + (m - 1 - mi)];
        }
    }
    g
}

impl LevelCache {
    pub fn new(d: &Decomposition, level: usize, m: usize) -> Result<Self, KernelError> {
        if level >= d.levels || m == 0 {
            return Err(KernelError::BadIndex { level, block: 0, r: 0 });
        }
        let h = d.half(level);
        let nodes = gauss_nodes(m);
        // Smallest Λ argument on the level: offset 4h, closest corner.
        let min_arg = h as f64 * (2.0 - nodes[0]);
        let terms = terms_needed(min_arg).expect("level arguments are positive");
        let mut lambda_evals = 0;
        let hf = h as f64;
        let minus_near = fill_minus(4.0 * hf, hf, &nodes, terms, &mut lambda_evals);
        let minus_far = fill_minus(6.0 * hf, hf, &nodes, terms, &mut lambda_evals);
        Ok(LevelCache {
            level,
            h,
            m,
            terms,
            lambda_evals,
            minus_near,
            minus_far,
            nodes,
        })
    }

    /// The shared Λ⁻ grid for a submatrix slot r ∈ {0, 1, 2}.
    pub fn minus(&self, r: usize) -> &[f64] {
        if r == 1 {
            &self.minus_far
        } else {
            &self.minus_near
        }
    }
}

/// One sampled submatrix: the kernel on the tensor Gauss grid.
#[derive(Debug, Clone)]
pub struct SubmatrixSample {
    pub level: usize,
    pub block: usize,
    pub r: usize,
    pub m: usize,
    /// grid[m·M + n] = kernel(x_m, y_n), row-major M×M.
    pub grid: Vec<f64>,
    /// Fresh Λ evaluations spent here (the symmetric Λ⁺ fill): (M²+M)/2.
    pub lambda_evals: u64,
}

/// Sample submatrix r of a block on the tensor Chebyshev–Gauss grid
/// x_m = i + h(X_m+1), y_n = j + h(X_n+1) anchored at the submatrix
/// corner (i, j). Λ⁻ comes from the level cache; only the symmetric Λ⁺
/// factor is evaluated fresh, upper triangle only.
pub fn sample_submatrix(
    d: &Decomposition,
    cache: &LevelCache,
    level: usize,
    block: usize,
    r: usize,
    direction: Direction,
) -> Result<SubmatrixSample, KernelError> {
    if level != cache.level || level >= d.levels || block >= d.blocks_at(level) || r > 2 {
        return Err(KernelError::BadIndex { level, block, r });
    }
    let (p, q) = match r {
        0 => (0, 0),
        1 => (0, 1),
        _ => (1, 1),
    };
    let (i, j) = d.submatrix_corner(level, block, p, q);
    let m = cache.m;
    let nodes = &cache.nodes;
    let h = cache.h as f64;

    // Λ⁺[m][n] = Λ((x_m+y_n)/2); symmetric because the x and y grids
    // coincide up to the corner shift.
    let base = (i + j) as f64 + 2.0 * h;
    let mut plus = vec![0.0; m * m];
    let mut lambda_evals = 0;
    for mi in 0..m {
        for n in mi..m {
            let arg = (base + h * (nodes[mi] + nodes[n])) * 0.5;
            let v = lambda_approx(arg, cache.terms);
            plus[mi * m + n] = v;
            plus[n * m + mi] = v;
            lambda_evals += 1;
        }
    }

    let minus = cache.minus(r);
    let mut grid = vec![0.0; m * m];
    match direction {
        Direction::LegendreToChebyshev => {
            for t in 0..m * m {
                grid[t] = minus[t] * plus[t];
            }
        }
        Direction::ChebyshevToLegendre => {
            for mi in 0..m {
                let x = i as f64 + h * (nodes[mi] + 1.0);
                for n in 0..m {
                    let y = j as f64 + h * (nodes[n] + 1.0);
                    let pref = 2.0 * (x + 0.5) * y / ((x + y) * (x + y + 1.0) * (x - y + 1.0));
                    grid[mi * m + n] = pref * minus[mi * m + n] / plus[mi * m + n];
                }
            }
        }
    }
    Ok(SubmatrixSample {
        level,
        block,
        r,
        m,
        grid,
        lambda_evals,
    })
}
