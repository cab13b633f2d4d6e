//! Block decomposition of the connection-matrix triangle.
//!
//! The upper triangle of the N by N connection matrix splits into a
//! staircase band near the diagonal, handled densely, and a hierarchy of
//! low-rank square submatrices away from it. Level γ holds
//! b_γ = 2^(γ+1) − 1 blocks, with half-size h_γ = s·2^(L−γ−1) halving at
//! each finer level. Block b at level γ occupies the 4h_γ by 4h_γ region
//! with top-left corner at row 2h_γ·2b and column 2h_γ·(2b+2); within it
//! live three 2h_γ by 2h_γ submatrices indexed by
//! (p, q) ∈ {(0,0), (0,1), (1,1)}, the upper-triangular three quadrants
//! of its 2 by 2 split (the lower-left quadrant falls to the staircase
//! and to finer levels).
//!
//! Geometry is fixed entirely by the padded length N = s·2^(L+2) and the
//! block parameter s, both derived from the input length and a requested
//! size hint. Everything here is exact integer arithmetic.

use std::fmt;

/// Errors from decomposition construction.
#[derive(Debug, Clone, PartialEq)]
pub enum HierarchyError {
    /// The input length must be at least 1.
    EmptyInput,
    /// The size hint must be an even integer of at least 2.
    BadSizeHint(usize),
    /// Inputs this small leave no room for hierarchical levels.
    TooSmall { input_len: usize, s_hat: usize },
}

impl fmt::Display for HierarchyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HierarchyError::EmptyInput => write!(f, "input length must be positive"),
            HierarchyError::BadSizeHint(s) => {
                write!(f, "block size hint must be even and >= 2, got {s}")
            }
            HierarchyError::TooSmall { input_len, s_hat } => write!(
                f,
                "input of length {input_len} with block size hint {s_hat} \
                 admits no hierarchical levels; use the direct method"
            ),
        }
    }
}

impl std::error::Error for HierarchyError {}

/// Geometry of one block: a 4h by 4h region holding three 2h by 2h
/// submatrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    /// Level index, 0 is coarsest.
    pub level: usize,
    /// Position within the level, 0 ≤ index < 2^(level+1) − 1.
    pub index: usize,
    /// Top row of the block (corner of its (0,0) submatrix).
    pub row: usize,
    /// Leftmost column of the block.
    pub col: usize,
    /// Submatrix half-size h at this level.
    pub half: usize,
}

/// Complete integer geometry of a transform of padded length N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// Original (unpadded) input length.
    pub input_len: usize,
    /// Padded length, s·2^(L+2).
    pub n: usize,
    /// Block parameter; may be odd.
    pub s: usize,
    /// Number of hierarchical levels, ≥ 1.
    pub levels: usize,
}

impl Decomposition {
    /// Submatrix half-size h_γ = s·2^(L−γ−1).
    pub fn half(&self, level: usize) -> usize {
        debug_assert!(level < self.levels);
        self.s << (self.levels - level - 1)
    }

    /// Number of blocks b_γ = 2^(γ+1) − 1 at a level.
    pub fn blocks_at(&self, level: usize) -> usize {
        debug_assert!(level < self.levels);
        (1usize << (level + 1)) - 1
    }

    /// Total block count across all levels, N/(2s) − L − 2.
    pub fn total_blocks(&self) -> usize {
        self.n / (2 * self.s) - self.levels - 2
    }

    /// Total submatrix count, three per block.
    pub fn total_submatrices(&self) -> usize {
        3 * self.total_blocks()
    }

    /// Top-left corner (row, col) of submatrix (p, q) of block b at a
    /// level: rows 2h(2b+p)… and columns 2h(2b+q+2)… .
    pub fn submatrix_corner(&self, level: usize, block: usize, p: usize, q: usize) -> (usize, usize) {
        debug_assert!(p <= 1 && q <= 1 && p <= q);
        let h = self.half(level);
        (2 * h * (2 * block + p), 2 * h * (2 * block + q + 2))
    }

    /// Flat index of submatrix (p, q) within a block: (0,0) → 0,
    /// (0,1) → 1, (1,1) → 2, via p + q(q+1)/2.
    pub fn submatrix_slot(p: usize, q: usize) -> usize {
        debug_assert!(p <= 1 && q <= 1 && p <= q);
        p + q * (q + 1) / 2
    }

    /// Iterate over all blocks, coarse levels first.
    pub fn blocks(&self) -> impl Iterator<Item = Block> + '_ {
        (0..self.levels).flat_map(move |level| {
            let h = self.half(level);
            (0..self.blocks_at(level)).map(move |index| Block {
                level,
                index,
                row: 2 * h * 2 * index,
                col: 2 * h * (2 * index + 2),
                half: h,
            })
        })
    }

    /// One past the last column of the dense staircase region in row i.
    ///
    /// Entries at or beyond this column are covered by some hierarchical
    /// block; entries before it (and at or above the diagonal) belong to
    /// the dense band.
    pub fn direct_region_end(&self, i: usize) -> usize {
        let s4 = 4 * self.s;
        let base = s4 * (i / s4 + 1);
        let step = 2 * self.s * ((i % s4) / (2 * self.s));
        (base + step).min(self.n)
    }
}

/// Derive the decomposition for an input length and an even block size
/// hint ŝ ≥ 2. The realized s lands in [ŝ/2, ŝ] and the padded length
/// is the smallest s·2^(L+2) ≥ input_len with L ≥ 1 levels.
///
/// # Examples
///
/// ```
/// use fastconnect::build_decomposition;
/// let d = build_decomposition(1000, 32).unwrap();
/// assert_eq!((d.levels, d.s, d.n), (3, 32, 1024));
/// assert_eq!(d.total_blocks(), 11);
/// ```
pub fn build_decomposition(input_len: usize, s_hat: usize) -> Result<Decomposition, HierarchyError> {
    if input_len == 0 {
        return Err(HierarchyError::EmptyInput);
    }
    if s_hat < 2 || s_hat % 2 != 0 {
        return Err(HierarchyError::BadSizeHint(s_hat));
    }
    // Smallest t with s_hat·2^t ≥ input_len; levels = t − 2. An input of
    // exactly 4·s_hat yields t = 2, i.e. zero levels, which is rejected:
    // the hierarchy needs at least one level to exist.
    let mut t = 0usize;
    while (s_hat << t) < input_len {
        t += 1;
    }
    if t < 3 {
        return Err(HierarchyError::TooSmall { input_len, s_hat });
    }
    let levels = t - 2;
    // s = ceil(input_len / 2^(L+2)) ∈ [s_hat/2, s_hat]; may be odd.
    let denom = 1usize << (levels + 2);
    let s = input_len.div_ceil(denom);
    let n = s << (levels + 2);
    debug_assert!(s >= s_hat / 2 && s <= s_hat);
    debug_assert!(n >= input_len);
    Ok(Decomposition {
        input_len,
        n,
        s,
        levels,
    })
}
