//! Plan construction: everything a transform needs, computed once.
//!
//! A plan owns the integer decomposition, the Λ vector for the padded
//! length, one M×M Chebyshev coefficient matrix Â per submatrix (the
//! sampled kernel pushed through a 2-D DCT), the two half-interval
//! basis-change matrices, and the finest-level Vandermonde pair. Cost is
//! linear in N: the hierarchy has ~N/(2s) blocks and each costs O(M²)
//! kernel evaluations plus an O(M³)-bounded fixed-size DCT.
//!
//! Plans are immutable and freely shareable between concurrent
//! executions; building one twice with the same arguments yields
//! bit-identical contents. A plan can be serialized to a versioned
//! little-endian blob and reloaded later (the unpadded input length is
//! not part of the format; a reloaded plan accepts any input up to its
//! padded size, like the original).

use crate::cheb_tools::{build_b, vandermonde, ChebError, Dct2, TriangularMap, VandermondeSet};
use crate::gamma_ratio::{lambda_vector, GammaError};
use crate::hierarchy::{build_decomposition, Decomposition, HierarchyError};
use crate::kernels::{sample_submatrix, KernelError, LevelCache};
use crate::Direction;
use std::fmt;

/// Errors from plan construction and deserialization.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanError {
    Hierarchy(HierarchyError),
    Cheb(ChebError),
    Gamma(GammaError),
    Kernel(KernelError),
    /// The expansion order must cover the explicit basis-change rows.
    OrderTooSmall(usize),
    /// Malformed serialized plan.
    Format(String),
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::Hierarchy(e) => write!(f, "{e}"),
            PlanError::Cheb(e) => write!(f, "{e}"),
            PlanError::Gamma(e) => write!(f, "{e}"),
            PlanError::Kernel(e) => write!(f, "{e}"),
            PlanError::OrderTooSmall(m) => write!(f, "expansion order must be at least 4, got {m}"),
            PlanError::Format(msg) => write!(f, "malformed plan data: {msg}"),
        }
    }
}

impl std::error::Error for PlanError {}

impl From<HierarchyError> for PlanError {
    fn from(e: HierarchyError) -> Self {
        PlanError::Hierarchy(e)
    }
}

impl From<ChebError> for PlanError {
    fn from(e: ChebError) -> Self {
        PlanError::Cheb(e)
    }
}

impl From<GammaError> for PlanError {
    fn from(e: GammaError) -> Self {
        PlanError::Gamma(e)
    }
}

impl From<KernelError> for PlanError {
    fn from(e: KernelError) -> Self {
        PlanError::Kernel(e)
    }
}

/// Cost counters recorded while building a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanStats {
    /// Fresh Λ evaluations: the λ vector, the per-level Λ⁻ caches, and
    /// one symmetric Λ⁺ fill per submatrix.
    pub lambda_evaluations: u64,
}

/// Immutable transform plan; see the module docs for the contents.
#[derive(Debug, Clone)]
pub struct Plan {
    pub direction: Direction,
    pub decomposition: Decomposition,
    /// λ_k = Λ(k) for k = 0..N.
    pub lambda: Vec<f64>,
    /// Expansion order M.
    pub m: usize,
    pub b0: TriangularMap,
    pub b1: TriangularMap,
    pub stats: PlanStats,
    /// All Â matrices, level-major, block-major, r-minor; N_c·M² reals.
    a_arena: Vec<f64>,
    /// Finest-level Vandermonde pair, indexed by parity σ.
    t: [VandermondeSet; 2],
}

impl Plan {
    /// Arena slot of submatrix (level, block, r); levels store
    /// 3(2^(γ+1)−1) matrices each, so the level base is closed-form.
    fn arena_slot(&self, level: usize, block: usize, r: usize) -> usize {
        debug_assert!(level < self.decomposition.levels);
        debug_assert!(block < self.decomposition.blocks_at(level));
        debug_assert!(r < 3);
        let level_base = 3 * ((1usize << (level + 1)) - 2 - level);
        level_base + 3 * block + r
    }

    /// The M×M coefficient matrix Â of one submatrix, row-major.
    pub fn a_hat(&self, level: usize, block: usize, r: usize) -> &[f64] {
        let mm = self.m * self.m;
        let slot = self.arena_slot(level, block, r);
        &self.a_arena[slot * mm..(slot + 1) * mm]
    }

    /// Finest-level Vandermonde for parity σ ∈ {0, 1}; s rows, M columns.
    pub fn t_sigma(&self, sigma: usize) -> &VandermondeSet {
        &self.t[sigma]
    }

    /// Doubles held by this plan (λ, Â arena, B pair, T pair).
    pub fn memory_doubles(&self) -> usize {
        self.lambda.len()
            + self.a_arena.len()
            + self.b0.entries.len()
            + self.b1.entries.len()
            + self.t[0].entries.len()
            + self.t[1].entries.len()
    }

    /// Serialize to the versioned little-endian blob format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let d = &self.decomposition;
        let mut out = Vec::with_capacity(
            8 + 5 * 4
                + 8 * (self.lambda.len()
                    + self.a_arena.len()
                    + 2 * self.m * self.m
                    + 2 * d.s * self.m),
        );
        out.extend_from_slice(b"FLCPLAN1");
        for v in [
            d.n as u32,
            d.s as u32,
            d.levels as u32,
            self.m as u32,
            self.direction.code(),
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for part in [
            &self.lambda,
            &self.a_arena,
            &self.b0.entries,
            &self.b1.entries,
            &self.t[0].entries,
            &self.t[1].entries,
        ] {
            for x in part.iter() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    /// Reload a serialized plan. The reloaded plan reports its padded
    /// size as the input length (the blob does not record the original).
    pub fn from_bytes(data: &[u8]) -> Result<Plan, PlanError> {
        fn take<'a>(data: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8], PlanError> {
            if data.len() < n {
                return Err(PlanError::Format(format!("truncated while reading {what}")));
            }
            let (head, tail) = data.split_at(n);
            *data = tail;
            Ok(head)
        }
        fn take_u32(data: &mut &[u8], what: &str) -> Result<u32, PlanError> {
            let b = take(data, 4, what)?;
            Ok(u32::from_le_bytes(b.try_into().unwrap()))
        }
        fn take_f64s(data: &mut &[u8], n: usize, what: &str) -> Result<Vec<f64>, PlanError> {
            let b = take(data, 8 * n, what)?;
            Ok(b.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        }

        let mut rest = data;
        if take(&mut rest, 8, "magic")? != b"FLCPLAN1" {
            return Err(PlanError::Format("bad magic".to_string()));
        }
        let n = take_u32(&mut rest, "N")? as usize;
        let s = take_u32(&mut rest, "s")? as usize;
        let levels = take_u32(&mut rest, "L")? as usize;
        let m = take_u32(&mut rest, "M")? as usize;
        let dir_code = take_u32(&mut rest, "direction")?;
        let direction = Direction::from_code(dir_code)
            .ok_or_else(|| PlanError::Format(format!("unknown direction code {dir_code}")))?;
        if m < 4 || m > 64 {
            return Err(PlanError::Format(format!("expansion order {m} out of range")));
        }
        if levels == 0 || levels > 40 || s == 0 || n != s << (levels + 2) {
            return Err(PlanError::Format(format!(
                "inconsistent geometry: N = {n}, s = {s}, L = {levels}"
            )));
        }
        let d = Decomposition {
            input_len: n,
            n,
            s,
            levels,
        };
        let n_c = d.total_submatrices();
        let lambda = take_f64s(&mut rest, n, "lambda")?;
        let a_arena = take_f64s(&mut rest, n_c * m * m, "coefficient arena")?;
        let b0e = take_f64s(&mut rest, m * m, "B(0)")?;
        let b1e = take_f64s(&mut rest, m * m, "B(1)")?;
        let t0e = take_f64s(&mut rest, s * m, "T(0)")?;
        let t1e = take_f64s(&mut rest, s * m, "T(1)")?;
        if !rest.is_empty() {
            return Err(PlanError::Format(format!(
                "{} trailing bytes after plan payload",
                rest.len()
            )));
        }
        Ok(Plan {
            direction,
            decomposition: d,
            lambda,
            m,
            b0: TriangularMap { l: 0, m, entries: b0e },
            b1: TriangularMap { l: 1, m, entries: b1e },
            stats: PlanStats {
                lambda_evaluations: 0,
            },
            a_arena,
            t: [
                VandermondeSet { sigma: 0, h: s, m, entries: t0e },
                VandermondeSet { sigma: 1, h: s, m, entries: t1e },
            ],
        })
    }
}

/// Build the plan for a transform of the given input length.
///
/// `s_hat` is the even block-size hint (the realized s lands in
/// [ŝ/2, ŝ]) and `m` the Chebyshev expansion order per submatrix; the
/// defaults used throughout are ŝ = 32 and M = 18, which carry full
/// double precision. Planning is deterministic: equal arguments give
/// bit-identical plans.
pub fn build_plan(
    input_len: usize,
    direction: Direction,
    s_hat: usize,
    m: usize,
) -> Result<Plan, PlanError> {
    if m < 4 {
        return Err(PlanError::OrderTooSmall(m));
    }
    let b0 = build_b(0, m)?;
    let b1 = build_b(1, m)?;
    let d = build_decomposition(input_len, s_hat)?;
    let lambda = lambda_vector(d.n)?;
    let mut lambda_evaluations = d.n as u64;
    let dct = Dct2::new(m)?;
    let mm = m * m;
    let mut a_arena = vec![0.0; d.total_submatrices() * mm];
    let mut slot = 0;
    for level in 0..d.levels {
        let cache = LevelCache::new(&d, level, m)?;
        lambda_evaluations += cache.lambda_evals;
        for block in 0..d.blocks_at(level) {
            for r in 0..3 {
                let sample = sample_submatrix(&d, &cache, level, block, r, direction)?;
                lambda_evaluations += sample.lambda_evals;
                let ahat = dct.transform(&sample.grid)?;
                a_arena[slot * mm..(slot + 1) * mm].copy_from_slice(&ahat);
                slot += 1;
            }
        }
    }
    let t = [vandermonde(0, d.s, m)?, vandermonde(1, d.s, m)?];
    Ok(Plan {
        direction,
        decomposition: d,
        lambda,
        m,
        b0,
        b1,
        stats: PlanStats { lambda_evaluations },
        a_arena,
        t,
    })
}

/// Execution cost model variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlopVariant {
    /// Chebyshev-coefficient pipeline: (μs + 4M + 8M²/s)·N.
    Modal,
    /// Nodal (Lagrange) pipeline: (μs + 4M + 14M²/s)·N.
    Nodal,
}

/// Leading-order flop estimate for executing a transform of this
/// decomposition; counts only the most deeply nested multiply-adds.
pub fn flop_estimate(d: &Decomposition, m: usize, mu: f64, variant: FlopVariant) -> f64 {
    let s = d.s as f64;
    let mf = m as f64;
    let per_m2 = match variant {
        FlopVariant::Modal => 8.0,
        FlopVariant::Nodal => 14.0,
    };
    (mu * s + 4.0 * mf + per_m2 * mf * mf / s) * d.n as f64
}

/// Integer block size minimizing the modal per-coefficient cost
/// μs + 4M + 8M²/s.
pub fn optimal_s(m: usize, mu: f64) -> usize {
    let cost = |s: usize| mu * s as f64 + 4.0 * m as f64 + 8.0 * (m * m) as f64 / s as f64;
    let mut best = 1;
    for s in 2..=4096 {
        if cost(s) < cost(best) {
            best = s;
        }
    }
    best
}
