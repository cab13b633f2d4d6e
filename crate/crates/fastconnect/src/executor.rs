//! Transform execution against a prebuilt plan.
//!
//! The input is zero-padded to the plan size N, split by parity (the
//! connection matrices couple only indices of equal parity), and pushed
//! through five hierarchical steps per parity pass: finest-level moments
//! through the parity Vandermonde, upward combination of sibling moments
//! through the half-interval basis changes, one M×M coefficient multiply
//! per submatrix, downward scattering through the transposed basis
//! changes, and finest-level evaluation. A banded staircase region along
//! the diagonal is then applied directly, and the Chebyshev-side scaling
//! is folded in last. Total work is linear in N times a factor set by
//! the block size and expansion order.
//!
//! Both directions share the pipeline; the inverse direction pre-scales
//! the first input entry by two and skips the final scaling. Outputs are
//! truncated to the caller's input length.
//!
//! Work buffers live in a WorkSet owned by the caller (or allocated per
//! call by the convenience wrappers), never in the shared plan, so one
//! plan can serve concurrent executions. The threaded entry point
//! partitions writes so every output element sees the same accumulation
//! order as the serial path, making the two bitwise identical.

use crate::cheb_tools::{vandermonde, TriangularMap, VandermondeSet};
use crate::hierarchy::Decomposition;
use crate::planner::Plan;
use crate::Direction;
use rayon::prelude::*;
use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;

/// Errors from transform execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecError {
    /// Input longer than the plan's padded size.
    InputTooLong { len: usize, capacity: usize },
    /// Λ table shorter than the requested transform length.
    LambdaTooShort { need: usize, got: usize },
    /// WorkSet built for a different geometry.
    WorkSetMismatch,
    /// Thread count must be at least one.
    ZeroThreads,
    /// The thread pool could not be created.
    Pool(String),
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecError::InputTooLong { len, capacity } => {
                write!(f, "input length {len} exceeds plan capacity {capacity}")
            }
            ExecError::LambdaTooShort { need, got } => {
                write!(f, "lambda table holds {got} values, need {need}")
            }
            ExecError::WorkSetMismatch => {
                write!(f, "work set does not match the plan geometry")
            }
            ExecError::ZeroThreads => write!(f, "thread count must be at least one"),
            ExecError::Pool(msg) => write!(f, "thread pool creation failed: {msg}"),
        }
    }
}

impl std::error::Error for ExecError {}

/// Reusable per-execution scratch: one moment array w and one local
/// coefficient array c per level, each holding b_γ blocks times two
/// slots of M values. Cleared at the start of every parity pass. The
/// padded input and output buffers are transient to each call and are
/// not part of the set.
#[derive(Debug, Clone)]
pub struct WorkSet {
    n: usize,
    m: usize,
    w: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
}

impl WorkSet {
    pub fn new(plan: &Plan) -> WorkSet {
        let d = &plan.decomposition;
        let m = plan.m;
        let w: Vec<Vec<f64>> = (0..d.levels)
            .map(|g| vec![0.0; d.blocks_at(g) * 2 * m])
            .collect();
        let c = w.clone();
        WorkSet {
            n: d.n,
            m,
            w,
            c,
        }
    }

    fn matches(&self, plan: &Plan) -> bool {
        self.n == plan.decomposition.n
            && self.m == plan.m
            && self.w.len() == plan.decomposition.levels
    }

    fn reset(&mut self) {
        for level in self.w.iter_mut().chain(self.c.iter_mut()) {
            level.fill(0.0);
        }
    }

    /// Doubles held by the scratch arrays.
    pub fn memory_doubles(&self) -> usize {
        self.w.iter().map(Vec::len).sum::<usize>() + self.c.iter().map(Vec::len).sum::<usize>()
    }
}

/// Diagonal-band prefactor of the inverse connection entries at integer
/// row i and half-offset k; the main diagonal collapses to one half.
fn pref_direct(i: usize, k: usize) -> f64 {
    if k == 0 {
        return 0.5;
    }
    let x = i as f64;
    let y = (i + 2 * k) as f64;
    2.0 * (x + 0.5) * y / ((x + y) * (x + y + 1.0) * (x - y + 1.0))
}

/// Adds B(0)·child0 + B(1)·child1 to the parent moment vector using the
/// shared upper-triangular factor: the two products collapse onto sums
/// and differences of the children because the second matrix is the
/// first with alternating diagonal signs.
pub fn combine_children(
    parent: &mut [f64],
    child0: &[f64],
    child1: &[f64],
    b0: &TriangularMap,
) {
    let m = parent.len();
    debug_assert_eq!(child0.len(), m);
    debug_assert_eq!(child1.len(), m);
    let mut z0 = vec![0.0; m];
    let mut z1 = vec![0.0; m];
    for i in 0..m {
        z0[i] = child0[i] + child1[i];
        z1[i] = child0[i] - child1[i];
    }
    for n in 0..m {
        let zz = if n % 2 == 0 { &z0 } else { &z1 };
        for i in 0..m - n {
            parent[i + n] += b0.at(i + n, i) * zz[i];
        }
    }
}

/// Adds Bᵀ(0)·parent to child0 and Bᵀ(1)·parent to child1, splitting
/// each transposed column into even and odd diagonal parts so the
/// sign-flipped second factor costs nothing extra.
pub fn scatter_parents(
    parent: &[f64],
    child0: &mut [f64],
    child1: &mut [f64],
    b0: &TriangularMap,
) {
    let m = parent.len();
    debug_assert_eq!(child0.len(), m);
    debug_assert_eq!(child1.len(), m);
    for j in 0..m {
        let mut even = 0.0;
        let mut odd = 0.0;
        for k in j..m {
            let v = b0.at(k, j) * parent[k];
            if (k - j) % 2 == 0 {
                even += v;
            } else {
                odd += v;
            }
        }
        child0[j] += even + odd;
        child1[j] += even - odd;
    }
}

/// w[k] += Σ_mm f[j0 + 2·mm + σ] · T[mm][k] over the s parity columns
/// of one finest-level submatrix.
fn gather_moments(f: &[f64], j0: usize, sigma: usize, t: &VandermondeSet, w: &mut [f64]) {
    for mm in 0..t.h {
        let fv = f[j0 + 2 * mm + sigma];
        if fv == 0.0 {
            continue;
        }
        let row = t.row(mm);
        for k in 0..w.len() {
            w[k] += fv * row[k];
        }
    }
}

/// c[k] += Σ_l a[k·m + l] · w[l] for one M×M coefficient matrix.
fn apply_coefficients(c: &mut [f64], a: &[f64], w: &[f64]) {
    let m = w.len();
    for (k, ck) in c.iter_mut().enumerate() {
        let row = &a[k * m..(k + 1) * m];
        let mut acc = 0.0;
        for l in 0..m {
            acc += row[l] * w[l];
        }
        *ck += acc;
    }
}

/// z_rows[2·mm + σ] += Σ_k c[k] · T[mm][k] over one finest-level row
/// span of 2s entries.
fn evaluate_slot(z_rows: &mut [f64], sigma: usize, t: &VandermondeSet, c: &[f64]) {
    for mm in 0..t.h {
        let row = t.row(mm);
        let mut acc = 0.0;
        for k in 0..c.len() {
            acc += row[k] * c[k];
        }
        z_rows[2 * mm + sigma] += acc;
    }
}

/// Applies the staircase band directly to rows [i_base, i_base + len):
/// for each row, half-offsets k run over the contiguous prefix with
/// i + 2k inside the row's direct region. Ascending k per element keeps
/// serial and chunked execution bitwise identical.
fn staircase_rows(
    direction: Direction,
    d: &Decomposition,
    lambda: &[f64],
    f: &[f64],
    z_rows: &mut [f64],
    i_base: usize,
) {
    for (local, zi) in z_rows.iter_mut().enumerate() {
        let i = i_base + local;
        let j_end = d.direct_region_end(i);
        let k_end = (j_end - i + 1) / 2;
        match direction {
            Direction::LegendreToChebyshev => {
                for k in 0..k_end {
                    *zi += lambda[k] * lambda[k + i] * f[i + 2 * k];
                }
            }
            Direction::ChebyshevToLegendre => {
                for k in 0..k_end {
                    *zi += pref_direct(i, k) * lambda[k] / lambda[k + i] * f[i + 2 * k];
                }
            }
        }
    }
}

fn scale_l2c(z: &mut [f64]) {
    if let Some((z0, rest)) = z.split_first_mut() {
        // Dividing keeps lambda[0]^2/pi at exactly one, so the first
        // unit vector is a fixed point of the forward map.
        *z0 /= PI;
        for zi in rest {
            *zi *= FRAC_2_PI;
        }
    }
}

fn pad_input(plan: &Plan, f: &[f64]) -> Result<Vec<f64>, ExecError> {
    let n = plan.decomposition.n;
    if f.len() > n {
        return Err(ExecError::InputTooLong {
            len: f.len(),
            capacity: n,
        });
    }
    let mut fpad = vec![0.0; n];
    fpad[..f.len()].copy_from_slice(f);
    if plan.direction == Direction::ChebyshevToLegendre && !fpad.is_empty() {
        fpad[0] *= 2.0;
    }
    Ok(fpad)
}

/// Runs the transform with caller-provided scratch. The input may be
/// any length up to the plan's padded size; the output has the input's
/// length and the input itself is left untouched.
pub fn execute_with(plan: &Plan, ws: &mut WorkSet, f: &[f64]) -> Result<Vec<f64>, ExecError> {
    if !ws.matches(plan) {
        return Err(ExecError::WorkSetMismatch);
    }
    let d = &plan.decomposition;
    let m = plan.m;
    let s = d.s;
    let levels = d.levels;
    let finest = levels - 1;
    let fpad = pad_input(plan, f)?;
    let mut zpad = vec![0.0; d.n];

    for sigma in 0..2 {
        ws.reset();
        let t = plan.t_sigma(sigma);

        let wfin = &mut ws.w[finest];
        for slot in 0..d.blocks_at(finest) * 2 {
            let j0 = 2 * s * (slot + 2);
            gather_moments(&fpad, j0, sigma, t, &mut wfin[slot * m..(slot + 1) * m]);
        }

        for level in (1..levels).rev() {
            let (coarse, fine) = ws.w.split_at_mut(level);
            let parent = &mut coarse[level - 1];
            let child = &fine[0];
            for b in 1..d.blocks_at(level) {
                let slot = b - 1;
                combine_children(
                    &mut parent[slot * m..(slot + 1) * m],
                    &child[(2 * b) * m..(2 * b + 1) * m],
                    &child[(2 * b + 1) * m..(2 * b + 2) * m],
                    &plan.b0,
                );
            }
        }

        for level in 0..levels {
            let wl = &ws.w[level];
            let cl = &mut ws.c[level];
            for b in 0..d.blocks_at(level) {
                for (p, q) in [(0usize, 0usize), (0, 1), (1, 1)] {
                    let r = p + q * (q + 1) / 2;
                    apply_coefficients(
                        &mut cl[(2 * b + p) * m..(2 * b + p + 1) * m],
                        plan.a_hat(level, b, r),
                        &wl[(2 * b + q) * m..(2 * b + q + 1) * m],
                    );
                }
            }
        }

        for level in 0..levels - 1 {
            let (coarse, fine) = ws.c.split_at_mut(level + 1);
            let parent = &coarse[level];
            let child = &mut fine[0];
            for b in 0..d.blocks_at(level + 1) - 1 {
                let (b0, q0) = (b / 2, b % 2);
                let (c0, c1) = child[(2 * b) * m..(2 * b + 2) * m].split_at_mut(m);
                scatter_parents(&parent[(2 * b0 + q0) * m..(2 * b0 + q0 + 1) * m], c0, c1, &plan.b0);
            }
        }

        let cfin = &ws.c[finest];
        for slot in 0..d.blocks_at(finest) * 2 {
            let i0 = 2 * s * slot;
            evaluate_slot(
                &mut zpad[i0..i0 + 2 * s],
                sigma,
                t,
                &cfin[slot * m..(slot + 1) * m],
            );
        }
    }

    staircase_rows(plan.direction, d, &plan.lambda, &fpad, &mut zpad, 0);
    if plan.direction == Direction::LegendreToChebyshev {
        scale_l2c(&mut zpad);
    }
    zpad.truncate(f.len());
    Ok(zpad)
}

/// Runs the transform with freshly allocated scratch.
pub fn execute(plan: &Plan, f: &[f64]) -> Result<Vec<f64>, ExecError> {
    let mut ws = WorkSet::new(plan);
    execute_with(plan, &mut ws, f)
}

/// Runs the transform on a private pool of the given number of threads.
/// Writes are partitioned by output element, so the result is bitwise
/// identical to the serial path for any thread count.
pub fn execute_threaded(plan: &Plan, f: &[f64], threads: usize) -> Result<Vec<f64>, ExecError> {
    if threads == 0 {
        return Err(ExecError::ZeroThreads);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ExecError::Pool(e.to_string()))?;
    pool.install(|| execute_threaded_inner(plan, f))
}

fn execute_threaded_inner(plan: &Plan, f: &[f64]) -> Result<Vec<f64>, ExecError> {
    let d = &plan.decomposition;
    let m = plan.m;
    let s = d.s;
    let levels = d.levels;
    let finest = levels - 1;
    let mut ws = WorkSet::new(plan);
    let fpad = pad_input(plan, f)?;
    let mut zpad = vec![0.0; d.n];

    for sigma in 0..2 {
        ws.reset();
        let t = plan.t_sigma(sigma);

        ws.w[finest]
            .par_chunks_mut(m)
            .enumerate()
            .for_each(|(slot, w)| {
                let j0 = 2 * s * (slot + 2);
                gather_moments(&fpad, j0, sigma, t, w);
            });

        for level in (1..levels).rev() {
            let (coarse, fine) = ws.w.split_at_mut(level);
            let child = &fine[0];
            coarse[level - 1]
                .par_chunks_mut(m)
                .enumerate()
                .for_each(|(slot, parent)| {
                    let b = slot + 1;
                    combine_children(
                        parent,
                        &child[(2 * b) * m..(2 * b + 1) * m],
                        &child[(2 * b + 1) * m..(2 * b + 2) * m],
                        &plan.b0,
                    );
                });
        }

        for level in 0..levels {
            let wl = &ws.w[level];
            ws.c[level]
                .par_chunks_mut(2 * m)
                .enumerate()
                .for_each(|(b, cb)| {
                    let (c0, c1) = cb.split_at_mut(m);
                    apply_coefficients(c0, plan.a_hat(level, b, 0), &wl[(2 * b) * m..(2 * b + 1) * m]);
                    apply_coefficients(
                        c0,
                        plan.a_hat(level, b, 1),
                        &wl[(2 * b + 1) * m..(2 * b + 2) * m],
                    );
                    apply_coefficients(
                        c1,
                        plan.a_hat(level, b, 2),
                        &wl[(2 * b + 1) * m..(2 * b + 2) * m],
                    );
                });
        }

        for level in 0..levels - 1 {
            let (coarse, fine) = ws.c.split_at_mut(level + 1);
            let parent = &coarse[level];
            let last = d.blocks_at(level + 1) - 1;
            fine[0]
                .par_chunks_mut(2 * m)
                .enumerate()
                .for_each(|(b, cb)| {
                    if b < last {
                        let (b0, q0) = (b / 2, b % 2);
                        let (c0, c1) = cb.split_at_mut(m);
                        scatter_parents(
                            &parent[(2 * b0 + q0) * m..(2 * b0 + q0 + 1) * m],
                            c0,
                            c1,
                            &plan.b0,
                        );
                    }
                });
        }

        let cfin = &ws.c[finest];
        let active = d.blocks_at(finest) * 2;
        zpad.par_chunks_mut(2 * s)
            .enumerate()
            .for_each(|(slot, z_rows)| {
                if slot < active {
                    evaluate_slot(z_rows, sigma, t, &cfin[slot * m..(slot + 1) * m]);
                }
            });
    }

    zpad.par_chunks_mut(4 * s)
        .enumerate()
        .for_each(|(chunk, z_rows)| {
            staircase_rows(plan.direction, d, &plan.lambda, &fpad, z_rows, chunk * 4 * s);
        });
    if plan.direction == Direction::LegendreToChebyshev {
        scale_l2c(&mut zpad);
    }
    zpad.truncate(f.len());
    Ok(zpad)
}

/// Reference evaluation of the hierarchical low-rank part: one plain
/// Vandermonde-coefficient-Vandermonde contraction per submatrix, no
/// moment sharing across levels. Same staircase and scaling as the fast
/// path. Quadratic-ish in N; meant for validation only.
pub fn execute_reference_fmm(plan: &Plan, f: &[f64]) -> Result<Vec<f64>, ExecError> {
    let d = &plan.decomposition;
    let m = plan.m;
    let fpad = pad_input(plan, f)?;
    let mut zpad = vec![0.0; d.n];

    for sigma in 0..2 {
        for level in 0..d.levels {
            let h = d.half(level);
            let v = vandermonde(sigma, h, m).expect("plan geometry is valid");
            let mut w = vec![0.0; m];
            let mut c = vec![0.0; m];
            for b in 0..d.blocks_at(level) {
                for (p, q) in [(0usize, 0usize), (0, 1), (1, 1)] {
                    let r = p + q * (q + 1) / 2;
                    let (i0, j0) = d.submatrix_corner(level, b, p, q);
                    w.fill(0.0);
                    gather_moments(&fpad, j0, sigma, &v, &mut w);
                    c.fill(0.0);
                    apply_coefficients(&mut c, plan.a_hat(level, b, r), &w);
                    evaluate_slot(&mut zpad[i0..i0 + 2 * h], sigma, &v, &c);
                }
            }
        }
    }

    staircase_rows(plan.direction, d, &plan.lambda, &fpad, &mut zpad, 0);
    if plan.direction == Direction::LegendreToChebyshev {
        scale_l2c(&mut zpad);
    }
    zpad.truncate(f.len());
    Ok(zpad)
}

/// Dense O(n²) transform, diagonal by diagonal, against a caller-built
/// Λ table of at least the input length. Needs no plan; used as the
/// structural baseline for the fast path.
pub fn direct_transform(
    direction: Direction,
    f: &[f64],
    lambda: &[f64],
) -> Result<Vec<f64>, ExecError> {
    let n = f.len();
    if lambda.len() < n {
        return Err(ExecError::LambdaTooShort {
            need: n,
            got: lambda.len(),
        });
    }
    let mut g;
    let f = if direction == Direction::ChebyshevToLegendre && n > 0 {
        g = f.to_vec();
        g[0] *= 2.0;
        &g[..]
    } else {
        f
    };
    let mut z = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        match direction {
            Direction::LegendreToChebyshev => {
                let lk = lambda[k];
                for i in 0..n - 2 * k {
                    z[i] += lk * lambda[k + i] * f[i + 2 * k];
                }
            }
            Direction::ChebyshevToLegendre => {
                let lk = lambda[k];
                for i in 0..n - 2 * k {
                    z[i] += pref_direct(i, k) * lk / lambda[k + i] * f[i + 2 * k];
                }
            }
        }
    }
    if direction == Direction::LegendreToChebyshev {
        scale_l2c(&mut z);
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma_ratio::lambda_vector;
    use crate::planner::build_plan;

    /// Deterministic decaying pseudo-random vector; no external RNG so
    /// the module stands alone.
    fn test_vec(n: usize, decay: f64) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let h = (i as u64)
                    .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add(0x2545_f491_4f6c_dd1d);
                let u = (h >> 11) as f64 / (1u64 << 53) as f64;
                (u - 0.5) / ((i + 1) as f64).powf(decay)
            })
            .collect()
    }

    fn e_inf(got: &[f64], want: &[f64]) -> f64 {
        let scale = want.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        got.iter()
            .zip(want)
            .fold(0.0_f64, |a, (g, w)| a.max((g - w).abs()))
            / scale
    }

    #[test]
    fn matches_direct_both_directions() {
        let f = test_vec(1000, 0.5);
        for direction in [
            Direction::LegendreToChebyshev,
            Direction::ChebyshevToLegendre,
        ] {
            let plan = build_plan(1000, direction, 32, 18).unwrap();
            let mut fpad = f.clone();
            fpad.resize(plan.decomposition.n, 0.0);
            let want = direct_transform(direction, &fpad, &plan.lambda).unwrap();
            let got = execute(&plan, &f).unwrap();
            assert_eq!(got.len(), 1000);
            let err = e_inf(&got, &want[..1000]);
            assert!(err <= 1e-13, "{direction}: {err:e}");
        }
    }

    #[test]
    fn agrees_with_reference_contraction() {
        let f = test_vec(4096, 0.5);
        for direction in [
            Direction::LegendreToChebyshev,
            Direction::ChebyshevToLegendre,
        ] {
            let plan = build_plan(4096, direction, 32, 18).unwrap();
            let fast = execute(&plan, &f).unwrap();
            let refr = execute_reference_fmm(&plan, &f).unwrap();
            let err = e_inf(&fast, &refr);
            assert!(err <= 1e-14, "{direction}: {err:e}");
        }
    }

    #[test]
    fn low_degree_unit_vectors_are_fixed_points() {
        let plan = build_plan(1000, Direction::LegendreToChebyshev, 32, 18).unwrap();
        for k in [0usize, 1] {
            let mut e = vec![0.0; 1000];
            e[k] = 1.0;
            let z = execute(&plan, &e).unwrap();
            for (i, zi) in z.iter().enumerate() {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((zi - want).abs() <= 1e-15, "e{k} out[{i}] = {zi:e}");
            }
        }
    }

    #[test]
    fn inverse_maps_low_chebyshev_modes_exactly() {
        let plan = build_plan(1000, Direction::ChebyshevToLegendre, 32, 18).unwrap();
        let mut e0 = vec![0.0; 1000];
        e0[0] = 1.0;
        let z0 = execute(&plan, &e0).unwrap();
        for (i, zi) in z0.iter().enumerate() {
            let want = if i == 0 { 1.0 } else { 0.0 };
            assert!((zi - want).abs() <= 1e-15, "e0 out[{i}] = {zi:e}");
        }
        let mut e2 = vec![0.0; 1000];
        e2[2] = 1.0;
        let z2 = execute(&plan, &e2).unwrap();
        assert!((z2[0] + 1.0 / 3.0).abs() <= 1e-15);
        assert!((z2[2] - 4.0 / 3.0).abs() <= 1e-15);
        for (i, zi) in z2.iter().enumerate() {
            if i != 0 && i != 2 {
                assert!(zi.abs() <= 1e-15, "e2 out[{i}] = {zi:e}");
            }
        }
    }

    #[test]
    fn roundtrip_recovers_input() {
        let f = test_vec(4096, 0.5);
        let fwd = build_plan(4096, Direction::LegendreToChebyshev, 32, 18).unwrap();
        let inv = build_plan(4096, Direction::ChebyshevToLegendre, 32, 18).unwrap();
        let back = execute(&inv, &execute(&fwd, &f).unwrap()).unwrap();
        let err = e_inf(&back, &f);
        assert!(err <= 2e-14, "{err:e}");
    }

    #[test]
    fn parity_separation_is_exact() {
        let plan = build_plan(1024, Direction::LegendreToChebyshev, 32, 18).unwrap();
        let mut even = test_vec(1024, 0.0);
        for x in even.iter_mut().skip(1).step_by(2) {
            *x = 0.0;
        }
        let z = execute(&plan, &even).unwrap();
        for (i, zi) in z.iter().enumerate().skip(1).step_by(2) {
            assert!(*zi == 0.0, "odd output {i} = {zi:e}");
        }
        let mut odd = test_vec(1024, 0.0);
        for x in odd.iter_mut().step_by(2) {
            *x = 0.0;
        }
        let z = execute(&plan, &odd).unwrap();
        for (i, zi) in z.iter().enumerate().step_by(2) {
            assert!(*zi == 0.0, "even output {i} = {zi:e}");
        }
    }

    #[test]
    fn combine_matches_naive_products() {
        let b0 = crate::cheb_tools::build_b(0, 18).unwrap();
        let b1 = crate::cheb_tools::build_b(1, 18).unwrap();
        let m = 18;
        let c0 = test_vec(m, 0.0);
        let c1: Vec<f64> = test_vec(2 * m, 0.0)[m..].to_vec();
        let mut got = vec![0.0; m];
        combine_children(&mut got, &c0, &c1, &b0);
        for k in 0..m {
            let mut want = 0.0;
            for j in 0..=k {
                want += b0.at(k, j) * c0[j] + b1.at(k, j) * c1[j];
            }
            let tol = 4.0 * f64::EPSILON * want.abs().max(1.0);
            assert!((got[k] - want).abs() <= tol, "k = {k}: {} vs {want}", got[k]);
        }
        // One zero child leaves a plain product, added in descending
        // column order; compare against the same order bitwise.
        let zero = vec![0.0; m];
        let mut single = vec![0.0; m];
        combine_children(&mut single, &c0, &zero, &b0);
        for k in 0..m {
            let mut want = 0.0;
            for j in (0..=k).rev() {
                want += b0.at(k, j) * c0[j];
            }
            assert_eq!(single[k].to_bits(), want.to_bits(), "k = {k}");
        }
    }

    #[test]
    fn scatter_is_adjoint_of_combine() {
        let b0 = crate::cheb_tools::build_b(0, 18).unwrap();
        let m = 18;
        let v0 = test_vec(m, 0.0);
        let v1: Vec<f64> = test_vec(3 * m, 0.0)[2 * m..].to_vec();
        let u: Vec<f64> = test_vec(2 * m, 0.0)[m..].to_vec();
        let mut combined = vec![0.0; m];
        combine_children(&mut combined, &v0, &v1, &b0);
        let mut d0 = vec![0.0; m];
        let mut d1 = vec![0.0; m];
        scatter_parents(&u, &mut d0, &mut d1, &b0);
        let lhs: f64 = u.iter().zip(&combined).map(|(a, b)| a * b).sum();
        let rhs: f64 = d0.iter().zip(&v0).map(|(a, b)| a * b).sum::<f64>()
            + d1.iter().zip(&v1).map(|(a, b)| a * b).sum::<f64>();
        assert!(
            (lhs - rhs).abs() <= 1e-15 * lhs.abs().max(rhs.abs()).max(1.0),
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn combine_call_count_follows_level_sums() {
        for levels in 2usize..=12 {
            let per_level: usize = (1..levels).map(|g| ((1usize << (g + 1)) - 1) - 1).sum();
            assert_eq!(per_level, 2 * ((1 << levels) - levels - 1), "L = {levels}");
        }
    }

    #[test]
    fn threaded_matches_serial_bitwise() {
        let f = test_vec(1000, 0.5);
        for direction in [
            Direction::LegendreToChebyshev,
            Direction::ChebyshevToLegendre,
        ] {
            let plan = build_plan(1000, direction, 32, 18).unwrap();
            let serial = execute(&plan, &f).unwrap();
            for threads in [1usize, 2, 3, 8] {
                let par = execute_threaded(&plan, &f, threads).unwrap();
                assert_eq!(par.len(), serial.len());
                for (i, (a, b)) in par.iter().zip(&serial).enumerate() {
                    assert_eq!(a.to_bits(), b.to_bits(), "{direction} t={threads} i={i}");
                }
            }
        }
    }

    #[test]
    fn workset_reuse_is_clean() {
        let plan = build_plan(2048, Direction::LegendreToChebyshev, 32, 18).unwrap();
        let mut ws = WorkSet::new(&plan);
        let f = test_vec(2048, 0.5);
        let g = test_vec(1500, 0.25);
        let _ = execute_with(&plan, &mut ws, &f).unwrap();
        let reused = execute_with(&plan, &mut ws, &g).unwrap();
        let fresh = execute(&plan, &g).unwrap();
        for (a, b) in reused.iter().zip(&fresh) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn padding_with_zeros_changes_nothing() {
        let plan = build_plan(1024, Direction::LegendreToChebyshev, 32, 18).unwrap();
        let f = test_vec(1000, 0.5);
        let mut fpad = f.clone();
        fpad.resize(1024, 0.0);
        let short = execute(&plan, &f).unwrap();
        let long = execute(&plan, &fpad).unwrap();
        assert_eq!(short.len(), 1000);
        assert_eq!(long.len(), 1024);
        for (a, b) in short.iter().zip(&long) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn input_is_left_untouched() {
        let plan = build_plan(1000, Direction::ChebyshevToLegendre, 32, 18).unwrap();
        let f = test_vec(1000, 0.5);
        let copy = f.clone();
        let _ = execute(&plan, &f).unwrap();
        assert_eq!(f, copy);
    }

    #[test]
    fn rejects_oversized_input_and_short_lambda() {
        let plan = build_plan(1000, Direction::LegendreToChebyshev, 32, 18).unwrap();
        let too_long = vec![0.0; plan.decomposition.n + 1];
        assert!(matches!(
            execute(&plan, &too_long),
            Err(ExecError::InputTooLong { .. })
        ));
        let lam = lambda_vector(10).unwrap();
        assert!(matches!(
            direct_transform(Direction::LegendreToChebyshev, &vec![1.0; 11], &lam),
            Err(ExecError::LambdaTooShort { need: 11, got: 10 })
        ));
    }

    #[test]
    fn workset_mismatch_is_reported() {
        let plan_a = build_plan(1024, Direction::LegendreToChebyshev, 32, 18).unwrap();
        let plan_b = build_plan(4096, Direction::LegendreToChebyshev, 32, 18).unwrap();
        let mut ws = WorkSet::new(&plan_a);
        let f = vec![1.0; 100];
        assert!(matches!(
            execute_with(&plan_b, &mut ws, &f),
            Err(ExecError::WorkSetMismatch)
        ));
    }

    #[test]
    fn memory_accounting_matches_shapes() {
        let plan = build_plan(1 << 14, Direction::LegendreToChebyshev, 32, 18).unwrap();
        let d = &plan.decomposition;
        let ws = WorkSet::new(&plan);
        let blocks: usize = (0..d.levels).map(|g| d.blocks_at(g)).sum();
        assert_eq!(ws.memory_doubles(), blocks * 2 * plan.m * 2);
        assert_eq!(
            plan.memory_doubles(),
            d.n + d.total_submatrices() * plan.m * plan.m
                + 2 * plan.m * plan.m
                + 2 * d.s * plan.m
        );
    }
}
