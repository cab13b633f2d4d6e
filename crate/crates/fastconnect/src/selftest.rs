//! Self-test suite: nine end-to-end checks covering accuracy against
//! the compensated oracle, roundtrip stability, the flop model, method
//! equivalence, exact basis matrices, Λ accuracy at large index, linear
//! scaling, bitwise padding behavior, and the structural tiling. The
//! CLI selftest subcommand and the acceptance integration test both run
//! exactly this list.

use crate::cheb_tools::build_b;
use crate::executor::{execute, execute_reference_fmm};
use crate::gamma_ratio::lambda_vector;
use crate::hierarchy::build_decomposition;
use crate::oracle::{e_inf, oracle_transform, random_decaying, RandomSpec};
use crate::planner::{build_plan, flop_estimate, optimal_s, FlopVariant, Plan};
use crate::Direction;
use std::time::Instant;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn report(name: &'static str, outcome: Result<String, String>) -> CheckReport {
    match outcome {
        Ok(detail) => CheckReport {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckReport {
            name,
            passed: false,
            detail,
        },
    }
}

/// Runs the full suite in order. Heavy checks come first so an early
/// failure in the cheap structural ones still leaves the interesting
/// accuracy numbers in the log.
pub fn run_all() -> Vec<CheckReport> {
    vec![
        check_oracle_agreement(),
        check_roundtrip_stability(),
        check_flop_model(),
        check_method_equivalence(),
        check_basis_matrices(),
        check_lambda_accuracy(),
        check_linear_scaling(),
        check_padding_bitwise(),
        check_structural_cover(),
    ]
}

pub fn suite_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

fn plans_for(n: usize) -> Result<(Plan, Plan), String> {
    let fwd = build_plan(n, Direction::LegendreToChebyshev, 32, 18).map_err(|e| e.to_string())?;
    let inv = build_plan(n, Direction::ChebyshevToLegendre, 32, 18).map_err(|e| e.to_string())?;
    Ok((fwd, inv))
}

/// Uniform random inputs across a ladder of sizes: the fast forward
/// transform must track the compensated oracle to 5e-15 and the inverse
/// to 5e-13 in relative max norm.
pub fn check_oracle_agreement() -> CheckReport {
    report("oracle-agreement", (|| {
        let start = Instant::now();
        let mut worst_fwd = 0.0_f64;
        let mut worst_inv = 0.0_f64;
        let mut log2 = 8;
        let mut n = 256usize;
        while n <= 32768 {
            let (fwd, inv) = plans_for(n)?;
            let f = random_decaying(&RandomSpec {
                len: n,
                seed: 100 + log2,
                decay: 0.0,
            });
            let got = execute(&fwd, &f).map_err(|e| e.to_string())?;
            let want = oracle_transform(Direction::LegendreToChebyshev, &f)
                .map_err(|e| e.to_string())?;
            worst_fwd = worst_fwd.max(e_inf(&got, &want).map_err(|e| e.to_string())?);
            let got = execute(&inv, &f).map_err(|e| e.to_string())?;
            let want = oracle_transform(Direction::ChebyshevToLegendre, &f)
                .map_err(|e| e.to_string())?;
            worst_inv = worst_inv.max(e_inf(&got, &want).map_err(|e| e.to_string())?);
            n *= 2;
            log2 += 1;
        }
        let elapsed = start.elapsed().as_secs_f64();
        let detail = format!(
            "N in [256, 32768]: worst l2c {worst_fwd:.2e} (limit 5e-15), worst c2l {worst_inv:.2e} (limit 5e-13), {elapsed:.1}s (budget 30s)"
        );
        if worst_fwd <= 5e-15 && worst_inv <= 5e-13 && elapsed < 30.0 {
            Ok(detail)
        } else {
            Err(detail)
        }
    })())
}

/// Forward-then-inverse must return the input to 2e-14 for decaying
/// coefficients and 1e-12 for uniform ones, up to a million entries.
pub fn check_roundtrip_stability() -> CheckReport {
    report("roundtrip-stability", (|| {
        let start = Instant::now();
        let mut worst_half = 0.0_f64;
        let mut worst_flat = 0.0_f64;
        for log2 in [12usize, 16, 20] {
            let n = 1 << log2;
            let (fwd, inv) = plans_for(n)?;
            for (decay, worst) in [(0.5, &mut worst_half), (0.0, &mut worst_flat)] {
                let f = random_decaying(&RandomSpec {
                    len: n,
                    seed: 7 * log2 as u64,
                    decay,
                });
                let mid = execute(&fwd, &f).map_err(|e| e.to_string())?;
                let back = execute(&inv, &mid).map_err(|e| e.to_string())?;
                *worst = worst.max(e_inf(&back, &f).map_err(|e| e.to_string())?);
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        let detail = format!(
            "N up to 2^20: roundtrip r=1/2 {worst_half:.2e} (limit 2e-14), r=0 {worst_flat:.2e} (limit 1e-12), {elapsed:.1}s (budget 60s)"
        );
        if worst_half <= 2e-14 && worst_flat <= 1e-12 && elapsed < 60.0 {
            Ok(detail)
        } else {
            Err(detail)
        }
    })())
}

/// The leading-order cost model must reproduce the quoted per-entry
/// figures and its integer minimizer.
pub fn check_flop_model() -> CheckReport {
    report("flop-model", (|| {
        let d = build_decomposition(1024, 32).map_err(|e| e.to_string())?;
        let n = d.n as f64;
        let modal = flop_estimate(&d, 18, 3.0, FlopVariant::Modal) / n;
        let nodal = flop_estimate(&d, 18, 3.0, FlopVariant::Nodal) / n;
        let s_star = optimal_s(18, 3.0);
        let detail = format!(
            "modal {modal}/entry (want [245, 255]), nodal {nodal}/entry (want [300, 320]), best s {s_star} (want 29)"
        );
        if (245.0..=255.0).contains(&modal) && (300.0..=320.0).contains(&nodal) && s_star == 29 {
            Ok(detail)
        } else {
            Err(detail)
        }
    })())
}

/// The shared-moment pipeline, the plain per-submatrix contraction, and
/// the compensated oracle must agree on the same 4096-entry input.
pub fn check_method_equivalence() -> CheckReport {
    report("method-equivalence", (|| {
        let n = 4096;
        let f = random_decaying(&RandomSpec {
            len: n,
            seed: 17,
            decay: 0.0,
        });
        let mut details = Vec::new();
        let mut ok = true;
        for direction in [
            Direction::LegendreToChebyshev,
            Direction::ChebyshevToLegendre,
        ] {
            let plan =
                build_plan(n, direction, 32, 18).map_err(|e| e.to_string())?;
            let fast = execute(&plan, &f).map_err(|e| e.to_string())?;
            let reference = execute_reference_fmm(&plan, &f).map_err(|e| e.to_string())?;
            let oracle = oracle_transform(direction, &f).map_err(|e| e.to_string())?;
            let vs_ref = e_inf(&fast, &reference).map_err(|e| e.to_string())?;
            let vs_oracle = e_inf(&fast, &oracle).map_err(|e| e.to_string())?;
            ok &= vs_ref <= 1e-14 && vs_oracle <= 1e-13;
            details.push(format!(
                "{direction}: vs reference {vs_ref:.2e} (limit 1e-14), vs oracle {vs_oracle:.2e} (limit 1e-13)"
            ));
        }
        let detail = details.join("; ");
        if ok {
            Ok(detail)
        } else {
            Err(detail)
        }
    })())
}

/// Leading rows of both basis-change matrices are exact dyadic values,
/// and the full second matrix is the first with odd diagonals negated.
pub fn check_basis_matrices() -> CheckReport {
    report("basis-matrices", (|| {
        let m = 18;
        let b0 = build_b(0, m).map_err(|e| e.to_string())?;
        let b1 = build_b(1, m).map_err(|e| e.to_string())?;
        let rows0: [&[f64]; 4] = [
            &[1.0],
            &[-0.5, 0.5],
            &[-0.25, -1.0, 0.25],
            &[0.25, 0.375, -0.75, 0.125],
        ];
        let rows1: [&[f64]; 4] = [
            &[1.0],
            &[0.5, 0.5],
            &[-0.25, 1.0, 0.25],
            &[-0.25, 0.375, 0.75, 0.125],
        ];
        for k in 0..4 {
            for j in 0..=k {
                if b0.at(k, j).to_bits() != rows0[k][j].to_bits() {
                    return Err(format!("first matrix row {k} entry {j}: {}", b0.at(k, j)));
                }
                if b1.at(k, j).to_bits() != rows1[k][j].to_bits() {
                    return Err(format!("second matrix row {k} entry {j}: {}", b1.at(k, j)));
                }
            }
        }
        for k in 0..m {
            for j in 0..=k {
                let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                if b1.at(k, j) != sign * b0.at(k, j) {
                    return Err(format!("sign flip fails at ({k}, {j})"));
                }
            }
        }
        Ok("rows 0-3 bitwise exact; full 18x18 sign-flip identity holds".to_string())
    })())
}

/// Λ values from the sequential vector recurrence stay within 1e-15
/// relative of high-precision references out to eight million.
pub fn check_lambda_accuracy() -> CheckReport {
    report("lambda-accuracy", (|| {
        let refs: [(usize, f64); 4] = [
            (1_000, 0.031_618_824_001_815_91),
            (100_000, 0.003_162_273_707_323_774_666_388),
            (1_000_000, 0.000_999_999_875_000_007_812_504_9),
            (8_000_000, 0.000_353_553_385_069_002_077_338_9),
        ];
        let lam = lambda_vector(8_388_601).map_err(|e| e.to_string())?;
        let mut worst = 0.0_f64;
        for (i, want) in refs {
            let rel = (lam[i] / want - 1.0).abs();
            worst = worst.max(rel);
        }
        let detail =
            format!("worst relative error {worst:.2e} at indices 1e3, 1e5, 1e6, 8e6 (limit 1e-15)");
        if worst < 1e-15 {
            Ok(detail)
        } else {
            Err(detail)
        }
    })())
}

/// Execution time grows near-linearly (a 16x size step costs at most
/// 24x) and planning-side kernel evaluation counts double with size.
pub fn check_linear_scaling() -> CheckReport {
    report("linear-scaling", (|| {
        let evals = |n: usize| -> Result<f64, String> {
            Ok(build_plan(n, Direction::LegendreToChebyshev, 32, 18)
                .map_err(|e| e.to_string())?
                .stats
                .lambda_evaluations as f64)
        };
        let e14 = evals(1 << 14)?;
        let e15 = evals(1 << 15)?;
        let e16 = evals(1 << 16)?;
        let g1 = e15 / e14;
        let g2 = e16 / e15;
        if !(1.9..=2.1).contains(&g1) || !(1.9..=2.1).contains(&g2) {
            return Err(format!("evaluation growth per doubling {g1:.3}, {g2:.3} outside [1.9, 2.1]"));
        }

        let time_best = |plan: &Plan, f: &[f64], reps: usize| -> Result<f64, String> {
            let mut ws = crate::executor::WorkSet::new(plan);
            let _ = crate::executor::execute_with(plan, &mut ws, f).map_err(|e| e.to_string())?;
            let mut best = f64::INFINITY;
            for _ in 0..reps {
                let start = Instant::now();
                let _ = crate::executor::execute_with(plan, &mut ws, f).map_err(|e| e.to_string())?;
                best = best.min(start.elapsed().as_secs_f64());
            }
            Ok(best)
        };
        let small = build_plan(1 << 16, Direction::LegendreToChebyshev, 32, 18)
            .map_err(|e| e.to_string())?;
        let large = build_plan(1 << 20, Direction::LegendreToChebyshev, 32, 18)
            .map_err(|e| e.to_string())?;
        let f_small = random_decaying(&RandomSpec {
            len: 1 << 16,
            seed: 5,
            decay: 0.5,
        });
        let f_large = random_decaying(&RandomSpec {
            len: 1 << 20,
            seed: 5,
            decay: 0.5,
        });
        let t_small = time_best(&small, &f_small, 5)?;
        let t_large = time_best(&large, &f_large, 3)?;
        let ratio = t_large / t_small;
        let detail = format!(
            "evaluation growth {g1:.3}, {g2:.3}; time 2^16 {t_small:.4}s, 2^20 {t_large:.4}s, ratio {ratio:.1} (limit 24)"
        );
        if ratio <= 24.0 {
            Ok(detail)
        } else {
            Err(detail)
        }
    })())
}

/// A length-1000 transform and the first thousand entries of the padded
/// length-1024 transform agree bitwise, through separately built plans.
pub fn check_padding_bitwise() -> CheckReport {
    report("padding-bitwise", (|| {
        let f = random_decaying(&RandomSpec {
            len: 1000,
            seed: 23,
            decay: 0.0,
        });
        let mut fpad = f.clone();
        fpad.resize(1024, 0.0);
        for direction in [
            Direction::LegendreToChebyshev,
            Direction::ChebyshevToLegendre,
        ] {
            let short_plan =
                build_plan(1000, direction, 32, 18).map_err(|e| e.to_string())?;
            let long_plan =
                build_plan(1024, direction, 32, 18).map_err(|e| e.to_string())?;
            let short = execute(&short_plan, &f).map_err(|e| e.to_string())?;
            let long = execute(&long_plan, &fpad).map_err(|e| e.to_string())?;
            for i in 0..1000 {
                if short[i].to_bits() != long[i].to_bits() {
                    return Err(format!(
                        "{direction}: entry {i} differs: {} vs {}",
                        short[i], long[i]
                    ));
                }
            }
        }
        Ok("length 1000 vs padded 1024 bitwise identical, both directions".to_string())
    })())
}

/// The three submatrices per block plus the diagonal staircase tile the
/// upper triangle exactly once, and block counts match the closed forms.
pub fn check_structural_cover() -> CheckReport {
    report("structural-cover", (|| {
        for n in [1024usize, 2048, 4096] {
            let d = build_decomposition(n, 32).map_err(|e| e.to_string())?;
            let mut cover = vec![0u8; d.n * d.n];
            for i in 0..d.n {
                for j in i..d.direct_region_end(i) {
                    cover[i * d.n + j] += 1;
                }
            }
            for block in d.blocks() {
                let h = block.half;
                for (p, q) in [(0usize, 0usize), (0, 1), (1, 1)] {
                    let (i0, j0) = d.submatrix_corner(block.level, block.index, p, q);
                    for i in i0..i0 + 2 * h {
                        for j in j0..j0 + 2 * h {
                            cover[i * d.n + j] += 2;
                        }
                    }
                }
            }
            for i in 0..d.n {
                for j in 0..d.n {
                    let got = cover[i * d.n + j];
                    let want_ok = if j < i { got == 0 } else { got == 1 || got == 2 };
                    if !want_ok {
                        return Err(format!("N = {n}: cell ({i}, {j}) covered {got} times"));
                    }
                }
            }
        }
        let b1024 = build_decomposition(1024, 32).map_err(|e| e.to_string())?.total_blocks();
        let b4096 = build_decomposition(4096, 32).map_err(|e| e.to_string())?.total_blocks();
        let detail =
            format!("exact cover at 1024/2048/4096; block counts {b1024} (want 11) and {b4096} (want 57)");
        if b1024 == 11 && b4096 == 57 {
            Ok(detail)
        } else {
            Err(detail)
        }
    })())
}
