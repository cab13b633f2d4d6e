//! Builds one plan per direction, pushes a random coefficient vector
//! through both, and prints how far the composition drifts from the
//! identity at several sizes and decay rates.

use std::error::Error;

use fastconnect::{build_plan, e_inf, execute, random_decaying, Direction, RandomSpec};

fn main() -> Result<(), Box<dyn Error>> {
    println!("{:>8}  {:>6}  {:>12}", "n", "decay", "roundtrip");
    for log2 in [10u32, 12, 14, 16] {
        let n = 1usize << log2;
        let fwd = build_plan(n, Direction::LegendreToChebyshev, 32, 18)?;
        let bwd = build_plan(n, Direction::ChebyshevToLegendre, 32, 18)?;
        for decay in [0.5, 1.0] {
            let f = random_decaying(&RandomSpec {
                len: n,
                seed: 11 + u64::from(log2),
                decay,
            });
            let z = execute(&fwd, &f)?;
            let back = execute(&bwd, &z)?;
            println!("{n:>8}  {decay:>6.2}  {:>12.3e}", e_inf(&back, &f)?);
        }
    }
    Ok(())
}
