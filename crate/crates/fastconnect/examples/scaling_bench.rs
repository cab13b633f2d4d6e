//! Times the fast path across a range of sizes, reusing one scratch
//! set for the serial column and a small thread pool for the other.
//! The ns-per-entry column staying flat is the linear-complexity story.

use std::error::Error;
use std::time::Instant;

use fastconnect::{
    build_plan, execute_threaded, execute_with, random_decaying, Direction, RandomSpec, WorkSet,
};

fn main() -> Result<(), Box<dyn Error>> {
    println!(
        "{:>9}  {:>12}  {:>12}  {:>10}",
        "n", "serial s", "threaded s", "ns/entry"
    );
    for log2 in [14u32, 16, 18, 20] {
        let n = 1usize << log2;
        let plan = build_plan(n, Direction::LegendreToChebyshev, 32, 18)?;
        let f = random_decaying(&RandomSpec {
            len: n,
            seed: u64::from(log2),
            decay: 0.0,
        });
        let mut ws = WorkSet::new(&plan);
        execute_with(&plan, &mut ws, &f)?;
        let reps = ((1usize << 22) >> log2).max(1);

        let t0 = Instant::now();
        for _ in 0..reps {
            execute_with(&plan, &mut ws, &f)?;
        }
        let serial = t0.elapsed().as_secs_f64() / reps as f64;

        let t0 = Instant::now();
        for _ in 0..reps {
            execute_threaded(&plan, &f, 4)?;
        }
        let threaded = t0.elapsed().as_secs_f64() / reps as f64;

        println!(
            "{n:>9}  {serial:>12.3e}  {threaded:>12.3e}  {:>10.1}",
            serial / n as f64 * 1e9
        );
    }
    Ok(())
}
