//! Measures every evaluation method against the compensated dense
//! reference on one vector: the fast path, the serial reference
//! pipeline it must match, and the plain dense method.

use std::error::Error;

use fastconnect::{
    build_plan, direct_transform, e_inf, execute, execute_reference_fmm, lambda_vector,
    oracle_transform, random_decaying, Direction, RandomSpec,
};

fn main() -> Result<(), Box<dyn Error>> {
    let n = 8192;
    let f = random_decaying(&RandomSpec {
        len: n,
        seed: 5,
        decay: 0.5,
    });
    let lambda = lambda_vector(n)?;
    println!("n = {n}, decay 0.5");
    println!("{:>4}  {:>10}  {:>12}", "dir", "method", "e_inf");
    for (name, direction) in [
        ("l2c", Direction::LegendreToChebyshev),
        ("c2l", Direction::ChebyshevToLegendre),
    ] {
        let want = oracle_transform(direction, &f)?;
        let plan = build_plan(n, direction, 32, 18)?;
        let fast = execute(&plan, &f)?;
        let refr = execute_reference_fmm(&plan, &f)?;
        let dense = direct_transform(direction, &f, &lambda)?;
        for (method, got) in [("fmm", &fast), ("reference", &refr), ("direct", &dense)] {
            println!("{name:>4}  {method:>10}  {:>12.3e}", e_inf(got, &want)?);
        }
    }
    Ok(())
}
