//! Plans are immutable and serializable. This builds one, parks it on
//! disk, reloads it, and verifies the reloaded plan executes bit for
//! bit like the original.

use std::error::Error;
use std::fs;

use fastconnect::{build_plan, execute, random_decaying, Direction, Plan, RandomSpec};

fn main() -> Result<(), Box<dyn Error>> {
    let n = 1usize << 13;
    let plan = build_plan(n, Direction::ChebyshevToLegendre, 32, 18)?;
    let bytes = plan.to_bytes();
    println!(
        "plan for n = {n}: {} bytes serialized, {} fresh ratio evaluations at build time",
        bytes.len(),
        plan.stats.lambda_evaluations
    );

    let path = std::env::temp_dir().join("fastconnect_demo.plan");
    fs::write(&path, &bytes)?;
    let loaded = Plan::from_bytes(&fs::read(&path)?)?;
    fs::remove_file(&path).ok();

    let f = random_decaying(&RandomSpec {
        len: n,
        seed: 31,
        decay: 0.0,
    });
    let a = execute(&plan, &f)?;
    let b = execute(&loaded, &f)?;
    let identical = a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
    println!("reloaded plan reproduces execution bitwise: {identical}");
    assert!(identical);
    Ok(())
}
