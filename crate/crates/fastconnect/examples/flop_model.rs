//! Prints the block geometry behind one transform and the leading-order
//! work model it implies: flops per coefficient for both pipeline
//! variants, the dense cost they displace, and the model-optimal block
//! size.

use std::error::Error;

use fastconnect::{build_decomposition, flop_estimate, optimal_s, FlopVariant};

fn main() -> Result<(), Box<dyn Error>> {
    let n = 1usize << 14;
    let d = build_decomposition(n, 32)?;
    println!(
        "decomposition of {} entries: padded {}, s = {}, {} levels",
        d.input_len, d.n, d.s, d.levels
    );
    for level in 0..d.levels {
        println!(
            "  level {level}: {:>3} blocks with submatrix half {}",
            d.blocks_at(level),
            d.half(level)
        );
    }
    println!(
        "  total {} blocks, {} submatrices",
        d.total_blocks(),
        d.total_submatrices()
    );

    println!();
    for (label, variant) in [("modal", FlopVariant::Modal), ("nodal", FlopVariant::Nodal)] {
        let per = flop_estimate(&d, 18, 3.0, variant) / d.n as f64;
        println!("{label:>6} pipeline: {per:>7.2} flops per coefficient");
    }
    println!(
        "{:>6} method:   {:>7.2} flops per coefficient at this size",
        "dense",
        d.n as f64 / 2.0
    );
    println!();
    println!(
        "block size minimizing the modal model at M = 18, mu = 3: {}",
        optimal_s(18, 3.0)
    );
    Ok(())
}
