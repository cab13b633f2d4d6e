//! Fast transforms between Legendre and Chebyshev expansion coefficients.
//!
//! Given the coefficients of a degree N-1 Legendre series, the forward
//! transform returns the Chebyshev coefficients of the same polynomial;
//! the inverse direction maps Chebyshev coefficients back. Both
//! connection matrices are upper triangular with entries built from the
//! ratio Lambda(z) = Gamma(z + 1/2) / Gamma(z + 1), and away from the
//! diagonal those entries vary smoothly, so square blocks admit accurate
//! low-order bivariate Chebyshev approximation.
//!
//! [`build_plan`] tiles the triangle into a dyadic block hierarchy and
//! stores, per block, a small coefficient matrix of fixed order M; one
//! plan costs O(N) to build and about 15N doubles to hold. [`execute`]
//! then applies the transform in O(N) time (roughly 250 flops per entry
//! at the defaults s-hat = 32, M = 18) by gathering input moments at the
//! finest level, combining them up the hierarchy with exact triangular
//! basis changes, applying each block's coefficient matrix, and
//! scattering the results back down. The diagonal staircase that the
//! blocks leave uncovered is applied directly.
//!
//! Module map: [`gamma_ratio`] evaluates Lambda to a couple of ulps,
//! [`hierarchy`] owns the block geometry, [`cheb_tools`] holds the DCT,
//! Vandermonde samplers and exact triangular maps, [`kernels`] the two
//! connection kernels, [`planner`] and [`executor`] the fast path,
//! [`oracle`] a compensated quadratic-time reference plus test inputs,
//! [`selftest`] the acceptance checks, [`cli`] the command-line front
//! end.
//!
//! # Example
//!
//! The Chebyshev polynomial T_2 expands in Legendre polynomials as
//! T_2 = -1/3 P_0 + 4/3 P_2:
//!
//! ```
//! use fastconnect::{build_plan, execute, Direction};
//!
//! let n = 256;
//! let mut f = vec![0.0; n];
//! f[2] = 1.0;
//! let plan = build_plan(n, Direction::ChebyshevToLegendre, 32, 18)?;
//! let g = execute(&plan, &f)?;
//! assert!((g[0] + 1.0 / 3.0).abs() < 1e-15);
//! assert!((g[2] - 4.0 / 3.0).abs() < 1e-15);
//! assert!(g[1].abs() < 1e-15);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod cheb_tools;
pub mod cli;
mod dd;
pub mod executor;
pub mod gamma_ratio;
pub mod hierarchy;
pub mod kernels;
pub mod oracle;
pub mod planner;
pub mod selftest;

pub use cli::run_cli;
pub use executor::{
    direct_transform, execute, execute_reference_fmm, execute_threaded, execute_with, WorkSet,
};
pub use gamma_ratio::{lambda_scalar, lambda_vector, terms_needed};
pub use hierarchy::{build_decomposition, Decomposition};
pub use oracle::{e_inf, oracle_transform, random_decaying, RandomSpec};
pub use planner::{build_plan, flop_estimate, optimal_s, FlopVariant, Plan};

use std::fmt;

/// Transform direction: which family the input coefficients expand in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Input Legendre coefficients, output Chebyshev coefficients.
    LegendreToChebyshev,
    /// Input Chebyshev coefficients, output Legendre coefficients.
    ChebyshevToLegendre,
}

impl Direction {
    pub(crate) fn code(self) -> u32 {
        match self {
            Direction::LegendreToChebyshev => 0,
            Direction::ChebyshevToLegendre => 1,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Direction> {
        match code {
            0 => Some(Direction::LegendreToChebyshev),
            1 => Some(Direction::ChebyshevToLegendre),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::LegendreToChebyshev => write!(f, "l2c"),
            Direction::ChebyshevToLegendre => write!(f, "c2l"),
        }
    }
}
