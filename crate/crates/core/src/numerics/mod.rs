//! Small numerical kernels shared by every stage: symmetric 2×2 / 3×3
//! matrices and their closed-form eigen-decompositions, forward-mode dual
//! numbers, fixed-order reductions and the seeded random streams.

mod dual;
mod eigen;
mod real;
mod rng;
mod sum;
mod sym;
pub mod vec3;

pub use dual::{dual_lift, Dual, Dual2, TANGENT_WIDTH};
pub use eigen::{eigen_sym2, eigen_sym3, EigenPair2, EigenPair3};
pub use real::Real;
pub use rng::{rng_for, split_seed, SeedRng};
pub use sum::{kahan_sum, stable_sum};
pub use sym::{Sym2, Sym3};

/// Absolute floor used whenever a quantity is divided by an eigenvalue sum.
pub const EPS_EIG: f64 = 1e-12;
