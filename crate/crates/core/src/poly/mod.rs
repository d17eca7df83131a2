//! Sparse polynomials on `l_r^n` and the numerical checks built on them.

pub mod ball;
pub mod checks;
pub mod polynomial;
pub mod probes;
pub mod sequence;
pub mod sidon;
pub mod supnorm;

pub use ball::{BallSpec, Exponent};
pub use checks::{cauchy_bound_check, mixed_norm_check, thm_monomial_check};
pub use polynomial::{random_polynomial, random_sign_polynomial, PolynomialFile, SparsePolynomial};
pub use probes::{block_partial_sums, kq_sum, Block, KqSum};
pub use sequence::{weighted_sum, CoefficientSource, SequencePoint, UnitCoefficients};
pub use sidon::{sidon_lower_bound, SidonReport};
pub use supnorm::{monomial_sup_norm, sup_norm, sup_norm_upper, SupNormBudget, SupNormEstimate};
