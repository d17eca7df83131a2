//! Multi-index algebra, weighted index families, explicit bounds and
//! numerical checks for monomial expansions of polynomials on `l_r`.

pub mod bounds;
pub mod constants;
pub mod error;
pub mod index;
pub mod index_sets;
pub mod poly;
pub mod primes;
pub mod sum;
pub mod weights;

pub use error::{Error, Result};
pub use index::{enumerate_jmn, ExponentVector, MultiIndex, DEFAULT_CAP};
pub use index_sets::{census, enumerate_family, family_set, Family, WeightedFamilySpec};
pub use poly::{BallSpec, Exponent, SparsePolynomial};
pub use weights::{WeightKind, WeightSequence};
