//! Abel maps over nodal curves, at the level of combinatorics: quasistable
//! multidegrees, chain semistabilization, iterated blowups of
//! `xy = u_1 ... u_{d+1}`, special point data for two-component curves and
//! the numerical extension conditions.
//!
//! Everything stability-related is generic over an [`ExactScalar`]; the
//! aliases below fix the default `i64` rationals.

pub mod blowup;
pub mod chain;
pub mod curve;
pub mod extension;
pub mod index_set;
pub mod io;
pub mod scalar;
pub mod special;

use num_bigint::BigInt;
use num_rational::Ratio;

pub use index_set::IndexSet;
pub use scalar::ExactScalar;

pub type Rational = Ratio<i64>;
pub type BigRational = Ratio<BigInt>;

pub type Polarization = curve::Polarization<Rational>;
pub type LocalProblem = extension::LocalProblem<Rational>;
pub type VerifyParams = extension::VerifyParams<Rational>;
pub type ConditionTable = extension::ConditionTable<Rational>;
pub type CurveInput = io::CurveInput<Rational>;
pub type ChainInput = io::ChainInput<Rational>;
