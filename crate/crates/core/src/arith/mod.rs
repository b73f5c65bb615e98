//! Exact arithmetic substrate: residues, cyclotomic numbers, characters.

pub mod chars;
pub mod cyclo;
pub mod linalg;
pub mod modular;

pub use chars::{conductor, DirChar, PChar};
pub use cyclo::CycNum;
pub use modular::unit_generators;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exponent {0} out of range")]
    BadExponent(u32),
    #[error("bad modulus {0}")]
    BadModulus(u64),
    #[error("{0} is not a unit mod {1}")]
    NonUnit(u64, u64),
    #[error("malformed character: {0}")]
    MalformedCharacter(String),
}
