//! Classical operators on spaces of cusp forms given by q-expansion fixtures.

pub mod dims;
pub mod eigen;
pub mod error;
pub mod newspace;
pub mod oldspace;
pub mod ops;
pub mod qexp;
pub mod slash;
pub mod space;

pub use error::{ClassicalError, Result};
pub use ops::{OpConfig, OpMatrix};
pub use space::CuspSpace;
