//! Exact arithmetic for twisted Hecke algebras of GL2(Z/p^n) and their
//! induced representations.

pub mod arith;
pub mod brute;
pub mod cosets;
pub mod hecke;
pub mod induced;
pub mod report;
