//! Integral matrices acting by the weight-k slash operator
//! f|A(z) = det(A)^(k/2) (cz + d)^(-k) f(Az).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use hecke_core::arith::modular::{egcd, gcd, mod_inv, valuation};

use crate::error::{ClassicalError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Identity,
    AtkinLehner,
    CosetRep,
    Dilation,
    Translation,
    Gamma0,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlashMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub role: Role,
}

impl SlashMatrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64, role: Role) -> Self {
        SlashMatrix { a, b, c, d, role }
    }

    pub fn identity() -> Self {
        Self::new(1, 0, 0, 1, Role::Identity)
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn act(&self, z: Complex64) -> Complex64 {
        (z * self.a as f64 + self.b as f64) / (z * self.c as f64 + self.d as f64)
    }

    /// det^(k/2) (cz + d)^(-k).
    pub fn automorphy(&self, z: Complex64, k: u32) -> Complex64 {
        let det = self.det() as f64;
        (z * self.c as f64 + self.d as f64).powi(-(k as i32)) * det.powf(k as f64 / 2.0)
    }
}

/// W_{p^n} = (p^n beta, 1; N gamma, p^n) with p^(2n) beta - N gamma = p^n,
/// beta the smallest positive solution.
pub fn atkin_lehner_matrix(p: u64, n: u32, level: u64) -> Result<SlashMatrix> {
    let q = p.pow(n);
    if !level.is_multiple_of(q) || valuation(level, p, 64) != n {
        return Err(ClassicalError::NotExact { p, n, level });
    }
    let m = level / q;
    let beta = if m == 1 { 1 } else { mod_inv(q % m, m).expect("coprime") };
    let beta = if beta == 0 { m } else { beta };
    // q beta - m gamma = 1
    let gamma = (q as i64 * beta as i64 - 1) / m as i64;
    let w = SlashMatrix::new(
        (q * beta) as i64,
        1,
        level as i64 * gamma,
        q as i64,
        Role::AtkinLehner,
    );
    debug_assert_eq!(w.det(), q as i64);
    Ok(w)
}

/// A_{s,j} in SL2(Z) with bottom row (p^j M, p^(n-j) - s M) and the smallest
/// nonnegative top-left entry.
pub fn coset_rep(p: u64, n: u32, m: u64, s: u64, j: u32) -> SlashMatrix {
    let c = (p.pow(j) * m) as i64;
    let d = p.pow(n - j) as i64 - (s * m) as i64;
    let (g, x, y) = egcd(d, c);
    assert_eq!(g, 1, "bottom row must be coprime");
    // x d + y c = 1 -> a = x, b = -y; shift by multiples of (c, d)
    let (mut a, mut b) = (x, -y);
    let t = a.div_euclid(c);
    a -= t * c;
    b -= t * d;
    let out = SlashMatrix::new(a, b, c, d, Role::CosetRep);
    debug_assert_eq!(out.det(), 1);
    out
}

/// Unit residues s mod p^e as integers 1 <= s < p^e.
pub fn unit_classes(p: u64, e: u32) -> Vec<u64> {
    let m = p.pow(e);
    (1..m.max(2)).filter(|&s| gcd(s, p) == 1).collect()
}
