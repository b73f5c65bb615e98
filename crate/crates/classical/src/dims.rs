//! Dimension formulas for S_k(Gamma0(N), chi), used as an independent oracle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use hecke_core::arith::modular::{divisors, factorize, valuation};
use hecke_core::arith::DirChar;

use crate::error::{ClassicalError, Result};

fn lambda(r: u32, s: u32, p: u64) -> u64 {
    if 2 * s <= r {
        let h = r / 2;
        if r.is_multiple_of(2) {
            p.pow(h) + p.pow(h - 1)
        } else {
            2 * p.pow(h)
        }
    } else {
        2 * p.pow(r - s)
    }
}

fn round_exact(x: Complex64, what: &str) -> Result<i64> {
    let r = x.re.round();
    if (x.re - r).abs() > 1e-6 || x.im.abs() > 1e-6 {
        return Err(ClassicalError::Parse(what.into(), format!("non-integral dimension {x}")));
    }
    Ok(r as i64)
}

/// dim S_k(Gamma0(N), chi) for k >= 2.
pub fn cusp_dim(chi: &DirChar, weight: u32) -> Result<i64> {
    let n = chi.modulus();
    if weight < 2 {
        return Err(ClassicalError::Parse(format!("weight {weight}"), "weight must be at least 2".into()));
    }
    if chi.parity() != if weight.is_multiple_of(2) { 1 } else { -1 } {
        return Ok(0);
    }
    let k = weight as f64;
    let fac = factorize(n);
    let mut index = n as f64;
    let mut lam = 1.0;
    for &(p, r) in &fac {
        index *= 1.0 + 1.0 / p as f64;
        lam *= lambda(r, chi.conductor_exponent(p), p) as f64;
    }
    let sum_roots = |poly: &dyn Fn(u64) -> u64| -> Complex64 {
        (0..n).filter(|&x| poly(x).is_multiple_of(n)).map(|x| chi.value_c64(x as i64)).sum()
    };
    let eps = match weight % 4 {
        0 => 0.25,
        2 => -0.25,
        _ => 0.0,
    };
    let mu = match weight % 3 {
        0 => 1.0 / 3.0,
        2 => -1.0 / 3.0,
        _ => 0.0,
    };
    let mut d = Complex64::new((k - 1.0) / 12.0 * index - 0.5 * lam, 0.0);
    if eps != 0.0 {
        d += sum_roots(&|x| x * x + 1) * eps;
    }
    if mu != 0.0 {
        d += sum_roots(&|x| x * x + x + 1) * mu;
    }
    if weight == 2 && chi.is_trivial() {
        d += 1.0;
    }
    round_exact(d, &format!("S_{weight}({n})"))
}

fn beta(m: u64) -> i64 {
    factorize(m)
        .iter()
        .map(|&(_, e)| match e {
            0 => 1,
            1 => -2,
            2 => 1,
            _ => 0,
        })
        .product()
}

/// dim S_k^new(Gamma0(N), chi) by Moebius-type inversion over levels between the conductor and N.
pub fn new_dim(chi: &DirChar, weight: u32) -> Result<i64> {
    let n = chi.modulus();
    let cond = chi.conductor();
    let mut total = 0;
    for m in divisors(n) {
        if m % cond != 0 {
            continue;
        }
        let b = beta(n / m);
        if b != 0 {
            total += b * cusp_dim(&chi.restrict_to(m)?, weight)?;
        }
    }
    Ok(total)
}

/// Old-space dimension contributed by level M = N / p^e forms: the sum over the
/// lower level spaces embedded by the p-power dilations.
pub fn old_dim(chi: &DirChar, weight: u32) -> Result<i64> {
    Ok(cusp_dim(chi, weight)? - new_dim(chi, weight)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionRecord {
    pub level: u64,
    pub weight: u32,
    pub conrey: u64,
    pub cusp: i64,
    pub new: i64,
}

pub fn dimension_record(chi: &DirChar, weight: u32) -> Result<DimensionRecord> {
    Ok(DimensionRecord {
        level: chi.modulus(),
        weight,
        conrey: chi.conrey_label(),
        cusp: cusp_dim(chi, weight)?,
        new: new_dim(chi, weight)?,
    })
}

/// Exponent of p in N.
pub fn p_exponent(level: u64, p: u64) -> u32 {
    valuation(level, p, 64)
}
