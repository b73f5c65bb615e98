//! Truncated q-expansions sum_{n>=1} a_n q^n.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ClassicalError, Result};

/// Lowest imaginary part at which a series is evaluated.
pub const IM_FLOOR: f64 = 0.02;

#[derive(Clone, Debug)]
pub struct QExpansion {
    pub weight: u32,
    /// a_1, a_2, ..., a_B.
    pub coeffs: Vec<Complex64>,
    /// C with |a_n| <= C n^(k-1) on the stored range.
    pub growth: f64,
}

impl QExpansion {
    pub fn new(weight: u32, coeffs: Vec<Complex64>) -> Self {
        let e = weight.saturating_sub(1) as f64;
        let growth = coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm() / ((i + 1) as f64).powf(e))
            .fold(0.0, f64::max);
        QExpansion {
            weight,
            coeffs,
            growth,
        }
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    /// Bound on sum_{n>B} C n^(k-1) e^(-2 pi n y).
    pub fn tail_bound(&self, y: f64) -> f64 {
        tail_bound(self.growth, self.weight, self.precision(), y)
    }

    /// Value at z and the tail bound.
    pub fn evaluate(&self, z: Complex64) -> Result<(Complex64, f64)> {
        if z.im < IM_FLOOR {
            return Err(ClassicalError::BelowFloor(z.im, IM_FLOOR));
        }
        let pw = q_powers(z, self.precision());
        let v = self.coeffs.iter().zip(&pw).map(|(a, q)| a * q).sum();
        Ok((v, self.tail_bound(z.im)))
    }

    /// b_n = p^(k/2) a_{pn}.
    pub fn up(&self, p: u64) -> Result<QExpansion> {
        self.scaled_up(p, (p as f64).powf(self.weight as f64 / 2.0))
    }

    /// b_n = p^(1-k/2) a_{pn}.
    pub fn u_tilde(&self, p: u64) -> Result<QExpansion> {
        self.scaled_up(p, (p as f64).powf(1.0 - self.weight as f64 / 2.0))
    }

    fn scaled_up(&self, p: u64, s: f64) -> Result<QExpansion> {
        let out = self.precision() / p as usize;
        if out < MIN_OUTPUT {
            return Err(ClassicalError::Precision {
                have: self.precision(),
                need: MIN_OUTPUT * p as usize,
            });
        }
        let coeffs = (1..=out).map(|n| self.coeffs[n * p as usize - 1] * s).collect();
        Ok(QExpansion::new(self.weight, coeffs))
    }

    /// f(pz): b_{pn} = a_n, zero elsewhere, kept to the same precision.
    pub fn vp(&self, p: u64) -> QExpansion {
        let b = self.precision();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); b];
        for (i, a) in self.coeffs.iter().enumerate() {
            let m = (i + 1) * p as usize;
            if m > b {
                break;
            }
            coeffs[m - 1] = *a;
        }
        QExpansion::new(self.weight, coeffs)
    }
}

/// Smallest number of output coefficients accepted from U_p.
pub const MIN_OUTPUT: usize = 40;

pub fn tail_bound(c: f64, weight: u32, b: usize, y: f64) -> f64 {
    let e = weight.saturating_sub(1) as f64;
    let bf = b as f64;
    let rho = ((bf + 1.0) / bf).powf(e) * (-2.0 * PI * y).exp();
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    c * (bf + 1.0).powf(e) * (-2.0 * PI * (bf + 1.0) * y).exp() / (1.0 - rho)
}

/// q^1, ..., q^B at z.
pub fn q_powers(z: Complex64, b: usize) -> Vec<Complex64> {
    let q = (Complex64::new(0.0, 2.0 * PI) * z).exp();
    let mut out = Vec::with_capacity(b);
    let mut cur = q;
    for _ in 0..b {
        out.push(cur);
        cur *= q;
    }
    out
}
