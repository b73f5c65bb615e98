//! Exact arithmetic in the cyclotomic field Q(zeta_m).
//!
//! Elements are coefficient vectors of length phi(m) modulo the m-th cyclotomic
//! polynomial. Hot loops accumulate integer exponent histograms (elements of the
//! group ring Z[C_m]) and reduce them once through a precomputed power table.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::modular::{divisors, euler_phi};

/// Integer coefficients of Phi_m, lowest degree first.
pub fn cyclotomic_poly(m: u64) -> Vec<i64> {
    assert!(m > 0);
    let mut poly = vec![0i64; m as usize + 1];
    poly[0] = -1;
    poly[m as usize] = 1;
    for d in divisors(m) {
        if d == m {
            continue;
        }
        poly = exact_div(&poly, &cyclotomic_poly(d));
    }
    poly
}

fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd];
    assert!(lead == 1 || lead == -1);
    let qdeg = rem.len() - 1 - dd;
    let mut quot = vec![0i64; qdeg + 1];
    for i in (0..=qdeg).rev() {
        let c = rem[i + dd] * lead;
        quot[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    quot
}

/// Reduction data for a fixed order m.
#[derive(Debug)]
pub struct CycField {
    pub order: u64,
    pub degree: usize,
    pub poly: Vec<i64>,
    /// powers[e] = coefficients of x^e mod Phi_m, for 0 <= e < m.
    pub powers: Vec<Vec<i64>>,
}

impl CycField {
    fn build(m: u64) -> Self {
        let poly = cyclotomic_poly(m);
        let degree = poly.len() - 1;
        let mut powers = Vec::with_capacity(m as usize);
        let mut cur = vec![0i64; degree];
        cur[0] = 1;
        for _ in 0..m {
            powers.push(cur.clone());
            // multiply by x and reduce
            let mut next = vec![0i64; degree];
            let top = cur[degree - 1];
            for i in (1..degree).rev() {
                next[i] = cur[i - 1];
            }
            // x^degree = -(poly[0] + poly[1] x + ... ) since Phi is monic
            for i in 0..degree {
                next[i] -= top * poly[i];
            }
            cur = next;
        }
        CycField {
            order: m,
            degree,
            poly,
            powers,
        }
    }

    /// Reduce an exponent histogram (sum of counts[e] zeta^e) to integer coordinates.
    pub fn reduce_counts(&self, counts: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.degree];
        for (e, &c) in counts.iter().enumerate() {
            if c != 0 {
                for (o, &v) in out.iter_mut().zip(&self.powers[e % self.order as usize]) {
                    *o += c * v;
                }
            }
        }
        out
    }
}

/// Shared per-order field tables.
pub fn field(m: u64) -> Arc<CycField> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<CycField>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(f) = cache.read().expect("field cache").get(&m) {
        return f.clone();
    }
    let mut w = cache.write().expect("field cache");
    w.entry(m).or_insert_with(|| Arc::new(CycField::build(m))).clone()
}

/// Element of Q(zeta_m).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycNum {
    order: u64,
    coeffs: Vec<BigRational>,
}

fn rat(i: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(i))
}

impl CycNum {
    pub fn zero(m: u64) -> Self {
        CycNum {
            order: m,
            coeffs: vec![BigRational::zero(); euler_phi(m) as usize],
        }
    }

    pub fn from_int(m: u64, v: i64) -> Self {
        Self::from_rational(m, rat(v))
    }

    pub fn from_rational(m: u64, v: BigRational) -> Self {
        let mut z = Self::zero(m);
        z.coeffs[0] = v;
        z
    }

    pub fn one(m: u64) -> Self {
        Self::from_int(m, 1)
    }

    /// zeta_m^e.
    pub fn zeta_pow(m: u64, e: u64) -> Self {
        let f = field(m);
        let mut counts = vec![0i64; m as usize];
        counts[(e % m) as usize] = 1;
        Self::from_reduced_ints(m, &f.reduce_counts(&counts))
    }

    /// Sum of counts[e] * zeta_m^e.
    pub fn from_counts(m: u64, counts: &[i64]) -> Self {
        let f = field(m);
        Self::from_reduced_ints(m, &f.reduce_counts(counts))
    }

    pub fn from_reduced_ints(m: u64, ints: &[i64]) -> Self {
        let deg = euler_phi(m) as usize;
        assert_eq!(ints.len(), deg);
        CycNum {
            order: m,
            coeffs: ints.iter().map(|&i| rat(i)).collect(),
        }
    }

    pub fn from_coeffs(m: u64, coeffs: Vec<BigRational>) -> Self {
        assert_eq!(coeffs.len(), euler_phi(m) as usize);
        CycNum { order: m, coeffs }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        let r = self.as_rational()?;
        if r.is_integer() {
            r.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        CycNum {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn check(&self, other: &Self) {
        assert_eq!(
            self.order, other.order,
            "cyclotomic orders differ: {} vs {}",
            self.order, other.order
        );
    }

    /// Image under zeta_m -> zeta_M^(M/m), for m dividing M.
    pub fn lift_to(&self, big: u64) -> Self {
        assert_eq!(big % self.order, 0);
        let step = big / self.order;
        let mut acc = CycNum::zero(big);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = &acc + &CycNum::zeta_pow(big, i as u64 * step).scale(c);
            }
        }
        acc
    }

    /// Complex conjugate (zeta -> zeta^-1).
    pub fn conj(&self) -> Self {
        let m = self.order;
        let mut acc = CycNum::zero(m);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = &acc + &CycNum::zeta_pow(m, (m - i as u64 % m) % m).scale(c);
            }
        }
        acc
    }

    /// Multiplicative inverse via the multiplication matrix; None for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let m = self.order;
        let deg = self.coeffs.len();
        // columns: self * zeta^j
        let mut cols: Vec<Vec<BigRational>> = Vec::with_capacity(deg);
        for j in 0..deg {
            cols.push((self * &CycNum::zeta_pow(m, j as u64)).coeffs);
        }
        let mut a: Vec<Vec<BigRational>> = (0..deg)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..deg).map(|j| cols[j][i].clone()).collect();
                row.push(if i == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        let x = super::linalg::solve_rational(&mut a)?;
        Some(CycNum::from_coeffs(m, x))
    }

    pub fn embed(&self) -> Complex64 {
        let m = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let v = c.to_f64().unwrap_or(f64::NAN);
                Complex64::from_polar(v, 2.0 * std::f64::consts::PI * i as f64 / m)
            })
            .sum()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rational_to_string).collect()
    }

    pub fn from_strings(m: u64, s: &[String]) -> Result<Self, String> {
        if s.len() != euler_phi(m) as usize {
            return Err(format!(
                "expected {} coefficients for order {}, got {}",
                euler_phi(m),
                m,
                s.len()
            ));
        }
        let coeffs = s
            .iter()
            .map(|x| parse_rational(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CycNum { order: m, coeffs })
    }
}

pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
    let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(BigRational::new(n, d))
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{i}"),
            };
            let term = if mono.is_empty() {
                c.to_string()
            } else if c.is_one() {
                mono
            } else if (-c).is_one() {
                format!("-{mono}")
            } else {
                format!("{c}*{mono}")
            };
            terms.push(term);
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        let mut s = terms[0].clone();
        for t in &terms[1..] {
            if let Some(rest) = t.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(rest);
            } else {
                s.push_str(" + ");
                s.push_str(t);
            }
        }
        if self.order > 2 && self.coeffs.iter().skip(1).any(|c| !c.is_zero()) {
            write!(f, "{s} (z=zeta_{})", self.order)
        } else {
            write!(f, "{s}")
        }
    }
}

impl Add for &CycNum {
    type Output = CycNum;
    fn add(self, rhs: &CycNum) -> CycNum {
        self.check(rhs);
        CycNum {
            order: self.order,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CycNum {
    type Output = CycNum;
    fn sub(self, rhs: &CycNum) -> CycNum {
        self.check(rhs);
        CycNum {
            order: self.order,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &CycNum {
    type Output = CycNum;
    fn mul(self, rhs: &CycNum) -> CycNum {
        self.check(rhs);
        let f = field(self.order);
        let deg = f.degree;
        let mut prod = vec![BigRational::zero(); 2 * deg - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        // reduce by the monic Phi_m from the top
        for top in (deg..prod.len()).rev() {
            let c = std::mem::take(&mut prod[top]);
            if c.is_zero() {
                continue;
            }
            for (i, &pi) in f.poly.iter().enumerate().take(deg) {
                if pi != 0 {
                    prod[top - deg + i] -= &c * rat(pi);
                }
            }
        }
        prod.truncate(deg);
        CycNum {
            order: self.order,
            coeffs: prod,
        }
    }
}

impl Add for CycNum {
    type Output = CycNum;
    fn add(self, rhs: CycNum) -> CycNum {
        &self + &rhs
    }
}

impl Sub for CycNum {
    type Output = CycNum;
    fn sub(self, rhs: CycNum) -> CycNum {
        &self - &rhs
    }
}

impl Mul for CycNum {
    type Output = CycNum;
    fn mul(self, rhs: CycNum) -> CycNum {
        &self * &rhs
    }
}

#[derive(Serialize, Deserialize)]
struct CycNumRepr {
    order: u64,
    coeffs: Vec<String>,
}

impl Serialize for CycNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CycNumRepr {
            order: self.order,
            coeffs: self.to_strings(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = CycNumRepr::deserialize(d)?;
        CycNum::from_strings(r.order, &r.coeffs).map_err(serde::de::Error::custom)
    }
}

/// True if the rational is a nonnegative integer.
pub fn is_nonneg_int(r: &BigRational) -> bool {
    r.is_integer() && !r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(2), vec![1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_poly(9).len(), 7);
    }

    #[test]
    fn zeta_has_order_m() {
        for m in [1u64, 2, 3, 4, 5, 6, 8, 9, 12, 20] {
            let z = CycNum::zeta_pow(m, 1);
            let mut acc = CycNum::one(m);
            for k in 1..=m {
                acc = &acc * &z;
                assert_eq!(acc == CycNum::one(m), k == m, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn inverse_and_conjugate() {
        let m = 12;
        let a = &CycNum::zeta_pow(m, 1) + &CycNum::from_int(m, 3);
        let b = a.inv().unwrap();
        assert_eq!(&a * &b, CycNum::one(m));
        let n = &a * &a.conj();
        assert!(n.embed().im.abs() < 1e-12);
        assert!((n.embed().re - (a.embed().norm_sqr())).abs() < 1e-9);
        assert!(CycNum::zero(m).inv().is_none());
    }

    #[test]
    fn serialization_roundtrip() {
        let a = CycNum::from_counts(9, &[1, 0, -2, 0, 0, 0, 0, 3, 0]);
        let s = serde_json::to_string(&a).unwrap();
        let b: CycNum = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        assert!(s.contains("/1"));
    }

    #[test]
    fn lift_preserves_value() {
        let a = &CycNum::zeta_pow(3, 1) + &CycNum::from_int(3, 2);
        let b = a.lift_to(12);
        assert!((a.embed() - b.embed()).norm() < 1e-12);
    }
}
