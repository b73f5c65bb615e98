//! Exact linear algebra over Q, Q(zeta_m) and prime fields F_q.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::cyclo::CycNum;
use super::modular::{factorize, is_prime, mod_inv, mod_pow};

/// Solve a square system given as an augmented matrix [A | b]; None if singular.
pub fn solve_rational(aug: &mut [Vec<BigRational>]) -> Option<Vec<BigRational>> {
    let n = aug.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, piv);
        let inv = BigRational::one() / &aug[col][col];
        for v in aug[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                let pivot_row = aug[col].clone();
                for (x, y) in aug[r].iter_mut().zip(pivot_row.iter()) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(aug.iter().map(|row| row[n].clone()).collect())
}

/// Rank over Q(zeta_m) by Gaussian elimination with exact pivots.
pub fn rank_cyclotomic(rows: &[Vec<CycNum>]) -> usize {
    let mut a: Vec<Vec<CycNum>> = rows.to_vec();
    let nrows = a.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = a[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = a[rank][col].inv().expect("nonzero pivot");
        let prow: Vec<CycNum> = a[rank].iter().map(|x| x * &inv).collect();
        for r in (rank + 1)..nrows {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..ncols {
                let t = &f * &prow[c];
                a[r][c] = &a[r][c] - &t;
            }
        }
        a[rank] = prow;
        rank += 1;
    }
    rank
}

/// Smallest prime q > lower with q = 1 mod m.
pub fn prime_one_mod(m: u64, lower: u64) -> u64 {
    let mut q = lower + 1;
    q += (m + 1 - q % m) % m;
    loop {
        if q % m == 1 % m && is_prime(q) {
            return q;
        }
        q += m;
    }
}

/// An element of exact multiplicative order m in F_q (requires m | q-1).
pub fn root_of_unity(m: u64, q: u64) -> u64 {
    assert_eq!((q - 1) % m, 0);
    if m == 1 {
        return 1;
    }
    let primes: Vec<u64> = factorize(m).into_iter().map(|(p, _)| p).collect();
    for g in 2..q {
        let w = mod_pow(g, (q - 1) / m, q);
        if primes.iter().all(|&p| mod_pow(w, m / p, q) != 1) {
            return w;
        }
    }
    unreachable!("F_q^x is cyclic")
}

/// Prime-field context with a chosen primitive m-th root of unity.
#[derive(Clone, Debug)]
pub struct Fq {
    pub q: u64,
    pub m: u64,
    pub root: u64,
    powers: Vec<u64>,
}

impl Fq {
    /// Field with q = 1 mod m and q > 2^30, so products fit in u64.
    pub fn for_order(m: u64) -> Self {
        Self::with_lower_bound(m, 1 << 30)
    }

    pub fn with_lower_bound(m: u64, lower: u64) -> Self {
        let q = prime_one_mod(m, lower);
        let root = root_of_unity(m, q);
        let mut powers = Vec::with_capacity(m as usize);
        let mut x = 1u64;
        for _ in 0..m {
            powers.push(x);
            x = x * root % q;
        }
        Fq { q, m, root, powers }
    }

    pub fn zeta_pow(&self, e: u64) -> u64 {
        self.powers[(e % self.m) as usize]
    }

    pub fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.q as i64) as u64
    }

    pub fn inv(&self, v: u64) -> u64 {
        mod_inv(v, self.q).expect("nonzero in F_q")
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    /// Image of sum counts[e] zeta^e.
    pub fn from_counts(&self, counts: &[i64]) -> u64 {
        counts.iter().enumerate().fold(0u64, |acc, (e, &c)| {
            if c == 0 {
                acc
            } else {
                self.add(acc, self.mul(self.from_i64(c), self.zeta_pow(e as u64)))
            }
        })
    }

    /// Image of a CycNum whose coefficient denominators are invertible mod q.
    pub fn from_cyc(&self, x: &CycNum) -> u64 {
        let mut acc = 0u64;
        for (i, c) in x.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let num = big_mod(c.numer(), self.q);
            let den = big_mod(c.denom(), self.q);
            let v = self.mul(num, self.inv(den));
            acc = self.add(acc, self.mul(v, self.zeta_pow(i as u64)));
        }
        acc
    }

    pub fn rank(&self, mat: &[Vec<u64>]) -> usize {
        let mut a = mat.to_vec();
        let nrows = a.len();
        if nrows == 0 {
            return 0;
        }
        let ncols = a[0].len();
        let q = self.q;
        let mut rank = 0;
        for col in 0..ncols {
            let Some(piv) = (rank..nrows).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(rank, piv);
            let inv = self.inv(a[rank][col]);
            for c in col..ncols {
                a[rank][c] = a[rank][c] * inv % q;
            }
            let prow = a[rank].clone();
            for row in a.iter_mut().skip(rank + 1) {
                let f = row[col];
                if f == 0 {
                    continue;
                }
                for c in col..ncols {
                    row[c] = (row[c] + q - f * prow[c] % q) % q;
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn matmul(&self, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
        let n = a.len();
        let k = b.len();
        let m = if k > 0 { b[0].len() } else { 0 };
        let q = self.q;
        let mut out = vec![vec![0u64; m]; n];
        for i in 0..n {
            for l in 0..k {
                let x = a[i][l];
                if x == 0 {
                    continue;
                }
                for j in 0..m {
                    out[i][j] = (out[i][j] + x * b[l][j]) % q;
                }
            }
        }
        out
    }
}

fn big_mod(x: &num_bigint::BigInt, q: u64) -> u64 {
    use num_traits::ToPrimitive;
    let qb = num_bigint::BigInt::from(q);
    let r = ((x % &qb) + &qb) % &qb;
    r.to_u64().expect("reduced")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn rational_solve() {
        let mut a = vec![vec![r(2), r(1), r(5)], vec![r(1), r(3), r(10)]];
        let x = solve_rational(&mut a).unwrap();
        assert_eq!(x, vec![r(1), r(3)]);
        let mut s = vec![vec![r(1), r(2), r(1)], vec![r(2), r(4), r(2)]];
        assert!(solve_rational(&mut s).is_none());
    }

    #[test]
    fn fq_root_has_exact_order() {
        for m in [1u64, 2, 6, 18, 100] {
            let f = Fq::for_order(m);
            assert_eq!((f.q - 1) % m, 0);
            assert_eq!(mod_pow(f.root, m, f.q), 1);
            for d in 1..m {
                if m % d == 0 {
                    assert_ne!(mod_pow(f.root, d, f.q), 1);
                }
            }
        }
    }

    #[test]
    fn cyclotomic_rank_detects_dependence() {
        let m = 3;
        let z = CycNum::zeta_pow(m, 1);
        let one = CycNum::one(m);
        let rows = vec![
            vec![one.clone(), z.clone()],
            vec![z.clone(), &z * &z],
        ];
        assert_eq!(rank_cyclotomic(&rows), 1);
        let f = Fq::for_order(m);
        let img: Vec<Vec<u64>> = rows
            .iter()
            .map(|row| row.iter().map(|x| f.from_cyc(x)).collect())
            .collect();
        assert_eq!(f.rank(&img), 1);
    }
}
