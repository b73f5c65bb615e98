//! Integer and modular helpers: primality, factorization, inverses, unit groups.

use num_integer::Integer;

use super::ArithError;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as (prime, exponent) pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .map(|(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// p-adic valuation of x, capped at `cap` (x = 0 returns `cap`).
pub fn valuation(x: u64, p: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    let mut y = x;
    while y.is_multiple_of(p) && v < cap {
        y /= p;
        v += 1;
    }
    v
}

pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

/// Reduce a signed integer into [0, m).
pub fn rem(x: i64, m: u64) -> u64 {
    x.rem_euclid(m as i64) as u64
}

/// Multiplicative order of a unit u modulo m.
pub fn mult_order(u: u64, m: u64) -> u64 {
    let phi = euler_phi(m);
    let mut best = phi;
    for d in divisors(phi) {
        if mod_pow(u, d, m) == 1 % m {
            best = d;
            break;
        }
    }
    best
}

/// Least g that is a primitive root modulo p^2 (and hence modulo every power of an odd prime p).
pub fn conrey_primitive_root(p: u64) -> u64 {
    assert!(p > 2 && is_prime(p));
    let modulus = if p < 1 << 20 { p * p } else { p };
    let phi = euler_phi(modulus);
    (2..modulus)
        .find(|&g| g % p != 0 && mult_order(g, modulus) == phi)
        .expect("odd prime powers are cyclic")
}

/// Generators of (Z/p^n)^x: the Conrey primitive root for odd p, {-1, 5} for 2^n with n >= 3.
pub fn unit_generators(p: u64, n: u32) -> Result<Vec<u64>, ArithError> {
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    if n == 0 {
        return Err(ArithError::BadExponent(n));
    }
    let q = p.pow(n);
    if p == 2 {
        return Ok(match n {
            1 => vec![],
            2 => vec![3],
            _ => vec![q - 1, 5],
        });
    }
    Ok(vec![conrey_primitive_root(p) % q])
}

/// Orders of the generators returned by [`unit_generators`].
pub fn unit_generator_orders(p: u64, n: u32) -> Result<Vec<u64>, ArithError> {
    let q = p.pow(n);
    Ok(unit_generators(p, n)?
        .into_iter()
        .map(|g| mult_order(g, q))
        .collect())
}

/// Chinese remainder: the x mod m1*m2 with x = a1 mod m1 and x = a2 mod m2 (coprime moduli).
pub fn crt_pair(a1: u64, m1: u64, a2: u64, m2: u64) -> u64 {
    let inv = mod_inv(m1 % m2, m2).expect("coprime moduli");
    let t = ((a2 + m2 - a1 % m2) % m2) as u128 * inv as u128 % m2 as u128;
    (a1 as u128 + m1 as u128 * t) as u64 % (m1 * m2)
}

/// Extended gcd on signed integers: (g, x, y) with a x + b y = g >= 0.
pub fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_match_known_groups() {
        assert_eq!(unit_generators(3, 2).unwrap(), vec![2]);
        assert_eq!(mult_order(2, 9), 6);
        assert!(unit_generators(2, 1).unwrap().is_empty());
        assert_eq!(unit_generators(2, 4).unwrap(), vec![15, 5]);
        assert_eq!(unit_generator_orders(2, 4).unwrap(), vec![2, 4]);
        assert!(matches!(unit_generators(6, 1), Err(ArithError::NotPrime(6))));
    }

    #[test]
    fn generators_generate() {
        for &(p, n) in &[(2u64, 1u32), (2, 2), (2, 3), (2, 5), (3, 1), (3, 3), (5, 3), (7, 2)] {
            let q = p.pow(n);
            let gens = unit_generators(p, n).unwrap();
            let mut seen = vec![false; q as usize];
            let mut stack = vec![1 % q];
            seen[(1 % q) as usize] = true;
            while let Some(x) = stack.pop() {
                for &g in &gens {
                    let y = x * g % q;
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        stack.push(y);
                    }
                }
            }
            let count = seen.iter().filter(|&&b| b).count() as u64;
            assert_eq!(count, euler_phi(q).max(1), "p={p} n={n}");
        }
    }

    #[test]
    fn crt_and_inverse() {
        assert_eq!(crt_pair(2, 3, 4, 5), 14);
        assert_eq!(mod_inv(2, 9), Some(5));
        assert_eq!(mod_inv(3, 9), None);
        assert_eq!(valuation(0, 3, 4), 4);
        assert_eq!(valuation(18, 3, 4), 2);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }
}
