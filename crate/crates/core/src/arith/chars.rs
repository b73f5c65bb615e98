//! Dirichlet characters stored by exponents on fixed unit-group generators.
//!
//! Values are roots of unity of order dividing `order`; a value is kept as its
//! exponent e with chi(u) = exp(2 pi i e / order).

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use super::cyclo::CycNum;
use super::modular::{
    crt_pair, euler_phi, factorize, gcd, is_prime, lcm, mod_pow, unit_generator_orders,
    unit_generators,
};
use super::ArithError;

/// Discrete logarithms on (Z/p^a)^x with respect to [`unit_generators`].
#[derive(Debug)]
pub struct UnitGroup {
    pub p: u64,
    pub a: u32,
    pub q: u64,
    pub gens: Vec<u64>,
    pub orders: Vec<u64>,
    /// Mixed-radix packed log per residue; u32::MAX off units.
    log: Vec<u32>,
}

impl UnitGroup {
    fn build(p: u64, a: u32) -> Result<Self, ArithError> {
        let gens = unit_generators(p, a)?;
        let orders = unit_generator_orders(p, a)?;
        let q = p.pow(a);
        let mut log = vec![u32::MAX; q as usize];
        let total: u64 = orders.iter().product();
        for packed in 0..total {
            let mut rest = packed;
            let mut x = 1 % q;
            for (g, o) in gens.iter().zip(&orders) {
                let e = rest % o;
                rest /= o;
                x = x * mod_pow(*g, e, q) % q;
            }
            log[x as usize] = packed as u32;
        }
        if q == 1 {
            log[0] = 0;
        }
        Ok(UnitGroup {
            p,
            a,
            q,
            gens,
            orders,
            log,
        })
    }

    /// Exponent vector of u on the generators; None for non-units.
    pub fn dlog(&self, u: u64) -> Option<Vec<u64>> {
        let packed = self.log[(u % self.q) as usize];
        if packed == u32::MAX {
            return None;
        }
        let mut rest = packed as u64;
        Some(
            self.orders
                .iter()
                .map(|o| {
                    let e = rest % o;
                    rest /= o;
                    e
                })
                .collect(),
        )
    }
}

/// Shared unit-group tables keyed by (p, a).
pub fn unit_group(p: u64, a: u32) -> Result<Arc<UnitGroup>, ArithError> {
    static CACHE: OnceLock<RwLock<BTreeMap<(u64, u32), Arc<UnitGroup>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(BTreeMap::new()));
    if let Some(g) = cache.read().expect("unit cache").get(&(p, a)) {
        return Ok(g.clone());
    }
    let g = Arc::new(UnitGroup::build(p, a)?);
    cache
        .write()
        .expect("unit cache")
        .insert((p, a), g.clone());
    Ok(g)
}

/// One prime-power component: value at generator i is exp(2 pi i num[i] / orders[i]).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub prime: u64,
    pub exponent: u32,
    pub gen_values: Vec<u64>,
}

/// Dirichlet character modulo N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirChar {
    modulus: u64,
    components: Vec<Component>,
    order: u64,
    /// Value exponent (mod order) at each generator, per component.
    gen_exps: Vec<Vec<u64>>,
}

impl DirChar {
    /// Build from per-prime generator values; gen_values[i] is read modulo the i-th generator order.
    pub fn from_components(modulus: u64, mut comps: Vec<Component>) -> Result<Self, ArithError> {
        if modulus == 0 {
            return Err(ArithError::BadModulus(modulus));
        }
        let fac = factorize(modulus);
        comps.sort_by_key(|c| c.prime);
        let mut full = Vec::new();
        for (p, a) in &fac {
            let given = comps.iter().find(|c| c.prime == *p);
            let orders = unit_generator_orders(*p, *a)?;
            let vals = match given {
                Some(c) => {
                    if c.exponent != *a || c.gen_values.len() != orders.len() {
                        return Err(ArithError::MalformedCharacter(format!(
                            "component at {p} must have exponent {a} and {} generator values",
                            orders.len()
                        )));
                    }
                    c.gen_values.iter().zip(&orders).map(|(v, o)| v % o).collect()
                }
                None => vec![0; orders.len()],
            };
            full.push(Component {
                prime: *p,
                exponent: *a,
                gen_values: vals,
            });
        }
        if comps.iter().any(|c| !fac.iter().any(|(p, _)| *p == c.prime)) {
            return Err(ArithError::MalformedCharacter(
                "component prime does not divide the modulus".into(),
            ));
        }
        let mut order = 1u64;
        for c in &full {
            let orders = unit_generator_orders(c.prime, c.exponent)?;
            for (v, o) in c.gen_values.iter().zip(&orders) {
                order = lcm(order, o / gcd(*v, *o));
            }
        }
        let gen_exps = full
            .iter()
            .map(|c| {
                let orders = unit_generator_orders(c.prime, c.exponent).expect("checked");
                c.gen_values
                    .iter()
                    .zip(&orders)
                    .map(|(v, o)| v * order / o % order)
                    .collect()
            })
            .collect();
        Ok(DirChar {
            modulus,
            components: full,
            order,
            gen_exps,
        })
    }

    pub fn trivial(modulus: u64) -> Result<Self, ArithError> {
        Self::from_components(modulus, vec![])
    }

    /// Conrey label j (gcd(j, N) = 1).
    pub fn from_conrey(modulus: u64, j: u64) -> Result<Self, ArithError> {
        if modulus == 0 || gcd(j % modulus.max(1), modulus) != 1 && modulus > 1 {
            return Err(ArithError::MalformedCharacter(format!(
                "Conrey label {j} is not a unit mod {modulus}"
            )));
        }
        let mut comps = Vec::new();
        for (p, a) in factorize(modulus) {
            let q = p.pow(a);
            let g = unit_group(p, a)?;
            let lj = g.dlog(j % q).expect("unit");
            let gen_values = if p == 2 {
                match a {
                    1 => vec![],
                    2 => vec![lj[0]],
                    _ => {
                        // j = (-1)^b 5^c; chi_j(-1) = (-1)^b, chi_j(5) = e(c / 2^(a-2))
                        vec![lj[0], lj[1]]
                    }
                }
            } else {
                // chi_j(g) = e(log_g(j) / phi(p^a))
                vec![lj[0]]
            };
            comps.push(Component {
                prime: p,
                exponent: a,
                gen_values,
            });
        }
        Self::from_components(modulus, comps)
    }

    /// Build from a value function on units mod N, validating multiplicativity exhaustively.
    pub fn from_value_fn(
        modulus: u64,
        order: u64,
        f: impl Fn(u64) -> u64,
    ) -> Result<Self, ArithError> {
        let mut comps = Vec::new();
        for (p, a) in factorize(modulus) {
            let q = p.pow(a);
            let rest = modulus / q;
            let orders = unit_generator_orders(p, a)?;
            let gens = unit_generators(p, a)?;
            let mut vals = Vec::new();
            for (g, o) in gens.iter().zip(&orders) {
                let x = crt_pair(*g, q, 1 % rest, rest);
                let e = f(x) % order;
                // e / order must be a multiple of 1 / o
                if !(e * o).is_multiple_of(order) {
                    return Err(ArithError::MalformedCharacter(format!(
                        "value at generator {g} mod {q} has order not dividing {o}"
                    )));
                }
                vals.push(e * o / order);
            }
            comps.push(Component {
                prime: p,
                exponent: a,
                gen_values: vals,
            });
        }
        let chi = Self::from_components(modulus, comps)?;
        for u in 1..modulus {
            if gcd(u, modulus) != 1 {
                continue;
            }
            let want = f(u) % order;
            if !order.is_multiple_of(chi.order) {
                return Err(ArithError::MalformedCharacter(format!(
                    "value table mod {modulus} is not a character of order dividing {order}"
                )));
            }
            let got = chi.exp(u as i64).expect("unit") * (order / chi.order) % order;
            if want != got {
                return Err(ArithError::MalformedCharacter(format!(
                    "value table is not multiplicative at {u} mod {modulus}"
                )));
            }
        }
        Ok(chi)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// Value exponent mod `order`; None for non-units.
    pub fn exp(&self, u: i64) -> Option<u64> {
        let n = self.modulus;
        let u = u.rem_euclid(n as i64) as u64;
        if gcd(u, n) != 1 && n > 1 {
            return None;
        }
        let mut e = 0u64;
        for (c, ge) in self.components.iter().zip(&self.gen_exps) {
            let g = unit_group(c.prime, c.exponent).expect("valid");
            let l = g.dlog(u % g.q).expect("unit");
            for (li, gi) in l.iter().zip(ge) {
                e = (e + li * gi) % self.order;
            }
        }
        Some(e)
    }

    /// Value exponent rescaled to a multiple `m` of the order.
    pub fn exp_in(&self, u: i64, m: u64) -> Option<u64> {
        assert_eq!(m % self.order, 0);
        self.exp(u).map(|e| e * (m / self.order))
    }

    /// chi(u) in Q(zeta_order); zero for non-units.
    pub fn value(&self, u: i64) -> CycNum {
        match self.exp(u) {
            Some(e) => CycNum::zeta_pow(self.order, e),
            None => CycNum::zero(self.order),
        }
    }

    /// chi(u) as a complex number; zero for non-units.
    pub fn value_c64(&self, u: i64) -> num_complex::Complex64 {
        match self.exp(u) {
            Some(e) => num_complex::Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * e as f64 / self.order as f64,
            ),
            None => num_complex::Complex64::new(0.0, 0.0),
        }
    }

    /// Component at the prime p as a character modulo p^a (trivial mod 1 if p does not divide N).
    pub fn component(&self, p: u64) -> DirChar {
        match self.components.iter().find(|c| c.prime == p) {
            Some(c) => DirChar::from_components(c.prime.pow(c.exponent), vec![c.clone()])
                .expect("valid component"),
            None => DirChar::trivial(1).expect("modulus 1"),
        }
    }

    /// Prime-to-p part chi^(M) as a character modulo M = N / p^a.
    pub fn away_from(&self, p: u64) -> DirChar {
        let comps: Vec<Component> = self
            .components
            .iter()
            .filter(|c| c.prime != p)
            .cloned()
            .collect();
        let m: u64 = comps.iter().map(|c| c.prime.pow(c.exponent)).product();
        DirChar::from_components(m, comps).expect("valid components")
    }

    /// Components chi^(p_i^a_i), one per prime power exactly dividing N.
    pub fn crt_decompose(&self) -> Vec<DirChar> {
        self.components.iter().map(|c| self.component(c.prime)).collect()
    }

    pub fn conj(&self) -> DirChar {
        let comps = self
            .components
            .iter()
            .map(|c| {
                let orders = unit_generator_orders(c.prime, c.exponent).expect("valid");
                Component {
                    prime: c.prime,
                    exponent: c.exponent,
                    gen_values: c
                        .gen_values
                        .iter()
                        .zip(&orders)
                        .map(|(v, o)| (o - v) % o)
                        .collect(),
                }
            })
            .collect();
        DirChar::from_components(self.modulus, comps).expect("valid")
    }

    /// chi-bar^(p^a) chi^(M): conjugate only the component at p.
    pub fn flip_at(&self, p: u64) -> DirChar {
        let comps = self
            .components
            .iter()
            .map(|c| {
                if c.prime != p {
                    return c.clone();
                }
                let orders = unit_generator_orders(c.prime, c.exponent).expect("valid");
                Component {
                    prime: c.prime,
                    exponent: c.exponent,
                    gen_values: c
                        .gen_values
                        .iter()
                        .zip(&orders)
                        .map(|(v, o)| (o - v) % o)
                        .collect(),
                }
            })
            .collect();
        DirChar::from_components(self.modulus, comps).expect("valid")
    }

    /// Conductor exponent of the component at p (0 if trivial there).
    pub fn conductor_exponent(&self, p: u64) -> u32 {
        match self.components.iter().find(|c| c.prime == p) {
            Some(c) => {
                let pc = PChar::from_dirichlet(&self.component(p)).expect("prime power");
                debug_assert_eq!(pc.n, c.exponent);
                pc.r
            }
            None => 0,
        }
    }

    pub fn conductor(&self) -> u64 {
        self.components
            .iter()
            .map(|c| c.prime.pow(self.conductor_exponent(c.prime)))
            .product()
    }

    /// The character modulo L (cond | L | N) agreeing with chi on units coprime to N.
    pub fn restrict_to(&self, l: u64) -> Result<DirChar, ArithError> {
        if !self.modulus.is_multiple_of(l) || !l.is_multiple_of(self.conductor()) {
            return Err(ArithError::MalformedCharacter(format!(
                "cannot restrict a character mod {} of conductor {} to modulus {l}",
                self.modulus,
                self.conductor()
            )));
        }
        let n = self.modulus;
        let lift = |u: u64| -> u64 {
            let mut x = u % l.max(1);
            while gcd(x, n) != 1 && n > 1 {
                x += l;
            }
            x
        };
        Self::from_value_fn(l, self.order, |u| self.exp(lift(u) as i64).unwrap_or(0))
    }

    /// Conrey label, found by search over units mod N.
    pub fn conrey_label(&self) -> u64 {
        let n = self.modulus;
        if n == 1 {
            return 1;
        }
        (1..n)
            .filter(|&j| gcd(j, n) == 1)
            .find(|&j| DirChar::from_conrey(n, j).map(|c| c == *self).unwrap_or(false))
            .expect("every character has a Conrey label")
    }

    /// Enumerate all characters mod N.
    pub fn all(modulus: u64) -> Result<Vec<DirChar>, ArithError> {
        (1..=modulus.max(1))
            .filter(|&j| gcd(j, modulus) == 1 || modulus == 1)
            .map(|j| DirChar::from_conrey(modulus, j % modulus.max(1)))
            .collect()
    }

    /// Parity chi(-1) as +1 or -1.
    pub fn parity(&self) -> i32 {
        match self.exp(-1) {
            Some(0) => 1,
            _ => -1,
        }
    }
}

/// Character of (Z/p^n)^x with its conductor exponent r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PChar {
    pub p: u64,
    pub n: u32,
    pub q: u64,
    pub order: u64,
    pub r: u32,
    table: Vec<u32>,
}

pub const NON_UNIT: u32 = u32::MAX;

impl PChar {
    /// Build from a value-exponent table indexed by residues mod p^n (NON_UNIT off units).
    pub fn from_table(p: u64, n: u32, order: u64, table: Vec<u32>) -> Result<Self, ArithError> {
        if !is_prime(p) {
            return Err(ArithError::NotPrime(p));
        }
        let q = p.pow(n);
        if table.len() as u64 != q {
            return Err(ArithError::MalformedCharacter("table length".into()));
        }
        let r = conductor(p, n, order, &table)?;
        // shrink order to the true order
        let mut true_order = 1u64;
        for &e in &table {
            if e != NON_UNIT {
                true_order = lcm(true_order, order / gcd(e as u64, order));
            }
        }
        let table = table
            .into_iter()
            .map(|e| {
                if e == NON_UNIT {
                    e
                } else {
                    (e as u64 * true_order / order) as u32
                }
            })
            .collect();
        Ok(PChar {
            p,
            n,
            q,
            order: true_order,
            r,
            table,
        })
    }

    pub fn from_dirichlet(chi: &DirChar) -> Result<Self, ArithError> {
        let fac = factorize(chi.modulus());
        if fac.len() != 1 {
            return Err(ArithError::BadModulus(chi.modulus()));
        }
        let (p, n) = fac[0];
        let q = chi.modulus();
        let table: Vec<u32> = (0..q)
            .map(|u| chi.exp(u as i64).map(|e| e as u32).unwrap_or(NON_UNIT))
            .collect();
        let r = conductor_of_character(p, n, chi.order(), &table);
        Ok(PChar {
            p,
            n,
            q,
            order: chi.order(),
            r,
            table,
        })
    }

    pub fn trivial(p: u64, n: u32) -> Result<Self, ArithError> {
        Self::from_dirichlet(&DirChar::trivial(p.pow(n))?)
    }

    /// All characters mod p^n, ordered by Conrey label.
    pub fn all(p: u64, n: u32) -> Result<Vec<(u64, PChar)>, ArithError> {
        let q = p.pow(n);
        (1..=q)
            .filter(|&j| gcd(j, q) == 1)
            .map(|j| {
                let jj = j % q;
                Ok((jj.max(1), PChar::from_dirichlet(&DirChar::from_conrey(q, jj)?)?))
            })
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// Value exponent at a unit u.
    pub fn exp(&self, u: u64) -> Result<u32, ArithError> {
        let e = self.table[(u % self.q) as usize];
        if e == NON_UNIT {
            Err(ArithError::NonUnit(u, self.q))
        } else {
            Ok(e)
        }
    }

    /// Value exponent at a unit, panicking on non-units (internal hot paths).
    #[inline]
    pub fn exp_unit(&self, u: u64) -> u32 {
        let e = self.table[(u % self.q) as usize];
        debug_assert_ne!(e, NON_UNIT, "non-unit {u} mod {}", self.q);
        e
    }

    pub fn eval(&self, u: u64) -> Result<CycNum, ArithError> {
        Ok(CycNum::zeta_pow(self.order, self.exp(u)? as u64))
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    /// Exponent of the conjugate character.
    #[inline]
    pub fn conj_exp(&self, e: u32) -> u32 {
        ((self.order - e as u64 % self.order) % self.order) as u32
    }
}

/// Minimal r with chi trivial on 1 + p^r Z (r = 0 iff chi is trivial); validates multiplicativity.
pub fn conductor(p: u64, n: u32, order: u64, table: &[u32]) -> Result<u32, ArithError> {
    let q = p.pow(n);
    for u in 0..q {
        for v in 0..q {
            let (a, b) = (table[u as usize], table[v as usize]);
            let c = table[(u * v % q) as usize];
            if (a == NON_UNIT || b == NON_UNIT) != (c == NON_UNIT) {
                return Err(ArithError::MalformedCharacter("unit pattern".into()));
            }
            if a != NON_UNIT && ((a as u64 + b as u64) % order) != c as u64 % order {
                return Err(ArithError::MalformedCharacter(format!(
                    "not multiplicative at ({u}, {v}) mod {q}"
                )));
            }
        }
        if gcd(u, p) == 1 && table[u as usize] == NON_UNIT || gcd(u, p) != 1 && table[u as usize] != NON_UNIT {
            return Err(ArithError::MalformedCharacter("unit pattern".into()));
        }
    }
    Ok(conductor_of_character(p, n, order, table))
}

fn conductor_of_character(p: u64, n: u32, order: u64, table: &[u32]) -> u32 {
    let q = p.pow(n);
    if (0..q).all(|u| table[u as usize] == NON_UNIT || (table[u as usize] as u64).is_multiple_of(order)) {
        return 0;
    }
    for r in 1..=n {
        let pr = p.pow(r);
        let trivial = (0..q / pr).all(|t| (table[((1 + t * pr) % q) as usize] as u64).is_multiple_of(order));
        if trivial {
            return r;
        }
    }
    n
}

/// Number of characters mod N (sanity helper).
pub fn character_count(n: u64) -> u64 {
    euler_phi(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conductor_examples() {
        let triv = PChar::trivial(3, 2).unwrap();
        assert_eq!(triv.r, 0);
        let faithful = PChar::from_dirichlet(&DirChar::from_conrey(9, 2).unwrap()).unwrap();
        assert_eq!(faithful.order, 6);
        assert_eq!(faithful.r, 2);
        // chi_8 mod 9 = Legendre symbol mod 3
        let quad = PChar::from_dirichlet(&DirChar::from_conrey(9, 8).unwrap()).unwrap();
        assert_eq!(quad.order, 2);
        assert_eq!(quad.r, 1);
        let prim6 = faithful.eval(2).unwrap();
        let mut acc = CycNum::one(6);
        let mut k = 0;
        loop {
            acc = &acc * &prim6;
            k += 1;
            if acc == CycNum::one(6) {
                break;
            }
        }
        assert_eq!(k, 6);
    }

    #[test]
    fn non_multiplicative_table_rejected() {
        let mut t = vec![NON_UNIT; 9];
        for u in [1, 2, 4, 5, 7, 8] {
            t[u] = 0;
        }
        t[2] = 1;
        assert!(PChar::from_table(3, 2, 6, t).is_err());
    }

    #[test]
    fn crt_components_multiply_back() {
        // order-4 character mod 15 supported at 5
        let chi = DirChar::from_conrey(15, 7).unwrap();
        let comps = chi.crt_decompose();
        assert_eq!(comps.len(), 2);
        assert!(comps[0].is_trivial());
        assert_eq!(comps[1].order(), 4);
        assert_eq!(chi.order(), 4);
        for u in 1..15i64 {
            let lhs = chi.value(u);
            let rhs = &comps[0].value(u).lift_to(4) * &comps[1].value(u);
            assert_eq!(lhs, rhs, "u={u}");
        }
        let triv = DirChar::trivial(12).unwrap();
        assert!(triv.crt_decompose().iter().all(|c| c.is_trivial()));
        assert_eq!(triv.crt_decompose().len(), 2);
    }

    #[test]
    fn values_on_units_and_non_units() {
        let chi = DirChar::from_conrey(21, 13).unwrap();
        assert_eq!(chi.exp(1), Some(0));
        assert_eq!(chi.exp(3), None);
        assert!(chi.value(7).is_zero());
        assert!(matches!(chi.exp(-1), Some(0) | Some(_)));
        assert_eq!(chi.conductor(), 7);
        assert_eq!(chi.restrict_to(7).unwrap(), DirChar::from_conrey(7, 6).unwrap());
        let p = PChar::trivial(3, 2).unwrap();
        assert!(matches!(p.exp(3), Err(ArithError::NonUnit(3, 9))));
    }

    #[test]
    fn flip_and_labels() {
        let chi = DirChar::from_conrey(14, 9).unwrap();
        assert_eq!(chi.flip_at(7).conrey_label(), 11);
        assert_eq!(chi.conj().conj(), chi);
        assert_eq!(DirChar::from_conrey(27, 10).unwrap().flip_at(3).conrey_label(), 19);
    }
}
