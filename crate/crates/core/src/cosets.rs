//! GL2(Z/p^n), the subgroup K0(p^n) of upper-triangular-mod-p^n matrices, and
//! single/double coset bookkeeping.
//!
//! Right cosets K0 g are indexed by the bottom row of g as a point of P^1(Z/p^n);
//! left cosets g K0 by the first column.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::modular::{is_prime, mod_inv, rem, unit_generators, valuation};
use crate::arith::ArithError;

/// The level data (p, n, q = p^n).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Level {
    pub p: u64,
    pub n: u32,
    pub q: u64,
}

impl Level {
    pub fn new(p: u64, n: u32) -> Result<Self, ArithError> {
        if !is_prime(p) {
            return Err(ArithError::NotPrime(p));
        }
        if n == 0 || n > 30 || (n as f64) * (p as f64).log2() >= 31.0 {
            return Err(ArithError::BadExponent(n));
        }
        Ok(Level { p, n, q: p.pow(n) })
    }

    /// Number of right cosets of K0(p^n): p^(n-1)(p+1).
    pub fn index(&self) -> usize {
        (self.q + self.q / self.p) as usize
    }

    pub fn is_unit(&self, x: u64) -> bool {
        !x.is_multiple_of(self.p)
    }

    pub fn inv(&self, x: u64) -> u64 {
        mod_inv(x % self.q, self.q).expect("unit")
    }

    pub fn val(&self, x: u64) -> u32 {
        valuation(x % self.q, self.p, self.n)
    }

    pub fn pow_p(&self, j: u32) -> u64 {
        if j >= self.n {
            0
        } else {
            self.p.pow(j)
        }
    }
}

/// 2x2 matrix over Z/p^n with unit determinant.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatPn {
    pub lvl: Level,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl fmt::Debug for MatPn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]] mod {}", self.a, self.b, self.c, self.d, self.lvl.q)
    }
}

impl MatPn {
    pub fn new(lvl: Level, a: i64, b: i64, c: i64, d: i64) -> Self {
        let q = lvl.q;
        MatPn {
            lvl,
            a: rem(a, q),
            b: rem(b, q),
            c: rem(c, q),
            d: rem(d, q),
        }
    }

    /// Checked constructor rejecting non-unit determinants.
    pub fn try_new(lvl: Level, a: i64, b: i64, c: i64, d: i64) -> Option<Self> {
        let m = Self::new(lvl, a, b, c, d);
        lvl.is_unit(m.det()).then_some(m)
    }

    pub fn identity(lvl: Level) -> Self {
        Self::new(lvl, 1, 0, 0, 1)
    }

    /// w(1) = [[0, -1], [1, 0]].
    pub fn w(lvl: Level) -> Self {
        Self::new(lvl, 0, -1, 1, 0)
    }

    /// y(s) = [[1, 0], [s, 1]].
    pub fn y(lvl: Level, s: i64) -> Self {
        Self::new(lvl, 1, 0, s, 1)
    }

    /// x(t) = [[1, t], [0, 1]].
    pub fn x(lvl: Level, t: i64) -> Self {
        Self::new(lvl, 1, t, 0, 1)
    }

    /// d(s) = [[s, 0], [0, 1]] for a unit s.
    pub fn d(lvl: Level, s: i64) -> Self {
        Self::new(lvl, s, 0, 0, 1)
    }

    /// z(s) = [[s, 0], [0, s]] for a unit s.
    pub fn z(lvl: Level, s: i64) -> Self {
        Self::new(lvl, s, 0, 0, s)
    }

    pub fn diag(lvl: Level, a: i64, d: i64) -> Self {
        Self::new(lvl, a, 0, 0, d)
    }

    pub fn det(&self) -> u64 {
        let q = self.lvl.q as u128;
        ((self.a as u128 * self.d as u128 % q + q - self.b as u128 * self.c as u128 % q) % q) as u64
    }

    #[inline]
    pub fn mul(&self, o: &MatPn) -> MatPn {
        let q = self.lvl.q;
        let m = |x: u64, y: u64, z: u64, w: u64| (x * y + z * w) % q;
        MatPn {
            lvl: self.lvl,
            a: m(self.a, o.a, self.b, o.c),
            b: m(self.a, o.b, self.b, o.d),
            c: m(self.c, o.a, self.d, o.c),
            d: m(self.c, o.b, self.d, o.d),
        }
    }

    pub fn inv(&self) -> MatPn {
        let q = self.lvl.q;
        let di = self.lvl.inv(self.det());
        MatPn {
            lvl: self.lvl,
            a: self.d * di % q,
            b: (q - self.b) % q * di % q,
            c: (q - self.c) % q * di % q,
            d: self.a * di % q,
        }
    }

    pub fn in_k0(&self) -> bool {
        self.c.is_multiple_of(self.lvl.q)
    }

    /// Membership in K0(p^m) for m <= n.
    pub fn in_k0_level(&self, m: u32) -> bool {
        self.lvl.val(self.c) >= m
    }

    pub fn entries(&self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Packed index a q^3 + b q^2 + c q + d.
    pub fn code(&self) -> usize {
        let q = self.lvl.q as usize;
        ((self.a as usize * q + self.b as usize) * q + self.c as usize) * q + self.d as usize
    }

    pub fn from_code(lvl: Level, code: usize) -> MatPn {
        let q = lvl.q as usize;
        MatPn {
            lvl,
            a: (code / (q * q * q)) as u64,
            b: (code / (q * q) % q) as u64,
            c: (code / q % q) as u64,
            d: (code % q) as u64,
        }
    }
}

pub fn in_k0(g: &MatPn) -> bool {
    g.in_k0()
}

/// Canonical point of P^1(Z/p^n) naming a right coset K0 g.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CosetIndex {
    /// (1 : d), bottom row with unit first entry.
    Unit(u64),
    /// (c : 1) with c in pZ/p^n.
    NonUnit(u64),
}

impl CosetIndex {
    pub fn position(&self, lvl: Level) -> usize {
        match *self {
            CosetIndex::Unit(d) => d as usize,
            CosetIndex::NonUnit(c) => (lvl.q + c / lvl.p) as usize,
        }
    }

    pub fn from_position(lvl: Level, i: usize) -> Self {
        let i = i as u64;
        if i < lvl.q {
            CosetIndex::Unit(i)
        } else {
            CosetIndex::NonUnit((i - lvl.q) * lvl.p)
        }
    }

    /// Canonical representative: w x(d) = [[0,-1],[1,d]] or y(c).
    pub fn rep(&self, lvl: Level) -> MatPn {
        match *self {
            CosetIndex::Unit(d) => MatPn::new(lvl, 0, -1, 1, d as i64),
            CosetIndex::NonUnit(c) => MatPn::y(lvl, c as i64),
        }
    }
}

/// Right coset K0 g from the bottom row.
pub fn coset_index(g: &MatPn) -> CosetIndex {
    let lvl = g.lvl;
    let q = lvl.q;
    if lvl.is_unit(g.c) {
        CosetIndex::Unit(g.d * lvl.inv(g.c) % q)
    } else {
        CosetIndex::NonUnit(g.c * lvl.inv(g.d) % q)
    }
}

/// g = k0 * rep(index) with k0 in K0(p^n).
pub fn coset_decompose(g: &MatPn) -> (CosetIndex, MatPn) {
    let idx = coset_index(g);
    let k0 = g.mul(&idx.rep(g.lvl).inv());
    debug_assert!(k0.in_k0());
    (idx, k0)
}

pub fn right_coset_reps(lvl: Level) -> Vec<MatPn> {
    (0..lvl.index())
        .map(|i| CosetIndex::from_position(lvl, i).rep(lvl))
        .collect()
}

/// Left coset g K0 from the first column: (a : c) up to a unit on the right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LeftIndex {
    /// (t : 1), first column with unit lower entry; rep x(t) w = [[t,-1],[1,0]].
    Unit(u64),
    /// (1 : c) with c in pZ; rep y(c).
    NonUnit(u64),
}

impl LeftIndex {
    pub fn rep(&self, lvl: Level) -> MatPn {
        match *self {
            LeftIndex::Unit(t) => MatPn::new(lvl, t as i64, -1, 1, 0),
            LeftIndex::NonUnit(c) => MatPn::y(lvl, c as i64),
        }
    }
}

pub fn left_index(g: &MatPn) -> LeftIndex {
    let lvl = g.lvl;
    if lvl.is_unit(g.c) {
        LeftIndex::Unit(g.a * lvl.inv(g.c) % lvl.q)
    } else {
        LeftIndex::NonUnit(g.c * lvl.inv(g.a) % lvl.q)
    }
}

/// Double coset K0 g K0 named by its standard representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DcLabel {
    /// The class of w(1) (bottom-left entry a unit).
    W,
    /// The class of y(p^j), 1 <= j <= n; y(p^n) is the identity class.
    Y(u32),
}

impl DcLabel {
    pub fn rep(&self, lvl: Level) -> MatPn {
        match *self {
            DcLabel::W => MatPn::w(lvl),
            DcLabel::Y(j) => MatPn::y(lvl, lvl.pow_p(j) as i64),
        }
    }

    pub fn name(&self, lvl: Level) -> String {
        match *self {
            DcLabel::W => "w(1)".to_string(),
            DcLabel::Y(j) => format!("y({}^{})", lvl.p, j),
        }
    }

    /// All labels in order w, y(p), ..., y(p^n).
    pub fn all(lvl: Level) -> Vec<DcLabel> {
        std::iter::once(DcLabel::W)
            .chain((1..=lvl.n).map(DcLabel::Y))
            .collect()
    }

    /// Valuation of the bottom-left entry on this class.
    pub fn valuation(&self) -> u32 {
        match *self {
            DcLabel::W => 0,
            DcLabel::Y(j) => j,
        }
    }
}

impl fmt::Display for DcLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DcLabel::W => write!(f, "w"),
            DcLabel::Y(j) => write!(f, "y{j}"),
        }
    }
}

/// Label from the valuation of the bottom-left entry.
pub fn double_coset_label(g: &MatPn) -> DcLabel {
    match g.lvl.val(g.c) {
        0 => DcLabel::W,
        j => DcLabel::Y(j),
    }
}

/// d(s) y(p^j), s over lifts of (Z/p^(n-j))^x, for 1 <= j <= n-1.
pub fn single_cosets_of_double(lvl: Level, j: u32) -> Result<Vec<MatPn>, ArithError> {
    if j == 0 || j >= lvl.n {
        return Err(ArithError::BadExponent(j));
    }
    let pj = lvl.pow_p(j) as i64;
    Ok(unit_lifts(lvl, lvl.n - j)
        .into_iter()
        .map(|s| MatPn::new(lvl, s as i64, 0, pj, 1))
        .collect())
}

/// The mirrored decomposition: y(p^j) d(s), giving right cosets K0 y(p^j) d(s).
pub fn mirrored_cosets_of_double(lvl: Level, j: u32) -> Result<Vec<MatPn>, ArithError> {
    if j == 0 || j >= lvl.n {
        return Err(ArithError::BadExponent(j));
    }
    let pj = lvl.pow_p(j) as i64;
    Ok(unit_lifts(lvl, lvl.n - j)
        .into_iter()
        .map(|s| MatPn::new(lvl, s as i64, 0, pj * s as i64, 1))
        .collect())
}

/// Integers 1 <= s < p^e prime to p.
pub fn unit_lifts(lvl: Level, e: u32) -> Vec<u64> {
    let m = lvl.p.pow(e);
    (1..m.max(2)).filter(|s| s % lvl.p != 0).collect()
}

/// Left coset representatives a with K0 g K0 = union of a K0.
pub fn left_reps_of_double(lvl: Level, label: DcLabel) -> Vec<MatPn> {
    match label {
        DcLabel::W => (0..lvl.q)
            .map(|t| LeftIndex::Unit(t).rep(lvl))
            .collect(),
        DcLabel::Y(j) if j >= lvl.n => vec![MatPn::identity(lvl)],
        DcLabel::Y(j) => single_cosets_of_double(lvl, j).expect("in range"),
    }
}

/// Right coset indices making up a double coset.
pub fn right_cosets_of_double(lvl: Level, label: DcLabel) -> Vec<CosetIndex> {
    (0..lvl.index())
        .map(|i| CosetIndex::from_position(lvl, i))
        .filter(|idx| double_coset_label(&idx.rep(lvl)) == label)
        .collect()
}

/// Generators of K0(p^m) inside GL2(Z/p^n): diagonal units, x(1), and y(p^m) when m < n.
pub fn k0_generators(lvl: Level, m: u32) -> Vec<MatPn> {
    let gens = unit_generators(lvl.p, lvl.n).expect("prime");
    let mut out = Vec::new();
    for g in gens {
        out.push(MatPn::diag(lvl, g as i64, 1));
        out.push(MatPn::diag(lvl, 1, g as i64));
    }
    out.push(MatPn::x(lvl, 1));
    if m < lvl.n {
        out.push(MatPn::y(lvl, lvl.p.pow(m) as i64));
    }
    out
}

/// Every element of K0(p^n) mod p^n: [[a, b], [0, d]] with a, d units.
pub fn enumerate_k0(lvl: Level) -> Vec<MatPn> {
    let units: Vec<u64> = (0..lvl.q).filter(|&x| lvl.is_unit(x)).collect();
    let mut out = Vec::with_capacity(units.len() * units.len() * lvl.q as usize);
    for &a in &units {
        for b in 0..lvl.q {
            for &d in &units {
                out.push(MatPn {
                    lvl,
                    a,
                    b,
                    c: 0,
                    d,
                });
            }
        }
    }
    out
}

/// Every element of GL2(Z/p^n) (intended for p^n <= 27).
pub fn enumerate_group(lvl: Level) -> Vec<MatPn> {
    let q = lvl.q;
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    let m = MatPn { lvl, a, b, c, d };
                    if lvl.is_unit(m.det()) {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

/// |GL2(Z/p^n)| = p^(4(n-1)) (p^2 - 1)(p^2 - p).
pub fn group_order(lvl: Level) -> u64 {
    lvl.p.pow(4 * (lvl.n - 1)) * (lvl.p * lvl.p - 1) * (lvl.p * lvl.p - lvl.p)
}

/// |K0(p^n)| = p^n phi(p^n)^2.
pub fn k0_order(lvl: Level) -> u64 {
    let phi = lvl.q - lvl.q / lvl.p;
    lvl.q * phi * phi
}

/// K_g = g^-1 K0 g  intersect  K0, i.e. k in K0 with g k g^-1 in K0, by enumeration.
pub fn enumerate_kg(g: &MatPn) -> Vec<MatPn> {
    let gi = g.inv();
    enumerate_k0(g.lvl)
        .into_iter()
        .filter(|k| g.mul(k).mul(&gi).in_k0())
        .collect()
}

/// Closed-form membership in K_g for g = y(p^m): a - d - p^m b = 0 mod p^(n-m).
/// For g = w(1): b = 0 mod p^n.
pub fn kg_closed_form(label: DcLabel, k: &MatPn) -> bool {
    let lvl = k.lvl;
    if !k.in_k0() {
        return false;
    }
    match label {
        DcLabel::W => k.b == 0,
        DcLabel::Y(m) => {
            if m >= lvl.n {
                return true;
            }
            let pm = lvl.pow_p(m);
            let modulus = lvl.p.pow(lvl.n - m);
            let v = (k.a + 2 * lvl.q - k.d - pm * k.b % lvl.q) % lvl.q;
            v.is_multiple_of(modulus)
        }
    }
}

/// Sign variant a - d + p^m b = 0 mod p^(n-m); this is g K0 g^-1 intersect K0.
pub fn kg_printed_form(label: DcLabel, k: &MatPn) -> bool {
    let lvl = k.lvl;
    if !k.in_k0() {
        return false;
    }
    match label {
        DcLabel::W => k.b == 0,
        DcLabel::Y(m) => {
            if m >= lvl.n {
                return true;
            }
            let pm = lvl.pow_p(m);
            let modulus = lvl.p.pow(lvl.n - m);
            let v = (k.a + lvl.q - k.d + pm * k.b % lvl.q) % lvl.q;
            v.is_multiple_of(modulus)
        }
    }
}

/// Canonical rep list with the double-coset label of each right coset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetTable {
    pub p: u64,
    pub n: u32,
    pub reps: Vec<[u64; 4]>,
    pub labels: Vec<DcLabel>,
}

impl CosetTable {
    pub fn build(lvl: Level) -> Self {
        let reps = right_coset_reps(lvl);
        CosetTable {
            p: lvl.p,
            n: lvl.n,
            labels: reps.iter().map(double_coset_label).collect(),
            reps: reps.iter().map(|r| r.entries()).collect(),
        }
    }
}

/// Orbits of a generating set acting on the right coset space by right multiplication.
/// Returns the orbit id of every coset position.
pub fn right_action_orbits(lvl: Level, gens: &[MatPn]) -> Vec<usize> {
    let reps = right_coset_reps(lvl);
    let mut orbit = vec![usize::MAX; reps.len()];
    let mut next = 0;
    for start in 0..reps.len() {
        if orbit[start] != usize::MAX {
            continue;
        }
        orbit[start] = next;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for g in gens {
                let j = coset_index(&reps[i].mul(g)).position(lvl);
                if orbit[j] == usize::MAX {
                    orbit[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    orbit
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lvl(p: u64, n: u32) -> Level {
        Level::new(p, n).unwrap()
    }

    #[test]
    fn k0_membership() {
        let l = lvl(3, 2);
        assert!(in_k0(&MatPn::identity(l)));
        assert!(in_k0(&MatPn::y(l, 9)));
        assert!(!in_k0(&MatPn::w(l)));
    }

    #[test]
    fn coset_counts() {
        assert_eq!(right_coset_reps(lvl(2, 1)).len(), 3);
        assert_eq!(right_coset_reps(lvl(3, 2)).len(), 12);
        assert_eq!(right_coset_reps(lvl(5, 1)).len(), 6);
    }

    #[test]
    fn reps_decompose_to_themselves() {
        let l = lvl(2, 3);
        for r in right_coset_reps(l) {
            let (idx, k0) = coset_decompose(&r);
            assert_eq!(idx.rep(l), r);
            assert_eq!(k0, MatPn::identity(l));
        }
    }

    #[test]
    fn unit_lower_left_gives_unit_class() {
        let l = lvl(5, 2);
        for u in [1i64, 2, 7, 24] {
            assert!(matches!(coset_index(&MatPn::y(l, u)), CosetIndex::Unit(_)));
        }
    }

    #[test]
    fn labels_of_reps() {
        let l = lvl(3, 2);
        assert_eq!(double_coset_label(&MatPn::identity(l)), DcLabel::Y(2));
        assert_eq!(double_coset_label(&MatPn::w(l)), DcLabel::W);
        assert_eq!(double_coset_label(&MatPn::y(l, 1)), DcLabel::W);
    }

    #[test]
    fn single_coset_counts() {
        assert_eq!(single_cosets_of_double(lvl(3, 2), 1).unwrap().len(), 2);
        assert_eq!(single_cosets_of_double(lvl(2, 3), 1).unwrap().len(), 2);
        assert_eq!(single_cosets_of_double(lvl(5, 2), 1).unwrap().len(), 4);
        assert!(single_cosets_of_double(lvl(5, 2), 2).is_err());
        assert!(single_cosets_of_double(lvl(5, 2), 0).is_err());
    }

    #[test]
    fn kg_examples() {
        let l = lvl(3, 2);
        assert_eq!(enumerate_kg(&MatPn::identity(l)).len() as u64, k0_order(l));
        let l2 = lvl(2, 1);
        let kw = enumerate_kg(&MatPn::w(l2));
        assert!(kw.iter().all(|k| k.b % 2 == 0));
        assert!(kw.contains(&MatPn::identity(l2)));
        let ky = enumerate_kg(&MatPn::y(l, 3));
        let closed: Vec<MatPn> = enumerate_k0(l)
            .into_iter()
            .filter(|k| kg_closed_form(DcLabel::Y(1), k))
            .collect();
        assert_eq!(ky, closed);
    }

    #[test]
    fn orders() {
        let l = lvl(3, 3);
        assert_eq!(group_order(l), 314_928);
        assert_eq!(enumerate_k0(l).len() as u64, k0_order(l));
        assert_eq!(group_order(l) / k0_order(l), l.index() as u64);
    }
}
