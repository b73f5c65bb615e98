//! The twisted Hecke algebra H(K//K0(p^n), chi): functions on GL2(Z/p^n) with
//! f(k x k') = chi(k) f(x) chi(k'), chi(k) = chi(d-entry) on K0(p^n).
//!
//! Basis elements are twisted indicators of the supported double cosets; K0 has
//! mass 1, so convolution is a finite sum over left cosets.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::arith::{ArithError, CycNum, PChar};
use crate::cosets::{
    double_coset_label, enumerate_kg, kg_closed_form, left_index, left_reps_of_double, DcLabel,
    LeftIndex, Level, MatPn,
};
use crate::report::{Check, Source};

#[derive(Debug, thiserror::Error)]
pub enum HeckeError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("elements belong to different algebras")]
    Mismatch,
    #[error("Y_{0} is not defined below the conductor exponent {1}")]
    BelowConductor(u32, u32),
    #[error("label {0} is not in the supported basis")]
    Unsupported(DcLabel),
}

/// Distinct d-entries of g k g^-1 k^-1 over k in K_g = {k in K0 : g k g^-1 in K0}.
///
/// Enumerated exhaustively for p^n <= 128; above that K_g is sampled through its
/// closed-form parametrization.
pub fn commutator_units(g: &MatPn) -> Vec<u64> {
    static CACHE: OnceLock<RwLock<HashMap<[u64; 6], Arc<Vec<u64>>>>> = OnceLock::new();
    let key = [g.lvl.p, g.lvl.n as u64, g.a, g.b, g.c, g.d];
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().expect("commutator cache").get(&key) {
        return v.as_ref().clone();
    }
    let lvl = g.lvl;
    let gi = g.inv();
    let mut set = BTreeSet::new();
    let mut visit = |k: &MatPn| {
        let conj = g.mul(k).mul(&gi);
        debug_assert!(conj.in_k0());
        let comm = conj.mul(&k.inv());
        set.insert(comm.d);
    };
    if lvl.q <= 128 {
        for k in enumerate_kg(g) {
            visit(&k);
        }
    } else {
        let label = double_coset_label(g);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(lvl.q ^ 0x5eed);
        let mut found = 0;
        while found < 4096 {
            let a = rng.gen_range(0..lvl.q);
            let b = rng.gen_range(0..lvl.q);
            let d = rng.gen_range(0..lvl.q);
            let k = MatPn::new(lvl, a as i64, b as i64, 0, d as i64);
            if !lvl.is_unit(a) || !lvl.is_unit(d) || !kg_closed_form(label, &k) {
                continue;
            }
            visit(&k);
            found += 1;
        }
    }
    let v: Vec<u64> = set.into_iter().collect();
    cache
        .write()
        .expect("commutator cache")
        .insert(key, Arc::new(v.clone()));
    v
}

/// g supports a twisted indicator iff chi(g k g^-1 k^-1) = 1 on K_g.
pub fn is_supported(g: &MatPn, chi: &PChar) -> bool {
    commutator_units(g).iter().all(|&u| chi.exp_unit(u) == 0)
}

/// Supported labels, ordered w (if present), y(p), ..., y(p^n).
pub fn supported_basis(lvl: Level, chi: &PChar) -> Vec<DcLabel> {
    DcLabel::all(lvl)
        .into_iter()
        .filter(|l| is_supported(&l.rep(lvl), chi))
        .collect()
}

/// Structure constants: basis[i] * basis[j] = sum_k c[i][j][k] basis[k].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructTable {
    pub p: u64,
    pub n: u32,
    pub order: u64,
    pub labels: Vec<DcLabel>,
    pub c: Vec<Vec<Vec<CycNum>>>,
}

impl StructTable {
    pub fn is_commutative(&self) -> bool {
        let d = self.labels.len();
        (0..d).all(|i| (0..d).all(|j| self.c[i][j] == self.c[j][i]))
    }
}

/// The algebra attached to (p, n, chi).
pub struct Algebra {
    pub lvl: Level,
    pub chi: PChar,
    pub basis: Vec<DcLabel>,
    table: OnceLock<StructTable>,
    left_maps: HashMap<DcLabel, HashMap<LeftIndex, MatPn>>,
}

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Algebra")
            .field("lvl", &self.lvl)
            .field("r", &self.chi.r)
            .field("basis", &self.basis)
            .finish()
    }
}

impl Algebra {
    pub fn new(lvl: Level, chi: PChar) -> Result<Arc<Self>, HeckeError> {
        if chi.p != lvl.p || chi.n != lvl.n {
            return Err(HeckeError::Mismatch);
        }
        let basis = supported_basis(lvl, &chi);
        let left_maps = DcLabel::all(lvl)
            .into_iter()
            .map(|l| {
                let m = left_reps_of_double(lvl, l)
                    .into_iter()
                    .map(|a| (left_index(&a), a))
                    .collect();
                (l, m)
            })
            .collect();
        Ok(Arc::new(Algebra {
            lvl,
            chi,
            basis,
            table: OnceLock::new(),
            left_maps,
        }))
    }

    pub fn order(&self) -> u64 {
        self.chi.order
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn r(&self) -> u32 {
        self.chi.r
    }

    pub fn position(&self, l: DcLabel) -> Option<usize> {
        self.basis.iter().position(|&b| b == l)
    }

    /// Value exponent of the basis function on `label` at x, from the closed form:
    /// chi(d_x) on the y-classes, 1 on the w-class.
    #[inline]
    pub fn value(&self, label: DcLabel, x: &MatPn) -> Option<u32> {
        if double_coset_label(x) != label {
            return None;
        }
        match label {
            DcLabel::W => Some(0),
            DcLabel::Y(_) => Some(self.chi.exp_unit(x.d)),
        }
    }

    /// Same value through x = k1 rep k2: split off the left coset, then factor the
    /// left representative, and multiply chi over both K0 factors.
    pub fn value_via_cosets(&self, label: DcLabel, x: &MatPn) -> Option<u32> {
        if double_coset_label(x) != label {
            return None;
        }
        let lvl = self.lvl;
        let a = *self.left_maps[&label].get(&left_index(x))?;
        let k2 = a.inv().mul(x);
        assert!(k2.in_k0(), "left coset decomposition left K0");
        let k1 = a.mul(&label.rep(lvl).inv());
        assert!(k1.in_k0(), "left representative outside K0 rep K0");
        let e = (self.chi.exp_unit(k1.d) as u64 + self.chi.exp_unit(k2.d) as u64) % self.order();
        Some(e as u32)
    }

    /// (V_l1 * V_l2)(h) as an exponent histogram, by the left-coset sum
    /// sum_a V_l1(a) V_l2(a^-1 h).
    pub fn convolve_at(&self, l1: DcLabel, l2: DcLabel, h: &MatPn) -> Vec<i64> {
        let m = self.order() as usize;
        let mut counts = vec![0i64; m];
        for a in left_reps_of_double(self.lvl, l1) {
            let Some(v1) = self.value(l1, &a) else { continue };
            let y = a.inv().mul(h);
            if let Some(v2) = self.value(l2, &y) {
                counts[(v1 as usize + v2 as usize) % m] += 1;
            }
        }
        counts
    }

    /// Mirrored sum over left cosets b of the second support: sum_b V_l1(h b) V_l2(b^-1).
    pub fn convolve_at_mirrored(&self, l1: DcLabel, l2: DcLabel, h: &MatPn) -> Vec<i64> {
        let m = self.order() as usize;
        let mut counts = vec![0i64; m];
        for b in left_reps_of_double(self.lvl, l2) {
            let Some(v2) = self.value(l2, &b.inv()) else { continue };
            if let Some(v1) = self.value(l1, &h.mul(&b)) {
                counts[(v1 as usize + v2 as usize) % m] += 1;
            }
        }
        counts
    }

    /// V_l1 * V_l2 expanded in the basis, also returning the values at unsupported labels.
    pub fn basis_product(&self, l1: DcLabel, l2: DcLabel, mirrored: bool) -> (Vec<CycNum>, Vec<(DcLabel, CycNum)>) {
        let m = self.order();
        let f = |h: &MatPn| {
            if mirrored {
                self.convolve_at_mirrored(l1, l2, h)
            } else {
                self.convolve_at(l1, l2, h)
            }
        };
        let coeffs = self
            .basis
            .iter()
            .map(|l| CycNum::from_counts(m, &f(&l.rep(self.lvl))))
            .collect();
        let outside = DcLabel::all(self.lvl)
            .into_iter()
            .filter(|l| !self.basis.contains(l))
            .map(|l| (l, CycNum::from_counts(m, &f(&l.rep(self.lvl)))))
            .collect();
        (coeffs, outside)
    }

    fn compute_table(&self) -> StructTable {
        let d = self.dim();
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).collect();
        let run = |&(i, j): &(usize, usize)| self.basis_product(self.basis[i], self.basis[j], false).0;
        #[cfg(feature = "parallel")]
        let flat: Vec<Vec<CycNum>> = {
            use rayon::prelude::*;
            pairs.par_iter().map(run).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let flat: Vec<Vec<CycNum>> = pairs.iter().map(run).collect();
        let mut c = vec![vec![Vec::new(); d]; d];
        for ((i, j), v) in pairs.into_iter().zip(flat) {
            c[i][j] = v;
        }
        StructTable {
            p: self.lvl.p,
            n: self.lvl.n,
            order: self.order(),
            labels: self.basis.clone(),
            c,
        }
    }

    /// Structure table, computed once per algebra.
    pub fn table(&self) -> &StructTable {
        self.table.get_or_init(|| self.compute_table())
    }

    /// Structure table recomputed from scratch (audit path).
    pub fn fresh_table(&self) -> StructTable {
        self.compute_table()
    }

    /// Install a table loaded from a cache; rejected unless it matches this algebra's labels.
    pub fn install_table(&self, t: StructTable) -> bool {
        if t.labels != self.basis || t.p != self.lvl.p || t.n != self.lvl.n || t.order != self.order() {
            return false;
        }
        self.table.set(t).is_ok()
    }
}

/// Element of the algebra: coefficients over `alg.basis`.
#[derive(Clone)]
pub struct HeckeElem {
    pub alg: Arc<Algebra>,
    pub coeffs: Vec<CycNum>,
}

impl fmt::Debug for HeckeElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for HeckeElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (l, c) in self.alg.basis.iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let name = match l {
                DcLabel::W => "U0".to_string(),
                DcLabel::Y(j) => format!("V{j}"),
            };
            let cs = c.to_string();
            if cs == "1" {
                parts.push(name);
            } else if cs.contains(' ') {
                parts.push(format!("({cs})*{name}"));
            } else {
                parts.push(format!("{cs}*{name}"));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl PartialEq for HeckeElem {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.alg, &other.alg) && self.coeffs == other.coeffs
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl HeckeElem {
    pub fn zero(alg: &Arc<Algebra>) -> Self {
        HeckeElem {
            alg: alg.clone(),
            coeffs: vec![CycNum::zero(alg.order()); alg.dim()],
        }
    }

    pub fn basis(alg: &Arc<Algebra>, l: DcLabel) -> Result<Self, HeckeError> {
        let i = alg.position(l).ok_or(HeckeError::Unsupported(l))?;
        let mut e = Self::zero(alg);
        e.coeffs[i] = CycNum::one(alg.order());
        Ok(e)
    }

    /// Indicator of K0(p^n): the identity of the algebra.
    pub fn identity(alg: &Arc<Algebra>) -> Self {
        Self::basis(alg, DcLabel::Y(alg.lvl.n)).expect("identity class is always supported")
    }

    /// Y_l = sum_{i=l}^{n} V_i (with V_0 read as U0 when chi is trivial).
    pub fn y_element(alg: &Arc<Algebra>, l: u32) -> Result<Self, HeckeError> {
        if l < alg.r() || l > alg.lvl.n {
            return Err(HeckeError::BelowConductor(l, alg.r()));
        }
        let mut e = Self::zero(alg);
        for (i, lab) in alg.basis.iter().enumerate() {
            if lab.valuation() >= l {
                e.coeffs[i] = CycNum::one(alg.order());
            }
        }
        Ok(e)
    }

    pub fn v(alg: &Arc<Algebra>, j: u32) -> Result<Self, HeckeError> {
        Self::basis(alg, DcLabel::Y(j))
    }

    pub fn u0(alg: &Arc<Algebra>) -> Result<Self, HeckeError> {
        Self::basis(alg, DcLabel::W)
    }

    fn check(&self, o: &Self) -> Result<(), HeckeError> {
        if Arc::ptr_eq(&self.alg, &o.alg) {
            Ok(())
        } else {
            Err(HeckeError::Mismatch)
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self, HeckeError> {
        self.check(o)?;
        Ok(HeckeElem {
            alg: self.alg.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self, HeckeError> {
        self.check(o)?;
        Ok(HeckeElem {
            alg: self.alg.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        HeckeElem {
            alg: self.alg.clone(),
            coeffs: self.coeffs.iter().map(|a| a.scale(s)).collect(),
        }
    }

    pub fn scale_int(&self, s: i64) -> Self {
        self.scale(&int(s))
    }

    /// self + s * identity.
    pub fn add_scalar(&self, s: i64) -> Self {
        let mut out = self.clone();
        let i = self.alg.position(DcLabel::Y(self.alg.lvl.n)).expect("identity");
        out.coeffs[i] = &out.coeffs[i] + &CycNum::from_int(self.alg.order(), s);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn coeff(&self, l: DcLabel) -> Option<&CycNum> {
        self.alg.position(l).map(|i| &self.coeffs[i])
    }
}

/// f1 * f2 through the structure table.
pub fn convolve(f1: &HeckeElem, f2: &HeckeElem) -> Result<HeckeElem, HeckeError> {
    f1.check(f2)?;
    let alg = &f1.alg;
    let t = alg.table();
    let d = alg.dim();
    let mut out = HeckeElem::zero(alg);
    for i in 0..d {
        if f1.coeffs[i].is_zero() {
            continue;
        }
        for j in 0..d {
            if f2.coeffs[j].is_zero() {
                continue;
            }
            let ab = &f1.coeffs[i] * &f2.coeffs[j];
            for k in 0..d {
                if !t.c[i][j][k].is_zero() {
                    out.coeffs[k] = &out.coeffs[k] + &(&ab * &t.c[i][j][k]);
                }
            }
        }
    }
    Ok(out)
}

/// Evaluate an algebra element as a function at x.
pub fn evaluate(f: &HeckeElem, x: &MatPn) -> CycNum {
    let alg = &f.alg;
    let label = double_coset_label(x);
    match (alg.position(label), alg.value(label, x)) {
        (Some(i), Some(e)) => &f.coeffs[i] * &CycNum::zeta_pow(alg.order(), e as u64),
        _ => CycNum::zero(alg.order()),
    }
}

fn relation(
    id: String,
    lhs: &HeckeElem,
    rhs: &HeckeElem,
    source: Source,
) -> Check {
    let passed = lhs == rhs;
    let mut detail = None;
    if !passed {
        for (i, l) in lhs.alg.basis.iter().enumerate() {
            if lhs.coeffs[i] != rhs.coeffs[i] {
                detail = Some(format!(
                    "first mismatch at {}: computed {} expected {}",
                    l.name(lhs.alg.lvl),
                    lhs.coeffs[i],
                    rhs.coeffs[i]
                ));
                break;
            }
        }
    }
    Check {
        id,
        passed,
        expected: rhs.to_string(),
        computed: lhs.to_string(),
        source,
        detail,
    }
}

fn pw(p: u64, e: i64) -> i64 {
    if e < 0 {
        0
    } else {
        (p as i64).pow(e as u32)
    }
}

/// Audit every structural identity of the algebra by exact convolution.
pub fn verify_relations(alg: &Arc<Algebra>) -> Result<Vec<Check>, HeckeError> {
    let lvl = alg.lvl;
    let (p, n, r) = (lvl.p, lvl.n, alg.r());
    let mut out = Vec::new();
    let tag = format!("p{}n{}", p, n);
    let mul = |a: &HeckeElem, b: &HeckeElem| convolve(a, b);

    // support and dimension
    let expected_basis: Vec<DcLabel> = if r == 0 {
        DcLabel::all(lvl)
    } else {
        (r..=n).map(DcLabel::Y).collect()
    };
    out.push(Check::new(
        format!("{tag}.support"),
        alg.basis == expected_basis,
        format!("{expected_basis:?}"),
        format!("{:?}", alg.basis),
        Source::Stated,
    ));
    out.push(Check::new(
        format!("{tag}.dimension"),
        alg.dim() as u32 == n - r + 1,
        (n - r + 1).to_string(),
        alg.dim().to_string(),
        Source::Stated,
    ));

    // closure and the mirrored formula
    let mut closed = true;
    let mut mirrored_ok = true;
    let mut witness = String::new();
    for &a in &alg.basis {
        for &b in &alg.basis {
            let (c1, out1) = alg.basis_product(a, b, false);
            let (c2, out2) = alg.basis_product(a, b, true);
            if out1.iter().any(|(_, v)| !v.is_zero()) {
                closed = false;
                witness = format!("{a}*{b} leaves the supported span");
            }
            if c1 != c2 || out1 != out2 {
                mirrored_ok = false;
                witness = format!("{a}*{b} differs between the two coset sums");
            }
            if c1 != alg.table().c[alg.position(a).unwrap()][alg.position(b).unwrap()] {
                mirrored_ok = false;
                witness = format!("{a}*{b} differs from the cached table");
            }
        }
    }
    out.push(Check::new(
        format!("{tag}.closure"),
        closed,
        "products supported on the basis".into(),
        if closed { "closed".into() } else { witness.clone() },
        Source::Stated,
    ));
    out.push(Check::new(
        format!("{tag}.mirrored-convolution"),
        mirrored_ok,
        "left and right coset sums agree".into(),
        if mirrored_ok { "agree".into() } else { witness },
        Source::Definitional,
    ));

    let lo = r.max(1);
    // (i) V_l * V_l
    for l in lo..n {
        let vl = HeckeElem::v(alg, l)?;
        let mut rhs = vl.scale_int(pw(p, n as i64 - l as i64 - 1) * (p as i64 - 2));
        for i in (l + 1)..=n {
            rhs = rhs.add(&HeckeElem::v(alg, i)?.scale_int(pw(p, n as i64 - l as i64 - 1) * (p as i64 - 1)))?;
        }
        out.push(relation(format!("{tag}.r{r}.square.V{l}"), &mul(&vl, &vl)?, &rhs, Source::Stated));
    }
    // (ii) V_l * V_j for l < j < n
    for l in lo..n {
        for j in (l + 1)..n {
            let vl = HeckeElem::v(alg, l)?;
            let vj = HeckeElem::v(alg, j)?;
            let rhs = vl.scale_int(pw(p, n as i64 - j as i64 - 1) * (p as i64 - 1));
            out.push(relation(format!("{tag}.r{r}.product.V{l}V{j}"), &mul(&vl, &vj)?, &rhs, Source::Stated));
            out.push(relation(format!("{tag}.r{r}.product.V{j}V{l}"), &mul(&vj, &vl)?, &rhs, Source::Stated));
        }
    }
    // (iii) V_l * Y_{l+1} and the quadratic
    for l in lo..n {
        let vl = HeckeElem::v(alg, l)?;
        let y = HeckeElem::y_element(alg, l + 1)?;
        let rhs = vl.scale_int(pw(p, n as i64 - l as i64 - 1));
        out.push(relation(format!("{tag}.r{r}.VY.V{l}"), &mul(&vl, &y)?, &rhs, Source::Stated));
        out.push(relation(format!("{tag}.r{r}.YV.V{l}"), &mul(&y, &vl)?, &rhs, Source::Stated));
        let c = pw(p, n as i64 - l as i64 - 1) * (p as i64 - 1);
        let lhs = mul(&vl.add_scalar(-c), &vl.add(&y)?)?;
        out.push(relation(
            format!("{tag}.r{r}.quadratic.V{l}"),
            &lhs,
            &HeckeElem::zero(alg),
            Source::Stated,
        ));
    }
    // Y_j * Y_l = p^(n-j) Y_l for j >= l >= r
    for l in r..=n {
        for j in l..=n {
            if j == 0 {
                // Y_0 is the indicator of K; Y_0 * Y_0 = [K : K0] Y_0 instead
                let y0 = HeckeElem::y_element(alg, 0)?;
                let idx = lvl.index() as i64;
                out.push(relation(
                    format!("{tag}.r{r}.YY.Y0Y0-index"),
                    &mul(&y0, &y0)?,
                    &y0.scale_int(idx),
                    Source::Oracle,
                ));
                continue;
            }
            let yj = HeckeElem::y_element(alg, j)?;
            let yl = HeckeElem::y_element(alg, l)?;
            let rhs = yl.scale_int(pw(p, n as i64 - j as i64));
            out.push(relation(format!("{tag}.r{r}.YY.Y{j}Y{l}"), &mul(&yj, &yl)?, &rhs, Source::Stated));
            out.push(relation(format!("{tag}.r{r}.YY.Y{l}Y{j}"), &mul(&yl, &yj)?, &rhs, Source::Stated));
        }
    }
    // idempotents e_l = Y_l / p^(n-l)
    for l in lo..=n {
        let e = HeckeElem::y_element(alg, l)?.scale(&BigRational::new(
            BigInt::one(),
            BigInt::from(pw(p, n as i64 - l as i64)),
        ));
        out.push(relation(format!("{tag}.r{r}.idempotent.e{l}"), &mul(&e, &e)?, &e, Source::Stated));
    }
    // (iv) commutativity
    let t = alg.table();
    out.push(Check::new(
        format!("{tag}.r{r}.commutative"),
        t.is_commutative(),
        "symmetric structure table".into(),
        if t.is_commutative() { "symmetric".into() } else { "asymmetric".into() },
        Source::Stated,
    ));
    // (v) trivial character
    if r == 0 {
        let u = HeckeElem::u0(alg)?;
        let y1 = HeckeElem::y_element(alg, 1)?;
        let rhs = u
            .scale_int(pw(p, n as i64 - 1) * (p as i64 - 1))
            .add(&y1.scale_int(pw(p, n as i64)))?;
        out.push(relation(format!("{tag}.r0.U0U0"), &mul(&u, &u)?, &rhs, Source::Stated));
        for l in 1..=n {
            let yl = HeckeElem::y_element(alg, l)?;
            let rhs = u.scale_int(pw(p, (n - l) as i64));
            out.push(relation(format!("{tag}.r0.U0Y{l}"), &mul(&u, &yl)?, &rhs, Source::Stated));
            out.push(relation(format!("{tag}.r0.Y{l}U0"), &mul(&yl, &u)?, &rhs, Source::Stated));
        }
        let cubic = mul(
            &mul(&u, &u.add_scalar(-pw(p, n as i64)))?,
            &u.add_scalar(pw(p, n as i64 - 1)),
        )?;
        out.push(relation(format!("{tag}.r0.U0-cubic"), &cubic, &HeckeElem::zero(alg), Source::Stated));
        if n == 1 {
            let iw = mul(&u.add_scalar(1), &u.add_scalar(-(p as i64)))?;
            out.push(relation(format!("{tag}.r0.iwahori-quadratic"), &iw, &HeckeElem::zero(alg), Source::Stated));
        }
    }
    Ok(out)
}

/// Evaluate the basis function two ways at random group elements; returns mismatches.
pub fn twisted_evaluation_mismatches(alg: &Algebra, samples: usize, seed: u64) -> usize {
    let lvl = alg.lvl;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    let mut done = 0;
    while done < samples {
        let g = MatPn::new(
            lvl,
            rng.gen_range(0..lvl.q) as i64,
            rng.gen_range(0..lvl.q) as i64,
            rng.gen_range(0..lvl.q) as i64,
            rng.gen_range(0..lvl.q) as i64,
        );
        if !lvl.is_unit(g.det()) {
            continue;
        }
        done += 1;
        for &l in &alg.basis {
            if alg.value(l, &g) != alg.value_via_cosets(l, &g) {
                bad += 1;
            }
        }
    }
    bad
}
