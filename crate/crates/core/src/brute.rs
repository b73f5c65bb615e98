//! Brute-force model of the algebra: functions stored on every element of
//! GL2(Z/p^n), built by closing a seed value under K0 on both sides, and
//! convolution as a full group sum. Intended for p^n <= 27.

use crate::arith::{CycNum, PChar};
use crate::cosets::{enumerate_group, k0_generators, k0_order, DcLabel, Level, MatPn};

use num_bigint::BigInt;
use num_rational::BigRational;

const NONE: u32 = u32::MAX;

/// A twisted function with values in mu_m (or zero), indexed by matrix code.
pub struct BruteFn {
    pub values: Vec<u32>,
    pub support: Vec<usize>,
}

pub struct BruteModel {
    pub lvl: Level,
    pub chi: PChar,
    group: Vec<MatPn>,
}

impl BruteModel {
    pub fn new(lvl: Level, chi: PChar) -> Self {
        assert!(lvl.q <= 27, "brute force model is limited to p^n <= 27");
        BruteModel {
            lvl,
            chi,
            group: enumerate_group(lvl),
        }
    }

    pub fn group_len(&self) -> usize {
        self.group.len()
    }

    /// Close {g -> 1} under x -> k x (times chi(k)) and x -> x k (times chi(k)).
    /// None when two paths give different values, i.e. no twisted function lives on K0 g K0.
    pub fn indicator(&self, g: &MatPn) -> Option<BruteFn> {
        let lvl = self.lvl;
        let m = self.chi.order;
        let q = lvl.q as usize;
        let mut values = vec![NONE; q * q * q * q];
        let gens = k0_generators(lvl, lvl.n);
        values[g.code()] = 0;
        let mut stack = vec![*g];
        let mut support = vec![g.code()];
        while let Some(x) = stack.pop() {
            let vx = values[x.code()] as u64;
            for k in &gens {
                let ck = self.chi.exp_unit(k.d) as u64;
                for y in [k.mul(&x), x.mul(k)] {
                    let vy = ((vx + ck) % m) as u32;
                    let slot = &mut values[y.code()];
                    if *slot == NONE {
                        *slot = vy;
                        support.push(y.code());
                        stack.push(y);
                    } else if *slot != vy {
                        return None;
                    }
                }
            }
        }
        Some(BruteFn { values, support })
    }

    /// Labels whose double coset carries a nonzero twisted function.
    pub fn supported_labels(&self) -> Vec<DcLabel> {
        DcLabel::all(self.lvl)
            .into_iter()
            .filter(|l| self.indicator(&l.rep(self.lvl)).is_some())
            .collect()
    }

    /// (f1 * f2)(h) = |K0|^-1 sum_g f1(g) f2(g^-1 h).
    pub fn convolve_at(&self, f1: &BruteFn, f2: &BruteFn, h: &MatPn) -> CycNum {
        let m = self.chi.order;
        let lvl = self.lvl;
        let mut counts = vec![0i64; m as usize];
        for &code in &f1.support {
            let g = MatPn::from_code(lvl, code);
            let v1 = f1.values[code];
            let v2 = f2.values[g.inv().mul(h).code()];
            if v2 != NONE {
                counts[((v1 as u64 + v2 as u64) % m) as usize] += 1;
            }
        }
        let k0 = BigRational::new(BigInt::from(1), BigInt::from(k0_order(lvl)));
        CycNum::from_counts(m, &counts).scale(&k0)
    }

    /// Values of f1 * f2 at every label representative (supported or not).
    pub fn product_at_reps(&self, f1: &BruteFn, f2: &BruteFn) -> Vec<(DcLabel, CycNum)> {
        DcLabel::all(self.lvl)
            .into_iter()
            .map(|l| (l, self.convolve_at(f1, f2, &l.rep(self.lvl))))
            .collect()
    }

    pub fn elements(&self) -> &[MatPn] {
        &self.group
    }
}

/// Compare the algebra's supported basis and structure table with the brute-force model.
pub fn cross_check(alg: &crate::hecke::Algebra) -> Vec<crate::report::Check> {
    use crate::report::{Check, Source};
    let lvl = alg.lvl;
    let tag = format!("p{}n{}", lvl.p, lvl.n);
    let model = BruteModel::new(lvl, alg.chi.clone());
    let labels = model.supported_labels();
    let names = |ls: &[DcLabel]| ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",");
    let mut out = vec![Check::new(
        format!("{tag}.brute.support"),
        labels == alg.basis,
        names(&alg.basis),
        names(&labels),
        Source::Oracle,
    )];
    if labels != alg.basis {
        return out;
    }
    let fns: Vec<BruteFn> = alg
        .basis
        .iter()
        .map(|l| model.indicator(&l.rep(lvl)).expect("supported label has an indicator"))
        .collect();
    let t = alg.table();
    let mut bad = Vec::new();
    for i in 0..alg.dim() {
        for j in 0..alg.dim() {
            for (l, v) in model.product_at_reps(&fns[i], &fns[j]) {
                let ok = match alg.position(l) {
                    Some(k) => v == t.c[i][j][k],
                    None => v.is_zero(),
                };
                if !ok {
                    bad.push(format!("{}*{} at {l}", alg.basis[i], alg.basis[j]));
                }
            }
        }
    }
    out.push(Check::new(
        format!("{tag}.brute.table"),
        bad.is_empty(),
        "all structure constants equal the group sum".into(),
        if bad.is_empty() {
            format!("{} products agree", alg.dim() * alg.dim())
        } else {
            bad.join("; ")
        },
        Source::Oracle,
    ));
    out
}
