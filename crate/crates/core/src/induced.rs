//! I(n) = Ind_{K0(p^n)}^K chi as explicit matrices over Z[zeta_m].
//!
//! A vector is the list of values f(g_i) on the canonical right coset
//! representatives; f(k0 g) = chi(k0) f(g).

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::arith::cyclo::{field, CycField};
use crate::arith::linalg::{solve_rational, Fq};
use crate::arith::CycNum;
use crate::cosets::{
    coset_decompose, double_coset_label, k0_generators, left_reps_of_double, right_coset_reps,
    CosetIndex, DcLabel, Level, MatPn,
};
use crate::hecke::{Algebra, HeckeElem};
use crate::report::{Check, Source};

/// Sparse matrix whose entries are exponent histograms sum_e c_e zeta^e.
#[derive(Clone, Debug)]
pub struct SparseMat {
    pub dim: usize,
    pub m: u64,
    pub rows: Vec<Vec<(usize, Vec<i64>)>>,
}

impl SparseMat {
    fn zero(dim: usize, m: u64) -> Self {
        SparseMat {
            dim,
            m,
            rows: vec![Vec::new(); dim],
        }
    }

    fn add_assign(&mut self, o: &SparseMat, scale: i64) {
        for (row, orow) in self.rows.iter_mut().zip(&o.rows) {
            for (c, v) in orow {
                match row.iter_mut().find(|(cc, _)| cc == c) {
                    Some((_, w)) => {
                        for (a, b) in w.iter_mut().zip(v) {
                            *a += scale * b;
                        }
                    }
                    None => row.push((*c, v.iter().map(|x| scale * x).collect())),
                }
            }
        }
    }

    /// Trace in reduced integer coordinates.
    pub fn trace(&self, f: &CycField) -> Vec<i64> {
        let mut acc = vec![0i64; self.m as usize];
        for (i, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                if *c == i {
                    for (a, b) in acc.iter_mut().zip(v) {
                        *a += b;
                    }
                }
            }
        }
        f.reduce_counts(&acc)
    }

    /// Product with an integer vector, in reduced coordinates per row.
    pub fn apply_int(&self, v: &[i64], f: &CycField) -> Vec<Vec<i64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut acc = vec![0i64; self.m as usize];
                for (c, h) in row {
                    if v[*c] != 0 {
                        for (a, b) in acc.iter_mut().zip(h) {
                            *a += v[*c] * b;
                        }
                    }
                }
                f.reduce_counts(&acc)
            })
            .collect()
    }

    /// Image over F_q as a dense matrix.
    pub fn to_fq(&self, fq: &Fq) -> Vec<Vec<u64>> {
        let mut out = vec![vec![0u64; self.dim]; self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for (c, h) in row {
                out[i][*c] = fq.add(out[i][*c], fq.from_counts(h));
            }
        }
        out
    }

    /// Reduced dense form, used for exact comparisons.
    pub fn reduced(&self, f: &CycField) -> Vec<Vec<Vec<i64>>> {
        let z = vec![0i64; f.degree];
        let mut out = vec![vec![z; self.dim]; self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for (c, h) in row {
                let r = f.reduce_counts(h);
                for (a, b) in out[i][*c].iter_mut().zip(r) {
                    *a += b;
                }
            }
        }
        out
    }

    /// Exact product of two sparse matrices (histograms multiply by cyclic convolution).
    pub fn mul(&self, o: &SparseMat) -> SparseMat {
        let m = self.m as usize;
        let mut out = SparseMat::zero(self.dim, self.m);
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc: Vec<Option<Vec<i64>>> = vec![None; self.dim];
            for (l, a) in row {
                let ea: Vec<(usize, i64)> = a.iter().enumerate().filter(|(_, x)| **x != 0).map(|(e, x)| (e, *x)).collect();
                for (c, b) in &o.rows[*l] {
                    let slot = acc[*c].get_or_insert_with(|| vec![0i64; m]);
                    for (eb, &xb) in b.iter().enumerate() {
                        if xb == 0 {
                            continue;
                        }
                        for &(e, xa) in &ea {
                            slot[(e + eb) % m] += xa * xb;
                        }
                    }
                }
            }
            out.rows[i] = acc
                .into_iter()
                .enumerate()
                .filter_map(|(c, v)| v.map(|v| (c, v)))
                .collect();
        }
        out
    }
}

/// Monomial matrix: row i has its single entry zeta^exp at column col.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialMat {
    pub entries: Vec<(usize, u32)>,
}

impl MonomialMat {
    /// (A B)[i] = A[i] then B at that column.
    pub fn compose(&self, o: &MonomialMat, m: u64) -> MonomialMat {
        MonomialMat {
            entries: self
                .entries
                .iter()
                .map(|&(c, e)| {
                    let (c2, e2) = o.entries[c];
                    (c2, ((e as u64 + e2 as u64) % m) as u32)
                })
                .collect(),
        }
    }

    pub fn is_monomial(&self) -> bool {
        let mut seen = vec![false; self.entries.len()];
        for &(c, _) in &self.entries {
            if seen[c] {
                return false;
            }
            seen[c] = true;
        }
        true
    }
}

/// The induced representation for (p, n, chi).
pub struct InducedRep {
    pub alg: Arc<Algebra>,
    pub reps: Vec<MatPn>,
    field: Arc<CycField>,
}

fn pw(p: u64, e: u32) -> i64 {
    (p as i64).pow(e)
}

impl InducedRep {
    pub fn new(alg: Arc<Algebra>) -> Self {
        let reps = right_coset_reps(alg.lvl);
        let field = field(alg.order());
        InducedRep { alg, reps, field }
    }

    pub fn lvl(&self) -> Level {
        self.alg.lvl
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn m(&self) -> u64 {
        self.alg.order()
    }

    pub fn field(&self) -> &CycField {
        &self.field
    }

    /// (pi_R(k) f)(g_i) = f(g_i k) = chi(k0) f(g_j) where g_i k = k0 g_j.
    pub fn pi_r(&self, k: &MatPn) -> MonomialMat {
        let lvl = self.lvl();
        let chi = &self.alg.chi;
        MonomialMat {
            entries: self
                .reps
                .iter()
                .map(|g| {
                    let (idx, k0) = coset_decompose(&g.mul(k));
                    (idx.position(lvl), chi.exp_unit(k0.d))
                })
                .collect(),
        }
    }

    /// Matrix of convolution by the basis function on `label`:
    /// (phi * f)(g') = sum_a phi(a) f(a^-1 g').
    pub fn pi_l_basis(&self, label: DcLabel) -> SparseMat {
        let lvl = self.lvl();
        let alg = &self.alg;
        let m = alg.order();
        let lefts: Vec<(MatPn, u32)> = left_reps_of_double(lvl, label)
            .into_iter()
            .map(|a| {
                let v = alg.value(label, &a).expect("rep in class");
                (a.inv(), v)
            })
            .collect();
        let row = |g: &MatPn| {
            let mut entries: Vec<(usize, Vec<i64>)> = Vec::new();
            for (ai, v) in &lefts {
                let (idx, k0) = coset_decompose(&ai.mul(g));
                let c = idx.position(lvl);
                let e = (*v as u64 + alg.chi.exp_unit(k0.d) as u64) % m;
                match entries.iter_mut().find(|(cc, _)| *cc == c) {
                    Some((_, h)) => h[e as usize] += 1,
                    None => {
                        let mut h = vec![0i64; m as usize];
                        h[e as usize] = 1;
                        entries.push((c, h));
                    }
                }
            }
            entries
        };
        #[cfg(feature = "parallel")]
        let rows = {
            use rayon::prelude::*;
            self.reps.par_iter().map(row).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let rows = self.reps.iter().map(row).collect();
        SparseMat {
            dim: self.dim(),
            m,
            rows,
        }
    }

    /// pi_L of an element with integer coefficients.
    pub fn pi_l(&self, f: &HeckeElem) -> SparseMat {
        let mut out = SparseMat::zero(self.dim(), self.m());
        for (l, c) in self.alg.basis.iter().zip(&f.coeffs) {
            let Some(s) = c.as_i64() else {
                panic!("pi_l expects integer coefficients");
            };
            if s != 0 {
                out.add_assign(&self.pi_l_basis(*l), s);
            }
        }
        out
    }

    /// Values of a basis function on the coset representatives, as an integer vector.
    pub fn basis_vector(&self, label: DcLabel) -> Vec<i64> {
        self.reps
            .iter()
            .map(|g| match self.alg.value(label, g) {
                Some(0) => 1,
                Some(_) => panic!("representative value not 1"),
                None => 0,
            })
            .collect()
    }

    /// Y_l as a vector: indicator of representatives with v(c) >= l.
    pub fn y_vector(&self, l: u32) -> Vec<i64> {
        self.reps
            .iter()
            .map(|g| i64::from(double_coset_label(g).valuation() >= l))
            .collect()
    }

    /// v_r = Y_r and v_k = Y_{k-1} - p Y_k; indexed by k = r..n.
    pub fn eigenvectors(&self) -> Vec<(u32, Vec<i64>)> {
        let r = self.alg.r();
        let n = self.lvl().n;
        let p = self.lvl().p as i64;
        (r..=n)
            .map(|k| {
                if k == r {
                    (k, self.y_vector(r))
                } else {
                    let a = self.y_vector(k - 1);
                    let b = self.y_vector(k);
                    (k, a.iter().zip(&b).map(|(x, y)| x - p * y).collect())
                }
            })
            .collect()
    }

    /// Eigenvalue of M on the integer vector v, or None if v is not an eigenvector.
    pub fn eigenvalue(&self, mat: &SparseMat, v: &[i64]) -> Option<CycNum> {
        let mv = self.field.clone();
        let out = mat.apply_int(v, &mv);
        let i0 = v.iter().position(|&x| x != 0)?;
        let m = self.m();
        let lam = CycNum::from_reduced_ints(m, &out[i0]).scale(&BigRational::new(BigInt::one(), BigInt::from(v[i0])));
        for (i, row) in out.iter().enumerate() {
            let got = CycNum::from_reduced_ints(m, row);
            let want = lam.scale(&BigRational::from_integer(BigInt::from(v[i])));
            if got != want {
                return None;
            }
        }
        Some(lam)
    }

    /// Random element of GL2(Z/p^n).
    pub fn random_element(&self, rng: &mut impl Rng) -> MatPn {
        let lvl = self.lvl();
        loop {
            let g = MatPn::new(
                lvl,
                rng.gen_range(0..lvl.q) as i64,
                rng.gen_range(0..lvl.q) as i64,
                rng.gen_range(0..lvl.q) as i64,
                rng.gen_range(0..lvl.q) as i64,
            );
            if lvl.is_unit(g.det()) {
                return g;
            }
        }
    }

    /// pi_R(k k') = pi_R(k) pi_R(k') on sampled pairs.
    pub fn check_homomorphism(&self, samples: usize, seed: u64) -> bool {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..samples).all(|_| {
            let a = self.random_element(&mut rng);
            let b = self.random_element(&mut rng);
            let pa = self.pi_r(&a);
            let pb = self.pi_r(&b);
            let pab = self.pi_r(&a.mul(&b));
            pab.is_monomial() && pa.compose(&pb, self.m()) == pab
        })
    }

    /// M pi_R(k) = pi_R(k) M exactly, for sampled k.
    pub fn check_commutes(&self, mat: &SparseMat, samples: usize, seed: u64) -> bool {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = self.m() as usize;
        (0..samples).all(|_| {
            let k = self.random_element(&mut rng);
            let pr = self.pi_r(&k);
            // (P M)[i][c] = zeta^e_i M[j_i][c];  (M P)[i][j_l] += M[i][l] zeta^e_l
            for i in 0..self.dim() {
                let (ji, ei) = pr.entries[i];
                let mut lhs = vec![vec![0i64; m]; self.dim()];
                for (c, h) in &mat.rows[ji] {
                    for (e, &x) in h.iter().enumerate() {
                        lhs[*c][(e + ei as usize) % m] += x;
                    }
                }
                let mut rhs = vec![vec![0i64; m]; self.dim()];
                for (l, h) in &mat.rows[i] {
                    let (jl, el) = pr.entries[*l];
                    for (e, &x) in h.iter().enumerate() {
                        rhs[jl][(e + el as usize) % m] += x;
                    }
                }
                for c in 0..self.dim() {
                    if self.field.reduce_counts(&lhs[c]) != self.field.reduce_counts(&rhs[c]) {
                        return false;
                    }
                }
            }
            true
        })
    }

    /// (chi, K0(p^m))-fixed vectors: f(g k) = chi(k) f(g) for k in K0(p^m).
    /// Each basis vector is monomial on one orbit; entries are exponents (None = 0).
    pub fn fixed_subspace(&self, m: u32) -> FixedSpace {
        let lvl = self.lvl();
        let chi = &self.alg.chi;
        let ord = self.m();
        let r = self.alg.r();
        let witness = if m < r {
            // y(p^m) and x(t) have chi = 1 but their product has d = 1 + p^m t
            let pm = lvl.p.pow(m);
            (0..lvl.q)
                .find(|&t| lvl.is_unit(1 + pm * t) && chi.exp_unit((1 + pm * t) % lvl.q) != 0)
                .map(|t| {
                    let a = MatPn::y(lvl, pm as i64);
                    let b = MatPn::x(lvl, t as i64);
                    [a.entries(), b.entries(), a.mul(&b).entries()]
                })
        } else {
            None
        };
        let gens = k0_generators(lvl, m);
        let dim = self.dim();
        let mut orbit_of = vec![usize::MAX; dim];
        let mut vectors = Vec::new();
        for start in 0..dim {
            if orbit_of[start] != usize::MAX {
                continue;
            }
            let id = vectors.len();
            let mut exps: Vec<Option<u32>> = vec![None; dim];
            exps[start] = Some(0);
            orbit_of[start] = id;
            let mut stack = vec![start];
            let mut consistent = true;
            while let Some(i) = stack.pop() {
                let ei = exps[i].unwrap() as u64;
                for k in &gens {
                    let (idx, k0) = coset_decompose(&self.reps[i].mul(k));
                    let j = idx.position(lvl);
                    let ej = ((ei + chi.exp_unit(k.d) as u64 + chi.conj_exp(chi.exp_unit(k0.d)) as u64) % ord) as u32;
                    match exps[j] {
                        None => {
                            exps[j] = Some(ej);
                            orbit_of[j] = id;
                            stack.push(j);
                        }
                        Some(x) if x != ej => consistent = false,
                        _ => {}
                    }
                }
            }
            vectors.push(if consistent { Some(exps) } else { None });
        }
        FixedSpace {
            level: m,
            vectors: vectors.into_iter().flatten().collect(),
            witness,
        }
    }

    /// Exact traces of the component idempotents over Q(zeta_m); rank equals trace for an idempotent.
    pub fn component_dims_trace(&self) -> Vec<BigRational> {
        let lvl = self.lvl();
        let (p, n) = (lvl.p, lvl.n);
        let r = self.alg.r();
        let f = self.field();
        let mut traces: Vec<BigRational> = Vec::new();
        for l in r..=n {
            let mut y = SparseMat::zero(self.dim(), self.m());
            for &lab in &self.alg.basis {
                if lab.valuation() >= l {
                    y.add_assign(&self.pi_l_basis(lab), 1);
                }
            }
            let norm = if l == 0 { lvl.index() as u64 } else { p.pow(n - l) };
            let tr = CycNum::from_reduced_ints(self.m(), &y.trace(f))
                .as_rational()
                .unwrap_or_else(BigRational::zero);
            traces.push(tr / BigRational::from_integer(norm.into()));
        }
        let mut dims = Vec::new();
        for i in 0..traces.len() {
            let prev = if i == 0 { BigRational::zero() } else { traces[i - 1].clone() };
            dims.push(&traces[i] - prev);
        }
        dims
    }

    /// Rank of the idempotent images over F_q, one per component, with P^2 = P checked.
    pub fn component_dims_projector(&self) -> (Vec<usize>, bool) {
        let lvl = self.lvl();
        let (p, n) = (lvl.p, lvl.n);
        let r = self.alg.r();
        let fq = Fq::for_order(self.m());
        let mut projectors: Vec<Vec<Vec<u64>>> = Vec::new();
        for l in r..=n {
            let mut y = SparseMat::zero(self.dim(), self.m());
            for &lab in &self.alg.basis {
                if lab.valuation() >= l {
                    y.add_assign(&self.pi_l_basis(lab), 1);
                }
            }
            let norm = if l == 0 { lvl.index() as u64 } else { p.pow(n - l) };
            let s = fq.inv(norm % fq.q);
            let mut mat = y.to_fq(&fq);
            for row in mat.iter_mut() {
                for x in row.iter_mut() {
                    *x = fq.mul(*x, s);
                }
            }
            projectors.push(mat);
        }
        let mut dims = Vec::new();
        let mut idempotent = true;
        for (i, pmat) in projectors.iter().enumerate() {
            let q = if i == 0 {
                pmat.clone()
            } else {
                let prev = &projectors[i - 1];
                pmat.iter()
                    .zip(prev)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x + fq.q - y) % fq.q).collect())
                    .collect()
            };
            if fq.matmul(&q, &q) != q {
                idempotent = false;
            }
            dims.push(fq.rank(&q));
        }
        (dims, idempotent)
    }
}

/// Basis of a fixed subspace; each vector is the exponent pattern of one orbit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedSpace {
    pub level: u32,
    pub vectors: Vec<Vec<Option<u32>>>,
    /// For m < r: y(p^m), x(t) and their product, whose d-entry has chi != 1.
    pub witness: Option<[[u64; 4]; 3]>,
}

impl FixedSpace {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// Spectral data of I(n) for one character.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralReport {
    pub p: u64,
    pub n: u32,
    pub order: u64,
    pub r: u32,
    pub dim: usize,
    /// Row labels: v_k for k = r..n (absolute index k, not offset from r).
    pub eigenvector_labels: Vec<String>,
    pub column_labels: Vec<String>,
    pub y_table: Vec<Vec<String>>,
    pub y_table_expected: Vec<Vec<String>>,
    pub v_table: Vec<Vec<String>>,
    pub v_table_expected: Vec<Vec<String>>,
    pub traces: Vec<String>,
    pub dims_projector: Vec<usize>,
    /// Second method: the trace system for r >= 1, idempotent traces over Q(zeta) for r = 0.
    pub dims_trace_system: Vec<String>,
    pub dims_expected: Vec<u64>,
    pub fixed_dims: Vec<usize>,
    pub checks: Vec<Check>,
}

/// Expected eigenvalue of Y_j on v_i.
pub fn expected_y(p: u64, n: u32, i: u32, j: u32) -> i64 {
    if j >= i {
        pw(p, n - j)
    } else {
        0
    }
}

/// Expected eigenvalue of V_j on v_i.
pub fn expected_v(p: u64, n: u32, i: u32, j: u32) -> i64 {
    if j == n {
        1
    } else if i <= j {
        pw(p, n - j - 1) * (p as i64 - 1)
    } else if j + 1 == i {
        -pw(p, n - i)
    } else {
        0
    }
}

/// Expected dimension of the component sigma(k).
pub fn expected_component_dim(p: u64, r: u32, k: u32) -> u64 {
    if r == 0 {
        match k {
            0 => 1,
            1 => p,
            _ => p.pow(k - 2) * (p * p - 1),
        }
    } else if k == r {
        p.pow(r - 1) * (p + 1)
    } else {
        p.pow(k - 2) * (p * p - 1)
    }
}

fn s(x: i64) -> String {
    x.to_string()
}

/// Expected fixed dimension at level m.
pub fn expected_fixed_dim(r: u32, m: u32) -> usize {
    if m < r {
        0
    } else {
        (m - r + 1) as usize
    }
}

/// Full spectral audit of I(n); `full` adds the pi_L homomorphism and commutation checks.
pub fn spectral_report(rep: &InducedRep, full: bool, seed: u64) -> SpectralReport {
    let lvl = rep.lvl();
    let (p, n) = (lvl.p, lvl.n);
    let alg = &rep.alg;
    let r = alg.r();
    let m = alg.order();
    let mut checks = Vec::new();
    let tag = format!("p{p}n{n}r{r}");

    let dim_expected = p.pow(n - 1) * (p + 1);
    checks.push(Check::new(
        format!("{tag}.dim"),
        rep.dim() as u64 == dim_expected,
        dim_expected.to_string(),
        rep.dim().to_string(),
        Source::Stated,
    ));
    if full {
        checks.push(Check::new(
            format!("{tag}.pi_r-homomorphism"),
            rep.check_homomorphism(100, seed),
            "pi_R(k k') = pi_R(k) pi_R(k'), monomial".into(),
            String::new(),
            Source::Definitional,
        ));
    }

    let mats: Vec<(DcLabel, SparseMat)> = alg.basis.iter().map(|&l| (l, rep.pi_l_basis(l))).collect();
    let f = rep.field();

    // identity and traces
    let id = &mats.iter().find(|(l, _)| *l == DcLabel::Y(n)).unwrap().1;
    let is_identity = id.rows.iter().enumerate().all(|(i, row)| {
        row.len() == 1 && row[0].0 == i && f.reduce_counts(&row[0].1) == f.reduce_counts(&[1])
    });
    checks.push(Check::new(
        format!("{tag}.pi_l-identity"),
        is_identity,
        "identity matrix".into(),
        if is_identity { "identity matrix".into() } else { "other".into() },
        Source::Definitional,
    ));
    let mut traces = Vec::new();
    for (l, mat) in &mats {
        let tr = CycNum::from_reduced_ints(m, &mat.trace(f));
        traces.push(tr.to_string());
        if *l != DcLabel::Y(n) {
            checks.push(Check::new(
                format!("{tag}.trace.{l}"),
                tr.is_zero(),
                "0".into(),
                tr.to_string(),
                Source::Stated,
            ));
            let diag_zero = mat.rows.iter().enumerate().all(|(i, row)| row.iter().all(|(c, _)| *c != i));
            checks.push(Check::new(
                format!("{tag}.self-vanishing.{l}"),
                diag_zero,
                "pi_L(phi) phi_g vanishes at g".into(),
                if diag_zero { "vanishes".into() } else { "nonzero diagonal".into() },
                Source::Stated,
            ));
        }
    }

    if full {
        let mut hom_ok = true;
        let mut comm_ok = true;
        let t = alg.table();
        for (i, (_, a)) in mats.iter().enumerate() {
            for (j, (_, b)) in mats.iter().enumerate() {
                let lhs = a.mul(b).reduced(f);
                let mut rhs = SparseMat::zero(rep.dim(), m);
                for (k, (_, c)) in mats.iter().enumerate() {
                    let coeff = &t.c[i][j][k];
                    if coeff.is_zero() {
                        continue;
                    }
                    let Some(s) = coeff.as_i64() else {
                        hom_ok = false;
                        continue;
                    };
                    rhs.add_assign(c, s);
                }
                if lhs != rhs.reduced(f) {
                    hom_ok = false;
                }
            }
            if !rep.check_commutes(a, 100, seed ^ i as u64) {
                comm_ok = false;
            }
        }
        checks.push(Check::new(
            format!("{tag}.pi_l-multiplicative"),
            hom_ok,
            "pi_L(a) pi_L(b) = pi_L(a * b)".into(),
            if hom_ok { "holds".into() } else { "fails".into() },
            Source::Definitional,
        ));
        checks.push(Check::new(
            format!("{tag}.pi_l-commutes-pi_r"),
            comm_ok,
            "commutes with sampled pi_R(k)".into(),
            if comm_ok { "commutes".into() } else { "fails".into() },
            Source::Definitional,
        ));
    }

    // fixed vectors
    let mut fixed_dims = Vec::new();
    for mm in 0..=n {
        let fs = rep.fixed_subspace(mm);
        let want = expected_fixed_dim(r, mm);
        fixed_dims.push(fs.dim());
        checks.push(Check::new(
            format!("{tag}.fixed.m{mm}"),
            fs.dim() == want,
            want.to_string(),
            fs.dim().to_string(),
            Source::Stated,
        ));
        if mm < r {
            checks.push(Check::new(
                format!("{tag}.fixed.m{mm}.witness"),
                fs.witness.is_some(),
                "element of K0(p^m) with chi not multiplicative".into(),
                format!("{:?}", fs.witness),
                Source::Definitional,
            ));
        }
        if mm == n {
            let mut span_ok = fs.dim() == alg.dim();
            for &l in &alg.basis {
                let want: Vec<Option<u32>> = rep
                    .basis_vector(l)
                    .into_iter()
                    .map(|x| if x == 1 { Some(0) } else { None })
                    .collect();
                let hit = fs.vectors.iter().any(|v| {
                    let Some(i0) = v.iter().position(|x| x.is_some()) else { return false };
                    let Some(w0) = want[i0] else { return false };
                    let shift = (m + w0 as u64 - v[i0].unwrap() as u64) % m;
                    v.iter().zip(&want).all(|(a, b)| match (a, b) {
                        (None, None) => true,
                        (Some(a), Some(b)) => (*a as u64 + shift) % m == *b as u64,
                        _ => false,
                    })
                });
                span_ok &= hit;
            }
            checks.push(Check::new(
                format!("{tag}.fixed.equals-algebra"),
                span_ok,
                "span of basis functions".into(),
                if span_ok { "equal".into() } else { "different".into() },
                Source::Stated,
            ));
        }
    }
    for mm in r.max(1)..=n {
        let d = fixed_dims[mm as usize] as i64 - fixed_dims[mm as usize - 1] as i64;
        checks.push(Check::new(
            format!("{tag}.fixed.step.m{mm}"),
            d == 1,
            "1".into(),
            d.to_string(),
            Source::Stated,
        ));
    }

    let column_labels: Vec<String> = alg.basis.iter().map(|l| l.to_string()).collect();
    let mut report = SpectralReport {
        p,
        n,
        order: m,
        r,
        dim: rep.dim(),
        eigenvector_labels: Vec::new(),
        column_labels,
        y_table: Vec::new(),
        y_table_expected: Vec::new(),
        v_table: Vec::new(),
        v_table_expected: Vec::new(),
        traces,
        dims_projector: Vec::new(),
        dims_trace_system: Vec::new(),
        dims_expected: (r..=n).map(|k| expected_component_dim(p, r, k)).collect(),
        fixed_dims,
        checks: Vec::new(),
    };

    // projector ranks
    let (dims_a, idem) = rep.component_dims_projector();
    checks.push(Check::new(
        format!("{tag}.projectors-idempotent"),
        idem,
        "P^2 = P".into(),
        if idem { "holds".into() } else { "fails".into() },
        Source::Definitional,
    ));
    let sum_a: usize = dims_a.iter().sum();
    checks.push(Check::new(
        format!("{tag}.dims.projector"),
        dims_a.iter().map(|&d| d as u64).collect::<Vec<_>>() == report.dims_expected,
        format!("{:?}", report.dims_expected),
        format!("{dims_a:?}"),
        if r == 0 { Source::Oracle } else { Source::Stated },
    ));
    checks.push(Check::new(
        format!("{tag}.dims.sum"),
        sum_a == rep.dim(),
        rep.dim().to_string(),
        sum_a.to_string(),
        Source::Stated,
    ));
    report.dims_projector = dims_a.clone();

    if r >= 1 {
        let vecs = rep.eigenvectors();
        report.eigenvector_labels = vecs.iter().map(|(k, _)| format!("v{k}")).collect();
        // Y-table
        let mut y_ok = true;
        for (i, v) in &vecs {
            let mut row = Vec::new();
            let mut erow = Vec::new();
            for j in r..=n {
                let y = HeckeElem::y_element(alg, j).expect("j >= r");
                let lam = rep.eigenvalue(&rep.pi_l(&y), v);
                let e = expected_y(p, n, *i, j);
                y_ok &= lam.as_ref().and_then(|x| x.as_i64()) == Some(e);
                row.push(lam.map(|x| x.to_string()).unwrap_or_else(|| "not an eigenvector".into()));
                erow.push(s(e));
            }
            report.y_table.push(row);
            report.y_table_expected.push(erow);
        }
        checks.push(Check::new(
            format!("{tag}.table.Y"),
            y_ok,
            format!("{:?}", report.y_table_expected),
            format!("{:?}", report.y_table),
            Source::Stated,
        ));
        // V-table
        let mut v_ok = true;
        let mut lam_num: Vec<Vec<BigRational>> = Vec::new();
        for (i, v) in &vecs {
            let mut row = Vec::new();
            let mut erow = Vec::new();
            let mut nums = Vec::new();
            for (l, mat) in &mats {
                let DcLabel::Y(j) = *l else { continue };
                let lam = rep.eigenvalue(mat, v);
                let e = expected_v(p, n, *i, j);
                v_ok &= lam.as_ref().and_then(|x| x.as_i64()) == Some(e);
                nums.push(lam.as_ref().and_then(|x| x.as_rational()).unwrap_or_else(BigRational::zero));
                row.push(lam.map(|x| x.to_string()).unwrap_or_else(|| "not an eigenvector".into()));
                erow.push(s(e));
            }
            report.v_table.push(row);
            report.v_table_expected.push(erow);
            lam_num.push(nums);
        }
        checks.push(Check::new(
            format!("{tag}.table.V"),
            v_ok,
            format!("{:?}", report.v_table_expected),
            format!("{:?}", report.v_table),
            Source::Stated,
        ));
        // trace system: sum_i lambda(v_i, V_j) d_i = tr pi_L(V_j)
        let d = vecs.len();
        let mut aug: Vec<Vec<BigRational>> = Vec::new();
        for (col, (_, mat)) in mats.iter().enumerate() {
            let mut row: Vec<BigRational> = (0..d).map(|i| lam_num[i][col].clone()).collect();
            let tr = CycNum::from_reduced_ints(m, &mat.trace(f))
                .as_rational()
                .unwrap_or_else(BigRational::zero);
            row.push(tr);
            aug.push(row);
        }
        let sol = solve_rational(&mut aug);
        let dims_b: Vec<String> = match &sol {
            Some(x) => x
                .iter()
                .map(|v| if v.is_integer() { v.numer().to_string() } else { v.to_string() })
                .collect(),
            None => vec!["singular".into()],
        };
        let agree = dims_b == dims_a.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        checks.push(Check::new(
            format!("{tag}.dims.trace-system"),
            dims_b == report.dims_expected.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            format!("{:?}", report.dims_expected),
            format!("{dims_b:?}"),
            Source::Stated,
        ));
        checks.push(Check::new(
            format!("{tag}.dims.methods-agree"),
            agree,
            format!("{dims_a:?}"),
            format!("{dims_b:?}"),
            Source::Definitional,
        ));
        report.dims_trace_system = dims_b;
    } else {
        let dims_b: Vec<String> = rep
            .component_dims_trace()
            .iter()
            .map(|v| if v.is_integer() { v.numer().to_string() } else { v.to_string() })
            .collect();
        checks.push(Check::new(
            format!("{tag}.dims.trace"),
            dims_b == report.dims_expected.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            format!("{:?}", report.dims_expected),
            format!("{dims_b:?}"),
            Source::Oracle,
        ));
        checks.push(Check::new(
            format!("{tag}.dims.methods-agree"),
            dims_b == dims_a.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            format!("{dims_a:?}"),
            format!("{dims_b:?}"),
            Source::Definitional,
        ));
        report.dims_trace_system = dims_b;
    }
    report.checks = checks;
    report
}

/// Census of K0 \ K / K0: orbits of K0 on right cosets, one label per orbit.
pub fn double_coset_census(lvl: Level) -> Check {
    let gens = k0_generators(lvl, lvl.n);
    let orbits = crate::cosets::right_action_orbits(lvl, &gens);
    let norbits = orbits.iter().max().map(|x| x + 1).unwrap_or(0);
    let reps = right_coset_reps(lvl);
    let mut label_of_orbit = vec![None; norbits];
    let mut constant = true;
    for (i, g) in reps.iter().enumerate() {
        let l = double_coset_label(g);
        match label_of_orbit[orbits[i]] {
            None => label_of_orbit[orbits[i]] = Some(l),
            Some(x) if x != l => constant = false,
            _ => {}
        }
    }
    let labels = DcLabel::all(lvl);
    let rep_orbits: Vec<usize> = labels
        .iter()
        .map(|l| {
            let (idx, _) = coset_decompose(&l.rep(lvl));
            orbits[CosetIndex::position(&idx, lvl)]
        })
        .collect();
    let mut distinct = rep_orbits.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let ok = constant && norbits == labels.len() && distinct.len() == labels.len();
    Check::new(
        format!("p{}n{}.census", lvl.p, lvl.n),
        ok,
        format!("{} classes, one per representative", labels.len()),
        format!(
            "{norbits} orbits, representatives hit {} distinct, labels constant: {constant}",
            distinct.len()
        ),
        Source::Stated,
    )
}
