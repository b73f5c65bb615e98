//! Operator matrices on a fixture basis, by least squares against sampled values
//! or against q-expansion coefficients.
//!
//! Convention: T(f_i) = sum_j X[j][i] g_j, so composition is matrix product.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ClassicalError, Result};
use crate::qexp::{QExpansion, IM_FLOOR};
use crate::slash::{atkin_lehner_matrix, coset_rep, unit_classes, Role, SlashMatrix};
use crate::space::{reduced_height, CuspSpace};

pub type CMat = DMatrix<Complex64>;

/// Margin over the imaginary floor required of every reduced slash image.
const SAFETY: f64 = 2.0;

/// A weighted slash matrix.
#[derive(Clone, Copy, Debug)]
pub struct Term {
    pub coeff: Complex64,
    pub mat: SlashMatrix,
}

impl Term {
    pub fn new(coeff: Complex64, mat: SlashMatrix) -> Self {
        Term { coeff, mat }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpConfig {
    pub y_min: f64,
    pub y_max: f64,
    pub floor: f64,
    pub max_conditioning: f64,
    pub max_resamples: usize,
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for OpConfig {
    fn default() -> Self {
        OpConfig {
            y_min: 0.08,
            y_max: 0.6,
            floor: IM_FLOOR,
            max_conditioning: 1e8,
            max_resamples: 5,
            residual_tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OpMatrix {
    pub label: String,
    pub matrix: CMat,
    pub residual: f64,
    pub conditioning: f64,
    pub min_height: f64,
    pub points: usize,
    pub poisoned: bool,
}

/// Serializable summary of an operator matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpSummary {
    pub label: String,
    pub rows: usize,
    pub cols: usize,
    pub residual: f64,
    pub conditioning: f64,
    pub min_height: f64,
    pub points: usize,
    pub poisoned: bool,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl OpMatrix {
    pub fn summary(&self) -> OpSummary {
        OpSummary {
            label: self.label.clone(),
            rows: self.matrix.nrows(),
            cols: self.matrix.ncols(),
            residual: self.residual,
            conditioning: self.conditioning,
            min_height: self.min_height,
            points: self.points,
            poisoned: self.poisoned,
            matrix: (0..self.matrix.nrows())
                .map(|i| {
                    (0..self.matrix.ncols())
                        .map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
    }

    /// self * other, with bookkeeping merged.
    pub fn then_after(&self, other: &OpMatrix, label: &str) -> OpMatrix {
        OpMatrix {
            label: label.into(),
            matrix: &self.matrix * &other.matrix,
            residual: self.residual.max(other.residual),
            conditioning: self.conditioning.max(other.conditioning),
            min_height: self.min_height.min(other.min_height),
            points: self.points.max(other.points),
            poisoned: self.poisoned || other.poisoned,
        }
    }

    pub fn scaled(mut self, s: Complex64, label: &str) -> OpMatrix {
        self.matrix *= s;
        self.label = label.into();
        self
    }

    pub fn require_clean(&self) -> Result<&Self> {
        if self.poisoned {
            Err(ClassicalError::Poisoned(self.label.clone(), self.residual, self.conditioning))
        } else {
            Ok(self)
        }
    }
}

fn halton(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Low-discrepancy points in |Re z| <= 1/2, y_min <= Im z <= y_max. A point is usable when z and
/// all its slash images reduce to height at least the floor; usable points are taken in sequence
/// order above a cut that is `SAFETY * floor` unless fewer than `4 * count` candidates clear it.
pub fn sample_points(
    src: &CuspSpace,
    dst: &CuspSpace,
    terms: &[Term],
    count: usize,
    cfg: &OpConfig,
    attempt: usize,
) -> Result<(Vec<Complex64>, f64)> {
    let start = 1 + (cfg.seed % 1009) * 4001 + attempt as u64 * 6007;
    let cands: Vec<(f64, Complex64)> = (start..start + 4000)
        .map(|i| {
            let x = halton(i, 2) - 0.5;
            let y = cfg.y_min + (cfg.y_max - cfg.y_min) * halton(i, 3);
            let z = Complex64::new(x, y);
            let mut score = reduced_height(z, dst.level);
            for t in terms {
                score = score.min(reduced_height(t.mat.act(z), src.level));
            }
            (score, z)
        })
        .filter(|(s, _)| *s >= cfg.floor)
        .collect();
    if cands.len() < count {
        return Err(ClassicalError::NoPoints);
    }
    let mut scores: Vec<f64> = cands.iter().map(|c| c.0).collect();
    scores.sort_by(|a, b| b.total_cmp(a));
    let cut = (SAFETY * cfg.floor).min(scores[(4 * count).min(scores.len()) - 1]);
    let chosen: Vec<(f64, Complex64)> = cands.into_iter().filter(|c| c.0 >= cut).take(count).collect();
    let min_h = chosen.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    Ok((chosen.into_iter().map(|c| c.1).collect(), min_h))
}

fn rows_at(points: &[Complex64], f: impl Fn(Complex64) -> Result<Vec<Complex64>> + Sync) -> Result<Vec<Vec<Complex64>>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points.par_iter().map(|&z| f(z)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points.iter().map(|&z| f(z)).collect()
    }
}

fn to_mat(rows: &[Vec<Complex64>], ncols: usize) -> CMat {
    CMat::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Least-squares X with V X = W and the relative residual.
pub fn lstsq(v: &CMat, w: &CMat) -> (CMat, f64, f64) {
    if v.ncols() == 0 {
        return (CMat::zeros(0, w.ncols()), 0.0, 1.0);
    }
    // equilibrate columns
    let scales: Vec<f64> = v.column_iter().map(|c| c.norm().max(f64::MIN_POSITIVE)).collect();
    let mut vs = v.clone();
    for (j, s) in scales.iter().enumerate() {
        vs.column_mut(j).unscale_mut(*s);
    }
    let svd = vs.try_svd(true, true, f64::EPSILON, 10_000).expect("svd converges");
    let sv = &svd.singular_values;
    let cond = if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY };
    let mut x = svd.solve(w, 1e-14 * sv.max()).expect("svd with u and v");
    for (j, s) in scales.iter().enumerate() {
        x.row_mut(j).unscale_mut(*s);
    }
    let res = (v * &x - w).norm();
    let scale = w.norm();
    (x, if scale > 0.0 { res / scale } else { res }, cond)
}

/// Matrix of f -> sum_t coeff_t f|A_t from S(src) into S(dst).
pub fn op_matrix(src: &CuspSpace, dst: &CuspSpace, terms: &[Term], label: &str, cfg: &OpConfig) -> Result<OpMatrix> {
    let (ds, dd) = (src.dim(), dst.dim());
    let count = (4 * ds.max(dd)).max(8);
    let mut last = None;
    for attempt in 0..=cfg.max_resamples {
        let (pts, min_h) = sample_points(src, dst, terms, count, cfg, attempt)?;
        let v_rows = rows_at(&pts, |z| dst.eval_all(z))?;
        let w_rows = rows_at(&pts, |z| {
            let mut acc = vec![Complex64::new(0.0, 0.0); ds];
            for t in terms {
                for (a, v) in acc.iter_mut().zip(src.slash_all(&t.mat, z)?) {
                    *a += t.coeff * v;
                }
            }
            Ok(acc)
        })?;
        let v = to_mat(&v_rows, dd);
        let w = to_mat(&w_rows, ds);
        let (x, mut res, cond) = lstsq(&v, &w);
        if dd == 0 || w.norm() < 1e-9 * base_norm(src, &pts)? {
            // image is (numerically) zero: measure against the size of the source values
            res = (&v * &x - &w).norm() / base_norm(src, &pts)?.max(f64::MIN_POSITIVE);
        }
        let op = OpMatrix {
            label: label.into(),
            matrix: x,
            residual: res,
            conditioning: cond,
            min_height: min_h,
            points: pts.len(),
            poisoned: res > cfg.residual_tol || cond > cfg.max_conditioning,
        };
        if cond <= cfg.max_conditioning {
            return Ok(op);
        }
        last = Some(op);
    }
    Ok(last.expect("at least one attempt"))
}

fn base_norm(src: &CuspSpace, pts: &[Complex64]) -> Result<f64> {
    let rows = rows_at(pts, |z| src.eval_all(z))?;
    Ok(to_mat(&rows, src.dim()).norm())
}

/// Express q-expansions in the basis of `space` by matching coefficients.
pub fn express(space: &CuspSpace, targets: &[QExpansion], label: &str) -> OpMatrix {
    let d = space.dim();
    let len = targets
        .iter()
        .map(|t| t.precision())
        .chain(std::iter::once(space.precision))
        .min()
        .unwrap_or(0)
        .min(400);
    let k = space.weight as f64;
    let wgt = |n: usize| 1.0 / ((n + 1) as f64).powf((k - 1.0) / 2.0);
    let v = CMat::from_fn(len, d, |n, j| space.basis[j].coeffs[n] * wgt(n));
    let w = CMat::from_fn(len, targets.len(), |n, i| targets[i].coeffs[n] * wgt(n));
    let (x, res, cond) = lstsq(&v, &w);
    let res = if w.norm() == 0.0 { 0.0 } else { res };
    OpMatrix {
        label: label.into(),
        matrix: x,
        residual: res,
        conditioning: cond,
        min_height: f64::INFINITY,
        points: len,
        poisoned: res > 1e-6,
    }
}

pub fn op_identity(space: &CuspSpace, cfg: &OpConfig) -> Result<OpMatrix> {
    op_matrix(space, space, &[Term::new(1.0.into(), SlashMatrix::identity())], "identity", cfg)
}

/// An element of Gamma0(N) with lower-left N and lower-right d.
pub fn gamma0_element(level: u64, d: i64) -> SlashMatrix {
    let c = level as i64;
    let (g, x, y) = hecke_core::arith::modular::egcd(d, c);
    assert_eq!(g, 1);
    SlashMatrix::new(x, -y, c, d, Role::Gamma0)
}

/// U_p through p^(k-1) sum_s f | (1, s; 0, p).
pub fn op_up_sampled(space: &CuspSpace, p: u64, cfg: &OpConfig) -> Result<OpMatrix> {
    let s = (p as f64).powi(space.weight as i32 - 1);
    let terms: Vec<Term> = (0..p as i64)
        .map(|t| Term::new(s.into(), SlashMatrix::new(1, t, 0, p as i64, Role::Dilation)))
        .collect();
    op_matrix(space, space, &terms, &format!("U_{p} (sampled)"), cfg)
}

/// U_p through the coefficient rule b_n = p^(k/2) a_{pn}.
pub fn op_up_coefficients(space: &CuspSpace, p: u64) -> Result<OpMatrix> {
    let imgs = space.basis.iter().map(|f| f.up(p)).collect::<Result<Vec<_>>>()?;
    Ok(express(space, &imgs, &format!("U_{p} (coefficients)")))
}

/// U~_p = p^(1-k) U_p through b_n = p^(1-k/2) a_{pn}.
pub fn op_u_tilde(space: &CuspSpace, p: u64) -> Result<OpMatrix> {
    let imgs = space.basis.iter().map(|f| f.u_tilde(p)).collect::<Result<Vec<_>>>()?;
    Ok(express(space, &imgs, &format!("U~_{p}")))
}

/// W_{p^n} from S(src) into S(dst); dst carries the character conj(chi^(p^n)) chi^(M).
pub fn op_w(src: &CuspSpace, dst: &CuspSpace, p: u64, n: u32, cfg: &OpConfig) -> Result<OpMatrix> {
    let w = atkin_lehner_matrix(p, n, src.level)?;
    op_matrix(src, dst, &[Term::new(1.0.into(), w)], &format!("W_{}", p.pow(n)), cfg)
}

/// chi^(p^n)(-1) chi^(M)(p^n): the scalar by which W acts twice.
pub fn w_square_scalar(space: &CuspSpace, p: u64, n: u32) -> Complex64 {
    let comp = space.chi.component(p);
    let away = space.chi.away_from(p);
    comp.value_c64(-1) * away.value_c64(p.pow(n) as i64)
}

/// chi^(M)(p): chi at x = p mod M, x = 1 mod p^n.
pub fn chi_m_at(space: &CuspSpace, p: u64, x: u64) -> Complex64 {
    space.chi.away_from(p).value_c64(x as i64)
}

/// Q_p, Q'_p and W_p for p exactly dividing N with chi^(p) trivial.
pub struct QOperators {
    pub w: OpMatrix,
    pub u_tilde: OpMatrix,
    pub q: OpMatrix,
    pub qprime: OpMatrix,
    pub w_square_error: f64,
}

pub fn op_q(space: &CuspSpace, p: u64, cfg: &OpConfig) -> Result<QOperators> {
    let w = op_w(space, space, p, 1, cfg)?;
    let u = op_u_tilde(space, p)?;
    let cm = chi_m_at(space, p, p);
    let q = u.then_after(&w, &format!("Q_{p}")).scaled(cm.conj(), &format!("Q_{p}"));
    // W^-1 = chi^(p)(-1) conj(chi^(M)(p)) W
    let c = space.chi.component(p).value_c64(-1) * cm.conj();
    let winv = w.clone().scaled(c, &format!("W_{p}^-1"));
    let qprime = w.then_after(&q, "tmp").then_after(&winv, &format!("Q'_{p}"));
    let scalar = w_square_scalar(space, p, 1);
    let d = space.dim();
    let w2 = &w.matrix * &w.matrix - CMat::identity(d, d) * scalar;
    let w_square_error = if d == 0 { 0.0 } else { w2.norm() / (d as f64).sqrt() };
    Ok(QOperators {
        w,
        u_tilde: u,
        q,
        qprime,
        w_square_error,
    })
}

/// Terms of S_{p^n,r}: identity plus conj(chi(d)) f|A_{s,j}, r <= j < n.
pub fn s_terms(space: &CuspSpace, p: u64, n: u32, r: u32) -> Vec<Term> {
    let m = space.level / p.pow(n);
    let mut terms = vec![Term::new(1.0.into(), SlashMatrix::identity())];
    for j in r..n {
        for s in unit_classes(p, n - j) {
            let a = coset_rep(p, n, m, s, j);
            terms.push(Term::new(space.chi_at(a.d).conj(), a));
        }
    }
    terms
}

fn check_s_args(space: &CuspSpace, p: u64, n: u32, r: u32) -> Result<()> {
    let q = p.pow(n);
    if !space.level.is_multiple_of(q) || (space.level / q).is_multiple_of(p) {
        return Err(ClassicalError::NotExact { p, n, level: space.level });
    }
    let c = space.chi.conductor_exponent(p);
    if r < c {
        return Err(ClassicalError::BelowConductor { r, c });
    }
    Ok(())
}

pub fn op_s(space: &CuspSpace, p: u64, n: u32, r: u32, cfg: &OpConfig) -> Result<OpMatrix> {
    check_s_args(space, p, n, r)?;
    op_matrix(space, space, &s_terms(space, p, n, r), &format!("S_{},{r}", p.pow(n)), cfg)
}

/// S'_{p^n,r} = W S^F W^-1 where S^F acts on the flipped space.
pub struct SPrime {
    pub s_flipped: OpMatrix,
    pub w_to_flipped: OpMatrix,
    pub w_from_flipped: OpMatrix,
    pub sprime: OpMatrix,
    pub w_square_error: f64,
}

pub fn op_sprime(space: &CuspSpace, flipped: &CuspSpace, p: u64, n: u32, r: u32, cfg: &OpConfig) -> Result<SPrime> {
    check_s_args(space, p, n, r)?;
    let want = space.chi.flip_at(p);
    if flipped.chi != want || flipped.level != space.level || flipped.weight != space.weight {
        return Err(ClassicalError::MissingFixture(format!(
            "{}.{}.{}",
            space.level,
            space.weight,
            want.conrey_label()
        )));
    }
    let sf = op_s(flipped, p, n, r, cfg)?;
    let w1 = op_w(space, flipped, p, n, cfg)?;
    let w2 = op_w(flipped, space, p, n, cfg)?;
    let c = w_square_scalar(space, p, n);
    let winv = w1.clone().scaled(c.conj(), "W^-1");
    let sprime = w2.then_after(&sf, "tmp").then_after(&winv, &format!("S'_{},{r}", p.pow(n)));
    let d = space.dim();
    let e = &w2.matrix * &w1.matrix - CMat::identity(d, d) * c;
    let w_square_error = if d == 0 { 0.0 } else { e.norm() / (d as f64).sqrt() };
    Ok(SPrime {
        s_flipped: sf,
        w_to_flipped: w1,
        w_from_flipped: w2,
        sprime,
        w_square_error,
    })
}
