//! Placement of lower-level forms: eigenvalues on embedded old forms, level lowering by S,
//! and the span of all embedded old forms.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use hecke_core::arith::modular::divisors;
use hecke_core::report::{Check, Source};

use crate::dims;
use crate::eigen::membership_residual;
use crate::error::{ClassicalError, Result};
use crate::newspace::{exemption, REL_TOL};
use crate::ops::{self, CMat, OpConfig};
use crate::qexp::QExpansion;
use crate::space::CuspSpace;

/// Relative tolerance for membership residuals.
pub const MEMBER_TOL: f64 = 1e-6;

/// Coordinates of q-expansions in the basis of `space`, with the worst membership residual.
pub fn embed(space: &CuspSpace, forms: &[QExpansion], label: &str) -> (CMat, f64) {
    let op = ops::express(space, forms, label);
    (op.matrix, op.residual)
}

/// The lower-level space at M = N / p with the restricted character; the zero space
/// when the conductor does not divide M or the dimension formula gives 0.
pub fn lower_space(dir: &Path, space: &CuspSpace, p: u64) -> Result<CuspSpace> {
    let m = space.level / p;
    let Ok(chi) = space.chi.restrict_to(m) else {
        let trivial = hecke_core::arith::DirChar::trivial(m)?;
        return Ok(CuspSpace::zero(m, space.weight, trivial));
    };
    if dims::cusp_dim(&chi, space.weight)? == 0 {
        return Ok(CuspSpace::zero(m, space.weight, chi));
    }
    CuspSpace::find(dir, m, space.weight, &chi)
}

fn eig_residual(a: &CMat, c: &CMat, lambda: f64) -> f64 {
    if c.ncols() == 0 {
        return 0.0;
    }
    (a * c - c * Complex64::from(lambda)).norm() / (c.norm() * lambda.abs()).max(f64::MIN_POSITIVE)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlacementReport {
    pub space: String,
    pub prime: u64,
    pub exponent: u32,
    pub lower: String,
    pub lower_dim: usize,
    pub checks: Vec<Check>,
}

fn member_check(id: String, res: f64, what: &str, source: Source) -> Check {
    Check::new(id, res <= MEMBER_TOL, format!("{what}, residual <= {MEMBER_TOL:e}"), format!("{res:.3e}"), source)
}

/// Placement checks at one prime p dividing N.
pub fn placement(dir: &Path, space: &CuspSpace, p: u64, cfg: &OpConfig) -> Result<PlacementReport> {
    let e = dims::p_exponent(space.level, p);
    if e == 0 {
        return Err(ClassicalError::NotExact { p, n: 1, level: space.level });
    }
    let lower = lower_space(dir, space, p)?;
    let id = format!("{}.old.{p}", space.id);
    let mut checks = Vec::new();
    let (c, res) = embed(space, &lower.basis, "embed");
    checks.push(member_check(format!("{id}.embed"), res, &format!("{} inside {}", lower.id, space.id), Source::Definitional));
    let pf = p as f64;
    if let Some(why) = exemption(space, p) {
        checks.push(Check::new(format!("{id}.exempt"), true, "no condition".into(), why, Source::Stated));
    } else if e == 1 {
        let q = ops::op_q(space, p, cfg)?;
        let vp: Vec<QExpansion> = lower.basis.iter().map(|g| g.vp(p)).collect();
        let (cv, res_v) = embed(space, &vp, "embed V(p)");
        checks.push(member_check(format!("{id}.embed-vp"), res_v, "V(p) images inside the space", Source::Definitional));
        let r = eig_residual(&q.q.matrix, &c, pf);
        checks.push(member_check(format!("{id}.Q.lower"), r, &format!("Q_{p} g = {p} g"), Source::Stated));
        let r = eig_residual(&q.qprime.matrix, &cv, pf);
        checks.push(member_check(format!("{id}.Qprime.vp"), r, &format!("Q'_{p} V(p)g = {p} V(p)g"), Source::Stated));
        // W_p g = p^(k/2) chi^(M)(p) V(p) g
        let s = pf.powf(space.weight as f64 / 2.0) * ops::chi_m_at(space, p, p);
        let r = if c.ncols() == 0 {
            0.0
        } else {
            (&q.w.matrix * &c - &cv * s).norm() / (cv.norm() * s.norm()).max(f64::MIN_POSITIVE)
        };
        checks.push(member_check(format!("{id}.W.lower"), r, "W_p g = p^(k/2) chi^(M)(p) V(p)g", Source::Stated));
    } else {
        let r = e - 1;
        let s = ops::op_s(space, p, e, r, cfg)?;
        let lam = pf.powi((e - r) as i32);
        let rr = eig_residual(&s.matrix, &c, lam);
        checks.push(member_check(format!("{id}.S.lower"), rr, &format!("S_{},{r} g = {lam} g", p.pow(e)), Source::Stated));
        // images of S lie in the span of the embedded level p^r M forms
        let img = membership_image(&c, &s.matrix);
        checks.push(member_check(format!("{id}.S.image"), img, "S images in the lower span", Source::Stated));
    }
    Ok(PlacementReport {
        space: space.id.clone(),
        prime: p,
        exponent: e,
        lower: lower.id.clone(),
        lower_dim: lower.dim(),
        checks,
    })
}

/// Residual of the columns of `s` in the column span of `c`. With an empty span the image
/// itself must vanish, measured against the unit scale of the coordinates.
fn membership_image(c: &CMat, s: &CMat) -> f64 {
    if c.ncols() == 0 {
        return s.norm() / (s.nrows() as f64).sqrt().max(1.0);
    }
    membership_residual(c, s)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OldSpanReport {
    pub space: String,
    pub rank: usize,
    pub expected: i64,
    pub missing: Vec<String>,
    pub checks: Vec<Check>,
}

/// Rank of all V(d) g, for g in lower-level fixtures and d | N/M, equals dim S - dim S^new,
/// and adding a new-space basis fills the whole space.
pub fn old_span(dir: &Path, space: &CuspSpace, newspace: Option<&CMat>) -> Result<OldSpanReport> {
    let cond = space.chi.conductor();
    let mut forms = Vec::new();
    let mut missing = Vec::new();
    for m in divisors(space.level) {
        if m == space.level || m % cond != 0 {
            continue;
        }
        let chi = space.chi.restrict_to(m)?;
        if dims::cusp_dim(&chi, space.weight)? == 0 {
            continue;
        }
        match CuspSpace::find(dir, m, space.weight, &chi) {
            Ok(lower) => {
                for d in divisors(space.level / m) {
                    forms.extend(lower.basis.iter().map(|g| g.vp(d)));
                }
            }
            Err(_) => missing.push(format!("{m}.{}.{}", space.weight, chi.conrey_label())),
        }
    }
    let (c, res) = embed(space, &forms, "old span");
    let rank = numeric_rank(&c);
    let expected = dims::old_dim(&space.chi, space.weight)?;
    let id = format!("{}.old-span", space.id);
    let mut checks = vec![
        member_check(format!("{id}.embed"), res, "V(d) images inside the space", Source::Definitional),
        Check::new(
            format!("{id}.rank"),
            missing.is_empty() && rank as i64 == expected,
            expected.to_string(),
            rank.to_string(),
            Source::Oracle,
        ),
    ];
    if let Some(nb) = newspace {
        let full = CMat::from_fn(space.dim(), c.ncols() + nb.ncols(), |i, j| {
            if j < c.ncols() {
                c[(i, j)]
            } else {
                nb[(i, j - c.ncols())]
            }
        });
        let r = numeric_rank(&full);
        checks.push(Check::new(
            format!("{id}.complement"),
            r == space.dim(),
            space.dim().to_string(),
            r.to_string(),
            Source::Stated,
        ));
    }
    Ok(OldSpanReport {
        space: space.id.clone(),
        rank,
        expected,
        missing,
        checks,
    })
}

/// Number of singular values above 1e-6 of the largest, after column normalization.
pub fn numeric_rank(m: &CMat) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let mut n = m.clone();
    for mut col in n.column_iter_mut() {
        let s = col.norm();
        if s > 0.0 {
            col.unscale_mut(s);
        }
    }
    let sv = n.singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > REL_TOL * top).count()
}
