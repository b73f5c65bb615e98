//! The newspace as an intersection of eigenspaces of Q_p, Q'_p, S_{p^n,n-1} and S'_{p^n,n-1}.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use hecke_core::arith::modular::{factorize, gcd};
use hecke_core::report::{Check, Source};

use crate::dims;
use crate::eigen::{intersection, quadratic_defect, spectrum_within, SpectrumCheck, MIN_GAP};
use crate::error::Result;
use crate::ops::{self, OpConfig, OpMatrix, OpSummary};
use crate::space::CuspSpace;

/// Relative tolerance for quadratic relations, W^2 and spectra.
pub const REL_TOL: f64 = 1e-6;
/// Agreement required between the sampled and coefficient routes for U_p.
pub const UP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Q,
    Qprime,
    S,
    Sprime,
}

impl OpKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "q" => Some(OpKind::Q),
            "qprime" => Some(OpKind::Qprime),
            "s" => Some(OpKind::S),
            "sprime" => Some(OpKind::Sprime),
            _ => None,
        }
    }
}

/// One operator imposed at a prime, with its two admissible eigenvalues.
#[derive(Clone, Debug)]
pub struct Condition {
    pub prime: u64,
    pub exponent: u32,
    pub kind: OpKind,
    pub op: OpMatrix,
    /// Eigenvalue cutting out new forms.
    pub new_value: f64,
    /// The other eigenvalue.
    pub old_value: f64,
    /// Error in W^2 = scalar for the Atkin-Lehner matrices involved.
    pub w_square_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub prime: u64,
    pub exponent: u32,
    pub kind: OpKind,
    pub new_value: f64,
    pub old_value: f64,
    pub quadratic_defect: f64,
    pub w_square_error: f64,
    pub spectrum: SpectrumCheck,
    pub op: OpSummary,
}

impl Condition {
    pub fn record(&self) -> ConditionRecord {
        ConditionRecord {
            prime: self.prime,
            exponent: self.exponent,
            kind: self.kind,
            new_value: self.new_value,
            old_value: self.old_value,
            quadratic_defect: self.defect(),
            w_square_error: self.w_square_error,
            spectrum: self.spectrum(),
            op: self.op.summary(),
        }
    }

    pub fn defect(&self) -> f64 {
        quadratic_defect(&self.op.matrix, self.new_value.into(), self.old_value.into())
    }

    pub fn spectrum(&self) -> SpectrumCheck {
        spectrum_within(&self.op.matrix, &[self.new_value.into(), self.old_value.into()], REL_TOL)
    }

    /// Quadratic relation, spectrum containment, W^2 and residual checks.
    pub fn checks(&self, space: &str) -> Vec<Check> {
        let id = format!("{space}.{}", self.op.label);
        let d = self.defect();
        let sp = self.spectrum();
        let rel = format!("({} - {})({} - {}) = 0", self.op.label, self.new_value, self.op.label, self.old_value);
        vec![
            Check::new(
                format!("{id}.residual"),
                !self.op.poisoned,
                format!("residual <= {:e}", OpConfig::default().residual_tol),
                format!("residual {:.3e}, conditioning {:.3e}", self.op.residual, self.op.conditioning),
                Source::Definitional,
            ),
            Check::new(
                format!("{id}.quadratic"),
                d <= REL_TOL && !self.op.poisoned,
                format!("{rel} to {REL_TOL:e}"),
                format!("{d:.3e}"),
                Source::Stated,
            ),
            Check::new(
                format!("{id}.spectrum"),
                sp.passed,
                format!("eigenvalues in {{{}, {}}}", self.new_value, self.old_value),
                format!("max distance {:.3e}", sp.max_distance),
                Source::Stated,
            ),
            Check::new(
                format!("{id}.w-square"),
                self.w_square_error <= REL_TOL,
                "W^2 = chi^(p^n)(-1) chi^(M)(p^n)".into(),
                format!("{:.3e}", self.w_square_error),
                Source::Stated,
            ),
        ]
    }
}

/// Load the companion space with character conj(chi^(p^n)) chi^(M).
pub fn flipped_space(dir: &Path, space: &CuspSpace, p: u64) -> Result<CuspSpace> {
    let chi = space.chi.flip_at(p);
    if chi == space.chi {
        return Ok(space.clone());
    }
    CuspSpace::find(dir, space.level, space.weight, &chi)
}

/// Why a prime dividing N imposes no condition, or None if it does.
pub fn exemption(space: &CuspSpace, p: u64) -> Option<String> {
    let e = dims::p_exponent(space.level, p);
    let c = space.chi.conductor_exponent(p);
    if e == 1 && c > 0 {
        Some(format!("chi is nontrivial at {p}"))
    } else if e >= 2 && c == e {
        Some(format!("chi is primitive at {p}^{e}"))
    } else {
        None
    }
}

/// Operators at p for the requested kinds (all applicable ones when `only` is None).
pub fn conditions_at(
    dir: &Path,
    space: &CuspSpace,
    p: u64,
    only: Option<OpKind>,
    cfg: &OpConfig,
) -> Result<Vec<Condition>> {
    let e = dims::p_exponent(space.level, p);
    let want = |k: OpKind| only.is_none_or(|o| o == k);
    let mut out = Vec::new();
    if e == 0 || exemption(space, p).is_some() {
        return Ok(out);
    }
    let pf = p as f64;
    if e == 1 {
        if !want(OpKind::Q) && !want(OpKind::Qprime) {
            return Ok(out);
        }
        let q = ops::op_q(space, p, cfg)?;
        for (kind, op) in [(OpKind::Q, q.q), (OpKind::Qprime, q.qprime)] {
            if want(kind) {
                out.push(Condition {
                    prime: p,
                    exponent: 1,
                    kind,
                    op,
                    new_value: -1.0,
                    old_value: pf,
                    w_square_error: q.w_square_error,
                });
            }
        }
    } else {
        let r = e - 1;
        if want(OpKind::S) {
            let op = ops::op_s(space, p, e, r, cfg)?;
            out.push(Condition {
                prime: p,
                exponent: e,
                kind: OpKind::S,
                op,
                new_value: 0.0,
                old_value: pf,
                w_square_error: 0.0,
            });
        }
        if want(OpKind::Sprime) {
            let flipped = flipped_space(dir, space, p)?;
            let sp = ops::op_sprime(space, &flipped, p, e, r, cfg)?;
            out.push(Condition {
                prime: p,
                exponent: e,
                kind: OpKind::Sprime,
                op: sp.sprime,
                new_value: 0.0,
                old_value: pf,
                w_square_error: sp.w_square_error,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewspaceReport {
    pub space: String,
    pub level: u64,
    pub weight: u32,
    pub conrey: u64,
    pub dim: usize,
    pub conditions: Vec<ConditionRecord>,
    pub exempt: Vec<String>,
    pub intersection_dim: usize,
    pub singular_values: Vec<f64>,
    pub gap: f64,
    pub oracle_cusp: i64,
    pub oracle_new: i64,
    pub fixture_new: Option<usize>,
    pub checks: Vec<Check>,
    pub seconds: f64,
    /// Orthonormal basis of the intersection, in fixture coordinates.
    #[serde(skip)]
    pub basis: Option<ops::CMat>,
}

/// Intersect the new-form eigenspaces of every qualifying operator and compare with the oracle.
pub fn characterize(dir: &Path, space: &CuspSpace, cfg: &OpConfig) -> Result<NewspaceReport> {
    let start = Instant::now();
    let mut conds = Vec::new();
    let mut exempt = Vec::new();
    for (p, _) in factorize(space.level) {
        match exemption(space, p) {
            Some(why) => exempt.push(why),
            None => conds.extend(conditions_at(dir, space, p, None, cfg)?),
        }
    }
    let pairs: Vec<(&OpMatrix, Complex64)> = conds.iter().map(|c| (&c.op, c.new_value.into())).collect();
    let inter = intersection(&pairs, space.dim())?;
    let oracle_cusp = dims::cusp_dim(&space.chi, space.weight)?;
    let oracle_new = dims::new_dim(&space.chi, space.weight)?;
    let mut checks: Vec<Check> = conds.iter().flat_map(|c| c.checks(&space.id)).collect();
    let id = &space.id;
    checks.push(Check::new(
        format!("{id}.dimension"),
        oracle_cusp == space.dim() as i64,
        oracle_cusp.to_string(),
        space.dim().to_string(),
        Source::Oracle,
    ));
    checks.push(Check::new(
        format!("{id}.newspace.dimension"),
        inter.dim() as i64 == oracle_new,
        oracle_new.to_string(),
        inter.dim().to_string(),
        Source::Oracle,
    ));
    checks.push(Check::new(
        format!("{id}.newspace.gap"),
        inter.gap >= MIN_GAP,
        format!(">= {MIN_GAP:e}"),
        format!("{:.3e}", inter.gap),
        Source::Definitional,
    ));
    if let Some(d) = &space.dims {
        checks.push(Check::new(
            format!("{id}.newspace.fixture"),
            d.new as i64 == oracle_new && d.cusp as i64 == oracle_cusp,
            format!("cusp {}, new {}", d.cusp, d.new),
            format!("cusp {oracle_cusp}, new {oracle_new}"),
            Source::Oracle,
        ));
    }
    Ok(NewspaceReport {
        space: space.id.clone(),
        level: space.level,
        weight: space.weight,
        conrey: space.chi.conrey_label(),
        dim: space.dim(),
        conditions: conds.iter().map(|c| c.record()).collect(),
        exempt,
        intersection_dim: inter.dim(),
        singular_values: inter.singular_values.clone(),
        gap: inter.gap,
        oracle_cusp,
        oracle_new,
        fixture_new: space.dims.as_ref().map(|d| d.new),
        checks,
        seconds: start.elapsed().as_secs_f64(),
        basis: Some(inter.basis),
    })
}

/// Basic operator checks on a single space: identity, a Gamma0(N) element, U_p by two routes
/// and W^2 for every prime power exactly dividing N.
pub fn space_checks(space: &CuspSpace, cfg: &OpConfig) -> Result<Vec<Check>> {
    let id = &space.id;
    let n = space.dim();
    let mut out = Vec::new();
    let rel = |a: &ops::CMat, b: &ops::CMat| (a - b).norm() / b.norm().max(1.0);
    let eye = ops::CMat::identity(n, n);
    let idop = ops::op_identity(space, cfg)?;
    out.push(Check::new(
        format!("{id}.identity"),
        rel(&idop.matrix, &eye) <= REL_TOL,
        "I".into(),
        format!("{:.3e}", rel(&idop.matrix, &eye)),
        Source::Definitional,
    ));
    // a lower-right entry that is not 1 mod N when one exists
    let d = (2..space.level + 2)
        .find(|&d| gcd(d, space.level) == 1 && (d % space.level != 1 || space.level <= 2))
        .unwrap_or(1) as i64;
    let g = ops::gamma0_element(space.level, d);
    let gop = ops::op_matrix(space, space, &[ops::Term::new(1.0.into(), g)], "gamma", cfg)?;
    let want = &eye * space.chi_at(g.d);
    out.push(Check::new(
        format!("{id}.gamma0"),
        rel(&gop.matrix, &want) <= REL_TOL,
        format!("chi({}) I", g.d),
        format!("{:.3e}", rel(&gop.matrix, &want)),
        Source::Stated,
    ));
    for (p, e) in factorize(space.level) {
        let a = ops::op_up_sampled(space, p, cfg)?;
        let b = ops::op_up_coefficients(space, p)?;
        let diff = rel(&a.matrix, &b.matrix);
        out.push(Check::new(
            format!("{id}.U_{p}.routes"),
            diff <= UP_TOL && !a.poisoned && !b.poisoned,
            format!("agreement to {UP_TOL:e}"),
            format!("{diff:.3e}"),
            Source::Oracle,
        ));
        // W maps to the flipped character; only square it when the space is its own flip
        if space.chi.flip_at(p) == space.chi {
            let w = ops::op_w(space, space, p, e, cfg)?;
            let s = ops::w_square_scalar(space, p, e);
            let err = rel(&(&w.matrix * &w.matrix), &(&eye * s));
            out.push(Check::new(
                format!("{id}.W_{}.square", p.pow(e)),
                err <= REL_TOL,
                format!("{s:.6} I"),
                format!("{err:.3e}"),
                Source::Stated,
            ));
        }
    }
    Ok(out)
}
