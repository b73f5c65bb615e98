//! Eigenspaces by singular-value thresholding and spectral checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ops::{CMat, OpMatrix};

/// Relative threshold separating null singular values.
pub const NULL_TOL: f64 = 1e-6;
/// Required ratio between the smallest kept and largest discarded singular value.
pub const MIN_GAP: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct Eigenspace {
    /// Orthonormal columns.
    pub basis: CMat,
    pub singular_values: Vec<f64>,
    /// Ratio between the smallest non-null and the largest null singular value.
    pub gap: f64,
}

impl Eigenspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn gap_ok(&self) -> bool {
        self.gap >= MIN_GAP
    }
}

/// Null space of the stacked matrix [A_1; A_2; ...] (all with the same column count).
pub fn stacked_kernel(mats: &[CMat], dim: usize) -> Eigenspace {
    if dim == 0 {
        return Eigenspace {
            basis: CMat::zeros(0, 0),
            singular_values: vec![],
            gap: f64::INFINITY,
        };
    }
    let rows: usize = mats.iter().map(|m| m.nrows()).sum();
    if rows == 0 {
        return Eigenspace {
            basis: CMat::identity(dim, dim),
            singular_values: vec![0.0; dim],
            gap: f64::INFINITY,
        };
    }
    let mut stacked = CMat::zeros(rows.max(dim), dim);
    let mut at = 0;
    for m in mats {
        stacked.view_mut((at, 0), (m.nrows(), dim)).copy_from(m);
        at += m.nrows();
    }
    // eigen-decomposition of the Gram matrix keeps the right singular vectors for all columns
    let gram = stacked.adjoint() * &stacked;
    let eig = gram.symmetric_eigen();
    let mut pairs: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| (l.max(0.0).sqrt(), i))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = pairs.last().map(|p| p.0).unwrap_or(0.0).max(1.0);
    let null: Vec<usize> = pairs.iter().filter(|p| p.0 <= NULL_TOL * scale).map(|p| p.1).collect();
    let kept_min = pairs.iter().map(|p| p.0).find(|&s| s > NULL_TOL * scale);
    let null_max = pairs.iter().map(|p| p.0).filter(|&s| s <= NULL_TOL * scale).fold(0.0, f64::max);
    let gap = match kept_min {
        None => f64::INFINITY,
        Some(k) if null_max > 0.0 => k / null_max,
        Some(_) => f64::INFINITY,
    };
    let basis = CMat::from_fn(dim, null.len(), |i, j| eig.eigenvectors[(i, null[j])]);
    Eigenspace {
        basis,
        singular_values: pairs.iter().map(|p| p.0).collect(),
        gap,
    }
}

fn shifted(m: &CMat, lambda: Complex64) -> CMat {
    let d = m.nrows();
    m - CMat::identity(d, d) * lambda
}

/// The lambda-eigenspace of a single operator.
pub fn eigenspace(op: &OpMatrix, lambda: Complex64) -> Result<Eigenspace> {
    op.require_clean()?;
    Ok(stacked_kernel(&[shifted(&op.matrix, lambda)], op.matrix.ncols()))
}

/// Intersection of eigenspaces of several operators.
pub fn intersection(conds: &[(&OpMatrix, Complex64)], dim: usize) -> Result<Eigenspace> {
    let mut mats = Vec::new();
    for (op, l) in conds {
        op.require_clean()?;
        mats.push(shifted(&op.matrix, *l));
    }
    Ok(stacked_kernel(&mats, dim))
}

/// ||A (A - a)(A - b)|| / ||A||^2 style defect: ||(A - a)(A - b)|| / max(||A||^2, 1).
pub fn quadratic_defect(m: &CMat, a: Complex64, b: Complex64) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let prod = shifted(m, a) * shifted(m, b);
    let n = m.norm();
    prod.norm() / (n * n).max(1.0)
}

/// Eigenvalues of a square matrix from its complex Schur form; None if the iteration stalls.
pub fn eigenvalues(m: &CMat) -> Option<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Some(vec![]);
    }
    // centre and normalize so clustered spectra do not stall the QR iteration
    let n = m.nrows();
    let c = m.trace() / n as f64;
    let shifted = m - CMat::identity(n, n) * c;
    let s = shifted.norm();
    if s <= 1e-300 {
        return Some(vec![c; n]);
    }
    [1e-14, 1e-12, 1e-10].iter().find_map(|&eps| {
        nalgebra::linalg::Schur::try_new(shifted.unscale(s), eps, 100_000)
            .map(|t| t.unpack().1.diagonal().iter().map(|&l| c + l * s).collect())
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumCheck {
    pub allowed: Vec<[f64; 2]>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub max_distance: f64,
    pub passed: bool,
}

/// Whether every eigenvalue lies within tol (relative to the largest allowed value) of the allowed set.
pub fn spectrum_within(m: &CMat, allowed: &[Complex64], tol: f64) -> SpectrumCheck {
    let Some(ev) = eigenvalues(m) else {
        return SpectrumCheck {
            allowed: allowed.iter().map(|a| [a.re, a.im]).collect(),
            eigenvalues: vec![],
            max_distance: f64::INFINITY,
            passed: false,
        };
    };
    let scale = allowed.iter().map(|a| a.norm()).fold(1.0, f64::max);
    let max_distance = ev
        .iter()
        .map(|e| allowed.iter().map(|a| (e - a).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
        / scale;
    SpectrumCheck {
        allowed: allowed.iter().map(|a| [a.re, a.im]).collect(),
        eigenvalues: ev.iter().map(|e| [e.re, e.im]).collect(),
        max_distance,
        passed: max_distance <= tol,
    }
}

/// Least-squares membership residual of the columns of `v` in the span of the columns of `basis`.
pub fn membership_residual(basis: &CMat, v: &CMat) -> f64 {
    if v.norm() == 0.0 {
        return 0.0;
    }
    if basis.ncols() == 0 {
        return 1.0;
    }
    let (_, res, _) = crate::ops::lstsq(basis, v);
    res
}

pub fn to_pairs(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}
