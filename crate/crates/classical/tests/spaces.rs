mod common;

use std::fs;

use hecke_classical::ops::{self, OpConfig};
use hecke_classical::qexp::QExpansion;
use hecke_classical::slash::{Role, SlashMatrix};
use hecke_classical::{dims, ClassicalError, CuspSpace};
use num_complex::Complex64;
use serde_json::Value;

use common::{all_spaces, fixtures, space};

fn edited(name: &str, edit: impl FnOnce(&mut Value)) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&fs::read_to_string(fixtures().join(name)).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    (dir, path)
}

#[test]
fn empty_basis_is_a_trivial_space() {
    let s = space(2, 4, 1);
    assert_eq!(s.dim(), 0);
    let op = ops::op_identity(&s, &OpConfig::default()).unwrap();
    assert_eq!(op.matrix.ncols(), 0);
}

#[test]
fn parity_violation_rejected() {
    let (_d, path) = edited("11.2.1.json", |v| v["weight"] = 3.into());
    assert!(matches!(CuspSpace::load(&path), Err(ClassicalError::Parity { .. })));
}

#[test]
fn short_precision_rejected() {
    let (_d, path) = edited("11.2.1.json", |v| {
        v["precision"] = 100.into();
        let f = v["basis"][0].as_array_mut().unwrap();
        f.truncate(100);
    });
    assert!(matches!(CuspSpace::load(&path), Err(ClassicalError::Precision { .. })));
}

#[test]
fn dependent_basis_rejected() {
    let (_d, path) = edited("11.4.1.json", |v| {
        let f = v["basis"][0].clone();
        v["basis"][1] = f;
    });
    assert!(matches!(CuspSpace::load(&path), Err(ClassicalError::Dependent(_))));
}

#[test]
fn one_dimensional_newform_accepted() {
    let s = space(11, 2, 1);
    assert_eq!(s.dim(), 1);
    // a_2 = -2, a_3 = -1 for the level 11 curve
    assert!((s.basis[0].coeffs[1] - Complex64::new(-2.0, 0.0)).norm() < 1e-9);
    assert!((s.basis[0].coeffs[2] - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
}

#[test]
fn oracle_dimensions_match_every_fixture() {
    for s in all_spaces() {
        let d = s.dims.unwrap();
        assert_eq!(dims::cusp_dim(&s.chi, s.weight).unwrap(), d.cusp as i64, "{}", s.id);
        assert_eq!(dims::new_dim(&s.chi, s.weight).unwrap(), d.new as i64, "{}", s.id);
        assert_eq!(s.dim(), d.cusp, "{}", s.id);
    }
}

#[test]
fn slash_by_identity_and_dilation() {
    let s = space(11, 2, 1);
    let z = Complex64::new(0.13, 0.31);
    let id = s.slash_all(&SlashMatrix::identity(), z).unwrap();
    assert!((id[0] - s.eval_all(z).unwrap()[0]).norm() < 1e-14);
    // f | (p, 0; 0, 1) = p^(k/2) f(pz) = p^(k/2) V(p)f(z)
    let p = 2;
    let a = SlashMatrix::new(p, 0, 0, 1, Role::Dilation);
    let lhs = s.slash_all(&a, z).unwrap()[0];
    let (v, _) = s.basis[0].vp(p as u64).evaluate(z).unwrap();
    let rhs = v * (p as f64).powf(s.weight as f64 / 2.0);
    assert!((lhs - rhs).norm() < 1e-10 * rhs.norm());
}

#[test]
fn gamma0_acts_by_character() {
    for (n, k, j) in [(11, 2, 1), (7, 3, 6), (21, 3, 13), (27, 4, 10)] {
        let s = space(n, k, j);
        let z = Complex64::new(-0.21, 0.4);
        for d in [2i64, 5, 8, 13] {
            if hecke_core::arith::modular::gcd(d as u64, n) != 1 {
                continue;
            }
            let g = ops::gamma0_element(n, d);
            let lhs = s.slash_all(&g, z).unwrap();
            let rhs = s.eval_all(z).unwrap();
            for (a, b) in lhs.iter().zip(&rhs) {
                assert!((a - b * s.chi_at(d)).norm() < 1e-9 * b.norm().max(1.0), "{} d={d}", s.id);
            }
        }
    }
}

#[test]
fn up_on_q_to_the_p() {
    let k = 4;
    let p = 3;
    let mut c = vec![Complex64::new(0.0, 0.0); 600];
    c[p - 1] = 1.0.into();
    let f = QExpansion::new(k, c);
    let u = f.up(p as u64).unwrap();
    assert!((u.coeffs[0] - Complex64::new((p as f64).powf(k as f64 / 2.0), 0.0)).norm() < 1e-12);
    assert!(u.coeffs[1..].iter().all(|a| a.norm() == 0.0));
}

#[test]
fn up_of_vp_scales() {
    let s = space(11, 4, 1);
    for f in &s.basis {
        let g = f.vp(2).up(2).unwrap();
        for n in 0..g.precision() {
            assert!((g.coeffs[n] - f.coeffs[n] * 4.0).norm() < 1e-9 * f.coeffs[n].norm().max(1.0));
        }
    }
}

#[test]
fn identity_and_up_routes_on_every_fixture() {
    let cfg = OpConfig::default();
    for s in all_spaces() {
        if s.dim() == 0 {
            continue;
        }
        let id = ops::op_identity(&s, &cfg).unwrap();
        let eye = ops::CMat::identity(s.dim(), s.dim());
        assert!((&id.matrix - &eye).norm() < 1e-9, "{}", s.id);
        assert!(id.residual < 1e-9);
        for (p, _) in hecke_core::arith::modular::factorize(s.level) {
            let a = ops::op_up_sampled(&s, p, &cfg).unwrap();
            let b = ops::op_up_coefficients(&s, p).unwrap();
            let rel = (&a.matrix - &b.matrix).norm() / b.matrix.norm().max(1.0);
            assert!(rel < 1e-8, "{} U_{p}: {rel:e}", s.id);
        }
    }
}

#[test]
fn gamma0_operator_matrix_is_scalar() {
    let cfg = OpConfig::default();
    let s = space(27, 4, 10);
    let g = ops::gamma0_element(27, 5);
    let op = ops::op_matrix(&s, &s, &[ops::Term::new(1.0.into(), g)], "gamma", &cfg).unwrap();
    let want = ops::CMat::identity(6, 6) * s.chi_at(5);
    assert!((&op.matrix - &want).norm() < 1e-8);
}

#[test]
fn atkin_lehner_squares_to_scalar() {
    let cfg = OpConfig::default();
    for (n, k, j, p, e) in [(33, 2, 1, 11, 1), (45, 3, 26, 5, 1), (16, 4, 1, 2, 4), (45, 2, 1, 3, 2)] {
        let s = space(n, k, j);
        let w = ops::op_w(&s, &s, p, e, &cfg).unwrap();
        let c = ops::w_square_scalar(&s, p, e);
        let d = s.dim();
        assert!((&w.matrix * &w.matrix - ops::CMat::identity(d, d) * c).norm() < 1e-8, "{}", s.id);
    }
}

#[test]
fn atkin_lehner_on_lower_form() {
    // W_p g = p^(k/2) chi^(M)(p) V(p) g for g of level M
    let s = space(14, 4, 9);
    let g = space(7, 4, 2);
    let w = hecke_classical::slash::atkin_lehner_matrix(2, 1, 14).unwrap();
    let scale = 2f64.powf(2.0) * ops::chi_m_at(&s, 2, 2);
    for z in [Complex64::new(0.1, 0.3), Complex64::new(-0.37, 0.22)] {
        let lhs = g.slash_all(&w, z).unwrap()[0];
        let (v, _) = g.basis[0].vp(2).evaluate(z).unwrap();
        assert!((lhs - v * scale).norm() < 1e-9 * lhs.norm().max(1e-3));
    }
}

#[test]
fn below_floor_point_rejected() {
    let s = space(11, 2, 1);
    let f = &s.basis[0];
    assert!(matches!(f.evaluate(Complex64::new(0.0, 0.01)), Err(ClassicalError::BelowFloor(..))));
}
