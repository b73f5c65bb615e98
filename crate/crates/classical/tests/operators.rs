mod common;

use hecke_classical::eigen::{eigenspace, quadratic_defect};
use hecke_classical::newspace::{characterize, conditions_at, OpKind};
use hecke_classical::oldspace::{old_span, placement};
use hecke_classical::ops::{self, OpConfig};
use hecke_classical::slash::unit_classes;
use hecke_classical::ClassicalError;
use num_complex::Complex64;

use common::{fixtures, space};

fn cfg() -> OpConfig {
    OpConfig::default()
}

#[test]
fn q_on_one_dimensional_new_space() {
    let s = space(11, 2, 1);
    let q = ops::op_q(&s, 11, &cfg()).unwrap();
    assert!((q.q.matrix[(0, 0)] + 1.0).norm() < 1e-9);
    assert!((q.qprime.matrix[(0, 0)] + 1.0).norm() < 1e-9);
}

#[test]
fn q_eigenspaces_split_old_and_new() {
    let s = space(33, 2, 1);
    let q = ops::op_q(&s, 3, &cfg()).unwrap();
    // old forms g and V(3)g split between the p-eigenspaces of Q and Q'
    assert_eq!(eigenspace(&q.q, (-1.0).into()).unwrap().dim(), 2);
    assert_eq!(eigenspace(&q.q, 3.0.into()).unwrap().dim(), 1);
    assert_eq!(eigenspace(&q.qprime, 3.0.into()).unwrap().dim(), 1);
}

#[test]
fn identity_eigenspaces() {
    let s = space(45, 3, 26);
    let id = ops::op_identity(&s, &cfg()).unwrap();
    assert_eq!(eigenspace(&id, 1.0.into()).unwrap().dim(), 8);
    assert_eq!(eigenspace(&id, 0.0.into()).unwrap().dim(), 0);
}

#[test]
fn quadratic_relations_on_qualifying_fixtures() {
    let cases: &[(u64, u32, u64, u64)] = &[
        (33, 2, 1, 3),
        (33, 2, 1, 11),
        (10, 4, 1, 2),
        (10, 4, 1, 5),
        (21, 3, 13, 3),
        (14, 4, 9, 2),
        (14, 4, 11, 2),
        (45, 2, 1, 5),
        (45, 2, 1, 3),
        (45, 3, 26, 5),
        (45, 3, 26, 3),
        (16, 4, 1, 2),
        (27, 4, 10, 3),
        (27, 4, 19, 3),
    ];
    for &(n, k, j, p) in cases {
        let s = space(n, k, j);
        let conds = conditions_at(&fixtures(), &s, p, None, &cfg()).unwrap();
        assert_eq!(conds.len(), 2, "{} at {p}", s.id);
        for c in conds {
            let checks = c.checks(&s.id);
            assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
        }
    }
}

#[test]
fn s_annihilates_new_and_scales_old() {
    // eigenvectors of S with eigenvalue 0 span the new part, those with p^(n-r) the lower level
    let s = space(27, 4, 10);
    let op = ops::op_s(&s, 3, 3, 2, &cfg()).unwrap();
    assert!(quadratic_defect(&op.matrix, 0.0.into(), 3.0.into()) < 1e-9);
    assert_eq!(eigenspace(&op, 3.0.into()).unwrap().dim(), 2);
    assert_eq!(eigenspace(&op, 0.0.into()).unwrap().dim(), 4);
}

#[test]
fn s_below_conductor_rejected() {
    let s = space(27, 4, 10);
    assert!(matches!(
        ops::op_s(&s, 3, 3, 1, &cfg()),
        Err(ClassicalError::BelowConductor { r: 1, c: 2 })
    ));
}

#[test]
fn s_requires_exact_prime_power() {
    let s = space(27, 4, 10);
    assert!(matches!(ops::op_s(&s, 3, 2, 1, &cfg()), Err(ClassicalError::NotExact { .. })));
}

#[test]
fn sprime_needs_flipped_fixture() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixtures().join("27.4.10.json"), dir.path().join("27.4.10.json")).unwrap();
    let s = space(27, 4, 10);
    let err = conditions_at(dir.path(), &s, 3, Some(OpKind::Sprime), &cfg()).unwrap_err();
    assert!(matches!(err, ClassicalError::MissingFixture(ref f) if f.contains("27.4.19")));
}

#[test]
fn coset_class_counts() {
    for p in [2u64, 3, 5, 7] {
        assert_eq!(unit_classes(p, 1).len() as u64, p - 1);
        assert_eq!(unit_classes(p, 2).len() as u64, p * (p - 1));
    }
    let s = space(27, 4, 10);
    // identity plus p^(n-j-1)(p-1) terms for each r <= j < n
    assert_eq!(ops::s_terms(&s, 3, 3, 2).len(), 1 + 2);
    assert_eq!(ops::s_terms(&s, 3, 3, 1).len(), 1 + 2 + 6);
}

#[test]
fn prime_level_all_new() {
    let s = space(11, 4, 1);
    let r = characterize(&fixtures(), &s, &cfg()).unwrap();
    assert_eq!(r.intersection_dim, 2);
    assert!(r.conditions.iter().all(|c| c.prime == 11));
    assert!(r.checks.iter().all(|c| c.passed), "{:#?}", r.checks);
}

#[test]
fn nontrivial_at_p_imposes_nothing() {
    let s = space(21, 3, 13);
    let r = characterize(&fixtures(), &s, &cfg()).unwrap();
    assert!(r.conditions.iter().all(|c| c.prime == 3));
    assert_eq!(r.exempt.len(), 1);
    assert_eq!(r.intersection_dim, 2);
}

#[test]
fn primitive_at_prime_square_imposes_nothing() {
    let s = space(9, 4, 4);
    let r = characterize(&fixtures(), &s, &cfg()).unwrap();
    assert!(r.conditions.is_empty());
    assert_eq!(r.intersection_dim, 2);
    assert_eq!(r.oracle_new, 2);
}

#[test]
fn newspace_on_three_families() {
    let families: &[(&str, &[(u64, u32, u64)])] = &[
        ("squarefree-trivial", &[(33, 2, 1), (10, 4, 1)]),
        ("squarefree-twisted", &[(21, 3, 13), (14, 4, 9), (14, 4, 11)]),
        ("prime-square", &[(16, 4, 1), (45, 2, 1), (27, 4, 10), (27, 4, 19), (45, 3, 26)]),
    ];
    for (name, spaces) in families {
        for &(n, k, j) in spaces.iter() {
            let s = space(n, k, j);
            let r = characterize(&fixtures(), &s, &cfg()).unwrap();
            let bad: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
            assert!(bad.is_empty(), "{name} {}: {bad:#?}", s.id);
            assert_eq!(r.intersection_dim as i64, r.oracle_new);
            let span = old_span(&fixtures(), &s, r.basis.as_ref()).unwrap();
            assert!(span.checks.iter().all(|c| c.passed), "{:#?}", span.checks);
        }
    }
}

#[test]
fn lower_level_placement() {
    for &(n, k, j, p) in &[
        (33u64, 2u32, 1u64, 3u64),
        (10, 4, 1, 2),
        (21, 3, 13, 3),
        (14, 4, 9, 2),
        (14, 4, 11, 2),
        (45, 2, 1, 5),
        (45, 2, 1, 3),
        (16, 4, 1, 2),
        (27, 4, 10, 3),
        (27, 4, 19, 3),
        (45, 3, 26, 3),
        (45, 3, 26, 5),
    ] {
        let s = space(n, k, j);
        let r = placement(&fixtures(), &s, p, &cfg()).unwrap();
        assert!(r.lower_dim > 0 || n == 45);
        assert!(r.checks.iter().all(|c| c.passed), "{}: {:#?}", s.id, r.checks);
    }
}

#[test]
fn w_matrix_conjugates_q() {
    let s = space(10, 4, 1);
    let q = ops::op_q(&s, 2, &cfg()).unwrap();
    let lhs = &q.w.matrix * &q.q.matrix;
    let rhs = &q.qprime.matrix * &q.w.matrix;
    assert!((lhs - rhs).norm() < 1e-8);
    let _ = Complex64::new(0.0, 0.0);
}
