use hecke_core::arith::PChar;
use hecke_core::cosets::Level;
use hecke_core::hecke::Algebra;
use hecke_core::induced::{double_coset_census, spectral_report, InducedRep};

fn rep(p: u64, n: u32, r: u32) -> InducedRep {
    let chi = PChar::all(p, n)
        .unwrap()
        .into_iter()
        .map(|(_, c)| c)
        .find(|c| c.r == r)
        .unwrap();
    InducedRep::new(Algebra::new(Level::new(p, n).unwrap(), chi).unwrap())
}

#[test]
fn dimensions_of_induced() {
    assert_eq!(rep(2, 3, 2).dim(), 12);
    assert_eq!(rep(3, 2, 1).dim(), 12);
    assert_eq!(rep(5, 1, 1).dim(), 6);
}

#[test]
fn component_dimension_examples() {
    // characters mod 2^n have conductor exponent 0 or >= 2
    assert!(PChar::all(2, 3).unwrap().iter().all(|(_, c)| c.r != 1));
    let r = spectral_report(&rep(2, 3, 2), true, 1);
    assert_eq!(r.dims_projector, vec![6, 6]);
    assert_eq!(r.dims_trace_system, vec!["6", "6"]);
    let r = spectral_report(&rep(2, 3, 0), true, 1);
    assert_eq!(r.dims_projector, vec![1, 2, 3, 6]);
    let r = spectral_report(&rep(3, 2, 1), true, 1);
    assert_eq!(r.dims_projector, vec![4, 8]);
    let r = spectral_report(&rep(3, 2, 2), true, 1);
    assert_eq!(r.dims_projector, vec![12]);
}

#[test]
fn table_entries() {
    // p = 3, n = 3, r = 1: rows v1..v3, columns y1..y3
    let r = spectral_report(&rep(3, 3, 1), false, 1);
    assert_eq!(r.v_table[0][0], "6"); // p^(n-r-1)(p-1)
    assert_eq!(r.v_table[1][0], "-3"); // -p^(n-i) at (v2, V1)
    assert_eq!(r.v_table[2][1], "-1");
    assert!(r.v_table.iter().all(|row| row.last().unwrap() == "1"));
    assert_eq!(r.y_table[0][0], "9");
    assert_eq!(r.y_table[1][0], "0");
}

#[test]
fn fixed_chain() {
    let rp = rep(3, 3, 2);
    assert_eq!(rp.fixed_subspace(3).dim(), 2);
    assert_eq!(rp.fixed_subspace(2).dim(), 1);
    let below = rp.fixed_subspace(1);
    assert_eq!(below.dim(), 0);
    assert!(below.witness.is_some());
}

#[test]
fn all_spectral_checks_on_small_grid() {
    for (p, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1)] {
        for (_, chi) in PChar::all(p, n).unwrap() {
            let rp = InducedRep::new(Algebra::new(Level::new(p, n).unwrap(), chi).unwrap());
            let r = spectral_report(&rp, true, 3);
            let bad: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
            assert!(bad.is_empty(), "{p}^{n} r={}: {bad:#?}", r.r);
        }
    }
}

#[test]
fn census_on_grid() {
    for (p, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (5, 3)] {
        let c = double_coset_census(Level::new(p, n).unwrap());
        assert!(c.passed, "{c:?}");
    }
}
