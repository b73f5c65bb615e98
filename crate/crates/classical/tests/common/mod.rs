#![allow(dead_code)]

use std::path::PathBuf;

use hecke_classical::CuspSpace;
use hecke_core::arith::DirChar;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn space(level: u64, weight: u32, conrey: u64) -> CuspSpace {
    let chi = DirChar::from_conrey(level, conrey).unwrap();
    CuspSpace::find(&fixtures(), level, weight, &chi).unwrap()
}

pub fn all_spaces() -> Vec<CuspSpace> {
    let mut out: Vec<CuspSpace> = std::fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| CuspSpace::load(&p).unwrap())
        .collect();
    out.sort_by_key(|s| (s.level, s.weight, s.chi.conrey_label()));
    out
}
