//! Acceptance suite: one PASS/FAIL line per criterion.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use hecke_classical::dims::p_exponent;
use hecke_classical::eigen::quadratic_defect;
use hecke_classical::newspace::{characterize, conditions_at, exemption};
use hecke_classical::oldspace::{old_span, placement};
use hecke_classical::{CuspSpace, OpConfig};
use hecke_core::arith::modular::factorize;
use hecke_core::arith::{DirChar, PChar};
use hecke_core::brute;
use hecke_core::cosets::{DcLabel, Level};
use hecke_core::hecke::{supported_basis, verify_relations, Algebra};
use hecke_core::induced::{double_coset_census, expected_fixed_dim, spectral_report, InducedRep};
use hecke_core::report::Check;

const BRUTE_MAX_Q: u64 = 27;
const QUAD_TOL: f64 = 1e-6;
const MEMBER_TOL: f64 = 1e-6;
const MIN_GAP: f64 = 1e3;

struct Outcome {
    failures: Vec<String>,
    note: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), note: String::new() }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn checks(&mut self, checks: &[Check]) {
        for c in checks.iter().filter(|c| !c.passed) {
            self.failures.push(format!("{}: expected {}, got {}", c.id, c.expected, c.computed));
        }
    }
}

fn grid() -> Vec<Level> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5] {
        for n in 1..=3u32 {
            if p.pow(n) <= 125 {
                out.push(Level::new(p, n).unwrap());
            }
        }
    }
    out
}

fn algebras() -> Vec<Arc<Algebra>> {
    let mut out = Vec::new();
    for lvl in grid() {
        for (_, chi) in PChar::all(lvl.p, lvl.n).unwrap() {
            out.push(Algebra::new(lvl, chi).unwrap());
        }
    }
    out
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn all_spaces(dir: &Path) -> Vec<CuspSpace> {
    let mut out: Vec<CuspSpace> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| CuspSpace::load(&p).unwrap())
        .collect();
    out.sort_by_key(|s| (s.level, s.weight, s.chi.conrey_label()));
    out
}

fn space(level: u64, weight: u32, conrey: u64) -> CuspSpace {
    let chi = DirChar::from_conrey(level, conrey).unwrap();
    CuspSpace::find(&fixtures(), level, weight, &chi).unwrap()
}

fn census() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let checks: Vec<Check> = grid().into_iter().map(double_coset_census).collect();
    o.checks(&checks);
    let secs = t.elapsed().as_secs_f64();
    o.require(secs < 30.0, || format!("runtime {secs:.1} s over 30 s"));
    o.note = format!("{} levels in {secs:.2} s", checks.len());
    o
}

fn support(algs: &[Arc<Algebra>]) -> Outcome {
    let mut o = Outcome::new();
    for alg in algs {
        let (lvl, r) = (alg.lvl, alg.chi.r);
        let mut want: Vec<DcLabel> = Vec::new();
        if r == 0 {
            want.push(DcLabel::W);
        }
        want.extend((r.max(1)..=lvl.n).map(DcLabel::Y));
        let got = supported_basis(lvl, &alg.chi);
        o.require(got == want, || format!("p{}n{} r={r}: {got:?} != {want:?}", lvl.p, lvl.n));
        o.require(alg.basis == want, || format!("p{}n{} r={r}: algebra basis {:?}", lvl.p, lvl.n, alg.basis));
    }
    o.note = format!("{} characters", algs.len());
    o
}

fn structure(algs: &[Arc<Algebra>]) -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let mut brute_cells = 0;
    for alg in algs {
        match verify_relations(alg) {
            Ok(c) => o.checks(&c),
            Err(e) => o.failures.push(format!("p{}n{}: {e}", alg.lvl.p, alg.lvl.n)),
        }
        if alg.lvl.p.pow(alg.lvl.n) <= BRUTE_MAX_Q {
            o.checks(&brute::cross_check(alg));
            brute_cells += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    o.require(secs < 120.0, || format!("runtime {secs:.1} s over 120 s"));
    o.note = format!("{} characters, {brute_cells} brute-force cross-checks, {secs:.2} s", algs.len());
    o
}

fn shape(algs: &[Arc<Algebra>]) -> Outcome {
    let mut o = Outcome::new();
    for alg in algs {
        let want = (alg.lvl.n - alg.chi.r + 1) as usize;
        o.require(alg.dim() == want, || format!("p{}n{} r={}: dim {} != {want}", alg.lvl.p, alg.lvl.n, alg.chi.r, alg.dim()));
        o.require(alg.table().is_commutative(), || {
            format!("p{}n{} r={}: not commutative", alg.lvl.p, alg.lvl.n, alg.chi.r)
        });
    }
    o.note = format!("{} characters", algs.len());
    o
}

fn induced(algs: &[Arc<Algebra>]) -> (Outcome, Outcome) {
    let mut spec = Outcome::new();
    let mut fixed = Outcome::new();
    let t = Instant::now();
    for alg in algs {
        let (p, n, r) = (alg.lvl.p, alg.lvl.n, alg.chi.r);
        let rep = InducedRep::new(alg.clone());
        let want = (p.pow(n - 1) * (p + 1)) as usize;
        spec.require(rep.dim() == want, || format!("p{p}n{n} r={r}: dim I(n) {} != {want}", rep.dim()));
        let report = spectral_report(&rep, alg.lvl.p.pow(alg.lvl.n) <= BRUTE_MAX_Q, 0);
        spec.checks(&report.checks);
        let proj: Vec<u64> = report.dims_projector.iter().map(|&d| d as u64).collect();
        spec.require(proj == report.dims_expected, || {
            format!("p{p}n{n} r={r}: projector dims {proj:?} != {:?}", report.dims_expected)
        });
        let traced: Vec<String> = report.dims_expected.iter().map(|d| d.to_string()).collect();
        spec.require(report.dims_trace_system == traced, || {
            format!("p{p}n{n} r={r}: trace-system dims {:?} != {traced:?}", report.dims_trace_system)
        });
        spec.require(report.dims_expected.iter().sum::<u64>() as usize == want, || {
            format!("p{p}n{n} r={r}: component dims do not sum to {want}")
        });
        for m in 0..=n {
            let got = report.fixed_dims[m as usize];
            let e = expected_fixed_dim(r, m);
            fixed.require(got == e, || format!("p{p}n{n} r={r} m={m}: fixed dim {got} != {e}"));
            if m >= 1 {
                let step = got as i64 - report.fixed_dims[m as usize - 1] as i64;
                let want_step = i64::from(m >= r);
                fixed.require(step == want_step, || {
                    format!("p{p}n{n} r={r} m={m}: step {step} != {want_step}")
                });
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    spec.require(secs < 180.0, || format!("runtime {secs:.1} s over 180 s"));
    spec.note = format!("{} characters, {secs:.2} s", algs.len());
    fixed.note = format!("{} characters", algs.len());
    (spec, fixed)
}

fn quadratic(dir: &Path, spaces: &[CuspSpace], cfg: &OpConfig) -> Outcome {
    let mut o = Outcome::new();
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for s in spaces {
        for (p, _) in factorize(s.level) {
            if exemption(s, p).is_some() {
                continue;
            }
            let conds = match conditions_at(dir, s, p, None, cfg) {
                Ok(c) => c,
                Err(e) => {
                    o.failures.push(format!("{} at {p}: {e}", s.id));
                    continue;
                }
            };
            o.require(conds.len() == 2, || format!("{} at {p}: {} operators", s.id, conds.len()));
            for c in &conds {
                let d = quadratic_defect(&c.op.matrix, c.new_value.into(), c.old_value.into());
                let sp = c.spectrum();
                worst = worst.max(d);
                count += 1;
                o.require(!c.op.poisoned, || {
                    format!("{}.{}: residual {:.3e}, conditioning {:.3e}", s.id, c.op.label, c.op.residual, c.op.conditioning)
                });
                o.require(d <= QUAD_TOL, || format!("{}.{}: defect {d:.3e}", s.id, c.op.label));
                o.require(sp.passed, || format!("{}.{}: spectrum off by {:.3e}", s.id, c.op.label, sp.max_distance));
            }
        }
    }
    o.require(count > 0, || "no qualifying fixture".into());
    o.note = format!("{count} operators, worst defect {worst:.2e}");
    o
}

fn newspace(dir: &Path, cfg: &OpConfig) -> Outcome {
    let mut o = Outcome::new();
    let families: &[(&str, &[(u64, u32, u64)])] = &[
        ("squarefree trivial", &[(33, 2, 1), (10, 4, 1)]),
        ("squarefree twisted", &[(21, 3, 13), (14, 4, 9), (14, 4, 11)]),
        ("prime power", &[(16, 4, 1), (45, 2, 1), (27, 4, 10), (27, 4, 19), (45, 3, 26)]),
    ];
    let mut min_gap = f64::INFINITY;
    let mut n = 0;
    for (name, list) in families {
        for &(level, weight, conrey) in list.iter() {
            let s = space(level, weight, conrey);
            let r = match characterize(dir, &s, cfg) {
                Ok(r) => r,
                Err(e) => {
                    o.failures.push(format!("{name} {}: {e}", s.id));
                    continue;
                }
            };
            n += 1;
            o.require(r.intersection_dim as i64 == r.oracle_new, || {
                format!("{name} {}: intersection {} != oracle {}", s.id, r.intersection_dim, r.oracle_new)
            });
            if r.intersection_dim < s.dim() && r.intersection_dim > 0 {
                min_gap = min_gap.min(r.gap);
                o.require(r.gap >= MIN_GAP, || format!("{name} {}: gap {:.3e}", s.id, r.gap));
            }
            o.checks(&r.checks);
            match old_span(dir, &s, r.basis.as_ref()) {
                Ok(span) => o.checks(&span.checks),
                Err(e) => o.failures.push(format!("{name} {}: old span {e}", s.id)),
            }
        }
    }
    o.note = format!("{n} spaces in 3 families, smallest gap {min_gap:.2e}");
    o
}

fn oldspace(dir: &Path, spaces: &[CuspSpace], cfg: &OpConfig) -> Outcome {
    let mut o = Outcome::new();
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for s in spaces {
        for (p, _) in factorize(s.level) {
            if exemption(s, p).is_some() || p_exponent(s.level, p) == 0 {
                continue;
            }
            let r = match placement(dir, s, p, cfg) {
                Ok(r) => r,
                Err(e) => {
                    o.failures.push(format!("{} at {p}: {e}", s.id));
                    continue;
                }
            };
            for c in &r.checks {
                count += 1;
                if let Ok(v) = c.computed.parse::<f64>() {
                    worst = worst.max(v);
                    o.require(v <= MEMBER_TOL, || format!("{}: residual {v:.3e}", c.id));
                }
            }
            o.checks(&r.checks);
        }
    }
    o.require(count > 0, || "no placement checks".into());
    o.note = format!("{count} membership checks, worst residual {worst:.2e}");
    o
}

fn main() -> ExitCode {
    let dir = fixtures();
    let cfg = OpConfig::default();
    let spaces = all_spaces(&dir);
    let algs = algebras();
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "double-coset census", census()),
        (2, "support law", support(&algs)),
        (3, "structure constants", structure(&algs)),
        (4, "algebra shape", shape(&algs)),
    ];
    let (spec, fixed) = induced(&algs);
    results.push((5, "induced representation", spec));
    results.push((6, "fixed-vector chain", fixed));
    results.push((7, "classical quadratic relations", quadratic(&dir, &spaces, &cfg)));
    results.push((8, "newspace characterization", newspace(&dir, &cfg)));
    results.push((9, "oldspace placement", oldspace(&dir, &spaces, &cfg)));

    let mut ok = true;
    for (i, name, o) in &results {
        let status = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {i} {status} {name}: {}", o.note);
        for f in o.failures.iter().take(10) {
            println!("    {f}");
        }
        ok &= o.failures.is_empty();
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
