//! Units of verification work shared by the subcommands and campaigns.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use hecke_classical::newspace::{characterize, conditions_at, exemption, space_checks, OpKind};
use hecke_classical::oldspace::{old_span, placement};
use hecke_classical::{ClassicalError, CuspSpace, OpConfig};
use hecke_core::arith::PChar;
use hecke_core::brute;
use hecke_core::cosets::Level;
use hecke_core::hecke::{twisted_evaluation_mismatches, verify_relations, Algebra};
use hecke_core::induced::{double_coset_census, spectral_report, InducedRep};
use hecke_core::report::{Check, Source};

use crate::cache::Cache;
use crate::error::{CliError, Result};

/// Largest p^n at which the exhaustive audits (brute-force group sums, pi_L multiplicativity) run.
pub const FULL_AUDIT_MAX_Q: u64 = 27;

/// Outcome of one unit of work.
#[derive(Clone, Debug)]
pub struct Cell {
    pub prefix: String,
    pub checks: Vec<Check>,
    pub runtime_ms: f64,
    pub warnings: Vec<String>,
    pub data: serde_json::Value,
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn level(p: u64, n: u32) -> Result<Level> {
    Level::new(p, n).map_err(|e| CliError::Input(format!("invalid level p={p} n={n}: {e}")))
}

pub fn census_cell(lvl: Level) -> Cell {
    let t = Instant::now();
    let c = double_coset_census(lvl);
    Cell {
        prefix: "census".into(),
        checks: vec![c],
        runtime_ms: elapsed_ms(t),
        warnings: vec![],
        data: serde_json::Value::Null,
    }
}

#[derive(Serialize)]
struct AlgebraData<'a> {
    p: u64,
    n: u32,
    conrey: u64,
    r: u32,
    order: u64,
    basis: Vec<String>,
    cache: crate::cache::Outcome,
    table: &'a hecke_core::hecke::StructTable,
}

/// Build the algebra (table through the cache) and optionally audit it.
pub fn algebra_cell(
    lvl: Level,
    conrey: u64,
    chi: PChar,
    cache: &Cache,
    verify: bool,
    full_audit_max_q: u64,
    seed: u64,
) -> Result<(Arc<Algebra>, Cell)> {
    let t = Instant::now();
    let alg = Algebra::new(lvl, chi)?;
    let (outcome, warnings) = cache.table(&alg, conrey)?;
    let mut checks = Vec::new();
    if verify {
        checks.extend(verify_relations(&alg)?);
        let bad = twisted_evaluation_mismatches(&alg, 256, seed);
        checks.push(Check::new(
            format!("p{}n{}.value-routes", lvl.p, lvl.n),
            bad == 0,
            "0 mismatches".into(),
            format!("{bad} mismatches"),
            Source::Definitional,
        ));
        if lvl.q <= full_audit_max_q {
            checks.extend(brute::cross_check(&alg));
        }
    }
    let data = serde_json::to_value(AlgebraData {
        p: lvl.p,
        n: lvl.n,
        conrey,
        r: alg.r(),
        order: alg.order(),
        basis: alg.basis.iter().map(|l| l.to_string()).collect(),
        cache: outcome,
        table: alg.table(),
    })
    .expect("algebra data serializes");
    let cell = Cell {
        prefix: format!("algebra.p{}n{}.chi{conrey}", lvl.p, lvl.n),
        checks,
        runtime_ms: elapsed_ms(t),
        warnings,
        data,
    };
    Ok((alg, cell))
}

pub fn induced_cell(alg: Arc<Algebra>, conrey: u64, full_audit_max_q: u64, seed: u64) -> Cell {
    let t = Instant::now();
    let lvl = alg.lvl;
    let rep = InducedRep::new(alg);
    let report = spectral_report(&rep, lvl.q <= full_audit_max_q, seed);
    Cell {
        prefix: format!("induced.p{}n{}.chi{conrey}", lvl.p, lvl.n),
        checks: report.checks.clone(),
        runtime_ms: elapsed_ms(t),
        warnings: vec![],
        data: serde_json::to_value(&report).expect("spectral report serializes"),
    }
}

/// Errors that mean an operator could not be trusted, as opposed to bad input.
fn numerical_failure(e: &ClassicalError) -> bool {
    matches!(e, ClassicalError::Poisoned(..) | ClassicalError::NoPoints | ClassicalError::BelowFloor(..))
}

fn failure_check(id: String, e: &ClassicalError) -> Check {
    Check::new(id, false, "usable operator".into(), e.to_string(), Source::Definitional)
}

/// Classical checks on one space at one prime.
pub fn classical_prime_cell(
    dir: &Path,
    space: &CuspSpace,
    p: u64,
    op: Option<OpKind>,
    cfg: &OpConfig,
) -> Result<Cell> {
    let t = Instant::now();
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    let mut data = serde_json::Map::new();
    if let Some(why) = exemption(space, p) {
        checks.push(Check::new(
            format!("{}.{p}.exempt", space.id),
            true,
            "no condition".into(),
            why,
            Source::Stated,
        ));
    }
    match conditions_at(dir, space, p, op, cfg) {
        Ok(conds) => {
            for c in &conds {
                checks.extend(c.checks(&space.id));
            }
            let recs: Vec<_> = conds.iter().map(|c| c.record()).collect();
            data.insert("conditions".into(), serde_json::to_value(recs).expect("records serialize"));
        }
        Err(e) if numerical_failure(&e) => checks.push(failure_check(format!("{}.{p}.operators", space.id), &e)),
        Err(e) => return Err(e.into()),
    }
    if op.is_none() {
        match placement(dir, space, p, cfg) {
            Ok(r) => {
                checks.extend(r.checks.clone());
                data.insert("placement".into(), serde_json::to_value(r).expect("placement serializes"));
            }
            Err(ClassicalError::MissingFixture(f)) => {
                warnings.push(format!("{}: lower-level fixture {f} missing; placement at {p} skipped", space.id))
            }
            Err(e) if numerical_failure(&e) => checks.push(failure_check(format!("{}.old.{p}", space.id), &e)),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Cell {
        prefix: "classical".into(),
        checks,
        runtime_ms: elapsed_ms(t),
        warnings,
        data: serde_json::Value::Object(data),
    })
}

/// Operator sanity checks and the newspace characterization of one space.
pub fn classical_space_cell(dir: &Path, space: &CuspSpace, characterize_new: bool, cfg: &OpConfig) -> Result<Cell> {
    let t = Instant::now();
    let mut checks = Vec::new();
    let mut data = serde_json::Map::new();
    match space_checks(space, cfg) {
        Ok(c) => checks.extend(c),
        Err(e) if numerical_failure(&e) => checks.push(failure_check(format!("{}.operators", space.id), &e)),
        Err(e) => return Err(e.into()),
    }
    if characterize_new {
        match characterize(dir, space, cfg) {
            Ok(r) => {
                checks.extend(r.checks.clone());
                match old_span(dir, space, r.basis.as_ref()) {
                    Ok(s) => {
                        checks.extend(s.checks.clone());
                        data.insert("old_span".into(), serde_json::to_value(s).expect("span serializes"));
                    }
                    Err(e) if numerical_failure(&e) => {
                        checks.push(failure_check(format!("{}.old-span", space.id), &e))
                    }
                    Err(e) => return Err(e.into()),
                }
                data.insert("newspace".into(), serde_json::to_value(r).expect("newspace serializes"));
            }
            Err(e) if numerical_failure(&e) => checks.push(failure_check(format!("{}.newspace", space.id), &e)),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Cell {
        prefix: "classical".into(),
        checks,
        runtime_ms: elapsed_ms(t),
        warnings: vec![],
        data: serde_json::Value::Object(data),
    })
}

/// Every fixture in a directory, sorted by (level, weight, Conrey label).
pub fn load_dir(dir: &Path) -> Result<Vec<CuspSpace>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Input(format!("cannot read {}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for e in entries {
        let path = e.map_err(|e| CliError::Input(e.to_string()))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            out.push(CuspSpace::load(&path)?);
        }
    }
    out.sort_by_key(|s| (s.level, s.weight, s.chi.conrey_label()));
    Ok(out)
}

/// Run jobs on a bounded pool (or sequentially without the `parallel` feature), keeping order.
pub fn run_all<T, F>(jobs: Vec<T>, workers: Option<usize>, f: F) -> Vec<Result<Vec<Cell>>>
where
    T: Send,
    F: Fn(T) -> Result<Vec<Cell>> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = workers {
            b = b.num_threads(w.max(1));
        }
        match b.build() {
            Ok(pool) => pool.install(|| jobs.into_par_iter().map(&f).collect()),
            Err(_) => jobs.into_iter().map(f).collect(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        jobs.into_iter().map(f).collect()
    }
}
