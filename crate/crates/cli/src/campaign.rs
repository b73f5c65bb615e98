//! Verification campaigns: a grid of algebra cells and a list of fixture suites.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hecke_classical::OpConfig;
use hecke_core::arith::modular::factorize;
use hecke_core::arith::PChar;

use crate::cache::Cache;
use crate::charspec::CharSpec;
use crate::error::{CliError, Result};
use crate::report::Report;
use crate::suite::{self, Cell, FULL_AUDIT_MAX_Q};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    /// "default" for p in {2,3,5}, n <= 3 with every character, or an explicit list.
    #[serde(default)]
    pub algebra: Option<AlgebraGrid>,
    #[serde(default)]
    pub classical: Vec<FixtureSuite>,
    #[serde(default)]
    pub tolerance: Tolerance,
    /// Worker threads for independent cells (default: all cores).
    #[serde(default)]
    pub workers: Option<usize>,
    /// Exhaustive audits run up to this p^n.
    #[serde(default = "default_full_audit")]
    pub full_audit_max_q: u64,
}

fn default_full_audit() -> u64 {
    FULL_AUDIT_MAX_Q
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraGrid {
    Named(String),
    Cells(Vec<GridCell>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCell {
    pub p: u64,
    pub n: u32,
    /// A single character; every character mod p^n when absent.
    #[serde(default, rename = "char")]
    pub chi: Option<CharSpec>,
    #[serde(default = "yes")]
    pub induced: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSuite {
    pub dir: PathBuf,
    /// Fixture ids such as "33.2.1"; all fixtures in the directory when empty.
    #[serde(default)]
    pub spaces: Vec<String>,
    #[serde(default = "yes")]
    pub characterize: bool,
}

/// Tolerances may be tightened below the defaults, never loosened.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub residual: f64,
    pub conditioning: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        let c = OpConfig::default();
        Tolerance {
            residual: c.residual_tol,
            conditioning: c.max_conditioning,
        }
    }
}

impl Campaign {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read campaign {}: {e}", path.display())))?;
        let mut c: Campaign =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed campaign: {e}")))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for s in &mut c.classical {
            if s.dir.is_relative() {
                s.dir = base.join(&s.dir);
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let d = Tolerance::default();
        if !(self.tolerance.residual > 0.0 && self.tolerance.residual <= d.residual) {
            return Err(CliError::Input(format!("residual tolerance must lie in (0, {:e}]", d.residual)));
        }
        if !(self.tolerance.conditioning >= 1.0 && self.tolerance.conditioning <= d.conditioning) {
            return Err(CliError::Input(format!("conditioning bound must lie in [1, {:e}]", d.conditioning)));
        }
        if let Some(AlgebraGrid::Named(n)) = &self.algebra {
            if n != "default" {
                return Err(CliError::Input(format!("unknown grid {n:?}")));
            }
        }
        Ok(())
    }

    pub fn op_config(&self, seed: u64) -> OpConfig {
        OpConfig {
            residual_tol: self.tolerance.residual,
            max_conditioning: self.tolerance.conditioning,
            seed,
            ..OpConfig::default()
        }
    }

    /// The algebra grid expanded to (p, n, conrey, character, induced).
    pub fn cells(&self) -> Result<Vec<(u64, u32, u64, PChar, bool)>> {
        let grid: Vec<GridCell> = match &self.algebra {
            None => vec![],
            Some(AlgebraGrid::Named(_)) => default_grid(),
            Some(AlgebraGrid::Cells(c)) => c.clone(),
        };
        let mut out = Vec::new();
        for g in grid {
            suite::level(g.p, g.n)?;
            match &g.chi {
                Some(spec) => {
                    let (j, chi) = spec.to_local(g.p, g.n)?;
                    out.push((g.p, g.n, j, chi, g.induced));
                }
                None => {
                    let all = PChar::all(g.p, g.n).map_err(|e| CliError::Input(e.to_string()))?;
                    out.extend(all.into_iter().map(|(j, chi)| (g.p, g.n, j, chi, g.induced)));
                }
            }
        }
        Ok(out)
    }
}

pub fn default_grid() -> Vec<GridCell> {
    let mut v = Vec::new();
    for p in [2, 3, 5] {
        for n in 1..=3 {
            v.push(GridCell {
                p,
                n,
                chi: None,
                induced: true,
            });
        }
    }
    v
}

enum Job {
    Census(u64, u32),
    Algebra(u64, u32, u64, PChar, bool),
    Space(PathBuf, String, bool),
    Prime(PathBuf, String, u64),
}

/// Run every cell once; failures are collected, never short-circuited.
pub fn run(c: &Campaign, seed: u64, cache: &Cache) -> Result<Report> {
    let mut report = Report::new("verify", seed);
    let cfg = c.op_config(seed);
    let mut jobs = Vec::new();
    let cells = c.cells()?;
    let mut levels: Vec<(u64, u32)> = cells.iter().map(|x| (x.0, x.1)).collect();
    levels.sort_unstable();
    levels.dedup();
    jobs.extend(levels.into_iter().map(|(p, n)| Job::Census(p, n)));
    jobs.extend(cells.into_iter().map(|(p, n, j, chi, ind)| Job::Algebra(p, n, j, chi, ind)));
    for s in &c.classical {
        let spaces = suite::load_dir(&s.dir)?;
        let wanted: Vec<_> = spaces
            .into_iter()
            .filter(|x| s.spaces.is_empty() || s.spaces.contains(&x.id))
            .collect();
        for id in &s.spaces {
            if !wanted.iter().any(|x| &x.id == id) {
                return Err(CliError::Input(format!("fixture {id} not found in {}", s.dir.display())));
            }
        }
        for sp in wanted {
            for (p, _) in factorize(sp.level) {
                jobs.push(Job::Prime(s.dir.clone(), sp.id.clone(), p));
            }
            jobs.push(Job::Space(s.dir.clone(), sp.id, s.characterize));
        }
    }
    let max_q = c.full_audit_max_q;
    let results = suite::run_all(jobs, c.workers, |job| -> Result<Vec<Cell>> {
        match job {
            Job::Census(p, n) => Ok(vec![suite::census_cell(suite::level(p, n)?)]),
            Job::Algebra(p, n, j, chi, induced) => {
                let (alg, cell) = suite::algebra_cell(suite::level(p, n)?, j, chi, cache, true, max_q, seed)?;
                let mut out = vec![cell];
                if induced {
                    out.push(suite::induced_cell(alg, j, max_q, seed));
                }
                Ok(out)
            }
            Job::Space(dir, id, ch) => {
                let sp = hecke_classical::CuspSpace::load(&dir.join(format!("{id}.json")))?;
                Ok(vec![suite::classical_space_cell(&dir, &sp, ch, &cfg)?])
            }
            Job::Prime(dir, id, p) => {
                let sp = hecke_classical::CuspSpace::load(&dir.join(format!("{id}.json")))?;
                Ok(vec![suite::classical_prime_cell(&dir, &sp, p, None, &cfg)?])
            }
        }
    });
    for r in results {
        for cell in r? {
            for w in &cell.warnings {
                report.warn(w.clone());
            }
            report.add(&cell.prefix, &cell.checks, cell.runtime_ms);
        }
    }
    Ok(report)
}
