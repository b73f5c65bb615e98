//! Versioned JSON cache of coset data and structure tables, one file per (p, n).
//!
//! Writes go to a temporary file in the cache directory and are renamed into place,
//! so readers see either the previous or the new file.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use hecke_core::cosets::{right_coset_reps, DcLabel, Level};
use hecke_core::hecke::{Algebra, StructTable};

use crate::error::{CliError, Result};

pub const CACHE_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "HECKE_LAB_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheFile {
    pub version: u32,
    pub p: u64,
    pub n: u32,
    /// Right coset representatives of K0(p^n) in K as (a, b, c, d).
    pub coset_reps: Vec<[u64; 4]>,
    pub labels: Vec<DcLabel>,
    /// Structure tables keyed by Conrey label.
    pub tables: BTreeMap<u64, StructTable>,
}

impl CacheFile {
    pub fn fresh(lvl: Level) -> Self {
        CacheFile {
            version: CACHE_VERSION,
            p: lvl.p,
            n: lvl.n,
            coset_reps: right_coset_reps(lvl).iter().map(|m| [m.a, m.b, m.c, m.d]).collect(),
            labels: DcLabel::all(lvl),
            tables: BTreeMap::new(),
        }
    }

    fn consistent(&self, lvl: Level) -> bool {
        self.p == lvl.p
            && self.n == lvl.n
            && self.coset_reps.len() == lvl.index()
            && self.labels == DcLabel::all(lvl)
            && self.tables.values().all(|t| t.p == lvl.p && t.n == lvl.n)
    }
}

/// What happened when a table was requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Hit,
    Miss,
    Rebuilt,
    Disabled,
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: Some(dir.into()) }
    }

    pub fn disabled() -> Self {
        Cache { dir: None }
    }

    /// Cache rooted at $HECKE_LAB_CACHE_DIR, or disabled when it is unset or empty.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Cache::new(d),
            _ => Cache::disabled(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn path(&self, p: u64, n: u32) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("p{p}n{n}.json")))
    }

    /// Read the file for (p, n). Ok(None) if absent; Err(reason) if unreadable, corrupt
    /// or written by another cache version.
    pub fn load(&self, lvl: Level) -> std::result::Result<Option<CacheFile>, String> {
        let Some(path) = self.path(lvl.p, lvl.n) else {
            return Ok(None);
        };
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(format!("cannot read {}: {e}", path.display())),
        };
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| format!("corrupted cache {}: {e}", path.display()))?;
        let version = v.get("version").and_then(|x| x.as_u64());
        if version != Some(CACHE_VERSION as u64) {
            return Err(format!(
                "cache {} has version {version:?}, expected {CACHE_VERSION}; recomputing",
                path.display()
            ));
        }
        let file: CacheFile =
            serde_json::from_value(v).map_err(|e| format!("corrupted cache {}: {e}", path.display()))?;
        if !file.consistent(lvl) {
            return Err(format!("corrupted cache {}: contents do not match (p, n)", path.display()));
        }
        Ok(Some(file))
    }

    /// Atomically replace the file for (p, n).
    pub fn store(&self, file: &CacheFile) -> Result<()> {
        let (Some(dir), Some(path)) = (self.dir.as_ref(), self.path(file.p, file.n)) else {
            return Ok(());
        };
        let err = |e: std::io::Error| CliError::Write {
            path: path.display().to_string(),
            source: e,
        };
        std::fs::create_dir_all(dir).map_err(err)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
        let text = serde_json::to_vec(file).expect("cache file serializes");
        tmp.write_all(&text).map_err(err)?;
        tmp.as_file().sync_all().map_err(err)?;
        tmp.persist(&path).map_err(|e| err(e.error))?;
        Ok(())
    }

    /// Load or compute the structure table of `alg`, updating the cache.
    /// Warnings (corrupt or stale files) are returned for the report.
    pub fn table(&self, alg: &Arc<Algebra>, conrey: u64) -> Result<(Outcome, Vec<String>)> {
        if self.dir.is_none() {
            alg.table();
            return Ok((Outcome::Disabled, vec![]));
        }
        let lvl = alg.lvl;
        let mut warnings = Vec::new();
        let file = match self.load(lvl) {
            Ok(f) => f,
            Err(w) => {
                warnings.push(w);
                None
            }
        };
        if let Some(t) = file.as_ref().and_then(|f| f.tables.get(&conrey)) {
            if alg.install_table(t.clone()) {
                return Ok((Outcome::Hit, warnings));
            }
            warnings.push(format!(
                "cached table for p={} n={} conrey={conrey} does not match the algebra; recomputing",
                lvl.p, lvl.n
            ));
        }
        let outcome = if warnings.is_empty() { Outcome::Miss } else { Outcome::Rebuilt };
        let table = alg.table().clone();
        // re-read under a process-wide lock so concurrent cells do not drop each other's tables
        static WRITE: std::sync::Mutex<()> = std::sync::Mutex::new(());
        let _guard = WRITE.lock().unwrap_or_else(|e| e.into_inner());
        let mut file = match self.load(lvl) {
            Ok(Some(f)) => f,
            _ => CacheFile::fresh(lvl),
        };
        file.tables.insert(conrey, table);
        self.store(&file)?;
        Ok((outcome, warnings))
    }
}
