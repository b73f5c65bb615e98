//! The four subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use hecke_classical::newspace::OpKind;
use hecke_classical::OpConfig;
use hecke_core::cosets::Level;

use crate::cache::Cache;
use crate::campaign::Campaign;
use crate::charspec::CharSpec;
use crate::error::{CliError, Result};
use crate::report::Report;
use crate::suite::{self, FULL_AUDIT_MAX_Q};

#[derive(Parser, Debug)]
#[command(name = "hecke-lab", version, about = "Twisted Hecke algebras of GL2(Z/p^n) and classical newspace checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the algebra for a character mod p^n and print its structure table.
    Algebra {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        /// Character spec as inline JSON or a path to a JSON file.
        #[arg(long = "char")]
        chi: String,
        /// Check every relation (and the brute-force group sum for p^n <= 27).
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Spectral audit of the induced representation.
    Induced {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        #[arg(long = "char")]
        chi: String,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Classical operators on every fixture in DIR whose level is divisible by P.
    Classical {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        prime: u64,
        #[arg(long, value_parser = ["q", "qprime", "s", "sprime"])]
        op: Option<String>,
        /// Also intersect eigenspaces and compare with the dimension oracle.
        #[arg(long)]
        characterize: bool,
        /// Restrict to one fixture id, e.g. 33.2.1.
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a verification campaign.
    Verify {
        #[arg(long)]
        campaign: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
    },
}

/// What the binary prints and the exit code it returns.
pub struct Outcome {
    pub report: Report,
    pub text: String,
}

fn local_char(p: u64, n: u32, spec: &str) -> Result<(Level, u64, hecke_core::arith::PChar)> {
    let lvl = suite::level(p, n)?;
    let (j, chi) = CharSpec::parse_arg(spec)?.to_local(p, n)?;
    Ok((lvl, j, chi))
}

fn summary_line(r: &Report) -> String {
    format!(
        "{}: {} assertions, {} passed, {} failed",
        r.command, r.summary.total, r.summary.passed, r.summary.failed
    )
}

pub fn algebra(p: u64, n: u32, spec: &str, verify: bool, json: Option<&Path>, cache: &Cache) -> Result<Outcome> {
    let (lvl, j, chi) = local_char(p, n, spec)?;
    let (alg, cell) = suite::algebra_cell(lvl, j, chi, cache, verify, FULL_AUDIT_MAX_Q, 0)?;
    let mut report = Report::new("algebra", 0);
    for w in &cell.warnings {
        report.warn(w.clone());
    }
    report.add(&cell.prefix, &cell.checks, cell.runtime_ms);
    report.data = cell.data;
    let mut text = String::new();
    let t = alg.table();
    let _ = writeln!(text, "p={p} n={n} conrey={j} r={} order={} dim={}", alg.r(), alg.order(), alg.dim());
    let names: Vec<String> = alg.basis.iter().map(|l| l.to_string()).collect();
    let _ = writeln!(text, "basis: {}", names.join(" "));
    for i in 0..alg.dim() {
        for k in 0..alg.dim() {
            let terms: Vec<String> = (0..alg.dim())
                .filter(|&m| !t.c[i][k][m].is_zero())
                .map(|m| format!("({}) {}", t.c[i][k][m], names[m]))
                .collect();
            let rhs = if terms.is_empty() { "0".into() } else { terms.join(" + ") };
            let _ = writeln!(text, "{} * {} = {rhs}", names[i], names[k]);
        }
    }
    if verify {
        let _ = writeln!(text, "{}", summary_line(&report));
    }
    if let Some(path) = json {
        report.write(path)?;
    }
    Ok(Outcome { report, text })
}

pub fn induced(p: u64, n: u32, spec: &str, out: &Path, seed: u64, cache: &Cache) -> Result<Outcome> {
    let (lvl, j, chi) = local_char(p, n, spec)?;
    let (alg, _) = suite::algebra_cell(lvl, j, chi, cache, false, FULL_AUDIT_MAX_Q, seed)?;
    let cell = suite::induced_cell(alg, j, FULL_AUDIT_MAX_Q, seed);
    let mut report = Report::new("induced", seed);
    report.add(&cell.prefix, &cell.checks, cell.runtime_ms);
    report.data = cell.data;
    report.write(out)?;
    let text = summary_line(&report) + "\n";
    Ok(Outcome { report, text })
}

pub fn classical(
    dir: &Path,
    prime: u64,
    op: Option<&str>,
    characterize: bool,
    only: Option<&str>,
    out: &Path,
    seed: u64,
) -> Result<Outcome> {
    if !hecke_core::arith::modular::is_prime(prime) {
        return Err(CliError::Input(format!("{prime} is not prime")));
    }
    let kind = op.map(|o| OpKind::parse(o).ok_or_else(|| CliError::Input(format!("unknown operator {o}")))).transpose()?;
    let cfg = OpConfig {
        seed,
        ..OpConfig::default()
    };
    let spaces: Vec<_> = suite::load_dir(dir)?
        .into_iter()
        .filter(|s| s.level % prime == 0 && only.is_none_or(|id| s.id == id))
        .collect();
    if let Some(id) = only {
        if spaces.is_empty() {
            return Err(CliError::Input(format!("no fixture {id} with level divisible by {prime} in {}", dir.display())));
        }
    }
    let mut report = Report::new("classical", seed);
    let mut data = serde_json::Map::new();
    for s in &spaces {
        let mut entry = serde_json::Map::new();
        let cell = suite::classical_prime_cell(dir, s, prime, kind, &cfg)?;
        for w in &cell.warnings {
            report.warn(w.clone());
        }
        report.add(&cell.prefix, &cell.checks, cell.runtime_ms);
        entry.insert("prime".into(), cell.data);
        if kind.is_none() || characterize {
            let cell = suite::classical_space_cell(dir, s, characterize, &cfg)?;
            report.add(&cell.prefix, &cell.checks, cell.runtime_ms);
            entry.insert("space".into(), cell.data);
        }
        data.insert(s.id.clone(), serde_json::Value::Object(entry));
    }
    report.data = serde_json::Value::Object(data);
    report.write(out)?;
    let mut text = format!("{} fixtures with {prime} | N\n", spaces.len());
    text += &summary_line(&report);
    text.push('\n');
    Ok(Outcome { report, text })
}

pub fn verify(campaign: &Path, seed: u64, out: &Path, cache: &Cache) -> Result<Outcome> {
    let c = Campaign::load(campaign)?;
    let report = crate::campaign::run(&c, seed, cache)?;
    report.write(out)?;
    let mut text = summary_line(&report) + "\n";
    for f in report.failures() {
        let _ = writeln!(text, "FAIL {f}");
    }
    Ok(Outcome { report, text })
}

/// Dispatch a parsed command line.
pub fn run(cli: Cli) -> Result<Outcome> {
    let cache = Cache::from_env();
    match cli.command {
        Command::Algebra { p, n, chi, verify, json } => algebra(p, n, &chi, verify, json.as_deref(), &cache),
        Command::Induced { p, n, chi, report, seed } => induced(p, n, &chi, &report, seed, &cache),
        Command::Classical {
            fixture,
            prime,
            op,
            characterize,
            space,
            report,
            seed,
        } => classical(&fixture, prime, op.as_deref(), characterize, space.as_deref(), &report, seed),
        Command::Verify { campaign, seed, report } => verify(&campaign, seed, &report, &cache),
    }
}
