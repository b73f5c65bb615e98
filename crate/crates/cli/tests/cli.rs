use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use hecke_core::arith::{DirChar, PChar};
use hecke_core::cosets::Level;
use hecke_core::hecke::Algebra;
use hecke_lab::cache::{Cache, CacheFile, Outcome, CACHE_ENV, CACHE_VERSION};
use hecke_lab::charspec::CharSpec;
use hecke_lab::report::{Report, Status, SCHEMA, SCHEMA_VERSION};
use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hecke-lab"));
    cmd.args(args);
    match cache {
        Some(d) => cmd.env(CACHE_ENV, d),
        None => cmd.env_remove(CACHE_ENV),
    };
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_report(path: &Path) -> Report {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn algebra_prints_table_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.json");
    let o = run(
        &["algebra", "--p", "3", "--n", "2", "--char", r#"{"modulus":9,"conrey":1}"#, "--verify", "--json", s(&out)],
        None,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("dim=3"), "{text}");
    assert!(text.contains(" * "), "{text}");
    let r = read_report(&out);
    assert!(r.passed());
    assert!(r.assertions.keys().any(|k| k.contains("brute")));
    assert!(r.assertions.values().all(|a| a.status == Status::Pass));
}

#[test]
fn induced_report_schema_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("i.json");
    let o = run(
        &["induced", "--p", "3", "--n", "2", "--char", r#"{"modulus":9,"conrey":4}"#, "--report", s(&out), "--seed", "17"],
        None,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema"], SCHEMA);
    assert_eq!(v["schema_version"], SCHEMA_VERSION);
    assert_eq!(v["seed"], 17);
    let a = v["assertions"].as_object().unwrap();
    assert!(!a.is_empty());
    for (_, x) in a {
        for key in ["status", "expected", "computed", "provenance", "runtime_ms"] {
            assert!(x.get(key).is_some(), "{key} missing in {x}");
        }
        let prov = x["provenance"].as_str().unwrap();
        assert!(["stated", "definitional", "oracle"].contains(&prov), "{prov}");
    }
}

#[test]
fn components_spec_matches_conrey() {
    let chi = DirChar::from_conrey(9, 4).unwrap();
    let spec = CharSpec::Components {
        modulus: 9,
        components: chi.components().to_vec(),
    };
    let spec = serde_json::to_string(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let o1 = run(&["algebra", "--p", "3", "--n", "2", "--char", &spec, "--json", s(&a)], None);
    let o2 = run(&["algebra", "--p", "3", "--n", "2", "--char", r#"{"modulus":9,"conrey":4}"#, "--json", s(&b)], None);
    assert_eq!(code(&o1), 0, "{}", stderr(&o1));
    assert_eq!(o1.stdout, o2.stdout);
    // spec given as a file path
    let f = dir.path().join("chi.json");
    std::fs::write(&f, &spec).unwrap();
    let o3 = run(&["algebra", "--p", "3", "--n", "2", "--char", s(&f)], None);
    assert_eq!(o3.stdout, o2.stdout);
}

#[test]
fn classical_single_operators() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = run(
        &["classical", "--fixture", s(&fixtures()), "--prime", "3", "--op", "q", "--space", "33.2.1", "--report", s(&out)],
        None,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_report(&out);
    assert!(r.assertions.keys().any(|k| k.contains("33.2.1") && k.ends_with("quadratic")));
    assert!(r.passed());

    let o = run(
        &["classical", "--fixture", s(&fixtures()), "--prime", "3", "--op", "s", "--space", "27.4.10", "--report", s(&out)],
        None,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_report(&out);
    assert!(r.assertions.keys().any(|k| k.contains("27.4.10") && k.ends_with("quadratic")));
}

#[test]
fn classical_characterize_prime_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = run(
        &["classical", "--fixture", s(&fixtures()), "--prime", "11", "--characterize", "--report", s(&out)],
        None,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_report(&out);
    assert!(r.assertions.keys().any(|k| k.ends_with("newspace.dimension")));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let cases: Vec<Vec<String>> = vec![
        vec!["algebra", "--p", "3", "--n", "3", "--char", r#"{"modulus":9,"conrey":4}"#],
        vec!["algebra", "--p", "3", "--n", "2", "--char", r#"{"modulus":9"#],
        vec!["algebra", "--p", "3", "--n", "2", "--char", r#"{"modulus":9,"conrey":3}"#],
        vec!["algebra", "--p", "4", "--n", "2", "--char", r#"{"modulus":16,"conrey":1}"#],
        vec!["induced", "--p", "2", "--n", "2", "--char", r#"{"modulus":5,"conrey":1}"#, "--report", s(&out)],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in cases {
        let a: Vec<&str> = args.iter().map(|x| x.as_str()).collect();
        let o = run(&a, None);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
    let o = run(&["classical", "--fixture", "/nonexistent", "--prime", "3", "--report", s(&out)], None);
    assert_eq!(code(&o), 2);
}

fn campaign(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn malformed_campaigns_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    for (name, body) in [
        ("bad.json", "{not json"),
        ("unknown.json", r#"{"algebra":"default","extra":1}"#),
        ("loose.json", r#"{"algebra":[{"p":2,"n":1}],"tolerance":{"residual":1e-3}}"#),
        ("grid.json", r#"{"algebra":"everything"}"#),
    ] {
        let c = campaign(dir.path(), name, body);
        let o = run(&["verify", "--campaign", s(&c), "--seed", "0", "--report", s(&out)], None);
        assert_eq!(code(&o), 2, "{name}: {}", stderr(&o));
    }
    let o = run(&["verify", "--campaign", "/nonexistent.json", "--seed", "0", "--report", s(&out)], None);
    assert_eq!(code(&o), 2);
}

#[test]
fn empty_campaign_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let c = campaign(dir.path(), "empty.json", "{}");
    let o = run(&["verify", "--campaign", s(&c), "--seed", "5", "--report", s(&out)], None);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_report(&out);
    assert!(r.assertions.is_empty());
    assert_eq!(r.seed, 5);
}

#[test]
fn wrong_fixture_dimension_fails_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fixtures");
    std::fs::create_dir(&fx).unwrap();
    for name in ["11.2.1.json", "33.2.1.json"] {
        std::fs::copy(fixtures().join(name), fx.join(name)).unwrap();
    }
    let path = fx.join("33.2.1.json");
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["dimensions"]["new"] = 2.into();
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let c = campaign(dir.path(), "c.json", r#"{"classical":[{"dir":"fixtures","spaces":["33.2.1"]}]}"#);
    let out = dir.path().join("r.json");
    let o = run(&["verify", "--campaign", s(&c), "--seed", "0", "--report", s(&out)], None);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let r = read_report(&out);
    assert!(r.failures().iter().any(|f| f.contains("33.2.1") && f.contains("fixture")), "{:?}", r.failures());
}

#[test]
fn campaign_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{"algebra":[{{"p":2,"n":2}},{{"p":3,"n":1,"char":{{"modulus":3,"conrey":2}}}}],
            "classical":[{{"dir":"{}","spaces":["11.2.1","21.3.13"]}}]}}"#,
        fixtures().display()
    );
    let c = campaign(dir.path(), "c.json", &body);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let cache = dir.path().join("cache");
    let o1 = run(&["verify", "--campaign", s(&c), "--seed", "3", "--report", s(&a)], None);
    let o2 = run(&["verify", "--campaign", s(&c), "--seed", "3", "--report", s(&b)], Some(&cache));
    assert_eq!(code(&o1), 0, "{}", stderr(&o1));
    assert_eq!(code(&o2), 0, "{}", stderr(&o2));
    let (ra, rb) = (read_report(&a), read_report(&b));
    assert!(ra.summary.total > 0);
    assert_eq!(ra.without_timing(), rb.without_timing());
}

fn algebra(p: u64, n: u32, conrey: u64) -> Arc<Algebra> {
    let lvl = Level::new(p, n).unwrap();
    let chi = PChar::all(p, n).unwrap().into_iter().find(|(j, _)| *j == conrey).unwrap().1;
    Algebra::new(lvl, chi).unwrap()
}

#[test]
fn cache_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let (o, w) = cache.table(&algebra(3, 2, 1), 1).unwrap();
    assert_eq!(o, Outcome::Miss);
    assert!(w.is_empty());
    let path = cache.path(3, 2).unwrap();
    let first = std::fs::read(&path).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.contains("/"), "rationals stored as num/den");
    let file = cache.load(Level::new(3, 2).unwrap()).unwrap().unwrap();
    cache.store(&file).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);

    let alg = algebra(3, 2, 1);
    let (o, _) = cache.table(&alg, 1).unwrap();
    assert_eq!(o, Outcome::Hit);
    assert_eq!(alg.table(), &alg.fresh_table());
}

#[test]
fn corrupted_cache_is_rebuilt_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    cache.table(&algebra(2, 2, 1), 1).unwrap();
    let path = cache.path(2, 2).unwrap();
    let good = std::fs::read(&path).unwrap();
    std::fs::write(&path, &good[..good.len() / 2]).unwrap();
    let (o, w) = cache.table(&algebra(2, 2, 1), 1).unwrap();
    assert_eq!(o, Outcome::Rebuilt);
    assert!(w[0].contains("corrupted"), "{w:?}");
    assert!(cache.load(Level::new(2, 2).unwrap()).unwrap().is_some());

    // through the binary: warning on stderr, still exit 0
    std::fs::write(&path, b"garbage").unwrap();
    let o = run(&["algebra", "--p", "2", "--n", "2", "--char", r#"{"modulus":4,"conrey":1}"#], Some(dir.path()));
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("corrupted"), "{}", stderr(&o));
    assert!(cache.load(Level::new(2, 2).unwrap()).unwrap().is_some());
}

#[test]
fn cache_version_bump_recomputes() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    cache.table(&algebra(3, 1, 1), 1).unwrap();
    let path = cache.path(3, 1).unwrap();
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["version"] = (CACHE_VERSION + 1).into();
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let (o, w) = cache.table(&algebra(3, 1, 1), 1).unwrap();
    assert_eq!(o, Outcome::Rebuilt);
    assert!(w[0].contains("version"), "{w:?}");
    let file: CacheFile = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file.version, CACHE_VERSION);
}

#[test]
fn mismatched_cached_table_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    cache.table(&algebra(3, 1, 1), 1).unwrap();
    let lvl = Level::new(3, 1).unwrap();
    let mut file = cache.load(lvl).unwrap().unwrap();
    let t = file.tables.remove(&1).unwrap();
    let mut bad = t.clone();
    bad.labels.reverse();
    file.tables.insert(1, bad);
    cache.store(&file).unwrap();
    let alg = algebra(3, 1, 1);
    let (o, w) = cache.table(&alg, 1).unwrap();
    assert_eq!(o, Outcome::Rebuilt);
    assert!(!w.is_empty());
    assert_eq!(alg.table(), &t);
}

#[test]
fn concurrent_readers_never_see_torn_files() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let lvl = Level::new(3, 2).unwrap();
    cache.table(&algebra(3, 2, 1), 1).unwrap();
    let small = cache.load(lvl).unwrap().unwrap();
    let mut large = small.clone();
    for (j, chi) in PChar::all(3, 2).unwrap() {
        large.tables.insert(j, Algebra::new(lvl, chi).unwrap().table().clone());
    }
    let stop = Arc::new(AtomicBool::new(false));
    let writers: Vec<_> = (0..2)
        .map(|i| {
            let (cache, stop) = (cache.clone(), stop.clone());
            let file = if i == 0 { small.clone() } else { large.clone() };
            std::thread::spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    cache.store(&file).unwrap();
                }
            })
        })
        .collect();
    let path = cache.path(3, 2).unwrap();
    for _ in 0..500 {
        let text = std::fs::read_to_string(&path).unwrap();
        let f: CacheFile = serde_json::from_str(&text).expect("complete file");
        assert!(f == small || f == large);
        assert!(cache.load(lvl).unwrap().is_some());
    }
    stop.store(true, Ordering::Relaxed);
    for w in writers {
        w.join().unwrap();
    }
}
