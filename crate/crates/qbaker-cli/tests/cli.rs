//! End-to-end runner tests on tiny manifests: validation, caching,
//! determinism, and partial-failure behavior.

use std::path::{Path, PathBuf};

use qbaker_cli::cache::SpectrumCache;
use qbaker_cli::manifest::Manifest;
use qbaker_cli::runner::{run, RunConfig};

fn manifest_from(text: &str) -> Manifest {
    let m: Manifest = toml::from_str(text).expect("manifest parse");
    m.validate().expect("manifest validate");
    m
}

fn config(manifest: Manifest, out: &Path, cache: Option<PathBuf>) -> RunConfig {
    RunConfig {
        manifest,
        out: out.to_path_buf(),
        seed: 1,
        cache: SpectrumCache::new(cache).expect("cache"),
    }
}

const GAPRATIO_MANIFEST: &str = r#"
experiment = "gapratio-scan"

[[spec]]
family = "saraceno"
a = 2
ns = [32, 40, 48]
"#;

#[test]
fn empty_spec_list_is_rejected_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let text = "experiment = \"gapratio-scan\"\n";
    let m: Manifest = toml::from_str(text).unwrap();
    assert!(m.validate().is_err());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unknown_experiment_is_rejected() {
    let m: Manifest =
        toml::from_str("experiment = \"frobnicate\"\n[[spec]]\nfamily = \"bv\"\na = 2\nn = 8\n")
            .unwrap();
    assert!(m.validate().is_err());
}

#[test]
fn verb_experiment_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(manifest_from(GAPRATIO_MANIFEST), dir.path(), None);
    assert!(run("sff", &cfg).is_err());
}

#[test]
fn second_run_hits_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache_dir = dir.path().join("cache");
    let run_once = |out: &str| {
        let cfg = config(
            manifest_from(GAPRATIO_MANIFEST),
            &dir.path().join(out),
            Some(cache_dir.clone()),
        );
        run("gapratio", &cfg).expect("run")
    };
    let first = run_once("a");
    assert_eq!(first.cache_hits, 0);
    assert_eq!(first.cache_misses, 3);
    let second = run_once("b");
    assert_eq!(second.cache_hits, 3);
    assert_eq!(second.cache_misses, 0);
    // and the cached table is byte-identical to the computed one
    let a = std::fs::read(dir.path().join("a/gapratio.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/gapratio.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn corrupt_cache_entry_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let cache_dir = dir.path().join("cache");
    let cfg = config(
        manifest_from(GAPRATIO_MANIFEST),
        &dir.path().join("a"),
        Some(cache_dir.clone()),
    );
    run("gapratio", &cfg).unwrap();
    for entry in std::fs::read_dir(&cache_dir).unwrap() {
        std::fs::write(entry.unwrap().path(), b"garbage").unwrap();
    }
    let cfg = config(
        manifest_from(GAPRATIO_MANIFEST),
        &dir.path().join("b"),
        Some(cache_dir),
    );
    let summary = run("gapratio", &cfg).unwrap();
    assert_eq!(summary.cache_hits, 0);
    assert_eq!(summary.cache_misses, 3);
    let a = std::fs::read(dir.path().join("a/gapratio.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/gapratio.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn random_alpha_specs_get_distinct_cache_entries() {
    let dir = tempfile::tempdir().unwrap();
    let cache_dir = dir.path().join("cache");
    let text = |seed: u64| {
        format!(
            "experiment = \"gapratio-scan\"\n[[spec]]\nfamily = \"bv\"\na = 2\nn = 32\nrandom_alpha = true\nseed = {seed}\n"
        )
    };
    for (i, seed) in [11u64, 12].into_iter().enumerate() {
        let cfg = config(
            manifest_from(&text(seed)),
            &dir.path().join(format!("o{i}")),
            Some(cache_dir.clone()),
        );
        let summary = run("gapratio", &cfg).unwrap();
        assert_eq!(summary.cache_misses, 1, "seed {seed} must miss");
    }
    assert_eq!(std::fs::read_dir(&cache_dir).unwrap().count(), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let text = r#"
experiment = "slope-scan"

[[spec]]
family = "bv"
a = 2
ns = [48, 64]

[[spec]]
family = "bv"
a = 2
ns = [48, 64]
random_alpha = true

[params]
ell = 4
fit_points = 6
"#;
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for out in ["a", "b"] {
        let cfg = config(manifest_from(text), &dir.path().join(out), None);
        run("slope-scan", &cfg).unwrap();
        bodies.push(std::fs::read(dir.path().join(out).join("slope_scan.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn partial_failure_emits_error_row_and_continues() {
    // N = 33 is not a multiple of A = 2: that spec must fail while the
    // other two still produce rows
    let text = r#"
experiment = "gapratio-scan"

[[spec]]
family = "saraceno"
a = 2
ns = [32, 33, 48]
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(manifest_from(text), dir.path(), None);
    let summary = run("gapratio", &cfg).unwrap();
    assert_eq!(summary.rows, 2);
    assert_eq!(summary.error_rows, 1);
    let table = std::fs::read_to_string(dir.path().join("gapratio.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4);
    let error_line = lines.iter().find(|l| l.starts_with("saraceno,2,33")).unwrap();
    assert!(error_line.contains("multiple"), "error row: {error_line}");
}

#[test]
fn build_writes_matrix_containers() {
    let text = r#"
experiment = "gapratio-scan"

[[spec]]
family = "shor"
a = 2
n = 16
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(manifest_from(text), dir.path(), None);
    let summary = run("build", &cfg).unwrap();
    assert_eq!(summary.rows, 1);
    let bin = summary
        .outputs
        .iter()
        .find(|o| o.ends_with(".bin"))
        .expect("binary container");
    let bytes = std::fs::read(dir.path().join(bin)).unwrap();
    // u64 dim header + 16 * 16 complex entries of 16 bytes each
    assert_eq!(bytes.len(), 8 + 16 * 16 * 16);
    let mut cursor = std::io::Cursor::new(bytes);
    let u = qbaker::linalg::UnitaryMatrix::read_from(&mut cursor).unwrap();
    assert!(u.unitarity_defect() < 1e-10 * 16.0);
}

#[test]
fn interpolate_runs_from_ensemble_entries() {
    let text = r#"
experiment = "interpolation"

[[ensemble]]
kind = "2coe-to-coe"
n = 24
seed = 5
seeds = 2

[params]
t_values = [0.0, 1.0]
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(manifest_from(text), dir.path(), None);
    let summary = run("interpolate", &cfg).unwrap();
    assert_eq!(summary.rows, 4);
    assert_eq!(summary.error_rows, 0);
    let table = std::fs::read_to_string(dir.path().join("interpolate.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
}

#[test]
fn orbit_check_emits_deterministic_comparison() {
    let text = r#"
experiment = "orbit-check"

[[spec]]
family = "bv"
a = 2
n = 64

[params]
times = [3]
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(manifest_from(text), dir.path(), None);
    let summary = run("orbit-check", &cfg).unwrap();
    assert_eq!(summary.rows, 1);
    let table = std::fs::read_to_string(dir.path().join("orbit_check.csv")).unwrap();
    let row = table.lines().nth(1).unwrap();
    // the orbit sum at this short t carries its known O(1) boundary error
    let rel: f64 = row.split(',').nth(8).unwrap().parse().unwrap();
    assert!(rel > 0.0 && rel < 0.5, "orbit-sum relative error {rel}");
    assert!(row.contains(",four,"), "phaseless map is class four: {row}");
}
