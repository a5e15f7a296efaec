use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use qbaker_cli::cache::SpectrumCache;
use qbaker_cli::manifest::Manifest;
use qbaker_cli::runner::{run, RunConfig};

#[derive(Parser)]
#[command(
    name = "qbaker",
    about = "Batch experiments on quantized A-baker's maps: spectra, gap ratios, form factors, orbits, symmetry and phase-space scans",
    version
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// TOML experiment manifest
    #[arg(long)]
    manifest: PathBuf,
    /// output directory (overrides the manifest's output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// worker threads for the spec-level scans
    #[arg(long)]
    jobs: Option<usize>,
    /// base seed for random block phases (overrides the manifest's seed)
    #[arg(long)]
    seed: Option<u64>,
    /// spectrum cache directory (content-addressed; optional)
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Verb {
    /// Write the position-basis unitaries as binary containers
    Build(Common),
    /// Eigenangle spectra as CSV (cached)
    Spectrum(Common),
    /// Mean gap ratios, optionally with spacing histograms
    Gapratio(Common),
    /// Raw and window-averaged spectral form factors
    Sff(Common),
    /// Early-time SFF slope fits across an N scan
    SlopeScan(Common),
    /// Persistence series z^2(t) and cyclic-ergodicity verdicts
    Persistence(Common),
    /// Fourier-reflection commutator grids and TR defects
    CommutatorScan(Common),
    /// Husimi grid of a selected eigenvector
    Husimi(Common),
    /// Gap ratios along the RMT geodesic interpolations
    Interpolate(Common),
    /// Periodic-orbit trace sums against exact traces
    OrbitCheck(Common),
    /// Gap ratio and slope as a function of the last block phase
    PhaseSweep(Common),
}

impl Verb {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Verb::Build(c) => ("build", c),
            Verb::Spectrum(c) => ("spectrum", c),
            Verb::Gapratio(c) => ("gapratio", c),
            Verb::Sff(c) => ("sff", c),
            Verb::SlopeScan(c) => ("slope-scan", c),
            Verb::Persistence(c) => ("persistence", c),
            Verb::CommutatorScan(c) => ("commutator-scan", c),
            Verb::Husimi(c) => ("husimi", c),
            Verb::Interpolate(c) => ("interpolate", c),
            Verb::OrbitCheck(c) => ("orbit-check", c),
            Verb::PhaseSweep(c) => ("phase-sweep", c),
        }
    }
}

fn run_cli() -> Result<()> {
    let cli = Cli::parse();
    let (verb, common) = cli.verb.parts();
    if let Some(jobs) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker pool")?;
    }
    let manifest = Manifest::load(&common.manifest)?;
    let out = common
        .out
        .clone()
        .or_else(|| manifest.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let seed = common.seed.or(manifest.seed).unwrap_or(0);
    let cfg = RunConfig {
        manifest,
        out,
        seed,
        cache: SpectrumCache::new(common.cache.clone())?,
    };
    let summary = run(verb, &cfg)?;
    println!(
        "{}: {} rows, {} error rows, {} files, cache {}/{} hits (out: {})",
        summary.experiment,
        summary.rows,
        summary.error_rows,
        summary.outputs.len(),
        summary.cache_hits,
        summary.cache_hits + summary.cache_misses,
        cfg.out.display()
    );
    for err in &summary.errors {
        eprintln!("warning: {err}");
    }
    Ok(())
}

fn main() -> ExitCode {
    match run_cli() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
