//! Experiment execution: expands the manifest, runs the requested pipeline
//! with spectrum caching, and emits CSV tables plus a JSON summary.
//!
//! Every CSV body is a pure function of (manifest, seed): no timestamps, no
//! environment-dependent fields, so reruns are byte-identical. A failing
//! spec contributes an error row and never aborts the scan.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use qbaker::ergodicity::{cyc_ergodicity_check, persistence, persistence_average, PersistenceSeries};
use qbaker::linalg::{column, eigendecompose, matrix_power, trace, SpectrumData};
use qbaker::orbit::{slope_class, trace_po, SlopeClass};
use qbaker::phase_space::husimi;
use qbaker::quantizer::{build_map, QuantizationSpec};
use qbaker::sff::{
    average_sff, coe_reference, default_ell, default_fit_points, default_threshold, fit_slope,
    sff, slope_scan, two_block_reference, SlopeFit,
};
use qbaker::spectral::{histogram, mean_gap_ratio, reference_curves, spacings, ReferenceKind};
use qbaker::symmetry::{fourier_reflection_scan, tr_defect, uniform_grid};

use crate::cache::{content_key, SpectrumCache};
use crate::manifest::{Manifest, Params};

pub struct RunConfig {
    pub manifest: Manifest,
    pub out: PathBuf,
    pub seed: u64,
    pub cache: SpectrumCache,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub outputs: Vec<String>,
    pub rows: usize,
    pub error_rows: usize,
    pub cache_hits: usize,
    pub cache_misses: usize,
    pub errors: Vec<String>,
}

fn spec_label(spec: &QuantizationSpec) -> String {
    format!(
        "{}_A{}_N{}_{}",
        spec.family.label(),
        spec.a,
        spec.n,
        &content_key(spec)[..8]
    )
}

fn clean(err: &anyhow::Error) -> String {
    format!("{err:#}").replace([',', '\n'], ";")
}

fn class_name(c: SlopeClass) -> &'static str {
    match c {
        SlopeClass::Four => "four",
        SlopeClass::Two => "two",
    }
}

struct Emitter {
    out: PathBuf,
    outputs: Vec<String>,
    rows: usize,
    error_rows: usize,
    errors: Vec<String>,
}

impl Emitter {
    fn new(out: &PathBuf) -> Result<Self> {
        std::fs::create_dir_all(out)
            .with_context(|| format!("creating output dir {}", out.display()))?;
        Ok(Self {
            out: out.clone(),
            outputs: Vec::new(),
            rows: 0,
            error_rows: 0,
            errors: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn write_bytes(&mut self, name: &str, body: &[u8]) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn record_error(&mut self, label: &str, err: &anyhow::Error) {
        self.error_rows += 1;
        self.errors.push(format!("{label}: {}", clean(err)));
    }

    fn finish(self, experiment: &str, cache: &SpectrumCache) -> Summary {
        Summary {
            experiment: experiment.to_string(),
            outputs: self.outputs,
            rows: self.rows,
            error_rows: self.error_rows,
            cache_hits: cache.hits(),
            cache_misses: cache.misses(),
            errors: self.errors,
        }
    }
}

/// Moving-average SFF slope fit with the manifest's overrides applied on
/// top of the N- and A-dependent defaults.
fn fitted_slope(
    s: &SpectrumData,
    n: usize,
    a: usize,
    params: &Params,
) -> Result<SlopeFit> {
    let ell = params.ell.unwrap_or_else(|| default_ell(n));
    let f = params.fit_points.unwrap_or_else(|| default_fit_points(n));
    let threshold = params.threshold.unwrap_or_else(|| default_threshold(a));
    let series = sff(s, f + ell + 5)?;
    let averaged = average_sff(&series, ell)?;
    Ok(fit_slope(&averaged, f, threshold)?)
}

pub fn run(verb: &str, cfg: &RunConfig) -> Result<Summary> {
    let experiment = cfg.manifest.experiment.as_str();
    let compatible: &[&str] = match verb {
        "build" | "spectrum" => &[],
        "gapratio" => &["gapratio-scan", "spacing-hist"],
        "sff" => &["sff"],
        "slope-scan" => &["slope-scan"],
        "persistence" => &["persistence"],
        "commutator-scan" => &["commutator-scan"],
        "husimi" => &["husimi"],
        "interpolate" => &["interpolation"],
        "orbit-check" => &["orbit-check"],
        "phase-sweep" => &["phase-sweep"],
        other => bail!("unknown verb {other:?}"),
    };
    if !compatible.is_empty() && !compatible.contains(&experiment) {
        bail!("manifest experiment {experiment:?} does not drive the `{verb}` verb");
    }
    let mut em = Emitter::new(&cfg.out)?;
    match verb {
        "build" => run_build(cfg, &mut em)?,
        "spectrum" => run_spectrum(cfg, &mut em)?,
        "gapratio" => run_gapratio(cfg, &mut em, experiment == "spacing-hist")?,
        "sff" => run_sff(cfg, &mut em)?,
        "slope-scan" => run_slope_scan(cfg, &mut em)?,
        "persistence" => run_persistence(cfg, &mut em)?,
        "commutator-scan" => run_commutator_scan(cfg, &mut em)?,
        "husimi" => run_husimi(cfg, &mut em)?,
        "interpolate" => run_interpolate(cfg, &mut em)?,
        "orbit-check" => run_orbit_check(cfg, &mut em)?,
        "phase-sweep" => run_phase_sweep(cfg, &mut em)?,
        _ => unreachable!(),
    }
    let summary = em.finish(experiment, &cfg.cache);
    let json = serde_json::to_string_pretty(&summary)?;
    std::fs::write(cfg.out.join("summary.json"), json + "\n")?;
    Ok(summary)
}

fn run_build(cfg: &RunConfig, em: &mut Emitter) -> Result<()> {
    for spec in cfg.manifest.quantization_specs(cfg.seed)? {
        let label = spec_label(&spec);
        match build_map(&spec) {
            Ok(u) => {
                let mut bytes = Vec::new();
                u.write_to(&mut bytes)?;
                em.write_bytes(&format!("build_{label}.bin"), &bytes)?;
                em.rows += 1;
            }
            Err(e) => em.record_error(&label, &e.into()),
        }
    }
    Ok(())
}

fn run_spectrum(cfg: &RunConfig, em: &mut Emitter) -> Result<()> {
    for spec in cfg.manifest.quantization_specs(cfg.seed)? {
        let label = spec_label(&spec);
        match cfg.cache.angles(&spec) {
            Ok(s) => {
                let mut body = Vec::new();
                s.write_csv(&mut body)?;
                em.write_bytes(&format!("spectrum_{label}.csv"), &body)?;
                em.rows += s.angles.len();
            }
            Err(e) => em.record_error(&label, &e),
        }
    }
    Ok(())
}

type SpecOutcome<T> = (QuantizationSpec, Result<T>);

fn compute_all<T: Send>(
    cfg: &RunConfig,
    f: impl Fn(&QuantizationSpec) -> Result<T> + Sync,
) -> Result<Vec<SpecOutcome<T>>> {
    let specs = cfg.manifest.quantization_specs(cfg.seed)?;
    Ok(specs
        .into_par_iter()
        .map(|spec| {
            let r = f(&spec);
            (spec, r)
        })
        .collect())
}

fn run_gapratio(cfg: &RunConfig, em: &mut Emitter, with_hist: bool) -> Result<()> {
    let params = &cfg.manifest.params;
    let bins = params.bins.unwrap_or(40);
    let results = compute_all(cfg, |spec| {
        let s = cfg.cache.angles(spec)?;
        let sp = spacings(&s, true)?;
        let r = mean_gap_ratio(&sp)?;
        Ok((r, sp.spacings))
    })?;
    let mut table = String::from("family,a,n,gap_ratio,error\n");
    for (spec, res) in results {
        let label = spec_label(&spec);
        match res {
            Ok((r, sp)) => {
                writeln!(table, "{},{},{},{r},", spec.family.label(), spec.a, spec.n)?;
                em.rows += 1;
                if with_hist {
                    let mut body = String::from("s,density\n");
                    for (center, density) in histogram(&sp, bins, (0.0, 4.0))? {
                        writeln!(body, "{center},{density}")?;
                    }
                    em.write(&format!("hist_{label}.csv"), &body)?;
                }
            }
            Err(e) => {
                writeln!(
                    table,
                    "{},{},{},,{}",
                    spec.family.label(),
                    spec.a,
                    spec.n,
                    clean(&e)
                )?;
                em.record_error(&label, &e);
            }
        }
    }
    em.write("gapratio.csv", &table)?;
    if with_hist {
        if let Some(kind) = &params.reference {
            let kind = match kind.as_str() {
                "goe" => ReferenceKind::Goe,
                "gue" => ReferenceKind::Gue,
                "poisson" => ReferenceKind::Poisson,
                "2goe" | "two-block-goe" => ReferenceKind::TwoBlockGoe,
                other => bail!("unknown reference kind {other:?}"),
            };
            let grid: Vec<f64> = (0..bins).map(|i| (i as f64 + 0.5) * 4.0 / bins as f64).collect();
            let mut body = String::from("s,density\n");
            for (s, d) in reference_curves(kind, &grid)? {
                writeln!(body, "{s},{d}")?;
            }
            em.write("reference.csv", &body)?;
        }
    }
    Ok(())
}

fn run_sff(cfg: &RunConfig, em: &mut Emitter) -> Result<()> {
    let params = cfg.manifest.params.clone();
    let results = compute_all(cfg, |spec| {
        let s = cfg.cache.angles(spec)?;
        let n = spec.n;
        let t_max = params.t_max.unwrap_or(n / 2).max(2);
        let ell = params.ell.unwrap_or_else(|| default_ell(n));
        let series = sff(&s, t_max)?;
        Ok(average_sff(&series, ell)?)
    })?;
    for (spec, res) in results {
        let label = spec_label(&spec);
        match res {
            Ok(series) => {
                let n = spec.n as f64;
                let taus: Vec<f64> = series.times.iter().map(|&t| t as f64 / n).collect();
                let coe = coe_reference(&taus)?;
                let two = two_block_reference(&taus)?;
                let avg = series.averaged.as_ref().unwrap();
                let mut body = String::from("t,tau,raw,averaged,coe_ref,two_block_ref\n");
                for (i, &t) in series.times.iter().enumerate() {
                    writeln!(
                        body,
                        "{t},{},{},{},{},{}",
                        taus[i], series.raw[i], avg[i], coe[i].1, two[i].1
                    )?;
                    em.rows += 1;
                }
                em.write(&format!("sff_{label}.csv"), &body)?;
            }
            Err(e) => em.record_error(&label, &e),
        }
    }
    Ok(())
}

fn run_slope_scan(cfg: &RunConfig, em: &mut Emitter) -> Result<()> {
    let params = cfg.manifest.params.clone();
    let results = compute_all(cfg, |spec| {
        let s = cfg.cache.angles(spec)?;
        fitted_slope(&s, spec.n, spec.a, &params)
    })?;
    // smooth per (family, A) group, preserving manifest order
    let mut groups: Vec<((&'static str, usize), Vec<(usize, SlopeFit, SlopeClass)>)> = Vec::new();
    let mut error_lines = Vec::new();
    for (spec, res) in &results {
        match res {
            Ok(fit) => {
                let key = (spec.family.label(), spec.a);
                let class = slope_class(spec.family, spec.a, &spec.alpha);
                match groups.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, v)) => v.push((spec.n, fit.clone(), class)),
                    None => groups.push((key, vec![(spec.n, fit.clone(), class)])),
                }
            }
            Err(e) => {
                error_lines.push(format!(
                    "{},{},{},,,,,,{}",
                    spec.family.label(),
                    spec.a,
                    spec.n,
                    clean(e)
                ));
                em.record_error(&spec_label(spec), e);
            }
        }
    }
    let mut table =
        String::from("family,a,n,slope,residual,is_outlier,smoothed_slope,slope_class,error\n");
    for ((family, a), members) in groups {
        let rows: Vec<(usize, SlopeFit)> =
            members.iter().map(|(n, f, _)| (*n, f.clone())).collect();
        for (row, (_, _, class)) in slope_scan(&rows)?.into_iter().zip(&members) {
            let smoothed = row
                .smoothed_slope
                .map(|v| v.to_string())
                .unwrap_or_default();
            writeln!(
                table,
                "{family},{a},{},{},{},{},{smoothed},{},",
                row.n,
                row.slope,
                row.scaled_residual,
                row.is_outlier,
                class_name(*class)
            )?;
            em.rows += 1;
        }
    }
    for line in error_lines {
        table.push_str(&line);
        table.push('\n');
    }
    em.write("slope_scan.csv", &table)?;
    Ok(())
}

fn run_persistence(cfg: &RunConfig, em: &mut Emitter) -> Result<()> {
    let params = cfg.manifest.params.clone();
    let results = compute_all(cfg, |spec| {
        let s = cfg.cache.angles(spec)?;
        let t_frac = params.t_frac.unwrap_or(0.5);
        let t_max = ((spec.n as f64 * t_frac) as usize).max(1);
        Ok(persistence(&s, t_max, params.c.unwrap_or(1.0))?)
    })?;
    let mut series_ok: Vec<PersistenceSeries> = Vec::new();
    let mut verdicts = Vec::new();
    for (spec, res) in results {
        let label = spec_label(&spec);
        match res {
            Ok(p) => {
                let mut body = String::from("t,tau,z2,z2_coe\n");
                for (i, &t) in p.times.iter().enumerate() {
                    writeln!(
                        body,
                        "{t},{},{},{}",
                        t as f64 / p.n as f64,
                        p.z2[i],
                        p.z2_coe_ref[i]
                    )?;
                    em.rows += 1;
                }
                em.write(&format!("persistence_{label}.csv"), &body)?;
                let v = cyc_ergodicity_check(
                    &p,
                    params.eps.unwrap_or(0.05),
                    params.kappa.unwrap_or(5.0),
                );
                verdicts.push(serde_json::json!({
                    "label": label,
                    "cutoff_pass": v.cutoff_pass,
                    "coe_comparison_pass": v.coe_comparison_pass,
                    "min_margin_cutoff": v.min_margin_cutoff,
                    "min_margin_coe": v.min_margin_coe,
                    "window_end": v.window_end,
                }));
                series_ok.push(p);
            }
            Err(e) => em.record_error(&label, &e),
        }
    }
    em.write(
        "verdicts.json",
        &(serde_json::to_string_pretty(&verdicts)? + "\n"),
    )?;
    if series_ok.len() > 1 {
        let avg = persistence_average(&series_ok)?;
        let mut body = String::from("tau,z2_mean,z2_coe_mean\n");
        for (i, tau) in avg.taus.iter().enumerate() {
            writeln!(body, "{tau},{},{}", avg.z2_mean[i], avg.z2_coe_mean[i])?;
        }
        em.write("persistence_avg.csv", &body)?;
    }
    Ok(())
}

fn run_commutator_scan(cfg: &RunConfig, em: &mut Emitter) -> Result<()> {
    let g = cfg.manifest.params.grid.unwrap_or(50);
    let grid = uniform_grid(g);
    let mut table = String::from("family,a,n,theta1,theta2,tr_defect,error\n");
    for spec in cfg.manifest.quantization_specs(cfg.seed)? {
        let label = spec_label(&spec);
        let result = (|| -> Result<()> {
            let u = build_map(&spec)?;
            let scan = fourier_reflection_scan(&u, &grid)?;
            let mut body = String::from("w1,w2,defect\n");
            for ((w1, w2), v) in scan {
                writeln!(body, "{w1},{w2},{v}")?;
            }
            em.write(&format!("commutator_{label}.csv"), &body)?;
            let d = tr_defect(&spec, &u)?;
            writeln!(
                table,
                "{},{},{},{},{},{d},",
                spec.family.label(),
                spec.a,
                spec.n,
                spec.theta.0,
                spec.theta.1
            )?;
            em.rows += 1;
            Ok(())
        })();
        if let Err(e) = result {
            writeln!(
                table,
                "{},{},{},{},{},,{}",
                spec.family.label(),
                spec.a,
                spec.n,
                spec.theta.0,
                spec.theta.1,
                clean(&e)
            )?;
            em.record_error(&label, &e);
        }
    }
    em.write("tr_defect.csv", &table)?;
    Ok(())
}

fn run_husimi(cfg: &RunConfig, em: &mut Emitter) -> Result<()> {
    let params = &cfg.manifest.params;
    let res = params.resolution.unwrap_or(100);
    let sigma = params.sigma.unwrap_or(1.0);
    let k = params.index.unwrap_or(0);
    for spec in cfg.manifest.quantization_specs(cfg.seed)? {
        let label = spec_label(&spec);
        let result = (|| -> Result<()> {
            let u = build_map(&spec)?;
            let s = eigendecompose(&u, true)?;
            let vecs = s
                .eigenvectors
                .as_ref()
                .expect("eigendecompose with vectors");
            if k >= spec.n {
                bail!("eigenvector index {k} out of range for N = {}", spec.n);
            }
            let grid = husimi(&column(vecs, k), (res, res), spec.theta, sigma)?;
            let mut body = Vec::new();
            grid.write_csv(&mut body)?;
            em.write_bytes(&format!("husimi_{label}_k{k}.csv"), &body)?;
            em.rows += res * res;
            Ok(())
        })();
        if let Err(e) = result {
            em.record_error(&label, &e);
        }
    }
    Ok(())
}

fn run_interpolate(cfg: &RunConfig, em: &mut Emitter) -> Result<()> {
    let t_values = cfg
        .manifest
        .params
        .t_values
        .clone()
        .unwrap_or_else(|| vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    let mut table = String::from("kind,n,seed,t,gap_ratio,error\n");
    for entry in &cfg.manifest.ensembles {
        for &t in &t_values {
            let specs = match entry.expand(cfg.seed, t) {
                Ok(s) => s,
                Err(e) => {
                    writeln!(table, "{},{},,{t},,{}", entry.kind, entry.n, clean(&e))?;
                    em.record_error(&entry.kind, &e);
                    continue;
                }
            };
            for spec in specs {
                match qbaker::rmt::sample(&spec)
                    .map_err(anyhow::Error::from)
                    .and_then(|u| Ok(eigendecompose(&u, false)?))
                    .and_then(|s| Ok(mean_gap_ratio(&spacings(&s, true)?)?))
                {
                    Ok(r) => {
                        writeln!(table, "{},{},{},{t},{r},", entry.kind, spec.n, spec.seed)?;
                        em.rows += 1;
                    }
                    Err(e) => {
                        writeln!(
                            table,
                            "{},{},{},{t},,{}",
                            entry.kind,
                            spec.n,
                            spec.seed,
                            clean(&e)
                        )?;
                        em.record_error(&entry.kind, &e);
                    }
                }
            }
        }
    }
    em.write("interpolate.csv", &table)?;
    Ok(())
}

fn run_orbit_check(cfg: &RunConfig, em: &mut Emitter) -> Result<()> {
    let times = cfg
        .manifest
        .params
        .times
        .clone()
        .unwrap_or_else(|| vec![1, 2, 3]);
    let mut table =
        String::from("family,a,n,t,po_re,po_im,exact_re,exact_im,rel_err,slope_class,error\n");
    for spec in cfg.manifest.quantization_specs(cfg.seed)? {
        let label = spec_label(&spec);
        let class = class_name(slope_class(spec.family, spec.a, &spec.alpha));
        match build_map(&spec) {
            Ok(u) => {
                for &t in &times {
                    let row = (|| -> Result<String> {
                        let po = trace_po(spec.family, spec.a, t, spec.n, &spec.alpha)?;
                        let exact = trace(&matrix_power(u.entries(), t));
                        let rel = (po.value - exact).norm() / exact.norm();
                        Ok(format!(
                            "{},{},{},{t},{},{},{},{},{rel},{class},",
                            spec.family.label(),
                            spec.a,
                            spec.n,
                            po.value.re,
                            po.value.im,
                            exact.re,
                            exact.im
                        ))
                    })();
                    match row {
                        Ok(line) => {
                            table.push_str(&line);
                            table.push('\n');
                            em.rows += 1;
                        }
                        Err(e) => {
                            writeln!(
                                table,
                                "{},{},{},{t},,,,,,{class},{}",
                                spec.family.label(),
                                spec.a,
                                spec.n,
                                clean(&e)
                            )?;
                            em.record_error(&label, &e);
                        }
                    }
                }
            }
            Err(e) => {
                let e = anyhow::Error::from(e);
                writeln!(
                    table,
                    "{},{},{},,,,,,,{class},{}",
                    spec.family.label(),
                    spec.a,
                    spec.n,
                    clean(&e)
                )?;
                em.record_error(&label, &e);
            }
        }
    }
    em.write("orbit_check.csv", &table)?;
    Ok(())
}

fn run_phase_sweep(cfg: &RunConfig, em: &mut Emitter) -> Result<()> {
    let params = cfg.manifest.params.clone();
    let alpha1: Vec<f64> = match (&params.alpha1_values, params.alpha1_steps) {
        (Some(v), _) => v.clone(),
        (None, steps) => {
            let k = steps.unwrap_or(50);
            (0..k).map(|i| i as f64 / k as f64).collect()
        }
    };
    let templates = cfg.manifest.quantization_specs(cfg.seed)?;
    let jobs: Vec<(QuantizationSpec, f64)> = templates
        .iter()
        .flat_map(|spec| {
            alpha1.iter().map(move |&a1| {
                let mut alpha = vec![0.0; spec.a];
                alpha[spec.a - 1] = a1;
                (spec.clone().with_alpha(alpha), a1)
            })
        })
        .collect();
    let results: Vec<(QuantizationSpec, f64, Result<(f64, SlopeFit)>)> = jobs
        .into_par_iter()
        .map(|(spec, a1)| {
            let r = (|| -> Result<(f64, SlopeFit)> {
                let s = cfg.cache.angles(&spec)?;
                let gap = mean_gap_ratio(&spacings(&s, true)?)?;
                let fit = fitted_slope(&s, spec.n, spec.a, &params)?;
                Ok((gap, fit))
            })();
            (spec, a1, r)
        })
        .collect();
    let mut table = String::from("family,a,n,alpha1,gap_ratio,slope,is_outlier,error\n");
    for (spec, a1, res) in results {
        match res {
            Ok((gap, fit)) => {
                writeln!(
                    table,
                    "{},{},{},{a1},{gap},{},{},",
                    spec.family.label(),
                    spec.a,
                    spec.n,
                    fit.slope,
                    fit.is_outlier
                )?;
                em.rows += 1;
            }
            Err(e) => {
                writeln!(
                    table,
                    "{},{},{},{a1},,,,{}",
                    spec.family.label(),
                    spec.a,
                    spec.n,
                    clean(&e)
                )?;
                em.record_error(&spec_label(&spec), &e);
            }
        }
    }
    em.write("phase_sweep.csv", &table)?;
    Ok(())
}
