//! TOML experiment manifests: quantization/ensemble spec lists plus
//! per-experiment parameters. See README for the schema.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use qbaker::quantizer::{Family, QuantizationSpec};
use qbaker::rmt::{EnsembleKind, EnsembleSpec};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// one of: gapratio-scan, spacing-hist, sff, slope-scan, persistence,
    /// commutator-scan, husimi, interpolation, orbit-check, phase-sweep
    pub experiment: String,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, rename = "spec")]
    pub specs: Vec<SpecEntry>,
    #[serde(default, rename = "ensemble")]
    pub ensembles: Vec<EnsembleEntry>,
    #[serde(default)]
    pub params: Params,
}

/// One quantization spec, optionally fanned out over an N list.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecEntry {
    pub family: String,
    pub a: usize,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub ns: Option<Vec<usize>>,
    #[serde(default)]
    pub theta: Option<(f64, f64)>,
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
    #[serde(default)]
    pub random_alpha: bool,
    /// overrides the manifest seed for this entry's random phases
    #[serde(default)]
    pub seed: Option<u64>,
}

impl SpecEntry {
    /// One QuantizationSpec per N value; random phases are drawn from
    /// seed + N-index so adjacent N get independent draws.
    pub fn expand(&self, base_seed: u64) -> Result<Vec<QuantizationSpec>> {
        let family: Family = self
            .family
            .parse()
            .with_context(|| format!("spec family {:?}", self.family))?;
        let ns: Vec<usize> = match (&self.n, &self.ns) {
            (Some(n), None) => vec![*n],
            (None, Some(ns)) if !ns.is_empty() => ns.clone(),
            _ => bail!("spec needs exactly one of `n` or a nonempty `ns`"),
        };
        let mut out = Vec::with_capacity(ns.len());
        for (i, &n) in ns.iter().enumerate() {
            let mut spec = match (family, self.theta) {
                (Family::Generic, Some(theta)) => QuantizationSpec::generic(self.a, n, theta),
                (Family::Generic, None) => bail!("generic spec needs `theta`"),
                (_, theta) => {
                    let mut s = QuantizationSpec::standard(family, self.a, n);
                    if let Some(t) = theta {
                        s.theta = t;
                    }
                    s
                }
            };
            if let Some(alpha) = &self.alpha {
                spec = spec.with_alpha(alpha.clone());
            }
            if self.random_alpha {
                spec = spec.with_random_alpha(self.seed.unwrap_or(base_seed) + i as u64);
            }
            out.push(spec);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleEntry {
    /// cue | coe | 2coe | 2cue | coe-to-cue | 2coe-to-coe | 2coe-to-cue
    pub kind: String,
    pub n: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    /// number of consecutive seeds starting at `seed`
    #[serde(default)]
    pub seeds: Option<u64>,
}

pub fn parse_kind(s: &str) -> Result<EnsembleKind> {
    Ok(match s.to_ascii_lowercase().as_str() {
        "cue" => EnsembleKind::Cue,
        "coe" => EnsembleKind::Coe,
        "2coe" | "two-block-coe" => EnsembleKind::TwoBlockCoe,
        "2cue" | "two-block-cue" => EnsembleKind::TwoBlockCue,
        "coe-to-cue" => EnsembleKind::InterpCoeToCue,
        "2coe-to-coe" => EnsembleKind::Interp2CoeToCoe,
        "2coe-to-cue" => EnsembleKind::Interp2CoeToCue,
        other => bail!("unknown ensemble kind {other:?}"),
    })
}

impl EnsembleEntry {
    pub fn expand(&self, base_seed: u64, t_interp: f64) -> Result<Vec<EnsembleSpec>> {
        let kind = parse_kind(&self.kind)?;
        let first = self.seed.unwrap_or(base_seed);
        let count = self.seeds.unwrap_or(1);
        Ok((0..count)
            .map(|k| EnsembleSpec {
                kind,
                n: self.n,
                t_interp,
                seed: first + k,
            })
            .collect())
    }
}

/// Per-experiment options; unset fields fall back to the desk-scale
/// defaults documented in the README.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    // spacing histograms
    pub bins: Option<usize>,
    pub reference: Option<String>,
    // sff / slope fitting
    pub t_max: Option<usize>,
    pub ell: Option<usize>,
    pub fit_points: Option<usize>,
    pub threshold: Option<f64>,
    // persistence
    pub t_frac: Option<f64>,
    pub c: Option<f64>,
    pub eps: Option<f64>,
    pub kappa: Option<f64>,
    // commutator scan
    pub grid: Option<usize>,
    // husimi
    pub resolution: Option<usize>,
    pub sigma: Option<f64>,
    pub index: Option<usize>,
    // interpolation
    pub t_values: Option<Vec<f64>>,
    // orbit check
    pub times: Option<Vec<usize>>,
    // phase sweep
    pub alpha1_values: Option<Vec<f64>>,
    pub alpha1_steps: Option<usize>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let m: Manifest = toml::from_str(&text).context("parsing manifest")?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let known = [
            "gapratio-scan",
            "spacing-hist",
            "sff",
            "slope-scan",
            "persistence",
            "commutator-scan",
            "husimi",
            "interpolation",
            "orbit-check",
            "phase-sweep",
        ];
        if !known.contains(&self.experiment.as_str()) {
            bail!("unknown experiment {:?}", self.experiment);
        }
        if self.experiment == "interpolation" {
            if self.ensembles.is_empty() {
                bail!("interpolation manifest has no [[ensemble]] entries");
            }
        } else if self.specs.is_empty() {
            bail!("manifest has no [[spec]] entries");
        }
        Ok(())
    }

    /// All quantization specs, expanded over N lists.
    pub fn quantization_specs(&self, seed: u64) -> Result<Vec<QuantizationSpec>> {
        let mut out = Vec::new();
        for (i, entry) in self.specs.iter().enumerate() {
            // stride the per-entry seed space so entries stay independent
            out.extend(entry.expand(seed + 1000 * i as u64)?);
        }
        Ok(out)
    }
}
