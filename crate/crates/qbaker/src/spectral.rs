//! Nearest-neighbor level spacings, histograms, and gap-ratio statistics
//! with the RMT reference constants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{QbakerError, Result};
use crate::linalg::SpectrumData;
use crate::rmt::{sample, EnsembleKind, EnsembleSpec};

/// Mean gap ratio reference values for the standard ensembles.
pub mod reference {
    pub const GOE: f64 = 0.53590;
    pub const TWO_BLOCK_GOE: f64 = 0.423415;
    pub const GUE: f64 = 0.60266;
    pub const TWO_BLOCK_GUE: f64 = 0.422085;
    pub const POISSON: f64 = 0.38629;
}

/// Cyclic nearest-neighbor gaps, optionally rescaled by N/2pi so the mean
/// spacing is 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpacingData {
    pub spacings: Vec<f64>,
    pub normalized: bool,
}

/// Cyclic gaps s_i = angle_{i+1} - angle_i with the wraparound gap closing
/// the circle.
pub fn spacings(spectrum: &SpectrumData, normalize: bool) -> Result<SpacingData> {
    let n = spectrum.angles.len();
    if n < 2 {
        return Err(QbakerError::InvalidDimension(format!(
            "need at least 2 levels, got {n}"
        )));
    }
    let scale = if normalize { n as f64 / (2.0 * PI) } else { 1.0 };
    let mut out = Vec::with_capacity(n);
    for i in 0..n - 1 {
        out.push((spectrum.angles[i + 1] - spectrum.angles[i]) * scale);
    }
    out.push((2.0 * PI - (spectrum.angles[n - 1] - spectrum.angles[0])) * scale);
    Ok(SpacingData {
        spacings: out,
        normalized: normalize,
    })
}

/// Mean of min(s_{i+1}/s_i, s_i/s_{i+1}) over cyclic neighbors. Ratio pairs
/// with one zero spacing contribute 0; two zeros contribute 1.
pub fn mean_gap_ratio(spacings: &SpacingData) -> Result<f64> {
    let s = &spacings.spacings;
    let n = s.len();
    if n < 3 {
        return Err(QbakerError::InvalidDimension(format!(
            "need at least 3 spacings, got {n}"
        )));
    }
    if s.iter().all(|&x| x == 0.0) {
        return Err(QbakerError::EmptyInput("all spacings are zero".into()));
    }
    let mut acc = 0.0;
    for i in 0..n {
        let (a, b) = (s[i], s[(i + 1) % n]);
        acc += if a == 0.0 && b == 0.0 {
            1.0
        } else if a == 0.0 || b == 0.0 {
            0.0
        } else {
            (a / b).min(b / a)
        };
    }
    Ok(acc / n as f64)
}

/// Density-normalized histogram over `range`, returned as
/// (bin center, density) pairs. Samples outside the range are dropped.
pub fn histogram(values: &[f64], bins: usize, range: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(QbakerError::EmptyInput("histogram of empty data".into()));
    }
    if bins == 0 || range.1 <= range.0 {
        return Err(QbakerError::InvalidSpec("bad histogram bins/range".into()));
    }
    let width = (range.1 - range.0) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut kept = 0usize;
    for &v in values {
        if v >= range.0 && v < range.1 {
            let b = ((v - range.0) / width) as usize;
            counts[b.min(bins - 1)] += 1;
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(QbakerError::EmptyInput("no samples inside range".into()));
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let center = range.0 + (b as f64 + 0.5) * width;
            (center, c as f64 / (kept as f64 * width))
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceKind {
    Goe,
    Gue,
    Poisson,
    TwoBlockGoe,
}

/// Reference spacing densities on a grid: Wigner surmises for GOE/GUE,
/// the exponential law for Poisson, and a Monte-Carlo estimate over
/// 2-block COE samples for the superposed case.
pub fn reference_curves(kind: ReferenceKind, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    match kind {
        ReferenceKind::Goe => Ok(grid
            .iter()
            .map(|&s| (s, PI / 2.0 * s * (-PI * s * s / 4.0).exp()))
            .collect()),
        ReferenceKind::Gue => Ok(grid
            .iter()
            .map(|&s| (s, 32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp()))
            .collect()),
        ReferenceKind::Poisson => Ok(grid.iter().map(|&s| (s, (-s).exp())).collect()),
        ReferenceKind::TwoBlockGoe => two_block_goe_monte_carlo(grid),
    }
}

fn two_block_goe_monte_carlo(grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if grid.len() < 2 {
        return Err(QbakerError::InvalidSpec("grid too short".into()));
    }
    let step = grid[1] - grid[0];
    let mut all = Vec::new();
    for seed in 0..40u64 {
        let u = sample(&EnsembleSpec::pure(EnsembleKind::TwoBlockCoe, 200, 1000 + seed))?;
        let sp = spacings(&crate::linalg::eigendecompose(&u, false)?, true)?;
        all.extend(sp.spacings);
    }
    let lo = grid[0] - step / 2.0;
    let hi = grid[grid.len() - 1] + step / 2.0;
    let total = all.len() as f64;
    Ok(grid
        .iter()
        .map(|&s| {
            let count = all
                .iter()
                .filter(|&&x| x >= (s - step / 2.0).max(lo) && x < (s + step / 2.0).min(hi))
                .count();
            (s, count as f64 / (total * step))
        })
        .collect())
}
