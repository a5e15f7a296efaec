//! Cyclic-ergodicity diagnostics: persistence of the DFT-of-eigenbasis
//! states, the COE reference decay, the spectral-fluctuation sum, and the
//! cutoff criterion.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QbakerError, Result};
use crate::linalg::SpectrumData;
use crate::sff::SffSeries;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PersistenceSeries {
    pub n: usize,
    pub times: Vec<usize>,
    pub z2: Vec<f64>,
    pub z2_coe_ref: Vec<f64>,
    /// cutoff c/N
    pub eta2: f64,
    pub c: f64,
}

/// COE reference decay exp(-4 t^2 ln N / N^2).
pub fn z2_coe(n: usize, t: f64) -> f64 {
    let nf = n as f64;
    (-4.0 * t * t * nf.ln() / (nf * nf)).exp()
}

/// z^2(t) = |N^{-1} sum_n e^{i(E_n - 2 pi n / N) t}|^2 over t = 0..T, with
/// the eigenangles taken in ascending order (ties broken by index).
pub fn persistence(spectrum: &SpectrumData, t_max: usize, c: f64) -> Result<PersistenceSeries> {
    let n = spectrum.angles.len();
    if n < 2 {
        return Err(QbakerError::InvalidDimension(format!(
            "persistence needs N >= 2, got {n}"
        )));
    }
    let mut sorted = spectrum.angles.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let detuned: Vec<f64> = sorted
        .iter()
        .enumerate()
        .map(|(k, &e)| e - 2.0 * PI * k as f64 / n as f64)
        .collect();
    let mut times = Vec::with_capacity(t_max + 1);
    let mut z2 = Vec::with_capacity(t_max + 1);
    let mut z2_ref = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let sum: Complex64 = detuned
            .iter()
            .map(|&d| Complex64::from_polar(1.0, d * t as f64))
            .sum();
        times.push(t);
        z2.push((sum / n as f64).norm_sqr());
        z2_ref.push(z2_coe(n, t as f64));
    }
    Ok(PersistenceSeries {
        n,
        times,
        z2,
        z2_coe_ref: z2_ref,
        eta2: c / n as f64,
        c,
    })
}

/// Delta^2 = 2 sum_{t=1}^{N/2} SFF(t) / (N t^2).
pub fn delta_squared(series: &SffSeries) -> Result<f64> {
    let n = series.n;
    if n % 2 != 0 {
        return Err(QbakerError::Precondition(format!("odd N = {n}")));
    }
    if series.raw.len() < n / 2 {
        return Err(QbakerError::Precondition(format!(
            "need SFF to t = {}, have {}",
            n / 2,
            series.raw.len()
        )));
    }
    let mut acc = 0.0;
    for t in 1..=n / 2 {
        acc += series.raw[t - 1] / (t * t) as f64;
    }
    Ok(2.0 * acc / n as f64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErgodicityVerdict {
    /// z^2(t) >= c/N throughout |t| <= N(1-eps)/2
    pub cutoff_pass: bool,
    /// z^2(t) >= z^2_COE(t) - kappa/N over the same window
    pub coe_comparison_pass: bool,
    pub min_margin_cutoff: f64,
    pub min_margin_coe: f64,
    pub window_end: usize,
}

/// Evaluate the cyclic-ergodicity criterion on a persistence series.
pub fn cyc_ergodicity_check(
    series: &PersistenceSeries,
    eps: f64,
    kappa: f64,
) -> ErgodicityVerdict {
    let n = series.n as f64;
    let window_end =
        ((n * (1.0 - eps) / 2.0).floor() as usize).min(*series.times.last().unwrap_or(&0));
    let mut min_cut = f64::INFINITY;
    let mut min_coe = f64::INFINITY;
    for (i, &t) in series.times.iter().enumerate() {
        if t > window_end {
            break;
        }
        min_cut = min_cut.min(series.z2[i] - series.eta2);
        min_coe = min_coe.min(series.z2[i] - (series.z2_coe_ref[i] - kappa / n));
    }
    ErgodicityVerdict {
        cutoff_pass: min_cut >= 0.0,
        coe_comparison_pass: min_coe >= 0.0,
        min_margin_cutoff: min_cut,
        min_margin_coe: min_coe,
        window_end,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AveragedPersistence {
    pub taus: Vec<f64>,
    pub z2_mean: Vec<f64>,
    pub z2_coe_mean: Vec<f64>,
    pub count: usize,
}

/// Pointwise mean of several persistence series over adjacent N, resampled
/// by linear interpolation onto the tau = t/N grid of the first series.
pub fn persistence_average(series: &[PersistenceSeries]) -> Result<AveragedPersistence> {
    let first = series
        .first()
        .ok_or_else(|| QbakerError::EmptyInput("no persistence series".into()))?;
    let taus: Vec<f64> = first
        .times
        .iter()
        .map(|&t| t as f64 / first.n as f64)
        .collect();
    let mut z2_mean = vec![0.0; taus.len()];
    let mut coe_mean = vec![0.0; taus.len()];
    for s in series {
        for (j, &tau) in taus.iter().enumerate() {
            let pos = tau * s.n as f64;
            let i0 = (pos.floor() as usize).min(s.z2.len() - 1);
            let i1 = (i0 + 1).min(s.z2.len() - 1);
            let frac = pos - i0 as f64;
            z2_mean[j] += s.z2[i0] * (1.0 - frac) + s.z2[i1] * frac;
            coe_mean[j] += s.z2_coe_ref[i0] * (1.0 - frac) + s.z2_coe_ref[i1] * frac;
        }
    }
    let m = series.len() as f64;
    for v in z2_mean.iter_mut() {
        *v /= m;
    }
    for v in coe_mean.iter_mut() {
        *v /= m;
    }
    Ok(AveragedPersistence {
        taus,
        z2_mean,
        z2_coe_mean: coe_mean,
        count: series.len(),
    })
}
