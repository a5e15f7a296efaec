//! Spectral form factor, the moving-average smoothing used for the
//! quantized maps, early-time slope fits with outlier rejection, and the
//! COE / 2-block reference curves.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QbakerError, Result};
use crate::linalg::SpectrumData;

/// Window half-width for the moving average: 20 below N = 1000, 40 above.
pub fn default_ell(n: usize) -> usize {
    if n < 1000 {
        20
    } else {
        40
    }
}

/// Number of fitted early-time points by dimension range.
pub fn default_fit_points(n: usize) -> usize {
    if n < 1000 {
        20
    } else if n < 5000 {
        40
    } else {
        60
    }
}

/// Residual threshold for flagging a fit as an outlier; A = 15 maps are
/// noisier and get a looser cut.
pub fn default_threshold(a: usize) -> f64 {
    if a == 15 {
        400.0
    } else {
        100.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SffSeries {
    pub n: usize,
    pub times: Vec<usize>,
    pub raw: Vec<f64>,
    pub averaged: Option<Vec<f64>>,
    pub ell: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub scaled_residual: f64,
    pub f: usize,
    pub is_outlier: bool,
}

/// SFF(t) = |sum_j e^{it theta_j}|^2 / N for t = 1..T.
pub fn sff(spectrum: &SpectrumData, t_max: usize) -> Result<SffSeries> {
    let n = spectrum.angles.len();
    if n == 0 {
        return Err(QbakerError::EmptyInput("empty spectrum".into()));
    }
    if t_max < 1 {
        return Err(QbakerError::Precondition("T must be >= 1".into()));
    }
    let mut times = Vec::with_capacity(t_max);
    let mut raw = Vec::with_capacity(t_max);
    // running phases e^{it theta_j}, advanced one step per t
    let steps: Vec<Complex64> = spectrum
        .angles
        .iter()
        .map(|&a| Complex64::from_polar(1.0, a))
        .collect();
    let mut cur = steps.clone();
    for t in 1..=t_max {
        if t > 1 {
            for (c, s) in cur.iter_mut().zip(&steps) {
                *c *= s;
            }
        }
        let sum: Complex64 = cur.iter().sum();
        times.push(t);
        raw.push(sum.norm_sqr() / n as f64);
    }
    Ok(SffSeries {
        n,
        times,
        raw,
        averaged: None,
        ell: None,
    })
}

/// Moving average of the raw SFF: window [t-ell, t+ell] for t > ell,
/// otherwise the symmetric window [1, 2t-1]; clamped to the available grid
/// at the top end.
pub fn average_sff(series: &SffSeries, ell: usize) -> Result<SffSeries> {
    if ell < 1 {
        return Err(QbakerError::Precondition("ell must be >= 1".into()));
    }
    let t_max = series.times.len();
    let mut averaged = Vec::with_capacity(t_max);
    for &t in &series.times {
        let (lo, hi) = if t > ell {
            (t - ell, (t + ell).min(t_max))
        } else {
            (1, (2 * t - 1).min(t_max))
        };
        let window = &series.raw[lo - 1..hi];
        averaged.push(window.iter().sum::<f64>() / window.len() as f64);
    }
    Ok(SffSeries {
        averaged: Some(averaged),
        ell: Some(ell),
        ..series.clone()
    })
}

/// Least-squares line through the origin over the first `f` averaged
/// points, SFF vs tau = t/N. The residual is the Euclidean norm of the
/// residual vector of the equivalent fit on y = N*SFF(t) vs t.
pub fn fit_slope(series: &SffSeries, f: usize, threshold: f64) -> Result<SlopeFit> {
    let averaged = series
        .averaged
        .as_ref()
        .ok_or_else(|| QbakerError::Precondition("averaged SFF missing".into()))?;
    if f > averaged.len() || f == 0 {
        return Err(QbakerError::Precondition(format!(
            "fit window f = {} outside series of length {}",
            f,
            averaged.len()
        )));
    }
    let n = series.n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..f {
        let x = (i + 1) as f64;
        let y = n * averaged[i];
        sxy += x * y;
        sxx += x * x;
    }
    let slope = sxy / sxx;
    let mut sse = 0.0;
    for i in 0..f {
        let x = (i + 1) as f64;
        let y = n * averaged[i];
        let e = y - slope * x;
        sse += e * e;
    }
    // residual reported as the Euclidean norm ||y - slope*x||; the sum of
    // squares itself sits in the thousands even for clean RMT samples, far
    // above the threshold scale
    let res = sse.sqrt();
    Ok(SlopeFit {
        slope,
        scaled_residual: res,
        f,
        is_outlier: res > threshold,
    })
}

/// Ensemble-averaged COE form factor.
pub fn coe_reference(taus: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        if tau <= 0.0 {
            return Err(QbakerError::Precondition(format!("tau = {tau} <= 0")));
        }
        let v = if tau <= 1.0 {
            2.0 * tau - tau * (1.0 + 2.0 * tau).ln()
        } else {
            2.0 - tau * ((2.0 * tau + 1.0) / (2.0 * tau - 1.0)).ln()
        };
        out.push((tau, v));
    }
    Ok(out)
}

/// 2-block COE form factor: the COE curve evaluated at 2*tau.
pub fn two_block_reference(taus: &[f64]) -> Result<Vec<(f64, f64)>> {
    let doubled: Vec<f64> = taus.iter().map(|t| 2.0 * t).collect();
    let vals = coe_reference(&doubled)?;
    Ok(taus
        .iter()
        .zip(vals)
        .map(|(&tau, (_, v))| (tau, v))
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    pub slope: f64,
    pub scaled_residual: f64,
    pub is_outlier: bool,
    pub smoothed_slope: Option<f64>,
}

/// Per-N slope fits with outlier removal and neighbor smoothing: each
/// surviving slope is replaced by the mean over non-outlier rows whose N is
/// within 10 of its own.
pub fn slope_scan(rows: &[(usize, SlopeFit)]) -> Result<Vec<ScanRow>> {
    if rows.is_empty() {
        return Err(QbakerError::EmptyInput("no slope fits to scan".into()));
    }
    let mut out: Vec<ScanRow> = rows
        .iter()
        .map(|(n, fit)| ScanRow {
            n: *n,
            slope: fit.slope,
            scaled_residual: fit.scaled_residual,
            is_outlier: fit.is_outlier,
            smoothed_slope: None,
        })
        .collect();
    for i in 0..out.len() {
        if out[i].is_outlier {
            continue;
        }
        let n_i = out[i].n as i64;
        let (mut acc, mut cnt) = (0.0, 0usize);
        for r in out.iter() {
            if !r.is_outlier && (r.n as i64 - n_i).abs() <= 10 {
                acc += r.slope;
                cnt += 1;
            }
        }
        out[i].smoothed_slope = Some(acc / cnt as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn spectrum(angles: Vec<f64>) -> SpectrumData {
        SpectrumData {
            angles,
            eigenvectors: None,
        }
    }

    #[test]
    fn identity_spectrum_sff_is_n() {
        let s = spectrum(vec![0.0; 16]);
        let series = sff(&s, 5).unwrap();
        for &v in &series.raw {
            assert_abs_diff_eq!(v, 16.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn picket_fence_sff_vanishes() {
        let n = 32;
        let s = spectrum((0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect());
        let series = sff(&s, n - 1).unwrap();
        for &v in &series.raw {
            assert!(v < 1e-20, "nonzero SFF {v}");
        }
    }

    #[test]
    fn sff_matches_matrix_power_trace() {
        let u = crate::rmt::haar_unitary(64, 17).unwrap();
        let s = crate::linalg::eigendecompose(&u, false).unwrap();
        let series = sff(&s, 20).unwrap();
        let mut p = u.entries().clone();
        for t in 1..=20usize {
            let tr = crate::linalg::trace(&p);
            assert!(
                (series.raw[t - 1] - tr.norm_sqr() / 64.0).abs() < 1e-6 * 64.0,
                "t = {t}"
            );
            p = p.dot(u.entries());
        }
    }

    #[test]
    fn sff_rotation_invariant() {
        let angles = vec![0.1, 0.9, 2.3, 4.4, 5.5];
        let shift = 1.234;
        let a = sff(&spectrum(angles.clone()), 12).unwrap();
        let b = sff(
            &spectrum(angles.iter().map(|x| x + shift).collect()),
            12,
        )
        .unwrap();
        for (x, y) in a.raw.iter().zip(&b.raw) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-10);
        }
    }

    #[test]
    fn averaging_windows() {
        let series = SffSeries {
            n: 10,
            times: (1..=10).collect(),
            raw: (1..=10).map(|t| t as f64).collect(),
            averaged: None,
            ell: None,
        };
        let avg = average_sff(&series, 2).unwrap();
        let a = avg.averaged.unwrap();
        // t = 1: window {1}; t = 2: window 1..3; t = 4: window 2..6
        assert_abs_diff_eq!(a[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[3], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn averaging_constant_is_identity() {
        let series = SffSeries {
            n: 4,
            times: (1..=30).collect(),
            raw: vec![3.5; 30],
            averaged: None,
            ell: None,
        };
        let avg = average_sff(&series, 5).unwrap();
        for v in avg.averaged.unwrap() {
            assert_abs_diff_eq!(v, 3.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn averaging_commutes_with_constant_shift() {
        let raw: Vec<f64> = (1..=40).map(|t| (t as f64).sin().abs()).collect();
        let mk = |r: Vec<f64>| SffSeries {
            n: 8,
            times: (1..=40).collect(),
            raw: r,
            averaged: None,
            ell: None,
        };
        let a = average_sff(&mk(raw.clone()), 6).unwrap().averaged.unwrap();
        let shifted: Vec<f64> = raw.iter().map(|x| x + 2.0).collect();
        let b = average_sff(&mk(shifted), 6).unwrap().averaged.unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x + 2.0, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_line_fit() {
        let n = 100usize;
        let series = SffSeries {
            n,
            times: (1..=30).collect(),
            raw: vec![0.0; 30],
            averaged: Some((1..=30).map(|t| 4.0 * t as f64 / n as f64).collect()),
            ell: Some(1),
        };
        let fit = fit_slope(&series, 20, 100.0).unwrap();
        assert_abs_diff_eq!(fit.slope, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.scaled_residual, 0.0, epsilon = 1e-12);
        assert!(!fit.is_outlier);
    }

    #[test]
    fn noisy_line_fit() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let n = 500usize;
        let avg: Vec<f64> = (1..=40)
            .map(|t| 2.0 * t as f64 / n as f64 + 1e-3 * (rng.gen::<f64>() - 0.5))
            .collect();
        let series = SffSeries {
            n,
            times: (1..=40).collect(),
            raw: vec![0.0; 40],
            averaged: Some(avg),
            ell: Some(1),
        };
        let fit = fit_slope(&series, 40, 100.0).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.05, "slope = {}", fit.slope);
    }

    #[test]
    fn fit_window_too_large() {
        let series = SffSeries {
            n: 10,
            times: (1..=5).collect(),
            raw: vec![1.0; 5],
            averaged: Some(vec![1.0; 5]),
            ell: Some(1),
        };
        assert!(fit_slope(&series, 6, 100.0).is_err());
    }

    #[test]
    fn coe_reference_values() {
        let r = coe_reference(&[0.1, 1.0, 500.0]).unwrap();
        assert_abs_diff_eq!(r[0].1, 0.2 - 0.1 * 1.2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(r[1].1, 2.0 - 3.0f64.ln(), epsilon = 1e-12);
        assert!((r[2].1 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn two_block_is_coe_at_doubled_time() {
        let taus = [0.05, 0.3, 0.7, 1.4];
        let tb = two_block_reference(&taus).unwrap();
        let doubled: Vec<f64> = taus.iter().map(|t| 2.0 * t).collect();
        let coe = coe_reference(&doubled).unwrap();
        for (a, b) in tb.iter().zip(&coe) {
            assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-14);
        }
    }

    #[test]
    fn two_block_coe_sample_slope_near_four() {
        // desk-size stand-in for the N=2000 case: one 2-block COE draw
        let n = 600;
        let u = crate::rmt::sample(&crate::rmt::EnsembleSpec::pure(
            crate::rmt::EnsembleKind::TwoBlockCoe,
            n,
            31,
        ))
        .unwrap();
        let s = crate::linalg::eigendecompose(&u, false).unwrap();
        let series = sff(&s, 80).unwrap();
        let avg = average_sff(&series, 20).unwrap();
        let fit = fit_slope(&avg, 20, 100.0).unwrap();
        assert!((fit.slope - 4.0).abs() < 1.0, "slope = {}", fit.slope);
    }

    #[test]
    fn scan_smoothing_identical_series_is_noop() {
        let fit = SlopeFit {
            slope: 4.2,
            scaled_residual: 1.0,
            f: 20,
            is_outlier: false,
        };
        let rows: Vec<(usize, SlopeFit)> =
            (0..5).map(|i| (100 + 2 * i, fit.clone())).collect();
        let scanned = slope_scan(&rows).unwrap();
        for r in scanned {
            assert_abs_diff_eq!(r.smoothed_slope.unwrap(), 4.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn scan_drops_outliers_from_smoothing() {
        let mk = |slope, outlier| SlopeFit {
            slope,
            scaled_residual: if outlier { 1e4 } else { 1.0 },
            f: 20,
            is_outlier: outlier,
        };
        let rows = vec![
            (100, mk(4.0, false)),
            (102, mk(40.0, true)),
            (104, mk(5.0, false)),
        ];
        let scanned = slope_scan(&rows).unwrap();
        assert_abs_diff_eq!(scanned[0].smoothed_slope.unwrap(), 4.5, epsilon = 1e-12);
        assert!(scanned[1].smoothed_slope.is_none());
    }
}
