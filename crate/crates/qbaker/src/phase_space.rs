//! Torus coherent states and Husimi grids.
//!
//! The coherent state is a periodized Gaussian on the N-point position
//! lattice q_x = (x + theta1)/N, with momentum center applied as a linear
//! phase and quasiperiodicity theta2 weighting the lattice images. The
//! periodization is truncated at 5 images on each side, which is accurate
//! to well below 1e-10 for N >= 16.

use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QbakerError, Result};

const IMAGES: i64 = 5;

/// Unit-norm coherent state centered at (q0, p0) with squeezing sigma.
pub fn coherent_state(
    q0: f64,
    p0: f64,
    n: usize,
    theta: (f64, f64),
    sigma: f64,
) -> Result<Array1<Complex64>> {
    if n < 2 {
        return Err(QbakerError::InvalidDimension(format!(
            "coherent state needs N >= 2, got {n}"
        )));
    }
    if sigma <= 0.0 {
        return Err(QbakerError::Precondition(format!("sigma = {sigma} <= 0")));
    }
    let nf = n as f64;
    let mut psi = Array1::zeros(n);
    for x in 0..n {
        let u = (x as f64 + theta.0) / nf;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in -IMAGES..=IMAGES {
            let d = u + m as f64 - q0;
            let amp = (-PI * nf * sigma * d * d).exp();
            let phase = 2.0 * PI * (nf * p0 * d - m as f64 * theta.1);
            acc += Complex64::from_polar(amp, phase);
        }
        psi[x] = acc;
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(QbakerError::Solver("coherent state vanished".into()));
    }
    psi.mapv_inplace(|z| z / norm);
    Ok(psi)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HusimiGrid {
    pub resolution: (usize, usize),
    pub q_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    /// row-major, values[iq * gp + ip]
    pub values: Vec<f64>,
}

impl HusimiGrid {
    pub fn value(&self, iq: usize, ip: usize) -> f64 {
        self.values[iq * self.resolution.1 + ip]
    }

    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_v = f64::NEG_INFINITY;
        for iq in 0..self.resolution.0 {
            for ip in 0..self.resolution.1 {
                let v = self.value(iq, ip);
                if v > best_v {
                    best_v = v;
                    best = (iq, ip);
                }
            }
        }
        best
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "q,p,value").map_err(QbakerError::Io)?;
        for iq in 0..self.resolution.0 {
            for ip in 0..self.resolution.1 {
                writeln!(
                    w,
                    "{},{},{}",
                    self.q_grid[iq],
                    self.p_grid[ip],
                    self.value(iq, ip)
                )
                .map_err(QbakerError::Io)?;
            }
        }
        Ok(())
    }
}

/// Husimi representation |<Psi_(q,p)|v>|^2 on a uniform grid over [0,1)^2.
pub fn husimi(
    vector: &Array1<Complex64>,
    resolution: (usize, usize),
    theta: (f64, f64),
    sigma: f64,
) -> Result<HusimiGrid> {
    let n = vector.len();
    if n < 2 {
        return Err(QbakerError::InvalidDimension(format!(
            "husimi of length-{n} vector"
        )));
    }
    let (gq, gp) = resolution;
    if gq == 0 || gp == 0 {
        return Err(QbakerError::InvalidSpec("empty husimi grid".into()));
    }
    let q_grid: Vec<f64> = (0..gq).map(|i| i as f64 / gq as f64).collect();
    let p_grid: Vec<f64> = (0..gp).map(|i| i as f64 / gp as f64).collect();
    let mut values = Vec::with_capacity(gq * gp);
    for &q0 in &q_grid {
        for &p0 in &p_grid {
            let cs = coherent_state(q0, p0, n, theta, sigma)?;
            let mut ov = Complex64::new(0.0, 0.0);
            for (a, b) in cs.iter().zip(vector.iter()) {
                ov += a.conj() * b;
            }
            values.push(ov.norm_sqr());
        }
    }
    Ok(HusimiGrid {
        resolution,
        q_grid,
        p_grid,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_norm() {
        for theta in [(0.0, 0.0), (0.5, 0.5), (0.2, 0.7)] {
            let psi = coherent_state(0.3, 0.6, 64, theta, 1.0).unwrap();
            let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn distant_centers_nearly_orthogonal() {
        let n = 400;
        let a = coherent_state(0.2, 0.5, n, (0.0, 0.0), 1.0).unwrap();
        let sep = 5.0 / (n as f64).sqrt();
        for q in [0.2 + 1.2 * sep, 0.2 + 2.0 * sep, 0.7] {
            let b = coherent_state(q, 0.5, n, (0.0, 0.0), 1.0).unwrap();
            let ov: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
            assert!(ov.norm() < 0.01, "overlap {} at q = {q}", ov.norm());
        }
    }

    #[test]
    fn position_mass_concentrated() {
        let n = 144;
        let q0 = 0.37;
        let psi = coherent_state(q0, 0.1, n, (0.0, 0.0), 1.0).unwrap();
        let w = 3.0 / (n as f64).sqrt();
        let mut inside = 0.0;
        for (x, z) in psi.iter().enumerate() {
            let mut d = (x as f64 / n as f64 - q0).abs();
            d = d.min(1.0 - d);
            if d <= w {
                inside += z.norm_sqr();
            }
        }
        assert!(inside > 0.99, "mass inside window = {inside}");
    }

    #[test]
    fn husimi_peak_reproduces_center() {
        let n = 64;
        let v = coherent_state(0.3, 0.6, n, (0.0, 0.0), 1.0).unwrap();
        let grid = husimi(&v, (20, 20), (0.0, 0.0), 1.0).unwrap();
        let (iq, ip) = grid.argmax();
        assert!((grid.q_grid[iq] - 0.3).abs() <= 0.05 + 1e-12, "q peak {iq}");
        assert!((grid.p_grid[ip] - 0.6).abs() <= 0.05 + 1e-12, "p peak {ip}");
    }

    #[test]
    fn global_phase_invariance() {
        let n = 32;
        let v = coherent_state(0.5, 0.25, n, (0.0, 0.0), 1.0).unwrap();
        let rotated = v.mapv(|z| z * Complex64::from_polar(1.0, 1.234));
        let a = husimi(&v, (8, 8), (0.0, 0.0), 1.0).unwrap();
        let b = husimi(&rotated, (8, 8), (0.0, 0.0), 1.0).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_vector_flat_along_q() {
        // a uniform position vector is a momentum eigenstate: its Husimi
        // is concentrated near p = 0 but must be flat in the q direction
        let n = 500;
        let v = Array1::from_elem(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
        let grid = husimi(&v, (16, 16), (0.0, 0.0), 1.0).unwrap();
        for ip in 0..16 {
            let col: Vec<f64> = (0..16).map(|iq| grid.value(iq, ip)).collect();
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
            if max > 1e-12 {
                assert!(max / min < 3.0, "q-anisotropy at ip = {ip}: {max} / {min}");
            }
        }
        // and the p marginal is genuinely peaked, not flat
        let p_slice: Vec<f64> = (0..16).map(|ip| grid.value(0, ip)).collect();
        let max = p_slice.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = p_slice.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min.max(1e-300) > 3.0);
    }

    #[test]
    fn transpose_swaps_q_and_p() {
        let n = 48;
        let v = coherent_state(0.7, 0.2, n, (0.0, 0.0), 1.0).unwrap();
        let grid = husimi(&v, (12, 12), (0.0, 0.0), 1.0).unwrap();
        let (iq, ip) = grid.argmax();
        let swapped = coherent_state(0.2, 0.7, n, (0.0, 0.0), 1.0).unwrap();
        let sgrid = husimi(&swapped, (12, 12), (0.0, 0.0), 1.0).unwrap();
        let (jq, jp) = sgrid.argmax();
        assert_eq!((iq, ip), (jp, jq));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(coherent_state(0.1, 0.1, 1, (0.0, 0.0), 1.0).is_err());
        assert!(coherent_state(0.1, 0.1, 16, (0.0, 0.0), 0.0).is_err());
    }
}
