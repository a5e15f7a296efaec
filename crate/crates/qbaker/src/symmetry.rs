//! Reflection and time-reversal probes: the antiunitary TR defect, grids of
//! Fourier-reflection commutator norms, approximate symmetry classes from
//! eigenvector overlaps, and the structured commutator of the phaseless map
//! with the position reflection.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QbakerError, Result};
use crate::linalg::{
    build_gdft, commutator, dagger, frobenius_norm, SpectrumData, UnitaryMatrix,
};
use crate::quantizer::{build_map, QuantizationSpec};
use crate::spectral::{mean_gap_ratio, spacings, SpacingData};

/// Generalized reflection (F^{w1,w2})^2.
pub fn reflection_operator(n: usize, w1: f64, w2: f64) -> Result<UnitaryMatrix> {
    let f = build_gdft(n, w1, w2)?;
    UnitaryMatrix::new(f.entries().dot(f.entries()))
}

/// Frobenius norm of F U F^{-1} - conj(U^{-1}), with F the map's own GDFT.
/// For unitary U the second term is just the transpose.
pub fn tr_defect(spec: &QuantizationSpec, u: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != spec.n {
        return Err(QbakerError::InvalidDimension(format!(
            "matrix dim {} does not match spec N = {}",
            u.dim(),
            spec.n
        )));
    }
    let f = build_gdft(spec.n, spec.theta.0, spec.theta.1)?;
    let lhs = f.entries().dot(u.entries()).dot(&dagger(f.entries()));
    let diff = &lhs - &u.entries().t();
    Ok(frobenius_norm(&diff))
}

/// Commutator norms ||[U, (F^w)^2]||_F over a grid of (w1, w2) pairs.
pub fn fourier_reflection_scan(
    u: &UnitaryMatrix,
    grid: &[(f64, f64)],
) -> Result<Vec<((f64, f64), f64)>> {
    if grid.is_empty() {
        return Err(QbakerError::EmptyInput("empty reflection grid".into()));
    }
    let mut out = Vec::with_capacity(grid.len());
    for &(w1, w2) in grid {
        let r = reflection_operator(u.dim(), w1, w2)?;
        let c = commutator(u.entries(), r.entries());
        out.push(((w1, w2), frobenius_norm(&c)));
    }
    Ok(out)
}

/// Uniform g x g grid over [0,1)^2.
pub fn uniform_grid(g: usize) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            pts.push((i as f64 / g as f64, j as f64 / g as f64));
        }
    }
    pts
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
    /// diagonal overlaps <phi|R|phi>, one per eigenvector
    pub overlaps: Vec<(f64, f64)>,
    /// mean square deviation of |<phi|R|phi>| from 1
    pub mse: f64,
}

/// Split eigenvectors by the sign of Re<phi|R|phi>; overlaps with
/// |Re| < 1e-12 land in the plus class.
pub fn classify_eigenvectors(
    spectrum: &SpectrumData,
    r: &UnitaryMatrix,
) -> Result<Classification> {
    let vecs = spectrum
        .eigenvectors
        .as_ref()
        .ok_or_else(|| QbakerError::Precondition("eigenvectors missing".into()))?;
    if vecs.nrows() != r.dim() {
        return Err(QbakerError::InvalidDimension(format!(
            "eigenvector dim {} vs operator dim {}",
            vecs.nrows(),
            r.dim()
        )));
    }
    let n = vecs.ncols();
    let mut s_plus = Vec::new();
    let mut s_minus = Vec::new();
    let mut overlaps = Vec::with_capacity(n);
    let mut mse = 0.0;
    for k in 0..n {
        let phi = vecs.column(k);
        let rphi = r.entries().dot(&phi);
        let mut ov = Complex64::new(0.0, 0.0);
        for (a, b) in phi.iter().zip(rphi.iter()) {
            ov += a.conj() * b;
        }
        overlaps.push((ov.re, ov.im));
        let d = ov.norm() - 1.0;
        mse += d * d;
        if ov.re >= -1e-12 {
            s_plus.push(k);
        } else {
            s_minus.push(k);
        }
    }
    Ok(Classification {
        s_plus,
        s_minus,
        overlaps,
        mse: mse / n as f64,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommutatorStructure {
    /// largest |entry| over rows x in A*Z (expected ~ 0)
    pub max_zero_row_entry: f64,
    /// largest |entry| over columns y not in (N/A)*Z
    pub max_small_entry: f64,
    /// entries exceeding `bound`, as (x, y, modulus)
    pub large_entries: Vec<(usize, usize, f64)>,
    pub bound: f64,
}

/// Structure of [B, R] for the phaseless quantization and the position
/// reflection R: x -> -x mod N. Entries above `bound` are collected for
/// inspection; the decaying background is summarized by its maxima.
pub fn bv_commutator_structure(a: usize, n: usize, bound: f64) -> Result<CommutatorStructure> {
    let spec = QuantizationSpec::standard(crate::quantizer::Family::BalazsVoros, a, n);
    let b = build_map(&spec)?;
    let r = reflection_operator(n, 0.0, 0.0)?;
    let c: Array2<Complex64> = commutator(b.entries(), r.entries());
    let mut max_zero_row = 0.0f64;
    let mut max_small = 0.0f64;
    let mut large = Vec::new();
    let period = n / a;
    for x in 0..n {
        for y in 0..n {
            let m = c[(x, y)].norm();
            if x % a == 0 {
                max_zero_row = max_zero_row.max(m);
            }
            if y % period != 0 {
                max_small = max_small.max(m);
            }
            if m > bound {
                large.push((x, y, m));
            }
        }
    }
    Ok(CommutatorStructure {
        max_zero_row_entry: max_zero_row,
        max_small_entry: max_small,
        large_entries: large,
        bound,
    })
}

/// Spacing data and gap ratio recomputed inside each class of the given
/// partition of eigenlevel indices.
pub fn split_statistics(
    spectrum: &SpectrumData,
    classes: &[Vec<usize>],
) -> Result<Vec<(SpacingData, f64)>> {
    if classes.is_empty() {
        return Err(QbakerError::EmptyInput("no classes".into()));
    }
    let mut out = Vec::with_capacity(classes.len());
    for class in classes {
        if class.len() < 3 {
            return Err(QbakerError::Precondition(format!(
                "class with {} levels cannot carry spacing statistics",
                class.len()
            )));
        }
        let mut angles: Vec<f64> = class.iter().map(|&i| spectrum.angles[i]).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sub = SpectrumData {
            angles,
            eigenvectors: None,
        };
        let sp = spacings(&sub, true)?;
        let r = mean_gap_ratio(&sp)?;
        out.push((sp, r));
    }
    Ok(out)
}
