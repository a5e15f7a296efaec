//! Dense complex matrix plumbing: generalized DFT construction, products,
//! direct sums, eigendecomposition, norms, and binary caching formats.

use std::f64::consts::PI;
use std::io::{Read, Write};

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eig, EigVals};
use num_complex::Complex64;

use crate::error::{QbakerError, Result};

pub const TAU: f64 = 2.0 * PI;

/// Dense unitary matrix with its measured unitarity defect
/// (Frobenius norm of `U U† - I`).
#[derive(Debug, Clone)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Array2<Complex64>,
    unitarity_defect: f64,
}

impl UnitaryMatrix {
    /// Wrap a square matrix, measuring its unitarity defect.
    pub fn new(entries: Array2<Complex64>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r == 0 || r != c {
            return Err(QbakerError::InvalidDimension(format!(
                "expected square nonempty matrix, got {r}x{c}"
            )));
        }
        let defect = unitarity_defect(&entries);
        Ok(Self {
            dim: r,
            entries,
            unitarity_defect: defect,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<Complex64> {
        self.entries
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.unitarity_defect
    }

    /// Conjugate transpose. For a unitary matrix this is the inverse.
    pub fn dagger(&self) -> UnitaryMatrix {
        UnitaryMatrix {
            dim: self.dim,
            entries: dagger(&self.entries),
            unitarity_defect: self.unitarity_defect,
        }
    }

    pub fn matmul(&self, rhs: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim != rhs.dim {
            return Err(QbakerError::InvalidDimension(format!(
                "dimension mismatch: {} vs {}",
                self.dim, rhs.dim
            )));
        }
        UnitaryMatrix::new(self.entries.dot(&rhs.entries))
    }

    /// Binary container: u64 LE dim header followed by row-major
    /// (re, im) f64 LE pairs.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        for z in self.entries.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut hdr = [0u8; 8];
        r.read_exact(&mut hdr)?;
        let dim = u64::from_le_bytes(hdr) as usize;
        if dim == 0 {
            return Err(QbakerError::InvalidDimension("zero dim in header".into()));
        }
        let mut buf = vec![0u8; dim * dim * 16];
        r.read_exact(&mut buf)?;
        let mut entries = Array2::zeros((dim, dim));
        for (i, chunk) in buf.chunks_exact(16).enumerate() {
            let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
            let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
            entries[(i / dim, i % dim)] = Complex64::new(re, im);
        }
        UnitaryMatrix::new(entries)
    }
}

/// Sorted eigenangles in `[0, 2pi)`, optionally with the eigenvector matrix
/// (column k pairs with `angles[k]`).
#[derive(Debug, Clone)]
pub struct SpectrumData {
    pub angles: Vec<f64>,
    pub eigenvectors: Option<Array2<Complex64>>,
}

impl SpectrumData {
    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    /// Spectrum CSV: `index,angle` rows.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "index,angle")?;
        for (i, a) in self.angles.iter().enumerate() {
            writeln!(w, "{i},{a:.17e}")?;
        }
        Ok(())
    }
}

/// Generalized DFT matrix: entry (j,k) = N^{-1/2} exp(-2pi i (j+t1)(k+t2)/N).
/// Unitary for any boundary pair.
pub fn build_gdft(n: usize, theta1: f64, theta2: f64) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(QbakerError::InvalidDimension("gdft with N = 0".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut m = Array2::zeros((n, n));
    for j in 0..n {
        for k in 0..n {
            let ph = -TAU * (j as f64 + theta1) * (k as f64 + theta2) / n as f64;
            m[(j, k)] = Complex64::from_polar(scale, ph);
        }
    }
    UnitaryMatrix::new(m)
}

/// Map a complex number's argument to `[0, 2pi)`.
pub fn principal_angle(z: Complex64) -> f64 {
    let mut a = z.arg();
    if a < 0.0 {
        a += TAU;
    }
    if a >= TAU {
        a = 0.0;
    }
    a
}

/// Full spectrum of a unitary matrix; angles sorted ascending, ties broken
/// by input order. With vectors, the per-column residual `|U v - e^{ia} v|`
/// is checked against `1e-6 N`.
pub fn eigendecompose(u: &UnitaryMatrix, with_vectors: bool) -> Result<SpectrumData> {
    let n = u.dim();
    if !with_vectors {
        let vals = u
            .entries()
            .eigvals()
            .map_err(|e| QbakerError::Solver(e.to_string()))?;
        let mut angles: Vec<f64> = vals.iter().map(|z| principal_angle(*z)).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return Ok(SpectrumData {
            angles,
            eigenvectors: None,
        });
    }

    let (vals, vecs) = u
        .entries()
        .eig()
        .map_err(|e| QbakerError::Solver(e.to_string()))?;
    let mut idx: Vec<usize> = (0..n).collect();
    let angles_raw: Vec<f64> = vals.iter().map(|z| principal_angle(*z)).collect();
    idx.sort_by(|&a, &b| angles_raw[a].partial_cmp(&angles_raw[b]).unwrap());

    let angles: Vec<f64> = idx.iter().map(|&i| angles_raw[i]).collect();
    let mut sorted_vecs = Array2::zeros((n, n));
    for (col, &i) in idx.iter().enumerate() {
        let mut v = vecs.column(i).to_owned();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.mapv_inplace(|z| z / norm);
        sorted_vecs.column_mut(col).assign(&v);
    }

    let bound = 1e-6 * n as f64;
    let residual = reconstruction_residual(u, &angles, &sorted_vecs);
    if residual > bound {
        return Err(QbakerError::ResidualTooLarge { residual, bound });
    }

    Ok(SpectrumData {
        angles,
        eigenvectors: Some(sorted_vecs),
    })
}

fn reconstruction_residual(u: &UnitaryMatrix, angles: &[f64], vecs: &Array2<Complex64>) -> f64 {
    let uv = u.entries().dot(vecs);
    let mut worst = 0.0f64;
    for (k, &a) in angles.iter().enumerate() {
        let lam = Complex64::from_polar(1.0, a);
        let r = uv
            .column(k)
            .iter()
            .zip(vecs.column(k).iter())
            .map(|(x, v)| (x - lam * v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    worst
}

/// Rebuild `V diag(e^{ia}) V†` from a spectrum with vectors.
pub fn reassemble(spectrum: &SpectrumData) -> Result<Array2<Complex64>> {
    let vecs = spectrum
        .eigenvectors
        .as_ref()
        .ok_or_else(|| QbakerError::EmptyInput("spectrum has no eigenvectors".into()))?;
    let mut scaled = vecs.clone();
    for (k, mut col) in scaled.axis_iter_mut(Axis(1)).enumerate() {
        let lam = Complex64::from_polar(1.0, spectrum.angles[k]);
        col.mapv_inplace(|z| z * lam);
    }
    Ok(scaled.dot(&dagger(vecs)))
}

pub fn frobenius_norm(m: &Array2<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dagger(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|z| z.conj())
}

pub fn unitarity_defect(m: &Array2<Complex64>) -> f64 {
    let mut p = m.dot(&dagger(m));
    for i in 0..p.nrows() {
        p[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    frobenius_norm(&p)
}

/// Block-diagonal assembly of square blocks.
pub fn direct_sum(blocks: &[Array2<Complex64>]) -> Array2<Complex64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = Array2::zeros((n, n));
    let mut off = 0;
    for b in blocks {
        let s = b.nrows();
        m.slice_mut(ndarray::s![off..off + s, off..off + s]).assign(b);
        off += s;
    }
    m
}

pub fn identity(n: usize) -> Array2<Complex64> {
    Array2::eye(n)
}

pub fn commutator(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    a.dot(b) - b.dot(a)
}

pub fn anticommutator(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    a.dot(b) + b.dot(a)
}

/// Matrix power by repeated multiplication (small exponents only).
pub fn matrix_power(m: &Array2<Complex64>, t: usize) -> Array2<Complex64> {
    let mut acc = identity(m.nrows());
    for _ in 0..t {
        acc = acc.dot(m);
    }
    acc
}

pub fn trace(m: &Array2<Complex64>) -> Complex64 {
    m.diag().sum()
}

pub fn column(m: &Array2<Complex64>, k: usize) -> Array1<Complex64> {
    m.column(k).to_owned()
}
