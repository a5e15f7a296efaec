//! Circular ensemble samplers (CUE, COE, 2-block variants) and the
//! geodesic interpolations between them used as comparison models.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use ndarray_linalg::{Eig, Inverse, QR};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{QbakerError, Result};
use crate::linalg::{dagger, direct_sum, UnitaryMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleKind {
    Cue,
    Coe,
    TwoBlockCoe,
    TwoBlockCue,
    InterpCoeToCue,
    Interp2CoeToCoe,
    Interp2CoeToCue,
}

impl EnsembleKind {
    fn is_block(&self) -> bool {
        matches!(
            self,
            EnsembleKind::TwoBlockCoe
                | EnsembleKind::TwoBlockCue
                | EnsembleKind::Interp2CoeToCoe
                | EnsembleKind::Interp2CoeToCue
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub t_interp: f64,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn pure(kind: EnsembleKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            t_interp: 0.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(QbakerError::InvalidSpec("N = 0".into()));
        }
        if self.kind.is_block() && self.n % 2 != 0 {
            return Err(QbakerError::InvalidSpec(format!(
                "2-block ensemble needs even N, got {}",
                self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.t_interp) {
            return Err(QbakerError::InvalidSpec(format!(
                "t_interp = {} outside [0,1]",
                self.t_interp
            )));
        }
        Ok(())
    }
}

fn ginibre(n: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    let mut m = Array2::zeros((n, n));
    for z in m.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(re, im);
    }
    m
}

fn haar_from_rng(n: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    let g = ginibre(n, rng);
    let (q, r) = g.qr().expect("qr of generic complex matrix");
    // Fix the phase ambiguity so the distribution is exactly Haar.
    let mut q = q;
    for (k, mut col) in q.axis_iter_mut(Axis(1)).enumerate() {
        let d = r[(k, k)];
        let ph = d / d.norm();
        col.mapv_inplace(|z| z * ph.conj());
    }
    q
}

fn coe_from_rng(n: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    let w = haar_from_rng(n, rng);
    w.t().dot(&w)
}

fn two_block(halves: [Array2<Complex64>; 2]) -> Array2<Complex64> {
    direct_sum(&halves)
}

/// Geodesic f(t) = U0 exp(t log(U0^dagger U1)), principal branch.
fn geodesic(u0: &Array2<Complex64>, u1: &Array2<Complex64>, t: f64) -> Result<Array2<Complex64>> {
    let prod = dagger(u0).dot(u1);
    let (vals, vecs) = prod
        .eig()
        .map_err(|e| QbakerError::Solver(e.to_string()))?;
    let vinv = vecs
        .inv()
        .map_err(|e| QbakerError::Solver(e.to_string()))?;
    let mut scaled = vecs.clone();
    for (k, mut col) in scaled.axis_iter_mut(Axis(1)).enumerate() {
        let mut angle = vals[k].arg(); // (-pi, pi]
        if angle.abs() > PI - 1e-12 {
            // branch-cut eigenvalue near -1: deterministic nudge
            angle = (PI - 1e-9) * angle.signum();
        }
        let lam = Complex64::from_polar(1.0, t * angle);
        col.mapv_inplace(|z| z * lam);
    }
    Ok(u0.dot(&scaled.dot(&vinv)))
}

/// Haar-distributed unitary, deterministic in the seed.
pub fn haar_unitary(n: usize, seed: u64) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(QbakerError::InvalidDimension("haar with N = 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    UnitaryMatrix::new(haar_from_rng(n, &mut rng))
}

/// Sample one matrix from the ensemble described by `spec`.
pub fn sample(spec: &EnsembleSpec) -> Result<UnitaryMatrix> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let h = n / 2;
    let m = match spec.kind {
        EnsembleKind::Cue => haar_from_rng(n, &mut rng),
        EnsembleKind::Coe => coe_from_rng(n, &mut rng),
        EnsembleKind::TwoBlockCoe => {
            two_block([coe_from_rng(h, &mut rng), coe_from_rng(h, &mut rng)])
        }
        EnsembleKind::TwoBlockCue => {
            two_block([haar_from_rng(h, &mut rng), haar_from_rng(h, &mut rng)])
        }
        EnsembleKind::InterpCoeToCue => {
            let u0 = coe_from_rng(n, &mut rng);
            let u1 = haar_from_rng(n, &mut rng);
            geodesic(&u0, &u1, spec.t_interp)?
        }
        EnsembleKind::Interp2CoeToCue => {
            let u0 = two_block([coe_from_rng(h, &mut rng), coe_from_rng(h, &mut rng)]);
            let u1 = haar_from_rng(n, &mut rng);
            geodesic(&u0, &u1, spec.t_interp)?
        }
        EnsembleKind::Interp2CoeToCoe => {
            // U0 = V^T V with block-diagonal Haar V, U1 = W^T W; interpolate
            // V -> W and square the path so every point stays symmetric.
            let v = two_block([haar_from_rng(h, &mut rng), haar_from_rng(h, &mut rng)]);
            let w = haar_from_rng(n, &mut rng);
            let f = geodesic(&v, &w, spec.t_interp)?;
            f.t().dot(&f)
        }
    };
    UnitaryMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigendecompose, frobenius_norm};
    use crate::spectral::{mean_gap_ratio, spacings};

    #[test]
    fn haar_n1_is_unit_modulus() {
        let u = haar_unitary(1, 3).unwrap();
        assert!((u.entries()[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_angles_roughly_uniform() {
        let u = haar_unitary(200, 11).unwrap();
        let s = eigendecompose(&u, false).unwrap();
        let n = s.angles.len() as f64;
        let mut ks = 0.0f64;
        for (i, a) in s.angles.iter().enumerate() {
            let f = a / (2.0 * PI);
            ks = ks.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
        }
        assert!(ks < 0.12, "KS = {ks}");
    }

    #[test]
    fn seeding_is_deterministic() {
        let a = haar_unitary(20, 42).unwrap();
        let b = haar_unitary(20, 42).unwrap();
        let c = haar_unitary(20, 43).unwrap();
        let d_same = a.entries() - b.entries();
        let d_diff = a.entries() - c.entries();
        assert_eq!(frobenius_norm(&d_same), 0.0);
        assert!(frobenius_norm(&d_diff) > 1e-3);
    }

    #[test]
    fn coe_is_symmetric() {
        let u = sample(&EnsembleSpec::pure(EnsembleKind::Coe, 40, 5)).unwrap();
        let diff = u.entries() - &u.entries().t();
        assert!(diff.iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn samples_are_unitary() {
        for kind in [
            EnsembleKind::Cue,
            EnsembleKind::Coe,
            EnsembleKind::TwoBlockCoe,
            EnsembleKind::TwoBlockCue,
            EnsembleKind::InterpCoeToCue,
            EnsembleKind::Interp2CoeToCoe,
            EnsembleKind::Interp2CoeToCue,
        ] {
            let spec = EnsembleSpec {
                kind,
                n: 30,
                t_interp: 0.4,
                seed: 9,
            };
            let u = sample(&spec).unwrap();
            assert!(u.unitarity_defect() < 1e-10 * 30.0, "{kind:?}");
        }
    }

    #[test]
    fn odd_n_block_rejected() {
        let spec = EnsembleSpec::pure(EnsembleKind::TwoBlockCoe, 31, 1);
        assert!(matches!(sample(&spec), Err(QbakerError::InvalidSpec(_))));
    }

    #[test]
    fn interpolation_endpoints() {
        for kind in [
            EnsembleKind::InterpCoeToCue,
            EnsembleKind::Interp2CoeToCoe,
            EnsembleKind::Interp2CoeToCue,
        ] {
            let mk = |t| {
                sample(&EnsembleSpec {
                    kind,
                    n: 24,
                    t_interp: t,
                    seed: 77,
                })
                .unwrap()
            };
            let f0 = mk(0.0);
            let f1 = mk(1.0);
            // rebuild the endpoint matrices from the same seed stream
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let (u0, u1) = match kind {
                EnsembleKind::InterpCoeToCue => {
                    let a = coe_from_rng(24, &mut rng);
                    let b = haar_from_rng(24, &mut rng);
                    (a, b)
                }
                EnsembleKind::Interp2CoeToCue => {
                    let a = two_block([coe_from_rng(12, &mut rng), coe_from_rng(12, &mut rng)]);
                    let b = haar_from_rng(24, &mut rng);
                    (a, b)
                }
                EnsembleKind::Interp2CoeToCoe => {
                    let v = two_block([haar_from_rng(12, &mut rng), haar_from_rng(12, &mut rng)]);
                    let w = haar_from_rng(24, &mut rng);
                    (v.t().dot(&v), w.t().dot(&w))
                }
                _ => unreachable!(),
            };
            let d0 = f0.entries() - &u0;
            let d1 = f1.entries() - &u1;
            assert!(frobenius_norm(&d0) < 1e-8, "{kind:?} at t=0");
            assert!(frobenius_norm(&d1) < 1e-8, "{kind:?} at t=1");
        }
    }

    #[test]
    fn symmetric_interpolation_stays_symmetric() {
        for t in [0.0, 0.3, 0.9] {
            let u = sample(&EnsembleSpec {
                kind: EnsembleKind::Interp2CoeToCoe,
                n: 24,
                t_interp: t,
                seed: 4,
            })
            .unwrap();
            let diff = u.entries() - &u.entries().t();
            assert!(frobenius_norm(&diff) < 1e-8, "t={t}");
        }
    }

    #[test]
    fn cue_gap_ratio_smoke() {
        // desk-size check against the Tab. III-style constant; the
        // acceptance suite runs the full N=1000 version
        let mut acc = 0.0;
        let m = 8;
        for seed in 0..m {
            let u = sample(&EnsembleSpec::pure(EnsembleKind::Cue, 300, seed)).unwrap();
            let s = eigendecompose(&u, false).unwrap();
            acc += mean_gap_ratio(&spacings(&s, true).unwrap()).unwrap();
        }
        let mean = acc / m as f64;
        assert!((mean - 0.60266).abs() < 0.02, "mean = {mean}");
    }
}
