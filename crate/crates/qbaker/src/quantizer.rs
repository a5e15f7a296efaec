//! Quantizations of the classical A-baker's map: the four DFT-block
//! families with optional block phases, and the mixed-basis t-step
//! propagators used by the periodic-orbit machinery.

use ndarray::{s, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QbakerError, Result};
use crate::linalg::{build_gdft, direct_sum, UnitaryMatrix, TAU};
use crate::orbit::{digit_counts, digits_of, phi_value, reverse_value};
use crate::phase_space::coherent_state;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    BalazsVoros,
    Saraceno,
    Generic,
    ShorBaker,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::BalazsVoros => "bv",
            Family::Saraceno => "saraceno",
            Family::Generic => "generic",
            Family::ShorBaker => "shor",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = QbakerError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bv" | "balazs-voros" | "balazsvoros" => Ok(Family::BalazsVoros),
            "saraceno" | "sar" => Ok(Family::Saraceno),
            "generic" | "gen" => Ok(Family::Generic),
            "shor" | "shorbaker" | "shor-baker" => Ok(Family::ShorBaker),
            other => Err(QbakerError::InvalidSpec(format!("unknown family {other:?}"))),
        }
    }
}

/// Declarative recipe for one quantized map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantizationSpec {
    pub family: Family,
    pub a: usize,
    pub n: usize,
    pub theta: (f64, f64),
    pub alpha: Vec<f64>,
    pub seed: Option<u64>,
}

impl QuantizationSpec {
    /// Standard/phaseless quantization: theta fixed by family, block phases
    /// all zero (Shor baker: `alpha_j = j^2/A`).
    pub fn standard(family: Family, a: usize, n: usize) -> Self {
        let theta = match family {
            Family::BalazsVoros | Family::ShorBaker => (0.0, 0.0),
            Family::Saraceno => (0.5, 0.5),
            Family::Generic => (0.0, 0.0),
        };
        let alpha = match family {
            Family::ShorBaker => (0..a).map(|j| ((j * j) % a) as f64 / a as f64).collect(),
            _ => vec![0.0; a],
        };
        Self {
            family,
            a,
            n,
            theta,
            alpha,
            seed: None,
        }
    }

    pub fn generic(a: usize, n: usize, theta: (f64, f64)) -> Self {
        Self {
            family: Family::Generic,
            a,
            n,
            theta,
            alpha: vec![0.0; a],
            seed: None,
        }
    }

    pub fn with_alpha(mut self, alpha: Vec<f64>) -> Self {
        self.alpha = alpha;
        self
    }

    /// Replace the block phases by i.i.d. uniform draws on [0,1).
    pub fn with_random_alpha(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.alpha = (0..self.a).map(|_| rng.gen::<f64>()).collect();
        self.seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.a < 2 {
            return Err(QbakerError::InvalidSpec(format!("A = {} < 2", self.a)));
        }
        if self.n == 0 || self.n % self.a != 0 {
            return Err(QbakerError::InvalidSpec(format!(
                "N = {} not a positive multiple of A = {}",
                self.n, self.a
            )));
        }
        if self.alpha.len() != self.a {
            return Err(QbakerError::InvalidSpec(format!(
                "alpha length {} != A = {}",
                self.alpha.len(),
                self.a
            )));
        }
        Ok(())
    }

    /// Canonical string for content-addressed caching; bit-exact in the
    /// floating point parameters.
    pub fn cache_key(&self) -> String {
        let mut s = format!(
            "{}|A={}|N={}|t1={:016x}|t2={:016x}",
            self.family.label(),
            self.a,
            self.n,
            self.theta.0.to_bits(),
            self.theta.1.to_bits()
        );
        for a in &self.alpha {
            s.push_str(&format!("|a={:016x}", a.to_bits()));
        }
        s
    }
}

fn block_phase(alpha_j: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * alpha_j)
}

/// Position-basis unitary per the family's block-DFT recipe.
pub fn build_map(spec: &QuantizationSpec) -> Result<UnitaryMatrix> {
    spec.validate()?;
    let (n, a) = (spec.n, spec.a);
    let m = n / a;
    let outer = match spec.family {
        Family::Saraceno => build_gdft(n, 0.5, 0.5)?,
        Family::Generic => build_gdft(n, spec.theta.0, spec.theta.1)?,
        Family::BalazsVoros | Family::ShorBaker => build_gdft(n, 0.0, 0.0)?,
    };
    let blocks: Vec<Array2<Complex64>> = (0..a)
        .map(|j| {
            let f = match spec.family {
                Family::ShorBaker => build_gdft(m, 0.0, -(j as f64) / a as f64)?,
                Family::Saraceno => build_gdft(m, 0.5, 0.5)?,
                Family::Generic => build_gdft(m, spec.theta.0, spec.theta.1)?,
                Family::BalazsVoros => build_gdft(m, 0.0, 0.0)?,
            };
            Ok(f.into_entries() * block_phase(spec.alpha[j]))
        })
        .collect::<Result<_>>()?;
    let bd = direct_sum(&blocks);
    UnitaryMatrix::new(outer.dagger().entries().dot(&bd))
}

/// Mixed momentum-position t-step propagator: `A^t` DFT blocks, the block
/// fed by position cell `nu` landing at momentum cell `reverse(nu)`.
#[derive(Debug, Clone)]
pub struct MixedPropagator {
    pub t: usize,
    pub a: usize,
    pub n: usize,
    pub entries: Array2<Complex64>,
    /// `block_index[nu]` is the momentum block receiving position block nu.
    pub block_index: Vec<usize>,
}

fn tstep_dims(spec: &QuantizationSpec, t: usize) -> Result<(usize, usize)> {
    spec.validate()?;
    if t == 0 {
        return Err(QbakerError::InvalidSpec("t = 0 propagator".into()));
    }
    let mut at: usize = 1;
    for _ in 0..t {
        at = at
            .checked_mul(spec.a)
            .ok_or_else(|| QbakerError::InvalidSpec("A^t overflow".into()))?;
    }
    if spec.n % at != 0 {
        return Err(QbakerError::InvalidSpec(format!(
            "A^t = {at} does not divide N = {}",
            spec.n
        )));
    }
    Ok((at, spec.n / at))
}

fn eta_phase(spec: &QuantizationSpec, nu: usize, at: usize, t: usize) -> Complex64 {
    let digits = digits_of(nu, spec.a, t);
    debug_assert!(nu < at);
    let counts = digit_counts(&digits, spec.a);
    let total: f64 = counts
        .iter()
        .enumerate()
        .map(|(j, &c)| spec.alpha[j] * c as f64)
        .sum();
    Complex64::from_polar(1.0, TAU * total)
}

/// t-step propagator for the Balazs-Voros/Saraceno/Generic families.
pub fn build_tstep_generic(spec: &QuantizationSpec, t: usize) -> Result<MixedPropagator> {
    if spec.family == Family::ShorBaker {
        return Err(QbakerError::InvalidSpec(
            "generic t-step propagator called with Shor baker family".into(),
        ));
    }
    let (at, s_blk) = tstep_dims(spec, t)?;
    let (t1, t2) = match spec.family {
        Family::Saraceno => (0.5, 0.5),
        Family::Generic => spec.theta,
        _ => (0.0, 0.0),
    };
    let f_small = build_gdft(s_blk, t1, t2)?;
    let mut entries = Array2::zeros((spec.n, spec.n));
    let mut block_index = vec![0usize; at];
    for nu in 0..at {
        let nubar = reverse_value(nu, spec.a, t);
        block_index[nu] = nubar;
        let phase = eta_phase(spec, nu, at, t);
        let blk = f_small.entries() * phase;
        entries
            .slice_mut(s![
                nubar * s_blk..(nubar + 1) * s_blk,
                nu * s_blk..(nu + 1) * s_blk
            ])
            .assign(&blk);
    }
    Ok(MixedPropagator {
        t,
        a: spec.a,
        n: spec.n,
        entries,
        block_index,
    })
}

/// t-step propagator for the Shor baker family; each block carries the
/// boundary offset `-nu/A^t` and the accumulated digit-pair phase.
pub fn build_tstep_shor(spec: &QuantizationSpec, t: usize) -> Result<MixedPropagator> {
    if spec.family != Family::ShorBaker {
        return Err(QbakerError::InvalidSpec(
            "shor t-step propagator called with non-Shor family".into(),
        ));
    }
    let (at, s_blk) = tstep_dims(spec, t)?;
    let mut entries = Array2::zeros((spec.n, spec.n));
    let mut block_index = vec![0usize; at];
    for nu in 0..at {
        let nubar = reverse_value(nu, spec.a, t);
        block_index[nu] = nubar;
        let f_small = build_gdft(s_blk, 0.0, -(nu as f64) / at as f64)?;
        let phi = phi_value(nu, spec.a, t);
        let phase = Complex64::from_polar(1.0, -TAU * phi / spec.a as f64)
            * eta_phase(spec, nu, at, t);
        let blk = f_small.entries() * phase;
        entries
            .slice_mut(s![
                nubar * s_blk..(nubar + 1) * s_blk,
                nu * s_blk..(nu + 1) * s_blk
            ])
            .assign(&blk);
    }
    Ok(MixedPropagator {
        t,
        a: spec.a,
        n: spec.n,
        entries,
        block_index,
    })
}

/// One-step coherent-state transport. Applies the quantized map to the
/// torus coherent state at `(q0, p0)` and measures the overlap with the
/// coherent state at the classical image, returning the image point, the
/// overlap magnitude, and the extracted phase.
pub fn coherent_state_step(
    spec: &QuantizationSpec,
    q0: f64,
    p0: f64,
    sigma: f64,
) -> Result<((f64, f64), f64, f64)> {
    spec.validate()?;
    let a = spec.a as f64;
    let min_dist = 3.0 / (a * spec.n as f64).sqrt();
    let cell = q0 * a;
    let nearest = (cell.round() - cell).abs() / a;
    if nearest < min_dist {
        return Err(QbakerError::Precondition(format!(
            "q0 = {q0} within {min_dist:.3e} of a discontinuity"
        )));
    }
    let j = cell.floor() as usize;
    let target = ((a * q0 - j as f64).rem_euclid(1.0), (p0 + j as f64) / a);

    let u = build_map(spec)?;
    let psi = coherent_state(q0, p0, spec.n, spec.theta, sigma)?;
    let evolved = u.entries().dot(&psi);
    // Image state squeezed by the classical stretching factor.
    let img = coherent_state(target.0, target.1, spec.n, spec.theta, sigma / (a * a))?;
    let overlap: Complex64 = img
        .iter()
        .zip(evolved.iter())
        .map(|(t, e)| t.conj() * e)
        .sum();
    Ok((target, overlap.norm(), overlap.arg()))
}
