//! Symbolic dynamics of the base-A shift and the analytic periodic-orbit
//! machinery: actions, trace-formula sums, diagonal-approximation SFF
//! predictions, and the slope-phase classifier.
//!
//! Actions and digit phases are kept as exact rationals until the final
//! phase evaluation; `N * S_nu mod 1` is precision-critical at large `N`.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{QbakerError, Result};
use crate::linalg::TAU;
use crate::quantizer::Family;

/// Enumeration guard: orbit sums stream over all A^t codes.
pub const MAX_CODES: u64 = 1 << 26;

/// Length-t base-A code for one fixed point of the t-step shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitCode {
    pub nu: u64,
    pub a: u32,
    pub t: u32,
    pub digits: Vec<u32>,
}

impl OrbitCode {
    pub fn new(nu: u64, a: u32, t: u32) -> Result<Self> {
        if a < 2 {
            return Err(QbakerError::InvalidSpec(format!("base {a} < 2")));
        }
        let span = (a as u64)
            .checked_pow(t)
            .ok_or_else(|| QbakerError::InvalidSpec("A^t overflow".into()))?;
        if nu >= span {
            return Err(QbakerError::InvalidSpec(format!(
                "nu = {nu} out of range for A^t = {span}"
            )));
        }
        let digits = digits_of(nu as usize, a as usize, t as usize)
            .into_iter()
            .map(|d| d as u32)
            .collect();
        Ok(Self { nu, a, t, digits })
    }

    /// Digit reversal a_1..a_t -> a_t..a_1.
    pub fn reversal(&self) -> OrbitCode {
        let mut digits = self.digits.clone();
        digits.reverse();
        let nu = value_of(&digits, self.a as u64);
        OrbitCode {
            nu,
            a: self.a,
            t: self.t,
            digits,
        }
    }

    /// Base-A reflection R(nu) = A^t - 1 - nu (digitwise a_j -> A-1-a_j).
    pub fn reflect(&self) -> OrbitCode {
        let digits: Vec<u32> = self.digits.iter().map(|&d| self.a - 1 - d).collect();
        let nu = value_of(&digits, self.a as u64);
        OrbitCode {
            nu,
            a: self.a,
            t: self.t,
            digits,
        }
    }

    /// One-step cyclic rotation a_1..a_t -> a_2..a_t a_1.
    pub fn rotate(&self) -> OrbitCode {
        let mut digits = self.digits.clone();
        digits.rotate_left(1);
        let nu = value_of(&digits, self.a as u64);
        OrbitCode {
            nu,
            a: self.a,
            t: self.t,
            digits,
        }
    }

    /// Per-symbol digit counts eta_0..eta_{A-1}.
    pub fn digit_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.a as usize];
        for &d in &self.digits {
            counts[d as usize] += 1;
        }
        counts
    }

    /// Classical action S_nu = nu * rev(nu) / (A^t - 1), exact.
    pub fn action(&self) -> Ratio<i128> {
        let span = (self.a as i128).pow(self.t);
        Ratio::new(self.nu as i128 * self.reversal().nu as i128, span - 1)
    }

    /// phi(nu) = -sum_{j=2}^t a_j sum_{i<j} a_i A^{i-j}, exact with
    /// denominator A^{t-1}.
    pub fn phi(&self) -> Ratio<i128> {
        Ratio::new(phi_numerator(&self.digits, self.a as i128), (self.a as i128).pow(self.t - 1))
    }

    /// True if the code is a repetition of a strictly shorter string.
    pub fn is_repetition(&self) -> bool {
        let t = self.t as usize;
        (1..t)
            .filter(|d| t % d == 0)
            .any(|d| (0..t).all(|i| self.digits[i] == self.digits[i % d]))
    }

    /// True if the symmetry quadruple {nu, rev, R(nu), R(rev)} has
    /// duplicates.
    pub fn quadruple_degenerate(&self) -> bool {
        let vals = [
            self.nu,
            self.reversal().nu,
            self.reflect().nu,
            self.reflect().reversal().nu,
        ];
        for i in 0..4 {
            for j in i + 1..4 {
                if vals[i] == vals[j] {
                    return true;
                }
            }
        }
        false
    }
}

/// Most-significant-first base-a digits, fixed width t.
pub fn digits_of(nu: usize, a: usize, t: usize) -> Vec<u32> {
    let mut digits = vec![0u32; t];
    let mut v = nu;
    for j in (0..t).rev() {
        digits[j] = (v % a) as u32;
        v /= a;
    }
    digits
}

pub fn value_of(digits: &[u32], a: u64) -> u64 {
    digits.iter().fold(0u64, |acc, &d| acc * a + d as u64)
}

pub fn digit_counts(digits: &[u32], a: usize) -> Vec<usize> {
    let mut counts = vec![0usize; a];
    for &d in digits {
        counts[d as usize] += 1;
    }
    counts
}

/// Digit-reversed value, fixed width t.
pub fn reverse_value(nu: usize, a: usize, t: usize) -> usize {
    let mut v = nu;
    let mut out = 0usize;
    for _ in 0..t {
        out = out * a + v % a;
        v /= a;
    }
    out
}

fn phi_numerator(digits: &[u32], a: i128) -> i128 {
    // -sum_{j=2}^t a_j sum_{i=1}^{j-1} a_i A^{-j+i}, scaled by A^{t-1}.
    let t = digits.len();
    let mut num = 0i128;
    for j in 2..=t {
        for i in 1..j {
            // exponent of A after scaling: t-1-j+i >= 0
            let p = (t - 1 + i - j) as u32;
            num -= digits[j - 1] as i128 * digits[i - 1] as i128 * a.pow(p);
        }
    }
    num
}

/// phi(nu) as a float (for propagator phases).
pub fn phi_value(nu: usize, a: usize, t: usize) -> f64 {
    let digits = digits_of(nu, a, t);
    let num = phi_numerator(&digits, a as i128);
    num as f64 / (a as i128).pow(t as u32 - 1) as f64
}

/// Periodic-orbit sum approximating `tr U^t`.
#[derive(Debug, Clone)]
pub struct TraceApproximation {
    pub t: usize,
    pub value: Complex64,
    pub family: Family,
    pub a: usize,
    pub n: usize,
}

/// Semiclassical trace sum over all length-t codes.
pub fn trace_po(
    family: Family,
    a: usize,
    t: usize,
    n: usize,
    alpha: &[f64],
) -> Result<TraceApproximation> {
    if alpha.len() != a {
        return Err(QbakerError::InvalidSpec(format!(
            "alpha length {} != A = {a}",
            alpha.len()
        )));
    }
    let span = (a as u64)
        .checked_pow(t as u32)
        .filter(|&s| s <= MAX_CODES)
        .ok_or_else(|| QbakerError::InvalidSpec(format!("A^t exceeds enumeration cap {MAX_CODES}")))?;
    let amp = (a as f64).powf(-(t as f64) / 2.0);
    let denom = span as i128 - 1;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut counts = vec![0usize; a];
    for nu in 0..span as usize {
        let nubar = reverse_value(nu, a, t) as i128;
        // N * S_nu mod 1, exact integer arithmetic before the division
        let frac = (n as i128 * nu as i128 * nubar).rem_euclid(denom) as f64 / denom as f64;
        let digits = digits_of(nu, a, t);
        counts.iter_mut().for_each(|c| *c = 0);
        for &d in &digits {
            counts[d as usize] += 1;
        }
        let mut phase = frac
            + counts
                .iter()
                .enumerate()
                .map(|(j, &c)| alpha[j] * c as f64)
                .sum::<f64>();
        if family == Family::ShorBaker {
            // e^{2pi i nu nubar / (A^t (A^t-1))} e^{-2pi i phi(nu)/A}
            phase += nu as f64 * nubar as f64 / (span as f64 * (span - 1) as f64);
            let phi_num = phi_numerator(&digits, a as i128);
            // phi/A has denominator A^t; reduce mod 1 exactly
            let red = phi_num.rem_euclid(span as i128);
            phase -= red as f64 / span as f64;
        }
        acc += Complex64::from_polar(amp, TAU * phase);
    }
    Ok(TraceApproximation {
        t,
        value: acc,
        family,
        a,
        n,
    })
}

/// Diagonal-approximation SFF prediction at time t.
pub fn diag_sff_prediction(family: Family, a: usize, t: usize, n: usize, alpha: &[f64]) -> f64 {
    let base = 2.0 * t as f64 / n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..a {
        let mut ph = alpha[j] - alpha[a - 1 - j];
        if family == Family::ShorBaker {
            ph += 2.0 * j as f64 / a as f64;
        }
        sum += Complex64::from_polar(1.0, TAU * ph);
    }
    let mut second = sum.powu(t as u32) / (a as f64).powi(t as i32);
    if family == Family::ShorBaker {
        second *= Complex64::from_polar(1.0, TAU * t as f64 / a as f64);
    }
    base + base * second.re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlopeClass {
    Four,
    Two,
}

fn mod1_dist(x: f64) -> f64 {
    let f = x.rem_euclid(1.0);
    f.min(1.0 - f)
}

/// Early-time SFF slope class from the block phases alone.
pub fn slope_class(family: Family, a: usize, alpha: &[f64]) -> SlopeClass {
    let tol = 1e-9;
    let four = (0..a).all(|j| {
        let want = match family {
            Family::ShorBaker => alpha[j] + (2 * j + 1) as f64 / a as f64,
            _ => alpha[j],
        };
        mod1_dist(alpha[a - 1 - j] - want) < tol
    });
    if four {
        SlopeClass::Four
    } else {
        SlopeClass::Two
    }
}
