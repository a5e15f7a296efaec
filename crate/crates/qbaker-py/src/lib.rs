//! Python bindings: quantization specs, spectra, spectral statistics, RMT
//! sampling, orbit sums, and Husimi grids.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qbaker::ergodicity;
use qbaker::linalg::{column, eigendecompose, SpectrumData};
use qbaker::orbit;
use qbaker::phase_space;
use qbaker::quantizer::{self, Family};
use qbaker::rmt::{self, EnsembleKind, EnsembleSpec};
use qbaker::sff;
use qbaker::spectral;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spectrum_of(angles: Vec<f64>) -> SpectrumData {
    let mut angles = angles;
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    SpectrumData {
        angles,
        eigenvectors: None,
    }
}

/// Declarative recipe for one quantized map.
#[pyclass(name = "QuantizationSpec")]
#[derive(Clone)]
struct PyQuantizationSpec {
    inner: quantizer::QuantizationSpec,
}

#[pymethods]
impl PyQuantizationSpec {
    /// Standard quantization of the given family ("bv", "saraceno",
    /// "generic", "shor") with the family's theta and phaseless alpha.
    #[staticmethod]
    fn standard(family: &str, a: usize, n: usize) -> PyResult<Self> {
        let family: Family = family.parse().map_err(err)?;
        Ok(Self {
            inner: quantizer::QuantizationSpec::standard(family, a, n),
        })
    }

    /// Generic-family quantization with explicit GDFT offsets.
    #[staticmethod]
    fn generic(a: usize, n: usize, theta: (f64, f64)) -> Self {
        Self {
            inner: quantizer::QuantizationSpec::generic(a, n, theta),
        }
    }

    fn with_alpha(&self, alpha: Vec<f64>) -> Self {
        Self {
            inner: self.inner.clone().with_alpha(alpha),
        }
    }

    fn with_random_alpha(&self, seed: u64) -> Self {
        Self {
            inner: self.inner.clone().with_random_alpha(seed),
        }
    }

    #[getter]
    fn family(&self) -> String {
        self.inner.family.label().to_string()
    }

    #[getter]
    fn a(&self) -> usize {
        self.inner.a
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn theta(&self) -> (f64, f64) {
        self.inner.theta
    }

    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.inner.alpha.clone()
    }

    fn cache_key(&self) -> String {
        self.inner.cache_key()
    }

    fn __repr__(&self) -> String {
        format!(
            "QuantizationSpec(family={:?}, a={}, n={}, theta={:?})",
            self.inner.family.label(),
            self.inner.a,
            self.inner.n,
            self.inner.theta
        )
    }
}

/// Position-basis unitary as a flat row-major list of (re, im) pairs.
#[pyfunction]
fn build_map(spec: &PyQuantizationSpec) -> PyResult<Vec<(f64, f64)>> {
    let u = quantizer::build_map(&spec.inner).map_err(err)?;
    Ok(u.entries().iter().map(|z| (z.re, z.im)).collect())
}

/// Frobenius deviation of U^dagger U from the identity.
#[pyfunction]
fn unitarity_defect(spec: &PyQuantizationSpec) -> PyResult<f64> {
    Ok(quantizer::build_map(&spec.inner).map_err(err)?.unitarity_defect())
}

/// Sorted eigenangles in [0, 2 pi).
#[pyfunction]
fn spectrum(spec: &PyQuantizationSpec) -> PyResult<Vec<f64>> {
    let u = quantizer::build_map(&spec.inner).map_err(err)?;
    Ok(eigendecompose(&u, false).map_err(err)?.angles)
}

/// Mean cyclic gap ratio of a list of eigenangles.
#[pyfunction]
fn gap_ratio(angles: Vec<f64>) -> PyResult<f64> {
    let s = spectrum_of(angles);
    let sp = spectral::spacings(&s, true).map_err(err)?;
    spectral::mean_gap_ratio(&sp).map_err(err)
}

/// Raw and window-averaged SFF over t = 1..t_max; ell defaults to the
/// N-dependent window.
#[pyfunction]
#[pyo3(signature = (angles, t_max, ell=None))]
fn form_factor(
    angles: Vec<f64>,
    t_max: usize,
    ell: Option<usize>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = spectrum_of(angles);
    let n = s.angles.len();
    let series = sff::sff(&s, t_max).map_err(err)?;
    let averaged =
        sff::average_sff(&series, ell.unwrap_or_else(|| sff::default_ell(n))).map_err(err)?;
    let avg = averaged.averaged.clone().unwrap();
    Ok((averaged.raw, avg))
}

/// Early-time slope of N*SFF vs t: (slope, residual, is_outlier).
#[pyfunction]
#[pyo3(signature = (angles, a, ell=None, fit_points=None, threshold=None))]
fn sff_slope(
    angles: Vec<f64>,
    a: usize,
    ell: Option<usize>,
    fit_points: Option<usize>,
    threshold: Option<f64>,
) -> PyResult<(f64, f64, bool)> {
    let s = spectrum_of(angles);
    let n = s.angles.len();
    let ell = ell.unwrap_or_else(|| sff::default_ell(n));
    let f = fit_points.unwrap_or_else(|| sff::default_fit_points(n));
    let threshold = threshold.unwrap_or_else(|| sff::default_threshold(a));
    let series = sff::sff(&s, f + ell + 5).map_err(err)?;
    let averaged = sff::average_sff(&series, ell).map_err(err)?;
    let fit = sff::fit_slope(&averaged, f, threshold).map_err(err)?;
    Ok((fit.slope, fit.scaled_residual, fit.is_outlier))
}

/// Persistence z^2(t) and the COE reference decay for t = 0..t_max.
#[pyfunction]
#[pyo3(signature = (angles, t_max, c=1.0))]
fn persistence(angles: Vec<f64>, t_max: usize, c: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = spectrum_of(angles);
    let p = ergodicity::persistence(&s, t_max, c).map_err(err)?;
    Ok((p.z2, p.z2_coe_ref))
}

/// Eigenangles of one draw from a circular ensemble: kind is one of
/// "cue", "coe", "2coe", "2cue", "coe-to-cue", "2coe-to-coe",
/// "2coe-to-cue"; t is the geodesic parameter for the interpolations.
#[pyfunction]
#[pyo3(signature = (kind, n, seed, t=0.0))]
fn sample_ensemble(kind: &str, n: usize, seed: u64, t: f64) -> PyResult<Vec<f64>> {
    let kind = match kind.to_ascii_lowercase().as_str() {
        "cue" => EnsembleKind::Cue,
        "coe" => EnsembleKind::Coe,
        "2coe" => EnsembleKind::TwoBlockCoe,
        "2cue" => EnsembleKind::TwoBlockCue,
        "coe-to-cue" => EnsembleKind::InterpCoeToCue,
        "2coe-to-coe" => EnsembleKind::Interp2CoeToCoe,
        "2coe-to-cue" => EnsembleKind::Interp2CoeToCue,
        other => return Err(PyValueError::new_err(format!("unknown ensemble {other:?}"))),
    };
    let u = rmt::sample(&EnsembleSpec {
        kind,
        n,
        t_interp: t,
        seed,
    })
    .map_err(err)?;
    Ok(eigendecompose(&u, false).map_err(err)?.angles)
}

/// Semiclassical orbit-sum approximation to tr U^t, as (re, im).
#[pyfunction]
fn trace_po(family: &str, a: usize, t: usize, n: usize, alpha: Vec<f64>) -> PyResult<(f64, f64)> {
    let family: Family = family.parse().map_err(err)?;
    let tr = orbit::trace_po(family, a, t, n, &alpha).map_err(err)?;
    Ok((tr.value.re, tr.value.im))
}

/// Early-time SFF slope class from the block phases: "four" or "two".
#[pyfunction]
fn slope_class(family: &str, a: usize, alpha: Vec<f64>) -> PyResult<String> {
    let family: Family = family.parse().map_err(err)?;
    Ok(match orbit::slope_class(family, a, &alpha) {
        orbit::SlopeClass::Four => "four".to_string(),
        orbit::SlopeClass::Two => "two".to_string(),
    })
}

/// Diagonal-approximation SFF prediction at time t.
#[pyfunction]
fn diag_sff_prediction(
    family: &str,
    a: usize,
    t: usize,
    n: usize,
    alpha: Vec<f64>,
) -> PyResult<f64> {
    let family: Family = family.parse().map_err(err)?;
    Ok(orbit::diag_sff_prediction(family, a, t, n, &alpha))
}

/// Husimi grid of eigenvector `index`, returned as (resolution, values)
/// with values row-major over (q, p).
#[pyfunction]
#[pyo3(signature = (spec, index, resolution=100, sigma=1.0))]
fn husimi(
    spec: &PyQuantizationSpec,
    index: usize,
    resolution: usize,
    sigma: f64,
) -> PyResult<(usize, Vec<f64>)> {
    let u = quantizer::build_map(&spec.inner).map_err(err)?;
    let s = eigendecompose(&u, true).map_err(err)?;
    if index >= spec.inner.n {
        return Err(PyValueError::new_err(format!(
            "eigenvector index {index} out of range for N = {}",
            spec.inner.n
        )));
    }
    let vec: Vec<Complex64> = column(s.eigenvectors.as_ref().unwrap(), index).to_vec();
    let grid = phase_space::husimi(
        &vec.into(),
        (resolution, resolution),
        spec.inner.theta,
        sigma,
    )
    .map_err(err)?;
    Ok((resolution, grid.values))
}

/// Mean gap ratio reference constants keyed by ensemble name.
#[pyfunction]
fn reference_gap_ratios() -> std::collections::HashMap<String, f64> {
    use qbaker::spectral::reference as r;
    [
        ("goe", r::GOE),
        ("gue", r::GUE),
        ("2goe", r::TWO_BLOCK_GOE),
        ("2gue", r::TWO_BLOCK_GUE),
        ("poisson", r::POISSON),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

#[pymodule]
fn qbaker_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuantizationSpec>()?;
    m.add_function(wrap_pyfunction!(build_map, m)?)?;
    m.add_function(wrap_pyfunction!(unitarity_defect, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(gap_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(form_factor, m)?)?;
    m.add_function(wrap_pyfunction!(sff_slope, m)?)?;
    m.add_function(wrap_pyfunction!(persistence, m)?)?;
    m.add_function(wrap_pyfunction!(sample_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(trace_po, m)?)?;
    m.add_function(wrap_pyfunction!(slope_class, m)?)?;
    m.add_function(wrap_pyfunction!(diag_sff_prediction, m)?)?;
    m.add_function(wrap_pyfunction!(husimi, m)?)?;
    m.add_function(wrap_pyfunction!(reference_gap_ratios, m)?)?;
    Ok(())
}
