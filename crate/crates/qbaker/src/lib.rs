//! Quantized A-baker's maps and their spectral statistics: map builders for
//! the standard quantization families, circular-ensemble references,
//! level-spacing and form-factor analysis, periodic-orbit predictions,
//! symmetry probes, ergodicity diagnostics, and phase-space visualization
//! data.

pub mod error;
pub mod linalg;
pub mod quantizer;
pub mod rmt;
pub mod spectral;
pub mod sff;
pub mod orbit;
pub mod symmetry;
pub mod ergodicity;
pub mod phase_space;

pub use error::{QbakerError, Result};
pub use linalg::{SpectrumData, UnitaryMatrix};
pub use quantizer::{Family, QuantizationSpec};
