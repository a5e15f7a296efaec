//! Diagnostic: phaseless A=10 early-time slopes away from N = 10^3 and at
//! larger N, to separate finite-size bias from the power-of-A anomaly.

use qbaker::linalg::eigendecompose;
use qbaker::quantizer::{build_map, Family, QuantizationSpec};
use qbaker::sff::{average_sff, default_ell, default_fit_points, default_threshold, fit_slope, sff};

fn main() {
    for family in [Family::ShorBaker, Family::BalazsVoros, Family::Generic] {
        for base in [1200usize, 2000, 3000] {
            print!("{family:?} N~{base}:");
            for k in 0..4usize {
                let n = base + 10 * k;
                let spec = if family == Family::Generic {
                    QuantizationSpec::generic(10, n, (0.2, 0.7))
                } else {
                    QuantizationSpec::standard(family, 10, n)
                };
                let u = build_map(&spec).unwrap();
                let s = eigendecompose(&u, false).unwrap();
                let ell = default_ell(n);
                let f = default_fit_points(n);
                let series = average_sff(&sff(&s, f + ell + 5).unwrap(), ell).unwrap();
                let fit = fit_slope(&series, f, default_threshold(10)).unwrap();
                print!(" ({:.2}, {:.0})", fit.slope, fit.scaled_residual);
            }
            println!();
        }
    }
}
