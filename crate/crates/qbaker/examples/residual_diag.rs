//! Diagnostic: slopes, scaled residuals, and outlier counts for the slope
//! dichotomy cells at desk scale.

use qbaker::linalg::eigendecompose;
use qbaker::quantizer::{build_map, Family, QuantizationSpec};
use qbaker::rmt::{sample, EnsembleKind, EnsembleSpec};
use qbaker::sff::{
    average_sff, default_ell, default_fit_points, default_threshold, fit_slope, sff, slope_scan,
};

fn desk_ns(a: usize) -> Vec<usize> {
    let step = a * (10 / a).max(1);
    let base = (1000 / a) * a;
    (0..10).map(|k| base + step * k - 5 * step).collect()
}

fn main() {
    let n = 1000usize;
    let ell = default_ell(n);
    let f = default_fit_points(n);
    for kind in [EnsembleKind::TwoBlockCoe, EnsembleKind::Coe] {
        print!("{kind:?}:");
        for seed in 0..10u64 {
            let u = sample(&EnsembleSpec {
                kind,
                n,
                seed,
                t_interp: 0.0,
            })
            .unwrap();
            let s = eigendecompose(&u, false).unwrap();
            let series = average_sff(&sff(&s, f + ell + 5).unwrap(), ell).unwrap();
            let fit = fit_slope(&series, f, 100.0).unwrap();
            print!(" ({:.2}, {:.1})", fit.slope, fit.scaled_residual);
        }
        println!();
    }

    let mut seed = 7000u64;
    for random_alpha in [false, true] {
        for a in [2usize, 10] {
            for family in [
                Family::BalazsVoros,
                Family::Saraceno,
                Family::Generic,
                Family::ShorBaker,
            ] {
                let mut rows = Vec::new();
                for n in desk_ns(a) {
                    let mut spec = if family == Family::Generic {
                        QuantizationSpec::generic(a, n, (0.2, 0.7))
                    } else {
                        QuantizationSpec::standard(family, a, n)
                    };
                    if random_alpha {
                        spec = spec.with_random_alpha(seed);
                        seed += 1;
                    }
                    let u = build_map(&spec).unwrap();
                    let s = eigendecompose(&u, false).unwrap();
                    let ell = default_ell(n);
                    let f = default_fit_points(n);
                    let series = average_sff(&sff(&s, f + ell + 5).unwrap(), ell).unwrap();
                    rows.push((n, fit_slope(&series, f, default_threshold(a)).unwrap()));
                }
                print!(
                    "{:?} A={a} {}:",
                    family,
                    if random_alpha { "rand" } else { "phaseless" }
                );
                for row in slope_scan(&rows).unwrap() {
                    if row.is_outlier {
                        print!(" [out {:.0}]", row.scaled_residual);
                    } else {
                        print!(" {:.2}", row.smoothed_slope.unwrap_or(row.slope));
                    }
                }
                println!();
            }
        }
    }
}
