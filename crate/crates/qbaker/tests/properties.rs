//! Randomized property checks for the spec-level invariants.

use std::f64::consts::PI;

use proptest::prelude::*;
use qbaker::ergodicity::persistence;
use qbaker::linalg::{build_gdft, SpectrumData};
use qbaker::sff::{average_sff, sff, SffSeries};
use qbaker::spectral::{mean_gap_ratio, spacings};

fn spectrum(mut angles: Vec<f64>) -> SpectrumData {
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    SpectrumData {
        angles,
        eigenvectors: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gdft_is_unitary(n in 2usize..40, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let f = build_gdft(n, t1, t2).unwrap();
        prop_assert!(f.unitarity_defect() < 1e-10 * n as f64);
    }

    #[test]
    fn spacings_close_the_circle(
        angles in prop::collection::vec(0.0f64..(2.0 * PI), 4..60)
    ) {
        let sp = spacings(&spectrum(angles), false).unwrap();
        let total: f64 = sp.spacings.iter().sum();
        prop_assert!((total - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn gap_ratio_rotation_invariant(
        angles in prop::collection::vec(0.0f64..(2.0 * PI), 5..50),
        shift in 0.0f64..(2.0 * PI)
    ) {
        let base = spectrum(angles.clone());
        let rotated = spectrum(
            angles.iter().map(|a| (a + shift) % (2.0 * PI)).collect(),
        );
        let r0 = mean_gap_ratio(&spacings(&base, true).unwrap()).unwrap();
        let r1 = mean_gap_ratio(&spacings(&rotated, true).unwrap()).unwrap();
        prop_assert!((r0 - r1).abs() < 1e-9);
    }

    #[test]
    fn raw_sff_rotation_invariant(
        angles in prop::collection::vec(0.0f64..(2.0 * PI), 3..40),
        shift in 0.0f64..(2.0 * PI)
    ) {
        let a = sff(&spectrum(angles.clone()), 15).unwrap();
        let b = sff(
            &spectrum(angles.iter().map(|x| x + shift).collect()),
            15,
        )
        .unwrap();
        for (x, y) in a.raw.iter().zip(&b.raw) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn averaging_commutes_with_constants(
        raw in prop::collection::vec(0.0f64..10.0, 10..60),
        c in -5.0f64..5.0,
        ell in 1usize..8
    ) {
        let t_max = raw.len();
        let mk = |r: Vec<f64>| SffSeries {
            n: 16,
            times: (1..=t_max).collect(),
            raw: r,
            averaged: None,
            ell: None,
        };
        let a = average_sff(&mk(raw.clone()), ell).unwrap().averaged.unwrap();
        let shifted: Vec<f64> = raw.iter().map(|x| x + c).collect();
        let b = average_sff(&mk(shifted), ell).unwrap().averaged.unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x + c - y).abs() < 1e-10);
        }
    }

    #[test]
    fn persistence_rotation_invariant(
        angles in prop::collection::vec(0.0f64..(2.0 * PI), 8..40),
        shift in 0.0f64..1.0
    ) {
        let p0 = persistence(&spectrum(angles.clone()), 10, 1.0).unwrap();
        let p1 = persistence(
            &spectrum(angles.iter().map(|a| a + shift).collect()),
            10,
            1.0,
        )
        .unwrap();
        for (a, b) in p0.z2.iter().zip(&p1.z2) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }
}
