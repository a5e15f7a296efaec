//! Diagnostic: Saraceno A=10 per-sector gap ratios vs N, by eigenvector
//! classification and by direct parity-block projection.

use ndarray::Array2;
use num_complex::Complex64;
use qbaker::linalg::{eigendecompose, UnitaryMatrix};
use qbaker::quantizer::{build_map, Family, QuantizationSpec};
use qbaker::spectral::{mean_gap_ratio, spacings};
use qbaker::symmetry::{classify_eigenvectors, reflection_operator, split_statistics};

fn gap_of(angles: Vec<f64>) -> f64 {
    let mut a = angles;
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let s = qbaker::linalg::SpectrumData {
        angles: a,
        eigenvectors: None,
    };
    mean_gap_ratio(&spacings(&s, true).unwrap()).unwrap()
}

fn main() {
    let a = 10usize;
    for n in [950usize, 1000, 1500, 2000, 3000] {
        let spec = QuantizationSpec::standard(Family::Saraceno, a, n);
        let u = build_map(&spec).expect("builder");
        let s = eigendecompose(&u, true).expect("eig");
        let r = reflection_operator(n, 0.5, 0.5).expect("reflection");
        let cls = classify_eigenvectors(&s, &r).expect("classify");
        let split = split_statistics(&s, &[cls.s_plus.clone(), cls.s_minus.clone()]).unwrap();
        println!(
            "N={n}: classify sizes {}/{} mse {:.3e} sector r {:.4}/{:.4}",
            cls.s_plus.len(),
            cls.s_minus.len(),
            cls.mse,
            split[0].1,
            split[1].1
        );

        // independent oracle: project U onto the even/odd parity subspaces of
        // R_N |x> = |N-1-x| and diagonalize the half-size blocks
        let half = n / 2;
        let inv = 1.0 / (2.0f64).sqrt();
        for (label, sign) in [("even", 1.0), ("odd", -1.0)] {
            let mut b = Array2::<Complex64>::zeros((n, half));
            for x in 0..half {
                b[(x, x)] = Complex64::new(inv, 0.0);
                b[(n - 1 - x, x)] = Complex64::new(sign * inv, 0.0);
            }
            let ub = u.entries().dot(&b);
            let mut block = Array2::<Complex64>::zeros((half, half));
            for i in 0..half {
                for j in 0..half {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for x in 0..n {
                        acc += b[(x, i)].conj() * ub[(x, j)];
                    }
                    block[(i, j)] = acc;
                }
            }
            let bu = UnitaryMatrix::new(block).expect("block unitary");
            let defect = bu.unitarity_defect();
            let bs = eigendecompose(&bu, false).expect("block eig");
            println!(
                "  {label}: unitarity defect {defect:.2e} gap ratio {:.4}",
                gap_of(bs.angles)
            );
        }
    }
}
