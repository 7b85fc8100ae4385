use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use smf_droplet::SpectralGrid;

/// Unitary DFT by direct summation.
fn naive_dft(f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            f.iter()
                .enumerate()
                .map(|(j, v)| {
                    let arg = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    v * Complex64::from_polar(s, arg)
                })
                .sum()
        })
        .collect()
}

fn field(values: &[(f64, f64)]) -> Vec<Complex64> {
    values.iter().map(|&(a, b)| Complex64::new(a, b)).collect()
}

fn arb_field() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (16usize..=256).prop_flat_map(|n| prop::collection::vec((-10.0..10.0, -10.0..10.0), n))
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn round_trip_restores_field(values in arb_field(), length in 0.5f64..200.0) {
        let f = field(&values);
        let g = SpectralGrid::new(f.len(), length).unwrap();
        let back = g.from_spectrum(&g.to_spectrum(&f).unwrap()).unwrap();
        let scale = f.iter().fold(1.0f64, |m, v| m.max(v.norm()));
        for (a, b) in f.iter().zip(&back) {
            prop_assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn matches_direct_summation_and_parseval(values in arb_field()) {
        let f = field(&values);
        let g = SpectralGrid::new(f.len(), 2.0 * PI).unwrap();
        let fast = g.to_spectrum(&f).unwrap();
        let slow = naive_dft(&f);
        let scale = f.iter().map(|v| v.norm()).sum::<f64>().max(1.0);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).norm() <= 1e-10 * scale);
        }
        let e_x: f64 = f.iter().map(|v| v.norm_sqr()).sum();
        let e_q: f64 = fast.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((e_x - e_q).abs() <= 1e-10 * e_x.max(1.0));
    }
}

#[test]
fn spectral_second_derivative_is_exact_for_resolved_modes() {
    let g = SpectralGrid::new(128, 4.0 * 2.0 * PI).unwrap();
    for k in [0.25, 1.0, 3.5, 15.75] {
        let f: Vec<Complex64> = g
            .x_values()
            .iter()
            .map(|x| Complex64::new((k * x).sin(), 0.0))
            .collect();
        let mut s = g.to_spectrum(&f).unwrap();
        for (v, q) in s.iter_mut().zip(g.q_values()) {
            *v *= -q * q;
        }
        let d2 = g.from_spectrum(&s).unwrap();
        for (d, x) in d2.iter().zip(g.x_values()) {
            assert!((d.re + k * k * (k * x).sin()).abs() < 1e-10 * k * k);
            assert!(d.im.abs() < 1e-10 * k * k);
        }
    }
}
