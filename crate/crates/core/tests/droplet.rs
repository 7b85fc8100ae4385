use std::f64::consts::PI;

use proptest::prelude::*;
use smf_droplet::analysis::{
    bracket_threshold, critical_wavenumber, fit_gaussian, heating_budget, predicted_width,
    pump_threshold, threshold_scan, ScanConfig,
};
use smf_droplet::dynamics::{
    density_contrast, evolve, imaginary_time_ground_state, DynamicsError, EvolutionConfig,
    GroundStateConfig,
};
use smf_droplet::{
    Normalization, PhysicalAnchors, SpectralGrid, SystemParams, UnitConverter, Wavefunction,
};

/// (b₀Rp₀/2ω̄_r)^(−1/4), written out from the threshold definition.
fn width_oracle(p: &SystemParams) -> f64 {
    (p.b0 * p.mirror_r * p.p0 / (2.0 * p.omega_r_bar)).powf(-0.25)
}

fn relaxed_width(params: &SystemParams) -> (Wavefunction, f64) {
    let grid = SpectralGrid::reference();
    let seed = Wavefunction::gaussian(&grid, 0.0, 0.6, Normalization::droplet());
    let gs =
        imaginary_time_ground_state(&seed, params, &grid, &GroundStateConfig::default()).unwrap();
    let w = fit_gaussian(&gs.state.density(), &grid).unwrap().width;
    (gs.state, w)
}

#[test]
fn reference_droplet_width() {
    let p = SystemParams::reference();
    let (_, w) = relaxed_width(&p);
    assert!((w - 0.562).abs() <= 0.1 * 0.562, "width {w}");
    let predicted = width_oracle(&p);
    assert!(
        (w - predicted).abs() <= 0.05 * predicted,
        "{w} vs {predicted}"
    );
}

#[test]
fn blue_detuned_and_strongly_pumped_widths() {
    let blue = SystemParams::reference().with_detuning(1e4);
    let (_, w) = relaxed_width(&blue);
    assert!(
        (w - width_oracle(&blue)).abs() <= 0.05 * width_oracle(&blue),
        "{w}"
    );

    let p_th = pump_threshold(&SystemParams::reference()).unwrap();
    let strong = SystemParams::reference().with_pump(16.0 * p_th);
    let (_, w) = relaxed_width(&strong);
    assert!((w - 0.5).abs() <= 0.1 * 0.5, "{w}");
}

#[test]
fn relaxed_droplet_is_stationary_in_real_time() {
    let p = SystemParams::reference();
    let (state, w0) = relaxed_width(&p);
    let grid = SpectralGrid::reference();
    let cfg = EvolutionConfig {
        dt: 1.0,
        t_final: 1e4,
        snapshot_stride: 1000,
        ..Default::default()
    };
    let (evo, _) = evolve(&state, &p, &grid, &cfg).unwrap();
    for w in &evo.record.widths {
        assert!((w - w0).abs() < 0.02 * w0);
    }
}

#[test]
fn below_threshold_relaxes_to_homogeneous() {
    let grid = SpectralGrid::reference();
    let p_th = pump_threshold(&SystemParams::reference()).unwrap();
    let p = SystemParams::reference().with_pump(0.5 * p_th);
    let density: Vec<f64> = grid
        .x_values()
        .iter()
        .map(|x| 1.0 + 0.2 * x.cos())
        .collect();
    let seed = Wavefunction::from_density(&grid, &density, Normalization::MeanDensityOne);
    let cfg = GroundStateConfig {
        dt: 20.0,
        tol: 1e-8,
        max_steps: 100_000,
        ..Default::default()
    };
    match imaginary_time_ground_state(&seed, &p, &grid, &cfg) {
        Err(DynamicsError::NoDroplet { contrast }) => assert!(contrast < 0.05),
        other => panic!("expected no droplet, got {other:?}"),
    }
    assert!(density_contrast(&density) > 0.3);
}

#[test]
fn threshold_scan_brackets_the_threshold() {
    let base = SystemParams::reference();
    let p_th = pump_threshold(&base).unwrap();
    let grid = SpectralGrid::new(128, 4.0 * 2.0 * PI).unwrap();
    let ratios = [0.25, 0.5, 0.8, 0.9, 1.1, 1.25, 2.0, 4.0];
    let p0s: Vec<f64> = ratios.iter().map(|r| r * p_th).collect();
    let points = threshold_scan(&base, &p0s, &grid, &ScanConfig::default()).unwrap();
    let (lo, hi) = bracket_threshold(&points).unwrap();
    assert!(lo >= 0.8 * p_th && hi <= 1.25 * p_th, "{lo} {hi}");
    for pt in &points {
        assert_eq!(pt.growing, pt.pump_ratio > 1.0, "{pt:?}");
        if pt.pump_ratio >= 2.0 {
            let rel = pt.growth_rate / pt.predicted_rate;
            assert!((0.75..1.1).contains(&rel), "{pt:?}");
        }
    }
}

#[test]
fn reference_heating_budget() {
    let h = heating_budget(&SystemParams::reference());
    assert!((h.t_limit - 4.4e5).abs() <= 0.01 * 4.4e5);
    assert!(h.allows(3e5));
}

#[test]
fn critical_wavenumber_examples() {
    let mut a = PhysicalAnchors::cesium(100e-6);
    a.lambda0 = 852e-9;
    let (q, l) = critical_wavenumber(&a).unwrap();
    assert!((q - 3.40e5).abs() < 0.01 * 3.40e5);
    assert!((l - 18.5e-6).abs() < 0.01 * 18.5e-6);
    a.mirror_distance *= 4.0;
    let (q4, l4) = critical_wavenumber(&a).unwrap();
    assert!((q4 - 0.5 * q).abs() < 1e-9 * q);
    assert!((l4 - 2.0 * l).abs() < 1e-9 * l);
    a.mirror_distance = 8e-6;
    let (_, l) = critical_wavenumber(&a).unwrap();
    assert!((l - 5.2e-6).abs() < 0.01 * 5.2e-6);
}

#[test]
fn reference_run_in_laboratory_units() {
    let units = UnitConverter::new(&PhysicalAnchors::cesium(7.38e-6)).unwrap();
    assert!(units.inconsistency(&SystemParams::reference()).is_none());
    let x = units.length_m(1.14e-5 * 1e-5 * 9e10);
    let t = units.time_s(3e5);
    let a = units.accel_si(1e-5);
    assert!((5e-6..20e-6).contains(&x), "{x}");
    assert!((0.005..0.02).contains(&t), "{t}");
    assert!((0.15..0.25).contains(&a), "{a}");
    assert!((units.length_m(2.0 * PI) - 2.0 * PI / units.q_c).abs() < 1e-18);
    let far = UnitConverter::new(&PhysicalAnchors::cesium(100e-6)).unwrap();
    assert!(far.inconsistency(&SystemParams::reference()).is_some());
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn width_prediction_identity(ratio in 1.0f64..1e3, b0 in 1.0f64..1e3, r in 0.05f64..1.0) {
        let mut p = SystemParams::reference();
        p.b0 = b0;
        p.mirror_r = r;
        p.p0 = ratio * pump_threshold(&p).unwrap();
        let w = predicted_width(&p).unwrap();
        prop_assert!((w.width.powi(4) * w.pump_ratio - 1.0).abs() < 1e-12);
        prop_assert!((w.width - width_oracle(&p)).abs() < 1e-12);
    }

    #[test]
    fn fit_is_translation_equivariant(shift in -200i64..200, c in -0.5f64..0.5, s in 0.3f64..2.0) {
        let grid = SpectralGrid::reference();
        let base: Vec<f64> = grid
            .x_values()
            .iter()
            .map(|x| 3.0 * (-((x - c) / s).powi(2)).exp())
            .collect();
        let n = base.len() as i64;
        let shifted: Vec<f64> = (0..n)
            .map(|j| base[(j - shift).rem_euclid(n) as usize])
            .collect();
        let a = fit_gaussian(&base, &grid).unwrap();
        let b = fit_gaussian(&shifted, &grid).unwrap();
        prop_assert!((b.center - a.center - shift as f64 * grid.dx()).abs() < 1e-9);
        prop_assert!((b.width - a.width).abs() < 1e-9);
    }

    #[test]
    fn unit_conversion_round_trips(d in 5e-6f64..150e-6, x in -50.0f64..50.0, t in 0.0f64..1e6, a in -1e-3f64..1e-3) {
        let u = UnitConverter::new(&PhysicalAnchors::cesium(d)).unwrap();
        prop_assert!((u.length_bar(u.length_m(x)) - x).abs() <= 1e-12 * x.abs().max(1.0));
        prop_assert!((u.time_bar(u.time_s(t)) - t).abs() <= 1e-12 * t.max(1.0));
        prop_assert!((u.accel_bar(u.accel_si(a)) - a).abs() <= 1e-12 * a.abs().max(1e-12));
    }
}
