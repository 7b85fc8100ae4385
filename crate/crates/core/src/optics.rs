//! Optical feedback: transmitted field, mirror round trip, dipole potential.
//!
//! The cloud is a thin phase mask, F_tr = √p₀·exp(−iχ₀n). Free propagation to
//! the mirror and back multiplies each transverse Fourier component by
//! √R·exp(−i(π/2)q̄²): in the e^{i(kz−ωt)} convention a paraxial component picks
//! up −q²z/(2k₀) over a distance z, and the round trip is z = 2d with
//! q_c²d/k₀ = π/2. At q̄ = 1 the factor is −i, which turns a phase grating into
//! an intensity grating that pulls atoms back into the density bump for either
//! sign of the detuning.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::{GridError, SpectralGrid};
use crate::params::SystemParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    #[error("density is negative or not finite at index {index} ({value})")]
    BadDensity { index: usize, value: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Fields at the cloud and the light-shift potential they produce.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalFields {
    /// Forward field just after the cloud.
    pub f_trans: Vec<Complex64>,
    /// Backward field back at the cloud after the mirror round trip.
    pub b_field: Vec<Complex64>,
    /// (Δ/4)(|F|² + |B|²), with |F|² = p₀ exactly.
    pub potential: Vec<f64>,
}

impl OpticalFields {
    pub fn backward_intensity(&self) -> Vec<f64> {
        self.b_field.iter().map(|b| b.norm_sqr()).collect()
    }
}

/// Propagation factor for one mirror round trip (without √R).
pub fn round_trip_phase(q: f64) -> Complex64 {
    Complex64::from_polar(1.0, -FRAC_PI_2 * q * q)
}

fn check_density(density: &[f64]) -> Result<(), OpticsError> {
    if let Some((index, &value)) = density
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
    {
        return Err(OpticsError::BadDensity { index, value });
    }
    Ok(())
}

/// √p₀·exp(−iχ₀n) pointwise.
pub fn transmitted_field(
    density: &[f64],
    params: &SystemParams,
) -> Result<Vec<Complex64>, OpticsError> {
    check_density(density)?;
    let amp = params.p0.sqrt();
    let chi0 = params.chi0();
    Ok(density
        .iter()
        .map(|n| Complex64::from_polar(amp, -chi0 * n))
        .collect())
}

/// B = F⁻¹[√R·exp(−i(π/2)q̄²)·F[F_tr]].
pub fn backward_field(
    f_trans: &[Complex64],
    params: &SystemParams,
    grid: &SpectralGrid,
) -> Result<Vec<Complex64>, GridError> {
    let mut spec = grid.to_spectrum(f_trans)?;
    let sqrt_r = params.mirror_r.sqrt();
    for (s, q) in spec.iter_mut().zip(grid.q_values()) {
        *s *= sqrt_r * round_trip_phase(*q);
    }
    grid.from_spectrum(&spec)
}

/// Intensity of the transmitted forward field after the same 2d of free
/// propagation, i.e. the image of the cloud. Equals |B|²/R whenever R > 0.
pub fn image_plane_intensity(
    f_trans: &[Complex64],
    grid: &SpectralGrid,
) -> Result<Vec<f64>, GridError> {
    let mut spec = grid.to_spectrum(f_trans)?;
    for (s, q) in spec.iter_mut().zip(grid.q_values()) {
        *s *= round_trip_phase(*q);
    }
    Ok(grid
        .from_spectrum(&spec)?
        .iter()
        .map(|v| v.norm_sqr())
        .collect())
}

pub fn dipole_potential(
    density: &[f64],
    params: &SystemParams,
    grid: &SpectralGrid,
) -> Result<OpticalFields, OpticsError> {
    if density.len() != grid.n_points() {
        return Err(GridError::LengthMismatch {
            expected: grid.n_points(),
            got: density.len(),
        }
        .into());
    }
    let f_trans = transmitted_field(density, params)?;
    let b_field = backward_field(&f_trans, params, grid)?;
    let quarter = 0.25 * params.delta;
    let potential = b_field
        .iter()
        .map(|b| quarter * (params.p0 + b.norm_sqr()))
        .collect();
    Ok(OpticalFields {
        f_trans,
        b_field,
        potential,
    })
}

/// Allocation-free evaluator of the self-consistent potential for the
/// propagation loop. Holds the mirror multiplier with the FFT normalisation
/// folded in.
#[derive(Debug, Clone)]
pub(crate) struct FeedbackLoop {
    mirror: Vec<Complex64>,
    field: Vec<Complex64>,
    scratch: Vec<Complex64>,
    amp: f64,
    chi0: f64,
    quarter_delta: f64,
    p0: f64,
}

impl FeedbackLoop {
    pub fn new(params: &SystemParams, grid: &SpectralGrid) -> Self {
        let n = grid.n_points();
        let norm = params.mirror_r.sqrt() / n as f64;
        let mirror = grid
            .q_values()
            .iter()
            .map(|q| norm * round_trip_phase(*q))
            .collect();
        Self {
            mirror,
            field: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); grid.scratch_len()],
            amp: params.p0.sqrt(),
            chi0: params.chi0(),
            quarter_delta: 0.25 * params.delta,
            p0: params.p0,
        }
    }

    /// Fills `potential` with (Δ/4)(p₀ + |B|²) for the density of `psi`.
    /// Leaves B in `self.field`.
    pub fn potential_from_psi(
        &mut self,
        grid: &SpectralGrid,
        psi: &[Complex64],
        potential: &mut [f64],
    ) {
        for (f, p) in self.field.iter_mut().zip(psi) {
            *f = Complex64::from_polar(self.amp, -self.chi0 * p.norm_sqr());
        }
        grid.forward_raw(&mut self.field, &mut self.scratch);
        for (f, m) in self.field.iter_mut().zip(&self.mirror) {
            *f *= m;
        }
        grid.inverse_raw(&mut self.field, &mut self.scratch);
        for (v, b) in potential.iter_mut().zip(&self.field) {
            *v = self.quarter_delta * (self.p0 + b.norm_sqr());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(256, 8.0 * 2.0 * PI).unwrap()
    }

    fn gaussian(grid: &SpectralGrid, c: f64, s: f64, amp: f64) -> Vec<f64> {
        grid.x_values()
            .iter()
            .map(|x| amp * (-(x - c) * (x - c) / (s * s)).exp())
            .collect()
    }

    #[test]
    fn uniform_density_gives_constant_phase() {
        let p = SystemParams::reference();
        let f = transmitted_field(&[1.0; 32], &p).unwrap();
        let expect = Complex64::from_polar(p.p0.sqrt(), 5e-3);
        for v in f {
            assert!((v - expect).norm() < 1e-15 * p.p0.sqrt());
        }
        let f = transmitted_field(&[0.0; 32], &p).unwrap();
        for v in f {
            assert_eq!(v, Complex64::new(p.p0.sqrt(), 0.0));
        }
    }

    #[test]
    fn phase_mask_keeps_intensity() {
        let g = grid();
        let p = SystemParams::reference();
        let n: Vec<f64> = g.x_values().iter().map(|x| 1.0 + 0.1 * x.cos()).collect();
        for v in transmitted_field(&n, &p).unwrap() {
            assert!((v.norm_sqr() - p.p0).abs() <= 1e-12 * p.p0);
        }
    }

    #[test]
    fn negative_density_is_rejected() {
        let p = SystemParams::reference();
        assert_eq!(
            transmitted_field(&[1.0, -0.5, 1.0], &p).unwrap_err(),
            OpticsError::BadDensity {
                index: 1,
                value: -0.5
            }
        );
    }

    #[test]
    fn no_mirror_no_backward_field() {
        let g = grid();
        let p = SystemParams::reference().with_reflectivity(0.0);
        let n = gaussian(&g, 0.0, 0.6, 80.0);
        let fields = dipole_potential(&n, &p, &g).unwrap();
        assert!(fields.b_field.iter().all(|b| b.norm() == 0.0));
        let flat = 0.25 * p.delta * p.p0;
        assert!(fields.potential.iter().all(|v| (v - flat).abs() < 1e-18));
    }

    #[test]
    fn dc_passes_unchanged() {
        let g = grid();
        let p = SystemParams::reference();
        let f = vec![Complex64::from_polar(p.p0.sqrt(), 0.3); g.n_points()];
        let b = backward_field(&f, &p, &g).unwrap();
        for (bv, fv) in b.iter().zip(&f) {
            assert!((bv - p.mirror_r.sqrt() * fv).norm() < 1e-12 * p.p0.sqrt());
        }
        let fields = dipole_potential(&vec![1.0; g.n_points()], &p, &g).unwrap();
        let flat = 0.25 * p.delta * p.p0 * 1.99;
        for v in &fields.potential {
            assert!((v - flat).abs() < 1e-12 * flat.abs());
        }
    }

    #[test]
    fn backward_power_is_r_times_pump() {
        let g = grid();
        let p = SystemParams::reference();
        let n = gaussian(&g, 1.3, 0.5, 90.0);
        let fields = dipole_potential(&n, &p, &g).unwrap();
        let mean = fields.backward_intensity().iter().sum::<f64>() / g.n_points() as f64;
        assert!((mean - p.mirror_r * p.p0).abs() <= 1e-12 * p.mirror_r * p.p0);
    }

    #[test]
    fn small_phase_grating_converts_to_amplitude() {
        // F = e^{iε cos x}: to first order B ∝ 1 + iε·(−i)cos x, so
        // |B|² = R(1 + 2ε cos x) + O(ε²).
        let g = SpectralGrid::new(64, 2.0 * PI).unwrap();
        let p = SystemParams::reference()
            .with_pump(1.0)
            .with_reflectivity(0.81);
        let eps = 1e-4;
        let f: Vec<_> = g
            .x_values()
            .iter()
            .map(|x| Complex64::from_polar(1.0, eps * x.cos()))
            .collect();
        let b = backward_field(&f, &p, &g).unwrap();
        for (bv, x) in b.iter().zip(g.x_values()) {
            let first_order = 0.81 * (1.0 + 2.0 * eps * x.cos());
            assert!((bv.norm_sqr() - first_order).abs() < 4.0 * eps * eps);
        }
    }

    #[test]
    fn red_detuned_potential_well_sits_on_density_peak() {
        let g = grid();
        let p = SystemParams::reference();
        let n = gaussian(&g, 0.0, 0.56, 80.0);
        let v = dipole_potential(&n, &p, &g).unwrap().potential;
        let peak = (0..g.n_points())
            .max_by(|&a, &b| n[a].total_cmp(&n[b]))
            .unwrap();
        // Side lobes of the diffraction pattern can be deeper, so compare
        // against the nearest local minimum.
        let nearest = (1..g.n_points() - 1)
            .filter(|&j| v[j] < v[j - 1] && v[j] <= v[j + 1])
            .min_by_key(|&j| j.abs_diff(peak))
            .unwrap();
        assert!(nearest.abs_diff(peak) <= 1);
    }

    #[test]
    fn feedback_is_attractive_for_both_detunings() {
        // Small q̄=1 bump on the homogeneous state: the potential must be
        // deepest where the bump is.
        let g = SpectralGrid::new(64, 2.0 * PI).unwrap();
        let eps = 1e-3;
        let n: Vec<f64> = g.x_values().iter().map(|x| 1.0 + eps * x.cos()).collect();
        for delta in [-1e4, 1e4] {
            let p = SystemParams::reference().with_detuning(delta);
            let v = dipole_potential(&n, &p, &g).unwrap().potential;
            let at_bump = v[32]; // x = 0
            let opposite = v[0]; // x = −π
            assert!(at_bump < opposite, "delta = {delta}");
            // Linear response: δV = −(b₀Rp₀/4)·ε·cos x.
            let expected = -p.b0 * p.mirror_r * p.p0 / 4.0 * eps * 2.0;
            assert!(((at_bump - opposite) - expected).abs() < 1e-2 * expected.abs());
            let b2 = dipole_potential(&n, &p, &g).unwrap().backward_intensity();
            if delta < 0.0 {
                assert!(b2[32] > b2[0]);
            } else {
                assert!(b2[32] < b2[0]);
            }
        }
    }

    #[test]
    fn loop_matches_reference_path() {
        let g = grid();
        let p = SystemParams::reference();
        let n = gaussian(&g, -2.0, 0.7, 60.0);
        let psi: Vec<_> = n.iter().map(|v| Complex64::new(v.sqrt(), 0.0)).collect();
        let mut lp = FeedbackLoop::new(&p, &g);
        let mut v = vec![0.0; g.n_points()];
        lp.potential_from_psi(&g, &psi, &mut v);
        let reference = dipole_potential(&n, &p, &g).unwrap().potential;
        for (a, b) in v.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-13 * b.abs());
        }
    }

    #[test]
    fn image_plane_is_backward_over_r() {
        let g = grid();
        let p = SystemParams::reference();
        let n = gaussian(&g, 0.4, 0.6, 70.0);
        let fields = dipole_potential(&n, &p, &g).unwrap();
        let img = image_plane_intensity(&fields.f_trans, &g).unwrap();
        for (i, b) in img.iter().zip(fields.backward_intensity()) {
            assert!((i * p.mirror_r - b).abs() < 1e-12 * p.p0);
        }
    }
}
