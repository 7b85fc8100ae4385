//! Droplet characterisation, analytic predictions and unit conversion.

use std::f64::consts::PI;

use log::debug;
use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::{DynamicsError, Mode, Propagator, Wavefunction};
use crate::grid::SpectralGrid;
use crate::params::{Normalization, SystemParams};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no feedback (mirror_R = 0 or b0 = 0): the homogeneous state never goes unstable")]
    NoInstability,
    #[error("p0/p_th = {ratio:.4} is below threshold: no droplet solution")]
    BelowThreshold { ratio: f64 },
    #[error("physical anchor `{name}` must be positive and finite, got {value}")]
    BadAnchor { name: &'static str, value: f64 },
    #[error("threshold scan: {0}")]
    Scan(String),
}

impl From<DynamicsError> for AnalysisError {
    fn from(e: DynamicsError) -> Self {
        AnalysisError::Scan(e.to_string())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("density has no peak to fit")]
    NoPeak,
    #[error("density peak lies within two cells of the window edge")]
    PeakAtBoundary,
    #[error("Gaussian fit did not converge")]
    NoConvergence,
    #[error("density length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Result of fitting A·exp(−(x̄−c)²/σ²) to a density profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropletFit {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    /// RMS of data − model over the fit window.
    pub residual: f64,
    pub iterations: usize,
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    // Gaussian elimination with partial pivoting.
    let mut a = [[0.0; 4]; 3];
    for r in 0..3 {
        a[r][..3].copy_from_slice(&m[r]);
        a[r][3] = b[r];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..3 {
            let pivot = a[col];
            let f = a[r][col] / pivot[col];
            for (v, p) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                *v -= f * p;
            }
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][3] - s) / a[r][r];
    }
    Some(x)
}

/// Least-squares Gaussian fit around the global density maximum.
///
/// The window spans ±5 widths of an initial estimate taken from the
/// half-maximum points, clipped to the grid.
pub fn fit_gaussian(density: &[f64], grid: &SpectralGrid) -> Result<DropletFit, FitError> {
    let n = density.len();
    if n != grid.n_points() {
        return Err(FitError::LengthMismatch {
            expected: grid.n_points(),
            got: n,
        });
    }
    let xs = grid.x_values();
    let dx = grid.dx();
    let mut peak = 0;
    let mut min = f64::MAX;
    for (i, v) in density.iter().enumerate() {
        if *v > density[peak] {
            peak = i;
        }
        min = min.min(*v);
    }
    let top = density[peak];
    if !(top > 0.0) || !top.is_finite() || top - min <= 1e-9 * top {
        return Err(FitError::NoPeak);
    }
    if peak < 2 || peak + 2 >= n {
        return Err(FitError::PeakAtBoundary);
    }
    let half = 0.5 * (top + min.max(0.0));
    let mut lo = peak;
    while lo > 0 && density[lo] > half {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < n && density[hi] > half {
        hi += 1;
    }
    let fwhm = ((hi - lo) as f64 * dx).max(2.0 * dx);
    let sigma_guess = fwhm / (2.0 * 2f64.ln().sqrt());
    let w = ((5.0 * sigma_guess / dx).ceil() as usize).max(3);
    let start = peak.saturating_sub(w);
    let end = (peak + w).min(n - 1);
    let (wx, wy) = (&xs[start..=end], &density[start..=end]);

    // Sub-cell start from the log-parabola through the top three points.
    let mut c = xs[peak];
    let (ym, y0, yp) = (density[peak - 1], density[peak], density[peak + 1]);
    if ym > 0.0 && yp > 0.0 {
        let (lm, l0, lp) = (ym.ln(), y0.ln(), yp.ln());
        let curv = lm - 2.0 * l0 + lp;
        if curv < 0.0 {
            c += (0.5 * (lm - lp) / curv).clamp(-0.5, 0.5) * dx;
        }
    }
    let mut theta = [top, c, sigma_guess];

    let cost = |t: &[f64; 3]| -> f64 {
        wx.iter()
            .zip(wy)
            .map(|(x, y)| {
                let u = (x - t[1]) / t[2];
                let r = t[0] * (-u * u).exp() - y;
                r * r
            })
            .sum()
    };
    let mut current = cost(&theta);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=200 {
        iterations = it;
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (x, y) in wx.iter().zip(wy) {
            let u = (x - theta[1]) / theta[2];
            let e = (-u * u).exp();
            let model = theta[0] * e;
            let j = [
                e,
                model * 2.0 * u / theta[2],
                model * 2.0 * u * u / theta[2],
            ];
            let r = model - y;
            for a in 0..3 {
                jtr[a] += j[a] * r;
                for b in 0..3 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut m = jtj;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] += lambda * jtj[a][a];
            }
            let Some(step) = solve3(m, [-jtr[0], -jtr[1], -jtr[2]]) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [theta[0] + step[0], theta[1] + step[1], theta[2] + step[2]];
            let tc = if trial[2] > 0.0 {
                cost(&trial)
            } else {
                f64::INFINITY
            };
            if tc <= current {
                let small = step[1].abs() < 1e-13 * dx
                    && step[2].abs() < 1e-13 * theta[2]
                    && step[0].abs() < 1e-13 * theta[0];
                let flat = current - tc <= 1e-15 * current;
                theta = trial;
                current = tc;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                converged = small || flat;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step exists: already at the minimum to round-off.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged || !theta.iter().all(|v| v.is_finite()) || theta[2] <= 0.0 {
        return Err(FitError::NoConvergence);
    }
    Ok(DropletFit {
        amplitude: theta[0],
        center: theta[1],
        width: theta[2],
        residual: (current / wx.len() as f64).sqrt(),
        iterations,
    })
}

/// Threshold pump p_th = 2ω̄_r/(b₀R) for the q̄ = 1 instability.
pub fn pump_threshold(params: &SystemParams) -> Result<f64, AnalysisError> {
    let gain = params.b0 * params.mirror_r;
    if !(gain > 0.0) {
        return Err(AnalysisError::NoInstability);
    }
    Ok(2.0 * params.omega_r_bar / gain)
}

/// Asymptotic droplet width from the Gaussian variational estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthPrediction {
    /// σ = (p₀/p_th)^(−1/4).
    pub width: f64,
    pub pump_ratio: f64,
    /// The estimate assumes p₀ ≫ p_th; true when p₀ < 5·p_th.
    pub outside_asymptotic_regime: bool,
}

pub fn predicted_width(params: &SystemParams) -> Result<WidthPrediction, AnalysisError> {
    let ratio = params.p0 / pump_threshold(params)?;
    if ratio < 1.0 {
        return Err(AnalysisError::BelowThreshold { ratio });
    }
    Ok(WidthPrediction {
        width: ratio.powf(-0.25),
        pump_ratio: ratio,
        outside_asymptotic_regime: ratio < 5.0,
    })
}

/// Spontaneous-scattering budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingBudget {
    /// Scattering rate per atom in units of Γ, (1+R)p₀/2.
    pub scattering_rate: f64,
    /// Time for one scattering event per atom, in units of 1/Γ.
    pub t_limit: f64,
}

impl HeatingBudget {
    pub fn allows(&self, t_final: f64) -> bool {
        t_final <= self.t_limit
    }
}

pub fn heating_budget(params: &SystemParams) -> HeatingBudget {
    let rate = 0.5 * (1.0 + params.mirror_r) * params.p0;
    HeatingBudget {
        scattering_rate: rate,
        t_limit: if rate > 0.0 {
            1.0 / rate
        } else {
            f64::INFINITY
        },
    }
}

/// Laboratory constants that fix the length, time and acceleration scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalAnchors {
    /// Atomic transition wavelength λ₀, m.
    pub lambda0: f64,
    /// Cloud-to-mirror distance d, m.
    pub mirror_distance: f64,
    /// Natural linewidth Γ, s⁻¹.
    pub gamma: f64,
    /// Atomic mass, kg.
    pub mass: f64,
}

impl PhysicalAnchors {
    /// ¹³³Cs on the D2 line.
    pub fn cesium(mirror_distance: f64) -> Self {
        Self {
            lambda0: 852.347e-9,
            mirror_distance,
            gamma: 2.0 * PI * 5.234e6,
            mass: 132.905 * AMU,
        }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        for (name, value) in [
            ("lambda0", self.lambda0),
            ("mirror_distance", self.mirror_distance),
            ("gamma", self.gamma),
            ("mass", self.mass),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(AnalysisError::BadAnchor { name, value });
            }
        }
        Ok(())
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.lambda0
    }

    /// ω̄_r implied by these anchors, ħq_c²/(2mΓ).
    pub fn omega_r_bar(&self) -> Result<f64, AnalysisError> {
        let (q_c, _) = critical_wavenumber(self)?;
        Ok(HBAR * q_c * q_c / (2.0 * self.mass * self.gamma))
    }
}

/// (q_c, Λ_c) with q_c = √(πk₀/2d), the first wavenumber whose round trip to
/// the mirror turns a phase grating into an intensity grating.
pub fn critical_wavenumber(anchors: &PhysicalAnchors) -> Result<(f64, f64), AnalysisError> {
    anchors.validate()?;
    let q_c = (PI * anchors.k0() / (2.0 * anchors.mirror_distance)).sqrt();
    Ok((q_c, 2.0 * PI / q_c))
}

/// Converts between dimensionless and SI quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitConverter {
    pub q_c: f64,
    pub gamma: f64,
    /// a = ā·ħq_cΓ/m.
    pub accel_unit: f64,
    pub omega_r_bar: f64,
}

impl UnitConverter {
    pub fn new(anchors: &PhysicalAnchors) -> Result<Self, AnalysisError> {
        let (q_c, _) = critical_wavenumber(anchors)?;
        Ok(Self {
            q_c,
            gamma: anchors.gamma,
            accel_unit: HBAR * q_c * anchors.gamma / anchors.mass,
            omega_r_bar: anchors.omega_r_bar()?,
        })
    }

    pub fn length_m(&self, x_bar: f64) -> f64 {
        x_bar / self.q_c
    }

    pub fn length_bar(&self, x_m: f64) -> f64 {
        x_m * self.q_c
    }

    pub fn time_s(&self, t_bar: f64) -> f64 {
        t_bar / self.gamma
    }

    pub fn time_bar(&self, t_s: f64) -> f64 {
        t_s * self.gamma
    }

    pub fn accel_si(&self, a_bar: f64) -> f64 {
        a_bar * self.accel_unit
    }

    pub fn accel_bar(&self, a_si: f64) -> f64 {
        a_si / self.accel_unit
    }

    /// Relative mismatch between the anchors' ω̄_r and the one in `params`
    /// when it exceeds 5%.
    pub fn inconsistency(&self, params: &SystemParams) -> Option<f64> {
        let rel = (self.omega_r_bar - params.omega_r_bar).abs() / params.omega_r_bar;
        (rel > 0.05).then_some(rel)
    }
}

/// Settings for a homogeneous-state stability scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Relative density modulation seeded at q̄ = 1.
    pub probe_amplitude: f64,
    /// Time step in units of 1/ω̄_r.
    pub dt_recoil: f64,
    /// Observation window in units of 1/ω̄_r.
    pub horizon_recoil: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            probe_amplitude: 1e-4,
            dt_recoil: 0.02,
            horizon_recoil: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub p0: f64,
    pub pump_ratio: f64,
    /// Fitted exponential rate of the q̄ = 1 density amplitude (0 if it never doubled).
    pub growth_rate: f64,
    pub growing: bool,
    /// Linear-stability rate ω̄_r√(p₀/p_th − 1), zero below threshold.
    pub predicted_rate: f64,
}

/// Amplitude of the q̄ = 1 component of a density profile, relative to its mean.
pub fn modulation_amplitude(density: &[f64], grid: &SpectralGrid) -> f64 {
    let mut acc = Complex64::default();
    for (n, x) in density.iter().zip(grid.x_values()) {
        acc += Complex64::from_polar(*n, -x);
    }
    let mean = density.iter().sum::<f64>();
    2.0 * acc.norm() / mean
}

fn scan_one(
    params: &SystemParams,
    grid: &SpectralGrid,
    config: &ScanConfig,
) -> Result<ScanPoint, AnalysisError> {
    let p_th = pump_threshold(params)?;
    let ratio = params.p0 / p_th;
    let eps = config.probe_amplitude;
    let density: Vec<f64> = grid
        .x_values()
        .iter()
        .map(|x| 1.0 + eps * x.cos())
        .collect();
    let mut wf = Wavefunction::from_density(grid, &density, Normalization::MeanDensityOne);
    let dt = config.dt_recoil / params.omega_r_bar;
    let steps = (config.horizon_recoil / config.dt_recoil).round() as usize;
    let mut prop = Propagator::new(grid, &params.with_acceleration(0.0), dt, Mode::RealTime)?;
    prop.prime(&mut wf);
    let a0 = modulation_amplitude(&wf.density(), grid);

    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut started = false;
    for step in 1..=steps {
        prop.advance(&mut wf, 1);
        let amp = modulation_amplitude(&wf.density(), grid);
        if !amp.is_finite() {
            return Err(AnalysisError::Scan(format!(
                "non-finite density at step {step}"
            )));
        }
        started |= amp >= 2.0 * a0;
        if started {
            samples.push((step as f64 * dt, amp.ln()));
        }
        if amp >= 20.0 * a0 {
            break;
        }
    }
    let growth_rate = if samples.len() >= 2 {
        let n = samples.len() as f64;
        let mt = samples.iter().map(|s| s.0).sum::<f64>() / n;
        let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
        let sxy: f64 = samples.iter().map(|s| (s.0 - mt) * (s.1 - my)).sum();
        let sxx: f64 = samples.iter().map(|s| (s.0 - mt) * (s.0 - mt)).sum();
        sxy / sxx
    } else {
        0.0
    };
    Ok(ScanPoint {
        p0: params.p0,
        pump_ratio: ratio,
        growth_rate,
        growing: started && growth_rate > 0.0,
        predicted_rate: params.omega_r_bar * (ratio - 1.0).max(0.0).sqrt(),
    })
}

/// Seeds the homogeneous state with a small q̄ = 1 modulation for each pump
/// value and reports whether it grows. Pump values run concurrently.
///
/// The window must hold a whole number of 2π periods so that q̄ = 1 is a
/// grid wavenumber.
pub fn threshold_scan(
    base: &SystemParams,
    p0_values: &[f64],
    grid: &SpectralGrid,
    config: &ScanConfig,
) -> Result<Vec<ScanPoint>, AnalysisError> {
    base.validate()
        .map_err(|e| AnalysisError::Scan(e.to_string()))?;
    pump_threshold(base)?;
    if grid.bin_of(1.0).is_none() {
        return Err(AnalysisError::Scan(format!(
            "window length {} is not a multiple of 2π",
            grid.length()
        )));
    }
    if let Some(p) = p0_values.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(AnalysisError::Scan(format!(
            "pump values must be positive, got {p}"
        )));
    }
    let results: Vec<Result<ScanPoint, AnalysisError>> = std::thread::scope(|s| {
        let handles: Vec<_> = p0_values
            .iter()
            .map(|&p0| s.spawn(move || scan_one(&base.with_pump(p0), grid, config)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scan worker panicked"))
            .collect()
    });
    let points = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    debug!("threshold scan over {} pump values done", points.len());
    Ok(points)
}

/// Adjacent pump values (sorted by p₀) across which the state first turns
/// unstable.
pub fn bracket_threshold(points: &[ScanPoint]) -> Option<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.p0.total_cmp(&b.p0));
    sorted
        .windows(2)
        .find(|w| !w[0].growing && w[1].growing)
        .map(|w| (w[0].p0, w[1].p0))
}
