//! Acceleration readout from the motion of the optical pattern.
//!
//! Under a uniform acceleration the droplet and the light pattern it imprints
//! move together along x̄(t̄) = x̄₀ + v̄₀t̄ + ω̄_r ā t̄². Tracking the pattern in
//! a sequence of snapshots and fitting that parabola recovers ā.

use std::f64::consts::PI;

use log::debug;
use thiserror::Error;

use crate::analysis::fit_gaussian;
use crate::dynamics::{
    evolve_into, imaginary_time_ground_state, Discard, DynamicsError, EvolutionConfig,
    GroundStateConfig, Snapshot, SnapshotSink, Wavefunction,
};
use crate::grid::SpectralGrid;
use crate::params::{Normalization, SystemParams};

#[derive(Debug, Error)]
pub enum SensingError {
    #[error("need at least 3 trajectory points, got {0}")]
    InsufficientData(usize),
    #[error("trajectory times must increase strictly (index {0})")]
    NonMonotonicTime(usize),
    #[error("trajectory has {times} times but {positions} positions")]
    LengthMismatch { times: usize, positions: usize },
    #[error(
        "insufficient baseline: displacement {displacement:.3e} is below the resolution {resolution:.3e}; smallest detectable a_bar over this time is {a_min:.3e}"
    )]
    InsufficientBaseline {
        displacement: f64,
        resolution: f64,
        a_min: f64,
    },
    #[error("no trackable extremum in the intensity profile")]
    NoExtremum,
    #[error("least-squares system is singular")]
    Singular,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Which optical signal carries the pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntensityKind {
    /// |B|² at the cloud.
    BackwardAtBec,
    /// Forward intensity imaged one round trip downstream.
    ImagePlaneForward,
}

impl IntensityKind {
    pub fn of<'a>(&self, snapshot: &'a Snapshot) -> &'a [f64] {
        match self {
            IntensityKind::BackwardAtBec => &snapshot.backward_intensity,
            IntensityKind::ImagePlaneForward => &snapshot.image_intensity,
        }
    }
}

/// What a trajectory's positions were measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionSource {
    DensityPeak,
    Intensity(IntensityKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

impl Extremum {
    /// The droplet sits on an intensity maximum for red detuning and on a
    /// minimum for blue detuning.
    pub fn for_params(params: &SystemParams) -> Self {
        if params.delta < 0.0 {
            Extremum::Max
        } else {
            Extremum::Min
        }
    }
}

/// Time series of a tracked position.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub peak_positions: Vec<f64>,
    /// Gaussian width of the density at each time (NaN when no fit was possible).
    pub widths: Vec<f64>,
    pub norms: Vec<f64>,
    pub source: PositionSource,
}

impl TrajectoryRecord {
    pub fn new(source: PositionSource) -> Self {
        Self {
            times: Vec::new(),
            peak_positions: Vec::new(),
            widths: Vec::new(),
            norms: Vec::new(),
            source,
        }
    }

    pub fn push(&mut self, t: f64, position: f64, width: f64, norm: f64) {
        self.times.push(t);
        self.peak_positions.push(position);
        self.widths.push(width);
        self.norms.push(norm);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest over smallest finite width.
    pub fn width_ratio(&self) -> f64 {
        let finite = self.widths.iter().filter(|w| w.is_finite());
        let max = finite.clone().cloned().fold(f64::MIN, f64::max);
        let min = finite.cloned().fold(f64::MAX, f64::min);
        if max < min {
            f64::NAN
        } else {
            max / min
        }
    }
}

/// Position of the local extremum of `intensity` nearest to `prior`, refined
/// to sub-cell precision by a three-point parabola.
///
/// The nearest extremum rather than the global one is used because the
/// pattern has side lobes that can be brighter than the central fringe.
pub fn locate_extremum(
    intensity: &[f64],
    grid: &SpectralGrid,
    prior: f64,
    kind: Extremum,
) -> Result<f64, SensingError> {
    let n = intensity.len();
    if n != grid.n_points() {
        return Err(SensingError::LengthMismatch {
            times: grid.n_points(),
            positions: n,
        });
    }
    let sign = match kind {
        Extremum::Max => 1.0,
        Extremum::Min => -1.0,
    };
    let y = |i: usize| sign * intensity[i];
    let max = intensity.iter().cloned().fold(f64::MIN, f64::max);
    let min = intensity.iter().cloned().fold(f64::MAX, f64::min);
    if !(max - min > 1e-12 * max.abs().max(min.abs())) || !max.is_finite() {
        return Err(SensingError::NoExtremum);
    }
    let prior = grid.wrap(prior);
    let start = (((prior - grid.x_values()[0]) / grid.dx()).round() as usize) % n;
    let is_peak = |i: usize| {
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        y(i) >= y(l) && y(i) >= y(r) && (y(i) > y(l) || y(i) > y(r))
    };
    let found = (0..=n / 2).find_map(|off| {
        let right = (start + off) % n;
        let left = (start + n - off) % n;
        match (is_peak(left), is_peak(right)) {
            (true, true) => Some(if y(left) >= y(right) { left } else { right }),
            (true, false) => Some(left),
            (false, true) => Some(right),
            _ => None,
        }
    });
    let i = found.ok_or(SensingError::NoExtremum)?;
    let (ym, y0, yp) = (y((i + n - 1) % n), y(i), y((i + 1) % n));
    let curvature = ym - 2.0 * y0 + yp;
    let shift = if curvature < 0.0 {
        (0.5 * (ym - yp) / curvature).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    // Unwrapped relative to the prior so trajectories stay continuous.
    let x = grid.x_values()[i] + shift * grid.dx();
    Ok(prior + grid.wrap(x - prior))
}

/// Weighted least-squares fit of x̄(t̄) = c₀ + c₁t̄ + c₂t̄², read as c₂ = ω̄_r ā.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelEstimate {
    pub a_bar_hat: f64,
    pub std_error: f64,
    /// (c₀, c₁, c₂).
    pub coefficients: [f64; 3],
    pub covariance: [[f64; 3]; 3],
    pub rms_residual: f64,
    /// Slope of t̄² against x̄/Λ̄_c, i.e. c₂/2π = ω̄_r ā/2π.
    pub gradient: f64,
    /// Smallest ā whose displacement over this record would reach the resolution.
    pub a_min: f64,
    pub n_points: usize,
    pub t_max: f64,
}

fn invert3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let c = |r: usize, s: usize| {
        let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
        let (s1, s2) = ((s + 1) % 3, (s + 2) % 3);
        m[r1][s1] * m[r2][s2] - m[r1][s2] * m[r2][s1]
    };
    let det = m[0][0] * c(0, 0) + m[0][1] * c(0, 1) + m[0][2] * c(0, 2);
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(det.abs() > 1e-14 * scale.powi(3)) {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for (r, row) in inv.iter_mut().enumerate() {
        for (s, v) in row.iter_mut().enumerate() {
            *v = c(s, r) / det;
        }
    }
    Some(inv)
}

/// Fits the parabola to `(times, positions)` with optional per-point weights.
///
/// `resolution` is the smallest displacement the tracking can resolve; a
/// record that never moves further than that is rejected.
pub fn fit_trajectory(
    times: &[f64],
    positions: &[f64],
    weights: Option<&[f64]>,
    omega_r_bar: f64,
    resolution: f64,
) -> Result<AccelEstimate, SensingError> {
    let n = times.len();
    if positions.len() != n || weights.is_some_and(|w| w.len() != n) {
        return Err(SensingError::LengthMismatch {
            times: n,
            positions: positions.len(),
        });
    }
    if n < 3 {
        return Err(SensingError::InsufficientData(n));
    }
    if let Some(i) = (1..n).find(|&i| !(times[i] > times[i - 1])) {
        return Err(SensingError::NonMonotonicTime(i));
    }
    let t_scale = times.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let t_max = times[n - 1] - times[0];
    let a_min = resolution / (omega_r_bar * t_max * t_max);
    let displacement = positions
        .iter()
        .map(|x| (x - positions[0]).abs())
        .fold(0.0, f64::max);
    if displacement < resolution {
        return Err(SensingError::InsufficientBaseline {
            displacement,
            resolution,
            a_min,
        });
    }

    // Basis 1, τ, τ² with τ = t/t_scale keeps the normal matrix well conditioned.
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for i in 0..n {
        let tau = times[i] / t_scale;
        let row = [1.0, tau, tau * tau];
        for r in 0..3 {
            aty[r] += w(i) * row[r] * positions[i];
            for s in 0..3 {
                ata[r][s] += w(i) * row[r] * row[s];
            }
        }
    }
    let inv = invert3(ata).ok_or(SensingError::Singular)?;
    let mut b = [0.0; 3];
    for r in 0..3 {
        b[r] = (0..3).map(|s| inv[r][s] * aty[s]).sum();
    }
    let mut ssr = 0.0;
    let mut sq = 0.0;
    for i in 0..n {
        let tau = times[i] / t_scale;
        let r = positions[i] - (b[0] + b[1] * tau + b[2] * tau * tau);
        ssr += w(i) * r * r;
        sq += r * r;
    }
    let sigma2 = if n > 3 { ssr / (n - 3) as f64 } else { 0.0 };
    let unscale = [1.0, 1.0 / t_scale, 1.0 / (t_scale * t_scale)];
    let mut coefficients = [0.0; 3];
    let mut covariance = [[0.0; 3]; 3];
    for r in 0..3 {
        coefficients[r] = b[r] * unscale[r];
        for s in 0..3 {
            covariance[r][s] = sigma2 * inv[r][s] * unscale[r] * unscale[s];
        }
    }
    let c2 = coefficients[2];
    Ok(AccelEstimate {
        a_bar_hat: c2 / omega_r_bar,
        std_error: covariance[2][2].sqrt() / omega_r_bar,
        coefficients,
        covariance,
        rms_residual: (sq / n as f64).sqrt(),
        gradient: c2 / (2.0 * PI),
        a_min,
        n_points: n,
        t_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenseConfig {
    pub evolution: EvolutionConfig,
    pub intensity: IntensityKind,
    pub ground_state: GroundStateConfig,
    /// Largest max/min density-width ratio for a reliable estimate.
    pub max_width_ratio: f64,
}

impl Default for SenseConfig {
    fn default() -> Self {
        Self {
            evolution: EvolutionConfig::default(),
            intensity: IntensityKind::BackwardAtBec,
            ground_state: GroundStateConfig::default(),
            max_width_ratio: 1.5,
        }
    }
}

/// Everything a sensing run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseReport {
    /// Absent when the tracked record could not be fitted at all.
    pub estimate: Option<AccelEstimate>,
    pub reliable: bool,
    /// Human-readable reasons the estimate is not reliable.
    pub issues: Vec<String>,
    /// Pattern positions from the chosen intensity.
    pub tracked: TrajectoryRecord,
    /// Density-fit trajectory of the same run.
    pub density: TrajectoryRecord,
    /// The evolution was cut short by the boundary guard.
    pub truncated: bool,
}

/// Relaxes a droplet at rest, then runs [`sense_from`] with it.
pub fn sense(
    params: &SystemParams,
    grid: &SpectralGrid,
    config: &SenseConfig,
) -> Result<SenseReport, SensingError> {
    let seed = Wavefunction::gaussian(grid, 0.0, seed_width(params), Normalization::droplet());
    let ground = imaginary_time_ground_state(&seed, params, grid, &config.ground_state)?;
    sense_from(&ground.state, params, grid, config)
}

fn seed_width(params: &SystemParams) -> f64 {
    let p_th = 2.0 * params.omega_r_bar / (params.b0 * params.mirror_r);
    let ratio = params.p0 / p_th;
    if ratio.is_finite() && ratio > 1.0 {
        ratio.powf(-0.25)
    } else {
        1.0
    }
}

/// Evolves `initial` under `params` and fits the tracked pattern motion.
pub fn sense_from(
    initial: &Wavefunction,
    params: &SystemParams,
    grid: &SpectralGrid,
    config: &SenseConfig,
) -> Result<SenseReport, SensingError> {
    sense_with_sink(initial, params, grid, config, &mut Discard)
}

/// [`sense_from`] that also hands every snapshot to `extra`.
pub fn sense_with_sink(
    initial: &Wavefunction,
    params: &SystemParams,
    grid: &SpectralGrid,
    config: &SenseConfig,
    extra: &mut dyn SnapshotSink,
) -> Result<SenseReport, SensingError> {
    let kind = Extremum::for_params(params);
    let mut tracked = TrajectoryRecord::new(PositionSource::Intensity(config.intensity));
    let mut lost = 0usize;
    let mut prior = fit_gaussian(&initial.density(), grid)
        .map(|f| f.center)
        .unwrap_or(0.0);
    let mut sink = |snap: &Snapshot| -> std::io::Result<()> {
        match locate_extremum(config.intensity.of(snap), grid, prior, kind) {
            Ok(x) => {
                prior = x;
                let width = fit_gaussian(&snap.density, grid).map_or(f64::NAN, |f| f.width);
                tracked.push(snap.t, x, width, grid.integrate(&snap.density));
            }
            Err(_) => lost += 1,
        }
        extra.record(snap)
    };
    let (density, truncated) =
        match evolve_into(initial, params, grid, &config.evolution, &mut sink) {
            Ok(evo) => (evo.record, false),
            Err(DynamicsError::BoundaryViolation { partial, .. }) => (partial.record, true),
            Err(e) => return Err(e.into()),
        };

    let mut issues = Vec::new();
    if truncated {
        issues.push("evolution stopped at the boundary guard; record is partial".to_string());
    }
    if lost > 0 {
        issues.push(format!(
            "no trackable intensity extremum in {lost} of {} snapshots",
            density.len()
        ));
    }
    let estimate = match fit_trajectory(
        &tracked.times,
        &tracked.peak_positions,
        None,
        params.omega_r_bar,
        grid.dx(),
    ) {
        Ok(e) => Some(e),
        Err(e) => {
            issues.push(format!("trajectory fit failed: {e}"));
            None
        }
    };
    if let Some(e) = &estimate {
        if e.rms_residual > 0.5 * grid.dx() {
            issues.push(format!(
                "fit residual {:.3e} exceeds half a grid cell",
                e.rms_residual
            ));
        }
    }
    let ratio = density.width_ratio();
    if !(ratio <= config.max_width_ratio) {
        issues.push(format!(
            "droplet width changed by a factor {ratio:.3} (limit {})",
            config.max_width_ratio
        ));
    }
    debug!("sensing finished with {} issue(s)", issues.len());
    Ok(SenseReport {
        reliable: issues.is_empty() && estimate.is_some(),
        estimate,
        issues,
        tracked,
        density,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_parabola_is_recovered() {
        let omega = 1.14e-5;
        let a = 1e-5;
        let times: Vec<f64> = (0..=30).map(|k| k as f64 * 1e4).collect();
        let xs: Vec<f64> = times
            .iter()
            .map(|t| 0.3 - 2e-6 * t + omega * a * t * t)
            .collect();
        let e = fit_trajectory(&times, &xs, None, omega, 0.098).unwrap();
        assert!((e.a_bar_hat - a).abs() < 1e-12 * a.max(1.0) * 1e3);
        assert!((e.coefficients[1] + 2e-6).abs() < 1e-15);
        assert!(e.rms_residual < 1e-12);
        assert!((e.gradient - omega * a / (2.0 * PI)).abs() < 1e-20);
    }

    #[test]
    fn fit_rejects_bad_records() {
        assert!(matches!(
            fit_trajectory(&[0.0, 1.0], &[0.0, 1.0], None, 1.0, 0.1),
            Err(SensingError::InsufficientData(2))
        ));
        assert!(matches!(
            fit_trajectory(&[0.0, 2.0, 1.0], &[0.0, 1.0, 2.0], None, 1.0, 0.1),
            Err(SensingError::NonMonotonicTime(2))
        ));
        match fit_trajectory(
            &[0.0, 1.0, 2.0, 3.0],
            &[0.0, 0.01, 0.02, 0.0],
            None,
            1.0,
            0.1,
        ) {
            Err(SensingError::InsufficientBaseline { a_min, .. }) => {
                assert!((a_min - 0.1 / 9.0).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn extremum_nearest_prior_not_global() {
        let g = SpectralGrid::new(256, 20.0).unwrap();
        // Small bump at 0, brighter bump at 5.
        let y: Vec<f64> = g
            .x_values()
            .iter()
            .map(|x| (-(x * x)).exp() + 2.0 * (-(x - 5.0) * (x - 5.0)).exp())
            .collect();
        let near = locate_extremum(&y, &g, 0.4, Extremum::Max).unwrap();
        assert!(near.abs() < 0.01, "{near}");
        let far = locate_extremum(&y, &g, 4.0, Extremum::Max).unwrap();
        assert!((far - 5.0).abs() < 0.01);
        let flat = vec![3.0; 256];
        assert!(matches!(
            locate_extremum(&flat, &g, 0.0, Extremum::Min),
            Err(SensingError::NoExtremum)
        ));
    }

    #[test]
    fn parabolic_refinement_is_sub_cell() {
        let g = SpectralGrid::new(128, 16.0).unwrap();
        let c = 0.037;
        let y: Vec<f64> = g.x_values().iter().map(|x| -(x - c) * (x - c)).collect();
        let x = locate_extremum(&y, &g, 0.0, Extremum::Max).unwrap();
        assert!((x - c).abs() < 1e-12);
        let y: Vec<f64> = y.iter().map(|v| -v).collect();
        let x = locate_extremum(&y, &g, 0.0, Extremum::Min).unwrap();
        assert!((x - c).abs() < 1e-12);
    }
}
