//! Split-step evolution of the condensate in its self-consistent optical potential.
//!
//! Each step is a symmetric Strang splitting: half a potential phase, a full
//! kinetic step in the spectrum, then half a potential phase with the
//! potential recomputed from the new density. Because a real-time potential
//! phase leaves |Ψ|² untouched, the potential at the end of one step is the
//! potential at the start of the next, and the two half phases between
//! snapshots are merged into one.

use std::io;

use log::debug;
use num_complex::Complex64;
use thiserror::Error;

use crate::analysis::fit_gaussian;
use crate::grid::{GridError, SpectralGrid};
use crate::optics::{dipole_potential, image_plane_intensity, FeedbackLoop};
use crate::params::{Normalization, ParamError, SystemParams};
use crate::sensing::{PositionSource, TrajectoryRecord};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid evolution setting `{key}`: {reason}")]
    Config { key: &'static str, reason: String },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(
        "density peak at x = {position:.4} left the guarded region |x| <= {limit:.4} at step {step} (t = {t:.6e})"
    )]
    BoundaryViolation {
        step: usize,
        t: f64,
        position: f64,
        limit: f64,
        partial: Box<Evolution>,
    },
    #[error("wavefunction became non-finite at step {step}")]
    NonFinite { step: usize },
    #[error(
        "imaginary-time relaxation did not converge in {steps} steps (residual {residual:.3e})"
    )]
    NotConverged { steps: usize, residual: f64 },
    #[error("no droplet solution: relaxed state is homogeneous (contrast {contrast:.3e})")]
    NoDroplet { contrast: f64 },
    #[error("snapshot sink failed: {0}")]
    Sink(#[from] io::Error),
}

/// Complex field on the grid together with its normalisation convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    pub psi: Vec<Complex64>,
    pub norm: Normalization,
}

impl Wavefunction {
    /// Gaussian density ∝ exp(−(x̄−c)²/σ²), normalised.
    pub fn gaussian(grid: &SpectralGrid, center: f64, width: f64, norm: Normalization) -> Self {
        let psi = grid
            .x_values()
            .iter()
            .map(|x| {
                let u = (x - center) / width;
                Complex64::new((-0.5 * u * u).exp(), 0.0)
            })
            .collect();
        let mut wf = Self { psi, norm };
        wf.normalize(grid);
        wf
    }

    pub fn homogeneous(grid: &SpectralGrid, norm: Normalization) -> Self {
        let mut wf = Self {
            psi: vec![Complex64::new(1.0, 0.0); grid.n_points()],
            norm,
        };
        wf.normalize(grid);
        wf
    }

    /// Real wavefunction with the given (non-negative) density profile, normalised.
    pub fn from_density(grid: &SpectralGrid, density: &[f64], norm: Normalization) -> Self {
        let mut wf = Self {
            psi: density
                .iter()
                .map(|n| Complex64::new(n.max(0.0).sqrt(), 0.0))
                .collect(),
            norm,
        };
        wf.normalize(grid);
        wf
    }

    /// Multiplies by e^{ik̄x̄}, giving the state a mean wavenumber k̄.
    pub fn with_phase_ramp(mut self, grid: &SpectralGrid, k: f64) -> Self {
        for (p, x) in self.psi.iter_mut().zip(grid.x_values()) {
            *p *= Complex64::from_polar(1.0, k * x);
        }
        self
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|p| p.norm_sqr()).collect()
    }

    pub fn norm_value(&self, grid: &SpectralGrid) -> f64 {
        grid.norm_sqr(&self.psi)
    }

    pub fn normalize(&mut self, grid: &SpectralGrid) {
        renormalize(&mut self.psi, grid, self.norm.target(grid.length()));
    }
}

fn renormalize(psi: &mut [Complex64], grid: &SpectralGrid, target: f64) {
    let current = grid.norm_sqr(psi);
    if current > 0.0 {
        let s = (target / current).sqrt();
        for p in psi.iter_mut() {
            *p *= s;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    RealTime,
    ImaginaryTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Record a snapshot every this many steps.
    pub snapshot_stride: usize,
    pub mode: Mode,
    /// Fraction of the half-window the density peak may reach when ā ≠ 0.
    pub boundary_guard: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            dt: 1.0,
            t_final: 3.0e5,
            snapshot_stride: 1000,
            mode: Mode::RealTime,
            boundary_guard: 0.8,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(DynamicsError::Config {
                key: "dt",
                reason: format!("must be positive, got {}", self.dt),
            });
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(DynamicsError::Config {
                key: "t_final",
                reason: format!("must be non-negative, got {}", self.t_final),
            });
        }
        let steps = self.t_final / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(DynamicsError::Config {
                key: "t_final",
                reason: format!(
                    "{} is not a whole number of steps of dt = {}",
                    self.t_final, self.dt
                ),
            });
        }
        if self.snapshot_stride == 0 {
            return Err(DynamicsError::Config {
                key: "snapshot_stride",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.boundary_guard > 0.0 && self.boundary_guard < 1.0) {
            return Err(DynamicsError::Config {
                key: "boundary_guard",
                reason: format!("must lie in (0, 1), got {}", self.boundary_guard),
            });
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// State of the system at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub psi: Vec<Complex64>,
    pub density: Vec<f64>,
    /// Forward intensity imaged one round trip (2d) downstream of the cloud.
    pub image_intensity: Vec<f64>,
    /// |B|² back at the cloud.
    pub backward_intensity: Vec<f64>,
}

/// Receives snapshots in time order as an evolution runs.
pub trait SnapshotSink {
    fn record(&mut self, snapshot: &Snapshot) -> io::Result<()>;
}

impl SnapshotSink for Vec<Snapshot> {
    fn record(&mut self, snapshot: &Snapshot) -> io::Result<()> {
        self.push(snapshot.clone());
        Ok(())
    }
}

/// Sink that keeps nothing.
pub struct Discard;

impl SnapshotSink for Discard {
    fn record(&mut self, _snapshot: &Snapshot) -> io::Result<()> {
        Ok(())
    }
}

impl<F: FnMut(&Snapshot) -> io::Result<()>> SnapshotSink for F {
    fn record(&mut self, snapshot: &Snapshot) -> io::Result<()> {
        self(snapshot)
    }
}

/// Outcome of [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    /// Density-peak trajectory, widths and norms at each snapshot.
    pub record: TrajectoryRecord,
    pub final_state: Wavefunction,
    pub steps: usize,
}

/// Reusable split-step integrator for one parameter set, grid and time step.
pub struct Propagator<'g> {
    grid: &'g SpectralGrid,
    mode: Mode,
    dt: f64,
    feedback: FeedbackLoop,
    /// e^{−iω̄_r q̄² dt}/N (real time) or e^{−ω̄_r q̄² dt}/N (imaginary time).
    kinetic: Vec<Complex64>,
    /// −ā x̄.
    linear: Vec<f64>,
    potential: Vec<f64>,
    scratch: Vec<Complex64>,
    target_norm: f64,
}

impl<'g> Propagator<'g> {
    pub fn new(
        grid: &'g SpectralGrid,
        params: &SystemParams,
        dt: f64,
        mode: Mode,
    ) -> Result<Self, DynamicsError> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(DynamicsError::Config {
                key: "dt",
                reason: format!("must be positive, got {dt}"),
            });
        }
        let inv_n = 1.0 / grid.n_points() as f64;
        let kinetic = grid
            .q_values()
            .iter()
            .map(|q| {
                let arg = params.omega_r_bar * q * q * dt;
                match mode {
                    Mode::RealTime => Complex64::from_polar(inv_n, -arg),
                    Mode::ImaginaryTime => Complex64::new(inv_n * (-arg).exp(), 0.0),
                }
            })
            .collect();
        let a_bar = match mode {
            Mode::RealTime => params.a_bar,
            Mode::ImaginaryTime => 0.0,
        };
        let linear = grid.x_values().iter().map(|x| -a_bar * x).collect();
        Ok(Self {
            grid,
            mode,
            dt,
            feedback: FeedbackLoop::new(params, grid),
            kinetic,
            linear,
            potential: vec![0.0; grid.n_points()],
            scratch: vec![Complex64::default(); grid.scratch_len()],
            target_norm: 0.0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn refresh_potential(&mut self, psi: &[Complex64]) {
        self.feedback
            .potential_from_psi(self.grid, psi, &mut self.potential);
    }

    fn potential_phase(&self, psi: &mut [Complex64], tau: f64) {
        for ((p, v), l) in psi.iter_mut().zip(&self.potential).zip(&self.linear) {
            *p *= Complex64::cis(-(v + l) * tau);
        }
    }

    fn kinetic_step(&mut self, psi: &mut [Complex64]) {
        self.grid.forward_raw(psi, &mut self.scratch);
        for (p, k) in psi.iter_mut().zip(&self.kinetic) {
            *p *= k;
        }
        self.grid.inverse_raw(psi, &mut self.scratch);
    }

    /// Advances `psi` by `steps` real-time steps. The stored potential must
    /// belong to the current density on entry and does on exit.
    fn advance_real(&mut self, psi: &mut [Complex64], steps: usize) {
        if steps == 0 {
            return;
        }
        let half = 0.5 * self.dt;
        self.potential_phase(psi, half);
        for i in 0..steps {
            self.kinetic_step(psi);
            self.refresh_potential(psi);
            let tau = if i + 1 == steps { half } else { self.dt };
            self.potential_phase(psi, tau);
        }
    }

    fn imaginary_potential(&self, psi: &mut [Complex64], tau: f64) {
        // Shift by the mean so the exponent stays O(1); renormalisation
        // removes the constant anyway.
        let mean = self.potential.iter().sum::<f64>() / self.potential.len() as f64;
        for (p, v) in psi.iter_mut().zip(&self.potential) {
            *p *= (-(v - mean) * tau).exp();
        }
    }

    /// One imaginary-time step. The state is renormalised after every
    /// sub-step so the potential always sees correctly scaled density.
    fn step_imaginary(&mut self, psi: &mut [Complex64]) {
        let half = 0.5 * self.dt;
        self.imaginary_potential(psi, half);
        renormalize(psi, self.grid, self.target_norm);
        self.kinetic_step(psi);
        renormalize(psi, self.grid, self.target_norm);
        self.refresh_potential(psi);
        self.imaginary_potential(psi, half);
        renormalize(psi, self.grid, self.target_norm);
        self.refresh_potential(psi);
    }

    /// Prepares the cached potential for `wf` (and the norm target in
    /// imaginary time).
    pub fn prime(&mut self, wf: &mut Wavefunction) {
        self.target_norm = wf.norm.target(self.grid.length());
        if self.mode == Mode::ImaginaryTime {
            renormalize(&mut wf.psi, self.grid, self.target_norm);
        }
        self.refresh_potential(&wf.psi);
    }

    /// Advances a primed wavefunction by `steps` steps.
    pub fn advance(&mut self, wf: &mut Wavefunction, steps: usize) {
        match self.mode {
            Mode::RealTime => self.advance_real(&mut wf.psi, steps),
            Mode::ImaginaryTime => {
                for _ in 0..steps {
                    self.step_imaginary(&mut wf.psi);
                }
            }
        }
    }
}

/// One symmetric split step of length `dt` in real time.
pub fn split_step(
    psi: &Wavefunction,
    params: &SystemParams,
    grid: &SpectralGrid,
    dt: f64,
) -> Result<Wavefunction, DynamicsError> {
    check_len(psi, grid)?;
    let mut prop = Propagator::new(grid, params, dt, Mode::RealTime)?;
    let mut out = psi.clone();
    prop.prime(&mut out);
    prop.advance(&mut out, 1);
    Ok(out)
}

fn check_len(psi: &Wavefunction, grid: &SpectralGrid) -> Result<(), GridError> {
    if psi.psi.len() != grid.n_points() {
        return Err(GridError::LengthMismatch {
            expected: grid.n_points(),
            got: psi.psi.len(),
        });
    }
    Ok(())
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Center and width of the density, falling back to the raw maximum when no
/// Gaussian can be fitted.
fn density_peak(density: &[f64], grid: &SpectralGrid) -> (f64, f64) {
    match fit_gaussian(density, grid) {
        Ok(fit) => (fit.center, fit.width),
        Err(_) => (grid.x_values()[argmax(density)], f64::NAN),
    }
}

/// Snapshot of `wf` with its optical fields.
pub fn snapshot(
    step: usize,
    t: f64,
    wf: &Wavefunction,
    params: &SystemParams,
    grid: &SpectralGrid,
) -> Snapshot {
    let density = wf.density();
    let fields = dipole_potential(&density, params, grid).expect("density from |psi|^2 is valid");
    let image_intensity =
        image_plane_intensity(&fields.f_trans, grid).expect("field length matches grid");
    Snapshot {
        step,
        t,
        psi: wf.psi.clone(),
        backward_intensity: fields.backward_intensity(),
        image_intensity,
        density,
    }
}

/// Runs `config.t_final / config.dt` steps from `psi0`, handing every
/// `snapshot_stride`-th state (and the first and last) to `sink`.
pub fn evolve_into(
    psi0: &Wavefunction,
    params: &SystemParams,
    grid: &SpectralGrid,
    config: &EvolutionConfig,
    sink: &mut dyn SnapshotSink,
) -> Result<Evolution, DynamicsError> {
    config.validate()?;
    check_len(psi0, grid)?;
    let mut prop = Propagator::new(grid, params, config.dt, config.mode)?;
    let mut wf = psi0.clone();
    prop.prime(&mut wf);

    let n_steps = config.n_steps();
    let guard = (params.a_bar != 0.0 && config.mode == Mode::RealTime)
        .then(|| config.boundary_guard * 0.5 * grid.length());
    // Peak checks happen at least this often between snapshots.
    let chunk = config.snapshot_stride.min(64);

    let mut record = TrajectoryRecord::new(PositionSource::DensityPeak);
    let mut step = 0;
    let take = |step: usize,
                wf: &Wavefunction,
                record: &mut TrajectoryRecord,
                sink: &mut dyn SnapshotSink|
     -> Result<(), DynamicsError> {
        let t = step as f64 * config.dt;
        let snap = snapshot(step, t, wf, params, grid);
        let norm = wf.norm_value(grid);
        if !norm.is_finite() {
            return Err(DynamicsError::NonFinite { step });
        }
        let (center, width) = density_peak(&snap.density, grid);
        record.push(t, center, width, norm);
        sink.record(&snap)?;
        Ok(())
    };
    take(0, &wf, &mut record, sink)?;

    while step < n_steps {
        let next_snapshot = ((step / config.snapshot_stride) + 1) * config.snapshot_stride;
        let target = next_snapshot.min(n_steps);
        while step < target {
            let m = chunk.min(target - step);
            prop.advance(&mut wf, m);
            step += m;
            let density = wf.density();
            let peak = argmax(&density);
            if !density[peak].is_finite() {
                return Err(DynamicsError::NonFinite { step });
            }
            if let Some(limit) = guard {
                let position = grid.x_values()[peak];
                if position.abs() > limit {
                    return Err(DynamicsError::BoundaryViolation {
                        step,
                        t: step as f64 * config.dt,
                        position,
                        limit,
                        partial: Box::new(Evolution {
                            record,
                            final_state: wf,
                            steps: step,
                        }),
                    });
                }
            }
        }
        take(step, &wf, &mut record, sink)?;
    }
    debug!("evolved {n_steps} steps of dt = {}", config.dt);
    Ok(Evolution {
        record,
        final_state: wf,
        steps: n_steps,
    })
}

/// [`evolve_into`] collecting every snapshot in memory.
pub fn evolve(
    psi0: &Wavefunction,
    params: &SystemParams,
    grid: &SpectralGrid,
    config: &EvolutionConfig,
) -> Result<(Evolution, Vec<Snapshot>), DynamicsError> {
    let mut snaps = Vec::new();
    let evo = evolve_into(psi0, params, grid, config, &mut snaps)?;
    Ok((evo, snaps))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateConfig {
    pub dt: f64,
    /// Stop once max |Δn|/Δt̄ over one step drops below this.
    pub tol: f64,
    pub max_steps: usize,
    /// Below this (max−min)/mean density contrast the state counts as homogeneous.
    pub min_contrast: f64,
}

impl Default for GroundStateConfig {
    fn default() -> Self {
        Self {
            dt: 2.0,
            tol: 1e-6,
            max_steps: 200_000,
            min_contrast: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub state: Wavefunction,
    pub steps: usize,
    pub residual: f64,
}

/// Relaxes `psi0` in imaginary time to the lowest self-consistent state.
///
/// The acceleration is ignored: an unbounded linear potential has no ground
/// state.
pub fn imaginary_time_ground_state(
    psi0: &Wavefunction,
    params: &SystemParams,
    grid: &SpectralGrid,
    config: &GroundStateConfig,
) -> Result<GroundState, DynamicsError> {
    check_len(psi0, grid)?;
    if !(config.tol > 0.0) {
        return Err(DynamicsError::Config {
            key: "tol",
            reason: format!("must be positive, got {}", config.tol),
        });
    }
    let params = params.with_acceleration(0.0);
    if params.mirror_r == 0.0 || params.p0 == 0.0 {
        // Flat potential: only the homogeneous state is stationary.
        return Err(DynamicsError::NoDroplet { contrast: 0.0 });
    }
    let mut prop = Propagator::new(grid, &params, config.dt, Mode::ImaginaryTime)?;
    let mut wf = psi0.clone();
    prop.prime(&mut wf);
    let mut prev = wf.density();
    let mut residual = f64::INFINITY;
    for step in 1..=config.max_steps {
        prop.advance(&mut wf, 1);
        let mut change = 0.0f64;
        for (p, old) in wf.psi.iter().zip(prev.iter_mut()) {
            let n = p.norm_sqr();
            change = change.max((n - *old).abs());
            *old = n;
        }
        if !change.is_finite() {
            return Err(DynamicsError::NonFinite { step });
        }
        residual = change / config.dt;
        if residual < config.tol {
            let contrast = density_contrast(&prev);
            debug!("imaginary time converged after {step} steps, contrast {contrast:.3}");
            if contrast < config.min_contrast {
                return Err(DynamicsError::NoDroplet { contrast });
            }
            return Ok(GroundState {
                state: wf,
                steps: step,
                residual,
            });
        }
    }
    Err(DynamicsError::NotConverged {
        steps: config.max_steps,
        residual,
    })
}

/// (max − min)/mean.
pub fn density_contrast(density: &[f64]) -> f64 {
    let max = density.iter().cloned().fold(f64::MIN, f64::max);
    let min = density.iter().cloned().fold(f64::MAX, f64::min);
    let mean = density.iter().sum::<f64>() / density.len() as f64;
    (max - min) / mean
}

/// Kinetic energy plus the quadratic interaction energy of the
/// self-consistent field, ½∫n·(V − V_hom), minus ā∫x̄n.
///
/// With the linearised optical response this is the functional that
/// imaginary time descends; the full phase mask is not variational, so away
/// from the far-detuned limit it is a diagnostic only.
pub fn energy(psi: &Wavefunction, params: &SystemParams, grid: &SpectralGrid) -> f64 {
    let spec = grid
        .to_spectrum(&psi.psi)
        .expect("length checked by caller");
    // Unitary transform: ∑|ψ̂|² = ∑|ψ|², so ∫|∂ψ|² = dx ∑ q²|ψ̂|².
    let kinetic = params.omega_r_bar
        * grid.dx()
        * spec
            .iter()
            .zip(grid.q_values())
            .map(|(s, q)| q * q * s.norm_sqr())
            .sum::<f64>();
    let density = psi.density();
    let v = dipole_potential(&density, params, grid)
        .expect("density from |psi|^2 is valid")
        .potential;
    let v_hom = 0.25 * params.delta * params.p0 * (1.0 + params.mirror_r);
    let interaction = 0.5
        * grid.dx()
        * density
            .iter()
            .zip(&v)
            .map(|(n, v)| n * (v - v_hom))
            .sum::<f64>();
    let linear = -params.a_bar
        * grid.dx()
        * density
            .iter()
            .zip(grid.x_values())
            .map(|(n, x)| n * x)
            .sum::<f64>();
    kinetic + interaction + linear
}

/// Result of a time-step halving probe.
#[derive(Debug, Clone, PartialEq)]
pub struct DtProbe {
    /// Largest probed step whose trajectory agrees with its half-step run.
    pub dt: f64,
    /// (dt, relative change against dt/2) for every comparison made.
    pub history: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Relative difference of two density trajectories sampled at the same times:
/// the larger of the peak-position difference over the displacement scale
/// (at least one cell) and the relative width difference.
pub fn trajectory_change(a: &TrajectoryRecord, b: &TrajectoryRecord, grid: &SpectralGrid) -> f64 {
    let x0 = b.peak_positions.first().copied().unwrap_or(0.0);
    let scale = b
        .peak_positions
        .iter()
        .map(|x| (x - x0).abs())
        .fold(grid.dx(), f64::max);
    let mut change = 0.0f64;
    for i in 0..a.len().min(b.len()) {
        change = change.max((a.peak_positions[i] - b.peak_positions[i]).abs() / scale);
        let (wa, wb) = (a.widths[i], b.widths[i]);
        if wa.is_finite() && wb.is_finite() {
            change = change.max((wa - wb).abs() / wb);
        }
    }
    change
}

/// Halves dt from `start_dt` until a run and its half-step twin differ by
/// less than `tol`, up to `max_halvings` times.
pub fn probe_time_step(
    psi0: &Wavefunction,
    params: &SystemParams,
    grid: &SpectralGrid,
    template: &EvolutionConfig,
    start_dt: f64,
    tol: f64,
    max_halvings: usize,
) -> Result<DtProbe, DynamicsError> {
    let run = |dt: f64, stride_scale: usize| -> Result<TrajectoryRecord, DynamicsError> {
        let cfg = EvolutionConfig {
            dt,
            snapshot_stride: template.snapshot_stride * stride_scale,
            ..*template
        };
        Ok(evolve_into(psi0, params, grid, &cfg, &mut Discard)?.record)
    };
    let mut history = Vec::new();
    let mut dt = start_dt;
    let mut scale = 1;
    let mut coarse = run(dt, scale)?;
    for _ in 0..=max_halvings {
        let fine = run(0.5 * dt, 2 * scale)?;
        let change = trajectory_change(&coarse, &fine, grid);
        debug!("dt probe: dt = {dt}, change = {change:.3e}");
        history.push((dt, change));
        if change < tol {
            return Ok(DtProbe {
                dt,
                history,
                converged: true,
            });
        }
        dt *= 0.5;
        scale *= 2;
        coarse = fine;
    }
    Ok(DtProbe {
        dt,
        history,
        converged: false,
    })
}

/// Free spreading of a Gaussian density exp(−x̄²/s₀²) under i∂ₜΨ = −ω̄_r∂²ₓΨ.
pub fn free_gaussian_width(s0: f64, omega_r_bar: f64, t: f64) -> f64 {
    let tau = 2.0 * omega_r_bar * t / (s0 * s0);
    s0 * (1.0 + tau * tau).sqrt()
}
