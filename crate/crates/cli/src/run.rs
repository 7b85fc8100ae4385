//! Mode dispatch, derived quantities and error classification.

use std::f64::consts::PI;
use std::io;
use std::path::Path;

use log::{info, warn};
use smf_droplet::analysis::{
    bracket_threshold, fit_gaussian, heating_budget, predicted_width, pump_threshold,
    threshold_scan, UnitConverter,
};
use smf_droplet::dynamics::{
    evolve_into, imaginary_time_ground_state, probe_time_step, snapshot, DtProbe, EvolutionConfig,
    Mode,
};
use smf_droplet::sensing::sense_with_sink;
use smf_droplet::{
    AnalysisError, DynamicsError, SenseConfig, SenseReport, SensingError, SpectralGrid,
    Wavefunction,
};
use thiserror::Error;

use crate::config::{fmt_f64, RunConfig, RunMode, SeedProfile, TimeStep};
use crate::output::{self, OutputLock, SnapshotWriter};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("physics-validity abort: {0}")]
    Physics(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Config { key, .. } => CliError::Config(format!("evolution.{key}: {e}")),
            DynamicsError::Params(p) => CliError::Config(format!("{}: {p}", p.key())),
            DynamicsError::Grid(g) => CliError::Config(format!("grid: {g}")),
            DynamicsError::BoundaryViolation { .. } | DynamicsError::NoDroplet { .. } => {
                CliError::Physics(e.to_string())
            }
            DynamicsError::NonFinite { .. } | DynamicsError::NotConverged { .. } => {
                CliError::Numerical(e.to_string())
            }
            DynamicsError::Sink(io) => CliError::Io(io),
        }
    }
}

impl From<SensingError> for CliError {
    fn from(e: SensingError) -> Self {
        match e {
            SensingError::Dynamics(d) => d.into(),
            other => CliError::Physics(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::BadAnchor { name, .. } => {
                CliError::Config(format!("anchors.{name}: {e}"))
            }
            AnalysisError::Scan(s) => CliError::Numerical(s),
            other => CliError::Physics(other.to_string()),
        }
    }
}

/// One derived quantity: key, value, formula.
pub type Derived = (String, String, String);

fn entry(key: &str, value: f64, formula: &str) -> Derived {
    (key.to_string(), fmt_f64(value), formula.to_string())
}

/// Quantities computed from the configuration alone.
pub fn derived_quantities(config: &RunConfig) -> Result<Vec<Derived>, CliError> {
    let p = &config.params;
    let mut out = vec![entry("derived.chi0", p.chi0(), "b0/(2*delta)")];
    match pump_threshold(p) {
        Ok(p_th) => {
            out.push(entry("derived.p_th", p_th, "2*omega_r_bar/(b0*mirror_R)"));
            out.push(entry("derived.pump_ratio", p.p0 / p_th, "p0/p_th"));
            match predicted_width(p) {
                Ok(w) => {
                    out.push(entry(
                        "derived.predicted_width",
                        w.width,
                        "(p0/p_th)^(-1/4), Gaussian exp(-x^2/sigma^2)",
                    ));
                    if w.outside_asymptotic_regime {
                        out.push((
                            "derived.predicted_width_note".into(),
                            "p0 < 5*p_th: asymptotic estimate only".into(),
                            String::new(),
                        ));
                    }
                }
                Err(e) => out.push((
                    "derived.predicted_width".into(),
                    "none".into(),
                    e.to_string(),
                )),
            }
        }
        Err(e) => out.push(("derived.p_th".into(), "inf".into(), e.to_string())),
    }
    let h = heating_budget(p);
    out.push(entry(
        "derived.scattering_rate",
        h.scattering_rate,
        "(1+mirror_R)*p0/2 per unit t_bar",
    ));
    out.push(entry("derived.t_limit", h.t_limit, "2/((1+mirror_R)*p0)"));
    out.push((
        "derived.heating_ok".into(),
        h.allows(config.t_final).to_string(),
        "t_final <= t_limit".into(),
    ));
    let dx = config.length / config.n_points as f64;
    out.push(entry("derived.dx", dx, "length/n_points"));
    out.push(entry("derived.q_max", PI / dx, "pi/dx"));
    out.push(entry(
        "derived.expected_displacement",
        p.omega_r_bar * p.a_bar * config.t_final * config.t_final,
        "omega_r_bar*a_bar*t_final^2",
    ));
    out.push(entry(
        "derived.expected_gradient",
        p.omega_r_bar * p.a_bar / (2.0 * PI),
        "omega_r_bar*a_bar/(2*pi), slope of x/Lambda_c against t_bar^2",
    ));
    if h.t_limit.is_finite() {
        out.push(entry(
            "derived.a_min_at_t_limit",
            dx / (p.omega_r_bar * h.t_limit * h.t_limit),
            "dx/(omega_r_bar*t_limit^2)",
        ));
    }
    if let Some(a) = &config.anchors {
        let u = UnitConverter::new(a)?;
        out.push(entry("derived.q_c", u.q_c, "sqrt(pi*k0/(2*d)), 1/m"));
        out.push(entry("derived.lambda_c", 2.0 * PI / u.q_c, "2*pi/q_c, m"));
        out.push(entry(
            "derived.omega_r_bar_from_anchors",
            u.omega_r_bar,
            "hbar*q_c^2/(2*m*gamma)",
        ));
        out.push(entry(
            "derived.length_unit",
            1.0 / u.q_c,
            "x = x_bar/q_c, m",
        ));
        out.push(entry(
            "derived.time_unit",
            1.0 / u.gamma,
            "t = t_bar/gamma, s",
        ));
        out.push(entry(
            "derived.accel_unit",
            u.accel_unit,
            "a = a_bar*hbar*q_c*gamma/m, m/s^2",
        ));
        out.push(entry(
            "derived.a_si",
            u.accel_si(p.a_bar),
            "a_bar*accel_unit, m/s^2",
        ));
        if let Some(rel) = u.inconsistency(p) {
            warn!(
                "anchors imply omega_r_bar off by {:.1}% from the configured value",
                100.0 * rel
            );
            out.push(entry(
                "derived.anchor_mismatch",
                rel,
                "|omega_r_bar(anchors) - omega_r_bar|/omega_r_bar > 5%",
            ));
        }
    }
    Ok(out)
}

/// Text report of the derived quantities, for `predict`.
pub fn predict(config: &RunConfig) -> Result<String, CliError> {
    let mut s = String::new();
    for (k, v, note) in derived_quantities(config)? {
        let k = k.trim_start_matches("derived.");
        if note.is_empty() {
            s.push_str(&format!("{k} = {v}\n"));
        } else {
            s.push_str(&format!("{k} = {v}  # {note}\n"));
        }
    }
    Ok(s)
}

fn grid_of(config: &RunConfig) -> Result<SpectralGrid, CliError> {
    SpectralGrid::new(config.n_points, config.length)
        .map_err(|e| CliError::Config(format!("grid: {e}")))
}

fn seed_state(config: &RunConfig, grid: &SpectralGrid) -> Result<Wavefunction, CliError> {
    let norm = config.seed.normalization;
    Ok(match &config.seed.profile {
        SeedProfile::Gaussian { center, width } => {
            Wavefunction::gaussian(grid, *center, *width, norm)
        }
        SeedProfile::Homogeneous => Wavefunction::homogeneous(grid, norm),
        SeedProfile::File(path) => {
            let psi = output::read_snapshot_psi(path, grid)
                .map_err(|e| CliError::Config(format!("seed.path: {e}")))?;
            let mut wf = Wavefunction { psi, norm };
            wf.normalize(grid);
            wf
        }
    })
}

fn probe(
    config: &RunConfig,
    grid: &SpectralGrid,
    initial: &Wavefunction,
) -> Result<DtProbe, CliError> {
    let c = &config.convergence;
    let steps = (c.t_final / c.start_dt).round() as usize;
    let template = EvolutionConfig {
        dt: c.start_dt,
        t_final: c.t_final,
        snapshot_stride: (steps / 10).max(1),
        mode: Mode::RealTime,
        boundary_guard: config.boundary_guard,
    };
    template
        .validate()
        .map_err(|e| CliError::Config(format!("convergence: {e}")))?;
    Ok(probe_time_step(
        initial,
        &config.params,
        grid,
        &template,
        c.start_dt,
        c.tol,
        c.max_halvings,
    )?)
}

fn choose_dt(
    config: &RunConfig,
    grid: &SpectralGrid,
    initial: &Wavefunction,
    derived: &mut Vec<Derived>,
) -> Result<f64, CliError> {
    let dt = match config.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Auto => {
            let p = probe(config, grid, initial)?;
            if !p.converged {
                return Err(CliError::Numerical(format!(
                    "dt probe did not converge down to dt = {}",
                    p.dt
                )));
            }
            for (dt, change) in &p.history {
                derived.push(entry(
                    &format!("derived.dt_probe.{}", fmt_f64(*dt)),
                    *change,
                    "relative trajectory change against dt/2",
                ));
            }
            p.dt
        }
    };
    let steps = config.t_final / dt;
    if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
        return Err(CliError::Config(format!(
            "evolution.t_final: {} is not a whole number of steps of the selected dt = {dt}",
            config.t_final
        )));
    }
    derived.push(entry("derived.dt", dt, "selected time step"));
    Ok(dt)
}

fn check_heating(config: &RunConfig) -> Result<(), CliError> {
    let h = heating_budget(&config.params);
    if !h.allows(config.t_final) {
        return Err(CliError::Physics(format!(
            "evolution.t_final = {} exceeds the heating limit t_limit = {:.4e} (p0 = {}, mirror_R = {})",
            config.t_final, h.t_limit, config.params.p0, config.params.mirror_r
        )));
    }
    Ok(())
}

fn write_manifest(dir: &Path, config: &RunConfig, derived: &[Derived]) -> io::Result<()> {
    let header = format!(
        "# canonical configuration\n{}\n# derived quantities\n",
        config.canonical()
    );
    output::write_keyed(&dir.join("manifest.txt"), &header, derived)
}

/// Runs the configured mode and writes its outputs. Returns a short summary.
pub fn run(config: &RunConfig) -> Result<String, CliError> {
    for w in config.params.validity_warnings() {
        warn!("{w}");
    }
    let dir = config.output_dir.clone();
    let _lock = OutputLock::acquire(&dir).map_err(|e| {
        if e.kind() == io::ErrorKind::AlreadyExists {
            CliError::Config(format!(
                "output_dir: {} is locked by another run (remove {} if stale)",
                dir.display(),
                dir.join(output::LOCK_FILE).display()
            ))
        } else {
            CliError::Io(e)
        }
    })?;
    let mut derived = derived_quantities(config)?;
    let result = match config.mode {
        RunMode::Predict => Ok("predict: derived quantities written to manifest.txt".to_string()),
        RunMode::GroundState => run_ground_state(config, &dir, &mut derived),
        RunMode::Evolve => run_evolve(config, &dir, &mut derived),
        RunMode::Sense => run_sense(config, &dir, &mut derived),
        RunMode::ThresholdScan => run_scan(config, &dir, &mut derived),
    };
    write_manifest(&dir, config, &derived)?;
    result
}

fn run_ground_state(
    config: &RunConfig,
    dir: &Path,
    derived: &mut Vec<Derived>,
) -> Result<String, CliError> {
    let grid = grid_of(config)?;
    let seed = seed_state(config, &grid)?;
    let params = config.params.with_acceleration(0.0);
    let gs = imaginary_time_ground_state(&seed, &params, &grid, &config.ground_state)?;
    let snap = snapshot(0, 0.0, &gs.state, &params, &grid);
    output::write_snapshot(&dir.join("ground_state.csv"), &snap, &grid)?;
    let fit = fit_gaussian(&snap.density, &grid)
        .map_err(|e| CliError::Physics(format!("relaxed state: {e}")))?;
    derived.push(entry(
        "result.steps",
        gs.steps as f64,
        "imaginary-time steps",
    ));
    derived.push(entry("result.residual", gs.residual, "max |dn|/dt at stop"));
    derived.push(entry("result.width", fit.width, "fitted Gaussian width"));
    derived.push(entry("result.center", fit.center, "fitted Gaussian center"));
    derived.push(entry(
        "result.amplitude",
        fit.amplitude,
        "fitted peak density",
    ));
    Ok(format!(
        "ground_state: width {:.6} after {} steps",
        fit.width, gs.steps
    ))
}

/// Seed, relaxed at zero acceleration when `seed.relax` is set.
fn initial_state(config: &RunConfig, grid: &SpectralGrid) -> Result<Wavefunction, CliError> {
    let seed = seed_state(config, grid)?;
    if !config.seed.relax {
        return Ok(seed);
    }
    let params = config.params.with_acceleration(0.0);
    let gs = imaginary_time_ground_state(&seed, &params, grid, &config.ground_state)?;
    info!("relaxed in {} imaginary-time steps", gs.steps);
    Ok(gs.state)
}

fn run_evolve(
    config: &RunConfig,
    dir: &Path,
    derived: &mut Vec<Derived>,
) -> Result<String, CliError> {
    check_heating(config)?;
    let grid = grid_of(config)?;
    let initial = initial_state(config, &grid)?;
    let dt = choose_dt(config, &grid, &initial, derived)?;
    let evo = EvolutionConfig {
        dt,
        t_final: config.t_final,
        snapshot_stride: stride_for(config, dt),
        mode: Mode::RealTime,
        boundary_guard: config.boundary_guard,
    };
    let mut writer = SnapshotWriter::new(dir, &grid, config.intensity)?;
    let result = evolve_into(&initial, &config.params, &grid, &evo, &mut writer);
    writer.finish()?;
    let (record, outcome) = match result {
        Ok(e) => (e.record, Ok(())),
        Err(DynamicsError::BoundaryViolation {
            partial,
            step,
            t,
            position,
            limit,
        }) => {
            let msg = format!(
                "density peak at x = {position:.4} left |x| <= {limit:.4} at step {step} (t = {t:.6e}); partial record written"
            );
            (partial.record, Err(CliError::Physics(msg)))
        }
        Err(e) => return Err(e.into()),
    };
    output::write_record(&dir.join("timeseries.csv"), &record)?;
    derived.push(entry(
        "result.width_ratio",
        record.width_ratio(),
        "max/min fitted width",
    ));
    outcome?;
    Ok(format!("evolve: {} snapshots written", record.len()))
}

/// Snapshot stride in steps for the selected dt, keeping snapshot times
/// those of the configured stride at the probe's starting dt.
fn stride_for(config: &RunConfig, dt: f64) -> usize {
    match config.dt {
        TimeStep::Fixed(_) => config.snapshot_stride,
        TimeStep::Auto => {
            let scale = (config.convergence.start_dt / dt).round().max(1.0) as usize;
            config.snapshot_stride * scale
        }
    }
}

fn run_sense(
    config: &RunConfig,
    dir: &Path,
    derived: &mut Vec<Derived>,
) -> Result<String, CliError> {
    check_heating(config)?;
    let grid = grid_of(config)?;
    let initial = initial_state(config, &grid)?;
    let dt = choose_dt(config, &grid, &initial, derived)?;
    let sense_cfg = SenseConfig {
        evolution: EvolutionConfig {
            dt,
            t_final: config.t_final,
            snapshot_stride: stride_for(config, dt),
            mode: Mode::RealTime,
            boundary_guard: config.boundary_guard,
        },
        intensity: config.intensity,
        ground_state: config.ground_state,
        max_width_ratio: config.max_width_ratio,
    };
    let mut writer = SnapshotWriter::new(dir, &grid, config.intensity)?;
    let report = sense_with_sink(&initial, &config.params, &grid, &sense_cfg, &mut writer);
    writer.finish()?;
    let report = report?;
    output::write_record(&dir.join("timeseries.csv"), &report.density)?;
    output::write_record(&dir.join("trajectory.csv"), &report.tracked)?;
    write_estimate(dir, config, &report)?;
    if let Some(e) = &report.estimate {
        output::write_trajectory_plot(
            &dir.join("plot").join("trajectory.dat"),
            &report.tracked,
            e,
        )?;
        derived.push(entry("result.a_bar_hat", e.a_bar_hat, "c2/omega_r_bar"));
        derived.push(entry("result.gradient", e.gradient, "c2/(2*pi)"));
    }
    if report.truncated {
        return Err(CliError::Physics(
            "boundary guard stopped the run; partial estimate written".into(),
        ));
    }
    Ok(match &report.estimate {
        Some(e) => format!(
            "sense: a_bar_hat = {:.6e} +- {:.2e}, gradient = {:.6e}, reliable = {}",
            e.a_bar_hat, e.std_error, e.gradient, report.reliable
        ),
        None => format!("sense: no estimate ({})", report.issues.join("; ")),
    })
}

fn write_estimate(dir: &Path, config: &RunConfig, report: &SenseReport) -> io::Result<()> {
    let mut out: Vec<Derived> = vec![
        (
            "intensity_kind".into(),
            match config.intensity {
                smf_droplet::IntensityKind::BackwardAtBec => "backward_at_BEC".into(),
                smf_droplet::IntensityKind::ImagePlaneForward => "image_plane_forward".into(),
            },
            String::new(),
        ),
        (
            "reliable".into(),
            report.reliable.to_string(),
            String::new(),
        ),
        (
            "truncated".into(),
            report.truncated.to_string(),
            String::new(),
        ),
        (
            "tracked_points".into(),
            report.tracked.len().to_string(),
            String::new(),
        ),
    ];
    for (i, issue) in report.issues.iter().enumerate() {
        out.push((format!("issue.{i}"), issue.clone(), String::new()));
    }
    if let Some(e) = &report.estimate {
        let displacement =
            report.tracked.peak_positions.last().unwrap() - report.tracked.peak_positions[0];
        out.extend([
            entry("a_bar_hat", e.a_bar_hat, "c2/omega_r_bar"),
            entry(
                "a_bar_std_error",
                e.std_error,
                "sqrt(cov[2][2])/omega_r_bar",
            ),
            entry("a_bar_configured", config.params.a_bar, ""),
            entry("gradient", e.gradient, "c2/(2*pi)"),
            entry("c0", e.coefficients[0], "x_bar at t_bar = 0"),
            entry("c1", e.coefficients[1], "velocity term"),
            entry("c2", e.coefficients[2], "omega_r_bar*a_bar"),
            entry(
                "velocity_fraction",
                (e.coefficients[1] * e.t_max).abs() / displacement.abs(),
                "|c1|*t_max/displacement",
            ),
            entry(
                "displacement",
                displacement,
                "last minus first tracked position",
            ),
            entry("rms_residual", e.rms_residual, ""),
            entry("a_min", e.a_min, "dx/(omega_r_bar*t_max^2)"),
            entry("t_max", e.t_max, ""),
        ]);
        for r in 0..3 {
            for c in 0..3 {
                out.push(entry(&format!("cov.{r}{c}"), e.covariance[r][c], ""));
            }
        }
        if let Some(a) = &config.anchors {
            if let Ok(u) = UnitConverter::new(a) {
                out.push(entry("a_si_hat", u.accel_si(e.a_bar_hat), "m/s^2"));
                out.push(entry("displacement_m", u.length_m(displacement), "m"));
                out.push(entry("t_max_s", u.time_s(e.t_max), "s"));
            }
        }
    }
    output::write_keyed(&dir.join("estimate.txt"), "# acceleration estimate\n", &out)
}

fn run_scan(
    config: &RunConfig,
    dir: &Path,
    derived: &mut Vec<Derived>,
) -> Result<String, CliError> {
    let grid = grid_of(config)?;
    let p_th = pump_threshold(&config.params)?;
    let p0s: Vec<f64> = config.scan_ratios.iter().map(|r| r * p_th).collect();
    let points = threshold_scan(&config.params, &p0s, &grid, &config.scan)?;
    let mut rows = String::from("p0,pump_ratio,growth_rate,predicted_rate,growing\n");
    for p in &points {
        rows.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(p.p0),
            fmt_f64(p.pump_ratio),
            fmt_f64(p.growth_rate),
            fmt_f64(p.predicted_rate),
            p.growing
        ));
    }
    std::fs::write(dir.join("threshold_scan.csv"), rows)?;
    match bracket_threshold(&points) {
        Some((lo, hi)) => {
            derived.push(entry("result.threshold_low", lo, "largest stable p0"));
            derived.push(entry("result.threshold_high", hi, "smallest growing p0"));
            Ok(format!(
                "threshold_scan: threshold in [{:.4}, {:.4}]*p_th",
                lo / p_th,
                hi / p_th
            ))
        }
        None => Ok("threshold_scan: no stable-to-growing transition in the scanned range".into()),
    }
}

/// Runs the dt-halving probe and returns a table of (dt, change).
pub fn convergence(config: &RunConfig) -> Result<String, CliError> {
    let grid = grid_of(config)?;
    let initial = initial_state(config, &grid)?;
    let p = probe(config, &grid, &initial)?;
    let mut s = String::from("dt,relative_change\n");
    for (dt, change) in &p.history {
        s.push_str(&format!("{},{}\n", fmt_f64(*dt), fmt_f64(*change)));
    }
    s.push_str(&format!(
        "# selected dt = {} (converged = {})\n",
        fmt_f64(p.dt),
        p.converged
    ));
    Ok(s)
}
