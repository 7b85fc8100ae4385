//! Flat `key = value` run configuration with dotted section prefixes.
//!
//! Every accepted configuration has one canonical text form: all keys in a
//! fixed order, numbers with 17 significant digits. Parsing the canonical
//! form gives back the same configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use smf_droplet::analysis::{PhysicalAnchors, ScanConfig};
use smf_droplet::dynamics::{EvolutionConfig, GroundStateConfig, Mode};
use smf_droplet::{IntensityKind, Normalization, SystemParams};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given more than once")]
    Duplicate(String),
    #[error("`{key}`: cannot parse `{value}` ({expected})")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
}

impl ConfigError {
    fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    GroundState,
    Evolve,
    Sense,
    ThresholdScan,
    Predict,
}

impl RunMode {
    const NAMES: [(&'static str, RunMode); 5] = [
        ("ground_state", RunMode::GroundState),
        ("evolve", RunMode::Evolve),
        ("sense", RunMode::Sense),
        ("threshold_scan", RunMode::ThresholdScan),
        ("predict", RunMode::Predict),
    ];

    pub fn name(&self) -> &'static str {
        Self::NAMES.iter().find(|(_, m)| m == self).unwrap().0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// Chosen by the dt-halving probe before the run.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeedProfile {
    Gaussian {
        center: f64,
        width: f64,
    },
    Homogeneous,
    /// Snapshot file written by an earlier run.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub profile: SeedProfile,
    pub normalization: Normalization,
    /// Relax the seed in imaginary time (at ā = 0) before real-time modes.
    pub relax: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceSettings {
    pub start_dt: f64,
    pub tol: f64,
    pub max_halvings: usize,
    /// Horizon of each probe run.
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: RunMode,
    pub output_dir: PathBuf,
    pub params: SystemParams,
    pub n_points: usize,
    pub length: f64,
    pub dt: TimeStep,
    pub t_final: f64,
    pub snapshot_stride: usize,
    pub boundary_guard: f64,
    pub ground_state: GroundStateConfig,
    pub seed: Seed,
    pub intensity: IntensityKind,
    pub max_width_ratio: f64,
    pub scan_ratios: Vec<f64>,
    pub scan: ScanConfig,
    pub convergence: ConvergenceSettings,
    pub anchors: Option<PhysicalAnchors>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let evo = EvolutionConfig::default();
        Self {
            mode: RunMode::Predict,
            output_dir: PathBuf::from("out"),
            params: SystemParams::reference(),
            n_points: 1024,
            length: smf_droplet::grid::DEFAULT_LENGTH,
            dt: TimeStep::Auto,
            t_final: evo.t_final,
            snapshot_stride: 5000,
            boundary_guard: evo.boundary_guard,
            ground_state: GroundStateConfig::default(),
            seed: Seed {
                profile: SeedProfile::Gaussian {
                    center: 0.0,
                    width: 0.6,
                },
                normalization: Normalization::droplet(),
                relax: true,
            },
            intensity: IntensityKind::BackwardAtBec,
            max_width_ratio: 1.5,
            scan_ratios: vec![0.25, 0.5, 0.8, 0.9, 1.1, 1.25, 2.0, 4.0],
            scan: ScanConfig::default(),
            convergence: ConvergenceSettings {
                start_dt: 1.0,
                tol: 1e-3,
                max_halvings: 6,
                t_final: 3e4,
            },
            anchors: None,
        }
    }
}

/// Every accepted key, in canonical order.
pub const KEYS: &[&str] = &[
    "mode",
    "output_dir",
    "omega_r_bar",
    "b0",
    "delta",
    "mirror_R",
    "p0",
    "a_bar",
    "grid.n_points",
    "grid.length",
    "evolution.dt",
    "evolution.t_final",
    "evolution.snapshot_stride",
    "evolution.boundary_guard",
    "ground_state.dt",
    "ground_state.tol",
    "ground_state.max_steps",
    "ground_state.min_contrast",
    "seed.profile",
    "seed.center",
    "seed.width",
    "seed.path",
    "seed.normalization",
    "seed.relax",
    "sense.intensity",
    "sense.max_width_ratio",
    "scan.p0_ratios",
    "scan.probe_amplitude",
    "scan.dt_recoil",
    "scan.horizon_recoil",
    "convergence.start_dt",
    "convergence.tol",
    "convergence.max_halvings",
    "convergence.t_final",
    "anchors.lambda0",
    "anchors.mirror_distance",
    "anchors.gamma",
    "anchors.mass",
];

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        expected: "a number",
    })?;
    if !v.is_finite() {
        return Err(ConfigError::invalid(key, "must be finite"));
    }
    Ok(v)
}

fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        expected: "a non-negative integer",
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            expected: "true or false",
        }),
    }
}

/// Splits `key = value` text into pairs, rejecting syntax errors, unknown
/// keys and duplicates. `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: line.to_string(),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            });
        }
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(ConfigError::Duplicate(k.to_string()));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Parses a `key=value` override.
pub fn parse_override(text: &str) -> Result<(String, String), ConfigError> {
    let (k, v) = text.split_once('=').ok_or_else(|| ConfigError::Syntax {
        line: 0,
        text: text.to_string(),
    })?;
    let (k, v) = (k.trim(), v.trim());
    if !KEYS.contains(&k) {
        return Err(ConfigError::UnknownKey(k.to_string()));
    }
    Ok((k.to_string(), v.to_string()))
}

impl RunConfig {
    /// Parses config text, then applies `overrides` in order.
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut pairs = parse_pairs(text)?;
        for (k, v) in overrides {
            match pairs.iter_mut().find(|(seen, _)| seen == k) {
                Some(slot) => slot.1 = v.clone(),
                None => pairs.push((k.clone(), v.clone())),
            }
        }
        if !pairs.iter().any(|(k, _)| k == "mode") {
            return Err(ConfigError::Missing("mode"));
        }
        let mut c = RunConfig::default();
        let mut center = None;
        let mut width = None;
        let mut path = None;
        let mut profile = None;
        let mut anchors: [Option<f64>; 4] = [None; 4];
        for (k, v) in &pairs {
            let (k, v) = (k.as_str(), v.as_str());
            match k {
                "mode" => {
                    c.mode = RunMode::NAMES
                        .iter()
                        .find(|(n, _)| *n == v)
                        .map(|(_, m)| *m)
                        .ok_or_else(|| ConfigError::BadValue {
                            key: k.into(),
                            value: v.into(),
                            expected: "ground_state, evolve, sense, threshold_scan or predict",
                        })?
                }
                "output_dir" => c.output_dir = PathBuf::from(v),
                "omega_r_bar" => c.params.omega_r_bar = parse_f64(k, v)?,
                "b0" => c.params.b0 = parse_f64(k, v)?,
                "delta" => c.params.delta = parse_f64(k, v)?,
                "mirror_R" => c.params.mirror_r = parse_f64(k, v)?,
                "p0" => c.params.p0 = parse_f64(k, v)?,
                "a_bar" => c.params.a_bar = parse_f64(k, v)?,
                "grid.n_points" => c.n_points = parse_usize(k, v)?,
                "grid.length" => c.length = parse_f64(k, v)?,
                "evolution.dt" => {
                    c.dt = if v == "auto" {
                        TimeStep::Auto
                    } else {
                        TimeStep::Fixed(parse_f64(k, v)?)
                    }
                }
                "evolution.t_final" => c.t_final = parse_f64(k, v)?,
                "evolution.snapshot_stride" => c.snapshot_stride = parse_usize(k, v)?,
                "evolution.boundary_guard" => c.boundary_guard = parse_f64(k, v)?,
                "ground_state.dt" => c.ground_state.dt = parse_f64(k, v)?,
                "ground_state.tol" => c.ground_state.tol = parse_f64(k, v)?,
                "ground_state.max_steps" => c.ground_state.max_steps = parse_usize(k, v)?,
                "ground_state.min_contrast" => c.ground_state.min_contrast = parse_f64(k, v)?,
                "seed.profile" => profile = Some(v.to_string()),
                "seed.center" => center = Some(parse_f64(k, v)?),
                "seed.width" => width = Some(parse_f64(k, v)?),
                "seed.path" => path = Some(PathBuf::from(v)),
                "seed.normalization" => {
                    c.seed.normalization = match v {
                        "droplet" => Normalization::droplet(),
                        "mean-density-one" => Normalization::MeanDensityOne,
                        _ => Normalization::TotalNorm(parse_f64(k, v).map_err(|_| {
                            ConfigError::BadValue {
                                key: k.into(),
                                value: v.into(),
                                expected: "droplet, mean-density-one or a positive number",
                            }
                        })?),
                    }
                }
                "seed.relax" => c.seed.relax = parse_bool(k, v)?,
                "sense.intensity" => {
                    c.intensity = match v {
                        "backward_at_bec" => IntensityKind::BackwardAtBec,
                        "image_plane_forward" => IntensityKind::ImagePlaneForward,
                        _ => {
                            return Err(ConfigError::BadValue {
                                key: k.into(),
                                value: v.into(),
                                expected: "backward_at_bec or image_plane_forward",
                            })
                        }
                    }
                }
                "sense.max_width_ratio" => c.max_width_ratio = parse_f64(k, v)?,
                "scan.p0_ratios" => {
                    c.scan_ratios = v
                        .split(',')
                        .map(|s| parse_f64(k, s.trim()))
                        .collect::<Result<_, _>>()?
                }
                "scan.probe_amplitude" => c.scan.probe_amplitude = parse_f64(k, v)?,
                "scan.dt_recoil" => c.scan.dt_recoil = parse_f64(k, v)?,
                "scan.horizon_recoil" => c.scan.horizon_recoil = parse_f64(k, v)?,
                "convergence.start_dt" => c.convergence.start_dt = parse_f64(k, v)?,
                "convergence.tol" => c.convergence.tol = parse_f64(k, v)?,
                "convergence.max_halvings" => c.convergence.max_halvings = parse_usize(k, v)?,
                "convergence.t_final" => c.convergence.t_final = parse_f64(k, v)?,
                "anchors.lambda0" => anchors[0] = Some(parse_f64(k, v)?),
                "anchors.mirror_distance" => anchors[1] = Some(parse_f64(k, v)?),
                "anchors.gamma" => anchors[2] = Some(parse_f64(k, v)?),
                "anchors.mass" => anchors[3] = Some(parse_f64(k, v)?),
                _ => return Err(ConfigError::UnknownKey(k.to_string())),
            }
        }

        c.seed.profile = match profile.as_deref().unwrap_or("gaussian") {
            "gaussian" => {
                if path.is_some() {
                    return Err(ConfigError::invalid(
                        "seed.path",
                        "only used with seed.profile = file",
                    ));
                }
                SeedProfile::Gaussian {
                    center: center.unwrap_or(0.0),
                    width: width.unwrap_or(0.6),
                }
            }
            other => {
                if let Some(k) = [("seed.center", center), ("seed.width", width)]
                    .iter()
                    .find(|(_, v)| v.is_some())
                    .map(|(k, _)| *k)
                {
                    return Err(ConfigError::invalid(
                        k,
                        "only used with seed.profile = gaussian",
                    ));
                }
                match other {
                    "homogeneous" => {
                        if path.is_some() {
                            return Err(ConfigError::invalid(
                                "seed.path",
                                "only used with seed.profile = file",
                            ));
                        }
                        SeedProfile::Homogeneous
                    }
                    "file" => SeedProfile::File(path.ok_or(ConfigError::Missing("seed.path"))?),
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: "seed.profile".into(),
                            value: other.into(),
                            expected: "gaussian, homogeneous or file",
                        })
                    }
                }
            }
        };
        c.anchors = match anchors {
            [None, None, None, None] => None,
            [Some(lambda0), Some(mirror_distance), Some(gamma), Some(mass)] => {
                Some(PhysicalAnchors {
                    lambda0,
                    mirror_distance,
                    gamma,
                    mass,
                })
            }
            _ => {
                let names = [
                    "anchors.lambda0",
                    "anchors.mirror_distance",
                    "anchors.gamma",
                    "anchors.mass",
                ];
                let missing = names
                    .iter()
                    .zip(anchors)
                    .find(|(_, v)| v.is_none())
                    .unwrap()
                    .0;
                return Err(ConfigError::invalid(
                    missing,
                    "anchors must be given all together",
                ));
            }
        };
        c.validate()?;
        Ok(c)
    }

    /// Checks ranges and cross-field constraints, naming the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params
            .validate()
            .map_err(|e| ConfigError::invalid(e.key(), e.to_string()))?;
        if self.n_points < smf_droplet::grid::MIN_POINTS {
            return Err(ConfigError::invalid(
                "grid.n_points",
                format!("must be at least {}", smf_droplet::grid::MIN_POINTS),
            ));
        }
        if !(self.length > 0.0) {
            return Err(ConfigError::invalid("grid.length", "must be positive"));
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(ConfigError::invalid(
                    "evolution.dt",
                    "must be positive or `auto`",
                ));
            }
        }
        let evo = EvolutionConfig {
            dt: match self.dt {
                TimeStep::Fixed(dt) => dt,
                TimeStep::Auto => self.convergence.start_dt,
            },
            t_final: self.t_final,
            snapshot_stride: self.snapshot_stride,
            mode: Mode::RealTime,
            boundary_guard: self.boundary_guard,
        };
        evo.validate().map_err(|e| match e {
            smf_droplet::DynamicsError::Config { key, reason } => {
                ConfigError::invalid(&format!("evolution.{key}"), reason)
            }
            other => ConfigError::invalid("evolution", other.to_string()),
        })?;
        if !(self.ground_state.dt > 0.0) {
            return Err(ConfigError::invalid("ground_state.dt", "must be positive"));
        }
        if !(self.ground_state.tol > 0.0) {
            return Err(ConfigError::invalid("ground_state.tol", "must be positive"));
        }
        if self.ground_state.max_steps == 0 {
            return Err(ConfigError::invalid(
                "ground_state.max_steps",
                "must be at least 1",
            ));
        }
        if let SeedProfile::Gaussian { width, .. } = self.seed.profile {
            if !(width > 0.0) {
                return Err(ConfigError::invalid("seed.width", "must be positive"));
            }
        }
        if let Normalization::TotalNorm(n) = self.seed.normalization {
            if !(n > 0.0) {
                return Err(ConfigError::invalid(
                    "seed.normalization",
                    "must be positive",
                ));
            }
        }
        if !(self.max_width_ratio >= 1.0) {
            return Err(ConfigError::invalid(
                "sense.max_width_ratio",
                "must be at least 1",
            ));
        }
        if self.scan_ratios.is_empty() || self.scan_ratios.iter().any(|r| !(*r > 0.0)) {
            return Err(ConfigError::invalid(
                "scan.p0_ratios",
                "must be a list of positive numbers",
            ));
        }
        for (key, v) in [
            ("scan.probe_amplitude", self.scan.probe_amplitude),
            ("scan.dt_recoil", self.scan.dt_recoil),
            ("scan.horizon_recoil", self.scan.horizon_recoil),
            ("convergence.start_dt", self.convergence.start_dt),
            ("convergence.tol", self.convergence.tol),
            ("convergence.t_final", self.convergence.t_final),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::invalid(key, "must be positive"));
            }
        }
        if let Some(a) = &self.anchors {
            a.validate().map_err(|e| match e {
                smf_droplet::AnalysisError::BadAnchor { name, .. } => {
                    ConfigError::invalid(&format!("anchors.{name}"), e.to_string())
                }
                other => ConfigError::invalid("anchors", other.to_string()),
            })?;
        }
        Ok(())
    }

    /// The canonical text form.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let p = &self.params;
        put("mode", self.mode.name().into());
        put("output_dir", self.output_dir.display().to_string());
        put("omega_r_bar", fmt_f64(p.omega_r_bar));
        put("b0", fmt_f64(p.b0));
        put("delta", fmt_f64(p.delta));
        put("mirror_R", fmt_f64(p.mirror_r));
        put("p0", fmt_f64(p.p0));
        put("a_bar", fmt_f64(p.a_bar));
        put("grid.n_points", self.n_points.to_string());
        put("grid.length", fmt_f64(self.length));
        put(
            "evolution.dt",
            match self.dt {
                TimeStep::Auto => "auto".into(),
                TimeStep::Fixed(dt) => fmt_f64(dt),
            },
        );
        put("evolution.t_final", fmt_f64(self.t_final));
        put(
            "evolution.snapshot_stride",
            self.snapshot_stride.to_string(),
        );
        put("evolution.boundary_guard", fmt_f64(self.boundary_guard));
        put("ground_state.dt", fmt_f64(self.ground_state.dt));
        put("ground_state.tol", fmt_f64(self.ground_state.tol));
        put(
            "ground_state.max_steps",
            self.ground_state.max_steps.to_string(),
        );
        put(
            "ground_state.min_contrast",
            fmt_f64(self.ground_state.min_contrast),
        );
        match &self.seed.profile {
            SeedProfile::Gaussian { center, width } => {
                put("seed.profile", "gaussian".into());
                put("seed.center", fmt_f64(*center));
                put("seed.width", fmt_f64(*width));
            }
            SeedProfile::Homogeneous => put("seed.profile", "homogeneous".into()),
            SeedProfile::File(path) => {
                put("seed.profile", "file".into());
                put("seed.path", path.display().to_string());
            }
        }
        put(
            "seed.normalization",
            match self.seed.normalization {
                Normalization::MeanDensityOne => "mean-density-one".into(),
                Normalization::TotalNorm(n) => fmt_f64(n),
            },
        );
        put("seed.relax", self.seed.relax.to_string());
        put(
            "sense.intensity",
            match self.intensity {
                IntensityKind::BackwardAtBec => "backward_at_bec".into(),
                IntensityKind::ImagePlaneForward => "image_plane_forward".into(),
            },
        );
        put("sense.max_width_ratio", fmt_f64(self.max_width_ratio));
        put(
            "scan.p0_ratios",
            self.scan_ratios
                .iter()
                .map(|r| fmt_f64(*r))
                .collect::<Vec<_>>()
                .join(","),
        );
        put("scan.probe_amplitude", fmt_f64(self.scan.probe_amplitude));
        put("scan.dt_recoil", fmt_f64(self.scan.dt_recoil));
        put("scan.horizon_recoil", fmt_f64(self.scan.horizon_recoil));
        put("convergence.start_dt", fmt_f64(self.convergence.start_dt));
        put("convergence.tol", fmt_f64(self.convergence.tol));
        put(
            "convergence.max_halvings",
            self.convergence.max_halvings.to_string(),
        );
        put("convergence.t_final", fmt_f64(self.convergence.t_final));
        if let Some(a) = &self.anchors {
            put("anchors.lambda0", fmt_f64(a.lambda0));
            put("anchors.mirror_distance", fmt_f64(a.mirror_distance));
            put("anchors.gamma", fmt_f64(a.gamma));
            put("anchors.mass", fmt_f64(a.mass));
        }
        s
    }
}

/// The bundled reference configuration.
pub const REFERENCE_CONFIG: &str = include_str!("../configs/reference.conf");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_parses_and_round_trips() {
        let c = RunConfig::parse(REFERENCE_CONFIG, &[]).unwrap();
        assert_eq!(c.mode, RunMode::Sense);
        assert_eq!(c.params.a_bar, 1e-5);
        let canon = c.canonical();
        let again = RunConfig::parse(&canon, &[]).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.canonical(), canon);
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert_eq!(
            RunConfig::parse("mode = predict\nmirror_r = 0.5\n", &[]),
            Err(ConfigError::UnknownKey("mirror_r".into()))
        );
        assert_eq!(
            RunConfig::parse("mode = predict\np0 = 1e-6\np0 = 2e-6\n", &[]),
            Err(ConfigError::Duplicate("p0".into()))
        );
        assert!(matches!(
            RunConfig::parse("mode predict", &[]),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn invalid_reflectivity_names_the_key() {
        let e = RunConfig::parse("mode = predict\nmirror_R = 1.5\n", &[]).unwrap_err();
        assert!(e.to_string().contains("mirror_R"), "{e}");
    }

    #[test]
    fn overrides_replace_values() {
        let o = parse_override("a_bar=-1e-5").unwrap();
        let c = RunConfig::parse(REFERENCE_CONFIG, &[o]).unwrap();
        assert_eq!(c.params.a_bar, -1e-5);
        assert!(parse_override("nonsense=1").is_err());
    }

    #[test]
    fn seed_keys_must_match_profile() {
        let e = RunConfig::parse(
            "mode = evolve\nseed.profile = homogeneous\nseed.width = 1\n",
            &[],
        )
        .unwrap_err();
        assert!(e.to_string().contains("seed.width"));
        let e = RunConfig::parse("mode = evolve\nseed.profile = file\n", &[]).unwrap_err();
        assert_eq!(e, ConfigError::Missing("seed.path"));
        let e = RunConfig::parse("mode = evolve\nanchors.gamma = 1\n", &[]).unwrap_err();
        assert!(e.to_string().contains("anchors.lambda0"));
    }

    #[test]
    fn step_count_must_be_whole() {
        let e = RunConfig::parse(
            "mode = evolve\nevolution.dt = 0.7\nevolution.t_final = 1\n",
            &[],
        )
        .unwrap_err();
        assert!(e.to_string().contains("evolution.t_final"), "{e}");
    }
}
