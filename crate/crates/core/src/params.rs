//! Dimensionless model constants.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

/// Total norm ∫|Ψ|² dx̄ used for droplet runs.
///
/// With a Gaussian ansatz and the linearised optical response on an unbounded
/// window, the droplet energy per atom is
/// ω̄_r/(2σ²) − (b₀Rp₀N/16π)(1 − σ²/2π + …), minimised at
/// σ⁴ = 8π²·p_th/(p₀N). This norm makes that minimum coincide with
/// σ = (p₀/p_th)^(−1/4).
pub const DROPLET_NORM: f64 = 8.0 * PI * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("omega_r_bar must be positive, got {0}")]
    RecoilFrequency(f64),
    #[error("b0 must be positive, got {0}")]
    OpticalThickness(f64),
    #[error("delta must be non-zero and finite, got {0}")]
    Detuning(f64),
    #[error("mirror_R must lie in [0, 1], got {0}")]
    Reflectivity(f64),
    #[error("p0 must be non-negative, got {0}")]
    Pump(f64),
    #[error("a_bar must be finite, got {0}")]
    Acceleration(f64),
}

impl ParamError {
    /// Name of the offending parameter as it appears in config files.
    pub fn key(&self) -> &'static str {
        match self {
            ParamError::RecoilFrequency(_) => "omega_r_bar",
            ParamError::OpticalThickness(_) => "b0",
            ParamError::Detuning(_) => "delta",
            ParamError::Reflectivity(_) => "mirror_R",
            ParamError::Pump(_) => "p0",
            ParamError::Acceleration(_) => "a_bar",
        }
    }
}

/// Outside the regime the model was built for, but still computable.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidityWarning {
    /// |Δ| < 100: the far-detuned approximation is doubtful.
    NearResonance { delta: f64 },
    /// p₀(1+R) ≥ 0.1: saturation is no longer negligible.
    Saturation { total: f64 },
}

impl fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityWarning::NearResonance { delta } => write!(
                f,
                "delta = {delta} is not far detuned (|delta| < 100); light shifts may be inaccurate"
            ),
            ValidityWarning::Saturation { total } => write!(
                f,
                "p0*(1+mirror_R) = {total} is not small; saturation is neglected by the model"
            ),
        }
    }
}

/// All constants of the dimensionless model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Recoil frequency ħq_c²/(2mΓ).
    pub omega_r_bar: f64,
    /// Resonant optical thickness.
    pub b0: f64,
    /// Detuning 2δ/Γ.
    pub delta: f64,
    /// Mirror reflectivity R.
    pub mirror_r: f64,
    /// Scaled pump intensity |F(z=0)|².
    pub p0: f64,
    /// Dimensionless acceleration ma/(ħq_cΓ).
    pub a_bar: f64,
}

impl SystemParams {
    /// Caesium-like reference configuration: ω̄_r = 1.14e-5, b₀ = 100,
    /// Δ = −10⁴, R = 0.99, p₀ = 2.28e-6, no acceleration.
    pub fn reference() -> Self {
        Self {
            omega_r_bar: 1.14e-5,
            b0: 100.0,
            delta: -10_000.0,
            mirror_r: 0.99,
            p0: 2.28e-6,
            a_bar: 0.0,
        }
    }

    pub fn with_acceleration(self, a_bar: f64) -> Self {
        Self { a_bar, ..self }
    }

    pub fn with_reflectivity(self, mirror_r: f64) -> Self {
        Self { mirror_r, ..self }
    }

    pub fn with_pump(self, p0: f64) -> Self {
        Self { p0, ..self }
    }

    pub fn with_detuning(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    /// Susceptibility χ₀ = b₀/(2Δ). Always derived, never stored.
    pub fn chi0(&self) -> f64 {
        self.b0 / (2.0 * self.delta)
    }

    /// +1 when the droplet sits on an intensity maximum (red detuning),
    /// −1 when it sits on a minimum (blue detuning).
    pub fn detuning_sign(&self) -> f64 {
        if self.delta < 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.omega_r_bar > 0.0 && self.omega_r_bar.is_finite()) {
            return Err(ParamError::RecoilFrequency(self.omega_r_bar));
        }
        if !(self.b0 > 0.0 && self.b0.is_finite()) {
            return Err(ParamError::OpticalThickness(self.b0));
        }
        if self.delta == 0.0 || !self.delta.is_finite() {
            return Err(ParamError::Detuning(self.delta));
        }
        if !(0.0..=1.0).contains(&self.mirror_r) {
            return Err(ParamError::Reflectivity(self.mirror_r));
        }
        if !(self.p0 >= 0.0 && self.p0.is_finite()) {
            return Err(ParamError::Pump(self.p0));
        }
        if !self.a_bar.is_finite() {
            return Err(ParamError::Acceleration(self.a_bar));
        }
        Ok(())
    }

    pub fn validity_warnings(&self) -> Vec<ValidityWarning> {
        let mut out = Vec::new();
        if self.delta.abs() < 100.0 {
            out.push(ValidityWarning::NearResonance { delta: self.delta });
        }
        let total = self.p0 * (1.0 + self.mirror_r);
        if total >= 0.1 {
            out.push(ValidityWarning::Saturation { total });
        }
        out
    }
}

/// How a wavefunction's norm is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Spatial mean of |Ψ|² equals one (the homogeneous state n = 1).
    MeanDensityOne,
    /// ∑|Ψ|²·dx̄ equals the given value.
    TotalNorm(f64),
}

impl Normalization {
    /// The droplet convention, see [`DROPLET_NORM`].
    pub fn droplet() -> Self {
        Normalization::TotalNorm(DROPLET_NORM)
    }

    /// Target value of ∑|Ψ|²·dx̄ on a window of length `length`.
    pub fn target(&self, length: f64) -> f64 {
        match *self {
            Normalization::MeanDensityOne => length,
            Normalization::TotalNorm(n) => n,
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalization::MeanDensityOne => f.write_str("mean-density-one"),
            Normalization::TotalNorm(n) => write!(f, "{n:.17e}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi0_is_derived() {
        let p = SystemParams::reference();
        assert_eq!(p.chi0(), -5e-3);
        let q = p.with_detuning(20_000.0);
        assert_eq!(q.chi0(), 2.5e-3);
    }

    #[test]
    fn reference_is_in_regime() {
        let p = SystemParams::reference();
        p.validate().unwrap();
        assert!(p.validity_warnings().is_empty());
    }

    #[test]
    fn regime_warnings() {
        let p = SystemParams::reference().with_detuning(-50.0);
        assert_eq!(
            p.validity_warnings(),
            vec![ValidityWarning::NearResonance { delta: -50.0 }]
        );
        let p = SystemParams::reference().with_pump(0.06);
        assert!(matches!(
            p.validity_warnings()[..],
            [ValidityWarning::Saturation { .. }]
        ));
    }

    #[test]
    fn invalid_values_name_their_key() {
        let e = SystemParams::reference()
            .with_reflectivity(1.5)
            .validate()
            .unwrap_err();
        assert_eq!(e.key(), "mirror_R");
        assert_eq!(
            SystemParams::reference()
                .with_detuning(0.0)
                .validate()
                .unwrap_err()
                .key(),
            "delta"
        );
        assert!(SystemParams::reference()
            .with_pump(-1.0)
            .validate()
            .is_err());
    }
}
