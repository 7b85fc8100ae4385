//! Spectral simulation of a one-dimensional Bose–Einstein condensate coupled
//! to its own light through a single retro-reflecting mirror.
//!
//! A pump beam crosses the cloud, picks up a phase proportional to the local
//! density, propagates to a mirror and back, and returns with an intensity
//! pattern that acts on the atoms as a dipole potential. Above a threshold
//! pump the feedback is self-focusing and the condensate collapses into a
//! self-bound droplet whose light pattern follows it. Tracking that pattern
//! under a uniform acceleration gives an inertial sensor.
//!
//! All quantities are dimensionless: lengths in units of 1/q_c, times in
//! units of 1/Γ. [`analysis::UnitConverter`] maps them to SI units.
//!
//! ```
//! use smf_droplet::{analysis, SystemParams};
//!
//! let p = SystemParams::reference();
//! let w = analysis::predicted_width(&p).unwrap();
//! assert!((w.width - 0.5638).abs() < 1e-4);
//! ```

// `!(x > y)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod grid;
pub mod optics;
pub mod params;
pub mod sensing;

pub use analysis::{AnalysisError, DropletFit, FitError, PhysicalAnchors, UnitConverter};
pub use dynamics::{
    DynamicsError, Evolution, EvolutionConfig, GroundStateConfig, Mode, Snapshot, Wavefunction,
};
pub use grid::{GridError, SpectralGrid};
pub use optics::{OpticalFields, OpticsError};
pub use params::{Normalization, ParamError, SystemParams, DROPLET_NORM};
pub use sensing::{
    AccelEstimate, IntensityKind, SenseConfig, SenseReport, SensingError, TrajectoryRecord,
};
