//! Input file formats.

use herald_core::{CavityParams, DetectionConfig, PulseProfile, Result};
use num_complex::Complex64;
use serde::Deserialize;

/// A number, or `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl From<ComplexInput> for Complex64 {
    fn from(c: ComplexInput) -> Self {
        match c {
            ComplexInput::Real(re) => Complex64::new(re, 0.0),
            ComplexInput::Complex { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityInput {
    pub g0: ComplexInput,
    pub g1: ComplexInput,
    pub kappa: f64,
}

impl CavityInput {
    pub fn params(&self) -> Result<CavityParams> {
        CavityParams::new(self.g0.into(), self.g1.into(), self.kappa)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveInput {
    /// `Ω(t) = omega_max sin²(πt/duration)`.
    SinSquared {
        omega_max: f64,
        duration: f64,
        points: usize,
    },
    Off {
        duration: f64,
        points: usize,
    },
    Samples {
        times: Vec<f64>,
        rabi: Vec<ComplexInput>,
    },
}

impl DriveInput {
    pub fn profile(&self) -> Result<PulseProfile> {
        match self {
            DriveInput::SinSquared {
                omega_max,
                duration,
                points,
            } => PulseProfile::sin_squared(*omega_max, *duration, *points),
            DriveInput::Off { duration, points } => PulseProfile::off(*duration, *points),
            DriveInput::Samples { times, rabi } => {
                PulseProfile::new(times.clone(), rabi.iter().map(|&c| c.into()).collect())
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseShapeConfig {
    pub cavity: CavityInput,
    pub drive: DriveInput,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoCavityConfig {
    pub left: CavityInput,
    pub right: CavityInput,
    pub detection: DetectionConfig,
    /// Two-photon coherence factor; defaults to 1 unless `drive` is given.
    #[serde(default)]
    pub coherence: Option<f64>,
    /// Common drive; the coherence is then computed from the two output modes.
    #[serde(default)]
    pub drive: Option<DriveInput>,
    /// Delay of the right photon, used with `drive`.
    #[serde(default)]
    pub delay: f64,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DickeConfig {
    pub n_atoms: usize,
    pub n_pulses: usize,
    pub eta: f64,
    #[serde(default)]
    pub branching_h: Option<f64>,
    /// Duration of one driving pulse in seconds, for the repeat-cost estimate.
    #[serde(default)]
    pub pulse_duration: Option<f64>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolInput {
    pub n_pulses: usize,
    pub eta: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeConfig {
    pub n_atoms: usize,
    /// `b(n_h)` for `n_h = 0..=n_atoms`; rescaled to unit norm.
    pub coefficients: Vec<ComplexInput>,
    /// Protocol used by `--verify`; defaults to `M = N`, `η = 1`.
    #[serde(default)]
    pub protocol: Option<ProtocolInput>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}
