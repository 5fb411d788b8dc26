//! Rotator settings that herald an arbitrary Dicke superposition.
//!
//! A click in detector `μ` at a pulse whose rotator is set to `(θ, φ)`
//! applies
//!
//! ```text
//! P_0 = cosθ s0† - sinθ e^{iφ} s1†        (h click)
//! P_1 = cosθ s1† + sinθ e^{-iφ} s0†       (v click)
//! ```
//!
//! Writing each factor as `P ∝ s0† - r s1†`, a target
//! `Σ b(n) |N, n>` is reached when the `r_i` are the roots of
//! `Σ c(n) b(n) x^n`, with `c(n)` the Dicke normalization. The operators
//! commute, so the order of the settings does not matter. Missing leading
//! coefficients become roots at infinity, i.e. a pure `s1†` factor.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dicke::{
    apply_chain, dicke_norm_coeff, fidelity, normalize, CollectiveOp, DickeIndex, SymmetricState, NORM_TOL,
};
use crate::error::{Error, Result};
use crate::multi_atom::{clicks_from_photons, conditional_state, sample_photons, ClickEvent, Detector, ProtocolConfig};
use crate::numeric::is_finite;
use crate::rng::run_partitioned;
use crate::stats::Estimate;

pub use crate::poly::{polynomial_roots, ProjectiveRoot};

/// Scaled residual bound for finite roots.
pub const ROOT_TOL: f64 = 1e-10;
/// Minimum fidelity of a synthesized state to its target.
pub const MIN_PLAN_FIDELITY: f64 = 1.0 - 1e-8;

const ANGLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatorSetting {
    pub theta: f64,
    pub phi: f64,
    #[serde(rename = "detector")]
    pub designated_detector: Detector,
}

impl RotatorSetting {
    pub fn identity() -> Self {
        RotatorSetting {
            theta: 0.0,
            phi: 0.0,
            designated_detector: Detector::H,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(-ANGLE_TOL..=FRAC_PI_2 + ANGLE_TOL).contains(&self.theta) {
            return Err(Error::invalid(format!("theta = {} outside [0, π/2]", self.theta)));
        }
        if !(self.phi > -PI && self.phi <= PI + ANGLE_TOL) {
            return Err(Error::invalid(format!("phi = {} outside (-π, π]", self.phi)));
        }
        Ok(())
    }
}

/// Collective operator heralded by a click in the designated detector.
pub fn excitation_operator(setting: &RotatorSetting) -> CollectiveOp {
    let (s, c) = setting.theta.sin_cos();
    let phase = Complex64::from_polar(1.0, setting.phi);
    let (alpha, beta) = match setting.designated_detector {
        Detector::H => (Complex64::new(c, 0.0), -s * phase),
        Detector::V => (s * phase.conj(), Complex64::new(c, 0.0)),
    };
    CollectiveOp::new(alpha, beta).expect("cos and sin never vanish together")
}

/// Normalized Dicke-basis coefficients `b(n_h)`, `n_h = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetSuperposition {
    n_atoms: usize,
    coefficients: Vec<Complex64>,
}

impl TargetSuperposition {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(Error::invalid("target needs at least two coefficients (N >= 1)"));
        }
        if !coefficients.iter().all(|b| is_finite(*b)) {
            return Err(Error::invalid("target coefficients must be finite"));
        }
        let norm: f64 = coefficients.iter().map(|b| b.norm_sqr()).sum();
        if norm == 0.0 {
            return Err(Error::invalid("target has no nonzero coefficient"));
        }
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("target norm² = {norm}, expected 1")));
        }
        Ok(TargetSuperposition {
            n_atoms: coefficients.len() - 1,
            coefficients,
        })
    }

    /// Rescale to unit norm first.
    pub fn normalized(coefficients: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = coefficients.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("target has no nonzero coefficient"));
        }
        Self::new(coefficients.into_iter().map(|b| b / norm).collect())
    }

    pub fn from_state(state: &SymmetricState) -> Result<Self> {
        if !state.is_dicke_sector() {
            return Err(Error::invalid("target state must lie in the Dicke sector"));
        }
        Self::normalized(state.dicke_coefficients())
    }

    /// Random target with i.i.d. complex Gaussian coefficients.
    pub fn random<R: Rng>(n_atoms: usize, rng: &mut R) -> Result<Self> {
        let mut gauss = || {
            // Box-Muller
            let u: f64 = 1.0 - rng.random::<f64>();
            let v: f64 = rng.random();
            let r = (-2.0 * u.ln()).sqrt();
            Complex64::new(r * (2.0 * PI * v).cos(), r * (2.0 * PI * v).sin())
        };
        Self::normalized((0..=n_atoms).map(|_| gauss()).collect())
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn to_state(&self) -> SymmetricState {
        SymmetricState::from_dicke_coefficients(self.n_atoms, &self.coefficients)
            .expect("coefficient count matches n_atoms")
    }
}

/// `a_n = c(n) b(n)`; not divided by the leading term, so `b(N) = 0` is fine.
pub fn coefficients_to_polynomial(target: &TargetSuperposition) -> Vec<Complex64> {
    target
        .coefficients
        .iter()
        .enumerate()
        .map(|(n_h, b)| {
            let idx = DickeIndex::new(target.n_atoms, n_h).expect("n_h <= n_atoms");
            b * dicke_norm_coeff(idx)
        })
        .collect()
}

/// One `h`-designated setting per root: `θ = atan|r|`, `φ = arg r`;
/// infinite roots map to `θ = π/2`.
pub fn roots_to_settings(roots: &[ProjectiveRoot]) -> Vec<RotatorSetting> {
    roots
        .iter()
        .map(|root| match root {
            ProjectiveRoot::Finite(r) => {
                let phi = if r.norm() == 0.0 {
                    0.0
                } else {
                    let a = r.arg();
                    if a <= -PI {
                        a + 2.0 * PI
                    } else {
                        a
                    }
                };
                RotatorSetting {
                    theta: r.norm().atan(),
                    phi,
                    designated_detector: Detector::H,
                }
            }
            ProjectiveRoot::Infinite => RotatorSetting {
                theta: FRAC_PI_2,
                phi: 0.0,
                designated_detector: Detector::H,
            },
        })
        .collect()
}

/// Normalized `Π excitation_operator(s_i) |G>`.
pub fn predicted_state(n_atoms: usize, settings: &[RotatorSetting]) -> Result<SymmetricState> {
    let ops: Vec<CollectiveOp> = settings.iter().map(excitation_operator).collect();
    normalize(&apply_chain(n_atoms, &ops)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisPlan {
    /// Setting `i` goes on pulse `i + 1`.
    pub settings: Vec<RotatorSetting>,
    /// Pulses after the designated ones, left at the identity rotator.
    pub residual_pulses: usize,
    pub roots: Vec<ProjectiveRoot>,
    pub target_state: SymmetricState,
    pub predicted_state: SymmetricState,
    pub predicted_fidelity: f64,
}

impl SynthesisPlan {
    pub fn n_atoms(&self) -> usize {
        self.settings.len()
    }

    /// Rotator list for an `n_pulses`-pulse run.
    pub fn rotators(&self, n_pulses: usize) -> Result<Vec<RotatorSetting>> {
        if n_pulses < self.settings.len() {
            return Err(Error::invalid(format!(
                "plan needs at least {} pulses, got {n_pulses}",
                self.settings.len()
            )));
        }
        let mut r = self.settings.clone();
        r.resize(n_pulses, RotatorSetting::identity());
        Ok(r)
    }

    /// Click pattern that heralds the target.
    pub fn designated_events(&self) -> Vec<ClickEvent> {
        self.settings
            .iter()
            .enumerate()
            .map(|(i, s)| ClickEvent {
                pulse: i + 1,
                detector: s.designated_detector,
            })
            .collect()
    }
}

/// Rotator settings whose designated click pattern heralds `target`.
pub fn synthesize(target: &TargetSuperposition) -> Result<SynthesisPlan> {
    let poly = coefficients_to_polynomial(target);
    let roots = polynomial_roots(&poly, ROOT_TOL)?;
    let settings = roots_to_settings(&roots);
    let predicted = predicted_state(target.n_atoms, &settings)?;
    let target_state = target.to_state();
    let predicted_fidelity = fidelity(&predicted, &target_state)?;
    if predicted_fidelity < MIN_PLAN_FIDELITY {
        return Err(Error::NumericFailure(format!(
            "synthesized state reaches fidelity {predicted_fidelity} < {MIN_PLAN_FIDELITY}"
        )));
    }
    Ok(SynthesisPlan {
        settings,
        residual_pulses: 0,
        roots,
        target_state,
        predicted_state: predicted,
        predicted_fidelity,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanEstimate {
    pub trials: u64,
    pub seed: u64,
    pub partitions: u64,
    pub accepted: u64,
    pub probability: Estimate,
    /// Over accepted runs; `None` when nothing was accepted.
    pub min_fidelity: Option<f64>,
    pub mean_fidelity: Option<f64>,
}

/// Monte Carlo rate of the designated click pattern, and the fidelity of the
/// heralded states to the target.
pub fn plan_success_probability(
    plan: &SynthesisPlan,
    config: &ProtocolConfig,
    trials: u64,
    partitions: u64,
) -> Result<PlanEstimate> {
    if config.n_atoms != plan.n_atoms() {
        return Err(Error::invalid("config and plan disagree on n_atoms"));
    }
    if trials < 1 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let mut run_cfg = config.clone();
    run_cfg.rotators = Some(plan.rotators(config.n_pulses)?);
    run_cfg.validate()?;
    let designated = plan.designated_events();

    let parts = run_partitioned(trials, config.seed, partitions, |rng, n| -> Result<(u64, f64, f64)> {
        let (mut accepted, mut min_f, mut sum_f) = (0u64, f64::INFINITY, 0.0);
        for _ in 0..n {
            let clicks = clicks_from_photons(&sample_photons(&run_cfg, rng));
            if clicks.events != designated {
                continue;
            }
            let state = conditional_state(&run_cfg, &clicks)?;
            let f = fidelity(&state, &plan.target_state)?;
            accepted += 1;
            min_f = min_f.min(f);
            sum_f += f;
        }
        Ok((accepted, min_f, sum_f))
    });
    let (mut accepted, mut min_f, mut sum_f) = (0u64, f64::INFINITY, 0.0);
    for p in parts {
        let (a, m, s) = p?;
        accepted += a;
        min_f = min_f.min(m);
        sum_f += s;
    }
    Ok(PlanEstimate {
        trials,
        seed: config.seed,
        partitions: partitions.max(1),
        accepted,
        probability: Estimate::from_counts(accepted, trials),
        min_fidelity: (accepted > 0).then_some(min_f),
        mean_fidelity: (accepted > 0).then(|| sum_f / accepted as f64),
    })
}
