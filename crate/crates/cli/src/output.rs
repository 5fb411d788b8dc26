//! Result file formats.

use herald_core::multi_atom::AnalyticSummary;
use herald_core::stats::Estimate;
use herald_core::two_cavity::SignTally;
use herald_core::Detector;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct PulseShapeReport {
    pub p_c: f64,
    pub p_c_analytic: f64,
    /// `None` when the analytic mode vanishes (no drive).
    pub l2_relative_error: Option<f64>,
    pub branching_h: f64,
    pub residual_population: f64,
    pub max_norm_defect: f64,
    pub points: usize,
    pub dt: f64,
    pub analytic_csv: String,
    pub numeric_csv: String,
}

#[derive(Debug, Serialize)]
pub struct TwoCavityMonteCarlo {
    pub trials: u64,
    pub seed: u64,
    pub partitions: u64,
    pub successes: u64,
    pub rate: Estimate,
    pub lost: u64,
    pub same_port: u64,
    pub signs: SignTally,
}

#[derive(Debug, Serialize)]
pub struct TwoCavityReport {
    pub p_analytic: f64,
    pub coherence: f64,
    pub p_same_sign: f64,
    pub p_opposite_sign: f64,
    pub bell_fidelity: Option<f64>,
    /// `[[[re, im]; 4]; 4]` in the basis `|00>, |01>, |10>, |11>` of `L ⊗ R`.
    pub conditional_density: Option<[[[f64; 2]; 4]; 4]>,
    pub monte_carlo: TwoCavityMonteCarlo,
}

#[derive(Debug, Serialize)]
pub struct DickeEmpirical {
    pub trials: u64,
    pub seed: u64,
    pub partitions: u64,
    pub post_selected: u64,
    pub p_succ: Estimate,
    pub p_en: Estimate,
    pub nh_counts: Vec<u64>,
}

#[derive(Debug, Serialize)]
pub struct DickeReport {
    pub n_atoms: usize,
    pub n_pulses: usize,
    pub eta: f64,
    pub branching_h: f64,
    /// Only for `branching_h = 1/2`.
    pub analytic: Option<AnalyticSummary>,
    pub repeat_cost_s: Option<f64>,
    pub empirical: DickeEmpirical,
    pub analytic_csv: Option<String>,
    pub histogram_csv: String,
}

#[derive(Debug, Serialize)]
pub struct SettingOut {
    pub theta: f64,
    pub phi: f64,
    pub detector: Detector,
    pub pulse: usize,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum RootOut {
    Finite { re: f64, im: f64 },
    Infinite(&'static str),
}

#[derive(Debug, Serialize)]
pub struct Verification {
    pub n_pulses: usize,
    pub eta: f64,
    pub trials: u64,
    pub seed: u64,
    pub partitions: u64,
    pub accepted: u64,
    pub probability: Estimate,
    pub min_fidelity: Option<f64>,
    pub mean_fidelity: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SynthesisReport {
    pub n_atoms: usize,
    pub settings: Vec<SettingOut>,
    pub predicted_fidelity: f64,
    pub roots: Vec<RootOut>,
    pub verification: Option<Verification>,
}
