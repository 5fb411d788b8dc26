//! Two atoms in separate cavities, heralded by a photon coincidence behind a
//! polarizing beam splitter.
//!
//! Each cavity leaves its atom and output photon in
//! `amp_h |0>|h> + amp_v |1>|v>`. With the `h <-> v` rotator on the right
//! arm, one photon reaching each PBS output projects onto
//! `|hv><hv| + |vh><vh|`, leaving the atoms in
//! `a |01> + b |10>`, `a = amp_h(L) amp_v(R)`, `b = amp_v(L) amp_h(R)`.
//! A ±45° measurement on both outputs then erases the which-path
//! information; opposite-sign outcomes carry a relative minus sign that can
//! be corrected locally.
//!
//! Partially distinguishable photons reduce the `|01><10|` coherence by the
//! two-photon interference factor `γ`. For temporal modes `f_L`, `f_R` the
//! two branches carry photon states `f_L ⊗ f_R` and `f_R ⊗ f_L` on the two
//! output ports, so `γ = <f_R|f_L><f_L|f_R> = |<f_L|f_R>|²`; see
//! [`two_photon_coherence`].

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{mode_overlap, CavityParams, TemporalMode};
use crate::rng::run_partitioned;
use crate::stats::Estimate;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Atom-photon state left by one cavity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomPhotonState {
    pub amp_h: Complex64,
    pub amp_v: Complex64,
}

impl AtomPhotonState {
    pub fn p_h(&self) -> f64 {
        self.amp_h.norm_sqr()
    }

    pub fn p_v(&self) -> f64 {
        self.amp_v.norm_sqr()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionScheme {
    /// A 45° polarizer in front of each detector.
    Polarizer45,
    /// A second PBS per output with both of its ports detected.
    PbsBothOutputs,
}

/// What to do with opposite-sign ±45° outcomes (`+-`, `-+`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinusOutcomePolicy {
    /// Keep and undo the relative sign with a local phase flip.
    #[default]
    PhaseCorrect,
    Discard,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    pub scheme: DetectionScheme,
    pub eta: f64,
    #[serde(default = "default_true")]
    pub rotate_r: bool,
    #[serde(default)]
    pub minus_policy: MinusOutcomePolicy,
}

fn default_true() -> bool {
    true
}

impl DetectionConfig {
    pub fn new(scheme: DetectionScheme, eta: f64) -> Result<Self> {
        let c = DetectionConfig {
            scheme,
            eta,
            rotate_r: true,
            minus_policy: MinusOutcomePolicy::PhaseCorrect,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::invalid(format!("eta = {} outside [0, 1]", self.eta)));
        }
        Ok(())
    }

    /// Fraction of coincidences accepted by the polarization measurement.
    pub fn scheme_factor(&self) -> f64 {
        match (self.scheme, self.minus_policy) {
            (DetectionScheme::Polarizer45, _) => 0.25,
            (DetectionScheme::PbsBothOutputs, MinusOutcomePolicy::PhaseCorrect) => 1.0,
            (DetectionScheme::PbsBothOutputs, MinusOutcomePolicy::Discard) => 0.5,
        }
    }
}

/// 4x4 density matrix on atoms `L ⊗ R`, basis `|00>, |01>, |10>, |11>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(pub [[Complex64; 4]; 4]);

impl DensityMatrix {
    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..4).all(|i| (0..4).all(|j| (self.0[i][j] - self.0[j][i].conj()).norm() <= tol))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = Matrix4::from_fn(|i, j| self.0[i][j]);
        SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `<ψ|ρ|ψ>` for a pure two-qubit state.
    pub fn expectation(&self, psi: &[Complex64; 4]) -> f64 {
        let mut acc = ZERO;
        for i in 0..4 {
            for j in 0..4 {
                acc += psi[i].conj() * self.0[i][j] * psi[j];
            }
        }
        acc.re
    }

    /// `[[[re, im]; 4]; 4]` for JSON output.
    pub fn to_pairs(&self) -> [[[f64; 2]; 4]; 4] {
        std::array::from_fn(|i| std::array::from_fn(|j| [self.0[i][j].re, self.0[i][j].im]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoCavityOutcome {
    pub success_probability: f64,
    /// Heralded atomic state; `None` when no coincidence is possible.
    pub conditional_density: Option<DensityMatrix>,
    /// Fidelity to the phase-matched Bell state of the heralded subspace.
    pub bell_fidelity: Option<f64>,
    /// Accepted probability from same-sign (`++`, `--`) outcomes.
    pub p_same_sign: f64,
    /// Probability of opposite-sign (`+-`, `-+`) outcomes, whether kept or not.
    pub p_opposite_sign: f64,
}

/// Per-cavity atom-photon state.
pub fn cavity_emission_state(params: &CavityParams) -> Result<AtomPhotonState> {
    params.validate()?;
    let g = params.coupling_norm_sqr().sqrt();
    Ok(AtomPhotonState {
        amp_h: params.g0() / g,
        amp_v: params.g1() / g,
    })
}

/// `|<f_L|f_R>|²`, the coherence factor entering [`coincidence_project`].
pub fn two_photon_coherence(left: &TemporalMode, right: &TemporalMode) -> Result<f64> {
    Ok(mode_overlap(left, right)?.norm_sqr())
}

/// Basis indices of the two heralded atomic configurations.
fn heralded_pair(rotate_r: bool) -> (usize, usize) {
    if rotate_r {
        (0b01, 0b10)
    } else {
        (0b00, 0b11)
    }
}

/// Unnormalized branch amplitudes `(a, b)` of the heralded pair.
fn branch_amplitudes(left: &AtomPhotonState, right: &AtomPhotonState, rotate_r: bool) -> (Complex64, Complex64) {
    if rotate_r {
        (left.amp_h * right.amp_v, left.amp_v * right.amp_h)
    } else {
        (left.amp_h * right.amp_h, left.amp_v * right.amp_v)
    }
}

/// Coincidence measurement and its heralded atomic state.
///
/// `coherence` is the two-photon interference factor `γ` (1 for identical
/// modes); the `|a><b|` element is `a b* γ`.
pub fn coincidence_project(
    left: &AtomPhotonState,
    right: &AtomPhotonState,
    coherence: Complex64,
    config: &DetectionConfig,
) -> Result<TwoCavityOutcome> {
    config.validate()?;
    if coherence.norm() > 1.0 + 1e-12 {
        return Err(Error::invalid(format!("|coherence| = {} exceeds 1", coherence.norm())));
    }
    let (a, b) = branch_amplitudes(left, right, config.rotate_r);
    let p_coinc = a.norm_sqr() + b.norm_sqr();
    let gate = p_coinc * config.eta * config.eta;
    let (p_same, p_opp) = match config.scheme {
        DetectionScheme::Polarizer45 => (0.25 * gate, 0.0),
        DetectionScheme::PbsBothOutputs => (0.5 * gate, 0.5 * gate),
    };
    let success_probability = gate * config.scheme_factor();

    if p_coinc == 0.0 {
        return Ok(TwoCavityOutcome {
            success_probability,
            conditional_density: None,
            bell_fidelity: None,
            p_same_sign: p_same,
            p_opposite_sign: p_opp,
        });
    }

    let (ia, ib) = heralded_pair(config.rotate_r);
    let mut rho = [[ZERO; 4]; 4];
    rho[ia][ia] = Complex64::new(a.norm_sqr() / p_coinc, 0.0);
    rho[ib][ib] = Complex64::new(b.norm_sqr() / p_coinc, 0.0);
    rho[ia][ib] = a * b.conj() * coherence / p_coinc;
    rho[ib][ia] = rho[ia][ib].conj();
    let bell_fidelity = 0.5 * (rho[ia][ia].re + rho[ib][ib].re) + rho[ia][ib].norm();

    Ok(TwoCavityOutcome {
        success_probability,
        conditional_density: Some(DensityMatrix(rho)),
        bell_fidelity: Some(bell_fidelity),
        p_same_sign: p_same,
        p_opposite_sign: p_opp,
    })
}

/// Analytic heralding probability from per-arm branching ratios.
pub fn success_probability(params_l: &CavityParams, params_r: &CavityParams, config: &DetectionConfig) -> Result<f64> {
    config.validate()?;
    let (pl, pr) = (params_l.branching_h(), params_r.branching_h());
    let coinc = if config.rotate_r {
        pl * (1.0 - pr) + (1.0 - pl) * pr
    } else {
        pl * pr + (1.0 - pl) * (1.0 - pr)
    };
    Ok(coinc * config.eta * config.eta * config.scheme_factor())
}

/// Sign outcome of the two ±45° measurements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignTally {
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoCavityMcRecord {
    pub trials: u64,
    pub seed: u64,
    pub partitions: u64,
    pub successes: u64,
    pub rate: Estimate,
    /// At least one photon lost.
    pub lost: u64,
    /// Both photons left through the same PBS output.
    pub same_port: u64,
    /// Coincidences by sign outcome (before the acceptance rule).
    pub signs: SignTally,
}

#[derive(Default)]
struct McPartial {
    successes: u64,
    lost: u64,
    same_port: u64,
    signs: SignTally,
}

/// Monte Carlo of photon survival, polarization branching and the sign
/// outcomes; deterministic for fixed `(seed, partitions)`.
pub fn monte_carlo_two_cavity(
    params_l: &CavityParams,
    params_r: &CavityParams,
    config: &DetectionConfig,
    trials: u64,
    seed: u64,
    partitions: u64,
) -> Result<TwoCavityMcRecord> {
    config.validate()?;
    if trials < 1 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let (pl, pr) = (params_l.branching_h(), params_r.branching_h());
    let cfg = *config;
    let parts = run_partitioned(trials, seed, partitions, |rng, n| {
        let mut acc = McPartial::default();
        for _ in 0..n {
            let survive_l = rng.random::<f64>() < cfg.eta;
            let survive_r = rng.random::<f64>() < cfg.eta;
            let l_is_h = rng.random::<f64>() < pl;
            let r_is_h = rng.random::<f64>() < pr;
            if !(survive_l && survive_r) {
                acc.lost += 1;
                continue;
            }
            // The rotator swaps the right photon's polarization, so a
            // coincidence needs opposite emitted polarizations.
            let split = if cfg.rotate_r {
                l_is_h != r_is_h
            } else {
                l_is_h == r_is_h
            };
            if !split {
                acc.same_port += 1;
                continue;
            }
            let s1 = rng.random::<bool>();
            let s2 = rng.random::<bool>();
            match (s1, s2) {
                (true, true) => acc.signs.pp += 1,
                (true, false) => acc.signs.pm += 1,
                (false, true) => acc.signs.mp += 1,
                (false, false) => acc.signs.mm += 1,
            }
            let accepted = match (cfg.scheme, cfg.minus_policy) {
                (DetectionScheme::Polarizer45, _) => s1 && s2,
                (DetectionScheme::PbsBothOutputs, MinusOutcomePolicy::PhaseCorrect) => true,
                (DetectionScheme::PbsBothOutputs, MinusOutcomePolicy::Discard) => s1 == s2,
            };
            acc.successes += u64::from(accepted);
        }
        acc
    });
    let mut total = McPartial::default();
    for p in parts {
        total.successes += p.successes;
        total.lost += p.lost;
        total.same_port += p.same_port;
        total.signs.pp += p.signs.pp;
        total.signs.pm += p.signs.pm;
        total.signs.mp += p.signs.mp;
        total.signs.mm += p.signs.mm;
    }
    Ok(TwoCavityMcRecord {
        trials,
        seed,
        partitions: partitions.max(1),
        successes: total.successes,
        rate: Estimate::from_counts(total.successes, trials),
        lost: total.lost,
        same_port: total.same_port,
        signs: total.signs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationBasis {
    /// `{h, v}`.
    Hv,
    /// `{(h+v)/√2, (h-v)/√2}`.
    Diag,
}

impl PolarizationBasis {
    /// Basis vectors in `(h, v)` components with their labels.
    fn vectors(self) -> [(&'static str, [f64; 2]); 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            PolarizationBasis::Hv => [("h", [1.0, 0.0]), ("v", [0.0, 1.0])],
            PolarizationBasis::Diag => [("+", [s, s]), ("-", [s, -s])],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisOutcome {
    pub photon_l: &'static str,
    pub photon_r: &'static str,
    pub probability: f64,
    /// Normalized atomic state `L ⊗ R` in `|00>, |01>, |10>, |11>`.
    pub atom_state: [Complex64; 4],
}

/// Joint photon outcomes and conditional atom states for the ideal effective
/// four-particle state `(|01>|hv> + |10>|vh>)/√2`.
pub fn polarization_basis_outcome(basis_l: PolarizationBasis, basis_r: PolarizationBasis) -> Vec<BasisOutcome> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut rows = Vec::with_capacity(4);
    for (label_l, u) in basis_l.vectors() {
        for (label_r, w) in basis_r.vectors() {
            // <u|h><w|v> on |01>, <u|v><w|h> on |10>.
            let a01 = s * u[0] * w[1];
            let a10 = s * u[1] * w[0];
            let probability = a01 * a01 + a10 * a10;
            let norm = probability.sqrt();
            let mut atom_state = [ZERO; 4];
            if norm > 0.0 {
                atom_state[0b01] = Complex64::new(a01 / norm, 0.0);
                atom_state[0b10] = Complex64::new(a10 / norm, 0.0);
            }
            rows.push(BasisOutcome {
                photon_l: label_l,
                photon_r: label_r,
                probability,
                atom_state,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn equal() -> CavityParams {
        CavityParams::real(1.0, 1.0, 1.0).unwrap()
    }

    fn pbs(eta: f64) -> DetectionConfig {
        DetectionConfig::new(DetectionScheme::PbsBothOutputs, eta).unwrap()
    }

    #[test]
    fn emission_state_examples() {
        let s = cavity_emission_state(&equal()).unwrap();
        assert_abs_diff_eq!(s.amp_h.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amp_v.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        let s = cavity_emission_state(&CavityParams::real(1.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!((s.amp_h, s.amp_v), (Complex64::new(1.0, 0.0), ZERO));
        let p = CavityParams::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), 1.0).unwrap();
        let s = cavity_emission_state(&p).unwrap();
        assert_abs_diff_eq!(s.amp_v.im, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn ideal_point() {
        let s = cavity_emission_state(&equal()).unwrap();
        let out = coincidence_project(&s, &s, Complex64::new(1.0, 0.0), &pbs(1.0)).unwrap();
        assert_abs_diff_eq!(out.success_probability, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(out.bell_fidelity.unwrap(), 1.0, epsilon = 1e-12);
        let bell = [
            ZERO,
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            ZERO,
        ];
        assert_abs_diff_eq!(
            out.conditional_density.unwrap().expectation(&bell),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn distinguishable_photons_give_a_mixture() {
        let s = cavity_emission_state(&equal()).unwrap();
        let out = coincidence_project(&s, &s, ZERO, &pbs(1.0)).unwrap();
        let rho = out.conditional_density.unwrap().0;
        assert_abs_diff_eq!(rho[1][1].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho[2][2].re, 0.5, epsilon = 1e-15);
        assert_eq!(rho[1][2], ZERO);
        assert_abs_diff_eq!(out.bell_fidelity.unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn overlap_above_one_rejected() {
        let s = cavity_emission_state(&equal()).unwrap();
        assert!(coincidence_project(&s, &s, Complex64::new(1.1, 0.0), &pbs(1.0)).is_err());
        assert!(DetectionConfig::new(DetectionScheme::Polarizer45, 1.5).is_err());
    }

    #[test]
    fn analytic_probabilities() {
        assert_abs_diff_eq!(
            success_probability(&equal(), &equal(), &pbs(1.0)).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            success_probability(&equal(), &equal(), &pbs(0.7)).unwrap(),
            0.245,
            epsilon = 1e-15
        );
        assert_eq!(success_probability(&equal(), &equal(), &pbs(0.0)).unwrap(), 0.0);
        let h_only = CavityParams::real(1.0, 0.0, 1.0).unwrap();
        assert_eq!(success_probability(&h_only, &h_only, &pbs(1.0)).unwrap(), 0.0);
        // One single-channel arm still heralds, but only a product state.
        assert_abs_diff_eq!(
            success_probability(&h_only, &equal(), &pbs(1.0)).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        let (l, r) = (
            cavity_emission_state(&h_only).unwrap(),
            cavity_emission_state(&equal()).unwrap(),
        );
        let out = coincidence_project(&l, &r, Complex64::new(1.0, 0.0), &pbs(1.0)).unwrap();
        assert_abs_diff_eq!(out.bell_fidelity.unwrap(), 0.5, epsilon = 1e-15);
        let mut discard = pbs(1.0);
        discard.minus_policy = MinusOutcomePolicy::Discard;
        assert_abs_diff_eq!(
            success_probability(&equal(), &equal(), &discard).unwrap(),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn unequal_arms_reduce_to_the_product_form() {
        let (g0, g1) = (0.8, 0.3);
        let p = CavityParams::real(g0, g1, 1.0).unwrap();
        let formula = 2.0 * (g0 * g1).powi(2) / (g0 * g0 + g1 * g1).powi(2);
        assert_abs_diff_eq!(
            success_probability(&p, &p, &pbs(1.0)).unwrap(),
            formula,
            epsilon = 1e-15
        );
        let s = cavity_emission_state(&p).unwrap();
        let out = coincidence_project(&s, &s, Complex64::new(1.0, 0.0), &pbs(1.0)).unwrap();
        assert_abs_diff_eq!(out.success_probability, formula, epsilon = 1e-15);
    }

    #[test]
    fn without_rotator_the_even_pair_is_heralded() {
        let s = cavity_emission_state(&equal()).unwrap();
        let mut cfg = pbs(1.0);
        cfg.rotate_r = false;
        let out = coincidence_project(&s, &s, Complex64::new(1.0, 0.0), &cfg).unwrap();
        let rho = out.conditional_density.unwrap().0;
        assert_abs_diff_eq!(rho[0][3].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(out.bell_fidelity.unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn monte_carlo_zero_efficiency_never_succeeds() {
        let r = monte_carlo_two_cavity(&equal(), &equal(), &pbs(0.0), 1000, 3, 4).unwrap();
        assert_eq!(r.successes, 0);
        assert_eq!(r.lost, 1000);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = monte_carlo_two_cavity(&equal(), &equal(), &pbs(0.8), 10_000, 42, 8).unwrap();
        let b = monte_carlo_two_cavity(&equal(), &equal(), &pbs(0.8), 10_000, 42, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn basis_table_structure() {
        let hv = polarization_basis_outcome(PolarizationBasis::Hv, PolarizationBasis::Hv);
        let by = |rows: &[BasisOutcome], l: &str, r: &str| {
            rows.iter()
                .find(|o| o.photon_l == l && o.photon_r == r)
                .unwrap()
                .clone()
        };
        assert_abs_diff_eq!(by(&hv, "h", "v").probability, 0.5, epsilon = 1e-15);
        assert_eq!(by(&hv, "h", "v").atom_state[0b01], Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(by(&hv, "v", "h").probability, 0.5, epsilon = 1e-15);
        assert_eq!(by(&hv, "h", "h").probability, 0.0);

        let dd = polarization_basis_outcome(PolarizationBasis::Diag, PolarizationBasis::Diag);
        let pp = by(&dd, "+", "+");
        assert_abs_diff_eq!(pp.atom_state[0b01].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(pp.atom_state[0b10].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        let pm = by(&dd, "+", "-");
        // Opposite relative sign: (|01> - |10>)/√2 up to a global phase.
        assert_abs_diff_eq!((pm.atom_state[0b01] + pm.atom_state[0b10]).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pm.atom_state[0b01].norm(), FRAC_1_SQRT_2, epsilon = 1e-15);
        let total: f64 = dd.iter().map(|o| o.probability).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-15);
    }
}
