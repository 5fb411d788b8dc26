//! `N` atoms in one cavity driven by `M` sequential pulses, with threshold
//! `h`/`v` detectors behind a PBS.
//!
//! Sampling follows the one-step picture: every atom emits one photon, which
//! lands in a pulse slot uniform on `1..=M` and in the `h` or `v` detector
//! (after the per-pulse rotator, when configured), and survives with
//! probability `eta`. A `(pulse, detector)` bin clicks when at least one
//! surviving photon lands in it. A run is post-selected when the number of
//! clicks equals `N`, which happens exactly when every photon survives and
//! all photons occupy distinct bins.
//!
//! For a post-selected run the heralded atomic state is the normalized
//! product of one collective excitation operator per click applied to `|G>`.
//! Lost photons still move their atom out of `g`, but such runs can never
//! reach `N` clicks, so they never reach the conditional-state computation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dicke::{apply_chain, normalize, CollectiveOp, SymmetricState};
use crate::error::{Error, Result};
use crate::numeric::binomial;
use crate::rng::{run_partitioned, McRng};
use crate::stats::Estimate;
use crate::synthesis::{excitation_operator, RotatorSetting};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    H,
    V,
}

impl Detector {
    pub fn flipped(self) -> Detector {
        match self {
            Detector::H => Detector::V,
            Detector::V => Detector::H,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub n_atoms: usize,
    pub n_pulses: usize,
    pub eta: f64,
    #[serde(default = "half")]
    pub branching_h: f64,
    /// One setting per pulse; `None` is the plain Dicke protocol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotators: Option<Vec<RotatorSetting>>,
    #[serde(default)]
    pub seed: u64,
}

fn half() -> f64 {
    0.5
}

impl ProtocolConfig {
    pub fn new(n_atoms: usize, n_pulses: usize, eta: f64) -> Result<Self> {
        let c = ProtocolConfig {
            n_atoms,
            n_pulses,
            eta,
            branching_h: 0.5,
            rotators: None,
            seed: 0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms < 1 {
            return Err(Error::invalid("n_atoms must be at least 1"));
        }
        if 2 * self.n_pulses < self.n_atoms {
            return Err(Error::invalid(format!(
                "need 2M >= N: M = {}, N = {}",
                self.n_pulses, self.n_atoms
            )));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::invalid(format!("eta = {} outside [0, 1]", self.eta)));
        }
        if !(0.0..=1.0).contains(&self.branching_h) {
            return Err(Error::invalid(format!(
                "branching_h = {} outside [0, 1]",
                self.branching_h
            )));
        }
        if let Some(r) = &self.rotators {
            if r.len() != self.n_pulses {
                return Err(Error::invalid(format!(
                    "expected {} rotator settings, got {}",
                    self.n_pulses,
                    r.len()
                )));
            }
            for s in r {
                s.validate()?;
            }
        }
        Ok(())
    }

    /// Analytic probabilities; they assume equal `h`/`v` branching.
    pub fn analytic(&self) -> Result<AnalyticSummary> {
        self.validate()?;
        if (self.branching_h - 0.5).abs() > 1e-12 {
            return Err(Error::invalid("analytic probabilities assume branching_h = 1/2"));
        }
        analytic_summary(self.n_atoms, self.n_pulses, self.eta)
    }

    fn rotator(&self, pulse: usize) -> Option<&RotatorSetting> {
        self.rotators.as_ref().map(|r| &r[pulse - 1])
    }
}

/// One detector click; `pulse` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClickEvent {
    pub pulse: usize,
    pub detector: Detector,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub events: Vec<ClickEvent>,
    pub n_h: usize,
    pub n_v: usize,
}

impl ClickRecord {
    pub fn from_events(mut events: Vec<ClickEvent>) -> Self {
        events.sort();
        events.dedup();
        let n_h = events.iter().filter(|e| e.detector == Detector::H).count();
        ClickRecord {
            n_v: events.len() - n_h,
            n_h,
            events,
        }
    }

    pub fn total(&self) -> usize {
        self.n_h + self.n_v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub clicks: ClickRecord,
    pub post_selected: bool,
    pub conditional_state: Option<SymmetricState>,
}

/// Where one emitted photon went.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhotonFate {
    pub pulse: usize,
    pub detector: Detector,
    pub survived: bool,
}

/// `(2M)! / ((2M-N)! (2M)^N)`: probability that `N` photons occupy distinct
/// paths among `2M`.
pub fn analytic_p_si(n_atoms: usize, n_pulses: usize) -> Result<f64> {
    if n_atoms < 1 {
        return Err(Error::invalid("n_atoms must be at least 1"));
    }
    if 2 * n_pulses < n_atoms {
        return Err(Error::invalid(format!("need 2M >= N: M = {n_pulses}, N = {n_atoms}")));
    }
    let paths = (2 * n_pulses) as f64;
    Ok((0..n_atoms).map(|k| (paths - k as f64) / paths).product())
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::invalid(format!("eta = {eta} outside [0, 1]")))
    }
}

/// `eta^N p_si`.
pub fn analytic_p_succ(n_atoms: usize, n_pulses: usize, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(eta.powi(n_atoms as i32) * analytic_p_si(n_atoms, n_pulses)?)
}

/// `p_succ 2^-N C(N, n_h)`.
pub fn analytic_p_nh(n_atoms: usize, n_pulses: usize, eta: f64, n_h: usize) -> Result<f64> {
    if n_h > n_atoms {
        return Err(Error::invalid(format!("n_h = {n_h} exceeds n_atoms = {n_atoms}")));
    }
    let p_succ = analytic_p_succ(n_atoms, n_pulses, eta)?;
    Ok(p_succ * binomial(n_atoms, n_h) * 0.5f64.powi(n_atoms as i32))
}

/// `p_succ (1 - 2^(1-N))`: post-selected and neither `n_h = 0` nor `n_h = N`.
pub fn analytic_p_en(n_atoms: usize, n_pulses: usize, eta: f64) -> Result<f64> {
    let p_succ = analytic_p_succ(n_atoms, n_pulses, eta)?;
    Ok(p_succ * (1.0 - 0.5f64.powi(n_atoms as i32 - 1)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSummary {
    pub p_si: f64,
    pub p_succ: f64,
    pub p_en: f64,
    pub p_nh: Vec<f64>,
}

pub fn analytic_summary(n_atoms: usize, n_pulses: usize, eta: f64) -> Result<AnalyticSummary> {
    Ok(AnalyticSummary {
        p_si: analytic_p_si(n_atoms, n_pulses)?,
        p_succ: analytic_p_succ(n_atoms, n_pulses, eta)?,
        p_en: analytic_p_en(n_atoms, n_pulses, eta)?,
        p_nh: (0..=n_atoms)
            .map(|k| analytic_p_nh(n_atoms, n_pulses, eta, k))
            .collect::<Result<_>>()?,
    })
}

/// Expected wall time `M Δt / p_en` to herald one entangled state.
pub fn repeat_cost(config: &ProtocolConfig, pulse_duration: f64) -> Result<f64> {
    if !(pulse_duration > 0.0) {
        return Err(Error::invalid("pulse duration must be positive"));
    }
    let p_en = config.analytic()?.p_en;
    if p_en <= 0.0 {
        return Err(Error::Infeasible(format!(
            "p_en = 0 for N = {}, the protocol never heralds an entangled state",
            config.n_atoms
        )));
    }
    Ok(config.n_pulses as f64 * pulse_duration / p_en)
}

/// Draw the pulse, detector and survival of every photon.
pub fn sample_photons(config: &ProtocolConfig, rng: &mut McRng) -> Vec<PhotonFate> {
    let mut out = Vec::with_capacity(config.n_atoms);
    sample_photons_into(config, rng, &mut out);
    out
}

fn sample_photons_into(config: &ProtocolConfig, rng: &mut McRng, out: &mut Vec<PhotonFate>) {
    out.clear();
    for _ in 0..config.n_atoms {
        let pulse = rng.random_range(1..=config.n_pulses);
        let emitted = if rng.random::<f64>() < config.branching_h {
            Detector::H
        } else {
            Detector::V
        };
        let detector = match config.rotator(pulse) {
            Some(r) => {
                let keep = r.theta.cos().powi(2);
                if rng.random::<f64>() < keep {
                    emitted
                } else {
                    emitted.flipped()
                }
            }
            None => emitted,
        };
        let survived = rng.random::<f64>() < config.eta;
        out.push(PhotonFate {
            pulse,
            detector,
            survived,
        });
    }
}

/// Threshold detection: one click per nonempty bin.
pub fn clicks_from_photons(photons: &[PhotonFate]) -> ClickRecord {
    ClickRecord::from_events(
        photons
            .iter()
            .filter(|p| p.survived)
            .map(|p| ClickEvent {
                pulse: p.pulse,
                detector: p.detector,
            })
            .collect(),
    )
}

/// Atomic operator heralded by a click at `event`.
///
/// Without a rotator this is `s0†` (h) or `s1†` (v). With one it is the
/// rotated excitation operator for the clicked detector, with the `s0†`
/// and `s1†` parts weighted by the emission amplitudes `sqrt(b)` and
/// `sqrt(1-b)`.
pub fn click_operator(config: &ProtocolConfig, event: &ClickEvent) -> Result<CollectiveOp> {
    match config.rotator(event.pulse) {
        None => Ok(match event.detector {
            Detector::H => CollectiveOp::s0(),
            Detector::V => CollectiveOp::s1(),
        }),
        Some(r) => {
            let setting = RotatorSetting {
                designated_detector: event.detector,
                ..*r
            };
            let op = excitation_operator(&setting);
            CollectiveOp::new(
                op.alpha() * config.branching_h.sqrt(),
                op.beta() * (1.0 - config.branching_h).sqrt(),
            )
        }
    }
}

/// Normalized heralded state for a complete click record.
pub fn conditional_state(config: &ProtocolConfig, clicks: &ClickRecord) -> Result<SymmetricState> {
    if clicks.total() != config.n_atoms {
        return Err(Error::invalid(format!(
            "conditional state needs {} clicks, got {}",
            config.n_atoms,
            clicks.total()
        )));
    }
    let ops = clicks
        .events
        .iter()
        .map(|e| click_operator(config, e))
        .collect::<Result<Vec<_>>>()?;
    normalize(&apply_chain(config.n_atoms, &ops)?)
}

/// One Monte Carlo run of the protocol.
pub fn simulate_run(config: &ProtocolConfig, rng: &mut McRng) -> Result<RunOutcome> {
    config.validate()?;
    let photons = sample_photons(config, rng);
    let clicks = clicks_from_photons(&photons);
    let post_selected = clicks.total() == config.n_atoms;
    let conditional_state = if post_selected {
        Some(conditional_state(config, &clicks)?)
    } else {
        None
    };
    Ok(RunOutcome {
        clicks,
        post_selected,
        conditional_state,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRecord {
    pub trials: u64,
    pub seed: u64,
    pub partitions: u64,
    pub post_selected: u64,
    pub p_succ: Estimate,
    pub p_en: Estimate,
    /// Post-selected runs by `n_h`.
    pub nh_counts: Vec<u64>,
    pub p_nh: Vec<Estimate>,
}

/// Empirical probabilities over `trials` runs.
pub fn estimate_probabilities(config: &ProtocolConfig, trials: u64, partitions: u64) -> Result<EmpiricalRecord> {
    config.validate()?;
    if trials < 1 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let n = config.n_atoms;
    let parts = run_partitioned(trials, config.seed, partitions, |rng, count| {
        let mut hist = vec![0u64; n + 1];
        let mut photons = Vec::with_capacity(n);
        let mut bins: Vec<(usize, Detector)> = Vec::with_capacity(n);
        for _ in 0..count {
            sample_photons_into(config, rng, &mut photons);
            bins.clear();
            bins.extend(photons.iter().filter(|p| p.survived).map(|p| (p.pulse, p.detector)));
            if bins.len() < n {
                continue;
            }
            bins.sort_unstable();
            bins.dedup();
            if bins.len() == n {
                hist[bins.iter().filter(|b| b.1 == Detector::H).count()] += 1;
            }
        }
        hist
    });
    let mut nh_counts = vec![0u64; n + 1];
    for h in parts {
        for (acc, c) in nh_counts.iter_mut().zip(h) {
            *acc += c;
        }
    }
    let post_selected: u64 = nh_counts.iter().sum();
    let entangled: u64 = if n >= 2 { nh_counts[1..n].iter().sum() } else { 0 };
    Ok(EmpiricalRecord {
        trials,
        seed: config.seed,
        partitions: partitions.max(1),
        post_selected,
        p_succ: Estimate::from_counts(post_selected, trials),
        p_en: Estimate::from_counts(entangled, trials),
        p_nh: nh_counts.iter().map(|&c| Estimate::from_counts(c, trials)).collect(),
        nh_counts,
    })
}

/// CSV histogram `n_h,count` of post-selected runs.
pub fn write_histogram_csv<W: std::io::Write>(counts: &[u64], w: W) -> Result<()> {
    let err = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["n_h", "count"]).map_err(err)?;
    for (n_h, c) in counts.iter().enumerate() {
        wtr.serialize((n_h, c)).map_err(err)?;
    }
    wtr.flush()
        .map_err(|e| Error::invalid(format!("csv write failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicke::{dicke_state, fidelity, DickeIndex};
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn p_si_examples() {
        assert_eq!(analytic_p_si(1, 3).unwrap(), 1.0);
        // Two photons over 2 paths: 4 equally likely assignments, 2 distinct.
        let enumerated = {
            let mut distinct = 0;
            for a in 0..2 {
                for b in 0..2 {
                    distinct += usize::from(a != b);
                }
            }
            distinct as f64 / 4.0
        };
        assert_eq!(analytic_p_si(2, 1).unwrap(), enumerated);
        assert_abs_diff_eq!(analytic_p_si(10, 50).unwrap(), 0.62816, epsilon = 5e-6);
        assert!(analytic_p_si(5, 2).is_err());
    }

    #[test]
    fn p_si_matches_brute_force_enumeration() {
        // All (2M)^N path assignments for small N, M.
        for n in 1..=4usize {
            for m in n.div_ceil(2)..=3 {
                let paths = 2 * m;
                let total = paths.pow(n as u32);
                let distinct = (0..total)
                    .filter(|code| {
                        let mut seen = vec![false; paths];
                        let mut c = *code;
                        (0..n).all(|_| {
                            let p = c % paths;
                            c /= paths;
                            !std::mem::replace(&mut seen[p], true)
                        })
                    })
                    .count();
                assert_abs_diff_eq!(
                    analytic_p_si(n, m).unwrap(),
                    distinct as f64 / total as f64,
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn success_and_entanglement_examples() {
        assert_eq!(analytic_p_succ(4, 5, 1.0).unwrap(), analytic_p_si(4, 5).unwrap());
        assert_abs_diff_eq!(
            analytic_p_succ(10, 50, 0.7).unwrap(),
            0.7f64.powi(10) * 0.628_156_509_555_2,
            epsilon = 1e-9
        );
        assert_eq!(analytic_p_succ(3, 5, 0.0).unwrap(), 0.0);
        assert_eq!(analytic_p_en(1, 4, 1.0).unwrap(), 0.0);
        let p_en = analytic_p_en(10, 50, 0.7).unwrap();
        assert_eq!((p_en * 1000.0).round() / 1000.0, 0.018);
        assert!(analytic_p_en(20, 100_000, 1.0).unwrap() > 0.99);
    }

    #[test]
    fn p_nh_sums_to_p_succ() {
        let p = analytic_p_nh(2, 1000, 1.0, 1).unwrap();
        assert_abs_diff_eq!(p, analytic_p_si(2, 1000).unwrap() * 0.5, epsilon = 1e-15);
        for n in 1..=12 {
            let s = analytic_summary(n, 20, 0.8).unwrap();
            assert_abs_diff_eq!(s.p_nh.iter().sum::<f64>(), s.p_succ, epsilon = 1e-12);
        }
        assert!(analytic_p_nh(2, 1, 1.0, 3).is_err());
    }

    #[test]
    fn repeat_cost_examples() {
        let cfg = ProtocolConfig::new(10, 50, 0.7).unwrap();
        let t = repeat_cost(&cfg, 3.5e-7).unwrap();
        assert!((t - 9.9e-4).abs() < 0.1e-4, "t = {t}");
        let single = ProtocolConfig::new(1, 1, 1.0).unwrap();
        assert!(matches!(repeat_cost(&single, 1e-7), Err(Error::Infeasible(_))));
        let mut skewed = cfg.clone();
        skewed.branching_h = 0.7;
        assert!(repeat_cost(&skewed, 1e-7).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ProtocolConfig::new(5, 2, 1.0).is_err());
        assert!(ProtocolConfig::new(2, 1, 1.2).is_err());
        let mut c = ProtocolConfig::new(2, 2, 1.0).unwrap();
        c.rotators = Some(vec![RotatorSetting::identity()]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn single_atom_always_heralds() {
        let mut cfg = ProtocolConfig::new(1, 3, 1.0).unwrap();
        cfg.branching_h = 0.3;
        let mut rng = stream_rng(11, 0);
        let mut h = 0;
        for _ in 0..20_000 {
            let r = simulate_run(&cfg, &mut rng).unwrap();
            assert!(r.post_selected);
            let s = r.conditional_state.unwrap();
            if r.clicks.n_h == 1 {
                h += 1;
                assert_eq!(s.amplitude(1, 0), Complex64::new(1.0, 0.0));
            } else {
                assert_eq!(s.amplitude(0, 1), Complex64::new(1.0, 0.0));
            }
        }
        let frac = h as f64 / 20_000.0;
        assert!((frac - 0.3).abs() < 4.0 * (0.3f64 * 0.7 / 20_000.0).sqrt());
    }

    #[test]
    fn shared_bin_is_not_post_selected() {
        let photons = [
            PhotonFate {
                pulse: 2,
                detector: Detector::H,
                survived: true,
            },
            PhotonFate {
                pulse: 2,
                detector: Detector::H,
                survived: true,
            },
        ];
        let clicks = clicks_from_photons(&photons);
        assert_eq!(clicks.total(), 1);
        let lost = [
            PhotonFate {
                pulse: 1,
                detector: Detector::H,
                survived: false,
            },
            PhotonFate {
                pulse: 2,
                detector: Detector::V,
                survived: true,
            },
        ];
        assert_eq!(clicks_from_photons(&lost).total(), 1);
    }

    #[test]
    fn heralded_state_is_the_dicke_state() {
        let cfg = ProtocolConfig::new(4, 6, 0.6).unwrap();
        let mut rng = stream_rng(5, 0);
        let mut seen = 0;
        for _ in 0..5000 {
            let r = simulate_run(&cfg, &mut rng).unwrap();
            if let Some(s) = r.conditional_state {
                seen += 1;
                let d = dicke_state(DickeIndex::new(4, r.clicks.n_h).unwrap());
                assert_abs_diff_eq!(fidelity(&s, &d).unwrap(), 1.0, epsilon = 1e-10);
            }
        }
        assert!(seen > 100);
    }

    #[test]
    fn estimate_is_deterministic_and_exact_for_one_atom() {
        let cfg = ProtocolConfig::new(1, 2, 1.0).unwrap().with_seed(9);
        let r = estimate_probabilities(&cfg, 1000, 4).unwrap();
        assert_eq!(r.p_succ.value, 1.0);
        assert_eq!(r.p_en.value, 0.0);
        let cfg = ProtocolConfig::new(4, 3, 0.9).unwrap().with_seed(9);
        assert_eq!(
            estimate_probabilities(&cfg, 5000, 4).unwrap(),
            estimate_probabilities(&cfg, 5000, 4).unwrap()
        );
    }

    #[test]
    fn histogram_csv() {
        let mut buf = Vec::new();
        write_histogram_csv(&[1, 2, 3], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n_h,count\n0,1\n1,2\n2,3\n");
    }
}
