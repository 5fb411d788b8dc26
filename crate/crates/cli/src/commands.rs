use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use herald_core::multi_atom::{estimate_probabilities, repeat_cost, write_histogram_csv};
use herald_core::pulse::{
    analytic_emission_probability, analytic_pulse_shape, relative_l2_error, simulate_single_atom_emission,
};
use herald_core::rng::DEFAULT_PARTITIONS;
use herald_core::synthesis::{plan_success_probability, synthesize as make_plan, MIN_PLAN_FIDELITY};
use herald_core::two_cavity::{
    cavity_emission_state, coincidence_project, monte_carlo_two_cavity, success_probability, two_photon_coherence,
};
use herald_core::{Error, ProjectiveRoot, ProtocolConfig, TargetSuperposition, TemporalMode};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::{DickeConfig, PulseShapeConfig, SynthesizeConfig, TwoCavityConfig};
use crate::output::*;
use crate::RunOptions;

const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_precondition() => 2,
            CliError::Core(_) => 3,
            CliError::Output { .. } => 1,
        }
    }
}

fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

/// `run.json` + `analytic` → `run.analytic.csv`.
fn sibling(out: &Path, tag: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{tag}.csv"))
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    let io = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io(e.into()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io)
}

fn write_mode(path: &Path, mode: &TemporalMode) -> Result<(), CliError> {
    mode.write_csv(create(path)?)?;
    Ok(())
}

pub fn pulse_shape(opts: &RunOptions) -> Result<(), CliError> {
    let cfg: PulseShapeConfig = read_config(&opts.config)?;
    let params = cfg.cavity.params()?;
    let profile = cfg.drive.profile()?;
    let analytic = analytic_pulse_shape(&profile, &params);
    let numeric = simulate_single_atom_emission(&profile, &params)?;
    let l2_relative_error = if analytic.norm_sqr() > 0.0 {
        Some(relative_l2_error(&numeric.numeric_mode, &analytic)?)
    } else {
        None
    };

    let (analytic_path, numeric_path) = (sibling(&opts.out, "analytic"), sibling(&opts.out, "numeric"));
    write_mode(&analytic_path, &analytic)?;
    write_mode(&numeric_path, &numeric.numeric_mode)?;
    write_json(
        &opts.out,
        &PulseShapeReport {
            p_c: numeric.p_c,
            p_c_analytic: analytic_emission_probability(&profile, &params),
            l2_relative_error,
            branching_h: numeric.branching_h,
            residual_population: numeric.residual_population,
            max_norm_defect: numeric.max_norm_defect,
            points: profile.times().len(),
            dt: profile.dt(),
            analytic_csv: file_name(&analytic_path),
            numeric_csv: file_name(&numeric_path),
        },
    )
}

pub fn two_cavity(opts: &RunOptions) -> Result<(), CliError> {
    let cfg: TwoCavityConfig = read_config(&opts.config)?;
    let (pl, pr) = (cfg.left.params()?, cfg.right.params()?);
    cfg.detection.validate()?;
    let coherence = match (&cfg.drive, cfg.coherence) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("give either `coherence` or `drive`, not both".into()));
        }
        (Some(drive), None) => {
            let profile = drive.profile()?;
            let f_l = analytic_pulse_shape(&profile, &pl);
            let f_r = analytic_pulse_shape(&profile, &pr).delayed(cfg.delay);
            two_photon_coherence(&f_l, &f_r)?
        }
        (None, c) => c.unwrap_or(1.0),
    };
    let outcome = coincidence_project(
        &cavity_emission_state(&pl)?,
        &cavity_emission_state(&pr)?,
        Complex64::new(coherence, 0.0),
        &cfg.detection,
    )?;
    let trials = opts.trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS);
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let mc = monte_carlo_two_cavity(&pl, &pr, &cfg.detection, trials, seed, DEFAULT_PARTITIONS)?;
    write_json(
        &opts.out,
        &TwoCavityReport {
            p_analytic: success_probability(&pl, &pr, &cfg.detection)?,
            coherence,
            p_same_sign: outcome.p_same_sign,
            p_opposite_sign: outcome.p_opposite_sign,
            bell_fidelity: outcome.bell_fidelity,
            conditional_density: outcome.conditional_density.map(|d| d.to_pairs()),
            monte_carlo: TwoCavityMonteCarlo {
                trials: mc.trials,
                seed: mc.seed,
                partitions: mc.partitions,
                successes: mc.successes,
                rate: mc.rate,
                lost: mc.lost,
                same_port: mc.same_port,
                signs: mc.signs,
            },
        },
    )
}

pub fn dicke(opts: &RunOptions) -> Result<(), CliError> {
    let cfg: DickeConfig = read_config(&opts.config)?;
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let mut protocol = ProtocolConfig::new(cfg.n_atoms, cfg.n_pulses, cfg.eta)?.with_seed(seed);
    if let Some(b) = cfg.branching_h {
        protocol.branching_h = b;
        protocol.validate()?;
    }
    let analytic = if (protocol.branching_h - 0.5).abs() <= 1e-12 {
        Some(protocol.analytic()?)
    } else {
        None
    };
    let repeat_cost_s = match cfg.pulse_duration {
        Some(dt) if analytic.as_ref().is_some_and(|a| a.p_en > 0.0) => Some(repeat_cost(&protocol, dt)?),
        Some(dt) if !(dt > 0.0) => return Err(CliError::Config("pulse_duration must be positive".into())),
        _ => None,
    };
    let trials = opts.trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS);
    let rec = estimate_probabilities(&protocol, trials, DEFAULT_PARTITIONS)?;

    let histogram_path = sibling(&opts.out, "histogram");
    write_histogram_csv(&rec.nh_counts, create(&histogram_path)?)?;
    let analytic_csv = match &analytic {
        Some(a) => {
            let path = sibling(&opts.out, "analytic");
            let io = |source| CliError::Output {
                path: path.clone(),
                source,
            };
            let mut w = create(&path)?;
            writeln!(w, "n_h,p_nh").map_err(io)?;
            for (n_h, p) in a.p_nh.iter().enumerate() {
                writeln!(w, "{n_h},{p}").map_err(io)?;
            }
            w.flush().map_err(io)?;
            Some(file_name(&path))
        }
        None => None,
    };
    write_json(
        &opts.out,
        &DickeReport {
            n_atoms: protocol.n_atoms,
            n_pulses: protocol.n_pulses,
            eta: protocol.eta,
            branching_h: protocol.branching_h,
            analytic,
            repeat_cost_s,
            empirical: DickeEmpirical {
                trials: rec.trials,
                seed: rec.seed,
                partitions: rec.partitions,
                post_selected: rec.post_selected,
                p_succ: rec.p_succ,
                p_en: rec.p_en,
                nh_counts: rec.nh_counts,
            },
            analytic_csv,
            histogram_csv: file_name(&histogram_path),
        },
    )
}

pub fn synthesize(opts: &RunOptions) -> Result<(), CliError> {
    let cfg: SynthesizeConfig = read_config(&opts.config)?;
    if cfg.coefficients.len() != cfg.n_atoms + 1 {
        return Err(CliError::Config(format!(
            "n_atoms = {} needs {} coefficients, got {}",
            cfg.n_atoms,
            cfg.n_atoms + 1,
            cfg.coefficients.len()
        )));
    }
    let target = TargetSuperposition::normalized(cfg.coefficients.iter().map(|&c| c.into()).collect())?;
    let plan = make_plan(&target)?;

    let verification = if opts.verify {
        let (n_pulses, eta) = cfg
            .protocol
            .as_ref()
            .map_or((cfg.n_atoms, 1.0), |p| (p.n_pulses, p.eta));
        let seed = opts.seed.or(cfg.seed).unwrap_or(0);
        let trials = opts.trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS);
        let protocol = ProtocolConfig::new(cfg.n_atoms, n_pulses, eta)?.with_seed(seed);
        let est = plan_success_probability(&plan, &protocol, trials, DEFAULT_PARTITIONS)?;
        Some(Verification {
            n_pulses,
            eta,
            trials: est.trials,
            seed: est.seed,
            partitions: est.partitions,
            accepted: est.accepted,
            probability: est.probability,
            min_fidelity: est.min_fidelity,
            mean_fidelity: est.mean_fidelity,
        })
    } else {
        None
    };

    let min_fidelity = verification.as_ref().and_then(|v| v.min_fidelity);
    write_json(
        &opts.out,
        &SynthesisReport {
            n_atoms: cfg.n_atoms,
            settings: plan
                .settings
                .iter()
                .zip(plan.designated_events())
                .map(|(s, e)| SettingOut {
                    theta: s.theta,
                    phi: s.phi,
                    detector: s.designated_detector,
                    pulse: e.pulse,
                })
                .collect(),
            predicted_fidelity: plan.predicted_fidelity,
            roots: plan
                .roots
                .iter()
                .map(|r| match r {
                    ProjectiveRoot::Finite(z) => RootOut::Finite { re: z.re, im: z.im },
                    ProjectiveRoot::Infinite => RootOut::Infinite("inf"),
                })
                .collect(),
            verification,
        },
    )?;
    match min_fidelity {
        Some(f) if f < MIN_PLAN_FIDELITY => Err(CliError::Core(Error::NumericFailure(format!(
            "a heralded state reached fidelity {f} < {MIN_PLAN_FIDELITY}"
        )))),
        _ => Ok(()),
    }
}
