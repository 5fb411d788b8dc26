//! Cavity output temporal mode under an adiabatic drive.
//!
//! The analytic mode is
//!
//! ```text
//! f(t) = sqrt(κ) sinθ(t) exp(-(κ/2) ∫_0^t sin²θ(τ) dτ),
//! sinθ(t) = |Ω(t)| / sqrt(|g0|² + |g1|² + |Ω(t)|²)
//! ```
//!
//! and is checked against a direct RK4 integration of the no-jump
//! one-excitation dynamics on `{|g;vac>, |e;vac>, |0;1_h>, |1;1_v>}`, with
//! decay `-iκ/2` on both one-photon components. The output amplitude in
//! polarization `μ` is `sqrt(κ) c_μ(t)`.
//!
//! All time integrals use the trapezoid rule on the uniform profile grid.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{complex_serde, cumulative_trapezoid, is_finite, trapezoid, trapezoid_complex};

pub const MIN_GRID_POINTS: usize = 16;
/// Bound on `max(|Ω|, |g0|, |g1|, κ) * dt` for the integrator.
pub const MAX_RATE_STEP: f64 = 0.05;
/// Allowed change in `p_c` when the step is halved.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Drive `Ω(t)` sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseProfile {
    times: Vec<f64>,
    rabi: Vec<Complex64>,
}

impl PulseProfile {
    pub fn new(times: Vec<f64>, rabi: Vec<Complex64>) -> Result<Self> {
        if times.len() < MIN_GRID_POINTS {
            return Err(Error::invalid(format!(
                "pulse grid needs at least {MIN_GRID_POINTS} points, got {}",
                times.len()
            )));
        }
        if times.len() != rabi.len() {
            return Err(Error::invalid("times and rabi lengths differ"));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        let uniform = times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt);
        if !uniform {
            return Err(Error::invalid("grid spacing must be uniform"));
        }
        if !rabi.iter().all(|z| is_finite(*z)) {
            return Err(Error::invalid("rabi frequency must be finite"));
        }
        let peak = rabi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if rabi[0].norm() > 1e-9 * peak {
            return Err(Error::invalid("drive must ramp from zero"));
        }
        Ok(PulseProfile { times, rabi })
    }

    /// `Ω(t) = Ω_max sin²(π t / T)` on `points` samples of `[0, T]`.
    pub fn sin_squared(omega_max: f64, duration: f64, points: usize) -> Result<Self> {
        if !(duration > 0.0) || points < 2 {
            return Err(Error::invalid("duration must be positive"));
        }
        let dt = duration / (points - 1) as f64;
        let times: Vec<f64> = (0..points).map(|i| i as f64 * dt).collect();
        let rabi = times
            .iter()
            .map(|t| {
                let s = (std::f64::consts::PI * t / duration).sin();
                Complex64::new(omega_max * s * s, 0.0)
            })
            .collect();
        Self::new(times, rabi)
    }

    /// Constant-zero drive.
    pub fn off(duration: f64, points: usize) -> Result<Self> {
        Self::sin_squared(0.0, duration, points)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rabi(&self) -> &[Complex64] {
        &self.rabi
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn peak(&self) -> f64 {
        self.rabi.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Same grid, drive multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        PulseProfile {
            times: self.times.clone(),
            rabi: self.rabi.iter().map(|z| z * c).collect(),
        }
    }
}

/// Couplings `g0`, `g1` and cavity decay `κ` (rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    #[serde(with = "complex_serde")]
    g0: Complex64,
    #[serde(with = "complex_serde")]
    g1: Complex64,
    kappa: f64,
}

impl CavityParams {
    pub fn new(g0: Complex64, g1: Complex64, kappa: f64) -> Result<Self> {
        let p = CavityParams { g0, g1, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_finite(self.g0) || !is_finite(self.g1) {
            return Err(Error::invalid("couplings must be finite"));
        }
        if self.coupling_norm_sqr() <= 0.0 {
            return Err(Error::invalid("at least one coupling must be nonzero"));
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::invalid("kappa must be positive"));
        }
        Ok(())
    }

    /// Real couplings.
    pub fn real(g0: f64, g1: f64, kappa: f64) -> Result<Self> {
        Self::new(Complex64::new(g0, 0.0), Complex64::new(g1, 0.0), kappa)
    }

    pub fn g0(&self) -> Complex64 {
        self.g0
    }

    pub fn g1(&self) -> Complex64 {
        self.g1
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `|g0|² + |g1|²`.
    pub fn coupling_norm_sqr(&self) -> f64 {
        self.g0.norm_sqr() + self.g1.norm_sqr()
    }

    /// `|g0|² / (|g0|² + |g1|²)`.
    pub fn branching_h(&self) -> f64 {
        self.g0.norm_sqr() / self.coupling_norm_sqr()
    }

    /// Couplings multiplied by `c`, `κ` unchanged.
    pub fn scaled(&self, c: f64) -> Self {
        CavityParams {
            g0: self.g0 * c,
            g1: self.g1 * c,
            kappa: self.kappa,
        }
    }
}

/// Sampled single-photon wavepacket, units `1/sqrt(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalMode {
    times: Vec<f64>,
    values: Vec<Complex64>,
}

impl TemporalMode {
    pub fn new(times: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::invalid("mode needs matching times and values (>= 2 points)"));
        }
        Ok(TemporalMode { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// `∫|f|² dt`.
    pub fn norm_sqr(&self) -> f64 {
        let v: Vec<f64> = self.values.iter().map(|z| z.norm_sqr()).collect();
        trapezoid(self.dt(), &v)
    }

    /// Same shape, delayed by `delay` (zero before the shifted start);
    /// linear interpolation between samples.
    pub fn delayed(&self, delay: f64) -> TemporalMode {
        let dt = self.dt();
        let t0 = self.times[0];
        let values = self
            .times
            .iter()
            .map(|t| {
                let x = (t - delay - t0) / dt;
                if x < 0.0 || x > (self.values.len() - 1) as f64 {
                    return Complex64::new(0.0, 0.0);
                }
                let i = (x.floor() as usize).min(self.values.len() - 2);
                let frac = x - i as f64;
                self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
            })
            .collect();
        TemporalMode {
            times: self.times.clone(),
            values,
        }
    }

    /// CSV with header `t,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let io = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t", "re", "im"]).map_err(io)?;
        for (t, z) in self.times.iter().zip(&self.values) {
            wtr.serialize((t, z.re, z.im)).map_err(io)?;
        }
        wtr.flush()
            .map_err(|e| Error::invalid(format!("csv write failed: {e}")))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let (mut times, mut values) = (Vec::new(), Vec::new());
        for row in rdr.deserialize::<(f64, f64, f64)>() {
            let (t, re, im) = row.map_err(|e| Error::invalid(format!("csv read failed: {e}")))?;
            times.push(t);
            values.push(Complex64::new(re, im));
        }
        Self::new(times, values)
    }
}

/// Output of the direct single-atom integration.
#[derive(Clone, Debug)]
pub struct EmissionResult {
    /// Output amplitude projected on the bright channel
    /// `(g0 a_h + g1 a_v) / sqrt(|g0|²+|g1|²)`.
    pub numeric_mode: TemporalMode,
    pub mode_h: TemporalMode,
    pub mode_v: TemporalMode,
    /// Emitted probability by the end of the grid.
    pub p_c: f64,
    pub branching_h: f64,
    /// Norm left in the atom and cavity at the end of the grid.
    pub residual_population: f64,
    /// `max_t |emitted(t) + norm(t) - 1|`.
    pub max_norm_defect: f64,
}

/// `sinθ(t)` on the profile grid.
pub fn mixing_angle(profile: &PulseProfile, params: &CavityParams) -> Vec<f64> {
    let g2 = params.coupling_norm_sqr();
    profile
        .rabi
        .iter()
        .map(|om| {
            let o = om.norm();
            o / (g2 + o * o).sqrt()
        })
        .collect()
}

/// The analytic adiabatic output mode.
pub fn analytic_pulse_shape(profile: &PulseProfile, params: &CavityParams) -> TemporalMode {
    let kappa = params.kappa;
    let sin_theta = mixing_angle(profile, params);
    let sin2: Vec<f64> = sin_theta.iter().map(|s| s * s).collect();
    let cumulative = cumulative_trapezoid(profile.dt(), &sin2);
    let values = sin_theta
        .iter()
        .zip(&cumulative)
        .map(|(s, i)| Complex64::new(kappa.sqrt() * s * (-0.5 * kappa * i).exp(), 0.0))
        .collect();
    TemporalMode {
        times: profile.times.clone(),
        values,
    }
}

/// `1 - exp(-κ ∫_0^T sin²θ dτ)`, the closed-form value of `∫|f|²`.
pub fn analytic_emission_probability(profile: &PulseProfile, params: &CavityParams) -> f64 {
    let sin2: Vec<f64> = mixing_angle(profile, params).iter().map(|s| s * s).collect();
    1.0 - (-params.kappa * trapezoid(profile.dt(), &sin2)).exp()
}

// c_g, c_e, c_h, c_v, emitted_h, emitted_v (last two real, stored in re).
type OdeState = [Complex64; 6];

fn derivative(y: &OdeState, omega: Complex64, p: &CavityParams) -> OdeState {
    let i = Complex64::i();
    let half_k = 0.5 * p.kappa;
    let [cg, ce, ch, cv, _, _] = *y;
    [
        -i * (omega.conj() * ce),
        -i * (omega * cg + p.g0 * ch + p.g1 * cv),
        -i * (p.g0.conj() * ce) - half_k * ch,
        -i * (p.g1.conj() * ce) - half_k * cv,
        Complex64::new(p.kappa * ch.norm_sqr(), 0.0),
        Complex64::new(p.kappa * cv.norm_sqr(), 0.0),
    ]
}

fn axpy(y: &OdeState, h: f64, k: &OdeState) -> OdeState {
    std::array::from_fn(|j| y[j] + k[j] * h)
}

struct Trajectory {
    /// `(c_h, c_v)` at grid points.
    cavity: Vec<(Complex64, Complex64)>,
    final_state: OdeState,
    max_norm_defect: f64,
}

fn norm_and_emitted(y: &OdeState) -> f64 {
    y[..4].iter().map(|z| z.norm_sqr()).sum::<f64>() + y[4].re + y[5].re
}

fn integrate(profile: &PulseProfile, params: &CavityParams, substeps: usize) -> Trajectory {
    let n = profile.times.len();
    let h = profile.dt() / substeps as f64;
    let mut y: OdeState = [Complex64::new(0.0, 0.0); 6];
    y[0] = Complex64::new(1.0, 0.0);
    let mut cavity = Vec::with_capacity(n);
    cavity.push((y[2], y[3]));
    let mut max_norm_defect: f64 = 0.0;
    for step in 0..n - 1 {
        let (o0, o1) = (profile.rabi[step], profile.rabi[step + 1]);
        let omega_at = |frac: f64| o0 + (o1 - o0) * frac;
        for sub in 0..substeps {
            let f0 = sub as f64 / substeps as f64;
            let fm = (sub as f64 + 0.5) / substeps as f64;
            let f1 = (sub + 1) as f64 / substeps as f64;
            let k1 = derivative(&y, omega_at(f0), params);
            let k2 = derivative(&axpy(&y, 0.5 * h, &k1), omega_at(fm), params);
            let k3 = derivative(&axpy(&y, 0.5 * h, &k2), omega_at(fm), params);
            let k4 = derivative(&axpy(&y, h, &k3), omega_at(f1), params);
            y = std::array::from_fn(|j| y[j] + (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0));
            max_norm_defect = max_norm_defect.max((norm_and_emitted(&y) - 1.0).abs());
        }
        cavity.push((y[2], y[3]));
    }
    Trajectory {
        cavity,
        final_state: y,
        max_norm_defect,
    }
}

/// Direct integration of the single-atom emission, with a step-halving
/// convergence check on `p_c`.
pub fn simulate_single_atom_emission(profile: &PulseProfile, params: &CavityParams) -> Result<EmissionResult> {
    params.validate()?;
    let max_rate = profile
        .peak()
        .max(params.g0.norm())
        .max(params.g1.norm())
        .max(params.kappa);
    let product = max_rate * profile.dt();
    if product > MAX_RATE_STEP {
        return Err(Error::GridTooCoarse {
            product,
            limit: MAX_RATE_STEP,
        });
    }

    let p_c_of = |t: &Trajectory| 1.0 - t.final_state[..4].iter().map(|z| z.norm_sqr()).sum::<f64>();
    let coarse = integrate(profile, params, 1);
    let fine = integrate(profile, params, 2);
    let delta = (p_c_of(&coarse) - p_c_of(&fine)).abs();
    if delta > CONVERGENCE_TOL {
        return Err(Error::NonConvergence { delta });
    }

    let sqrt_k = params.kappa.sqrt();
    let g = params.coupling_norm_sqr().sqrt();
    let (bright_h, bright_v) = (params.g0 / g, params.g1 / g);
    let times = profile.times.clone();
    let mode = |f: &dyn Fn(&(Complex64, Complex64)) -> Complex64| TemporalMode {
        times: times.clone(),
        values: fine.cavity.iter().map(|c| f(c) * sqrt_k).collect(),
    };
    let mode_h = mode(&|c| c.0);
    let mode_v = mode(&|c| c.1);
    let numeric_mode = mode(&|c| bright_h * c.0 + bright_v * c.1);

    let y = fine.final_state;
    let (emitted_h, emitted_v) = (y[4].re, y[5].re);
    let branching_h = if emitted_h + emitted_v > 0.0 {
        emitted_h / (emitted_h + emitted_v)
    } else {
        params.branching_h()
    };
    let residual_population: f64 = y[..4].iter().map(|z| z.norm_sqr()).sum();
    Ok(EmissionResult {
        numeric_mode,
        mode_h,
        mode_v,
        p_c: 1.0 - residual_population,
        branching_h,
        residual_population,
        max_norm_defect: fine.max_norm_defect,
    })
}

fn check_same_grid(a: &TemporalMode, b: &TemporalMode) -> Result<()> {
    let same = a.times.len() == b.times.len()
        && a.times
            .iter()
            .zip(&b.times)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(a.dt()));
    if same {
        Ok(())
    } else {
        Err(Error::invalid("modes are sampled on different grids"))
    }
}

/// `<a|b> / sqrt(<a|a><b|b>)`.
pub fn mode_overlap(a: &TemporalMode, b: &TemporalMode) -> Result<Complex64> {
    check_same_grid(a, b)?;
    let (na, nb) = (a.norm_sqr(), b.norm_sqr());
    if !(na > 0.0 && nb > 0.0) {
        return Err(Error::invalid("mode has zero norm"));
    }
    let integrand: Vec<Complex64> = a.values.iter().zip(&b.values).map(|(x, y)| x.conj() * y).collect();
    Ok(trapezoid_complex(a.dt(), &integrand) / (na * nb).sqrt())
}

/// `min_φ ||candidate - e^{iφ} reference|| / ||reference||`. The global phase
/// of an output mode carries no physical meaning, so it is optimized out.
pub fn relative_l2_error(candidate: &TemporalMode, reference: &TemporalMode) -> Result<f64> {
    check_same_grid(candidate, reference)?;
    let nr = reference.norm_sqr();
    if !(nr > 0.0) {
        return Err(Error::invalid("reference mode has zero norm"));
    }
    let integrand: Vec<Complex64> = reference
        .values
        .iter()
        .zip(&candidate.values)
        .map(|(r, c)| r.conj() * c)
        .collect();
    let cross = trapezoid_complex(reference.dt(), &integrand).norm();
    let d2 = (candidate.norm_sqr() + nr - 2.0 * cross).max(0.0);
    Ok((d2 / nr).sqrt())
}
