//! Small numeric helpers shared across modules: complex (de)serialization,
//! factorials, and uniform-grid trapezoid quadrature.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Complex amplitude used throughout the crate.
pub type Amplitude = Complex64;

/// `{re, im}` wire form of a complex number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Serde adapter: `#[serde(with = "crate::numeric::complex_serde")]`.
pub mod complex_serde {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ComplexJson::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        ComplexJson::deserialize(d).map(Complex64::from)
    }
}

/// Serde adapter for `Vec<Complex64>` as a list of `{re, im}` objects.
pub mod complex_vec_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| ComplexJson::from(*z)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Vec::<ComplexJson>::deserialize(d).map(|v| v.into_iter().map(Complex64::from).collect())
    }
}

pub fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// ln(n!). Exact integer product below 21, log-gamma above.
pub fn ln_factorial(n: usize) -> f64 {
    if n <= 20 {
        ((1..=n as u64).product::<u64>().max(1) as f64).ln()
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

/// n! as a float; exact for n <= 20.
pub fn factorial(n: usize) -> f64 {
    if n <= 20 {
        (1..=n as u64).product::<u64>().max(1) as f64
    } else {
        ln_factorial(n).exp()
    }
}

/// Binomial coefficient C(n, k) as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 20 {
        factorial(n) / (factorial(k) * factorial(n - k))
    } else {
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
    }
}

/// Trapezoid rule on a uniform grid of spacing `dt`.
pub fn trapezoid(dt: f64, values: &[f64]) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

/// Running trapezoid integral; `out[0] = 0`.
pub fn cumulative_trapezoid(dt: f64, values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * dt * (values[i - 1] + v);
        }
        out.push(acc);
    }
    out
}

/// Complex trapezoid on a uniform grid.
pub fn trapezoid_complex(dt: f64, values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 | 1 => Complex64::new(0.0, 0.0),
        n => dt * (values.iter().sum::<Complex64>() - 0.5 * (values[0] + values[n - 1])),
    }
}
