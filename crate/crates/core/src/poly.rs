//! Projective roots of complex polynomials.
//!
//! A coefficient list `a_0..a_N` of formal degree `N` always has `N` roots on
//! the extended complex plane: `d` finite roots of the actual degree-`d`
//! polynomial plus `N - d` roots at infinity. Finite roots come from the
//! eigenvalues of the companion matrix and are then Newton-polished.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::is_finite;

/// Coefficients below this fraction of the largest one are treated as zero.
pub const ZERO_COEFF: f64 = 1e-14;

const NEWTON_ITERS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectiveRoot {
    Finite(#[serde(with = "crate::numeric::complex_serde")] Complex64),
    Infinite,
}

impl ProjectiveRoot {
    pub fn finite(&self) -> Option<Complex64> {
        match self {
            ProjectiveRoot::Finite(z) => Some(*z),
            ProjectiveRoot::Infinite => None,
        }
    }
}

/// Horner evaluation of `Σ a_k x^k`.
pub fn eval(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * x + a)
}

fn eval_with_derivative(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    coeffs
        .iter()
        .rev()
        .fold((zero, zero), |(p, dp), a| (p * x + a, dp * x + p))
}

/// Residual bound `|p(r)| <= tol * max|a| * max(1, |r|)^d`.
pub fn residual_ok(coeffs: &[Complex64], root: Complex64, tol: f64) -> bool {
    scaled_residual(coeffs, root) <= tol
}

/// `|p(r)| / (max|a| * max(1, |r|)^d)` with `d` the actual degree.
pub fn scaled_residual(coeffs: &[Complex64], root: Complex64) -> f64 {
    let scale = coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let degree = coeffs.iter().rposition(|a| a.norm() > 0.0).unwrap_or(0);
    eval(coeffs, root).norm() / (scale * root.norm().max(1.0).powi(degree as i32))
}

fn companion_eigenvalues(monic_tail: &[Complex64]) -> Option<Vec<Complex64>> {
    // x^n + c_{n-1} x^{n-1} + ... + c_0; last column holds -c_k.
    let n = monic_tail.len();
    if n == 1 {
        return Some(vec![-monic_tail[0]]);
    }
    let m = DMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -monic_tail[i]
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let eig = Schur::try_new(m, f64::EPSILON, 10_000)?.eigenvalues()?;
    Some(eig.iter().copied().collect())
}

/// Coefficients of `p(x + s)`.
fn taylor_shift(coeffs: &[Complex64], s: Complex64) -> Vec<Complex64> {
    let mut a = coeffs.to_vec();
    let n = a.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let next = a[j + 1];
            a[j] += s * next;
        }
    }
    a
}

/// Roots of a polynomial with nonzero leading coefficient. Unit-modulus
/// root sets can stall the QR iteration, so a few shifted copies are tried.
fn finite_roots(core: &[Complex64]) -> Result<Vec<Complex64>> {
    for shift in SHIFTS {
        let s = Complex64::new(shift.0, shift.1);
        let shifted = taylor_shift(core, s);
        let lead = shifted[shifted.len() - 1];
        let tail: Vec<Complex64> = shifted[..shifted.len() - 1].iter().map(|a| a / lead).collect();
        if let Some(eig) = companion_eigenvalues(&tail) {
            return Ok(eig.into_iter().map(|z| z + s).collect());
        }
    }
    Err(Error::NumericFailure(
        "companion Schur decomposition did not converge".into(),
    ))
}

const SHIFTS: [(f64, f64); 4] = [(0.0, 0.0), (0.0137, 0.0071), (-0.211, 0.097), (0.43, -0.38)];

fn polish(coeffs: &[Complex64], mut x: Complex64) -> Complex64 {
    let mut best = (eval(coeffs, x).norm(), x);
    for _ in 0..NEWTON_ITERS {
        let (p, dp) = eval_with_derivative(coeffs, x);
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        let r = eval(coeffs, x).norm();
        if r < best.0 {
            best = (r, x);
        }
        if step.norm() <= 1e-16 * x.norm().max(1.0) {
            break;
        }
    }
    best.1
}

/// All `coeffs.len() - 1` projective roots of `Σ coeffs[k] x^k`.
pub fn polynomial_roots(coeffs: &[Complex64], tol: f64) -> Result<Vec<ProjectiveRoot>> {
    if coeffs.len() < 2 {
        return Err(Error::invalid("need at least two coefficients"));
    }
    if !coeffs.iter().all(|a| is_finite(*a)) {
        return Err(Error::invalid("coefficients must be finite"));
    }
    let scale = coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::invalid("zero polynomial has no well-defined roots"));
    }
    let scaled: Vec<Complex64> = coeffs
        .iter()
        .map(|a| {
            let v = a / scale;
            if v.norm() <= ZERO_COEFF {
                Complex64::new(0.0, 0.0)
            } else {
                v
            }
        })
        .collect();
    let formal = coeffs.len() - 1;
    let degree = scaled.iter().rposition(|a| a.norm() > 0.0).unwrap_or(0);
    let low = scaled.iter().position(|a| a.norm() > 0.0).unwrap_or(0);

    let mut roots = vec![ProjectiveRoot::Finite(Complex64::new(0.0, 0.0)); low];
    if degree > low {
        let core = &scaled[low..=degree];
        for guess in finite_roots(core)? {
            let r = polish(core, guess);
            if !is_finite(r) {
                return Err(Error::NumericFailure(format!(
                    "root refinement diverged from initial guess {guess}"
                )));
            }
            let residual = scaled_residual(&scaled[..=degree], r);
            if residual > tol {
                return Err(Error::NumericFailure(format!(
                    "root {r} has scaled residual {residual:.3e} > {tol:.1e} (degree {degree})"
                )));
            }
            roots.push(ProjectiveRoot::Finite(r));
        }
    }
    roots.extend(std::iter::repeat_n(ProjectiveRoot::Infinite, formal - degree));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_finite(roots: &[ProjectiveRoot]) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = roots.iter().filter_map(|r| r.finite()).collect();
        v.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        v
    }

    #[test]
    fn x_squared_plus_one() {
        let roots = polynomial_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-10).unwrap();
        let f = sorted_finite(&roots);
        assert!((f[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((f[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn degree_deficiency_gives_infinite_roots() {
        let roots = polynomial_roots(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], 1e-10).unwrap();
        assert_eq!(
            roots,
            vec![ProjectiveRoot::Finite(c(0.0, 0.0)), ProjectiveRoot::Infinite]
        );
        let constant = polynomial_roots(&[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 1e-10).unwrap();
        assert_eq!(constant, vec![ProjectiveRoot::Infinite; 2]);
    }

    #[test]
    fn roots_of_minus_one() {
        for n in 2..=6 {
            let mut coeffs = vec![c(0.0, 0.0); n + 1];
            coeffs[0] = c(0.3, 0.0);
            coeffs[n] = c(0.3, 0.0);
            let roots = polynomial_roots(&coeffs, 1e-10).unwrap();
            assert_eq!(roots.len(), n);
            for r in roots {
                let z = r.finite().unwrap();
                assert!((z.powi(n as i32) + 1.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn repeated_roots_pass_the_residual_bound() {
        // (x - 1)^3
        let coeffs = [c(-1.0, 0.0), c(3.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)];
        let roots = polynomial_roots(&coeffs, 1e-10).unwrap();
        for r in roots {
            assert!((r.finite().unwrap() - 1.0).norm() < 1e-4);
        }
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(matches!(
            polynomial_roots(&[c(0.0, 0.0); 3], 1e-10),
            Err(Error::InvalidArgument(_))
        ));
    }
}
