//! Symmetric-subspace algebra for `N` three-level atoms (levels `g`, `0`, `1`).
//!
//! A symmetric basis vector is labelled by the occupation pair `(n0, n1)`;
//! the ground-level occupation is implicit, `ng = N - n0 - n1`. The basis is
//! unit-normalized, so the collective raising operators act like bosonic
//! transfers out of the `g` mode:
//!
//! ```text
//! s0† |ng, n0, n1> = sqrt((n0 + 1) ng) |ng - 1, n0 + 1, n1>
//! s1† |ng, n0, n1> = sqrt((n1 + 1) ng) |ng - 1, n0, n1 + 1>
//! ```
//!
//! Dicke states live on the sector `n0 + n1 = N`. Everything here is checked
//! against the dense tensor-product representation in [`crate::oracle`].

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{is_finite, ln_factorial};

/// Occupation pair `(n0, n1)`.
pub type Occupation = (usize, usize);

/// Tolerance for the "normalized" flag.
pub const NORM_TOL: f64 = 1e-12;

/// Sparse amplitude map over the symmetric basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricState {
    n_atoms: usize,
    amplitudes: BTreeMap<Occupation, Complex64>,
    normalized: bool,
}

impl SymmetricState {
    /// Empty (zero) state.
    pub fn zero(n_atoms: usize) -> Result<Self> {
        if n_atoms < 1 {
            return Err(Error::invalid("n_atoms must be at least 1"));
        }
        Ok(SymmetricState {
            n_atoms,
            amplitudes: BTreeMap::new(),
            normalized: false,
        })
    }

    /// Build from explicit entries. Repeated keys are summed.
    pub fn from_entries(n_atoms: usize, entries: impl IntoIterator<Item = (Occupation, Complex64)>) -> Result<Self> {
        let mut state = Self::zero(n_atoms)?;
        for ((n0, n1), amp) in entries {
            if n0 + n1 > n_atoms {
                return Err(Error::invalid(format!(
                    "occupation ({n0}, {n1}) exceeds {n_atoms} atoms"
                )));
            }
            if !is_finite(amp) {
                return Err(Error::invalid("amplitude is not finite"));
            }
            *state.amplitudes.entry((n0, n1)).or_default() += amp;
        }
        state.normalized = (state.norm_sqr() - 1.0).abs() <= NORM_TOL;
        Ok(state)
    }

    /// State `Σ b(n_h) |N, n_h>` from Dicke coefficients indexed by `n_h`.
    pub fn from_dicke_coefficients(n_atoms: usize, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != n_atoms + 1 {
            return Err(Error::invalid(format!(
                "expected {} Dicke coefficients, got {}",
                n_atoms + 1,
                coeffs.len()
            )));
        }
        Self::from_entries(
            n_atoms,
            coeffs
                .iter()
                .enumerate()
                .filter(|(_, b)| **b != Complex64::new(0.0, 0.0))
                .map(|(n_h, b)| ((n_h, n_atoms - n_h), *b)),
        )
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn amplitude(&self, n0: usize, n1: usize) -> Complex64 {
        self.amplitudes.get(&(n0, n1)).copied().unwrap_or_default()
    }

    /// Stored entries in key order.
    pub fn entries(&self) -> impl Iterator<Item = (Occupation, Complex64)> + '_ {
        self.amplitudes.iter().map(|(k, v)| (*k, *v))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SymmetricState) -> Complex64 {
        self.amplitudes
            .iter()
            .filter_map(|(k, a)| other.amplitudes.get(k).map(|b| a.conj() * b))
            .sum()
    }

    /// True when every nonzero amplitude has `n0 + n1 = N`.
    pub fn is_dicke_sector(&self) -> bool {
        self.amplitudes
            .iter()
            .all(|(&(n0, n1), a)| n0 + n1 == self.n_atoms || *a == Complex64::new(0.0, 0.0))
    }

    /// Dicke coefficients `b(n_h)`, `n_h = 0..=N`, read off the Dicke sector.
    pub fn dicke_coefficients(&self) -> Vec<Complex64> {
        (0..=self.n_atoms)
            .map(|n_h| self.amplitude(n_h, self.n_atoms - n_h))
            .collect()
    }

    fn has_ground_population(&self) -> bool {
        self.amplitudes
            .iter()
            .any(|(&(n0, n1), a)| n0 + n1 < self.n_atoms && *a != Complex64::new(0.0, 0.0))
    }
}

/// `(N, n_h)` with `0 <= n_h <= N`; `n_v = N - n_h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DickeIndex {
    n_atoms: usize,
    n_h: usize,
}

impl DickeIndex {
    pub fn new(n_atoms: usize, n_h: usize) -> Result<Self> {
        if n_atoms < 1 {
            return Err(Error::invalid("n_atoms must be at least 1"));
        }
        if n_h > n_atoms {
            return Err(Error::invalid(format!("n_h = {n_h} exceeds n_atoms = {n_atoms}")));
        }
        Ok(DickeIndex { n_atoms, n_h })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_v(&self) -> usize {
        self.n_atoms - self.n_h
    }
}

/// `alpha s0† + beta s1†`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollectiveOp {
    alpha: Complex64,
    beta: Complex64,
}

impl CollectiveOp {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        if !is_finite(alpha) || !is_finite(beta) {
            return Err(Error::invalid("collective operator coefficients must be finite"));
        }
        if alpha == Complex64::new(0.0, 0.0) && beta == Complex64::new(0.0, 0.0) {
            return Err(Error::invalid("collective operator must not be zero"));
        }
        Ok(CollectiveOp { alpha, beta })
    }

    pub fn s0() -> Self {
        CollectiveOp {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn s1() -> Self {
        CollectiveOp {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }
}

/// `c(n_h)` such that `c (s0†)^n_h (s1†)^(N-n_h) |G>` has unit norm:
/// `1 / sqrt(n_h! (N - n_h)! N!)`.
pub fn dicke_norm_coeff(idx: DickeIndex) -> f64 {
    let ln = ln_factorial(idx.n_h()) + ln_factorial(idx.n_v()) + ln_factorial(idx.n_atoms());
    (-0.5 * ln).exp()
}

/// `|G>`: every atom in `g`.
pub fn ground_state(n_atoms: usize) -> Result<SymmetricState> {
    SymmetricState::from_entries(n_atoms, [((0, 0), Complex64::new(1.0, 0.0))])
}

/// Unnormalized image of `state` under `alpha s0† + beta s1†`.
pub fn apply_collective(state: &SymmetricState, op: &CollectiveOp) -> Result<SymmetricState> {
    if !state.has_ground_population() {
        return Err(Error::RaisingOnFull);
    }
    let n = state.n_atoms;
    let zero = Complex64::new(0.0, 0.0);
    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (&(n0, n1), &amp) in &state.amplitudes {
        let ng = n - n0 - n1;
        if ng == 0 || amp == zero {
            continue;
        }
        if op.alpha != zero {
            let m = (((n0 + 1) * ng) as f64).sqrt();
            *out.entry((n0 + 1, n1)).or_default() += op.alpha * amp * m;
        }
        if op.beta != zero {
            let m = (((n1 + 1) * ng) as f64).sqrt();
            *out.entry((n0, n1 + 1)).or_default() += op.beta * amp * m;
        }
    }
    let mut result = SymmetricState {
        n_atoms: n,
        amplitudes: out,
        normalized: false,
    };
    result.normalized = (result.norm_sqr() - 1.0).abs() <= NORM_TOL;
    Ok(result)
}

/// Apply a sequence of collective operators to `|G>`.
pub fn apply_chain<'a>(n_atoms: usize, ops: impl IntoIterator<Item = &'a CollectiveOp>) -> Result<SymmetricState> {
    let mut state = ground_state(n_atoms)?;
    for op in ops {
        state = apply_collective(&state, op)?;
    }
    Ok(state)
}

pub fn normalize(state: &SymmetricState) -> Result<SymmetricState> {
    let norm = state.norm_sqr().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateState);
    }
    Ok(SymmetricState {
        n_atoms: state.n_atoms,
        amplitudes: state.amplitudes.iter().map(|(k, a)| (*k, a / norm)).collect(),
        normalized: true,
    })
}

/// `|N, n_h>`: unit amplitude at `(n_h, N - n_h)`.
pub fn dicke_state(idx: DickeIndex) -> SymmetricState {
    SymmetricState {
        n_atoms: idx.n_atoms(),
        amplitudes: BTreeMap::from([((idx.n_h(), idx.n_v()), Complex64::new(1.0, 0.0))]),
        normalized: true,
    }
}

/// `(|N,0> + |0,N>)/sqrt(2)`.
pub fn ghz_state(n_atoms: usize) -> Result<SymmetricState> {
    if n_atoms < 2 {
        return Err(Error::invalid("GHZ state needs at least 2 atoms"));
    }
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    SymmetricState::from_entries(n_atoms, [((n_atoms, 0), a), ((0, n_atoms), a)])
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &SymmetricState, b: &SymmetricState) -> Result<f64> {
    if a.n_atoms != b.n_atoms {
        return Err(Error::invalid(format!(
            "atom numbers differ: {} vs {}",
            a.n_atoms, b.n_atoms
        )));
    }
    Ok(a.inner(b).norm_sqr())
}

/// JSON wire form `{n_atoms, entries: [{n0, n1, re, im}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub n_atoms: usize,
    pub entries: Vec<StateEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub n0: usize,
    pub n1: usize,
    pub re: f64,
    pub im: f64,
}

impl From<&SymmetricState> for StateRecord {
    fn from(s: &SymmetricState) -> Self {
        StateRecord {
            n_atoms: s.n_atoms,
            entries: s
                .entries()
                .map(|((n0, n1), a)| StateEntry {
                    n0,
                    n1,
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }
}

impl TryFrom<StateRecord> for SymmetricState {
    type Error = Error;

    fn try_from(r: StateRecord) -> Result<Self> {
        SymmetricState::from_entries(
            r.n_atoms,
            r.entries
                .into_iter()
                .map(|e| ((e.n0, e.n1), Complex64::new(e.re, e.im))),
        )
    }
}
