//! Dense tensor-product representation over `{g, 0, 1}^N`.
//!
//! This is the brute-force reference for the symmetric-subspace algebra in
//! [`crate::dicke`]: collective operators are applied literally as a sum over
//! atoms of single-atom raising maps. Limited to [`MAX_ORACLE_ATOMS`] atoms.

use num_complex::Complex64;

use crate::dicke::{CollectiveOp, SymmetricState};
use crate::error::{Error, Result};
use crate::numeric::factorial;

pub const MAX_ORACLE_ATOMS: usize = 8;

/// Single-atom level, encoded as a base-3 digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    G = 0,
    Zero = 1,
    One = 2,
}

impl Level {
    fn from_digit(d: usize) -> Level {
        match d {
            0 => Level::G,
            1 => Level::Zero,
            _ => Level::One,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Level::G => 'g',
            Level::Zero => '0',
            Level::One => '1',
        }
    }

    fn from_symbol(c: char) -> Option<Level> {
        match c {
            'g' => Some(Level::G),
            '0' => Some(Level::Zero),
            '1' => Some(Level::One),
            _ => None,
        }
    }
}

/// Dense amplitudes of length `3^N`. Atom 0 is the most significant digit,
/// so the label `"01"` means atom 0 in `|0>` and atom 1 in `|1>`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    n_atoms: usize,
    amplitudes: Vec<Complex64>,
}

impl FullState {
    pub fn zero(n_atoms: usize) -> Result<Self> {
        check_size(n_atoms)?;
        Ok(FullState {
            n_atoms,
            amplitudes: vec![Complex64::new(0.0, 0.0); 3usize.pow(n_atoms as u32)],
        })
    }

    pub fn ground(n_atoms: usize) -> Result<Self> {
        let mut s = Self::zero(n_atoms)?;
        s.amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn levels(&self, index: usize) -> Vec<Level> {
        let mut digits = vec![Level::G; self.n_atoms];
        let mut rest = index;
        for slot in digits.iter_mut().rev() {
            *slot = Level::from_digit(rest % 3);
            rest /= 3;
        }
        digits
    }

    fn index_of(levels: &[Level]) -> usize {
        levels.iter().fold(0, |acc, l| acc * 3 + *l as usize)
    }

    /// Amplitude at a label such as `"g01"`. Panics on a malformed label.
    pub fn amplitude(&self, label: &str) -> Complex64 {
        let levels: Vec<Level> = label
            .chars()
            .map(|c| Level::from_symbol(c).expect("label uses only g, 0, 1"))
            .collect();
        assert_eq!(levels.len(), self.n_atoms, "label length must equal atom count");
        self.amplitudes[Self::index_of(&levels)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &FullState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest componentwise difference.
    pub fn max_abs_diff(&self, other: &FullState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Relabel atoms: atom `i` of the result carries atom `perm[i]` of `self`.
    pub fn permute_atoms(&self, perm: &[usize]) -> FullState {
        assert_eq!(perm.len(), self.n_atoms);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let levels = self.levels(idx);
            let permuted: Vec<Level> = perm.iter().map(|&p| levels[p]).collect();
            out[Self::index_of(&permuted)] = *amp;
        }
        FullState {
            n_atoms: self.n_atoms,
            amplitudes: out,
        }
    }

    /// Nonzero entries as `(label, amplitude)`.
    pub fn support(&self, tol: f64) -> Vec<(String, Complex64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(i, a)| (self.levels(i).iter().map(|l| l.symbol()).collect(), *a))
            .collect()
    }
}

fn check_size(n_atoms: usize) -> Result<()> {
    if n_atoms > MAX_ORACLE_ATOMS {
        return Err(Error::SizeLimit {
            n_atoms,
            max: MAX_ORACLE_ATOMS,
        });
    }
    if n_atoms < 1 {
        return Err(Error::invalid("n_atoms must be at least 1"));
    }
    Ok(())
}

/// Expand each symmetric basis vector as the equal superposition of its
/// distinct permutations, weight `1/sqrt(multinomial)`.
pub fn oracle_expand(state: &SymmetricState) -> Result<FullState> {
    let n = state.n_atoms();
    let mut full = FullState::zero(n)?;
    for idx in 0..full.amplitudes.len() {
        let (mut n0, mut n1) = (0, 0);
        for l in full.levels(idx) {
            match l {
                Level::Zero => n0 += 1,
                Level::One => n1 += 1,
                Level::G => {}
            }
        }
        let amp = state.amplitude(n0, n1);
        if amp != Complex64::new(0.0, 0.0) {
            let ng = n - n0 - n1;
            let multinomial = factorial(n) / (factorial(ng) * factorial(n0) * factorial(n1));
            full.amplitudes[idx] = amp / multinomial.sqrt();
        }
    }
    Ok(full)
}

/// `Σ_i (alpha |0>_i<g| + beta |1>_i<g|)` applied literally.
pub fn oracle_apply(full: &FullState, op: &CollectiveOp) -> Result<FullState> {
    let n = full.n_atoms;
    let mut out = FullState::zero(n)?;
    for (idx, amp) in full.amplitudes.iter().enumerate() {
        if *amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut levels = full.levels(idx);
        for atom in 0..n {
            if levels[atom] != Level::G {
                continue;
            }
            levels[atom] = Level::Zero;
            out.amplitudes[FullState::index_of(&levels)] += op.alpha() * amp;
            levels[atom] = Level::One;
            out.amplitudes[FullState::index_of(&levels)] += op.beta() * amp;
            levels[atom] = Level::G;
        }
    }
    Ok(out)
}
