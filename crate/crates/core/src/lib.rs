//! Simulation and synthesis toolkit for heralded multi-atom entanglement by
//! single-photon detection of cavity decay.
//!
//! - [`dicke`]: symmetric-subspace state algebra, Dicke and GHZ states.
//! - [`oracle`]: dense tensor-product reference for the symmetric algebra.
//! - [`pulse`]: adiabatic cavity output mode and its validation against
//!   direct integration of the single-atom dynamics.
//! - [`two_cavity`]: two-atom Bell-state protocol with coincidence detection.
//! - [`multi_atom`]: M-pulse Dicke-state protocol, analytic probabilities
//!   and Monte Carlo post-selection.
//! - [`synthesis`]: rotator settings for an arbitrary Dicke superposition
//!   from the roots of the associated polynomial.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dicke;
pub mod error;
pub mod multi_atom;
pub mod numeric;
pub mod oracle;
pub mod poly;
pub mod pulse;
pub mod rng;
pub mod stats;
pub mod synthesis;
pub mod two_cavity;

pub use dicke::{
    apply_chain, apply_collective, dicke_norm_coeff, dicke_state, fidelity, ghz_state, ground_state, normalize,
    CollectiveOp, DickeIndex, StateRecord, SymmetricState,
};
pub use error::{Error, Result};
pub use multi_atom::{ClickRecord, Detector, ProtocolConfig, RunOutcome};
pub use numeric::Amplitude;
pub use oracle::{oracle_apply, oracle_expand, FullState};
pub use pulse::{CavityParams, EmissionResult, PulseProfile, TemporalMode};
pub use synthesis::{ProjectiveRoot, RotatorSetting, SynthesisPlan, TargetSuperposition};
pub use two_cavity::{AtomPhotonState, DetectionConfig, DetectionScheme, TwoCavityOutcome};
