//! Fixtures shared by the criterion benchmarks in `benches/`.

use herald_core::rng::stream_rng;
use herald_core::{CavityParams, CollectiveOp, ProtocolConfig, PulseProfile, TargetSuperposition};
use num_complex::Complex64;
use rand::Rng;

/// `N = 10`, `M = 50`, `η = 0.7`.
pub fn headline_point() -> ProtocolConfig {
    ProtocolConfig::new(10, 50, 0.7).expect("valid config").with_seed(1)
}

pub fn random_ops(n: usize, seed: u64) -> Vec<CollectiveOp> {
    let mut rng = stream_rng(seed, 0);
    (0..n)
        .map(|_| {
            let mut z = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            CollectiveOp::new(z(), z()).expect("nonzero operator")
        })
        .collect()
}

pub fn random_target(n: usize, seed: u64) -> TargetSuperposition {
    TargetSuperposition::random(n, &mut stream_rng(seed, n as u64)).expect("nonzero target")
}

/// Strong-coupling cavity with a sin² drive on `points` samples.
pub fn strong_coupling_pulse(points: usize) -> (PulseProfile, CavityParams) {
    let params = CavityParams::real(2.0, 2.0, 1.0).expect("valid cavity");
    let profile = PulseProfile::sin_squared(2.0, 80.0, points).expect("valid profile");
    (profile, params)
}
