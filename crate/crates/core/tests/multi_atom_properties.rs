use std::collections::HashSet;

use herald_core::multi_atom::{
    analytic_p_si, analytic_p_succ, analytic_summary, click_operator, clicks_from_photons, conditional_state,
    estimate_probabilities, sample_photons, simulate_run, write_histogram_csv,
};
use herald_core::rng::stream_rng;
use herald_core::{apply_chain, dicke_state, fidelity, normalize, ClickRecord, DickeIndex, ProtocolConfig};
use proptest::prelude::*;

fn config_strategy() -> impl Strategy<Value = ProtocolConfig> {
    (1usize..=8, 1usize..=12, 0.0..=1.0f64, any::<u64>()).prop_filter_map("2M >= N", |(n, m, eta, seed)| {
        ProtocolConfig::new(n, m, eta).ok().map(|c| c.with_seed(seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_count_lemma(cfg in config_strategy()) {
        let mut rng = stream_rng(cfg.seed, 0);
        for _ in 0..200 {
            let photons = sample_photons(&cfg, &mut rng);
            let clicks = clicks_from_photons(&photons);
            let bins: HashSet<_> = photons.iter().map(|p| (p.pulse, p.detector)).collect();
            let all_survive = photons.iter().all(|p| p.survived);
            prop_assert_eq!(clicks.total() == cfg.n_atoms, all_survive && bins.len() == cfg.n_atoms);
        }
    }

    #[test]
    fn heralded_states_are_dicke_states(cfg in config_strategy()) {
        let mut rng = stream_rng(cfg.seed, 1);
        for _ in 0..200 {
            let run = simulate_run(&cfg, &mut rng).unwrap();
            prop_assert_eq!(run.post_selected, run.conditional_state.is_some());
            if let Some(state) = run.conditional_state {
                let target = dicke_state(DickeIndex::new(cfg.n_atoms, run.clicks.n_h).unwrap());
                prop_assert!((fidelity(&state, &target).unwrap() - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn click_order_does_not_matter(cfg in config_strategy(), rotation in 0usize..8) {
        let mut rng = stream_rng(cfg.seed, 2);
        let run = (0..2000)
            .map(|_| simulate_run(&cfg, &mut rng).unwrap())
            .find(|r| r.post_selected);
        if let Some(run) = run {
            let mut ops: Vec<_> = run.clicks.events.iter().map(|e| click_operator(&cfg, e).unwrap()).collect();
            let forward = normalize(&apply_chain(cfg.n_atoms, &ops).unwrap()).unwrap();
            ops.reverse();
            let len = ops.len();
            ops.rotate_left(rotation % len);
            let shuffled = normalize(&apply_chain(cfg.n_atoms, &ops).unwrap()).unwrap();
            prop_assert!((fidelity(&forward, &shuffled).unwrap() - 1.0).abs() <= 1e-10);
            let mut events = run.clicks.events.clone();
            events.reverse();
            let again = conditional_state(&cfg, &ClickRecord::from_events(events)).unwrap();
            prop_assert!((fidelity(&forward, &again).unwrap() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn p_si_nondecreasing_in_pulses(n in 1usize..=12, m in 1usize..=60) {
        prop_assume!(2 * m >= n);
        prop_assert!(analytic_p_si(n, m + 1).unwrap() >= analytic_p_si(n, m).unwrap());
    }

    #[test]
    fn p_nh_sums_to_p_succ(cfg in config_strategy()) {
        let s = analytic_summary(cfg.n_atoms, cfg.n_pulses, cfg.eta).unwrap();
        let total: f64 = s.p_nh.iter().sum();
        prop_assert!((total - s.p_succ).abs() <= 1e-12);
    }
}

#[test]
fn monte_carlo_matches_analytic_success() {
    for (i, (n, m, eta)) in [
        (1, 1, 1.0),
        (2, 1, 1.0),
        (3, 4, 0.8),
        (5, 10, 0.6),
        (8, 30, 0.9),
        (10, 50, 0.7),
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = ProtocolConfig::new(n, m, eta).unwrap().with_seed(100 + i as u64);
        let rec = estimate_probabilities(&cfg, 200_000, 8).unwrap();
        let expected = analytic_p_succ(n, m, eta).unwrap();
        assert!(
            rec.p_succ.z_score(expected) < 4.0,
            "({n}, {m}, {eta}): {:?} vs {expected}",
            rec.p_succ
        );
        assert_eq!(rec.post_selected, rec.nh_counts.iter().sum::<u64>());
    }
}

#[test]
fn single_atom_with_unit_efficiency_always_heralds() {
    let cfg = ProtocolConfig::new(1, 7, 1.0).unwrap();
    let rec = estimate_probabilities(&cfg, 10_000, 4).unwrap();
    assert_eq!(rec.p_succ.value, 1.0);
    assert_eq!(rec.p_en.value, 0.0);
}

#[test]
fn estimates_depend_only_on_seed_and_partitions() {
    let cfg = ProtocolConfig::new(6, 10, 0.8).unwrap().with_seed(42);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_probabilities(&cfg, 100_000, 16).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(7));
    let other = estimate_probabilities(&cfg.clone().with_seed(43), 100_000, 16).unwrap();
    assert_ne!(one.nh_counts, other.nh_counts);
}

#[test]
fn histogram_csv_layout() {
    let mut buf = Vec::new();
    write_histogram_csv(&[3, 0, 5], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "n_h,count\n0,3\n1,0\n2,5\n");
}
