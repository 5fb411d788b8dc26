use herald_core::{
    apply_chain, apply_collective, dicke_norm_coeff, dicke_state, ghz_state, oracle_apply, oracle_expand, CollectiveOp,
    DickeIndex, Error, FullState,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn op_strategy() -> impl Strategy<Value = CollectiveOp> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero operator", |(a, b, c, d)| {
            a.abs() + b.abs() + c.abs() + d.abs() > 1e-3
        })
        .prop_map(|(a, b, c, d)| CollectiveOp::new(Complex64::new(a, b), Complex64::new(c, d)).unwrap())
}

fn chain_strategy() -> impl Strategy<Value = (usize, Vec<CollectiveOp>)> {
    (1usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(op_strategy(), 0..=n)))
}

fn oracle_chain(n: usize, ops: &[CollectiveOp]) -> FullState {
    ops.iter()
        .fold(FullState::ground(n).unwrap(), |s, op| oracle_apply(&s, op).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chains_match_oracle((n, ops) in chain_strategy()) {
        let sym = apply_chain(n, &ops).unwrap();
        let full = oracle_chain(n, &ops);
        prop_assert!(oracle_expand(&sym).unwrap().max_abs_diff(&full) <= 1e-10);
        prop_assert!((sym.norm_sqr() - full.norm_sqr()).abs() <= 1e-10 * full.norm_sqr().max(1.0));
    }

    #[test]
    fn collective_operators_commute(n in 2usize..=6, a in op_strategy(), b in op_strategy()) {
        let ab = apply_chain(n, [&a, &b]).unwrap();
        let ba = apply_chain(n, [&b, &a]).unwrap();
        let diff = oracle_expand(&ab).unwrap().max_abs_diff(&oracle_expand(&ba).unwrap());
        prop_assert!(diff <= 1e-12);
    }

    #[test]
    fn expanded_states_are_permutation_symmetric(
        (n, ops) in chain_strategy(),
        perm_seed in any::<u64>(),
    ) {
        let full = oracle_expand(&apply_chain(n, &ops).unwrap()).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        // Fisher-Yates from a fixed LCG so the permutation is part of the case.
        let mut x = perm_seed | 1;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        prop_assert!(full.permute_atoms(&perm).max_abs_diff(&full) <= 1e-14);
    }
}

#[test]
fn norm_coefficient_matches_oracle_norm() {
    for n in 1..=8 {
        for n_h in 0..=n {
            let mut ops = vec![CollectiveOp::s0(); n_h];
            ops.extend(vec![CollectiveOp::s1(); n - n_h]);
            let raw = oracle_chain(n, &ops);
            let c = dicke_norm_coeff(DickeIndex::new(n, n_h).unwrap());
            assert!((raw.norm_sqr() * c * c - 1.0).abs() < 1e-12, "N = {n}, n_h = {n_h}");
            let expected = oracle_expand(&dicke_state(DickeIndex::new(n, n_h).unwrap())).unwrap();
            let scaled: Vec<Complex64> = raw.amplitudes().iter().map(|a| a * c).collect();
            let diff = scaled
                .iter()
                .zip(expected.amplitudes())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-12, "N = {n}, n_h = {n_h}");
        }
    }
}

#[test]
fn dicke_states_have_binomial_support() {
    for n in 1..=6 {
        for n_h in 0..=n {
            let full = oracle_expand(&dicke_state(DickeIndex::new(n, n_h).unwrap())).unwrap();
            let support = full.support(1e-14);
            let k = herald_core::numeric::binomial(n, n_h);
            assert_eq!(support.len() as f64, k);
            for (label, amp) in support {
                assert_eq!(label.chars().filter(|&c| c == '0').count(), n_h);
                assert!((amp.norm() - 1.0 / k.sqrt()).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn ghz_from_two_operators() {
    // (s0† - i s1†)(s0† + i s1†)|gg> = s0†² + s1†²
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let ops = [CollectiveOp::new(one, -i).unwrap(), CollectiveOp::new(one, i).unwrap()];
    let full = oracle_chain(2, &ops);
    assert!((full.amplitude("00") - 2.0).norm() < 1e-15);
    assert!((full.amplitude("11") - 2.0).norm() < 1e-15);
    assert!(full.amplitude("01").norm() < 1e-15);
    let ghz = oracle_expand(&ghz_state(2).unwrap()).unwrap();
    assert!((full.inner(&ghz).norm_sqr() / full.norm_sqr() - 1.0).abs() < 1e-14);
}

#[test]
fn raising_a_full_register_fails() {
    let full = apply_chain(2, &[CollectiveOp::s0(), CollectiveOp::s1()]).unwrap();
    assert!(matches!(
        apply_collective(&full, &CollectiveOp::s0()),
        Err(Error::RaisingOnFull)
    ));
    assert!(matches!(FullState::ground(9), Err(Error::SizeLimit { .. })));
}
