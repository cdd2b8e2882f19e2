//! Cross-module invariants over random inputs.

use num_traits::One;
use proptest::prelude::*;
use smcensus::bounds::{integral_check, whitworth};
use smcensus::distributions::{nl_expectation, nl_pmf, NxVariant};
use smcensus::posets::{count_downsets_capped, embed_in_tangled_grid, MAX_DOWNSET_CAP};
use smcensus::rotations::{enumerate_stable_via_rotations, explore_lattice, DEFAULT_STATE_CAP};
use smcensus::{
    build_rotation_poset, check_structure, count_downsets, enumerate_stable_bruteforce, gale_shapley, random_instance,
    Side,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotations_enumerate_exactly_the_stable_matchings(n in 1usize..=6, seed in any::<u64>()) {
        let p = random_instance(n, seed).unwrap();
        let mut brute: Vec<Vec<usize>> = enumerate_stable_bruteforce(&p).unwrap().iter().map(|m| m.assignment().to_vec()).collect();
        let mut via: Vec<Vec<usize>> = enumerate_stable_via_rotations(&p).unwrap().iter().map(|m| m.assignment().to_vec()).collect();
        brute.sort();
        via.sort();
        prop_assert_eq!(&brute, &via);
        let poset = build_rotation_poset(&p).unwrap();
        prop_assert_eq!(count_downsets(&poset.to_finite_poset().unwrap()).unwrap(), brute.len() as u128);
        prop_assert!(check_structure(&poset).all_pass());
    }

    #[test]
    fn lattice_runs_between_the_two_optima(n in 1usize..=7, seed in any::<u64>()) {
        let p = random_instance(n, seed).unwrap();
        let lattice = explore_lattice(&p, DEFAULT_STATE_CAP).unwrap();
        let job_opt = gale_shapley(&p, Side::Jobs);
        let app_opt = gale_shapley(&p, Side::Applicants);
        prop_assert_eq!(lattice.states[0].0.assignment(), job_opt.assignment());
        let full = lattice.states.iter().max_by_key(|s| s.1.len()).unwrap();
        prop_assert_eq!(full.0.assignment(), app_opt.assignment());
    }

    #[test]
    fn embedding_never_loses_downsets(n in 1usize..=6, seed in any::<u64>()) {
        let p = random_instance(n, seed).unwrap();
        let poset = build_rotation_poset(&p).unwrap();
        let grid = embed_in_tangled_grid(&poset).unwrap();
        prop_assert!(grid.violations().is_empty());
        let inner = count_downsets(&poset.to_finite_poset().unwrap()).unwrap();
        prop_assert!(count_downsets_capped(grid.poset(), MAX_DOWNSET_CAP).unwrap() >= inner);
    }

    #[test]
    fn nl_law_is_normalized_and_bounded(n in 2u64..=40, l_frac in 0.0f64..1.0) {
        let l = 2 + ((n - 2) as f64 * l_frac) as u64;
        prop_assert!(nl_pmf(n, l).unwrap().total().is_one());
        prop_assert!(nl_expectation(n, l).unwrap().bound_holds());
    }

    #[test]
    fn whitworth_holds_beyond_the_sweep(n in 41u64..=70, m_frac in 0.0f64..1.0, a_frac in 0.0f64..1.0) {
        let m = (n as f64 * m_frac) as u64;
        let a = ((n - m) as f64 * a_frac) as u64;
        prop_assert!(whitworth(m, a, n).unwrap().equal);
    }

    #[test]
    fn integrals_match_coefficients(k in 2u64..=80) {
        prop_assert!(integral_check(k, NxVariant::Line).unwrap().equal);
        prop_assert!(integral_check(k, NxVariant::Extended).unwrap().equal);
    }
}
