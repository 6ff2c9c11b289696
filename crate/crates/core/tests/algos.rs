mod common;

use common::{check_reach_suite, check_sssp_suite, check_wcc_suite};
use matlang::algos::{golden, run_vec_max, run_vec_sum, GraphSpec, GOLDEN};
use matlang::ir::detect_dialect;
use matlang::textio::parse_program;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn wcc_matches_union_find() {
    check_wcc_suite(&mut ChaCha8Rng::seed_from_u64(100), 200, 32).unwrap();
}

#[test]
fn reach_matches_bfs() {
    check_reach_suite(&mut ChaCha8Rng::seed_from_u64(101), 200, 32).unwrap();
}

#[test]
fn sssp_matches_bellman_ford() {
    check_sssp_suite(&mut ChaCha8Rng::seed_from_u64(102), 200, 16).unwrap();
}

#[test]
fn golden_programs_parse_in_their_declared_dialect() {
    for g in GOLDEN {
        let (s, e, d) = parse_program(g.source).unwrap();
        assert_eq!(Some(d), g.declared_dialect(), "{}", g.name);
        assert_eq!(detect_dialect(&e, &s).unwrap(), d);
    }
    assert!(golden("wcc").is_some() && golden("nope").is_none());
}

#[test]
fn max_of_a_vector_with_zero_is_minus_infinity_contribution() {
    assert_eq!(run_vec_max(&[0]).unwrap(), None);
    assert_eq!(run_vec_max(&[0, 4]).unwrap(), Some(4));
    assert_eq!(run_vec_max(&[1, 2, 3]).unwrap(), Some(3));
}

#[test]
fn isolated_vertices_are_their_own_component() {
    let g = GraphSpec::new(4, false).edge(2, 4);
    let labels = matlang::algos::run_wcc(&g).unwrap();
    assert_eq!(labels.into_iter().collect::<Vec<_>>(), [(1, 1), (2, 2), (3, 3), (4, 2)]);
}

proptest! {
    #[test]
    fn vec_max_on_positive_vectors(v in prop::collection::vec(1i64..1_000_000, 1..40)) {
        prop_assert_eq!(run_vec_max(&v).unwrap(), v.iter().copied().max());
    }

    #[test]
    fn vec_sum_matches_iterator_sum(v in prop::collection::vec(-1_000_000i64..1_000_000, 1..40)) {
        prop_assert_eq!(run_vec_sum(&v).unwrap(), v.iter().sum::<i64>());
    }
}
