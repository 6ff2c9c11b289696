mod common;

use std::collections::BTreeSet;

use common::{check_golden_pipeline, check_pick_any_suite};
use matlang::gen::{generate_case, GenConfig};
use matlang::harness::{fuzz_case, repro_bundle, Pass};
use matlang::ir::{all_names, validate_dialect, Dialect};
use matlang::rewrite::{lower_muse_to_dec, lower_to};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn fuzzed_programs_survive_every_pass() {
    let mut equal = 0;
    for index in 0..400 {
        let (case, result) = fuzz_case(31, index, 6);
        assert!(!result.is_failure(), "{}", repro_bundle(&case, &result));
        equal += result.passes.iter().filter(|(_, o)| *o == matlang::harness::DiffOutcome::Equal).count();
    }
    assert!(equal > 600, "only {equal} comparisons");
}

#[test]
fn golden_programs_survive_every_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for pass in Pass::ALL {
        for (name, compared) in check_golden_pipeline(pass, &mut rng, 10).unwrap() {
            assert!(compared > 0, "{name} was never compared under {pass}");
        }
    }
}

#[test]
fn pick_any_properties_and_simulation() {
    assert_eq!(check_pick_any_suite(&mut ChaCha8Rng::seed_from_u64(43), 200).unwrap(), 200);
}

#[test]
fn outputs_validate_and_use_fresh_names() {
    let dialects = [Dialect::ForMl, Dialect::SiforMl, Dialect::DecMl, Dialect::MuseMl, Dialect::Core];
    for index in 0..250u64 {
        let case = generate_case(47, index, &GenConfig::new(dialects[index as usize % 5], 4));
        let (s, e) = (&case.schema, &case.expr);
        let taken: BTreeSet<String> = all_names(e).into_iter().chain(s.iter().map(|(n, _)| n.clone())).collect();
        for target in [Dialect::DecMl, Dialect::SiforMl] {
            let l = lower_to(e, s, target).unwrap_or_else(|err| panic!("case {index} to {target}: {err}"));
            assert!(validate_dialect(&l.expr, target, &l.schema).is_ok());
            let fresh: BTreeSet<&String> = l.report.fresh_names.iter().collect();
            assert_eq!(fresh.len(), l.report.fresh_names.len(), "case {index}: a name was handed out twice");
            assert!(fresh.iter().all(|n| !taken.contains(*n)), "case {index}: fresh name collides");
        }
    }
}

#[test]
fn lowering_a_program_already_in_the_target_is_the_identity() {
    let dialects = [Dialect::Ml, Dialect::ForMl, Dialect::SiforMl, Dialect::DecMl];
    for index in 0..200u64 {
        let d = dialects[index as usize % 4];
        let case = generate_case(53, index, &GenConfig::new(d, 4));
        let (s, e) = (&case.schema, &case.expr);
        if d != Dialect::DecMl {
            assert_eq!(&lower_to(e, s, Dialect::SiforMl).unwrap().expr, e);
        }
        if matches!(d, Dialect::Ml | Dialect::DecMl) {
            assert_eq!(&lower_to(e, s, Dialect::DecMl).unwrap().expr, e);
            assert_eq!(&lower_muse_to_dec(e, s).unwrap().expr, e);
        }
        // lowering twice is the same as lowering once
        let once = lower_to(e, s, Dialect::SiforMl).unwrap();
        let twice = lower_to(&once.expr, &once.schema, Dialect::SiforMl).unwrap();
        assert_eq!(twice.expr, once.expr);
        let once = lower_to(e, s, Dialect::DecMl).unwrap();
        let twice = lower_to(&once.expr, &once.schema, Dialect::DecMl).unwrap();
        assert_eq!(twice.expr, once.expr);
    }
}
