mod common;

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use safety_synth::aiger::{parse_ascii, solution_size, ParseMode};
use safety_synth::harness::gen::{generate, Family};
use safety_synth::oracle::{explicit_reach, Simulator};
use safety_synth::strategy::{synthesize, SynthesisResult};
use safety_synth::verify::{model_check, verify_pipeline, VerdictStatus};

const BUDGET: Duration = Duration::from_secs(60);

#[test]
fn every_realizable_instance_self_verifies() {
    let mut checked = 0;
    for (name, spec) in common::oracle_corpus(500) {
        if let Some((sol, witness)) =
            common::self_verify(&spec).unwrap_or_else(|e| panic!("{name}: {e}"))
        {
            let v = verify_pipeline(&spec, &sol, Some(&witness), BUDGET);
            assert_eq!(v.status, VerdictStatus::VerifiedInvariant, "{name}");
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn mutants_are_caught_soundly() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut total, mut unsafe_count) = (0, 0);
    for (name, spec) in common::oracle_corpus(300) {
        let Some((sol, witness)) = common::self_verify(&spec).unwrap() else {
            continue;
        };
        for mutant in common::mutants(&spec, &sol, &mut rng, 3) {
            total += 1;
            let truth = explicit_reach(&mutant).unwrap();
            let v = verify_pipeline(&spec, &mutant, Some(&witness), BUDGET);
            match truth {
                Some(_) => {
                    unsafe_count += 1;
                    assert_eq!(v.status, VerdictStatus::SemanticFail, "{name}");
                    let trace = v.counterexample.expect("failing verdict carries a trace");
                    assert!(
                        Simulator::new(&mutant).unwrap().replay(&trace.frames()),
                        "{name}"
                    );
                }
                None => assert!(v.status.is_verified(), "{name}: {}", v.status),
            }
        }
    }
    assert!(total >= 50, "{total}");
    assert!(unsafe_count >= 10, "{unsafe_count}");
}

#[test]
fn counterexamples_are_shortest() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for (_, spec) in common::oracle_corpus(200) {
        let Some((sol, _)) = common::self_verify(&spec).unwrap() else {
            continue;
        };
        for mutant in common::mutants(&spec, &sol, &mut rng, 2) {
            let v = model_check(&mutant, BUDGET).unwrap();
            if let (Some(t), Some(e)) = (v.counterexample, explicit_reach(&mutant).unwrap()) {
                assert_eq!(t.len(), e.len());
            }
        }
    }
}

#[test]
fn renamed_input_is_a_syntactic_failure() {
    let spec = generate(Family::Add, 2, 5).unwrap();
    let SynthesisResult::Realizable {
        mut solution,
        witness,
        ..
    } = synthesize(&spec).unwrap()
    else {
        panic!("add 2 seed 5 is realizable");
    };
    solution.inputs[0].name = Some("renamed".into());
    let v = verify_pipeline(&spec, &solution, Some(&witness.to_text()), BUDGET);
    assert_eq!(v.status, VerdictStatus::SyntacticFail);
}

#[test]
fn bad_witness_falls_back_to_model_checking() {
    let spec = generate(Family::Count, 3, 0).unwrap();
    let SynthesisResult::Realizable {
        solution, witness, ..
    } = synthesize(&spec).unwrap()
    else {
        panic!("count is realizable");
    };
    let good = witness.to_text();
    let wrong_latches = good.replacen("c0", "zz", 1);
    for w in [Some("garbage"), Some(wrong_latches.as_str()), None] {
        let v = verify_pipeline(&spec, &solution, w, BUDGET);
        assert_eq!(v.status, VerdictStatus::VerifiedModelCheck);
        assert_eq!(v.detail.is_some(), w.is_some());
    }
    // the whole state space is not inductive for a counter that may overflow
    let everything = "WINNING_REGION\nlatches: c0 c1 c2\n---\n";
    let v = verify_pipeline(&spec, &solution, Some(everything), BUDGET);
    assert_eq!(v.status, VerdictStatus::VerifiedModelCheck);
}

#[test]
fn zero_budget_times_out_unless_trivial() {
    let spec = generate(Family::Count, 4, 0).unwrap();
    let SynthesisResult::Realizable { solution, .. } = synthesize(&spec).unwrap() else {
        panic!("count is realizable");
    };
    assert_eq!(
        model_check(&solution, Duration::ZERO).unwrap().status,
        VerdictStatus::Timeout
    );
    let trivial = parse_ascii("aag 1 1 0 1 0\n2\n0\n", ParseMode::Circuit).unwrap();
    assert!(model_check(&trivial, Duration::ZERO)
        .unwrap()
        .status
        .is_verified());
}

#[test]
fn generated_families_solve_and_verify() {
    for f in Family::ALL {
        for n in 1..=6 {
            let spec = generate(f, n, 3).unwrap();
            match synthesize(&spec).unwrap() {
                SynthesisResult::Realizable {
                    solution,
                    witness,
                    size,
                    ..
                } => {
                    assert_eq!(solution_size(&spec, &solution), size);
                    let v = verify_pipeline(&spec, &solution, Some(&witness.to_text()), BUDGET);
                    assert!(v.status.is_verified(), "{f} {n}");
                }
                SynthesisResult::Unrealizable { .. } => assert_ne!(f, Family::Count),
            }
        }
    }
}
