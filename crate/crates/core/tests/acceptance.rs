//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{from_table, table_of, Expr};
use safety_synth::aiger::{parse_ascii, parse_binary, serialize_ascii, ParseMode};
use safety_synth::bdd::BddManager;
use safety_synth::harness::gen::{generate, random_corpus, Family, RandomSpecParams};
use safety_synth::harness::{run_limited, Limits, TimeMode};
use safety_synth::oracle::{explicit_reach, Simulator};
use safety_synth::score::{quality, Judgement, POINTS_WRONG};
use safety_synth::strategy::{synthesize, SynthesisResult};
use safety_synth::verify::{verify_pipeline, VerdictStatus};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn quality_anchors() -> Outcome {
    let cases = [
        (7u64, 7u64, 2.0),
        (99, 9, 1.0),
        (9, 99, 3.0),
        (999, 9, 0.0),
        (10_000, 4, 0.0),
    ];
    for (s, r, q) in cases {
        let got = quality(s, r);
        ensure((got - q).abs() < 1e-9, || {
            format!("quality({s}, {r}) = {got}, want {q}")
        })?;
    }
    ensure(
        Judgement::Wrong.points() == -4 && POINTS_WRONG == -4,
        || "wrong answer is not -4".into(),
    )?;
    Ok(format!(
        "{} anchors within 1e-9, wrong answer -4",
        cases.len()
    ))
}

fn oracle_equivalence() -> Outcome {
    let corpus = common::oracle_corpus(500);
    let mut realizable = 0;
    for (name, spec) in &corpus {
        realizable +=
            common::compare_with_oracle(spec).map_err(|e| format!("{name}: {e}"))? as usize;
    }
    Ok(format!(
        "{} instances, {realizable} realizable, 0 mismatches",
        corpus.len()
    ))
}

fn self_verification() -> Outcome {
    let mut verified = 0;
    for (name, spec) in common::oracle_corpus(500) {
        if common::self_verify(&spec)
            .map_err(|e| format!("{name}: {e}"))?
            .is_some()
        {
            verified += 1;
        }
    }
    Ok(format!(
        "{verified} realizable instances verified four ways"
    ))
}

fn bdd_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut pairs = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=6);
        let m = BddManager::new();
        let vars = m.new_vars(n as usize);
        let a = Expr::random(&mut rng, n, 5);
        let b = Expr::random(&mut rng, n, 5);
        let (ta, tb) = (a.table(n), b.table(n));
        let (fa, fb) = (a.build(&m, &vars), b.build(&m, &vars));
        ensure((ta == tb) == (fa == fb), || {
            format!("canonicity: {a:?} vs {b:?}")
        })?;
        ensure(from_table(&m, &vars, ta) == fa, || {
            format!("minterm form differs: {a:?}")
        })?;
        let set = m.var_set(&vars[..(n as usize).div_ceil(2)]);
        ensure(
            m.forall(&fa, &set) == m.not(&m.exists(&m.not(&fa), &set)),
            || format!("duality: {a:?}"),
        )?;
        let v = vars[rng.random_range(0..n as usize)];
        let composed = m.vector_compose(&fa, &[(v, fb.clone())]);
        let i = v.index() as u32;
        let expected = (0..1u64 << n).fold(0u64, |acc, x| {
            let y = (x & !(1 << i)) | (b.eval(x) as u64) << i;
            acc | (a.eval(y) as u64) << x
        });
        ensure(table_of(&m, &composed, &vars) == expected, || {
            format!("compose: {a:?}")
        })?;
        pairs += 1;
    }
    let m = BddManager::new();
    let vars = m.new_vars(6);
    let exprs: Vec<Expr> = (0..100).map(|_| Expr::random(&mut rng, 6, 6)).collect();
    let fs: Vec<_> = exprs.iter().map(|e| e.build(&m, &vars)).collect();
    let report = m.sift_reorder();
    m.check_invariants()?;
    for (e, f) in exprs.iter().zip(&fs) {
        ensure(table_of(&m, f, &vars) == e.table(6), || {
            "reordering changed a function".into()
        })?;
    }
    Ok(format!(
        "{pairs} pairs, 100 functions kept through sifting ({} -> {} nodes)",
        report.nodes_before, report.nodes_after
    ))
}

fn codec() -> Outcome {
    let p = RandomSpecParams::default();
    for (i, c) in random_corpus(55, 500, &p).iter().enumerate() {
        let text = serialize_ascii(c);
        let back =
            parse_ascii(&text, ParseMode::Specification).map_err(|e| format!("#{i}: {e}"))?;
        ensure(back == *c, || format!("#{i}: round trip differs"))?;
        let flags: Vec<bool> = back.inputs.iter().map(|x| x.controllable).collect();
        ensure(flags == common::mini_controllable(&text), || {
            format!("#{i}: controllable partition")
        })?;
    }
    for (i, c) in random_corpus(56, 200, &p).iter().enumerate() {
        let a = parse_ascii(&serialize_ascii(c), ParseMode::Specification)
            .map_err(|e| e.to_string())?;
        let b = parse_binary(&common::encode_binary(c), ParseMode::Specification)
            .map_err(|e| format!("#{i}: {e}"))?;
        ensure(a == b, || format!("#{i}: binary and ASCII parses differ"))?;
    }
    let mut family_files = 0;
    for f in Family::ALL {
        for n in 1..=8 {
            let text = serialize_ascii(&generate(f, n, 0).map_err(|e| e.to_string())?);
            let c = parse_ascii(&text, ParseMode::Specification).map_err(|e| e.to_string())?;
            let flags: Vec<bool> = c.inputs.iter().map(|x| x.controllable).collect();
            ensure(flags == common::mini_controllable(&text), || {
                format!("{f} {n}: partition")
            })?;
            family_files += 1;
        }
    }
    Ok(format!(
        "500 ASCII round trips, 200 binary agreements, partition checked on {} files",
        500 + family_files
    ))
}

fn mutation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let (mut total, mut unsafe_count) = (0, 0);
    for (name, spec) in common::oracle_corpus(500) {
        let Some((sol, witness)) = common::self_verify(&spec)? else {
            continue;
        };
        for mutant in common::mutants(&spec, &sol, &mut rng, 2) {
            total += 1;
            let v = verify_pipeline(&spec, &mutant, Some(&witness), Duration::from_secs(60));
            match explicit_reach(&mutant).map_err(|e| e.to_string())? {
                Some(_) => {
                    unsafe_count += 1;
                    ensure(v.status == VerdictStatus::SemanticFail, || {
                        format!("{name}: unsafe mutant got {}", v.status)
                    })?;
                    let trace = v
                        .counterexample
                        .ok_or_else(|| format!("{name}: no trace"))?;
                    let sim = Simulator::new(&mutant).map_err(|e| e.to_string())?;
                    ensure(sim.replay(&trace.frames()), || {
                        format!("{name}: trace does not replay")
                    })?;
                }
                None => ensure(v.status.is_verified(), || {
                    format!("{name}: safe mutant got {}", v.status)
                })?,
            }
        }
    }
    ensure(total >= 50, || format!("only {total} mutants"))?;
    Ok(format!(
        "{total} mutants, {unsafe_count} unsafe, all flagged with replaying traces, 0 unsound"
    ))
}

fn harness_semantics() -> Outcome {
    let sleeper = || {
        let mut c = Command::new("sh");
        c.arg("-c").arg("sleep 2; echo REALIZABLE");
        c
    };
    let t = Duration::from_secs(1);
    let seq = run_limited(
        &mut sleeper(),
        Limits {
            mode: TimeMode::Sequential,
            timeout: t,
        },
    )
    .map_err(|e| e.to_string())?;
    ensure(!seq.timed_out && seq.stdout == "REALIZABLE\n", || {
        "sequential run was killed".into()
    })?;
    let par = run_limited(
        &mut sleeper(),
        Limits {
            mode: TimeMode::Parallel,
            timeout: t,
        },
    )
    .map_err(|e| e.to_string())?;
    ensure(par.timed_out, || "parallel run survived".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (records, refs) = common::write_score_fixture(dir.path());
    let o = Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(["score", "--in"])
        .arg(&records)
        .arg("--refs")
        .arg(&refs)
        .output()
        .map_err(|e| e.to_string())?;
    let table = String::from_utf8_lossy(&o.stdout);
    ensure(table == common::expected_table_for_files(), || {
        format!("score table differs:\n{table}")
    })?;
    Ok("sleep job survives CPU limit, dies under wall limit; 3x6 score table exact".into())
}

fn counter_performance() -> Outcome {
    let start = Instant::now();
    let spec = generate(Family::Count, 20, 0).map_err(|e| e.to_string())?;
    let SynthesisResult::Realizable {
        solution,
        witness,
        iterations,
        ..
    } = synthesize(&spec).map_err(|e| e.to_string())?
    else {
        return Err("count 20 reported unrealizable".into());
    };
    let v = verify_pipeline(
        &spec,
        &solution,
        Some(&witness.to_text()),
        Duration::from_secs(30),
    );
    let elapsed = start.elapsed();
    ensure(v.status.is_verified(), || format!("verdict {}", v.status))?;
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    ensure(iterations == 21, || {
        format!("{iterations} iterations, expected 21")
    })?;
    Ok(format!(
        "{iterations} iterations (bound 2^20), {} in {:.3}s",
        v.status,
        elapsed.as_secs_f64()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("quality formula anchors", quality_anchors),
        ("oracle equivalence", oracle_equivalence),
        ("self-verification", self_verification),
        ("BDD algebra", bdd_suite),
        ("AIGER codec", codec),
        ("mutation verification", mutation),
        ("harness semantics", harness_semantics),
        ("counter performance", counter_performance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
