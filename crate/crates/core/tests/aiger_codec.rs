mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use safety_synth::aiger::{
    parse_ascii, parse_binary, serialize_ascii, write_meta, AigerCircuit, BenchmarkMeta, ParseMode,
    Realizability,
};
use safety_synth::harness::gen::{generate, random_spec, Family, RandomSpecParams};

fn with_comments(mut c: AigerCircuit, seed: u64) -> AigerCircuit {
    if seed.is_multiple_of(3) {
        c.comments.push(format!("generated with seed {seed}"));
    }
    if seed.is_multiple_of(2) {
        let meta = BenchmarkMeta {
            known_realizability: Some(Realizability::Realizable),
            reference_size: Some(seed % 17),
        };
        c = write_meta(&c, &meta);
    }
    c
}

fn corpus(seed: u64, n: usize) -> Vec<AigerCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = RandomSpecParams::default();
    (0..n)
        .map(|i| with_comments(random_spec(&mut rng, &p), i as u64))
        .collect()
}

#[test]
fn ascii_round_trip_is_structural_identity() {
    for c in corpus(11, 500) {
        let text = serialize_ascii(&c);
        let back = parse_ascii(&text, ParseMode::Specification).unwrap();
        assert_eq!(back, c, "\n{text}");
        assert_eq!(serialize_ascii(&back), text);
    }
}

#[test]
fn binary_and_ascii_parses_agree() {
    for c in corpus(12, 200) {
        let from_ascii = parse_ascii(&serialize_ascii(&c), ParseMode::Specification).unwrap();
        let bytes = common::encode_binary(&c);
        let from_binary = parse_binary(&bytes, ParseMode::Specification).unwrap();
        assert_eq!(from_binary, from_ascii);
        assert_eq!(
            AigerCircuit::from_bytes(&bytes, ParseMode::Specification).unwrap(),
            from_ascii
        );
    }
}

#[test]
fn controllable_partition_matches_reference_reader() {
    let mut files: Vec<AigerCircuit> = corpus(13, 300);
    for f in Family::ALL {
        for n in 1..=6 {
            files.push(generate(f, n, n as u64).unwrap());
        }
    }
    for c in files {
        let text = serialize_ascii(&c);
        let parsed = parse_ascii(&text, ParseMode::Specification).unwrap();
        let flags: Vec<bool> = parsed.inputs.iter().map(|i| i.controllable).collect();
        assert_eq!(flags, common::mini_controllable(&text), "\n{text}");
        assert_eq!(
            parsed.num_controllable(),
            flags.iter().filter(|&&b| b).count()
        );
    }
}

#[test]
fn binary_literals_are_implicit() {
    // two inputs, one latch fed by their conjunction, output = latch
    let text = "aag 4 2 1 1 1\n2\n4\n6 8\n6\n8 4 2\ni0 a\ni1 controllable_b\n";
    let c = parse_ascii(text, ParseMode::Specification).unwrap();
    let bytes = common::encode_binary(&c);
    assert_eq!(&bytes[..17], b"aig 4 2 1 1 1\n8\n6");
    assert_eq!(parse_binary(&bytes, ParseMode::Specification).unwrap(), c);
}

#[test]
fn malformed_inputs_are_rejected() {
    for bad in [
        "",
        "aag",
        "aag 1 1 0 1",
        "aag 1 1 0 1 0\n3\n2\n",
        "aag 2 1 0 1 1\n2\n4\n4 2 6\n",
        "aag 1 0 1 1 0\n2 2 1\n2\n",
        "aag 1 1 0 2 0\n2\n2\n2\n",
        "aig 2 1 0 1 1\n4\n",
    ] {
        assert!(
            AigerCircuit::from_bytes(bad.as_bytes(), ParseMode::Specification).is_err(),
            "{bad:?}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialization_is_a_fixpoint(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_spec(&mut rng, &RandomSpecParams::default());
        let once = serialize_ascii(&c);
        let twice = serialize_ascii(&parse_ascii(&once, ParseMode::Specification).unwrap());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn binary_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_spec(&mut rng, &RandomSpecParams { max_latches: 10, max_uncontrollable: 5, max_controllable: 5, max_gates: 300 });
        prop_assert_eq!(parse_binary(&common::encode_binary(&c), ParseMode::Specification).unwrap(), c);
    }
}
