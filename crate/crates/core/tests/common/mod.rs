//! Helpers shared by the integration tests. Everything here is written
//! against first principles rather than the library's own machinery.

#![allow(dead_code)]

use rand::Rng;
use safety_synth::aiger::{AigerCircuit, AndGate, Literal};
use safety_synth::bdd::{Bdd, BddManager, Var};

/// Boolean expression over variables `0..n`, evaluated directly.
#[derive(Clone, Debug)]
pub enum Expr {
    Const(bool),
    Var(u32),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn random(rng: &mut impl Rng, nvars: u32, depth: u32) -> Expr {
        if depth == 0 || rng.random_ratio(1, 5) {
            return if rng.random_ratio(1, 10) {
                Expr::Const(rng.random())
            } else {
                Expr::Var(rng.random_range(0..nvars))
            };
        }
        let op = rng.random_range(0..5);
        let mut sub = || Box::new(Expr::random(rng, nvars, depth - 1));
        match op {
            0 => Expr::Not(sub()),
            1 => Expr::And(sub(), sub()),
            2 => Expr::Or(sub(), sub()),
            3 => Expr::Xor(sub(), sub()),
            _ => Expr::Ite(sub(), sub(), sub()),
        }
    }

    pub fn eval(&self, a: u64) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Var(v) => a >> v & 1 == 1,
            Expr::Not(e) => !e.eval(a),
            Expr::And(x, y) => x.eval(a) && y.eval(a),
            Expr::Or(x, y) => x.eval(a) || y.eval(a),
            Expr::Xor(x, y) => x.eval(a) != y.eval(a),
            Expr::Ite(c, t, e) => {
                if c.eval(a) {
                    t.eval(a)
                } else {
                    e.eval(a)
                }
            }
        }
    }

    /// Truth table with bit `a` holding the value under assignment `a`.
    pub fn table(&self, nvars: u32) -> u64 {
        (0..1u64 << nvars).fold(0, |t, a| t | (self.eval(a) as u64) << a)
    }

    pub fn build(&self, m: &BddManager, vars: &[Var]) -> Bdd {
        match self {
            Expr::Const(b) => m.constant(*b),
            Expr::Var(v) => m.var(vars[*v as usize]),
            Expr::Not(e) => m.not(&e.build(m, vars)),
            Expr::And(x, y) => m.and(&x.build(m, vars), &y.build(m, vars)),
            Expr::Or(x, y) => m.or(&x.build(m, vars), &y.build(m, vars)),
            Expr::Xor(x, y) => m.xor(&x.build(m, vars), &y.build(m, vars)),
            Expr::Ite(c, t, e) => m.ite(&c.build(m, vars), &t.build(m, vars), &e.build(m, vars)),
        }
    }
}

pub fn mask(nvars: u32) -> u64 {
    if nvars >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u64 << nvars)) - 1
    }
}

/// Sum of minterms of a truth table.
pub fn from_table(m: &BddManager, vars: &[Var], table: u64) -> Bdd {
    let n = vars.len() as u32;
    let mut f = m.ff();
    for a in 0..1u64 << n {
        if table >> a & 1 == 1 {
            let mut cube = m.tt();
            for (i, &v) in vars.iter().enumerate() {
                let lit = m.var(v);
                let lit = if a >> i & 1 == 1 { lit } else { m.not(&lit) };
                cube = m.and(&cube, &lit);
            }
            f = m.or(&f, &cube);
        }
    }
    f
}

/// Truth table of a BDD by evaluation on every assignment.
pub fn table_of(m: &BddManager, f: &Bdd, vars: &[Var]) -> u64 {
    let n = vars.len() as u32;
    (0..1u64 << n).fold(0, |t, a| {
        let bit = m.eval_with(f, |v| {
            let i = vars
                .iter()
                .position(|&w| w == v)
                .expect("variable in range");
            a >> i & 1 == 1
        });
        t | (bit as u64) << a
    })
}

/// Controllable flags of the inputs of an ASCII file, read straight from the
/// header and symbol table.
pub fn mini_controllable(text: &str) -> Vec<bool> {
    let mut lines = text.lines();
    let header: Vec<usize> = lines
        .next()
        .expect("header")
        .split_whitespace()
        .skip(1)
        .map(|t| t.parse().expect("number"))
        .collect();
    let n_inputs = header[1];
    let mut flags = vec![false; n_inputs];
    for line in lines {
        if line == "c" {
            break;
        }
        if let Some(rest) = line.strip_prefix('i') {
            if let Some((pos, name)) = rest.split_once(' ') {
                if let Ok(p) = pos.parse::<usize>() {
                    flags[p] = name.starts_with("controllable_");
                }
            }
        }
    }
    flags
}

fn push_varint(out: &mut Vec<u8>, mut x: u32) {
    while x >= 0x80 {
        out.push((x & 0x7f) as u8 | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}

/// Binary encoding of a circuit already in canonical numbering: inputs,
/// then latches, then gates, each gate's lhs above both of its inputs.
pub fn encode_binary(c: &AigerCircuit) -> Vec<u8> {
    let (i, l, a) = (c.inputs.len(), c.latches.len(), c.ands.len());
    let mut out = format!("aig {} {i} {l} {} {a}\n", c.max_var, c.outputs.len()).into_bytes();
    for latch in &c.latches {
        out.extend(format!("{}\n", latch.next.raw()).bytes());
    }
    for o in &c.outputs {
        out.extend(format!("{}\n", o.lit.raw()).bytes());
    }
    for g in &c.ands {
        let (lhs, r0, r1) = (
            g.lhs.raw(),
            g.rhs0.raw().max(g.rhs1.raw()),
            g.rhs0.raw().min(g.rhs1.raw()),
        );
        push_varint(&mut out, lhs - r0);
        push_varint(&mut out, r0 - r1);
    }
    for (k, inp) in c.inputs.iter().enumerate() {
        if let Some(n) = &inp.name {
            out.extend(format!("i{k} {n}\n").bytes());
        }
    }
    for (k, latch) in c.latches.iter().enumerate() {
        if let Some(n) = &latch.name {
            out.extend(format!("l{k} {n}\n").bytes());
        }
    }
    for (k, o) in c.outputs.iter().enumerate() {
        if let Some(n) = &o.name {
            out.extend(format!("o{k} {n}\n").bytes());
        }
    }
    if !c.comments.is_empty() {
        out.extend(b"c\n");
        for line in &c.comments {
            out.extend(line.bytes());
            out.push(b'\n');
        }
    }
    out
}

/// A literal no gate can depend on: a constant, an uncontrollable input or a
/// latch of the solution.
fn safe_source(sol: &AigerCircuit, rng: &mut impl Rng) -> Literal {
    let mut pool = vec![Literal::FALSE];
    pool.extend(sol.inputs.iter().map(|i| i.lit));
    pool.extend(sol.latches.iter().map(|l| l.lit));
    pool[rng.random_range(0..pool.len())].negate_if(rng.random())
}

/// Single-gate rewires of the controller part of `sol`: one input of one
/// gate that is not in `spec` is replaced by its negation or by a source
/// literal. Returns nothing when the controller has no gates.
pub fn mutants(
    spec: &AigerCircuit,
    sol: &AigerCircuit,
    rng: &mut impl Rng,
    count: usize,
) -> Vec<AigerCircuit> {
    let spec_gates: Vec<AndGate> = spec.ands.clone();
    let candidates: Vec<usize> = (0..sol.ands.len())
        .filter(|&k| !spec_gates.contains(&sol.ands[k]))
        .collect();
    if candidates.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 10 {
        attempts += 1;
        let k = candidates[rng.random_range(0..candidates.len())];
        let mut m = sol.clone();
        let g = &mut m.ands[k];
        let slot = if rng.random() {
            &mut g.rhs0
        } else {
            &mut g.rhs1
        };
        let new = if rng.random() {
            !*slot
        } else {
            safe_source(sol, rng)
        };
        if new == *slot {
            continue;
        }
        *slot = new;
        out.push(m);
    }
    out
}

/// Solves `spec` symbolically and explicitly and compares the realizability
/// flag and the winning state set. Returns the realizability.
pub fn compare_with_oracle(spec: &AigerCircuit) -> Result<bool, String> {
    use safety_synth::game::build_game;
    use safety_synth::oracle::explicit_solve;
    let g = build_game(spec).map_err(|e| e.to_string())?;
    let sym = g.solve();
    let exp = explicit_solve(spec).map_err(|e| e.to_string())?;
    if sym.realizable != exp.realizable {
        return Err(format!(
            "realizability: symbolic {} explicit {}",
            sym.realizable, exp.realizable
        ));
    }
    for (s, &win) in exp.winning.iter().enumerate() {
        let got = g.manager.eval_with(&sym.winning_region, |v| {
            let i = g
                .latch_vars
                .iter()
                .position(|&w| w == v)
                .expect("region over latches only");
            s >> i & 1 == 1
        });
        if got != win {
            return Err(format!("state {s:b}: symbolic {got} explicit {win}"));
        }
    }
    Ok(sym.realizable)
}

/// Synthesizes `spec` and checks the result every way available. Returns the
/// solution and witness text of a realizable spec.
pub fn self_verify(spec: &AigerCircuit) -> Result<Option<(AigerCircuit, String)>, String> {
    use safety_synth::aiger::{check_syntactic, parse_ascii, serialize_ascii, ParseMode};
    use safety_synth::oracle::explicit_reach;
    use safety_synth::strategy::{synthesize, SynthesisResult};
    use safety_synth::verify::{check_invariant, model_check, Witness};
    let (solution, witness) = match synthesize(spec).map_err(|e| e.to_string())? {
        SynthesisResult::Unrealizable { .. } => return Ok(None),
        SynthesisResult::Realizable {
            solution, witness, ..
        } => (solution, witness),
    };
    let text = serialize_ascii(&solution);
    let sol =
        parse_ascii(&text, ParseMode::Circuit).map_err(|e| format!("reparse: {e}\n{text}"))?;
    let report = check_syntactic(spec, &sol);
    if !report.passed() {
        return Err(format!("syntactic: {:?}", report.issues));
    }
    let wtext = witness.to_text();
    let w = Witness::parse(&wtext).map_err(|e| e.to_string())?;
    match check_invariant(&sol, &w).map_err(|e| e.to_string())? {
        Ok(()) => {}
        Err(clause) => return Err(format!("invariant: {clause}\n{wtext}")),
    }
    let v = model_check(&sol, std::time::Duration::from_secs(60)).map_err(|e| e.to_string())?;
    if !v.status.is_verified() {
        return Err(format!("model check: {}", v.status));
    }
    if let Some(t) = explicit_reach(&sol).map_err(|e| e.to_string())? {
        return Err(format!(
            "explicit reach found error in {} steps",
            t.len() + 1
        ));
    }
    Ok(Some((sol, wtext)))
}

/// The oracle corpus: seeded random specs plus every family at N <= 4.
pub fn oracle_corpus(count: usize) -> Vec<(String, AigerCircuit)> {
    use safety_synth::harness::gen::{generate, random_corpus, Family, RandomSpecParams};
    let mut out: Vec<(String, AigerCircuit)> =
        random_corpus(2024, count, &RandomSpecParams::default())
            .into_iter()
            .enumerate()
            .map(|(i, c)| (format!("random {i}"), c))
            .collect();
    for f in Family::ALL {
        for n in 1..=4 {
            for seed in 0..3 {
                out.push((
                    format!("{f} {n} seed {seed}"),
                    generate(f, n, seed).expect("generator"),
                ));
            }
        }
    }
    out
}

/// Three configurations on six benchmarks, synthesis track.
///
/// | bench | meta            | A                 | B                 | C                  |
/// |-------|-----------------|-------------------|-------------------|--------------------|
/// | b1    | real, ref 10    | REAL 10 verified  | REAL 109 verified | TIMEOUT            |
/// | b2    | real            | REAL 0 verified   | REAL 9 verified   | UNKNOWN            |
/// | b3    | unreal          | UNREAL            | REAL semantic fail| UNREAL             |
/// | b4    | none            | UNREAL            | UNREAL            | REAL unverified    |
/// | b5    | real, ref 0     | REAL 0 verified   | TIMEOUT           | REAL mc timeout    |
/// | b6    | real, ref 4     | TIMEOUT           | REAL 0 verified   | REAL 49 verified   |
pub fn score_fixture() -> (
    Vec<safety_synth::harness::ResultRecord>,
    std::collections::HashMap<String, safety_synth::aiger::BenchmarkMeta>,
) {
    use safety_synth::aiger::{BenchmarkMeta, Realizability as R};
    use safety_synth::harness::{Answer::*, ResultRecord};
    use safety_synth::verify::VerdictStatus::{
        SemanticFail, Timeout as McTimeout, VerifiedInvariant, VerifiedModelCheck,
    };
    let meta = |r, s| BenchmarkMeta {
        known_realizability: r,
        reference_size: s,
    };
    let metas = [
        ("b1", meta(Some(R::Realizable), Some(10))),
        ("b2", meta(Some(R::Realizable), None)),
        ("b3", meta(Some(R::Unrealizable), None)),
        ("b4", meta(None, None)),
        ("b5", meta(Some(R::Realizable), Some(0))),
        ("b6", meta(Some(R::Realizable), Some(4))),
    ]
    .into_iter()
    .map(|(b, m)| (b.to_string(), m))
    .collect();
    let rec = |b: &str, c: &str, a, size: Option<u64>, v| {
        let mut r = ResultRecord::new(b, c, a);
        r.size = size;
        r.verification = v;
        r.cpu_time = 1.0;
        r.wall_time = 1.0;
        r
    };
    let records = vec![
        rec("b1", "A", Realizable, Some(10), Some(VerifiedInvariant)),
        rec("b1", "B", Realizable, Some(109), Some(VerifiedModelCheck)),
        rec("b1", "C", Timeout, None, None),
        rec("b2", "A", Realizable, Some(0), Some(VerifiedInvariant)),
        rec("b2", "B", Realizable, Some(9), Some(VerifiedInvariant)),
        rec("b2", "C", Unknown, None, None),
        rec("b3", "A", Unrealizable, None, None),
        rec("b3", "B", Realizable, Some(3), Some(SemanticFail)),
        rec("b3", "C", Unrealizable, None, None),
        rec("b4", "A", Unrealizable, None, None),
        rec("b4", "B", Unrealizable, None, None),
        rec("b4", "C", Realizable, None, None),
        rec("b5", "A", Realizable, Some(0), Some(VerifiedInvariant)),
        rec("b5", "B", Timeout, None, None),
        rec("b5", "C", Realizable, Some(0), Some(McTimeout)),
        rec("b6", "A", Timeout, None, None),
        rec("b6", "B", Realizable, Some(0), Some(VerifiedInvariant)),
        rec("b6", "C", Realizable, Some(49), Some(VerifiedModelCheck)),
    ];
    (records, metas)
}

/// `2 + log10(5)`: size 0 against reference 4.
pub const Q_ZERO_VS_FOUR: f64 = 2.698_970_004_336_018_8;

/// Expected ranking rows: config, solved, points, unique, quality, average
/// quality, improved references, model-checking timeouts.
///
/// A: b1 (2), b2 (2), b3, b4, b5 (2); b5 unique. 5 solved, 5 points, q 6.
/// B: b1 (1: 110/11), b2 (1: 10/1), b3 wrong, b4, b6 (2 + log10 5).
///    4 solved, 4 - 4 = 0 points, q 4 + log10 5.
/// C: b3, b6 (1: 50/5); b4 wrong; b5 model-check timeout.
///    2 solved, 2 - 4 = -2 points, q 1.
pub type RankingRow = (&'static str, usize, i64, usize, f64, f64, usize, usize);

pub fn expected_ranking() -> Vec<RankingRow> {
    vec![
        ("A", 5, 5, 1, 6.0, 6.0 / 5.0, 0, 0),
        (
            "B",
            4,
            0,
            0,
            2.0 + Q_ZERO_VS_FOUR,
            (2.0 + Q_ZERO_VS_FOUR) / 4.0,
            1,
            0,
        ),
        ("C", 2, -2, 0, 1.0, 0.5, 0, 1),
    ]
}

/// Expected references after the run: min of prior and best verified size.
pub fn expected_references() -> Vec<(&'static str, Option<u64>)> {
    vec![
        ("b1", Some(10)),
        ("b2", Some(0)),
        ("b3", None),
        ("b4", None),
        ("b5", Some(0)),
        ("b6", Some(0)),
    ]
}

/// The rendered table, with every value from the rows above.
pub const EXPECTED_TABLE: &str = "\
config               solved  points unique mc_timeout   quality    avg_q new_refs
A                         5       5      1          0     6.000    1.200        0
B                         4       0      0          0     4.699    1.175        1
C                         2      -2      0          1     1.000    0.500        0

reference sizes:
  b1: 10
  b2: 0
  b3: -
  b4: -
  b5: 0
  b6: 0
";

/// Writes the score fixture as a record file plus a metadata directory with
/// one `<bench>.aag` per benchmark. Returns `(records, refs_dir)`.
pub fn write_score_fixture(dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf) {
    use safety_synth::aiger::{parse_ascii, serialize_ascii, write_meta, ParseMode};
    use safety_synth::harness::write_record;
    let (records, metas) = score_fixture();
    let refs = dir.join("refs");
    std::fs::create_dir_all(&refs).unwrap();
    let stub = parse_ascii("aag 1 1 0 1 0\n2\n0\n", ParseMode::Specification).unwrap();
    for (b, m) in &metas {
        std::fs::write(
            refs.join(format!("{b}.aag")),
            serialize_ascii(&write_meta(&stub, m)),
        )
        .unwrap();
    }
    let path = dir.join("records.jsonl");
    let mut out = Vec::new();
    for mut r in records {
        r.benchmark.push_str(".aag");
        write_record(&mut out, &r).unwrap();
    }
    std::fs::write(&path, out).unwrap();
    (path, refs)
}

/// [`EXPECTED_TABLE`] with the file names used by [`write_score_fixture`].
pub fn expected_table_for_files() -> String {
    EXPECTED_TABLE
        .lines()
        .map(
            |l| match l.strip_prefix("  b").and_then(|r| r.split_once(':')) {
                Some((n, rest)) => format!("  b{n}.aag:{rest}\n"),
                None => format!("{l}\n"),
            },
        )
        .collect()
}
