//! Seeded benchmark generators.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aiger::{
    write_meta, AigerCircuit, AndGate, BenchmarkMeta, Input, Latch, Literal, Output, Realizability,
};
use crate::oracle::explicit_solve;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Count,
    Bitshift,
    Add,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Count, Family::Bitshift, Family::Add];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Count => "count",
            Family::Bitshift => "bitshift",
            Family::Add => "add",
        })
    }
}

impl FromStr for Family {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, GenError> {
        match s {
            "count" => Ok(Family::Count),
            "bitshift" => Ok(Family::Bitshift),
            "add" => Ok(Family::Add),
            other => Err(GenError::UnknownFamily(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("unknown family `{0}` (expected count, bitshift or add)")]
    UnknownFamily(String),
    #[error("parameter {param} out of range for {family} (1..={max})")]
    BadParam {
        family: Family,
        param: u32,
        max: u32,
    },
    #[error("oracle disagrees with the construction of {0}")]
    OracleMismatch(String),
}

/// Builds specifications with inputs and latches numbered first and gates
/// after, so every gate's operands precede it.
pub struct Builder {
    c: AigerCircuit,
    strash: HashMap<(Literal, Literal), Literal>,
    gates_started: bool,
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

impl Builder {
    pub fn new() -> Self {
        Builder {
            c: AigerCircuit::default(),
            strash: HashMap::new(),
            gates_started: false,
        }
    }

    fn fresh(&mut self) -> Literal {
        self.c.max_var += 1;
        Literal::from_var(self.c.max_var, false)
    }

    pub fn input(&mut self, name: &str) -> Literal {
        assert!(!self.gates_started, "declare inputs before gates");
        assert!(self.c.latches.is_empty(), "declare inputs before latches");
        let lit = self.fresh();
        self.c.inputs.push(Input::new(lit, Some(name.to_string())));
        lit
    }

    /// A latch whose next-state function is set later with [`Builder::set_next`].
    pub fn latch(&mut self, name: &str) -> Literal {
        assert!(!self.gates_started, "declare latches before gates");
        let lit = self.fresh();
        self.c.latches.push(Latch {
            lit,
            next: Literal::FALSE,
            name: Some(name.to_string()),
        });
        lit
    }

    pub fn set_next(&mut self, latch: Literal, next: Literal) {
        let l = self
            .c
            .latches
            .iter_mut()
            .find(|l| l.lit == latch)
            .expect("known latch");
        l.next = next;
    }

    pub fn and(&mut self, a: Literal, b: Literal) -> Literal {
        if a == Literal::FALSE || b == Literal::FALSE || a == !b {
            return Literal::FALSE;
        }
        if a == Literal::TRUE || a == b {
            return b;
        }
        if b == Literal::TRUE {
            return a;
        }
        let key = (a.max(b), a.min(b));
        if let Some(&l) = self.strash.get(&key) {
            return l;
        }
        self.gates_started = true;
        let lhs = self.fresh();
        self.c.ands.push(AndGate {
            lhs,
            rhs0: key.0,
            rhs1: key.1,
        });
        self.strash.insert(key, lhs);
        lhs
    }

    pub fn or(&mut self, a: Literal, b: Literal) -> Literal {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: Literal, b: Literal) -> Literal {
        let both = self.and(a, b);
        let neither = self.and(!a, !b);
        self.and(!both, !neither)
    }

    pub fn all(&mut self, lits: &[Literal]) -> Literal {
        lits.iter().fold(Literal::TRUE, |acc, &l| self.and(acc, l))
    }

    /// `bits == k`, bits little-endian.
    pub fn eq_const(&mut self, bits: &[Literal], k: u64) -> Literal {
        let lits: Vec<Literal> = bits
            .iter()
            .enumerate()
            .map(|(i, &b)| b.negate_if(k >> i & 1 == 0))
            .collect();
        if bits.len() < 64 && k >> bits.len() != 0 {
            return Literal::FALSE;
        }
        self.all(&lits)
    }

    /// `bits < k` as unsigned, bits little-endian.
    pub fn lt_const(&mut self, bits: &[Literal], k: u64) -> Literal {
        if bits.len() < 64 && k >> bits.len() != 0 {
            return Literal::TRUE;
        }
        // scan from the least significant bit: lt_i = bits[0..=i] < k[0..=i]
        let mut lt = Literal::FALSE;
        for (i, &b) in bits.iter().enumerate() {
            lt = if k >> i & 1 == 1 {
                // b = 0 decides less; b = 1 defers to lower bits
                self.or(!b, lt)
            } else {
                self.and(!b, lt)
            };
        }
        lt
    }

    /// Ripple-carry sum of two little-endian vectors, one bit wider.
    pub fn add(&mut self, a: &[Literal], b: &[Literal]) -> Vec<Literal> {
        let mut carry = Literal::FALSE;
        let mut out = Vec::with_capacity(a.len() + 1);
        for (&x, &y) in a.iter().zip(b) {
            let t = self.xor(x, y);
            out.push(self.xor(t, carry));
            let g = self.and(x, y);
            let p = self.and(t, carry);
            carry = self.or(g, p);
        }
        out.push(carry);
        out
    }

    /// Increments `bits` when `en` holds, wrapping.
    pub fn increment(&mut self, bits: &[Literal], en: Literal) -> Vec<Literal> {
        let mut carry = en;
        bits.iter()
            .map(|&b| {
                let s = self.xor(b, carry);
                carry = self.and(b, carry);
                s
            })
            .collect()
    }

    pub fn finish(mut self, error: Literal, comments: Vec<String>) -> AigerCircuit {
        self.c.outputs.push(Output {
            lit: error,
            name: Some("err".to_string()),
        });
        self.c.comments = comments;
        self.c
    }
}

fn max_param(f: Family) -> u32 {
    match f {
        Family::Count => 62,
        Family::Bitshift => 62,
        Family::Add => 30,
    }
}

/// `count n`: an `n`-bit counter the environment increments; the controller
/// may hold it only below `2^n - n`. Overflow is the error.
fn count(n: u32) -> (AigerCircuit, bool) {
    let mut b = Builder::new();
    let inc = b.input("inc");
    let hold = b.input("controllable_hold");
    let bits: Vec<Literal> = (0..n).map(|i| b.latch(&format!("c{i}"))).collect();
    let band = (1u64 << n) - u64::from(n);
    let below = b.lt_const(&bits, band);
    let held = b.and(hold, below);
    let step = b.and(inc, !held);
    let next = b.increment(&bits, step);
    for (&l, &nx) in bits.iter().zip(&next) {
        b.set_next(l, nx);
    }
    let full = b.eq_const(&bits, (1u64 << n) - 1);
    let err = b.and(full, inc);
    (b.finish(err, vec![format!("count {n}")]), true)
}

/// `bitshift n`: `r' = (r << 1) | (in & !mask)`; error when `r` equals a
/// seeded pattern `p`.
fn bitshift(n: u32, rng: &mut ChaCha8Rng) -> (AigerCircuit, bool) {
    let p = rng.random_range(0..1u64 << n);
    let mut b = Builder::new();
    let inp = b.input("in");
    let mask = b.input("controllable_mask");
    let bits: Vec<Literal> = (0..n).map(|i| b.latch(&format!("r{i}"))).collect();
    let shifted_in = b.and(inp, !mask);
    b.set_next(bits[0], shifted_in);
    for i in 1..bits.len() {
        b.set_next(bits[i], bits[i - 1]);
    }
    let err = b.eq_const(&bits, p);
    (
        b.finish(err, vec![format!("bitshift {n} pattern {p}")]),
        p != 0,
    )
}

/// `add n`: registered sum `s' = a + b` of an environment operand `a` and a
/// controllable operand `b`; error when a valid sum leaves `[lo, hi)`.
fn add(n: u32, rng: &mut ChaCha8Rng) -> (AigerCircuit, bool) {
    let top = 1u64 << (n + 1);
    let lo = rng.random_range(0..top);
    let hi = rng.random_range(lo + 1..=top);
    let mut b = Builder::new();
    let a: Vec<Literal> = (0..n).map(|i| b.input(&format!("a{i}"))).collect();
    let c: Vec<Literal> = (0..n)
        .map(|i| b.input(&format!("controllable_b{i}")))
        .collect();
    let s: Vec<Literal> = (0..=n).map(|i| b.latch(&format!("s{i}"))).collect();
    let valid = b.latch("valid");
    let sum = b.add(&a, &c);
    for (&l, &nx) in s.iter().zip(&sum) {
        b.set_next(l, nx);
    }
    b.set_next(valid, Literal::TRUE);
    let below_lo = b.lt_const(&s, lo);
    let below_hi = b.lt_const(&s, hi);
    let outside = b.or(below_lo, !below_hi);
    let err = b.and(valid, outside);
    let max = (1u64 << n) - 1;
    let realizable = lo <= max && max < hi;
    (
        b.finish(err, vec![format!("add {n} range [{lo}, {hi})")]),
        realizable,
    )
}

/// Generates one benchmark. Realizability comes from the construction and is
/// cross-checked by the explicit-state oracle when the instance is small.
pub fn generate(family: Family, n: u32, seed: u64) -> Result<AigerCircuit, GenError> {
    let max = max_param(family);
    if n == 0 || n > max {
        return Err(GenError::BadParam {
            family,
            param: n,
            max,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (c, realizable) = match family {
        Family::Count => count(n),
        Family::Bitshift => bitshift(n, &mut rng),
        Family::Add => add(n, &mut rng),
    };
    if c.latches.len() <= 10 && c.inputs.len() <= 8 {
        let solved = explicit_solve(&c).expect("small instance fits the oracle");
        if solved.realizable != realizable {
            return Err(GenError::OracleMismatch(format!("{family} {n}")));
        }
    }
    let meta = BenchmarkMeta {
        known_realizability: Some(if realizable {
            Realizability::Realizable
        } else {
            Realizability::Unrealizable
        }),
        reference_size: None,
    };
    Ok(write_meta(&c, &meta))
}

/// Bounds for [`random_spec`].
#[derive(Clone, Copy, Debug)]
pub struct RandomSpecParams {
    pub max_latches: u32,
    pub max_uncontrollable: u32,
    pub max_controllable: u32,
    pub max_gates: u32,
}

impl Default for RandomSpecParams {
    fn default() -> Self {
        RandomSpecParams {
            max_latches: 6,
            max_uncontrollable: 3,
            max_controllable: 3,
            max_gates: 30,
        }
    }
}

/// A literal over variables `0..=upto`, occasionally a constant.
fn pick(rng: &mut impl Rng, upto: u32) -> Literal {
    let v = if rng.random_ratio(1, 12) {
        0
    } else {
        rng.random_range(0..=upto)
    };
    Literal::from_var(v, rng.random_bool(0.5))
}

/// A random specification: inputs (controllable ones interleaved at random
/// positions), latches, then gates over earlier variables.
pub fn random_spec(rng: &mut impl Rng, p: &RandomSpecParams) -> AigerCircuit {
    let n_u = rng.random_range(0..=p.max_uncontrollable);
    let n_c = rng.random_range(0..=p.max_controllable);
    let n_l = rng.random_range(0..=p.max_latches);
    let n_a = rng.random_range(0..=p.max_gates);
    let mut kinds: Vec<bool> = (0..n_u)
        .map(|_| false)
        .chain((0..n_c).map(|_| true))
        .collect();
    for i in (1..kinds.len()).rev() {
        let j = rng.random_range(0..=i);
        kinds.swap(i, j);
    }
    let mut c = AigerCircuit::default();
    let mut var = 0u32;
    for (i, &ctrl) in kinds.iter().enumerate() {
        var += 1;
        let name = if ctrl {
            Some(format!("controllable_c{i}"))
        } else if rng.random_bool(0.5) {
            Some(format!("u{i}"))
        } else {
            None
        };
        c.inputs
            .push(Input::new(Literal::from_var(var, false), name));
    }
    for i in 0..n_l {
        var += 1;
        let name = rng.random_bool(0.5).then(|| format!("q{i}"));
        c.latches.push(Latch {
            lit: Literal::from_var(var, false),
            next: Literal::FALSE,
            name,
        });
    }
    for _ in 0..n_a {
        let below = var;
        var += 1;
        let x = pick(rng, below);
        let y = pick(rng, below);
        c.ands.push(AndGate {
            lhs: Literal::from_var(var, false),
            rhs0: x.max(y),
            rhs1: x.min(y),
        });
    }
    c.max_var = var;
    for l in &mut c.latches {
        l.next = pick(rng, var);
    }
    let out = pick(rng, var);
    c.outputs.push(Output {
        lit: out,
        name: None,
    });
    c
}

/// The `i`-th random specification for a seed, for reproducible corpora.
pub fn random_corpus(seed: u64, count: usize, p: &RandomSpecParams) -> Vec<AigerCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_spec(&mut rng, p)).collect()
}
