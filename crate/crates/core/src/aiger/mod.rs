//! And-inverter graphs in the AIGER format, extended with controllable inputs.
//!
//! Inputs whose symbol name starts with [`CONTROLLABLE_PREFIX`] belong to the
//! system player; every other input belongs to the environment. A
//! specification has exactly one output, the error signal, and all latches
//! reset to 0.

mod ascii;
mod binary;
mod meta;
mod solution;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Not;

use thiserror::Error;

pub use ascii::{parse_ascii, serialize_ascii};
pub use binary::parse_binary;
pub use meta::{read_meta, write_meta, BenchmarkMeta, MetaError, Realizability};
pub use solution::{check_syntactic, merge_solution, solution_size, MergeError, SyntacticReport};

/// Symbol-name prefix that marks an input as controllable.
pub const CONTROLLABLE_PREFIX: &str = "controllable_";

/// An AIGER literal: `2 * var` for the positive phase, `2 * var + 1` for the
/// negated one. Literals 0 and 1 are the constants false and true.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Literal(u32);

impl Literal {
    pub const FALSE: Literal = Literal(0);
    pub const TRUE: Literal = Literal(1);

    pub const fn from_raw(raw: u32) -> Self {
        Literal(raw)
    }

    pub const fn from_var(var: u32, negated: bool) -> Self {
        Literal(2 * var + negated as u32)
    }

    pub const fn raw(self) -> u32 {
        self.0
    }

    pub const fn var(self) -> u32 {
        self.0 / 2
    }

    pub const fn is_negated(self) -> bool {
        self.0 % 2 == 1
    }

    pub const fn is_constant(self) -> bool {
        self.0 < 2
    }

    pub const fn negate(self) -> Self {
        Literal(self.0 ^ 1)
    }

    /// The positive-phase literal of the same variable.
    pub const fn positive(self) -> Self {
        Literal(self.0 & !1)
    }

    pub const fn negate_if(self, cond: bool) -> Self {
        Literal(self.0 ^ cond as u32)
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        self.negate()
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Input {
    pub lit: Literal,
    pub name: Option<String>,
    pub controllable: bool,
}

impl Input {
    /// Builds an input, deriving the controllable flag from the name.
    pub fn new(lit: Literal, name: Option<String>) -> Self {
        let controllable = name
            .as_deref()
            .is_some_and(|n| n.starts_with(CONTROLLABLE_PREFIX));
        Input {
            lit,
            name,
            controllable,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Latch {
    pub lit: Literal,
    pub next: Literal,
    pub name: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AndGate {
    pub lhs: Literal,
    pub rhs0: Literal,
    pub rhs1: Literal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub lit: Literal,
    pub name: Option<String>,
}

/// How strictly a circuit is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseMode {
    /// Exactly one output, and every AND's lhs exceeds both of its inputs.
    Specification,
    /// Any number of outputs; AND definitions need only be acyclic. Solutions
    /// are parsed this way because a controllable input's variable is
    /// redefined by a gate over higher-numbered logic.
    Circuit,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AigerCircuit {
    pub max_var: u32,
    pub inputs: Vec<Input>,
    pub latches: Vec<Latch>,
    pub ands: Vec<AndGate>,
    pub outputs: Vec<Output>,
    pub comments: Vec<String>,
}

/// Where in the source an error was detected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    Byte(usize),
    Circuit,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Byte(n) => write!(f, "byte {n}"),
            Location::Circuit => write!(f, "circuit"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AigerErrorKind {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed line: {0}")]
    MalformedLine(String),
    #[error("literal {0} out of range")]
    LiteralOutOfRange(u32),
    #[error("literal {0} must be even and non-constant here")]
    NotAVariable(u32),
    #[error("AND ordering violation: lhs {lhs} must exceed rhs {rhs}")]
    OrderingViolation { lhs: u32, rhs: u32 },
    #[error("cyclic AND definition through variable {0}")]
    Cycle(u32),
    #[error("duplicate definition of variable {0}")]
    DuplicateDefinition(u32),
    #[error("variable {0} is never defined")]
    UndefinedVariable(u32),
    #[error("specification must have exactly one output, found {0}")]
    OutputCount(usize),
    #[error("latch {latch} has unsupported reset value {reset} (only 0 is supported)")]
    UnsupportedReset { latch: u32, reset: u32 },
    #[error("unsupported AIGER feature: {0}")]
    Unsupported(String),
    #[error("truncated stream")]
    Truncated,
    #[error("non-monotone delta")]
    NonMonotoneDelta,
    #[error("header/body mismatch: {0}")]
    HeaderMismatch(String),
    #[error("malformed symbol: {0}")]
    MalformedSymbol(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{location}: {kind}")]
pub struct AigerError {
    pub location: Location,
    pub kind: AigerErrorKind,
}

impl AigerError {
    pub(crate) fn at_line(line: usize, kind: AigerErrorKind) -> Self {
        AigerError {
            location: Location::Line(line),
            kind,
        }
    }

    pub(crate) fn circuit(kind: AigerErrorKind) -> Self {
        AigerError {
            location: Location::Circuit,
            kind,
        }
    }
}

/// What defines a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definition {
    Input(usize),
    Latch(usize),
    And(usize),
}

impl AigerCircuit {
    /// Parses either encoding, dispatching on the `aag`/`aig` header.
    pub fn from_bytes(bytes: &[u8], mode: ParseMode) -> Result<Self, AigerError> {
        if bytes.starts_with(b"aig ") {
            parse_binary(bytes, mode)
        } else {
            let text = std::str::from_utf8(bytes).map_err(|_| {
                AigerError::at_line(1, AigerErrorKind::MalformedHeader("not UTF-8 text".into()))
            })?;
            parse_ascii(text, mode)
        }
    }

    pub fn controllable_inputs(&self) -> impl Iterator<Item = &Input> {
        self.inputs.iter().filter(|i| i.controllable)
    }

    pub fn uncontrollable_inputs(&self) -> impl Iterator<Item = &Input> {
        self.inputs.iter().filter(|i| !i.controllable)
    }

    pub fn num_controllable(&self) -> usize {
        self.controllable_inputs().count()
    }

    /// The single error output of a specification.
    pub fn error_output(&self) -> Option<Literal> {
        match self.outputs.as_slice() {
            [o] => Some(o.lit),
            _ => None,
        }
    }

    /// Maps every defined variable to its definition.
    pub fn definitions(&self) -> HashMap<u32, Definition> {
        let mut defs = HashMap::with_capacity(self.max_var as usize);
        for (i, inp) in self.inputs.iter().enumerate() {
            defs.insert(inp.lit.var(), Definition::Input(i));
        }
        for (i, l) in self.latches.iter().enumerate() {
            defs.insert(l.lit.var(), Definition::Latch(i));
        }
        for (i, g) in self.ands.iter().enumerate() {
            defs.insert(g.lhs.var(), Definition::And(i));
        }
        defs
    }

    /// Indices of the AND gates in an order where every gate comes after the
    /// gates it reads.
    pub fn topo_ands(&self) -> Result<Vec<usize>, AigerError> {
        let by_var: HashMap<u32, usize> = self
            .ands
            .iter()
            .enumerate()
            .map(|(i, g)| (g.lhs.var(), i))
            .collect();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.ands.len()];
        let mut order = Vec::with_capacity(self.ands.len());
        let mut stack: Vec<(usize, bool)> = Vec::new();
        for root in 0..self.ands.len() {
            if state[root] != 0 {
                continue;
            }
            stack.push((root, false));
            while let Some((idx, expanded)) = stack.pop() {
                if expanded {
                    state[idx] = 2;
                    order.push(idx);
                    continue;
                }
                match state[idx] {
                    2 => continue,
                    1 => {
                        return Err(AigerError::circuit(AigerErrorKind::Cycle(
                            self.ands[idx].lhs.var(),
                        )))
                    }
                    _ => {}
                }
                state[idx] = 1;
                stack.push((idx, true));
                let g = self.ands[idx];
                for rhs in [g.rhs0, g.rhs1] {
                    if let Some(&child) = by_var.get(&rhs.var()) {
                        match state[child] {
                            0 => stack.push((child, false)),
                            1 => return Err(AigerError::circuit(AigerErrorKind::Cycle(rhs.var()))),
                            _ => {}
                        }
                    }
                }
            }
        }
        Ok(order)
    }

    /// Checks every structural invariant. Parsers call this after reading.
    pub fn validate(&self, mode: ParseMode) -> Result<(), AigerError> {
        let max_lit = 2 * self.max_var + 1;
        let mut defined = HashSet::with_capacity(self.max_var as usize);
        let mut define = |lit: Literal| -> Result<(), AigerError> {
            if lit.raw() > max_lit {
                return Err(AigerError::circuit(AigerErrorKind::LiteralOutOfRange(
                    lit.raw(),
                )));
            }
            if lit.is_negated() || lit.is_constant() {
                return Err(AigerError::circuit(AigerErrorKind::NotAVariable(lit.raw())));
            }
            if !defined.insert(lit.var()) {
                return Err(AigerError::circuit(AigerErrorKind::DuplicateDefinition(
                    lit.var(),
                )));
            }
            Ok(())
        };
        for i in &self.inputs {
            define(i.lit)?;
        }
        for l in &self.latches {
            define(l.lit)?;
        }
        for g in &self.ands {
            define(g.lhs)?;
        }
        let in_range = |lit: Literal| -> Result<(), AigerError> {
            if lit.raw() > max_lit {
                Err(AigerError::circuit(AigerErrorKind::LiteralOutOfRange(
                    lit.raw(),
                )))
            } else {
                Ok(())
            }
        };
        for l in &self.latches {
            in_range(l.next)?;
        }
        for o in &self.outputs {
            in_range(o.lit)?;
        }
        for g in &self.ands {
            in_range(g.rhs0)?;
            in_range(g.rhs1)?;
            if mode == ParseMode::Specification {
                for rhs in [g.rhs0, g.rhs1] {
                    if rhs.raw() >= g.lhs.raw() {
                        return Err(AigerError::circuit(AigerErrorKind::OrderingViolation {
                            lhs: g.lhs.raw(),
                            rhs: rhs.raw(),
                        }));
                    }
                }
            }
        }
        if let Some(v) = (1..=self.max_var).find(|v| !defined.contains(v)) {
            return Err(AigerError::circuit(AigerErrorKind::UndefinedVariable(v)));
        }
        for i in &self.inputs {
            let marked = i
                .name
                .as_deref()
                .is_some_and(|n| n.starts_with(CONTROLLABLE_PREFIX));
            if marked != i.controllable {
                return Err(AigerError::circuit(AigerErrorKind::MalformedSymbol(
                    format!(
                        "controllable flag of input {} disagrees with its name",
                        i.lit
                    ),
                )));
            }
        }
        if mode == ParseMode::Specification && self.outputs.len() != 1 {
            return Err(AigerError::circuit(AigerErrorKind::OutputCount(
                self.outputs.len(),
            )));
        }
        if mode == ParseMode::Circuit {
            self.topo_ands()?;
        }
        Ok(())
    }

    /// Latch name used in witness files: the symbol if it is a single
    /// non-empty word, else `l<index>`.
    pub fn latch_label(&self, index: usize) -> String {
        match &self.latches[index].name {
            Some(n) if !n.is_empty() && !n.contains(char::is_whitespace) => n.clone(),
            _ => format!("l{index}"),
        }
    }
}
