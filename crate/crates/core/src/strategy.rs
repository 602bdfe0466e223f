//! Controller extraction: permissive strategy, determinization by cofactors,
//! and encoding of the chosen functions as AND gates.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::aiger::{check_syntactic, merge_solution, AigerCircuit, AndGate, Literal, MergeError};
use crate::bdd::{Bdd, NodeView, Var};
use crate::game::{build_game, GameError, SafetyGame, SolveOutcome};
use crate::verify::Witness;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("no strategy exists: the specification is unrealizable")]
    Unrealizable,
    #[error("some winning state has no safe controllable move after resolution")]
    NonemptinessViolation,
    #[error("strategy function depends on controllable variable {0:?}")]
    DependsOnControllable(Var),
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error("merged solution fails the syntactic check: {0}")]
    Syntactic(String),
}

/// All controllable moves that keep the play winning.
#[derive(Clone, Debug)]
pub struct PermissiveStrategy {
    pub relation: Bdd,
}

/// Gates computing one literal per controllable input.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrategyNet {
    pub defs: BTreeMap<Literal, Literal>,
    pub new_ands: Vec<AndGate>,
}

impl StrategyNet {
    pub fn gate_count(&self) -> usize {
        self.new_ands.len()
    }
}

/// `¬W ∨ (¬error ∧ W[L ← next])`.
pub fn permissive_strategy(
    g: &SafetyGame,
    out: &SolveOutcome,
) -> Result<PermissiveStrategy, StrategyError> {
    if !out.realizable {
        return Err(StrategyError::Unrealizable);
    }
    let m = &g.manager;
    let w = &out.winning_region;
    let stay = m.and(&m.not(&g.error_fn), &g.substitute_next(w));
    Ok(PermissiveStrategy {
        relation: m.or(&m.not(w), &stay),
    })
}

/// One function of `(L, u)` per controllable input, in declaration order.
pub fn resolve(
    g: &SafetyGame,
    p: &PermissiveStrategy,
    winning_region: &Bdd,
) -> Result<Vec<Bdd>, StrategyError> {
    let m = &g.manager;
    let mut r = p.relation.clone();
    let mut fns = Vec::with_capacity(g.c_vars.len());
    for (i, &c) in g.c_vars.iter().enumerate() {
        let later = m.var_set(&g.c_vars[i + 1..]);
        let pos = m.cofactor(&r, c, true);
        let neg = m.cofactor(&r, c, false);
        let must_set = m.exists(&pos, &later);
        let may_clear = m.exists(&neg, &later);
        let forced = m.and(&must_set, &m.not(&may_clear));
        let care = m.xor(&must_set, &may_clear);
        let simplified = m.restrict(&must_set, &care);
        let f = if m.node_count(&simplified) < m.node_count(&forced) {
            simplified
        } else {
            forced
        };
        r = m.ite(&f, &pos, &neg);
        fns.push(f);
    }
    let always = m.forall(&r, g.u_set());
    if !m.leq(winning_region, &always) {
        return Err(StrategyError::NonemptinessViolation);
    }
    Ok(fns)
}

struct Encoder<'a> {
    game: &'a SafetyGame,
    next_var: u32,
    gates: Vec<AndGate>,
    strash: HashMap<(Literal, Literal), Literal>,
    nodes: HashMap<u32, Literal>,
}

impl Encoder<'_> {
    fn and(&mut self, a: Literal, b: Literal) -> Literal {
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
        if let Some(&lit) = self.strash.get(&key) {
            return lit;
        }
        let lhs = Literal::from_var(self.next_var, false);
        self.next_var += 1;
        self.gates.push(AndGate {
            lhs,
            rhs0: key.0,
            rhs1: key.1,
        });
        self.strash.insert(key, lhs);
        lhs
    }

    fn encode(&mut self, f: &Bdd) -> Literal {
        let m = &self.game.manager;
        let id = m.node_id(f);
        if let Some(&lit) = self.nodes.get(&id) {
            return lit;
        }
        let lit = match m.view(f) {
            NodeView::Const(false) => Literal::FALSE,
            NodeView::Const(true) => Literal::TRUE,
            NodeView::Decision { var, hi, lo } => {
                let v = self.game.var_lits[var.index()];
                let h = self.encode(&hi);
                let l = self.encode(&lo);
                let t = self.and(v, h);
                let e = self.and(!v, l);
                !self.and(!t, !e)
            }
        };
        self.nodes.insert(id, lit);
        lit
    }
}

/// Encodes each `fns[i]` as gates numbered after the specification's
/// variables; shared BDD nodes are encoded once.
pub fn encode_circuit(g: &SafetyGame, fns: &[Bdd]) -> Result<StrategyNet, StrategyError> {
    let m = &g.manager;
    for f in fns {
        if let Some(v) = m.support(f).into_iter().find(|v| g.c_vars.contains(v)) {
            return Err(StrategyError::DependsOnControllable(v));
        }
    }
    let mut enc = Encoder {
        game: g,
        next_var: g.max_var + 1,
        gates: Vec::new(),
        strash: HashMap::new(),
        nodes: HashMap::new(),
    };
    let mut defs = BTreeMap::new();
    for (f, &c) in fns.iter().zip(&g.c_vars) {
        let lit = enc.encode(f);
        defs.insert(g.var_lits[c.index()], lit);
    }
    Ok(StrategyNet {
        defs,
        new_ands: enc.gates,
    })
}

#[derive(Clone, Debug)]
pub enum SynthesisResult {
    Unrealizable {
        iterations: usize,
    },
    Realizable {
        solution: AigerCircuit,
        witness: Witness,
        /// Gates added for the controller.
        size: usize,
        iterations: usize,
    },
}

impl SynthesisResult {
    pub fn is_realizable(&self) -> bool {
        matches!(self, SynthesisResult::Realizable { .. })
    }
}

/// Solves the game and, if realizable, returns the controlled circuit and the
/// winning region as its witness.
pub fn synthesize(spec: &AigerCircuit) -> Result<SynthesisResult, StrategyError> {
    let g = build_game(spec)?;
    let out = g.solve();
    if !out.realizable {
        return Ok(SynthesisResult::Unrealizable {
            iterations: out.iterations,
        });
    }
    let p = permissive_strategy(&g, &out)?;
    let fns = resolve(&g, &p, &out.winning_region)?;
    drop(p);
    let net = encode_circuit(&g, &fns)?;
    let solution = merge_solution(spec, &net.defs, &net.new_ands)?;
    let report = check_syntactic(spec, &solution);
    if !report.passed() {
        return Err(StrategyError::Syntactic(report.issues.join("; ")));
    }
    let labels = (0..spec.latches.len())
        .map(|i| spec.latch_label(i))
        .collect();
    let witness = Witness::from_region(&g.manager, &out.winning_region, &g.latch_vars, labels);
    Ok(SynthesisResult::Realizable {
        size: net.gate_count(),
        solution,
        witness,
        iterations: out.iterations,
    })
}

/// Solves the game only.
pub fn check_realizability(spec: &AigerCircuit) -> Result<SolveOutcome, StrategyError> {
    Ok(build_game(spec)?.solve())
}
