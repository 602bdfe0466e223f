//! Symbolic safety games built from specification circuits.

use std::collections::HashMap;

use thiserror::Error;

use crate::aiger::{AigerCircuit, AigerError, Literal};
use crate::bdd::{Bdd, BddManager, Var, VarSet};

#[derive(Debug, Error)]
pub enum GameError {
    #[error(transparent)]
    Aiger(#[from] AigerError),
    #[error("specification must have exactly one output, found {0}")]
    OutputCount(usize),
    #[error("state set depends on non-latch variable {0:?}")]
    NotAStateSet(Var),
}

/// Folds the AND gates of `c` into BDDs, given the functions of its inputs
/// and latches (keyed by AIGER variable index).
pub fn fold_circuit(
    m: &BddManager,
    c: &AigerCircuit,
    leaves: &HashMap<u32, Bdd>,
) -> Result<HashMap<u32, Bdd>, AigerError> {
    let mut fns = leaves.clone();
    for idx in c.topo_ands()? {
        let g = c.ands[idx];
        let a = literal_fn(m, &fns, g.rhs0);
        let b = literal_fn(m, &fns, g.rhs1);
        fns.insert(g.lhs.var(), m.and(&a, &b));
    }
    Ok(fns)
}

/// The function of `lit` once every variable it may mention has been folded.
pub fn literal_fn(m: &BddManager, fns: &HashMap<u32, Bdd>, lit: Literal) -> Bdd {
    let base = if lit.var() == 0 {
        m.ff()
    } else {
        fns[&lit.var()].clone()
    };
    if lit.is_negated() {
        m.not(&base)
    } else {
        base
    }
}

/// Game variables, ordered uncontrollable inputs, controllable inputs,
/// latches, each in file order.
pub struct SafetyGame {
    pub manager: BddManager,
    pub latch_vars: Vec<Var>,
    pub u_vars: Vec<Var>,
    pub c_vars: Vec<Var>,
    /// Next-state function of each latch, in file order.
    pub next_fns: Vec<Bdd>,
    pub error_fn: Bdd,
    /// The all-zero latch valuation.
    pub init: Bdd,
    /// AIGER literal of each game variable, indexed by variable id.
    pub var_lits: Vec<Literal>,
    /// Largest variable index of the specification.
    pub max_var: u32,
    u_set: VarSet,
    c_set: VarSet,
    latch_set: VarSet,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub realizable: bool,
    pub winning_region: Bdd,
    pub losing_attractor: Bdd,
    pub iterations: usize,
}

pub fn build_game(c: &AigerCircuit) -> Result<SafetyGame, GameError> {
    build_game_in(&BddManager::new(), c)
}

pub fn build_game_in(m: &BddManager, c: &AigerCircuit) -> Result<SafetyGame, GameError> {
    if c.outputs.len() != 1 {
        return Err(GameError::OutputCount(c.outputs.len()));
    }
    let mut leaves = HashMap::new();
    let mut var_lits = vec![Literal::FALSE; m.var_count()];
    let mut u_vars = Vec::new();
    let mut c_vars = Vec::new();
    for inp in c.uncontrollable_inputs() {
        let v = m.new_var();
        leaves.insert(inp.lit.var(), m.var(v));
        u_vars.push(v);
        var_lits.push(inp.lit);
    }
    for inp in c.controllable_inputs() {
        let v = m.new_var();
        leaves.insert(inp.lit.var(), m.var(v));
        c_vars.push(v);
        var_lits.push(inp.lit);
    }
    let mut latch_vars = Vec::new();
    for l in &c.latches {
        let v = m.new_var();
        leaves.insert(l.lit.var(), m.var(v));
        latch_vars.push(v);
        var_lits.push(l.lit);
    }
    let fns = fold_circuit(m, c, &leaves)?;
    let next_fns = c
        .latches
        .iter()
        .map(|l| literal_fn(m, &fns, l.next))
        .collect();
    let error_fn = literal_fn(m, &fns, c.outputs[0].lit);
    let zeros: Vec<Bdd> = latch_vars
        .iter()
        .map(|&v| m.literal(v, false).expect("latch variable exists"))
        .collect();
    let init = m.and_all(&zeros);
    Ok(SafetyGame {
        manager: m.clone(),
        u_set: m.var_set(&u_vars),
        c_set: m.var_set(&c_vars),
        latch_set: m.var_set(&latch_vars),
        latch_vars,
        u_vars,
        c_vars,
        next_fns,
        error_fn,
        init,
        var_lits,
        max_var: c.max_var,
    })
}

impl SafetyGame {
    pub fn u_set(&self) -> &VarSet {
        &self.u_set
    }

    pub fn c_set(&self) -> &VarSet {
        &self.c_set
    }

    pub fn latch_set(&self) -> &VarSet {
        &self.latch_set
    }

    /// `S[L ← next_fns(L, u, c)]`.
    pub fn substitute_next(&self, s: &Bdd) -> Bdd {
        let subst: Vec<(Var, Bdd)> = self
            .latch_vars
            .iter()
            .copied()
            .zip(self.next_fns.iter().cloned())
            .collect();
        self.manager.vector_compose(s, &subst)
    }

    pub fn check_state_set(&self, s: &Bdd) -> Result<(), GameError> {
        match self
            .manager
            .support(s)
            .into_iter()
            .find(|v| !self.latch_vars.contains(v))
        {
            Some(v) => Err(GameError::NotAStateSet(v)),
            None => Ok(()),
        }
    }

    /// States from which the environment forces, in one step, an error or
    /// entry into `s`: `∃u ∀c (error ∨ s[L ← next])`.
    pub fn upre(&self, s: &Bdd) -> Result<Bdd, GameError> {
        self.check_state_set(s)?;
        let m = &self.manager;
        let bad = m.or(&self.error_fn, &self.substitute_next(s));
        let escape = m.exists(&m.not(&bad), &self.c_set);
        Ok(m.exists(&m.not(&escape), &self.u_set))
    }

    /// Least fixpoint of `A ↦ A ∨ UPRE(A)` from `A = ⊥`.
    pub fn solve(&self) -> SolveOutcome {
        let m = &self.manager;
        let mut attractor = m.ff();
        let mut iterations = 0;
        loop {
            let next = m.or(
                &attractor,
                &self.upre(&attractor).expect("attractor is a state set"),
            );
            iterations += 1;
            let done = next == attractor || next.is_true();
            attractor = next;
            if done {
                break;
            }
        }
        let winning_region = m.not(&attractor);
        SolveOutcome {
            realizable: m.leq(&self.init, &winning_region),
            winning_region,
            losing_attractor: attractor,
            iterations,
        }
    }
}
