//! Checking claimed solutions: inductive-invariant witnesses first, symbolic
//! forward reachability as the fallback.

mod witness;

use std::collections::HashMap;
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aiger::{check_syntactic, AigerCircuit, AigerError};
use crate::bdd::{Bdd, BddManager, Var, VarSet};
use crate::game::{fold_circuit, literal_fn};

pub use witness::{describe, Witness, WitnessError};

pub const DEFAULT_MC_BUDGET: Duration = Duration::from_secs(600);

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Aiger(#[from] AigerError),
    #[error("circuit must have exactly one output, found {0}")]
    OutputCount(usize),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictStatus {
    VerifiedInvariant,
    VerifiedModelCheck,
    SyntacticFail,
    SemanticFail,
    Timeout,
}

impl VerdictStatus {
    pub fn is_verified(self) -> bool {
        matches!(
            self,
            VerdictStatus::VerifiedInvariant | VerdictStatus::VerifiedModelCheck
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictStatus::VerifiedInvariant => "VERIFIED_INVARIANT",
            VerdictStatus::VerifiedModelCheck => "VERIFIED_MODEL_CHECK",
            VerdictStatus::SyntacticFail => "SYNTACTIC_FAIL",
            VerdictStatus::SemanticFail => "SEMANTIC_FAIL",
            VerdictStatus::Timeout => "TIMEOUT",
        }
    }
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Input frames leading from the initial state to an error. Frames are
/// indexed like the circuit's inputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub transitions: Vec<Vec<bool>>,
    pub final_inputs: Vec<bool>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Every frame in order; the last one raises the error.
    pub fn frames(&self) -> Vec<Vec<bool>> {
        let mut f = self.transitions.clone();
        f.push(self.final_inputs.clone());
        f
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyStats {
    pub iterations: usize,
    pub nodes: usize,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub counterexample: Option<Trace>,
    pub stats: VerifyStats,
    pub detail: Option<String>,
}

impl Verdict {
    fn new(status: VerdictStatus, stats: VerifyStats) -> Self {
        Verdict {
            status,
            counterexample: None,
            stats,
            detail: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantClause {
    /// The initial state is outside the region.
    Initiation,
    /// Some state in the region raises the error for some input.
    Safety,
    /// Some input leads from the region to outside it.
    Consecution,
}

impl fmt::Display for InvariantClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InvariantClause::Initiation => "initial state not in region",
            InvariantClause::Safety => "region intersects the error",
            InvariantClause::Consecution => "region not closed under transitions",
        })
    }
}

/// A circuit with every input free, as symbolic functions over
/// `(inputs, latches)`.
pub struct ClosedLoop {
    pub manager: BddManager,
    pub input_vars: Vec<Var>,
    pub latch_vars: Vec<Var>,
    /// Shadow next-state variable of each latch, interleaved with the latch
    /// in the order.
    pub next_vars: Vec<Var>,
    pub next_fns: Vec<Bdd>,
    pub error_fn: Bdd,
    pub init: Bdd,
    pub latch_labels: Vec<String>,
    input_set: VarSet,
}

impl ClosedLoop {
    pub fn build(c: &AigerCircuit) -> Result<Self, VerifyError> {
        if c.outputs.len() != 1 {
            return Err(VerifyError::OutputCount(c.outputs.len()));
        }
        let m = BddManager::new();
        let mut leaves = HashMap::new();
        let input_vars: Vec<Var> = c
            .inputs
            .iter()
            .map(|i| {
                let v = m.new_var();
                leaves.insert(i.lit.var(), m.var(v));
                v
            })
            .collect();
        let mut latch_vars = Vec::new();
        let mut next_vars = Vec::new();
        for l in &c.latches {
            let v = m.new_var();
            leaves.insert(l.lit.var(), m.var(v));
            latch_vars.push(v);
            next_vars.push(m.new_var());
        }
        let fns = fold_circuit(&m, c, &leaves)?;
        let next_fns = c
            .latches
            .iter()
            .map(|l| literal_fn(&m, &fns, l.next))
            .collect();
        let error_fn = literal_fn(&m, &fns, c.outputs[0].lit);
        let zeros: Vec<Bdd> = latch_vars
            .iter()
            .map(|&v| m.literal(v, false).expect("latch variable exists"))
            .collect();
        let init = m.and_all(&zeros);
        Ok(ClosedLoop {
            input_set: m.var_set(&input_vars),
            latch_labels: (0..c.latches.len()).map(|i| c.latch_label(i)).collect(),
            manager: m,
            input_vars,
            latch_vars,
            next_vars,
            next_fns,
            error_fn,
            init,
        })
    }

    pub fn substitute_next(&self, s: &Bdd) -> Bdd {
        let subst: Vec<(Var, Bdd)> = self
            .latch_vars
            .iter()
            .copied()
            .zip(self.next_fns.iter().cloned())
            .collect();
        self.manager.vector_compose(s, &subst)
    }

    pub fn region(&self, w: &Witness) -> Result<Bdd, WitnessError> {
        w.to_bdd(&self.manager, &self.latch_vars, &self.latch_labels)
    }

    /// The three inductive-invariant clauses, checked in order.
    pub fn check_region(&self, region: &Bdd) -> Result<(), InvariantClause> {
        let m = &self.manager;
        if !m.leq(&self.init, region) {
            return Err(InvariantClause::Initiation);
        }
        if !m.and(region, &self.error_fn).is_false() {
            return Err(InvariantClause::Safety);
        }
        let stays = m.forall(&self.substitute_next(region), &self.input_set);
        if !m.leq(region, &stays) {
            return Err(InvariantClause::Consecution);
        }
        Ok(())
    }

    fn assignment(&self, cube: &[(Var, bool)]) -> HashMap<Var, bool> {
        cube.iter().copied().collect()
    }

    fn values(vars: &[Var], assignment: &HashMap<Var, bool>) -> Vec<bool> {
        vars.iter()
            .map(|v| assignment.get(v).copied().unwrap_or(false))
            .collect()
    }

    fn state_cube(&self, state: &[bool]) -> Bdd {
        let m = &self.manager;
        let lits: Vec<Bdd> = self
            .latch_vars
            .iter()
            .zip(state)
            .map(|(&v, &b)| m.literal(v, b).expect("latch variable exists"))
            .collect();
        m.and_all(&lits)
    }

    /// Forward reachability from the initial state.
    pub fn model_check(&self, budget: Duration) -> Verdict {
        let start = Instant::now();
        let m = &self.manager;
        let stats = |iterations: usize, nodes: usize| VerifyStats {
            iterations,
            nodes,
            wall_time: start.elapsed(),
        };
        if self.error_fn.is_false() {
            return Verdict::new(VerdictStatus::VerifiedModelCheck, stats(1, 1));
        }
        let relation_parts: Vec<Bdd> = self
            .next_vars
            .iter()
            .zip(&self.next_fns)
            .map(|(&v, f)| m.iff(&m.var(v), f))
            .collect();
        let relation = m.and_all(&relation_parts);
        let current: Vec<Var> = self
            .input_vars
            .iter()
            .chain(&self.latch_vars)
            .copied()
            .collect();
        let current_set = m.var_set(&current);
        let rename: Vec<(Var, Bdd)> = self
            .next_vars
            .iter()
            .zip(&self.latch_vars)
            .map(|(&n, &l)| (n, m.var(l)))
            .collect();

        let mut reached = self.init.clone();
        let mut frontiers = vec![self.init.clone()];
        let mut peak = 1;
        loop {
            let frontier = frontiers
                .last()
                .expect("at least the initial frontier")
                .clone();
            let bad = m.and(&frontier, &self.error_fn);
            if !bad.is_false() {
                let mut v = Verdict::new(VerdictStatus::SemanticFail, stats(frontiers.len(), peak));
                v.counterexample = Some(self.extract_trace(&frontiers, &bad));
                return v;
            }
            if start.elapsed() >= budget {
                return Verdict::new(VerdictStatus::Timeout, stats(frontiers.len(), peak));
            }
            let image =
                m.vector_compose(&m.and_exists(&frontier, &relation, &current_set), &rename);
            let new = m.and(&image, &m.not(&reached));
            if new.is_false() {
                return Verdict::new(
                    VerdictStatus::VerifiedModelCheck,
                    stats(frontiers.len(), peak),
                );
            }
            reached = m.or(&reached, &new);
            peak = peak.max(m.node_count(&reached));
            frontiers.push(new);
        }
    }

    fn extract_trace(&self, frontiers: &[Bdd], bad: &Bdd) -> Trace {
        let m = &self.manager;
        let cube = m.pick_cube(bad).expect("bad set is nonempty");
        let a = self.assignment(&cube);
        let final_inputs = Self::values(&self.input_vars, &a);
        let mut target = Self::values(&self.latch_vars, &a);
        let mut transitions = Vec::new();
        for f in frontiers[..frontiers.len() - 1].iter().rev() {
            let hits: Vec<Bdd> = self
                .next_fns
                .iter()
                .zip(&target)
                .map(|(g, &b)| if b { g.clone() } else { m.not(g) })
                .collect();
            let pre = m.and(f, &m.and_all(&hits));
            let cube = m.pick_cube(&pre).expect("frontier state has a predecessor");
            let a = self.assignment(&cube);
            transitions.push(Self::values(&self.input_vars, &a));
            target = Self::values(&self.latch_vars, &a);
        }
        debug_assert!(m.leq(&self.state_cube(&target), &self.init));
        transitions.reverse();
        Trace {
            transitions,
            final_inputs,
        }
    }
}

/// Checks `w` against `sol` as an inductive invariant of the closed loop.
pub fn check_invariant(
    sol: &AigerCircuit,
    w: &Witness,
) -> Result<Result<(), InvariantClause>, VerifyError> {
    let cl = ClosedLoop::build(sol)?;
    let region = cl.region(w)?;
    Ok(cl.check_region(&region))
}

pub fn model_check(sol: &AigerCircuit, budget: Duration) -> Result<Verdict, VerifyError> {
    Ok(ClosedLoop::build(sol)?.model_check(budget))
}

/// Syntactic check, then the witness if one parses and fits, then model
/// checking. A rejected witness only forces the fallback.
pub fn verify_pipeline(
    spec: &AigerCircuit,
    sol: &AigerCircuit,
    witness: Option<&str>,
    budget: Duration,
) -> Verdict {
    let start = Instant::now();
    let report = check_syntactic(spec, sol);
    if !report.passed() {
        let mut v = Verdict::new(VerdictStatus::SyntacticFail, VerifyStats::default());
        v.detail = Some(report.issues.join("; "));
        v.stats.wall_time = start.elapsed();
        return v;
    }
    let cl = match ClosedLoop::build(sol) {
        Ok(cl) => cl,
        Err(e) => {
            let mut v = Verdict::new(VerdictStatus::SyntacticFail, VerifyStats::default());
            v.detail = Some(e.to_string());
            return v;
        }
    };
    let mut note = None;
    if let Some(text) = witness {
        match Witness::parse(text).and_then(|w| cl.region(&w)) {
            Ok(region) => match cl.check_region(&region) {
                Ok(()) => {
                    let stats = VerifyStats {
                        iterations: 1,
                        nodes: cl.manager.node_count(&region),
                        wall_time: start.elapsed(),
                    };
                    return Verdict::new(VerdictStatus::VerifiedInvariant, stats);
                }
                Err(clause) => note = Some(format!("witness rejected: {clause}")),
            },
            Err(e) => note = Some(format!("witness unusable: {e}")),
        }
    }
    let mut v = cl.model_check(budget);
    v.detail = note;
    v.stats.wall_time = start.elapsed();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aiger::{parse_ascii, ParseMode};

    fn circuit(text: &str) -> AigerCircuit {
        parse_ascii(text, ParseMode::Circuit).unwrap()
    }

    fn witness(labels: &[&str], cubes: &[&str]) -> Witness {
        let mut text = format!("WINNING_REGION\nlatches: {}\n", labels.join(" "));
        for c in cubes {
            text.push_str(c);
            text.push('\n');
        }
        Witness::parse(&text).unwrap()
    }

    // one latch l (var 2) stepping to input i; error = l
    const DELAY: &str = "aag 2 1 1 1 0\n2\n4 2\n4\n";

    #[test]
    fn invariant_clauses() {
        let safe = circuit("aag 1 0 1 1 0\n2 0\n2\n");
        assert_eq!(
            check_invariant(&safe, &witness(&["l0"], &["-"])).unwrap(),
            Err(InvariantClause::Safety)
        );
        assert_eq!(
            check_invariant(&safe, &witness(&["l0"], &["0"])).unwrap(),
            Ok(())
        );
        assert_eq!(
            check_invariant(&safe, &witness(&["l0"], &["1"])).unwrap(),
            Err(InvariantClause::Initiation)
        );
        let free = circuit("aag 0 0 0 1 0\n0\n");
        assert_eq!(
            check_invariant(&free, &witness(&[], &[""])).unwrap(),
            Ok(())
        );
        let delay = circuit(DELAY);
        assert_eq!(
            check_invariant(&delay, &witness(&["l0"], &["0"])).unwrap(),
            Err(InvariantClause::Consecution)
        );
        assert!(matches!(
            check_invariant(&delay, &witness(&["other"], &["0"])),
            Err(VerifyError::Witness(WitnessError::WrongLatches { .. }))
        ));
    }

    #[test]
    fn model_check_finds_short_trace() {
        let v = model_check(&circuit(DELAY), DEFAULT_MC_BUDGET).unwrap();
        assert_eq!(v.status, VerdictStatus::SemanticFail);
        let t = v.counterexample.unwrap();
        assert_eq!(t.transitions, vec![vec![true]]);

        let v = model_check(&circuit("aag 0 0 0 1 0\n0\n"), DEFAULT_MC_BUDGET).unwrap();
        assert_eq!(v.status, VerdictStatus::VerifiedModelCheck);
        assert_eq!(v.stats.iterations, 1);

        let v = model_check(&circuit("aag 0 0 0 1 0\n1\n"), DEFAULT_MC_BUDGET).unwrap();
        assert!(v.counterexample.unwrap().is_empty());
    }

    #[test]
    fn zero_budget_times_out() {
        // l' = !l, error = never reached but the loop takes one image
        let c = circuit("aag 3 1 1 1 1\n2\n4 5\n6\n6 4 2\n");
        let v = model_check(&c, Duration::ZERO).unwrap();
        assert_eq!(v.status, VerdictStatus::Timeout);
    }
}
