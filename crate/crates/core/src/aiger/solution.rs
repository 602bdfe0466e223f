use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use super::{AigerCircuit, AndGate, Definition, Literal};

/// Outcome of the syntactic solution check. Each flag is computed on its own.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SyntacticReport {
    /// Every latch, uncontrollable input, AND gate and the output of the
    /// specification appear unchanged, under the identity variable mapping.
    pub contains_spec: bool,
    /// Every controllable input is redefined as a gate whose cone reads only
    /// uncontrollable inputs, latches and constants.
    pub controllable_driven: bool,
    /// The solution's inputs are exactly the specification's uncontrollable
    /// inputs and its latches are exactly the specification's latches.
    pub interface_unchanged: bool,
    pub issues: Vec<String>,
}

impl SyntacticReport {
    pub fn passed(&self) -> bool {
        self.contains_spec && self.controllable_driven && self.interface_unchanged
    }
}

pub fn check_syntactic(spec: &AigerCircuit, sol: &AigerCircuit) -> SyntacticReport {
    let mut report = SyntacticReport::default();
    let sol_defs = sol.definitions();
    let sol_ands: HashSet<AndGate> = sol.ands.iter().copied().collect();
    let sol_inputs: HashSet<Literal> = sol.inputs.iter().map(|i| i.lit).collect();

    // (a) containment
    let mut contains = sol.max_var >= spec.max_var;
    if !contains {
        report
            .issues
            .push("solution has fewer variables than the specification".into());
    }
    for inp in spec.uncontrollable_inputs() {
        if !sol_inputs.contains(&inp.lit) {
            contains = false;
            report
                .issues
                .push(format!("uncontrollable input {} missing", inp.lit));
        }
    }
    for inp in spec.controllable_inputs() {
        if !sol_defs.contains_key(&inp.lit.var()) {
            contains = false;
            report
                .issues
                .push(format!("controllable input {} has no definition", inp.lit));
        }
    }
    for l in &spec.latches {
        if !sol
            .latches
            .iter()
            .any(|s| s.lit == l.lit && s.next == l.next)
        {
            contains = false;
            report
                .issues
                .push(format!("latch {} missing or rewired", l.lit));
        }
    }
    for g in &spec.ands {
        if !sol_ands.contains(g) {
            contains = false;
            report
                .issues
                .push(format!("AND gate {} missing or rewired", g.lhs));
        }
    }
    let spec_out: Vec<Literal> = spec.outputs.iter().map(|o| o.lit).collect();
    let sol_out: Vec<Literal> = sol.outputs.iter().map(|o| o.lit).collect();
    if spec_out != sol_out {
        contains = false;
        report
            .issues
            .push("outputs differ from the specification".into());
    }
    report.contains_spec = contains;

    // (b) controllable inputs driven by uncontrollable inputs and latches
    let controllable: HashSet<u32> = spec.controllable_inputs().map(|i| i.lit.var()).collect();
    let spec_uncontrollable: HashSet<u32> =
        spec.uncontrollable_inputs().map(|i| i.lit.var()).collect();
    let mut driven = true;
    for inp in spec.controllable_inputs() {
        let var = inp.lit.var();
        let Some(&Definition::And(idx)) = sol_defs.get(&var) else {
            driven = false;
            report.issues.push(format!(
                "controllable input {} is not driven by a gate",
                inp.lit
            ));
            continue;
        };
        let g = sol.ands[idx];
        let mut stack = vec![g.rhs0.var(), g.rhs1.var()];
        let mut seen = HashSet::new();
        while let Some(v) = stack.pop() {
            if v == 0 || !seen.insert(v) {
                continue;
            }
            if controllable.contains(&v) {
                driven = false;
                report.issues.push(format!(
                    "controllable input {} depends on controllable variable {v}",
                    inp.lit
                ));
                break;
            }
            match sol_defs.get(&v) {
                Some(Definition::And(i)) => {
                    let d = sol.ands[*i];
                    stack.push(d.rhs0.var());
                    stack.push(d.rhs1.var());
                }
                Some(Definition::Latch(_)) => {}
                Some(Definition::Input(_)) if spec_uncontrollable.contains(&v) => {}
                _ => {
                    driven = false;
                    report.issues.push(format!(
                        "controllable input {} depends on foreign variable {v}",
                        inp.lit
                    ));
                    break;
                }
            }
        }
    }
    report.controllable_driven = driven;

    // (c) interface
    let spec_in: HashSet<(Literal, Option<&str>)> = spec
        .uncontrollable_inputs()
        .map(|i| (i.lit, i.name.as_deref()))
        .collect();
    let sol_in: HashSet<(Literal, Option<&str>)> = sol
        .inputs
        .iter()
        .map(|i| (i.lit, i.name.as_deref()))
        .collect();
    let spec_l: HashSet<(Literal, Literal, Option<&str>)> = spec
        .latches
        .iter()
        .map(|l| (l.lit, l.next, l.name.as_deref()))
        .collect();
    let sol_l: HashSet<(Literal, Literal, Option<&str>)> = sol
        .latches
        .iter()
        .map(|l| (l.lit, l.next, l.name.as_deref()))
        .collect();
    report.interface_unchanged = true;
    if spec_in != sol_in || sol.inputs.len() != spec_in.len() {
        report.interface_unchanged = false;
        report
            .issues
            .push("input set differs from the uncontrollable inputs".into());
    }
    if spec_l != sol_l || sol.latches.len() != spec.latches.len() {
        report.interface_unchanged = false;
        report
            .issues
            .push("latch set differs from the specification".into());
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("controllable input {0} has no definition")]
    Undefined(Literal),
    #[error("{0} is not a controllable input of the specification")]
    NotControllable(Literal),
    #[error("literal {0} refers to a controllable input (cyclic control)")]
    CyclicControl(Literal),
    #[error(
        "literal {0} refers to logic outside latches, uncontrollable inputs and earlier new gates"
    )]
    ForeignReference(Literal),
    #[error("new gate {found} must have lhs {expected}")]
    BadNumbering { expected: Literal, found: Literal },
}

/// Appends controller logic to a specification. Each controllable input's
/// variable becomes a gate `c = def & 1`; those definition gates are not part
/// of `new_ands`.
pub fn merge_solution(
    spec: &AigerCircuit,
    defs: &BTreeMap<Literal, Literal>,
    new_ands: &[AndGate],
) -> Result<AigerCircuit, MergeError> {
    let controllable: HashSet<u32> = spec.controllable_inputs().map(|i| i.lit.var()).collect();
    for key in defs.keys() {
        if key.is_negated() || !controllable.contains(&key.var()) {
            return Err(MergeError::NotControllable(*key));
        }
    }
    let mut allowed: HashSet<u32> = spec
        .uncontrollable_inputs()
        .map(|i| i.lit.var())
        .chain(spec.latches.iter().map(|l| l.lit.var()))
        .collect();
    allowed.insert(0);
    let check = |lit: Literal, allowed: &HashSet<u32>| {
        if allowed.contains(&lit.var()) {
            Ok(())
        } else if controllable.contains(&lit.var()) {
            Err(MergeError::CyclicControl(lit))
        } else {
            Err(MergeError::ForeignReference(lit))
        }
    };
    for (k, g) in new_ands.iter().enumerate() {
        let expected = Literal::from_var(spec.max_var + 1 + k as u32, false);
        if g.lhs != expected {
            return Err(MergeError::BadNumbering {
                expected,
                found: g.lhs,
            });
        }
        check(g.rhs0, &allowed)?;
        check(g.rhs1, &allowed)?;
        allowed.insert(g.lhs.var());
    }
    let mut out = AigerCircuit {
        max_var: spec.max_var + new_ands.len() as u32,
        inputs: spec.uncontrollable_inputs().cloned().collect(),
        latches: spec.latches.clone(),
        ands: spec.ands.clone(),
        outputs: spec.outputs.clone(),
        comments: spec.comments.clone(),
    };
    out.ands.extend_from_slice(new_ands);
    for inp in spec.controllable_inputs() {
        let def = *defs.get(&inp.lit).ok_or(MergeError::Undefined(inp.lit))?;
        check(def, &allowed)?;
        out.ands.push(AndGate {
            lhs: inp.lit,
            rhs0: def,
            rhs1: Literal::TRUE,
        });
    }
    Ok(out)
}

/// Gate count `s` of a solution: AND gates beyond the specification's, not
/// counting the one definition gate per controllable input.
pub fn solution_size(spec: &AigerCircuit, sol: &AigerCircuit) -> usize {
    sol.ands
        .len()
        .saturating_sub(spec.ands.len() + spec.num_controllable())
}
