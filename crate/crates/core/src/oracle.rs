//! Explicit-state reference solvers used as ground truth in tests.
//!
//! Everything here works on concrete bit vectors through a direct gate
//! simulator; nothing is shared with the symbolic path.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::aiger::{AigerCircuit, Literal};

pub const MAX_LATCHES: usize = 16;
pub const MAX_INPUTS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{latches} latches and {inputs} inputs exceed the explicit-state bound")]
    TooLarge { latches: usize, inputs: usize },
    #[error("circuit must have exactly one output, found {0}")]
    OutputCount(usize),
    #[error("variable {0} has no definition")]
    Undefined(u32),
    #[error("combinational cycle through variable {0}")]
    Cycle(u32),
}

#[derive(Clone, Copy)]
enum Source {
    Input(usize),
    Latch(usize),
    And(Literal, Literal),
}

/// Gate-level simulator over a circuit's inputs (file order) and latches.
pub struct Simulator<'a> {
    circuit: &'a AigerCircuit,
    sources: HashMap<u32, Source>,
}

impl<'a> Simulator<'a> {
    pub fn new(circuit: &'a AigerCircuit) -> Result<Self, OracleError> {
        let mut sources = HashMap::new();
        for (i, inp) in circuit.inputs.iter().enumerate() {
            sources.insert(inp.lit.var(), Source::Input(i));
        }
        for (i, l) in circuit.latches.iter().enumerate() {
            sources.insert(l.lit.var(), Source::Latch(i));
        }
        for g in &circuit.ands {
            sources.insert(g.lhs.var(), Source::And(g.rhs0, g.rhs1));
        }
        let sim = Simulator { circuit, sources };
        // surface undefined variables and cycles once, up front
        let latches = vec![false; circuit.latches.len()];
        let inputs = vec![false; circuit.inputs.len()];
        sim.try_step(&latches, &inputs)?;
        Ok(sim)
    }

    fn value(
        &self,
        lit: Literal,
        latches: &[bool],
        inputs: &[bool],
        memo: &mut HashMap<u32, Option<bool>>,
    ) -> Result<bool, OracleError> {
        let var = lit.var();
        let v = if var == 0 {
            false
        } else {
            match memo.get(&var) {
                Some(Some(b)) => *b,
                Some(None) => return Err(OracleError::Cycle(var)),
                None => {
                    memo.insert(var, None);
                    let b = match self.sources.get(&var) {
                        Some(Source::Input(i)) => inputs[*i],
                        Some(Source::Latch(i)) => latches[*i],
                        Some(Source::And(a, b)) => {
                            self.value(*a, latches, inputs, memo)?
                                && self.value(*b, latches, inputs, memo)?
                        }
                        None => return Err(OracleError::Undefined(var)),
                    };
                    memo.insert(var, Some(b));
                    b
                }
            }
        };
        Ok(v ^ lit.is_negated())
    }

    fn try_step(&self, latches: &[bool], inputs: &[bool]) -> Result<Step, OracleError> {
        let mut memo = HashMap::new();
        let next = self
            .circuit
            .latches
            .iter()
            .map(|l| self.value(l.next, latches, inputs, &mut memo))
            .collect::<Result<_, _>>()?;
        let outputs = self
            .circuit
            .outputs
            .iter()
            .map(|o| self.value(o.lit, latches, inputs, &mut memo))
            .collect::<Result<_, _>>()?;
        Ok(Step { next, outputs })
    }

    /// One clock cycle from the given latch and input values.
    pub fn step(&self, latches: &[bool], inputs: &[bool]) -> Step {
        self.try_step(latches, inputs)
            .expect("circuit validated when the simulator was built")
    }

    /// Runs `inputs` from the all-zero state and reports whether output 0 is
    /// raised at the final step.
    pub fn replay(&self, inputs: &[Vec<bool>]) -> bool {
        let mut state = vec![false; self.circuit.latches.len()];
        let mut last = false;
        for frame in inputs {
            let s = self.step(&state, frame);
            last = s.outputs.first().copied().unwrap_or(false);
            state = s.next;
        }
        last
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub next: Vec<bool>,
    pub outputs: Vec<bool>,
}

fn bits(value: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| value >> i & 1 == 1).collect()
}

fn pack(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
}

fn check_size(c: &AigerCircuit) -> Result<(), OracleError> {
    if c.latches.len() > MAX_LATCHES || c.inputs.len() > MAX_INPUTS {
        return Err(OracleError::TooLarge {
            latches: c.latches.len(),
            inputs: c.inputs.len(),
        });
    }
    if c.outputs.len() != 1 {
        return Err(OracleError::OutputCount(c.outputs.len()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitSolution {
    pub realizable: bool,
    /// Indexed by latch valuation, bit `i` = latch `i`.
    pub winning: Vec<bool>,
    pub rounds: usize,
}

/// Backward induction on the explicit game graph.
pub fn explicit_solve(c: &AigerCircuit) -> Result<ExplicitSolution, OracleError> {
    check_size(c)?;
    let sim = Simulator::new(c)?;
    let u_pos: Vec<usize> = (0..c.inputs.len())
        .filter(|&i| !c.inputs[i].controllable)
        .collect();
    let c_pos: Vec<usize> = (0..c.inputs.len())
        .filter(|&i| c.inputs[i].controllable)
        .collect();
    let n_states = 1usize << c.latches.len();
    let (n_u, n_c) = (1usize << u_pos.len(), 1usize << c_pos.len());

    // moves[state][u][c] = (successor, error)
    let mut moves = vec![Vec::with_capacity(n_u * n_c); n_states];
    for (s, row) in moves.iter_mut().enumerate() {
        let latches = bits(s as u64, c.latches.len());
        for u in 0..n_u {
            for cv in 0..n_c {
                let mut inputs = vec![false; c.inputs.len()];
                for (k, &p) in u_pos.iter().enumerate() {
                    inputs[p] = u >> k & 1 == 1;
                }
                for (k, &p) in c_pos.iter().enumerate() {
                    inputs[p] = cv >> k & 1 == 1;
                }
                let step = sim.step(&latches, &inputs);
                row.push((pack(&step.next) as usize, step.outputs[0]));
            }
        }
    }

    let mut losing = vec![false; n_states];
    let mut rounds = 0;
    loop {
        rounds += 1;
        let next: Vec<bool> = (0..n_states)
            .map(|s| {
                losing[s]
                    || (0..n_u).any(|u| {
                        (0..n_c).all(|cv| {
                            let (succ, err) = moves[s][u * n_c + cv];
                            err || losing[succ]
                        })
                    })
            })
            .collect();
        if next == losing {
            break;
        }
        losing = next;
    }
    let winning: Vec<bool> = losing.iter().map(|&l| !l).collect();
    Ok(ExplicitSolution {
        realizable: winning[0],
        winning,
        rounds,
    })
}

/// A path to the error output: input frames for each transition taken, then
/// the inputs under which the output rises in the last state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitTrace {
    pub transitions: Vec<Vec<bool>>,
    pub final_inputs: Vec<bool>,
}

impl ExplicitTrace {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// All input frames in order, the last one being the failing step.
    pub fn frames(&self) -> Vec<Vec<bool>> {
        let mut f = self.transitions.clone();
        f.push(self.final_inputs.clone());
        f
    }
}

/// Breadth-first search from the all-zero state with every input free.
/// Returns a shortest trace to the error output, if any.
pub fn explicit_reach(c: &AigerCircuit) -> Result<Option<ExplicitTrace>, OracleError> {
    check_size(c)?;
    let sim = Simulator::new(c)?;
    let n_in = c.inputs.len();
    let mut parent: HashMap<u64, (u64, u64)> = HashMap::new();
    let mut queue = VecDeque::from([0u64]);
    parent.insert(0, (0, 0));
    while let Some(s) = queue.pop_front() {
        let latches = bits(s, c.latches.len());
        for i in 0..1u64 << n_in {
            let inputs = bits(i, n_in);
            let step = sim.step(&latches, &inputs);
            if step.outputs[0] {
                let mut transitions = Vec::new();
                let mut cur = s;
                while cur != 0 {
                    let (prev, inp) = parent[&cur];
                    transitions.push(bits(inp, n_in));
                    cur = prev;
                }
                transitions.reverse();
                return Ok(Some(ExplicitTrace {
                    transitions,
                    final_inputs: inputs,
                }));
            }
            let succ = pack(&step.next);
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(succ) {
                e.insert((s, i));
                queue.push_back(succ);
            }
        }
    }
    Ok(None)
}
