use std::fmt::Write as _;

use thiserror::Error;

use crate::bdd::{Bdd, BddManager, Var};

const HEADER: &str = "WINNING_REGION";
const LATCHES: &str = "latches:";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("missing `{HEADER}` header")]
    MissingHeader,
    #[error("missing `{LATCHES}` line")]
    MissingLatches,
    #[error("line {line}: expected {expected} cube positions, found {found}")]
    CubeWidth {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: invalid cube character `{ch}`")]
    CubeChar { line: usize, ch: char },
    #[error("witness latches {found:?} do not match circuit latches {expected:?}")]
    WrongLatches {
        expected: Vec<String>,
        found: Vec<String>,
    },
}

/// A set of latch valuations as a sum of cubes over named latches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub latches: Vec<String>,
    /// One entry per latch: `Some(value)` or `None` for don't-care.
    pub cubes: Vec<Vec<Option<bool>>>,
}

impl Witness {
    /// Irredundant cube cover of `region`, which must depend only on
    /// `latch_vars`.
    pub fn from_region(
        m: &BddManager,
        region: &Bdd,
        latch_vars: &[Var],
        labels: Vec<String>,
    ) -> Self {
        let cubes = m
            .isop(region)
            .into_iter()
            .map(|cube| {
                let mut row = vec![None; latch_vars.len()];
                for (v, value) in cube {
                    let i = latch_vars
                        .iter()
                        .position(|&l| l == v)
                        .expect("region depends only on latches");
                    row[i] = Some(value);
                }
                row
            })
            .collect();
        Witness {
            latches: labels,
            cubes,
        }
    }

    pub fn parse(text: &str) -> Result<Self, WitnessError> {
        // blank lines are cubes too: with no latches, `⊤` is one empty cube
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, HEADER)) => {}
            _ => return Err(WitnessError::MissingHeader),
        }
        let latches: Vec<String> = match lines.next() {
            Some((_, l)) if l.starts_with(LATCHES) => l[LATCHES.len()..]
                .split_whitespace()
                .map(str::to_string)
                .collect(),
            _ => return Err(WitnessError::MissingLatches),
        };
        let mut cubes = Vec::new();
        for (line, l) in lines {
            let row: Vec<Option<bool>> = l
                .chars()
                .map(|ch| match ch {
                    '-' => Ok(None),
                    '0' => Ok(Some(false)),
                    '1' => Ok(Some(true)),
                    _ => Err(WitnessError::CubeChar { line, ch }),
                })
                .collect::<Result<_, _>>()?;
            if row.len() != latches.len() {
                return Err(WitnessError::CubeWidth {
                    line,
                    expected: latches.len(),
                    found: row.len(),
                });
            }
            cubes.push(row);
        }
        Ok(Witness { latches, cubes })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER}\n{LATCHES}");
        for l in &self.latches {
            out.push(' ');
            out.push_str(l);
        }
        out.push('\n');
        for cube in &self.cubes {
            for v in cube {
                out.push(match v {
                    None => '-',
                    Some(false) => '0',
                    Some(true) => '1',
                });
            }
            out.push('\n');
        }
        out
    }

    /// The region as a BDD over `latch_vars`, whose labels must match the
    /// witness header exactly and in order.
    pub fn to_bdd(
        &self,
        m: &BddManager,
        latch_vars: &[Var],
        labels: &[String],
    ) -> Result<Bdd, WitnessError> {
        if self.latches != labels {
            return Err(WitnessError::WrongLatches {
                expected: labels.to_vec(),
                found: self.latches.clone(),
            });
        }
        let mut region = m.ff();
        for cube in &self.cubes {
            let mut term = m.tt();
            for (value, &v) in cube.iter().zip(latch_vars) {
                if let Some(b) = value {
                    term = m.and(&term, &m.literal(v, *b).expect("latch variable exists"));
                }
            }
            region = m.or(&region, &term);
        }
        Ok(region)
    }
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Renders a cube list for diagnostics, `x1 !x2 | ...`.
pub fn describe(w: &Witness) -> String {
    let mut out = String::new();
    for (i, cube) in w.cubes.iter().enumerate() {
        if i > 0 {
            out.push_str(" | ");
        }
        let mut first = true;
        for (v, name) in cube.iter().zip(&w.latches) {
            if let Some(b) = v {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{}{name}", if *b { "" } else { "!" });
            }
        }
        if first {
            out.push_str("true");
        }
    }
    if w.cubes.is_empty() {
        out.push_str("false");
    }
    out
}
