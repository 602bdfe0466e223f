use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::AigerCircuit;

const REALIZABLE_KEY: &str = "SYNTCOMP realizable:";
const REFERENCE_KEY: &str = "SYNTCOMP reference_size:";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Realizability {
    Realizable,
    Unrealizable,
}

/// Benchmark facts kept in the comment section of a specification.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkMeta {
    pub known_realizability: Option<Realizability>,
    pub reference_size: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MetaError {
    #[error("comment line {line}: conflicting `{key}` values")]
    Conflict { line: usize, key: &'static str },
    #[error("comment line {line}: malformed value `{value}`")]
    Malformed { line: usize, value: String },
}

fn set_once<T: PartialEq>(
    slot: &mut Option<T>,
    value: T,
    line: usize,
    key: &'static str,
) -> Result<(), MetaError> {
    match slot {
        Some(prev) if *prev != value => Err(MetaError::Conflict { line, key }),
        _ => {
            *slot = Some(value);
            Ok(())
        }
    }
}

pub fn read_meta(c: &AigerCircuit) -> Result<BenchmarkMeta, MetaError> {
    let mut meta = BenchmarkMeta::default();
    for (i, line) in c.comments.iter().enumerate() {
        let line_no = i + 1;
        if let Some(v) = line.strip_prefix(REALIZABLE_KEY) {
            let r = match v.trim() {
                "1" => Realizability::Realizable,
                "0" => Realizability::Unrealizable,
                other => {
                    return Err(MetaError::Malformed {
                        line: line_no,
                        value: other.to_string(),
                    })
                }
            };
            set_once(&mut meta.known_realizability, r, line_no, "realizable")?;
        } else if let Some(v) = line.strip_prefix(REFERENCE_KEY) {
            let n = v.trim().parse().map_err(|_| MetaError::Malformed {
                line: line_no,
                value: v.trim().to_string(),
            })?;
            set_once(&mut meta.reference_size, n, line_no, "reference_size")?;
        }
    }
    Ok(meta)
}

/// Replaces any existing metadata lines; other comment lines keep their order.
pub fn write_meta(c: &AigerCircuit, meta: &BenchmarkMeta) -> AigerCircuit {
    let mut out = c.clone();
    out.comments
        .retain(|l| !l.starts_with(REALIZABLE_KEY) && !l.starts_with(REFERENCE_KEY));
    if let Some(r) = meta.known_realizability {
        let bit = match r {
            Realizability::Realizable => 1,
            Realizability::Unrealizable => 0,
        };
        out.comments.push(format!("{REALIZABLE_KEY} {bit}"));
    }
    if let Some(n) = meta.reference_size {
        out.comments.push(format!("{REFERENCE_KEY} {n}"));
    }
    out
}
