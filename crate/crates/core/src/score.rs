//! Solved-count and quality rankings over result records.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::aiger::{BenchmarkMeta, Realizability};
use crate::harness::record::{Answer, ResultRecord};
use crate::verify::VerdictStatus;

pub const POINTS_CORRECT: i64 = 1;
pub const POINTS_WRONG: i64 = -4;

/// `2 - log10((s + 1) / (ref + 1))`, never below 0.
pub fn quality(s: u64, reference: u64) -> f64 {
    let q = 2.0 - ((s as f64 + 1.0) / (reference as f64 + 1.0)).log10();
    q.max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    Synthesis,
    Realizability,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Judgement {
    Correct,
    Wrong,
    Timeout,
    Unverified,
}

impl Judgement {
    pub fn points(self) -> i64 {
        match self {
            Judgement::Correct => POINTS_CORRECT,
            Judgement::Wrong => POINTS_WRONG,
            Judgement::Timeout | Judgement::Unverified => 0,
        }
    }
}

/// Ground truth for a benchmark: metadata first, then a verified solution
/// from any run, then a strict majority of at least two definite answers.
pub fn ground_truth(meta: &BenchmarkMeta, peers: &[&ResultRecord]) -> Option<Realizability> {
    if let Some(r) = meta.known_realizability {
        return Some(r);
    }
    if peers
        .iter()
        .any(|p| p.answer == Answer::Realizable && p.verified())
    {
        return Some(Realizability::Realizable);
    }
    let yes = peers
        .iter()
        .filter(|p| p.answer == Answer::Realizable)
        .count();
    let no = peers
        .iter()
        .filter(|p| p.answer == Answer::Unrealizable)
        .count();
    if yes + no < 2 || yes == no {
        return None;
    }
    Some(if yes > no {
        Realizability::Realizable
    } else {
        Realizability::Unrealizable
    })
}

/// Judges one record. `peers` are all records for the same benchmark,
/// including `entry` itself.
pub fn judge(
    entry: &ResultRecord,
    meta: &BenchmarkMeta,
    peers: &[&ResultRecord],
    track: Track,
) -> Judgement {
    let claim = match entry.answer {
        Answer::Timeout => return Judgement::Timeout,
        Answer::Unknown => return Judgement::Unverified,
        Answer::Realizable => Realizability::Realizable,
        Answer::Unrealizable => Realizability::Unrealizable,
    };
    if track == Track::Synthesis && claim == Realizability::Realizable {
        return match entry.verification {
            Some(s) if s.is_verified() => Judgement::Correct,
            Some(VerdictStatus::SyntacticFail | VerdictStatus::SemanticFail) => Judgement::Wrong,
            _ if ground_truth(meta, peers) == Some(Realizability::Unrealizable) => Judgement::Wrong,
            _ => Judgement::Unverified,
        };
    }
    match ground_truth(meta, peers) {
        Some(truth) if truth == claim => Judgement::Correct,
        Some(_) => Judgement::Wrong,
        None => Judgement::Unverified,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub benchmark: String,
    pub config: String,
    pub judgement: Judgement,
    pub size: Option<u64>,
    pub reference: Option<u64>,
    pub points_solved: i64,
    /// Set only for correct, verified realizable solutions with a size.
    pub points_quality: Option<f64>,
    pub mc_timeout: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub config: String,
    pub solved: usize,
    pub points_solved: i64,
    pub unique: usize,
    pub quality: f64,
    pub average_quality: f64,
    pub new_references: usize,
    pub mc_timeouts: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub configs: Vec<ConfigSummary>,
}

/// Reference sizes after this run: `min(prior, best verified size)`.
pub fn update_references(
    records: &[ResultRecord],
    metas: &HashMap<String, BenchmarkMeta>,
    track: Track,
) -> BTreeMap<String, Option<u64>> {
    let mut out: BTreeMap<String, Option<u64>> = BTreeMap::new();
    let best = best_verified_sizes(records, metas, track);
    let names: BTreeSet<&String> = records
        .iter()
        .map(|r| &r.benchmark)
        .chain(metas.keys())
        .collect();
    for name in names {
        let prior = metas.get(name).and_then(|m| m.reference_size);
        let run = best.get(name).copied();
        let merged = match (prior, run) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        out.insert(name.clone(), merged);
    }
    out
}

fn group(records: &[ResultRecord]) -> BTreeMap<&str, Vec<&ResultRecord>> {
    let mut by_bench: BTreeMap<&str, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        by_bench.entry(&r.benchmark).or_default().push(r);
    }
    by_bench
}

fn best_verified_sizes(
    records: &[ResultRecord],
    metas: &HashMap<String, BenchmarkMeta>,
    track: Track,
) -> HashMap<String, u64> {
    let mut best: HashMap<String, u64> = HashMap::new();
    let default = BenchmarkMeta::default();
    for (bench, peers) in group(records) {
        let meta = metas.get(bench).unwrap_or(&default);
        for r in &peers {
            if judge(r, meta, &peers, track) != Judgement::Correct || !r.verified() {
                continue;
            }
            if let Some(s) = r.size {
                let e = best.entry(bench.to_string()).or_insert(s);
                *e = (*e).min(s);
            }
        }
    }
    best
}

/// Judges every record. Quality is measured against the prior reference
/// when there is one, else against the best verified size of this run.
pub fn score_entries(
    records: &[ResultRecord],
    metas: &HashMap<String, BenchmarkMeta>,
    track: Track,
) -> Vec<ScoreEntry> {
    let best = best_verified_sizes(records, metas, track);
    let default = BenchmarkMeta::default();
    let groups = group(records);
    records
        .iter()
        .map(|r| {
            let meta = metas.get(&r.benchmark).unwrap_or(&default);
            let judgement = judge(r, meta, &groups[r.benchmark.as_str()], track);
            let reference = meta
                .reference_size
                .or_else(|| best.get(&r.benchmark).copied());
            let points_quality = match (track, judgement, r.answer, r.size, reference) {
                (Track::Synthesis, Judgement::Correct, Answer::Realizable, Some(s), Some(rf))
                    if r.verified() =>
                {
                    Some(quality(s, rf))
                }
                _ => None,
            };
            ScoreEntry {
                benchmark: r.benchmark.clone(),
                config: r.config.clone(),
                judgement,
                size: r.size,
                reference,
                points_solved: judgement.points(),
                points_quality,
                mc_timeout: r.answer == Answer::Realizable
                    && r.verification == Some(VerdictStatus::Timeout),
            }
        })
        .collect()
}

/// Per-configuration aggregates, sorted by solved points then quality.
pub fn rank(entries: &[ScoreEntry]) -> RankingReport {
    let mut solvers: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for e in entries.iter().filter(|e| e.judgement == Judgement::Correct) {
        solvers.entry(&e.benchmark).or_default().insert(&e.config);
    }
    let mut by_config: BTreeMap<&str, ConfigSummary> = BTreeMap::new();
    for e in entries {
        let s = by_config.entry(&e.config).or_insert_with(|| ConfigSummary {
            config: e.config.clone(),
            ..Default::default()
        });
        s.points_solved += e.points_solved;
        if e.mc_timeout {
            s.mc_timeouts += 1;
        }
        if e.judgement != Judgement::Correct {
            continue;
        }
        s.solved += 1;
        if solvers[e.benchmark.as_str()].len() == 1 {
            s.unique += 1;
        }
        if let Some(q) = e.points_quality {
            s.quality += q;
            if q > 2.0 {
                s.new_references += 1;
            }
        }
    }
    let mut configs: Vec<ConfigSummary> = by_config
        .into_values()
        .map(|mut s| {
            s.average_quality = if s.solved == 0 {
                0.0
            } else {
                s.quality / s.solved as f64
            };
            s
        })
        .collect();
    configs.sort_by(|a, b| {
        b.points_solved
            .cmp(&a.points_solved)
            .then(b.quality.total_cmp(&a.quality))
            .then(a.config.cmp(&b.config))
    });
    RankingReport { configs }
}

/// Everything `bench score` reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub track: Track,
    pub entries: Vec<ScoreEntry>,
    pub ranking: RankingReport,
    pub references: BTreeMap<String, Option<u64>>,
}

pub fn score_records(
    records: &[ResultRecord],
    metas: &HashMap<String, BenchmarkMeta>,
    track: Track,
) -> ScoreReport {
    let entries = score_entries(records, metas, track);
    ScoreReport {
        track,
        ranking: rank(&entries),
        references: update_references(records, metas, track),
        entries,
    }
}

impl ScoreReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<20} {:>6} {:>7} {:>6} {:>10} {:>9} {:>8} {:>8}",
            "config", "solved", "points", "unique", "mc_timeout", "quality", "avg_q", "new_refs"
        );
        for c in &self.ranking.configs {
            let _ = writeln!(
                out,
                "{:<20} {:>6} {:>7} {:>6} {:>10} {:>9.3} {:>8.3} {:>8}",
                c.config,
                c.solved,
                c.points_solved,
                c.unique,
                c.mc_timeouts,
                c.quality,
                c.average_quality,
                c.new_references
            );
        }
        if self.track == Track::Synthesis {
            let _ = writeln!(out, "\nreference sizes:");
            for (b, r) in &self.references {
                match r {
                    Some(n) => {
                        let _ = writeln!(out, "  {b}: {n}");
                    }
                    None => {
                        let _ = writeln!(out, "  {b}: -");
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
