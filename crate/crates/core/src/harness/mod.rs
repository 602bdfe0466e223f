//! Batch runs over a benchmark directory.

pub mod gen;
pub mod record;
pub mod runner;

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aiger::{read_meta, solution_size, AigerCircuit, BenchmarkMeta, ParseMode};
use crate::score::Track;
use crate::verify::{verify_pipeline, DEFAULT_MC_BUDGET};

pub use record::{read_record_file, read_records, write_record, Answer, RecordError, ResultRecord};
pub use runner::{run_limited, ChildOutcome, Limits, TimeMode};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(3600);

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: TimeMode,
    pub timeout: Duration,
    pub workers: usize,
    pub mc_timeout: Duration,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: TimeMode::Sequential,
            timeout: DEFAULT_TIMEOUT,
            workers: 1,
            mc_timeout: DEFAULT_MC_BUDGET,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("benchmark directory {0} does not exist")]
    MissingDir(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    BadSpec { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Benchmark {
    /// Path relative to the benchmark directory, with `/` separators.
    pub id: String,
    pub path: PathBuf,
    /// First directory component of the id, empty at top level.
    pub category: String,
}

fn is_aiger(p: &Path) -> bool {
    matches!(p.extension().and_then(|e| e.to_str()), Some("aag" | "aig"))
}

/// Every `.aag`/`.aig` under `dir`, sorted by id.
pub fn discover(dir: &Path) -> Result<Vec<Benchmark>, HarnessError> {
    if !dir.is_dir() {
        return Err(HarnessError::MissingDir(dir.to_path_buf()));
    }
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(io_err(&d))? {
            let path = entry.map_err(io_err(&d))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if is_aiger(&path) {
                let rel = path.strip_prefix(dir).expect("walk stays under dir");
                let parts: Vec<String> = rel
                    .iter()
                    .map(|s| s.to_string_lossy().into_owned())
                    .collect();
                let category = if parts.len() > 1 {
                    parts[0].clone()
                } else {
                    String::new()
                };
                out.push(Benchmark {
                    id: parts.join("/"),
                    path,
                    category,
                });
            }
        }
    }
    out.sort();
    Ok(out)
}

/// A seeded random subset of at most `k` benchmarks, overall or per category.
pub fn sample(benchmarks: &[Benchmark], k: usize, per_category: bool, seed: u64) -> Vec<Benchmark> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::new();
    if per_category {
        let mut groups: BTreeMap<&str, Vec<&Benchmark>> = BTreeMap::new();
        for b in benchmarks {
            groups.entry(&b.category).or_default().push(b);
        }
        for mut g in groups.into_values() {
            g.shuffle(&mut rng);
            picked.extend(g.into_iter().take(k).cloned());
        }
    } else {
        let mut all: Vec<&Benchmark> = benchmarks.iter().collect();
        all.shuffle(&mut rng);
        picked.extend(all.into_iter().take(k).cloned());
    }
    picked.sort();
    picked
}

pub fn load_spec(path: &Path) -> Result<AigerCircuit, HarnessError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    AigerCircuit::from_bytes(&bytes, ParseMode::Specification).map_err(|e| HarnessError::BadSpec {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Metadata of every benchmark under `dir`, keyed by id.
pub fn load_metas(dir: &Path) -> Result<HashMap<String, BenchmarkMeta>, HarnessError> {
    let mut out = HashMap::new();
    for b in discover(dir)? {
        let spec = load_spec(&b.path)?;
        let meta = read_meta(&spec).map_err(|e| HarnessError::BadSpec {
            path: b.path.clone(),
            message: e.to_string(),
        })?;
        out.insert(b.id, meta);
    }
    Ok(out)
}

/// How to invoke the tool under test.
#[derive(Clone, Debug)]
pub enum Solver {
    /// A `synth`-compatible executable.
    Binary(PathBuf),
    /// A shell command. It sees `BENCH_FILE`, `BENCH_SOLUTION` and
    /// `BENCH_WITNESS` in its environment.
    Shell(String),
}

impl Solver {
    fn command(&self, b: &Benchmark, track: Track, solution: &Path, witness: &Path) -> Command {
        match self {
            Solver::Binary(exe) => {
                let mut c = Command::new(exe);
                match track {
                    Track::Realizability => {
                        c.arg("realizability").arg(&b.path);
                    }
                    Track::Synthesis => {
                        c.arg("synthesize")
                            .arg(&b.path)
                            .arg("-o")
                            .arg(solution)
                            .arg("--witness")
                            .arg(witness);
                    }
                }
                c
            }
            Solver::Shell(script) => {
                let mut c = Command::new("sh");
                c.arg("-c")
                    .arg(script)
                    .env("BENCH_FILE", &b.path)
                    .env("BENCH_SOLUTION", solution)
                    .env("BENCH_WITNESS", witness);
                c
            }
        }
    }
}

/// Options of one `bench run`.
#[derive(Clone, Debug)]
pub struct Job {
    pub config: RunConfig,
    pub name: String,
    pub track: Track,
    pub solver: Solver,
    /// Where solutions and witnesses are written.
    pub solutions: PathBuf,
}

/// Scratch directory: `SYNTH_TMPDIR` if set, else the system default.
pub fn scratch_dir() -> PathBuf {
    std::env::var_os("SYNTH_TMPDIR")
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir)
}

fn first_line_answer(stdout: &str) -> Answer {
    match stdout.lines().next().map(str::trim) {
        Some("REALIZABLE") => Answer::Realizable,
        Some("UNREALIZABLE") => Answer::Unrealizable,
        _ => Answer::Unknown,
    }
}

fn artifact_name(id: &str) -> String {
    id.replace('/', "__")
}

/// Runs one benchmark in a child process and checks any solution it wrote.
pub fn run_one(b: &Benchmark, job: &Job) -> ResultRecord {
    let stem = artifact_name(&b.id);
    let solution = job.solutions.join(format!("{stem}.solution.aag"));
    let witness = job.solutions.join(format!("{stem}.witness"));
    let _ = std::fs::remove_file(&solution);
    let _ = std::fs::remove_file(&witness);
    let limits = Limits {
        mode: job.config.mode,
        timeout: job.config.timeout,
    };
    let mut cmd = job.solver.command(b, job.track, &solution, &witness);
    let mut rec = ResultRecord::new(&b.id, &job.name, Answer::Unknown);
    let outcome = match run_limited(&mut cmd, limits) {
        Ok(o) => o,
        Err(_) => return rec,
    };
    rec.cpu_time = outcome.cpu_time.as_secs_f64();
    rec.wall_time = outcome.wall_time.as_secs_f64();
    if outcome.timed_out {
        rec.answer = Answer::Timeout;
        return rec;
    }
    rec.answer = first_line_answer(&outcome.stdout);
    if job.track == Track::Synthesis && rec.answer == Answer::Realizable && solution.exists() {
        rec.solution = Some(solution.to_string_lossy().into_owned());
        let wtext = std::fs::read_to_string(&witness).ok();
        if wtext.is_some() {
            rec.witness = Some(witness.to_string_lossy().into_owned());
        }
        check_solution(
            &mut rec,
            b,
            &solution,
            wtext.as_deref(),
            job.config.mc_timeout,
        );
    }
    rec
}

fn check_solution(
    rec: &mut ResultRecord,
    b: &Benchmark,
    solution: &Path,
    witness: Option<&str>,
    budget: Duration,
) {
    use crate::verify::VerdictStatus;
    let Ok(spec) = load_spec(&b.path) else {
        return;
    };
    let sol = std::fs::read(solution)
        .ok()
        .and_then(|bytes| AigerCircuit::from_bytes(&bytes, ParseMode::Circuit).ok());
    let Some(sol) = sol else {
        rec.verification = Some(VerdictStatus::SyntacticFail);
        return;
    };
    let verdict = verify_pipeline(&spec, &sol, witness, budget);
    if verdict.status.is_verified() || verdict.status == VerdictStatus::Timeout {
        rec.size = Some(solution_size(&spec, &sol) as u64);
    }
    rec.verification = Some(verdict.status);
}

/// Runs every benchmark with up to `workers` children at once. Records are
/// written to `out` by the calling thread as they complete, and returned in
/// benchmark order.
pub fn run_all(
    benchmarks: &[Benchmark],
    job: &Job,
    out: &mut impl Write,
) -> std::io::Result<Vec<ResultRecord>> {
    std::fs::create_dir_all(&job.solutions)?;
    let queue = Arc::new(Mutex::new(
        (0..benchmarks.len()).collect::<Vec<_>>().into_iter(),
    ));
    let (tx, rx) = mpsc::channel();
    let mut records: Vec<Option<ResultRecord>> = vec![None; benchmarks.len()];
    thread::scope(|s| -> std::io::Result<()> {
        for _ in 0..job.config.workers.max(1) {
            let queue = Arc::clone(&queue);
            let tx = tx.clone();
            s.spawn(move || loop {
                let next = queue.lock().expect("queue lock").next();
                let Some(i) = next else { break };
                if tx.send((i, run_one(&benchmarks[i], job))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, rec) in rx {
            write_record(out, &rec)?;
            out.flush()?;
            records[i] = Some(rec);
        }
        Ok(())
    })?;
    Ok(records.into_iter().flatten().collect())
}
