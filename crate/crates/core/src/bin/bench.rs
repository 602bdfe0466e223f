use std::fs::OpenOptions;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use safety_synth::aiger::{read_meta, serialize_ascii, write_meta};
use safety_synth::harness::gen::{generate, Family};
use safety_synth::harness::{
    discover, load_metas, load_spec, read_record_file, run_all, sample, scratch_dir, Job,
    RunConfig, Solver, TimeMode,
};
use safety_synth::score::{score_records, Track};
use safety_synth::verify::DEFAULT_MC_BUDGET;

/// Batch runner, scorer and benchmark generator.
#[derive(Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sequential,
    Parallel,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrackArg {
    Synthesis,
    Realizability,
}

impl From<TrackArg> for Track {
    fn from(t: TrackArg) -> Track {
        match t {
            TrackArg::Synthesis => Track::Synthesis,
            TrackArg::Realizability => Track::Realizability,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a solver over every benchmark in a directory.
    Run {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "sequential")]
        mode: ModeArg,
        /// Per-benchmark limit in seconds: CPU time when sequential, wall
        /// time when parallel.
        #[arg(long, default_value_t = 3600.0)]
        timeout: f64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Record file; new records are appended.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "synthesis")]
        track: TrackArg,
        /// Configuration name stored in each record.
        #[arg(long, default_value = "synth")]
        config: String,
        #[arg(long, default_value_t = DEFAULT_MC_BUDGET.as_secs())]
        mc_timeout: u64,
        /// Shell command to run instead of the bundled solver. It receives
        /// BENCH_FILE, BENCH_SOLUTION and BENCH_WITNESS in its environment.
        #[arg(long)]
        solver: Option<String>,
        /// Directory for solutions and witnesses [default: a fresh
        /// directory under SYNTH_TMPDIR or the system temp dir].
        #[arg(long)]
        solutions: Option<PathBuf>,
        /// Run a seeded random sample of this many benchmarks.
        #[arg(long)]
        sample: Option<usize>,
        /// Apply --sample to each top-level subdirectory separately.
        #[arg(long, requires = "sample")]
        per_category: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Judge, score and rank a record file.
    Score {
        #[arg(long = "in")]
        input: PathBuf,
        /// Benchmark directory holding known realizability and reference sizes.
        #[arg(long)]
        refs: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "synthesis")]
        track: TrackArg,
        #[arg(long)]
        json: bool,
        /// Write improved reference sizes back into the benchmark files.
        #[arg(long, requires = "refs")]
        update_refs: bool,
    },
    /// Write a generated benchmark to `<out>/<family>_<param>.aag`.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        param: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn default_solver() -> Result<PathBuf, String> {
    let me = std::env::current_exe().map_err(|e| e.to_string())?;
    let exe = me.with_file_name(format!("synth{}", std::env::consts::EXE_SUFFIX));
    if exe.exists() {
        Ok(exe)
    } else {
        Err(format!("solver {} not found; pass --solver", exe.display()))
    }
}

fn update_refs(
    dir: &Path,
    refs: &std::collections::BTreeMap<String, Option<u64>>,
) -> Result<usize, String> {
    let mut changed = 0;
    for b in discover(dir).map_err(|e| e.to_string())? {
        let Some(Some(size)) = refs.get(&b.id) else {
            continue;
        };
        let spec = load_spec(&b.path).map_err(|e| e.to_string())?;
        let mut meta = read_meta(&spec).map_err(|e| format!("{}: {e}", b.path.display()))?;
        if meta.reference_size == Some(*size) {
            continue;
        }
        if b.path.extension().is_some_and(|e| e == "aig") {
            eprintln!("warning: {} is binary; reference not updated", b.id);
            continue;
        }
        meta.reference_size = Some(*size);
        std::fs::write(&b.path, serialize_ascii(&write_meta(&spec, &meta)))
            .map_err(|e| e.to_string())?;
        changed += 1;
    }
    Ok(changed)
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.cmd {
        Cmd::Run {
            dir,
            mode,
            timeout,
            workers,
            out,
            track,
            config,
            mc_timeout,
            solver,
            solutions,
            sample: k,
            per_category,
            seed,
        } => {
            let mut benches = discover(&dir).map_err(|e| e.to_string())?;
            if let Some(k) = k {
                benches = sample(&benches, k, per_category, seed);
            }
            let solver = match solver {
                Some(cmd) => Solver::Shell(cmd),
                None => Solver::Binary(default_solver()?),
            };
            if !timeout.is_finite() || timeout < 0.0 {
                return Err(format!("invalid timeout {timeout}"));
            }
            let job = Job {
                config: RunConfig {
                    mode: match mode {
                        ModeArg::Sequential => TimeMode::Sequential,
                        ModeArg::Parallel => TimeMode::Parallel,
                    },
                    timeout: Duration::from_secs_f64(timeout),
                    workers,
                    mc_timeout: Duration::from_secs(mc_timeout),
                    seed,
                },
                name: config,
                track: track.into(),
                solver,
                solutions: solutions.unwrap_or_else(|| {
                    scratch_dir().join(format!("synth-solutions-{}", std::process::id()))
                }),
            };
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&out)
                .map_err(|e| format!("{}: {e}", out.display()))?;
            let mut w = BufWriter::new(file);
            let recs = run_all(&benches, &job, &mut w).map_err(|e| e.to_string())?;
            eprintln!("{} records appended to {}", recs.len(), out.display());
            Ok(())
        }
        Cmd::Score {
            input,
            refs,
            track,
            json,
            update_refs: update,
        } => {
            let records =
                read_record_file(&input).map_err(|e| format!("{}: {e}", input.display()))?;
            let metas = match &refs {
                Some(d) => load_metas(d).map_err(|e| e.to_string())?,
                None => Default::default(),
            };
            let report = score_records(&records, &metas, track.into());
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_table());
            }
            if update {
                let dir = refs.expect("clap enforces --refs");
                let n = update_refs(&dir, &report.references)?;
                eprintln!("{n} reference sizes updated");
            }
            Ok(())
        }
        Cmd::Gen {
            family,
            param,
            out,
            seed,
        } => {
            let c = generate(family, param, seed).map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            let path = out.join(format!("{family}_{param}.aag"));
            std::fs::write(&path, serialize_ascii(&c))
                .map_err(|e| format!("{}: {e}", path.display()))?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
