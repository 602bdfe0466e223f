use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use safety_synth::aiger::{serialize_ascii, AigerCircuit, ParseMode};
use safety_synth::strategy::{check_realizability, synthesize, StrategyError, SynthesisResult};
use safety_synth::verify::{verify_pipeline, DEFAULT_MC_BUDGET};

const EXIT_INPUT: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;

/// Safety controller synthesis for extended AIGER specifications.
#[derive(Parser)]
#[command(name = "synth", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether a controller exists.
    Realizability { file: PathBuf },
    /// Build a controller and write the controlled circuit.
    Synthesize {
        file: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write the winning region as an invariant witness.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Check a solution against its specification.
    Verify {
        spec: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Model checking budget in seconds.
        #[arg(long, default_value_t = DEFAULT_MC_BUDGET.as_secs())]
        mc_timeout: u64,
    },
}

fn load(path: &Path, mode: ParseMode) -> Result<AigerCircuit, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    AigerCircuit::from_bytes(&bytes, mode).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn strategy_failure(e: StrategyError) -> ExitCode {
    match e {
        StrategyError::Game(g) => {
            eprintln!("error: {g}");
            ExitCode::from(EXIT_INPUT)
        }
        other => {
            println!("UNKNOWN");
            eprintln!("error: {other}");
            ExitCode::from(EXIT_UNKNOWN)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Realizability { file } => {
            let spec = load(&file, ParseMode::Specification)?;
            match check_realizability(&spec) {
                Ok(out) => {
                    println!(
                        "{}",
                        if out.realizable {
                            "REALIZABLE"
                        } else {
                            "UNREALIZABLE"
                        }
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => Ok(strategy_failure(e)),
            }
        }
        Cmd::Synthesize { file, out, witness } => {
            let spec = load(&file, ParseMode::Specification)?;
            match synthesize(&spec) {
                Ok(SynthesisResult::Unrealizable { .. }) => {
                    println!("UNREALIZABLE");
                    Ok(ExitCode::SUCCESS)
                }
                Ok(SynthesisResult::Realizable {
                    solution,
                    witness: w,
                    size,
                    ..
                }) => {
                    write(&out, &serialize_ascii(&solution))?;
                    if let Some(path) = witness {
                        write(&path, &w.to_text())?;
                    }
                    println!("REALIZABLE");
                    eprintln!("controller gates: {size}");
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => Ok(strategy_failure(e)),
            }
        }
        Cmd::Verify {
            spec,
            solution,
            witness,
            mc_timeout,
        } => {
            let spec = load(&spec, ParseMode::Specification)?;
            let sol = load(&solution, ParseMode::Circuit)?;
            let wtext = match witness {
                Some(p) => {
                    Some(std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?)
                }
                None => None,
            };
            let v = verify_pipeline(
                &spec,
                &sol,
                wtext.as_deref(),
                Duration::from_secs(mc_timeout),
            );
            println!("{}", v.status);
            if let Some(d) = &v.detail {
                println!("detail: {d}");
            }
            if let Some(trace) = &v.counterexample {
                println!("trace: {} steps", trace.len() + 1);
                for (i, frame) in trace.frames().iter().enumerate() {
                    let bits: String = frame.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    println!("{i} {bits}");
                }
            }
            Ok(if v.status.is_verified() {
                ExitCode::SUCCESS
            } else if v.status == safety_synth::verify::VerdictStatus::Timeout {
                ExitCode::from(EXIT_UNKNOWN)
            } else {
                ExitCode::from(EXIT_INPUT)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
