//! Child processes under CPU or wall-clock limits.

use std::io::Read;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeMode {
    /// Limit on the child's CPU time; idle time is not charged.
    Sequential,
    /// Limit on elapsed wall-clock time.
    Parallel,
}

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub mode: TimeMode,
    pub timeout: Duration,
}

#[derive(Clone, Debug)]
pub struct ChildOutcome {
    /// `None` when the runner killed the child for exceeding its limit.
    pub status: Option<ExitStatus>,
    pub timed_out: bool,
    pub stdout: String,
    pub stderr: String,
    pub cpu_time: Duration,
    pub wall_time: Duration,
}

const POLL: Duration = Duration::from_millis(5);

fn clock_ticks() -> f64 {
    // SAFETY: sysconf has no preconditions.
    let t = unsafe { libc::sysconf(libc::_SC_CLK_TCK) };
    if t > 0 {
        t as f64
    } else {
        100.0
    }
}

/// CPU seconds used so far by `pid` and its reaped children, from procfs.
fn proc_cpu_time(pid: i32) -> Option<Duration> {
    let stat = std::fs::read_to_string(format!("/proc/{pid}/stat")).ok()?;
    // fields after the parenthesised command name
    let rest = &stat[stat.rfind(')')? + 2..];
    let fields: Vec<&str> = rest.split_whitespace().collect();
    // utime, stime, cutime, cstime are fields 14-17 overall, 12-15 here
    let ticks: f64 = fields
        .get(11..15)?
        .iter()
        .map(|f| f.parse::<f64>().unwrap_or(0.0))
        .sum();
    Some(Duration::from_secs_f64(ticks / clock_ticks()))
}

fn kill_group(pgid: i32) {
    // SAFETY: signalling a process group we created; failure is harmless.
    unsafe {
        libc::kill(-pgid, libc::SIGKILL);
    }
}

fn timeval(tv: libc::timeval) -> Duration {
    Duration::from_secs(tv.tv_sec as u64) + Duration::from_micros(tv.tv_usec as u64)
}

/// Non-blocking reap with resource usage.
fn try_wait4(pid: i32) -> std::io::Result<Option<(ExitStatus, Duration)>> {
    let mut status = 0;
    // SAFETY: rusage is plain data; wait4 writes it on success.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let r = unsafe { libc::wait4(pid, &mut status, libc::WNOHANG, &mut usage) };
    match r {
        0 => Ok(None),
        r if r == pid => {
            let cpu = timeval(usage.ru_utime) + timeval(usage.ru_stime);
            Ok(Some((ExitStatus::from_raw(status), cpu)))
        }
        _ => Err(std::io::Error::last_os_error()),
    }
}

fn drain(mut r: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

/// Runs `cmd` in its own process group under `limits`. The whole group is
/// killed on timeout. In sequential mode an `RLIMIT_CPU` backstop is set as
/// well, one second above the limit.
pub fn run_limited(cmd: &mut Command, limits: Limits) -> std::io::Result<ChildOutcome> {
    cmd.stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0);
    if limits.mode == TimeMode::Sequential {
        let secs = limits.timeout.as_secs() + 2;
        // SAFETY: setrlimit is async-signal-safe and touches no shared state.
        unsafe {
            cmd.pre_exec(move || {
                let lim = libc::rlimit {
                    rlim_cur: secs as libc::rlim_t,
                    rlim_max: (secs + 1) as libc::rlim_t,
                };
                if libc::setrlimit(libc::RLIMIT_CPU, &lim) != 0 {
                    return Err(std::io::Error::last_os_error());
                }
                Ok(())
            });
        }
    }
    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let pid = child.id() as i32;
    let out = drain(child.stdout.take().expect("piped stdout"));
    let err = drain(child.stderr.take().expect("piped stderr"));
    let mut timed_out = false;
    let (status, cpu_time) = loop {
        if let Some((status, cpu)) = try_wait4(pid)? {
            break (Some(status), cpu);
        }
        let over = match limits.mode {
            TimeMode::Parallel => start.elapsed() >= limits.timeout,
            TimeMode::Sequential => {
                limits.timeout.is_zero() || proc_cpu_time(pid).is_some_and(|t| t >= limits.timeout)
            }
        };
        if over && !timed_out {
            timed_out = true;
            kill_group(pid);
        }
        thread::sleep(POLL);
    };
    let wall_time = start.elapsed();
    // reap anything left in the group so pipes close
    if timed_out {
        kill_group(pid);
    }
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    // a CPU-limit signal counts as a timeout too
    let by_rlimit = status.is_some_and(|s| s.signal() == Some(libc::SIGXCPU));
    Ok(ChildOutcome {
        status: if timed_out { None } else { status },
        timed_out: timed_out || by_rlimit,
        stdout,
        stderr,
        cpu_time,
        wall_time,
    })
}
