//! Candidate execution in a child interpreter.
//!
//! Each run gets a fresh temporary directory holding `harness.py`, which is
//! executed as `<interpreter> harness.py` from inside that directory. The
//! child is placed in its own process group so a timeout kills everything it
//! spawned. Verdicts are read from stdout lines of the exact form
//! `CASE <i> PASS` / `CASE <i> FAIL`.

mod harness;

use std::fs;
use std::io::{self, Read};
use std::os::unix::process::CommandExt;
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

pub use harness::{build_harness, extract_code, top_level_functions, HarnessSource};

use crate::fraction::Fraction;
use crate::types::{CaseVerdict, ExecStatus, ExecutionReport, Family, TestMode, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum SandboxError {
    #[error("no test cases supplied")]
    NoCases,
    #[error("candidate source is empty")]
    EmptySource,
    #[error("test mode {mode:?} is not valid for the {family} family")]
    ModeMismatch { family: Family, mode: TestMode },
    #[error("expected exactly one top-level function, found {}: [{}]", found.len(), found.join(", "))]
    AmbiguousEntry { found: Vec<String> },
    #[error("entry point `{0}` is not defined at top level")]
    MissingEntry(String),
    #[error("interpreter `{0}` not found")]
    InterpreterMissing(String),
    #[error("invalid sandbox limits: {0}")]
    InvalidLimits(String),
    #[error("sandbox i/o: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SandboxLimits {
    pub timeout_ms: u64,
    pub max_output_bytes: usize,
}

impl Default for SandboxLimits {
    fn default() -> Self {
        SandboxLimits { timeout_ms: 10_000, max_output_bytes: 64 * 1024 }
    }
}

impl SandboxLimits {
    pub fn validate(&self) -> Result<(), SandboxError> {
        if self.timeout_ms == 0 || self.max_output_bytes == 0 {
            return Err(SandboxError::InvalidLimits(format!("{self:?}")));
        }
        Ok(())
    }
}

/// Counting semaphore bounding concurrent child processes.
#[derive(Debug)]
struct Permits {
    free: Mutex<usize>,
    cond: Condvar,
}

struct Permit<'a>(&'a Permits);

impl Permits {
    fn new(n: usize) -> Self {
        Permits { free: Mutex::new(n.max(1)), cond: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cond.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cond.notify_one();
    }
}

#[derive(Debug, Clone)]
pub struct Sandbox {
    limits: SandboxLimits,
    interpreter: Vec<String>,
    scratch_root: Option<PathBuf>,
    permits: Arc<Permits>,
}

impl Sandbox {
    /// `interpreter_command` may carry arguments, split on whitespace (`python3 -I`).
    pub fn new(interpreter_command: &str, limits: SandboxLimits) -> Result<Self, SandboxError> {
        limits.validate()?;
        let interpreter: Vec<String> = interpreter_command.split_whitespace().map(str::to_string).collect();
        if interpreter.is_empty() {
            return Err(SandboxError::InterpreterMissing(interpreter_command.to_string()));
        }
        let parallel = thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        Ok(Sandbox { limits, interpreter, scratch_root: None, permits: Arc::new(Permits::new(parallel)) })
    }

    pub fn with_max_concurrent(mut self, n: usize) -> Self {
        if n > 0 {
            self.permits = Arc::new(Permits::new(n));
        }
        self
    }

    /// Creates per-run temporary directories under `root` instead of the system temp dir.
    pub fn with_scratch_root(mut self, root: impl Into<PathBuf>) -> Self {
        self.scratch_root = Some(root.into());
        self
    }

    pub fn limits(&self) -> SandboxLimits {
        self.limits
    }

    /// Checks that the interpreter can be started at all.
    pub fn probe(&self) -> Result<(), SandboxError> {
        let missing = || SandboxError::InterpreterMissing(self.interpreter.join(" "));
        let status = Command::new(&self.interpreter[0])
            .args(&self.interpreter[1..])
            .args(["-c", "pass"])
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .map_err(|e| match e.kind() {
                io::ErrorKind::NotFound | io::ErrorKind::PermissionDenied => missing(),
                _ => SandboxError::Io(e),
            })?;
        if status.success() {
            Ok(())
        } else {
            Err(missing())
        }
    }

    pub fn execute(&self, harness: &HarnessSource) -> Result<ExecutionReport, SandboxError> {
        let _permit = self.permits.acquire();
        let dir = match &self.scratch_root {
            Some(root) => tempfile::Builder::new().prefix("cogito-").tempdir_in(root)?,
            None => tempfile::Builder::new().prefix("cogito-").tempdir()?,
        };
        fs::write(dir.path().join("harness.py"), &harness.source)?;

        let mut cmd = Command::new(&self.interpreter[0]);
        cmd.args(&self.interpreter[1..])
            .arg("harness.py")
            .current_dir(dir.path())
            .env("PYTHONHASHSEED", "0")
            .env("PYTHONDONTWRITEBYTECODE", "1")
            .env("PYTHONIOENCODING", "utf-8")
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .process_group(0);

        let started = Instant::now();
        let mut child = cmd.spawn().map_err(|e| match e.kind() {
            io::ErrorKind::NotFound | io::ErrorKind::PermissionDenied => {
                SandboxError::InterpreterMissing(self.interpreter.join(" "))
            }
            _ => SandboxError::Io(e),
        })?;
        let cap = self.limits.max_output_bytes;
        let stdout = spawn_reader(child.stdout.take(), cap);
        let stderr = spawn_reader(child.stderr.take(), cap);

        let deadline = started + Duration::from_millis(self.limits.timeout_ms);
        let (exit_ok, timed_out) = wait_until(&mut child, deadline)?;
        // reap anything the harness left behind in its group
        kill_group(&child);
        let _ = child.wait();
        let wall_time_ms = started.elapsed().as_millis() as u64;

        let stdout = stdout.join().unwrap_or_default();
        let stderr = stderr.join().unwrap_or_default();
        let report = interpret(harness.case_count, exit_ok, timed_out, &stdout, &stderr, &self.limits, wall_time_ms);
        dir.close()?;
        Ok(report)
    }
}

fn spawn_reader<R: Read + Send + 'static>(pipe: Option<R>, cap: usize) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut kept = Vec::new();
        let Some(mut pipe) = pipe else { return kept };
        let mut buf = [0u8; 8192];
        loop {
            match pipe.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = cap.saturating_sub(kept.len());
                    kept.extend_from_slice(&buf[..n.min(room)]);
                }
            }
        }
        kept
    })
}

fn wait_until(child: &mut Child, deadline: Instant) -> io::Result<(bool, bool)> {
    let mut pause = Duration::from_millis(1);
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok((status.success(), false));
        }
        let now = Instant::now();
        if now >= deadline {
            kill_group(child);
            return Ok((false, true));
        }
        thread::sleep(pause.min(deadline - now));
        pause = (pause * 2).min(Duration::from_millis(20));
    }
}

fn kill_group(child: &Child) {
    let pgid = child.id() as libc::pid_t;
    // SAFETY: signalling a process group we created; ESRCH is harmless.
    unsafe {
        libc::kill(-pgid, libc::SIGKILL);
    }
}

fn truncate_utf8(bytes: &[u8], cap: usize) -> String {
    let text = String::from_utf8_lossy(bytes);
    if text.len() <= cap {
        return text.into_owned();
    }
    let mut end = cap;
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    text[..end].to_string()
}

/// Parses one verdict line. Anything that is not exactly `CASE <i> PASS|FAIL` is ignored.
pub fn parse_verdict_line(line: &str) -> Option<(usize, bool)> {
    let rest = line.strip_prefix("CASE ")?;
    let (index, word) = rest.split_once(' ')?;
    if index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) || index.starts_with('0') {
        return None;
    }
    let passed = match word {
        "PASS" => true,
        "FAIL" => false,
        _ => return None,
    };
    Some((index.parse().ok()?, passed))
}

fn interpret(
    case_count: usize,
    exit_ok: bool,
    timed_out: bool,
    stdout: &[u8],
    stderr: &[u8],
    limits: &SandboxLimits,
    wall_time_ms: u64,
) -> ExecutionReport {
    let mut seen: Vec<Option<bool>> = vec![None; case_count];
    let stdout = String::from_utf8_lossy(stdout);
    for line in stdout.lines() {
        if let Some((i, passed)) = parse_verdict_line(line) {
            if (1..=case_count).contains(&i) && seen[i - 1].is_none() {
                seen[i - 1] = Some(passed);
            }
        }
    }
    let reported = seen.iter().filter(|s| s.is_some()).count();
    let per_case: Vec<CaseVerdict> = seen
        .iter()
        .enumerate()
        .map(|(i, s)| CaseVerdict { case_index: i + 1, passed: s.unwrap_or(false) })
        .collect();

    let err_text = truncate_utf8(stderr, limits.max_output_bytes);
    let status = if timed_out {
        ExecStatus::Timeout
    } else if exit_ok {
        if reported == case_count {
            ExecStatus::Ok
        } else {
            ExecStatus::HarnessError
        }
    } else if reported == 0 && err_text.contains("harness.py\"") && err_text.contains("SyntaxError") {
        ExecStatus::HarnessError
    } else {
        ExecStatus::RuntimeError
    };

    let mut traceback = (!err_text.trim().is_empty()).then_some(err_text);
    if timed_out {
        let note = format!("TimeoutError: execution exceeded {} ms", limits.timeout_ms);
        traceback = Some(match traceback {
            Some(t) => format!("{}\n{note}", t.trim_end()),
            None => note,
        });
    } else if status == ExecStatus::HarnessError && traceback.is_none() {
        traceback = Some(format!("harness reported {reported} of {case_count} cases"));
    }
    ExecutionReport::from_cases(per_case, status, traceback, wall_time_ms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Judgement {
    pub verdict: Verdict,
    pub pass_fraction: Fraction,
}

/// Pass only when every case passed and the run ended normally.
pub fn judge(report: &ExecutionReport) -> Judgement {
    let complete = report.pass_fraction == Fraction::ONE && !report.per_case.is_empty();
    let verdict = if complete && report.status == ExecStatus::Ok { Verdict::Pass } else { Verdict::Fail };
    Judgement { verdict, pass_fraction: report.pass_fraction }
}
