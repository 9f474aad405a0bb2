//! Stable-model engines behind one interface: the in-process search and an
//! external solver run as a child process.

use std::env;
use std::fmt;
use std::io::Write as _;
use std::time::{Duration, Instant};

use crate::parser::print_program;
use crate::process;
use crate::program::{Interpretation, Program, SymbolTable};
use crate::search::{self, Interrupt, SearchLimits};
use crate::semantics::ModelSet;

/// Environment variable overriding the external solver command.
pub const SOLVER_ENV: &str = "SUPPSOLVE_SOLVER";
pub const DEFAULT_SOLVER: &str = "clingo";
pub const DEFAULT_TEMPLATE: &str = "{cmd} --models={models} {file}";

/// Exit codes a clingo-compatible solver uses for a normal run
/// (unknown, satisfiable, unsatisfiable, exhausted).
const SOLVER_OK_EXIT: [i32; 4] = [0, 10, 20, 30];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Internal,
    External,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Internal => "internal",
            Backend::External => "external",
        })
    }
}

/// How to invoke an external solver. `template` may use `{cmd}`,
/// `{models}` and `{file}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalCommand {
    pub command: String,
    pub template: String,
}

impl Default for ExternalCommand {
    fn default() -> Self {
        ExternalCommand {
            command: DEFAULT_SOLVER.to_owned(),
            template: DEFAULT_TEMPLATE.to_owned(),
        }
    }
}

impl ExternalCommand {
    /// The default command, with `SUPPSOLVE_SOLVER` applied if set.
    pub fn from_env() -> Self {
        let mut cmd = Self::default();
        if let Ok(c) = env::var(SOLVER_ENV) {
            if !c.trim().is_empty() {
                cmd.command = c;
            }
        }
        cmd
    }

    /// Whether the command resolves to an executable file.
    pub fn is_available(&self) -> bool {
        let Some(first) = self.command.split_whitespace().next() else {
            return false;
        };
        if first.contains('/') {
            return std::path::Path::new(first).is_file();
        }
        env::var_os("PATH")
            .map(|paths| env::split_paths(&paths).any(|dir| dir.join(first).is_file()))
            .unwrap_or(false)
    }
}

#[derive(Clone, Debug)]
pub struct SolveRequest {
    pub program: Program,
    /// `0` enumerates all models.
    pub model_limit: usize,
    pub backend: Backend,
    pub external: ExternalCommand,
    pub timeout: Duration,
}

impl SolveRequest {
    pub fn internal(program: Program) -> Self {
        SolveRequest {
            program,
            model_limit: 0,
            backend: Backend::Internal,
            external: ExternalCommand::default(),
            timeout: Duration::from_secs(600),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Complete,
    LimitReached,
    Timeout,
    BackendError(String),
}

impl SolveStatus {
    pub fn tag(&self) -> &'static str {
        match self {
            SolveStatus::Complete => "complete",
            SolveStatus::LimitReached => "limit-reached",
            SolveStatus::Timeout => "timeout",
            SolveStatus::BackendError(_) => "backend-error",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::BackendError(msg) => write!(f, "backend-error: {msg}"),
            other => f.write_str(other.tag()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub models: ModelSet,
    pub status: SolveStatus,
    pub wall_time: Duration,
    pub backend_used: Backend,
    /// Peak RSS of the solver process in kilobytes (external backend only).
    pub peak_rss_kb: Option<u64>,
}

/// Computes the stable models of `request.program`.
pub fn solve(request: &SolveRequest) -> SolveResult {
    let start = Instant::now();
    let (models, status, peak_rss_kb) = match request.backend {
        Backend::Internal => {
            let (m, s) = solve_internal(request, start);
            (m, s, None)
        }
        Backend::External => solve_external(request),
    };
    SolveResult {
        models,
        status,
        wall_time: start.elapsed(),
        backend_used: request.backend,
        peak_rss_kb,
    }
}

fn solve_internal(request: &SolveRequest, start: Instant) -> (ModelSet, SolveStatus) {
    let outcome = search::stable_models(
        &request.program,
        SearchLimits {
            max_models: request.model_limit,
            deadline: Some(start + request.timeout),
        },
    );
    let status = match outcome.interrupted {
        None => SolveStatus::Complete,
        Some(Interrupt::LimitReached) => SolveStatus::LimitReached,
        Some(Interrupt::DeadlinePassed) => SolveStatus::Timeout,
    };
    (
        ModelSet::new(outcome.models, request.program.symbols()),
        status,
    )
}

fn solve_external(request: &SolveRequest) -> (ModelSet, SolveStatus, Option<u64>) {
    let fail = |msg: String| (ModelSet::empty(), SolveStatus::BackendError(msg), None);
    let file = match write_program_file(&request.program) {
        Ok(f) => f,
        Err(e) => return fail(format!("cannot write program file: {e}")),
    };
    let models = request.model_limit.to_string();
    let path = file.path().to_string_lossy().into_owned();
    let argv = process::expand_template(
        &request.external.template,
        &[
            ("cmd", &request.external.command),
            ("models", &models),
            ("file", &path),
        ],
    );
    let outcome = match process::run(&argv, request.timeout) {
        Ok(o) => o,
        Err(e) => return fail(format!("cannot launch `{}`: {e}", argv.join(" "))),
    };
    let parsed = parse_external_output(&outcome.stdout, request.program.symbols());
    let status = if outcome.timed_out {
        SolveStatus::Timeout
    } else {
        match outcome.exit_code {
            Some(code) if SOLVER_OK_EXIT.contains(&code) => match parsed.status {
                SolveStatus::Complete
                    if request.model_limit != 0 && parsed.models.len() >= request.model_limit =>
                {
                    SolveStatus::LimitReached
                }
                s => s,
            },
            Some(code) => SolveStatus::BackendError(format!("solver exited with status {code}")),
            None => SolveStatus::BackendError("solver terminated by a signal".into()),
        }
    };
    (parsed.models, status, outcome.peak_rss_kb)
}

fn write_program_file(program: &Program) -> std::io::Result<tempfile::NamedTempFile> {
    let mut file = tempfile::Builder::new()
        .prefix("suppsolve-")
        .suffix(".lp")
        .tempfile()?;
    writeln!(file, "{}", print_program(program))?;
    file.flush()?;
    Ok(file)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedOutput {
    pub models: ModelSet,
    pub status: SolveStatus,
}

/// Reads clingo-style output: each `Answer: <n>` line is followed by a line
/// of space-separated atoms, and a `SATISFIABLE` / `UNSATISFIABLE` /
/// `UNKNOWN` line gives the verdict. Any other lines are ignored.
pub fn parse_external_output(text: &str, symbols: &SymbolTable) -> ParsedOutput {
    let mut models = Vec::new();
    let mut verdict = None;
    let mut lines = text.lines();
    while let Some(line) = lines.next() {
        let line = line.trim();
        if line.starts_with("Answer:") {
            let atoms = lines.next().unwrap_or("");
            let mut m = Interpretation::empty(symbols.len());
            for name in atoms.split_whitespace() {
                match symbols.lookup(name) {
                    Some(a) => m.insert(a),
                    None => {
                        return ParsedOutput {
                            models: ModelSet::new(models, symbols),
                            status: SolveStatus::BackendError(format!(
                                "solver reported unknown atom `{name}`"
                            )),
                        }
                    }
                }
            }
            models.push(m);
        } else if matches!(line, "SATISFIABLE" | "UNSATISFIABLE" | "UNKNOWN") {
            verdict = Some(line.to_owned());
        }
    }
    let status = match verdict.as_deref() {
        Some("SATISFIABLE") if models.is_empty() => {
            SolveStatus::BackendError("SATISFIABLE without any answer".into())
        }
        Some("SATISFIABLE") | Some("UNSATISFIABLE") => SolveStatus::Complete,
        Some(_) => SolveStatus::BackendError("solver verdict UNKNOWN".into()),
        None => SolveStatus::BackendError("missing verdict line".into()),
    };
    ParsedOutput {
        models: ModelSet::new(models, symbols),
        status,
    }
}
