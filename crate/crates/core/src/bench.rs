//! Random benchmark families and a timing harness comparing the
//! transformation pipeline with completion + SAT.

use std::env;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::backend::{self, Backend, ExternalCommand, SolveRequest, SolveStatus};
use crate::completion::{complete, emit_dimacs, CnfFormula, Lit};
use crate::process;
use crate::program::{Program, Rule};
use crate::semantics::{enumerate_supported_capped, ModelSet, DEFAULT_ATOM_CAP};
use crate::transform::transform;

/// Environment variable naming the external SAT solver.
pub const SAT_ENV: &str = "SUPPSOLVE_SAT";
pub const DEFAULT_SAT_TEMPLATE: &str = "{cmd} {file}";

pub const CSV_COLUMNS: [&str; 13] = [
    "family",
    "num_atoms",
    "num_rules",
    "max_body",
    "neg_prob",
    "cycle_frac",
    "seed",
    "rep",
    "pipeline",
    "wall_time_s",
    "model_count",
    "status",
    "peak_rss_mb",
];

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("invalid benchmark config: {0}")]
    InvalidConfig(String),
    #[error("unknown {kind} `{value}`")]
    UnknownName { kind: &'static str, value: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// Layered rules only; no dependency cycles of any kind.
    Acyclic,
    /// Layered rules plus `a :- a.` self-loops.
    Cyclic,
    /// Layered and unrestricted rules plus self-loops.
    Mixed,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Acyclic => "acyclic",
            Family::Cyclic => "cyclic",
            Family::Mixed => "mixed",
        })
    }
}

impl FromStr for Family {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "acyclic" => Ok(Family::Acyclic),
            "cyclic" => Ok(Family::Cyclic),
            "mixed" => Ok(Family::Mixed),
            _ => Err(BenchError::UnknownName {
                kind: "family",
                value: s.to_owned(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pipeline {
    TransformAsp,
    CompletionSat,
    Oracle,
}

impl Pipeline {
    pub const ALL: [Pipeline; 3] = [
        Pipeline::TransformAsp,
        Pipeline::CompletionSat,
        Pipeline::Oracle,
    ];
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::TransformAsp => "transform-asp",
            Pipeline::CompletionSat => "completion-sat",
            Pipeline::Oracle => "oracle",
        })
    }
}

impl FromStr for Pipeline {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "transform-asp" => Ok(Pipeline::TransformAsp),
            "completion-sat" => Ok(Pipeline::CompletionSat),
            "oracle" => Ok(Pipeline::Oracle),
            _ => Err(BenchError::UnknownName {
                kind: "pipeline",
                value: s.to_owned(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub family: Family,
    pub num_atoms: usize,
    pub num_rules: usize,
    pub max_body: usize,
    pub neg_prob: f64,
    pub cycle_frac: f64,
    pub seed: u64,
    pub repetitions: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            family: Family::Cyclic,
            num_atoms: 10,
            num_rules: 10,
            max_body: 3,
            neg_prob: 0.3,
            cycle_frac: 0.5,
            seed: 1,
            repetitions: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let invalid = |msg: String| Err(BenchError::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.neg_prob) {
            return invalid(format!("neg_prob {} outside [0, 1]", self.neg_prob));
        }
        if !(0.0..=1.0).contains(&self.cycle_frac) {
            return invalid(format!("cycle_frac {} outside [0, 1]", self.cycle_frac));
        }
        if self.repetitions == 0 {
            return invalid("repetitions must be at least 1".into());
        }
        if self.max_body > self.num_atoms {
            return invalid(format!(
                "max_body {} exceeds num_atoms {}",
                self.max_body, self.num_atoms
            ));
        }
        if self.num_rules > 0 && self.num_atoms == 0 {
            return invalid("rules need at least one atom".into());
        }
        Ok(())
    }

    fn self_loop_count(&self) -> usize {
        match self.family {
            Family::Acyclic => 0,
            Family::Cyclic | Family::Mixed => {
                (self.cycle_frac * self.num_atoms as f64).ceil() as usize
            }
        }
    }
}

/// Generates the program for `config`. Same config, same program.
///
/// Atoms are `a1..aN`. A layered rule with head `ai` draws its body only from
/// `a1..a(i-1)`, so layered rules alone never form a cycle. Mixed instances
/// make about half of the rules unrestricted. Self-loops go last.
pub fn generate(config: &BenchConfig) -> Result<Program, BenchError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut program = Program::new();
    let n = config.num_atoms;
    let name = |i: usize| format!("a{}", i + 1);

    for _ in 0..config.num_rules {
        let free = config.family == Family::Mixed && rng.gen_bool(0.5);
        let head = rng.gen_range(0..n);
        let pool = if free { n } else { head };
        let size = rng.gen_range(0..=config.max_body.min(pool));
        let mut body = sample(&mut rng, pool, size).into_vec();
        body.sort_unstable();
        let head_id = program.atom(&name(head));
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for b in body {
            let id = program.atom(&name(b));
            if rng.gen_bool(config.neg_prob) {
                neg.push(id);
            } else {
                pos.push(id);
            }
        }
        program.push_rule(Rule::new(Some(head_id), pos, neg));
    }

    let mut loops = sample(&mut rng, n, config.self_loop_count().min(n)).into_vec();
    loops.sort_unstable();
    for i in loops {
        let a = program.atom(&name(i));
        program.push_rule(Rule::new(Some(a), [a], []));
    }
    Ok(program)
}

/// How to call an external SAT solver that prints `s ...` / `v ...` lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatCommand {
    pub command: String,
    pub template: String,
}

impl SatCommand {
    pub fn from_env() -> Option<Self> {
        env::var(SAT_ENV)
            .ok()
            .filter(|c| !c.trim().is_empty())
            .map(|command| SatCommand {
                command,
                template: DEFAULT_SAT_TEMPLATE.to_owned(),
            })
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub jobs: usize,
    pub timeout: Duration,
    pub oracle_cap: usize,
    pub backend: Backend,
    pub solver: ExternalCommand,
    pub sat: Option<SatCommand>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            jobs: 1,
            timeout: Duration::from_secs(60),
            oracle_cap: DEFAULT_ATOM_CAP,
            backend: Backend::Internal,
            solver: ExternalCommand::default(),
            sat: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRecord {
    pub config: BenchConfig,
    pub config_index: usize,
    pub pipeline: Pipeline,
    pub rep: usize,
    pub wall_time: Duration,
    pub model_count: Option<usize>,
    pub status: String,
    pub peak_rss_kb: Option<u64>,
}

struct Measured {
    model_count: Option<usize>,
    status: String,
    peak_rss_kb: Option<u64>,
}

fn counted(status: &SolveStatus, count: usize) -> Option<usize> {
    matches!(status, SolveStatus::Complete | SolveStatus::LimitReached).then_some(count)
}

fn run_transform_asp(program: &Program, options: &BenchOptions) -> Measured {
    let result = match transform(program) {
        Ok(r) => r,
        Err(e) => {
            return Measured {
                model_count: None,
                status: format!("error: {e}"),
                peak_rss_kb: None,
            }
        }
    };
    let solved = backend::solve(&SolveRequest {
        program: result.transformed().clone(),
        model_limit: 0,
        backend: options.backend,
        external: options.solver.clone(),
        timeout: options.timeout,
    });
    let projected = ModelSet::new(
        solved.models.iter().map(|m| result.project(m)),
        program.symbols(),
    );
    Measured {
        model_count: counted(&solved.status, projected.len()),
        status: solved.status.tag().to_owned(),
        peak_rss_kb: solved.peak_rss_kb,
    }
}

fn run_oracle(program: &Program, options: &BenchOptions) -> Measured {
    match enumerate_supported_capped(program, options.oracle_cap) {
        Ok(models) => Measured {
            model_count: Some(models.len()),
            status: "complete".into(),
            peak_rss_kb: None,
        },
        Err(_) => Measured {
            model_count: None,
            status: "cap-exceeded".into(),
            peak_rss_kb: None,
        },
    }
}

fn run_completion_sat(program: &Program, options: &BenchOptions) -> Measured {
    let Some(sat) = &options.sat else {
        return Measured {
            model_count: None,
            status: "skipped".into(),
            peak_rss_kb: None,
        };
    };
    let formula = complete(program);
    let atom_vars: Vec<u32> = program
        .atoms()
        .into_iter()
        .map(CnfFormula::atom_var)
        .collect();
    let outcome = enumerate_sat_models(&formula, &atom_vars, sat, options.timeout);
    Measured {
        model_count: counted(&outcome.status, outcome.count),
        status: outcome.status.tag().to_owned(),
        peak_rss_kb: outcome.peak_rss_kb,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatAnswer {
    Sat(Vec<Lit>),
    Unsat,
}

/// Reads SAT-competition output (`s SATISFIABLE`, `v` value lines).
pub fn parse_sat_output(text: &str) -> Result<SatAnswer, String> {
    let mut verdict = None;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            verdict = Some(rest.trim().to_owned());
        } else if let Some(rest) = line.strip_prefix('v') {
            for tok in rest.split_whitespace() {
                let lit: Lit = tok
                    .parse()
                    .map_err(|_| format!("bad literal `{tok}` in value line"))?;
                if lit != 0 {
                    values.push(lit);
                }
            }
        }
    }
    match verdict.as_deref() {
        Some("SATISFIABLE") => Ok(SatAnswer::Sat(values)),
        Some("UNSATISFIABLE") => Ok(SatAnswer::Unsat),
        Some(other) => Err(format!("solver verdict `{other}`")),
        None => Err("missing `s` verdict line".into()),
    }
}

#[derive(Clone, Debug)]
pub struct SatEnumeration {
    pub count: usize,
    pub status: SolveStatus,
    pub peak_rss_kb: Option<u64>,
}

/// Counts the models of `formula` projected onto `project_vars` by calling
/// the SAT solver repeatedly, blocking each projected model after it is found.
pub fn enumerate_sat_models(
    formula: &CnfFormula,
    project_vars: &[u32],
    sat: &SatCommand,
    timeout: Duration,
) -> SatEnumeration {
    let start = Instant::now();
    let mut working = formula.clone();
    let mut count = 0;
    let mut peak_rss_kb: Option<u64> = None;
    let finish = |count, status, peak| SatEnumeration {
        count,
        status,
        peak_rss_kb: peak,
    };
    loop {
        let remaining = timeout.saturating_sub(start.elapsed());
        if remaining.is_zero() {
            return finish(count, SolveStatus::Timeout, peak_rss_kb);
        }
        let file = match write_cnf(&working) {
            Ok(f) => f,
            Err(e) => {
                return finish(
                    count,
                    SolveStatus::BackendError(format!("cannot write CNF: {e}")),
                    peak_rss_kb,
                )
            }
        };
        let path = file.path().to_string_lossy().into_owned();
        let argv =
            process::expand_template(&sat.template, &[("cmd", &sat.command), ("file", &path)]);
        let outcome = match process::run(&argv, remaining) {
            Ok(o) => o,
            Err(e) => {
                return finish(
                    count,
                    SolveStatus::BackendError(format!("cannot launch SAT solver: {e}")),
                    peak_rss_kb,
                )
            }
        };
        peak_rss_kb = peak_rss_kb.max(outcome.peak_rss_kb);
        if outcome.timed_out {
            return finish(count, SolveStatus::Timeout, peak_rss_kb);
        }
        match parse_sat_output(&outcome.stdout) {
            Ok(SatAnswer::Unsat) => return finish(count, SolveStatus::Complete, peak_rss_kb),
            Ok(SatAnswer::Sat(values)) => {
                count += 1;
                let positive: std::collections::HashSet<u32> = values
                    .iter()
                    .filter(|&&l| l > 0)
                    .map(|&l| l as u32)
                    .collect();
                let blocking = project_vars
                    .iter()
                    .map(|&v| {
                        if positive.contains(&v) {
                            -(v as Lit)
                        } else {
                            v as Lit
                        }
                    })
                    .collect::<Vec<_>>();
                if blocking.is_empty() {
                    // Only one projected model exists over an empty vocabulary.
                    return finish(count, SolveStatus::Complete, peak_rss_kb);
                }
                working.clauses.push(blocking);
            }
            Err(e) => return finish(count, SolveStatus::BackendError(e), peak_rss_kb),
        }
    }
}

fn write_cnf(formula: &CnfFormula) -> io::Result<tempfile::NamedTempFile> {
    let mut file = tempfile::Builder::new()
        .prefix("suppsolve-")
        .suffix(".cnf")
        .tempfile()?;
    writeln!(file, "{}", emit_dimacs(formula))?;
    file.flush()?;
    Ok(file)
}

/// Runs every selected pipeline `repetitions` times on each config.
///
/// Rows run on up to `options.jobs` threads and come back sorted by config,
/// pipeline and repetition. A failing row records its status and never
/// aborts the sweep.
pub fn run(
    configs: &[BenchConfig],
    pipelines: &[Pipeline],
    options: &BenchOptions,
) -> Vec<BenchRecord> {
    let programs: Vec<Result<Program, BenchError>> = configs.iter().map(generate).collect();
    let mut tasks = Vec::new();
    for (ci, config) in configs.iter().enumerate() {
        for &pipeline in pipelines {
            for rep in 0..config.repetitions.max(1) {
                tasks.push((ci, pipeline, rep));
            }
        }
    }
    let run_task = |&(ci, pipeline, rep): &(usize, Pipeline, usize)| {
        let start = Instant::now();
        let measured = match &programs[ci] {
            Err(e) => Measured {
                model_count: None,
                status: format!("error: {e}"),
                peak_rss_kb: None,
            },
            Ok(program) => match pipeline {
                Pipeline::TransformAsp => run_transform_asp(program, options),
                Pipeline::CompletionSat => run_completion_sat(program, options),
                Pipeline::Oracle => run_oracle(program, options),
            },
        };
        BenchRecord {
            config: configs[ci].clone(),
            config_index: ci,
            pipeline,
            rep,
            wall_time: start.elapsed(),
            model_count: measured.model_count,
            status: measured.status,
            peak_rss_kb: measured.peak_rss_kb,
        }
    };
    let mut records: Vec<BenchRecord> = match rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
    {
        Ok(pool) => pool.install(|| tasks.par_iter().map(run_task).collect()),
        Err(_) => tasks.iter().map(run_task).collect(),
    };
    records.sort_by_key(|r| (r.config_index, r.pipeline, r.rep));
    records
}

#[derive(Serialize)]
struct CsvRow<'a> {
    family: String,
    num_atoms: usize,
    num_rules: usize,
    max_body: usize,
    neg_prob: f64,
    cycle_frac: f64,
    seed: u64,
    rep: usize,
    pipeline: String,
    wall_time_s: String,
    model_count: Option<usize>,
    status: &'a str,
    peak_rss_mb: Option<String>,
}

/// Writes the environment comment header, the column header and one row
/// per record.
pub fn write_csv<W: Write>(records: &[BenchRecord], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "# suppsolve bench {}; os={}; arch={}; cpus={}",
        env!("CARGO_PKG_VERSION"),
        env::consts::OS,
        env::consts::ARCH,
        std::thread::available_parallelism().map_or(1, |n| n.get()),
    )?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    writer.write_record(CSV_COLUMNS)?;
    for r in records {
        writer.serialize(CsvRow {
            family: r.config.family.to_string(),
            num_atoms: r.config.num_atoms,
            num_rules: r.config.num_rules,
            max_body: r.config.max_body,
            neg_prob: r.config.neg_prob,
            cycle_frac: r.config.cycle_frac,
            seed: r.config.seed,
            rep: r.rep,
            pipeline: r.pipeline.to_string(),
            wall_time_s: format!("{:.6}", r.wall_time.as_secs_f64()),
            model_count: r.model_count,
            status: &r.status,
            peak_rss_mb: r.peak_rss_kb.map(|kb| format!("{:.1}", kb as f64 / 1024.0)),
        })?;
    }
    writer.flush()?;
    Ok(())
}
