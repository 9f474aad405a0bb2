//! `suppsolve`: compute supported models of ground normal logic programs.
//!
//! Exit codes: 0 success, 1 no models with `--expect-some` (or a `check`
//! verdict of `none`), 2 input errors, 3 backend errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use suppsolve_core::backend::{self, Backend, ExternalCommand, SolveRequest, SolveStatus};
use suppsolve_core::bench::{self, BenchConfig, BenchOptions, Family, Pipeline, SatCommand};
use suppsolve_core::completion::{complete, emit_dimacs};
use suppsolve_core::semantics::{self, ModelSet, DEFAULT_ATOM_CAP};
use suppsolve_core::transform::{transform_with, TransformOptions, RESERVED_PREFIX};
use suppsolve_core::{parse_program_with, print_program, ParseOptions, Program};

const EXIT_NO_MODELS: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BACKEND: u8 = 3;

#[derive(Parser)]
#[command(
    name = "suppsolve",
    version,
    about = "Supported models via stable-model solving"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the transformed program whose stable models encode the supported models.
    Transform(TransformArgs),
    /// Transform, solve and project, then report statistics.
    Solve(SolveArgs),
    /// Print the supported models of a program.
    Supported(SupportedArgs),
    /// Print the stable models of a program as given.
    Stable(StableArgs),
    /// Classify an interpretation as stable, supported, model or none.
    Check(CheckArgs),
    /// Write Clark's completion as DIMACS CNF.
    Complete(CompleteArgs),
    /// Time the pipelines on generated programs and write CSV.
    Bench(BenchArgs),
    /// Print a generated benchmark program.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    /// In-process stable-model search.
    Internal,
    /// External solver process (`SUPPSOLVE_SOLVER`, default `clingo`).
    External,
    /// Brute-force enumeration over all interpretations.
    Oracle,
}

#[derive(Args)]
struct Input {
    /// Program file; `-` or omitted reads standard input.
    input: Option<PathBuf>,
}

#[derive(Args)]
struct SolverOpts {
    #[arg(long, value_enum, default_value = "internal")]
    backend: BackendArg,
    /// Maximum number of models, 0 for all.
    #[arg(long = "models", default_value_t = 0)]
    model_limit: usize,
    /// External solver command; overrides SUPPSOLVE_SOLVER.
    #[arg(long)]
    solver: Option<String>,
    /// External command template using {cmd}, {models} and {file}.
    #[arg(long, default_value = backend::DEFAULT_TEMPLATE)]
    solver_template: String,
    /// Timeout in seconds.
    #[arg(long, default_value_t = 600.0)]
    timeout: f64,
    /// Atom cap for the oracle backend.
    #[arg(long, default_value_t = DEFAULT_ATOM_CAP)]
    cap: usize,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    input: Input,
    /// Emit facts unchanged instead of through an auxiliary atom.
    #[arg(long)]
    simplify_facts: bool,
    /// Also write the auxiliary-atom map (`<aux-name>\t<rule-index>`).
    #[arg(long)]
    aux_map: Option<PathBuf>,
    /// Output file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SupportedArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    solver: SolverOpts,
    /// Also print the unprojected stable models of the transformed program.
    #[arg(long)]
    show_aux: bool,
    /// Exit with status 1 when there is no supported model.
    #[arg(long)]
    expect_some: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    solver: SolverOpts,
}

#[derive(Args)]
struct StableArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    solver: SolverOpts,
    /// Drop auxiliary `_dm_` atoms from every printed model.
    #[arg(long)]
    project: bool,
    /// Exit with status 1 when there is no stable model.
    #[arg(long)]
    expect_some: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: Input,
    /// Space-separated atoms of the interpretation to check.
    #[arg(long, allow_hyphen_values = true)]
    model: String,
}

#[derive(Args)]
struct CompleteArgs {
    #[command(flatten)]
    input: Input,
    /// Output file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GeneratorOpts {
    #[arg(long, default_value = "cyclic")]
    family: Family,
    #[arg(long, default_value_t = 10)]
    atoms: usize,
    #[arg(long, default_value_t = 10)]
    rules: usize,
    #[arg(long, default_value_t = 3)]
    max_body: usize,
    #[arg(long, default_value_t = 0.3)]
    neg_prob: f64,
    #[arg(long, default_value_t = 0.5)]
    cycle_frac: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    gen: GeneratorOpts,
}

#[derive(Args)]
struct BenchArgs {
    /// Families to sweep (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "acyclic,cyclic")]
    families: Vec<Family>,
    /// Atom counts to sweep (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "10")]
    atoms: Vec<usize>,
    /// Rule counts to sweep (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "10")]
    rules: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    max_body: usize,
    #[arg(long, default_value_t = 0.3)]
    neg_prob: f64,
    #[arg(long, default_value_t = 0.5)]
    cycle_frac: f64,
    /// Seeds to sweep (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "transform-asp,completion-sat,oracle"
    )]
    pipelines: Vec<Pipeline>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Per-row timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Atom cap for the oracle pipeline.
    #[arg(long, default_value_t = DEFAULT_ATOM_CAP)]
    cap: usize,
    /// Use the external stable-model solver for transform-asp.
    #[arg(long)]
    external: bool,
    /// CSV output file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// A failure mapped to an exit code, with its message for standard error.
struct Failure {
    code: u8,
    message: String,
}

type CliResult = Result<u8, Failure>;

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn backend_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_BACKEND,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Transform(a) => cmd_transform(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Supported(a) => cmd_supported(a),
        Command::Stable(a) => cmd_stable(a),
        Command::Check(a) => cmd_check(a),
        Command::Complete(a) => cmd_complete(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_program(input: &Input, allow_reserved: bool) -> Result<Program, Failure> {
    let (label, text) = match input.input.as_deref() {
        None => ("<stdin>".to_owned(), read_stdin()?),
        Some(p) if p == Path::new("-") => ("<stdin>".to_owned(), read_stdin()?),
        Some(p) => (
            p.display().to_string(),
            fs::read_to_string(p)
                .map_err(|e| input_error(format!("cannot read {}: {e}", p.display())))?,
        ),
    };
    parse_program_with(&text, ParseOptions { allow_reserved })
        .map_err(|e| input_error(format!("{label}:{e}")))
}

fn read_stdin() -> Result<String, Failure> {
    let mut text = String::new();
    io::stdin()
        .read_to_string(&mut text)
        .map_err(|e| input_error(format!("cannot read standard input: {e}")))?;
    Ok(text)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let mut body = text.to_owned();
    if !body.is_empty() {
        body.push('\n');
    }
    match path {
        Some(p) => fs::write(p, body)
            .map_err(|e| input_error(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| input_error(format!("cannot write standard output: {e}")))
        }
    }
}

fn print_models(models: &ModelSet, program: &Program) {
    let mut out = io::stdout().lock();
    for m in models {
        let _ = writeln!(out, "{}", m.display(program.symbols()));
    }
}

fn timeout_of(secs: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(secs)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| input_error(format!("timeout must be positive, got {secs}")))
}

struct Solved {
    models: ModelSet,
    status: SolveStatus,
    backend: &'static str,
}

/// Stable models of `program` through the selected backend.
fn stable_models(program: &Program, opts: &SolverOpts) -> Result<Solved, Failure> {
    let backend = match opts.backend {
        BackendArg::Oracle => {
            let models = semantics::enumerate_stable_capped(program, opts.cap)
                .map_err(|e| backend_error(e.to_string()))?;
            return Ok(Solved {
                models,
                status: SolveStatus::Complete,
                backend: "oracle",
            });
        }
        BackendArg::Internal => Backend::Internal,
        BackendArg::External => Backend::External,
    };
    let mut external = ExternalCommand::from_env();
    if let Some(cmd) = &opts.solver {
        external.command = cmd.clone();
    }
    external.template = opts.solver_template.clone();
    let result = backend::solve(&SolveRequest {
        program: program.clone(),
        model_limit: opts.model_limit,
        backend,
        external,
        timeout: timeout_of(opts.timeout)?,
    });
    Ok(Solved {
        models: result.models,
        status: result.status,
        backend: match backend {
            Backend::Internal => "internal",
            Backend::External => "external",
        },
    })
}

fn status_exit(status: &SolveStatus) -> Result<(), Failure> {
    match status {
        SolveStatus::Complete => Ok(()),
        SolveStatus::LimitReached => {
            eprintln!("% model limit reached; the listing may be incomplete");
            Ok(())
        }
        SolveStatus::Timeout => Err(backend_error("solver timed out; partial listing above")),
        SolveStatus::BackendError(msg) => Err(backend_error(msg.clone())),
    }
}

struct SupportedRun {
    supported: ModelSet,
    raw: Option<(Program, ModelSet)>,
    status: SolveStatus,
    backend: &'static str,
    sizes: Option<(usize, usize)>,
}

/// Supported models by transform + stable models + projection, or by the
/// brute-force oracle.
fn supported_models(program: &Program, opts: &SolverOpts) -> Result<SupportedRun, Failure> {
    if let BackendArg::Oracle = opts.backend {
        let supported = semantics::enumerate_supported_capped(program, opts.cap)
            .map_err(|e| backend_error(e.to_string()))?;
        return Ok(SupportedRun {
            supported,
            raw: None,
            status: SolveStatus::Complete,
            backend: "oracle",
            sizes: None,
        });
    }
    let result = transform_with(program, TransformOptions::default())
        .map_err(|e| input_error(e.to_string()))?;
    let solved = stable_models(result.transformed(), opts)?;
    let supported = ModelSet::new(
        solved.models.iter().map(|m| result.project(m)),
        program.symbols(),
    );
    let report = result.size_report();
    Ok(SupportedRun {
        supported,
        status: solved.status,
        backend: solved.backend,
        sizes: Some((report.rules, report.atoms)),
        raw: Some((result.into_transformed(), solved.models)),
    })
}

fn cmd_transform(args: TransformArgs) -> CliResult {
    let program = read_program(&args.input, false)?;
    let options = TransformOptions {
        simplify_facts: args.simplify_facts,
    };
    let result = transform_with(&program, options).map_err(|e| input_error(e.to_string()))?;
    if let Some(path) = &args.aux_map {
        fs::write(path, result.aux_map_tsv())
            .map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))?;
    }
    write_output(args.output.as_deref(), &print_program(result.transformed()))?;
    Ok(0)
}

fn cmd_supported(args: SupportedArgs) -> CliResult {
    let program = read_program(&args.input, false)?;
    let run = supported_models(&program, &args.solver)?;
    print_models(&run.supported, &program);
    if args.show_aux {
        if let Some((transformed, raw)) = &run.raw {
            println!("% stable models of the transformed program:");
            print_models(raw, transformed);
        }
    }
    status_exit(&run.status)?;
    if args.expect_some && run.supported.is_empty() {
        return Ok(EXIT_NO_MODELS);
    }
    Ok(0)
}

fn cmd_solve(args: SolveArgs) -> CliResult {
    let program = read_program(&args.input, false)?;
    let start = std::time::Instant::now();
    let run = supported_models(&program, &args.solver)?;
    print_models(&run.supported, &program);
    println!("% backend: {}", run.backend);
    println!("% status: {}", run.status.tag());
    println!("% supported models: {}", run.supported.len());
    if let Some((rules, atoms)) = run.sizes {
        println!("% transformed program: {rules} rules, {atoms} atoms");
    }
    eprintln!("% time: {:.3}s", start.elapsed().as_secs_f64());
    status_exit(&run.status)?;
    Ok(0)
}

fn cmd_stable(args: StableArgs) -> CliResult {
    let program = read_program(&args.input, true)?;
    let solved = stable_models(&program, &args.solver)?;
    let models = if args.project {
        ModelSet::new(
            solved.models.iter().map(|m| {
                let mut m = m.clone();
                for a in m.clone().iter() {
                    if program.symbols().name(a).starts_with(RESERVED_PREFIX) {
                        m.remove(a);
                    }
                }
                m
            }),
            program.symbols(),
        )
    } else {
        solved.models
    };
    print_models(&models, &program);
    status_exit(&solved.status)?;
    if args.expect_some && models.is_empty() {
        return Ok(EXIT_NO_MODELS);
    }
    Ok(0)
}

fn cmd_check(args: CheckArgs) -> CliResult {
    let program = read_program(&args.input, true)?;
    let m = program
        .interpretation(args.model.split_whitespace())
        .map_err(|e| input_error(e.to_string()))?;
    let verdict = if semantics::is_stable(&program, &m) {
        "stable"
    } else if semantics::is_supported(&program, &m) {
        "supported"
    } else if semantics::is_model(&program, &m) {
        "model"
    } else {
        "none"
    };
    println!("{verdict}");
    Ok(if verdict == "none" { EXIT_NO_MODELS } else { 0 })
}

fn cmd_complete(args: CompleteArgs) -> CliResult {
    let program = read_program(&args.input, true)?;
    write_output(args.output.as_deref(), &emit_dimacs(&complete(&program)))?;
    Ok(0)
}

fn cmd_generate(args: GenerateArgs) -> CliResult {
    let g = args.gen;
    let config = BenchConfig {
        family: g.family,
        num_atoms: g.atoms,
        num_rules: g.rules,
        max_body: g.max_body,
        neg_prob: g.neg_prob,
        cycle_frac: g.cycle_frac,
        seed: g.seed,
        repetitions: 1,
    };
    let program = bench::generate(&config).map_err(|e| input_error(e.to_string()))?;
    write_output(None, &print_program(&program))?;
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    let mut configs = Vec::new();
    for &family in &args.families {
        for &num_atoms in &args.atoms {
            for &num_rules in &args.rules {
                for &seed in &args.seeds {
                    configs.push(BenchConfig {
                        family,
                        num_atoms,
                        num_rules,
                        max_body: args.max_body.min(num_atoms),
                        neg_prob: args.neg_prob,
                        cycle_frac: args.cycle_frac,
                        seed,
                        repetitions: args.reps,
                    });
                }
            }
        }
    }
    let options = BenchOptions {
        jobs: args.jobs,
        timeout: timeout_of(args.timeout)?,
        oracle_cap: args.cap,
        backend: if args.external {
            Backend::External
        } else {
            Backend::Internal
        },
        solver: ExternalCommand::from_env(),
        sat: SatCommand::from_env(),
    };
    let records = bench::run(&configs, &args.pipelines, &options);
    let mut buf = Vec::new();
    bench::write_csv(&records, &mut buf).map_err(|e| input_error(e.to_string()))?;
    let text = String::from_utf8(buf).expect("csv is utf-8");
    match &args.output {
        Some(p) => fs::write(p, text)
            .map_err(|e| input_error(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    Ok(0)
}
