use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::json;
use vi_core::config::{LoadedProblem, Preset, ProblemFile};
use vi_core::schedules::check_step_size;
use vi_core::trace_csv::{format_float, write_csv_file};
use vi_core::{run, validate_conditions, Algorithm, RunStatus, SolverTrace, StoppingRule, ViError};

use crate::cli::{CompareArgs, PresetsArgs, ProblemOpts, RunArgs, StopOpts, ValidateArgs};
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CHECK: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Residual level used to rank algorithms in `compare`.
const RANK_TOL: f64 = 1e-6;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(path: &Path, err: io::Error) -> Failure {
        Failure {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<ViError> for Failure {
    fn from(e: ViError) -> Self {
        Failure::usage(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

fn load(opts: &ProblemOpts) -> Result<LoadedProblem, Failure> {
    let file = match (&opts.source.preset, &opts.source.problem) {
        (Some(name), _) => name.parse::<Preset>()?.problem_file(),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            text.parse::<ProblemFile>().map_err(|e| match e {
                ViError::Parse { line, column, message } => Failure::usage(format!(
                    "{}:{line}:{column}: {message}",
                    path.display()
                )),
                other => other.into(),
            })?
        }
        (None, None) => return Err(Failure::usage("one of --preset or --problem is required")),
    };
    let mut loaded = file.load(opts.strict_schedules)?;
    if let Some(lambda) = opts.lambda {
        loaded.lambda = lambda;
    }
    if let Some(g) = opts.gamma {
        loaded.linesearch.gamma = g;
    }
    if let Some(l) = opts.l {
        loaded.linesearch.l = l;
    }
    if let Some(mu) = opts.mu {
        loaded.linesearch.mu = mu;
    }
    Ok(loaded)
}

fn stopping(opts: &StopOpts) -> StoppingRule {
    StoppingRule {
        residual_tol: opts.tol,
        max_iters: opts.max_iters,
        divergence_norm: opts.divergence_norm,
        halt_on_empty_hint: !opts.no_empty_halt,
    }
}

fn solve(loaded: &LoadedProblem, alg: Algorithm, stop: &StopOpts) -> Result<SolverTrace, ViError> {
    let policy = loaded.policy_for(alg, stop.fixed_step_thegm)?;
    run(&loaded.problem, alg, &policy, Some(&loaded.schedule), &stopping(stop))
}

fn summary(trace: &SolverTrace) -> String {
    let mut line = format!(
        "{}: status={} iterations={} final_residual={} final_norm={}",
        trace.algorithm,
        trace.status,
        trace.iterations(),
        trace.final_residual().map(format_float).unwrap_or_else(|| "-".into()),
        format_float(trace.final_iterate.norm()),
    );
    if let Some(d) = &trace.diagnostic {
        if d.possibly_empty {
            let _ = write!(line, "; {d}");
        }
    }
    if let Some(n) = trace.non_finite_at {
        let _ = write!(line, "; non-finite value at n = {n}");
    }
    line
}

fn exit_for(status: RunStatus) -> i32 {
    match status {
        RunStatus::Converged | RunStatus::MaxIters => EXIT_OK,
        RunStatus::Diverged | RunStatus::LinesearchFailed => EXIT_DIVERGED,
    }
}

pub fn cmd_run(args: &RunArgs) -> CmdResult {
    let alg: Algorithm = args.algorithm.parse()?;
    let loaded = load(&args.problem)?;
    let trace = solve(&loaded, alg, &args.stop)?;

    if let Some(path) = &args.csv {
        write_csv_file(&trace, path).map_err(|e| Failure::io(path, e))?;
    }
    if let Some(path) = &args.svg {
        let series = [(alg.name(), trace.rows.iter().map(|r| r.residual).collect::<Vec<_>>())];
        fs::write(path, svg::residual_chart(&series)).map_err(|e| Failure::io(path, e))?;
    }
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", summary(&trace));
    Ok(exit_for(trace.status))
}

pub fn cmd_compare(args: &CompareArgs) -> CmdResult {
    if args.algorithms.len() < 2 {
        return Err(Failure::usage("compare needs at least two algorithms"));
    }
    let algs = args
        .algorithms
        .iter()
        .map(|a| a.parse::<Algorithm>())
        .collect::<Result<Vec<_>, _>>()?;
    let loaded = load(&args.problem)?;

    let results: Vec<Result<SolverTrace, ViError>> = std::thread::scope(|s| {
        let handles: Vec<_> = algs
            .iter()
            .map(|&alg| {
                let loaded = &loaded;
                let stop = &args.stop;
                s.spawn(move || solve(loaded, alg, stop))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    let traces = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let has_reference = loaded.problem.reference().is_some();
    let columns: Vec<Vec<f64>> = traces
        .iter()
        .map(|t| {
            t.rows
                .iter()
                .map(|r| if has_reference { r.dist_to_reference.unwrap_or(f64::NAN) } else { r.residual })
                .collect()
        })
        .collect();

    if let Some(path) = &args.csv {
        write_wide(path, &traces, &columns).map_err(|e| Failure::io(path, e))?;
    }
    if let Some(path) = &args.svg {
        let series: Vec<_> = traces
            .iter()
            .map(|t| (t.algorithm.name(), t.rows.iter().map(|r| r.residual).collect::<Vec<_>>()))
            .collect();
        fs::write(path, svg::residual_chart(&series)).map_err(|e| Failure::io(path, e))?;
    }

    for t in &traces {
        for w in &t.warnings {
            eprintln!("warning: {}: {w}", t.algorithm);
        }
        println!("{}", summary(t));
    }
    let mut ranked: Vec<(u64, Algorithm)> = traces
        .iter()
        .filter_map(|t| t.iterations_to(RANK_TOL).map(|n| (n, t.algorithm)))
        .collect();
    ranked.sort_by_key(|&(n, _)| n);
    if ranked.is_empty() {
        println!("ranking: none (no algorithm reached residual {RANK_TOL:e})");
    } else {
        let list: Vec<String> = ranked.iter().map(|(n, a)| format!("{a} ({n})")).collect();
        println!("ranking (iterations to residual {RANK_TOL:e}): {}", list.join(", "));
    }

    if traces.iter().all(|t| exit_for(t.status) == EXIT_DIVERGED) {
        Ok(EXIT_DIVERGED)
    } else {
        Ok(EXIT_OK)
    }
}

fn write_wide(path: &Path, traces: &[SolverTrace], columns: &[Vec<f64>]) -> io::Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let names: Vec<&str> = traces.iter().map(|t| t.algorithm.name()).collect();
    writeln!(out, "iter,{}", names.join(","))?;
    let start = traces.iter().filter_map(|t| t.rows.first().map(|r| r.iter)).min().unwrap_or(1);
    let len = columns.iter().map(Vec::len).max().unwrap_or(0);
    for i in 0..len {
        let cells: Vec<String> = columns
            .iter()
            .map(|c| c.get(i).map(|&v| format_float(v)).unwrap_or_default())
            .collect();
        writeln!(out, "{},{}", start + i as u64, cells.join(","))?;
    }
    let statuses: Vec<String> = traces.iter().map(|t| format!("{}={}", t.algorithm, t.status)).collect();
    writeln!(out, "# status {}", statuses.join(" "))?;
    out.flush()
}

pub fn cmd_validate(args: &ValidateArgs) -> CmdResult {
    let loaded = load(&args.problem)?;
    let report = validate_conditions(&loaded.schedule);
    let step = check_step_size(loaded.lambda, loaded.problem.lipschitz());

    for c in report.checks.iter().chain(std::iter::once(&step)) {
        println!("{:<6} {}  [{}]", c.verdict.to_string(), c.condition.label(), c.rule);
    }
    let range = &report.range;
    if range.is_clean() {
        println!("beta range: alpha_n, beta_n in [0, 1] for n <= {}", range.checked_up_to);
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    let ok = report.all_pass() && step.verdict == vi_core::schedules::Verdict::Pass;
    println!("{}", if ok { "all conditions hold" } else { "some conditions fail" });
    Ok(if ok { EXIT_OK } else { EXIT_FAILED_CHECK })
}

pub fn cmd_presets(args: &PresetsArgs) -> CmdResult {
    if let Some(name) = &args.name {
        let preset: Preset = name.parse()?;
        println!("{}", preset.problem_file().to_json_pretty());
    } else if args.json {
        let list: Vec<_> = Preset::ALL
            .iter()
            .map(|p| {
                json!({
                    "name": p.name(),
                    "description": p.description(),
                    "has_solution": p.has_solution(),
                    "problem": p.problem_file(),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&list).expect("preset listing serializes"));
    } else {
        for p in Preset::ALL {
            println!("{:<10} {}", p.name(), p.description());
        }
    }
    Ok(EXIT_OK)
}
