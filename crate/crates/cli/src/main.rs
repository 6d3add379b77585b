//! Command-line front end: single evaluations, x-sweeps, bound tables, MC
//! runs, cross-method validation reports, and figure reproduction.

mod figures;
mod output;
mod run;
mod validate;

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use pbfun_core::bounds::{lower_bound_concave, sandwich_bounds, upper_bound_convex};
use pbfun_core::mc::{mc_pb, MCConfig};
use pbfun_core::problem::{Domain, Drift, Flag, Problem};
use pbfun_core::quad::QuadConfig;

use output::{emit, flags_str, num, Row};
use run::{evaluate, exit_code_for, parse_domain, parse_drift, parse_generator, Sel};

#[derive(Parser)]
#[command(name = "pbfun", version, about = "Sojourn-time functionals of Gaussian processes with drift")]
struct Cli {
    /// key=value file merged under command-line flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate B_alpha^h(x, E) once
    Eval(EvalArgs),
    /// Sweep x over a grid
    Table(TableArgs),
    /// Tabulate lower/upper bounds against a reference value
    Bounds(TableArgs),
    /// Monte Carlo estimate with diagnostics
    Mc(McArgs),
    /// Cross-method consistency report
    Validate(ValidateArgs),
    /// Regenerate the survey figures as CSV (+ optional SVG)
    Figures(FiguresArgs),
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// self-similarity index of the process (0, 2]
    #[arg(long)]
    alpha: Option<f64>,
    /// zero | power:c=<r> | plq:c=<r>,lambda=<r>
    #[arg(long)]
    drift: Option<String>,
    /// half | <a>:<b>
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// auto | closed | constructive | printed | semi_closed | quadrature | event | mc
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    method: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    /// number of grid points on [x_min, x_max)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long)]
    n_paths: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// exact_line | exact_bm | cholesky | circulant
    #[arg(long)]
    generator: Option<String>,
    /// re-estimate at dt/2 to expose discretization bias
    #[arg(long)]
    refine: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// comma-separated subset of 1..5
    #[arg(long)]
    scenarios: Option<String>,
    #[arg(long)]
    n_paths: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FiguresArgs {
    /// output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// comma-separated subset of 1..4
    #[arg(long)]
    which: Option<String>,
    /// also render 800x600 polyline plots
    #[arg(long)]
    svg: bool,
}

/// key=value lines; '#' starts a comment.
fn load_config(path: &Option<PathBuf>) -> Result<HashMap<String, String>, String> {
    let mut map = HashMap::new();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
        for line in text.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("bad config line '{line}'"))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(map)
}

/// Flag value if given, else config-file value, else None.
fn pick<T: FromStr>(flag: Option<T>, cfg: &HashMap<String, String>, key: &str) -> Result<Option<T>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.get(key) {
        Some(v) => v.parse().map(Some).map_err(|_| format!("bad config value for {key}")),
        None => Ok(None),
    }
}

struct Common {
    problem_proto: Problem,
    format: String,
    out: Option<PathBuf>,
}

fn build_problem(a: &ProblemArgs, cfg: &HashMap<String, String>, x: f64) -> Result<Common, String> {
    let alpha = pick(a.alpha, cfg, "alpha")?.unwrap_or(2.0);
    let drift = parse_drift(&pick(a.drift.clone(), cfg, "drift")?.unwrap_or_else(|| "zero".into()))?;
    let domain = parse_domain(&pick(a.domain.clone(), cfg, "domain")?.unwrap_or_else(|| "half".into()))?;
    let format = pick(a.format.clone(), cfg, "format")?.unwrap_or_else(|| "csv".into());
    if format != "csv" && format != "json" {
        return Err(format!("unknown format '{format}'"));
    }
    Ok(Common {
        problem_proto: Problem { alpha, drift, domain, x },
        format: format.clone(),
        out: a.out.clone(),
    })
}

fn mc_config(
    n_paths: Option<u64>,
    dt: Option<f64>,
    seed: Option<u64>,
    horizon: Option<f64>,
    generator: &Option<String>,
    refine: bool,
    cfg: &HashMap<String, String>,
) -> Result<MCConfig, String> {
    let mut m = MCConfig::default();
    if let Some(n) = pick(n_paths, cfg, "n_paths")? {
        m.n_paths = n;
    }
    if let Some(d) = pick(dt, cfg, "dt")? {
        m.dt = d;
    }
    if let Some(s) = pick(seed, cfg, "seed")? {
        m.seed = s;
    }
    if let Some(h) = pick(horizon, cfg, "horizon")? {
        m.horizon = Some(h);
    }
    if let Some(g) = pick(generator.clone(), cfg, "generator")? {
        m.generator = Some(parse_generator(&g)?);
    }
    m.refine = refine;
    Ok(m)
}

fn write_rows(common: &Common, header: &str, rows: &[Row]) -> std::io::Result<()> {
    let text = if common.format == "json" {
        output::to_json(rows)
    } else {
        output::to_csv(header, &[], rows)
    };
    emit(common.out.as_deref(), &text)
}

const TABLE_HEADER: &str = "x,value,err,method,flags";

fn record_row(x: f64, v: &pbfun_core::problem::PBValue) -> Row {
    vec![
        ("x".into(), num(x)),
        ("value".into(), num(v.value)),
        ("err".into(), num(v.err_est)),
        ("method".into(), v.method.as_str().into()),
        ("flags".into(), flags_str(v)),
    ]
}

fn fail(msg: &str, code: u8) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn cmd_eval(a: &EvalArgs, cfg: &HashMap<String, String>) -> ExitCode {
    let x = match pick(a.x, cfg, "x") {
        Ok(Some(x)) => x,
        Ok(None) => return fail("--x is required", 2),
        Err(e) => return fail(&e, 2),
    };
    let common = match build_problem(&a.problem, cfg, x) {
        Ok(c) => c,
        Err(e) => return fail(&e, 2),
    };
    let sel = match Sel::parse(&pick(a.method.clone(), cfg, "method").unwrap_or(None).unwrap_or_else(|| "auto".into())) {
        Ok(s) => s,
        Err(e) => return fail(&e, 2),
    };
    let mut mcfg = MCConfig::default();
    if let Ok(Some(s)) = pick(a.seed, cfg, "seed") {
        mcfg.seed = s;
    }
    let qcfg = QuadConfig::default();
    match evaluate(&common.problem_proto, sel, &qcfg, &mcfg) {
        Ok(v) => {
            let rows = [record_row(x, &v)];
            if write_rows(&common, TABLE_HEADER, &rows).is_err() {
                return fail("write failed", 3);
            }
            if v.flags.contains(&Flag::NotConverged) {
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e.to_string(), exit_code_for(&e)),
    }
}

fn grid_for(t: &TableArgs, cfg: &HashMap<String, String>, domain: &Domain) -> Result<Vec<f64>, String> {
    let x_min = pick(t.x_min, cfg, "x_min")?.unwrap_or(0.0);
    let mes = domain.measure();
    let x_max = match pick(t.x_max, cfg, "x_max")? {
        Some(v) => v,
        None if mes.is_finite() => mes,
        None => return Err("--x-max is required on the half-line".into()),
    };
    let n = pick(t.n, cfg, "n")?.unwrap_or(21);
    if !(x_max > x_min) || n == 0 {
        return Err("need x_max > x_min and n > 0".into());
    }
    Ok((0..n).map(|i| x_min + (x_max - x_min) * i as f64 / n as f64).collect())
}

fn cmd_table(a: &TableArgs, cfg: &HashMap<String, String>) -> ExitCode {
    let common = match build_problem(&a.problem, cfg, 0.0) {
        Ok(c) => c,
        Err(e) => return fail(&e, 2),
    };
    let sel = match Sel::parse(&pick(a.method.clone(), cfg, "method").unwrap_or(None).unwrap_or_else(|| "auto".into())) {
        Ok(s) => s,
        Err(e) => return fail(&e, 2),
    };
    let xs = match grid_for(a, cfg, &common.problem_proto.domain) {
        Ok(v) => v,
        Err(e) => return fail(&e, 2),
    };
    let mut mcfg = MCConfig::default();
    if let Ok(Some(s)) = pick(a.seed, cfg, "seed") {
        mcfg.seed = s;
    }
    let qcfg = QuadConfig::default();
    let results: Vec<_> = xs
        .par_iter()
        .map(|&x| {
            let p = Problem { x, ..common.problem_proto };
            evaluate(&p, sel, &qcfg, &mcfg).map(|v| record_row(x, &v))
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
        }
    }
    if write_rows(&common, TABLE_HEADER, &rows).is_err() {
        return fail("write failed", 3);
    }
    ExitCode::SUCCESS
}

const BOUNDS_HEADER: &str = "x,lower,upper,reference";

fn cmd_bounds(a: &TableArgs, cfg: &HashMap<String, String>) -> ExitCode {
    let common = match build_problem(&a.problem, cfg, 0.0) {
        Ok(c) => c,
        Err(e) => return fail(&e, 2),
    };
    let lambda = match common.problem_proto.drift {
        Drift::PowerMinusQuad { lambda, .. } => lambda,
        _ => return fail("bounds need a plq drift", 2),
    };
    let xs = match grid_for(a, cfg, &common.problem_proto.domain) {
        Ok(v) => v,
        Err(e) => return fail(&e, 2),
    };
    let mut mcfg = MCConfig::default();
    if let Ok(Some(s)) = pick(a.seed, cfg, "seed") {
        mcfg.seed = s;
    }
    let qcfg = QuadConfig::default();
    let results: Vec<_> = xs
        .par_iter()
        .map(|&x| -> Result<Row, pbfun_core::problem::EvalError> {
            let p = Problem { x, ..common.problem_proto };
            p.validate()?;
            let s = sandwich_bounds(&p, &qcfg, &mcfg)?;
            let mut lower = s.lower.value;
            let mut upper = s.upper.value;
            if lambda >= 1.0 {
                upper = upper.min(upper_bound_convex(&p)?.value);
            } else {
                lower = lower.max(lower_bound_concave(&p)?.value);
            }
            let reference = evaluate(&p, Sel::Auto, &qcfg, &mcfg)?;
            Ok(vec![
                ("x".into(), num(x)),
                ("lower".into(), num(lower)),
                ("upper".into(), num(upper)),
                ("reference".into(), num(reference.value)),
            ])
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
        }
    }
    if write_rows(&common, BOUNDS_HEADER, &rows).is_err() {
        return fail("write failed", 3);
    }
    ExitCode::SUCCESS
}

const MC_HEADER: &str = "x,value,std_err,n_paths,refinement_gap,flags";

fn cmd_mc(a: &McArgs, cfg: &HashMap<String, String>) -> ExitCode {
    let x = match pick(a.x, cfg, "x") {
        Ok(Some(x)) => x,
        Ok(None) => return fail("--x is required", 2),
        Err(e) => return fail(&e, 2),
    };
    let common = match build_problem(&a.problem, cfg, x) {
        Ok(c) => c,
        Err(e) => return fail(&e, 2),
    };
    let mcfg = match mc_config(a.n_paths, a.dt, a.seed, a.horizon, &a.generator, a.refine, cfg) {
        Ok(m) => m,
        Err(e) => return fail(&e, 2),
    };
    if let Err(e) = common.problem_proto.validate() {
        return fail(&e.to_string(), exit_code_for(&e));
    }
    match mc_pb(&common.problem_proto, &mcfg) {
        Ok(est) => {
            let rows = [vec![
                ("x".into(), num(x)),
                ("value".into(), num(est.value)),
                ("std_err".into(), num(est.std_err)),
                ("n_paths".into(), est.n_paths.to_string()),
                (
                    "refinement_gap".into(),
                    est.refinement_gap.map(num).unwrap_or_default(),
                ),
                ("flags".into(), flags_str(&est.to_pbvalue())),
            ]];
            if write_rows(&common, MC_HEADER, &rows).is_err() {
                return fail("write failed", 3);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e.to_string(), exit_code_for(&e)),
    }
}

fn parse_list(s: &str, max: u32) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let k: u32 = part.trim().parse().map_err(|_| format!("bad list entry '{part}'"))?;
        if k == 0 || k > max {
            return Err(format!("entry {k} out of range 1..{max}"));
        }
        out.push(k);
    }
    Ok(out)
}

fn cmd_validate(a: &ValidateArgs, cfg: &HashMap<String, String>) -> ExitCode {
    let scen = match pick(a.scenarios.clone(), cfg, "scenarios") {
        Ok(Some(s)) => match parse_list(&s, 5) {
            Ok(v) => v,
            Err(e) => return fail(&e, 2),
        },
        Ok(None) => vec![1, 2, 3, 4, 5],
        Err(e) => return fail(&e, 2),
    };
    let mcfg = match mc_config(a.n_paths, a.dt, a.seed, None, &None, false, cfg) {
        Ok(m) => m,
        Err(e) => return fail(&e, 2),
    };
    let format = pick(a.format.clone(), cfg, "format").unwrap_or(None).unwrap_or_else(|| "csv".into());
    let qcfg = QuadConfig::default();
    match validate::run(&scen, &qcfg, &mcfg) {
        Ok(report) => {
            let text = if format == "json" {
                output::to_json(&report.rows)
            } else {
                output::to_csv(validate::HEADER, &[], &report.rows)
            };
            if emit(a.out.as_deref(), &text).is_err() {
                return fail("write failed", 3);
            }
            if report.n_fail > 0 {
                eprintln!("error: {} reference-route disagreement(s)", report.n_fail);
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e.to_string(), exit_code_for(&e)),
    }
}

fn cmd_figures(a: &FiguresArgs, cfg: &HashMap<String, String>) -> ExitCode {
    let which = match pick(a.which.clone(), cfg, "which") {
        Ok(Some(s)) => match parse_list(&s, 4) {
            Ok(v) => v,
            Err(e) => return fail(&e, 2),
        },
        Ok(None) => vec![1, 2, 3, 4],
        Err(e) => return fail(&e, 2),
    };
    let dir = a.out_dir.clone().unwrap_or_else(|| PathBuf::from("figures"));
    let qcfg = QuadConfig::default();
    let figs = figures::build(&which, &qcfg);
    match figures::write(&figs, &dir, a.svg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&format!("write failed: {e}"), 3),
    }
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("PBFUN_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let cfg = match load_config(&cli.config) {
        Ok(m) => m,
        Err(e) => return fail(&e, 2),
    };
    match &cli.cmd {
        Cmd::Eval(a) => cmd_eval(a, &cfg),
        Cmd::Table(a) => cmd_table(a, &cfg),
        Cmd::Bounds(a) => cmd_bounds(a, &cfg),
        Cmd::Mc(a) => cmd_mc(a, &cfg),
        Cmd::Validate(a) => cmd_validate(a, &cfg),
        Cmd::Figures(a) => cmd_figures(a, &cfg),
    }
}
