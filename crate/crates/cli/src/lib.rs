//! Command-line front end for `distguess`.
//!
//! [`run`] parses an argument list, executes one subcommand and returns the
//! rendered documents together with the process exit code, so the binary is a
//! thin shell around it and tests can drive every command in-process.
//!
//! Exit codes: `0` success, `1` input or validation error, `2` a violation
//! reported under `--assert`, `3` a resource cap was exceeded.

mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use distguess::limits::{bounds_reports, side_info_bounds_report, OracleUse};
use distguess::strategy::side_info_partitions;
use distguess::{
    arimoto_conditional_entropy, blahut_arimoto, blocklength_sweep, conditional_functional,
    error_probability, greedy_cover, guess_functional, guessing_exponent, load_instance, moment,
    monte_carlo_moment, renyi_entropy, run_suite, side_info_cover, side_info_moment,
    strategy_to_code, BoundReport, CoverPartition, GuessInstance, GuessingStrategy, Instance,
    JointGuessInstance, Method, RdOptions, Suite,
};
use serde_json::{json, Value};

pub use output::format_real;
use output::{flatten, records, render_csv, render_json, Table};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] distguess::Error),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_cap_exceeded() => 3,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "distguess", version, about = "Guessing subject to distortion on finite alphabets")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an instance document.
    Validate { file: PathBuf },
    /// Rényi entropy of the source, or Arimoto conditional entropy of X given Y.
    Entropy {
        file: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        conditional: bool,
    },
    /// Greedy guessing list and its cells.
    Strategy {
        file: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Also write the strategy document to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact guessing moment of the greedy list.
    Moment {
        file: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Guess with a separate list for every observed side-information value.
        #[arg(long)]
        side_info: bool,
        /// Add a Monte Carlo estimate from this many draws.
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Distortion-ball Rényi functional.
    Functional {
        file: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Exhaustive minimum instead of the greedy construction.
        #[arg(long)]
        oracle: bool,
    },
    /// Moment against the greedy and exhaustive functionals.
    Bounds {
        file: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long)]
        oracle: bool,
        /// Report every admissible codeword ordering, not just the greedy one.
        #[arg(long)]
        all_strategies: bool,
        /// Exit with status 2 when any bound check fails.
        #[arg(long = "assert")]
        assert_bounds: bool,
    },
    /// Rate-distortion function of the source.
    Rd {
        file: PathBuf,
        #[arg(long = "D")]
        budget: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Single-letter guessing exponent.
    Exponent {
        file: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long = "D")]
        budget: f64,
        /// Simplex grid resolution.
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Per-letter functional and moments of product instances.
    Sweep {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        rho: Vec<f64>,
        #[arg(long)]
        nmax: usize,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.999)]
        alpha_probe: f64,
    },
    /// Inequality and majorization suites.
    Verify {
        file: PathBuf,
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exit with status 2 when the suite finds a violation.
        #[arg(long = "assert")]
        assert_suite: bool,
    },
    /// Index code of the greedy cells.
    Code { file: PathBuf },
}

/// A rendered document; `path` is set when it should also be written to disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub path: Option<PathBuf>,
    pub format: Format,
    pub content: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    pub artifacts: Vec<Artifact>,
}

struct Output {
    json: Value,
    table: Option<Table>,
    violation: bool,
    extra_path: Option<PathBuf>,
}

impl Output {
    fn new(json: Value) -> Self {
        Output {
            json,
            table: None,
            violation: false,
            extra_path: None,
        }
    }
}

/// Runs one command. `argv` starts with the program name.
pub fn run<I, S>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let exit_code = if e.use_stderr() { 1 } else { 0 };
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), text)
            } else {
                (text, String::new())
            };
            return CommandResult {
                exit_code,
                stdout,
                stderr,
                artifacts: Vec::new(),
            };
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            let content = match cli.format {
                Format::Json => render_json(&out.json),
                Format::Csv => render_csv(&out.table.unwrap_or_else(|| flatten(&out.json))),
            };
            let mut artifacts = vec![Artifact {
                path: None,
                format: cli.format,
                content: content.clone(),
            }];
            if let Some(path) = out.extra_path {
                artifacts.push(Artifact {
                    path: Some(path),
                    format: cli.format,
                    content: content.clone(),
                });
            }
            CommandResult {
                exit_code: if out.violation { 2 } else { 0 },
                stdout: content,
                stderr: String::new(),
                artifacts,
            }
        }
        Err(e) => CommandResult {
            exit_code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            artifacts: Vec::new(),
        },
    }
}

fn load(path: &PathBuf) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(load_instance(&text)?)
}

/// The instance itself, or the X-marginal of a joint instance.
fn single(inst: &Instance) -> GuessInstance {
    match inst {
        Instance::Single(i) => i.clone(),
        Instance::Joint(j) => j.marginal(),
    }
}

fn joint<'a>(inst: &'a Instance, flag: &str) -> Result<&'a JointGuessInstance> {
    match inst {
        Instance::Joint(j) => Ok(j),
        Instance::Single(_) => Err(CliError::Input(format!(
            "{flag} needs an instance with a joint pmf and a y alphabet"
        ))),
    }
}

fn execute(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Validate { file } => validate(&load(file)?),
        Command::Entropy {
            file,
            alpha,
            conditional,
        } => {
            let inst = load(file)?;
            let value = if *conditional {
                arimoto_conditional_entropy(joint(&inst, "--conditional")?.joint(), *alpha)?
            } else {
                renyi_entropy(single(&inst).pmf(), *alpha)?
            };
            Ok(Output::new(json!({
                "alpha": value.order,
                "conditional": conditional,
                "bits": value.bits,
            })))
        }
        Command::Strategy { file, eps, out } => {
            let inst = load(file)?;
            let mut o = strategy(&inst, *eps)?;
            o.extra_path = out.clone();
            Ok(o)
        }
        Command::Moment {
            file,
            rho,
            eps,
            side_info,
            mc,
            seed,
        } => {
            let inst = load(file)?;
            if *side_info {
                if mc.is_some() {
                    return Err(CliError::Input("--mc is not available with --side-info".into()));
                }
                let j = joint(&inst, "--side-info")?;
                let s = side_info_cover(j, *eps)?;
                let report = side_info_moment(&s, j, *rho)?;
                return Ok(Output::new(json!({
                    "eps": eps,
                    "side_info": true,
                    "report": report,
                })));
            }
            let g = single(&inst);
            let (_, s) = greedy_cover(&g, *eps)?;
            let report = moment(&s, &g, *rho)?;
            let mut doc = json!({
                "eps": eps,
                "side_info": false,
                "codewords": s.labels(&g),
                "report": report,
            });
            if let Some(draws) = mc {
                doc["monte_carlo"] = serde_json::to_value(monte_carlo_moment(&s, &g, *rho, *draws, *seed)?)
                    .expect("serializable");
            }
            Ok(Output::new(doc))
        }
        Command::Functional {
            file,
            alpha,
            eps,
            oracle,
        } => {
            let inst = load(file)?;
            let method = if *oracle { Method::Oracle } else { Method::Greedy };
            let (bits, conditional) = match &inst {
                Instance::Joint(j) => (conditional_functional(j, *alpha, *eps, method)?, true),
                Instance::Single(i) => (guess_functional(i, *alpha, *eps, method)?, false),
            };
            Ok(Output::new(json!({
                "alpha": alpha,
                "eps": eps,
                "method": method,
                "conditional": conditional,
                "bits": bits,
            })))
        }
        Command::Bounds {
            file,
            rho,
            eps,
            oracle,
            all_strategies,
            assert_bounds,
        } => {
            let inst = load(file)?;
            let mut o = bounds(&inst, *rho, *eps, *oracle, *all_strategies)?;
            o.violation &= *assert_bounds;
            Ok(o)
        }
        Command::Rd { file, budget, tol } => {
            let g = single(&load(file)?);
            if tol.is_nan() || *tol <= 0.0 {
                return Err(CliError::Input(format!("--tol must be positive, got {tol}")));
            }
            let opts = RdOptions {
                tol: *tol,
                ..RdOptions::default()
            };
            let r = blahut_arimoto(g.pmf(), g.distortion(), *budget, opts)?;
            Ok(Output::new(json!({
                "D": budget,
                "tol": tol,
                "source": g.pmf().alphabet().symbols(),
                "reproduction": g.reproduction().symbols(),
                "result": r,
            })))
        }
        Command::Exponent {
            file,
            rho,
            budget,
            grid,
        } => {
            let g = single(&load(file)?);
            let e = guessing_exponent(g.pmf(), g.distortion(), *budget, *rho, *grid)?;
            Ok(Output::new(json!({
                "rho": rho,
                "D": budget,
                "source": g.pmf().alphabet().symbols(),
                "result": e,
            })))
        }
        Command::Sweep {
            file,
            rho,
            nmax,
            eps,
            alpha_probe,
        } => {
            let g = single(&load(file)?);
            let t = blocklength_sweep(&g, rho, *eps, *nmax, *alpha_probe)?;
            let mut header = vec!["n".to_string(), "functional".to_string()];
            header.extend(t.rhos.iter().map(|r| format!("moment_log_rho_{}", format_real(*r))));
            header.extend(["target".to_string(), "gap".to_string()]);
            let rows = t
                .rows
                .iter()
                .map(|row| {
                    let mut cells = vec![row.n.to_string(), format_real(row.functional)];
                    cells.extend(row.moment_logs.iter().map(|v| format_real(*v)));
                    cells.extend([format_real(row.target), format_real(row.gap)]);
                    cells
                })
                .collect();
            let mut o = Output::new(serde_json::to_value(&t).expect("serializable"));
            o.table = Some(Table { header, rows });
            Ok(o)
        }
        Command::Verify {
            file,
            suite,
            trials,
            seed,
            assert_suite,
        } => {
            let g = single(&load(file)?);
            let suite: Suite = suite.parse()?;
            let report = run_suite(suite, &g, *trials, *seed)?;
            let mut o = Output::new(serde_json::to_value(&report).expect("serializable"));
            let mut summary = o.json.clone();
            summary.as_object_mut().expect("object").remove("examples");
            o.table = Some(flatten(&summary));
            o.violation = *assert_suite && report.violations > 0;
            Ok(o)
        }
        Command::Code { file } => {
            let g = single(&load(file)?);
            let (part, _) = greedy_cover(&g, 0.0)?;
            let table = strategy_to_code(&part);
            let entries: Vec<Value> = table
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "cell": e.cell,
                        "word": e.word,
                        "length": e.length,
                        "codeword": g.reproduction().label(e.codeword),
                        "mass": part.cell_masses[e.cell - 1],
                    })
                })
                .collect();
            let mut o = Output::new(json!({ "entries": entries }));
            o.table = Some(records(&entries));
            Ok(o)
        }
    }
}

fn validate(inst: &Instance) -> Result<Output> {
    let doc = match inst {
        Instance::Single(i) => json!({
            "valid": true,
            "kind": "single",
            "source_size": i.source_len(),
            "reproduction_size": i.reproduction_len(),
            "D": i.budget(),
        }),
        Instance::Joint(j) => json!({
            "valid": true,
            "kind": "joint",
            "source_size": j.joint().x_alphabet().len(),
            "side_info_size": j.joint().y_alphabet().len(),
            "reproduction_size": j.reproduction().len(),
            "D": j.budget(),
        }),
    };
    Ok(Output::new(doc))
}

fn cells_json(inst: &GuessInstance, part: &CoverPartition) -> Vec<Value> {
    let x = inst.pmf().alphabet();
    part.cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            json!({
                "cell": i + 1,
                "codeword": inst.reproduction().label(part.codewords[i]),
                "mass": part.cell_masses[i],
                "members": cell.iter().map(|&s| x.label(s)).collect::<Vec<_>>(),
            })
        })
        .collect()
}

fn strategy(inst: &Instance, eps: f64) -> Result<Output> {
    match inst {
        Instance::Single(g) => {
            let (part, s) = greedy_cover(g, eps)?;
            let cells = cells_json(g, &part);
            let mut o = Output::new(json!({
                "eps": eps,
                "codewords": s.labels(g),
                "cells": cells,
                "uncovered_mass": part.uncovered_mass,
                "error_probability": error_probability(&s, g),
            }));
            o.table = Some(records(&cells));
            Ok(o)
        }
        Instance::Joint(j) => {
            let ys = j.joint().y_alphabet();
            let mut per_y = Vec::new();
            let mut rows = Vec::new();
            for (y, py, part, s) in side_info_partitions(j, eps)? {
                let slice = j.slice(y)?;
                let cells = cells_json(&slice, &part);
                for c in &cells {
                    let mut row = json!({ "y": ys.label(y) });
                    for (k, v) in c.as_object().expect("object") {
                        row[k] = v.clone();
                    }
                    rows.push(row);
                }
                per_y.push(json!({
                    "y": ys.label(y),
                    "p_y": py,
                    "codewords": s.labels(&slice),
                    "cells": cells,
                    "uncovered_mass": part.uncovered_mass,
                }));
            }
            let mut o = Output::new(json!({ "eps": eps, "per_y": per_y }));
            o.table = Some(records(&rows));
            Ok(o)
        }
    }
}

fn fails(r: &BoundReport) -> bool {
    !r.achievability_vs_greedy
        || r.achievability_vs_oracle == Some(false)
        || r.converse_vs_oracle == Some(false)
}

fn bounds(inst: &Instance, rho: f64, eps: f64, oracle: bool, all: bool) -> Result<Output> {
    let mode = match (oracle, all) {
        (true, _) => OracleUse::Require,
        (false, true) => OracleUse::IfFeasible,
        (false, false) => OracleUse::Skip,
    };
    match inst {
        Instance::Joint(j) => {
            if all {
                return Err(CliError::Input(
                    "--all-strategies needs a single-source instance".into(),
                ));
            }
            let r = side_info_bounds_report(j, rho, eps, mode)?;
            let mut o = Output::new(serde_json::to_value(&r).expect("serializable"));
            o.violation = fails(&r);
            Ok(o)
        }
        Instance::Single(g) => {
            let (_, greedy) = greedy_cover(g, eps)?;
            if !all {
                let r = bounds_reports(g, rho, eps, std::slice::from_ref(&greedy), mode)?.remove(0);
                let mut o = Output::new(serde_json::to_value(&r).expect("serializable"));
                o.violation = fails(&r);
                return Ok(o);
            }
            let mut strategies: Vec<GuessingStrategy> = vec![greedy];
            strategies.extend(distguess::oracle::all_strategies(g, eps)?);
            let reports = bounds_reports(g, rho, eps, &strategies, mode)?;
            let converse = reports
                .iter()
                .filter(|r| r.converse_vs_oracle == Some(false))
                .count();
            let achievability = reports
                .iter()
                .filter(|r| !r.achievability_vs_greedy || r.achievability_vs_oracle == Some(false))
                .count();
            let listed: Vec<Value> = strategies
                .iter()
                .zip(&reports)
                .skip(1)
                .map(|(s, r)| {
                    let mut v = json!({ "codewords": s.labels(g) });
                    for (k, x) in serde_json::to_value(r).expect("serializable").as_object().expect("object") {
                        v[k] = x.clone();
                    }
                    v
                })
                .collect();
            let mut o = Output::new(json!({
                "greedy": reports[0],
                "strategies": listed,
                "converse_violations": converse,
                "achievability_violations": achievability,
            }));
            o.table = Some(records(&listed));
            o.violation = reports.iter().any(fails);
            Ok(o)
        }
    }
}
