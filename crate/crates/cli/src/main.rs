//! Command-line front end: `solve` runs one of the three interior-point
//! methods on an LP file (or the built-in demo problem), `bound` prints the
//! convergence report for a symmetric matrix, and `check` cross-validates
//! the message-passing and dense linear solvers against each other and the
//! vertex-enumeration oracle.
//!
//! Exit codes: 0 success, 1 infeasible/unbounded, 2 parse error,
//! 3 numerical failure. Failure messages name the stage that failed
//! (parse, standardize, solve, linsolve).

mod check;
mod fmt;

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;

use gabp_lp::barrier::{
    affine_scaling_solve, barrier_solve, find_strictly_feasible, BarrierConfig, IterateTrace,
    LinSolve, SolveError,
};
use gabp_lp::convergence;
use gabp_lp::io;
use gabp_lp::model::{recover_original, to_standard_form, DenseMatrix, LpProblem, SparseSymMatrix};
use gabp_lp::primaldual::{pd_solve, PdConfig, PdLinSolve};

use fmt::sig17;

#[derive(Parser)]
#[command(name = "gabplp", about = "LP solver with belief-propagation Newton steps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Barrier,
    #[value(name = "primal-dual")]
    PrimalDual,
    Affine,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LinSolveArg {
    #[value(name = "gabp-normal")]
    GabpNormal,
    #[value(name = "gabp-augmented")]
    GabpAugmented,
    Dense,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an LP and print the objective and original-variable values.
    Solve {
        /// Problem file; omit with --toy.
        file: Option<String>,
        #[arg(long, value_enum, default_value = "barrier")]
        method: Method,
        #[arg(long, value_enum, default_value = "gabp-normal")]
        linsolve: LinSolveArg,
        /// Outer stopping tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the iterate trace to this file.
        #[arg(long)]
        trace: Option<String>,
        /// Use the built-in 2-variable, 11-constraint demo problem.
        #[arg(long)]
        toy: bool,
    },
    /// Print the convergence report for a symmetric matrix in CSV form.
    Bound {
        matrix: String,
        /// Target accuracy for the round bound.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Cross-check solver modes against each other and the enumeration
    /// oracle.
    Check {
        /// Problem file; omit with --toy or --random.
        file: Option<String>,
        #[arg(long)]
        toy: bool,
        /// Generate instances: NVARS NCONS COUNT.
        #[arg(long, num_args = 3, value_names = ["NVARS", "NCONS", "COUNT"])]
        random: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    stage: &'static str,
    message: String,
    code: u8,
}

impl Failure {
    fn new(stage: &'static str, code: u8, message: impl Into<String>) -> Self {
        Self {
            stage,
            message: message.into(),
            code,
        }
    }
}

fn classify_solve_error(e: &SolveError) -> (&'static str, u8) {
    match e {
        SolveError::Infeasible { .. } | SolveError::Unbounded => ("solve", 1),
        SolveError::GabpDidNotConverge { .. } | SolveError::Gabp(_) | SolveError::Oracle(_) => {
            ("linsolve", 3)
        }
        SolveError::Model(_) | SolveError::BadConfig(_) => ("standardize", 2),
        _ => ("solve", 3),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            file,
            method,
            linsolve,
            tol,
            trace,
            toy,
        } => cmd_solve(file, method, linsolve, tol, trace, toy),
        Command::Bound { matrix, eps } => cmd_bound(&matrix, eps),
        Command::Check {
            file,
            toy,
            random,
            seed,
        } => cmd_check(file, toy, random, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}: {}", f.stage, f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_problem(file: Option<&str>, toy: bool) -> Result<LpProblem, Failure> {
    if toy {
        return Ok(io::build_toy_problem());
    }
    let Some(path) = file else {
        return Err(Failure::new("parse", 2, "no input: pass a file or --toy"));
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new("parse", 2, format!("cannot read {path}: {e}")))?;
    io::parse_lp(&text).map_err(|e| Failure::new("parse", 2, e.to_string()))
}

fn cmd_solve(
    file: Option<String>,
    method: Method,
    linsolve: LinSolveArg,
    tol: Option<f64>,
    trace_path: Option<String>,
    toy: bool,
) -> Result<(), Failure> {
    let problem = load_problem(file.as_deref(), toy)?;
    let std = to_standard_form(&problem)
        .map_err(|e| Failure::new("standardize", 2, e.to_string()))?;

    let mut cfg = BarrierConfig::with_linsolve(match linsolve {
        LinSolveArg::GabpNormal => LinSolve::GabpNormal,
        LinSolveArg::GabpAugmented => LinSolve::GabpAugmented,
        LinSolveArg::Dense => LinSolve::DenseOracle,
    });
    if let Some(t) = tol {
        cfg.eps_outer = t;
    }

    let classify = |e: SolveError| {
        let (stage, code) = classify_solve_error(&e);
        Failure::new(stage, code, e.to_string())
    };

    let (x_std, std_obj, trace): (_, _, IterateTrace) = match method {
        Method::Barrier => {
            let sol = barrier_solve(&std, None, &cfg).map_err(classify)?;
            (sol.x, sol.objective, sol.trace)
        }
        Method::Affine => {
            let x0 = find_strictly_feasible(&std, &cfg).map_err(classify)?;
            let sol = affine_scaling_solve(&std, &x0, &cfg).map_err(classify)?;
            (sol.x, sol.objective, sol.trace)
        }
        Method::PrimalDual => {
            let mut pd_cfg = PdConfig::with_linsolve(match linsolve {
                LinSolveArg::GabpNormal => PdLinSolve::ExplicitGabp,
                LinSolveArg::GabpAugmented => PdLinSolve::FullGabp,
                LinSolveArg::Dense => PdLinSolve::DenseOracle,
            });
            if let Some(t) = tol {
                pd_cfg.eps_outer = t;
            }
            let sol = pd_solve(&std, None, &pd_cfg).map_err(classify)?;
            (sol.x, sol.objective, sol.trace)
        }
    };

    if let Some(path) = trace_path {
        fs::write(&path, io::write_trace(&trace))
            .map_err(|e| Failure::new("solve", 3, format!("cannot write {path}: {e}")))?;
    }

    let x_orig = recover_original(&x_std, std.provenance())
        .map_err(|e| Failure::new("solve", 3, e.to_string()))?;
    println!(
        "objective {}",
        sig17(std.provenance().original_objective(std_obj))
    );
    for (name, value) in problem.names.iter().zip(x_orig.iter()) {
        println!("{name} {}", sig17(*value));
    }
    Ok(())
}

fn parse_matrix_csv(text: &str) -> Result<SparseSymMatrix, Failure> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Failure::new(
                    "parse",
                    2,
                    format!("line {}: invalid number `{}`", idx + 1, cell.trim()),
                )
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Failure::new("parse", 2, "matrix must be square and non-empty"));
    }
    let dense = DenseMatrix::new(n, n, rows.concat())
        .map_err(|e| Failure::new("parse", 2, e.to_string()))?;
    SparseSymMatrix::from_dense_symmetric(&dense, 1e-12)
        .map_err(|e| Failure::new("parse", 2, e.to_string()))
}

fn cmd_bound(matrix_path: &str, eps: f64) -> Result<(), Failure> {
    let text = fs::read_to_string(matrix_path)
        .map_err(|e| Failure::new("parse", 2, format!("cannot read {matrix_path}: {e}")))?;
    let a = parse_matrix_csv(&text)?;
    let report = convergence::analyze(&a, eps)
        .map_err(|e| Failure::new("solve", 2, e.to_string()))?;

    println!("dominant {}", report.dominant);
    let min_gap = report.gaps.iter().copied().fold(f64::INFINITY, f64::min);
    println!("min_gap {}", sig17(min_gap));
    match report.gamma {
        Some(g) => println!("gamma {}", sig17(g)),
        None => println!("gamma not-dominant"),
    }
    match report.bound_rounds {
        Some(t) => println!("rounds {t}"),
        None => println!("rounds unbounded"),
    }
    println!("rho {}", sig17(report.spectral_rho));
    println!("walk_summable {}", report.walk_summable);
    Ok(())
}

fn cmd_check(
    file: Option<String>,
    toy: bool,
    random: Option<Vec<usize>>,
    seed: u64,
) -> Result<(), Failure> {
    let mut instances: Vec<(String, LpProblem)> = Vec::new();
    if toy {
        instances.push(("toy".to_string(), io::build_toy_problem()));
    }
    if let Some(path) = file.as_deref() {
        instances.push((path.to_string(), load_problem(Some(path), false)?));
    }
    if let Some(dims) = random {
        let (nvars, ncons, count) = (dims[0], dims[1], dims[2]);
        if nvars == 0 || ncons == 0 {
            return Err(Failure::new("parse", 2, "--random needs nonzero dimensions"));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for k in 0..count {
            let (p, _) = gabp_lp::generate::feasible_inequality_lp(&mut rng, nvars, ncons);
            instances.push((format!("random[{k}]"), p));
        }
    }
    if instances.is_empty() {
        return Err(Failure::new(
            "parse",
            2,
            "no instances: pass a file, --toy or --random",
        ));
    }

    let mut outcomes = Vec::new();
    for (label, problem) in &instances {
        let outcome = check::check_instance(label, problem).map_err(|message| {
            let stage: &'static str = if message.starts_with("standardize") {
                "standardize"
            } else if message.starts_with("linsolve") {
                "linsolve"
            } else {
                "solve"
            };
            Failure::new(stage, 3, message)
        })?;
        outcomes.push(outcome);
    }
    let (text, ok) = check::render_report(&outcomes);
    print!("{text}");
    if ok {
        Ok(())
    } else {
        Err(Failure::new("solve", 3, "solver modes disagree beyond tolerance"))
    }
}
