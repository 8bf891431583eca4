//! Log-barrier interior-point solver: an outer loop shrinking the barrier
//! parameter μ, inner Newton iterations whose search direction comes from a
//! scaled least-squares problem, backtracking line search, and the
//! affine-scaling variant (μ = 0) used for path visualization.
//!
//! With `X = diag(x)`, the Newton direction at an interior feasible `x`
//! solves `min_y ‖F y − g‖₂` with `F = XAᵀ` and `g = Xc − μ·1`, and then
//!
//! ```text
//! Δx = (1/μ)·X²(Aᵀy − c) + X·1,      λ² = μ·‖X⁻¹Δx‖₂²
//! ```
//!
//! The least-squares normal equations are `AX²Aᵀ y = AX²c − μAX·1`;
//! deriving `g` from them forces `g = Xc − μ·1` (an `Xc + μAX·1` variant is
//! dimensionally impossible: `Xc` has length n, `AX·1` length p). The
//! negated step (`Δx = −f″⁻¹f′`) makes `λ² = −f′ᵀΔx ≥ 0`, so the stopping
//! rule `λ²/2 ≤ ε` is meaningful; `λ²` is evaluated as the equivalent
//! quadratic form `μ‖X⁻¹Δx‖²`, which stays nonnegative under inexact inner
//! solves.
//!
//! The inner linear solve runs over the mode selected in the configuration;
//! when the message-passing solver fails to converge on a step, the step is
//! recomputed with the dense oracle and the trace records the fallback.

use thiserror::Error;

use crate::gabp::{self, GabpError, LsMode};
use crate::model::{DenseMatrix, ModelError, StandardLp, Vector};
use crate::oracle::{self, OracleError};

/// Messages cannot settle much below this in f64; the μ-scaled inner
/// tolerance is clamped here.
pub const GABP_TOL_FLOOR: f64 = 1e-14;

/// Hard precondition on starting points: `‖Ax − b‖∞ ≤ tol · (1 + ‖b‖∞)`.
pub const START_RESIDUAL_TOL: f64 = 1e-6;

/// Phase-1 artificial objective above this declares the problem infeasible.
pub const PHASE1_FEAS_TOL: f64 = 1e-7;

/// Smallest admissible line-search step.
pub const MIN_STEP: f64 = 1e-16;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("starting point is not strictly positive")]
    NotInterior,
    #[error("starting point violates Ax = b: residual {residual}")]
    InfeasibleStart { residual: f64 },
    #[error("problem is infeasible: phase-1 optimum {objective} exceeds {tol}")]
    Infeasible { objective: f64, tol: f64 },
    #[error("line search stalled: no admissible step above {MIN_STEP}")]
    StalledLineSearch,
    #[error(
        "message-passing solver did not converge after {rounds} rounds (final delta {final_delta})"
    )]
    GabpDidNotConverge { rounds: usize, final_delta: f64 },
    #[error("problem appears unbounded along the current direction")]
    Unbounded,
    #[error("exceeded {0} iterations without meeting the stopping criterion")]
    IterationLimit(usize),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Gabp(#[from] GabpError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which backend solves the per-step least-squares problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinSolve {
    /// GaBP on the p×p normal equations (default).
    GabpNormal,
    /// GaBP on the (n+p)-dimensional augmented system with diagonal loading.
    GabpAugmented,
    /// Dense elimination/factorization reference path.
    DenseOracle,
}

#[derive(Debug, Clone)]
pub struct BarrierConfig {
    /// Initial barrier parameter.
    pub mu0: f64,
    /// Multiplicative μ shrink factor per outer iteration.
    pub sigma: f64,
    /// Outer stop: quit once `n·μ ≤ eps_outer` (the barrier duality-gap
    /// bound).
    pub eps_outer: f64,
    /// Inner Newton stop: quit once `λ²/2 ≤ eps_newton`.
    pub eps_newton: f64,
    /// Armijo slope fraction, in (0, 1/2).
    pub alpha: f64,
    /// Backtracking shrink factor, in (0, 1).
    pub beta: f64,
    /// Fraction-to-boundary factor, in (0, 1).
    pub tau: f64,
    /// Message tolerance for GaBP-backed solves. Inside the barrier loop
    /// the effective tolerance is `gabp_tol·min(1, μ)` (never below
    /// [`GABP_TOL_FLOOR`]): the recovered step divides the solve residual
    /// by μ, so the inner accuracy must tighten as μ shrinks.
    pub gabp_tol: f64,
    /// Round cap for GaBP-backed solves; `None` derives the cap from the
    /// convergence-rate bound when the system is dominant, else `10·dim`.
    pub gabp_max_rounds: Option<usize>,
    pub linsolve: LinSolve,
    /// Cap on Newton iterations per μ stage.
    pub max_newton_per_mu: usize,
    /// Cap on affine-scaling steps.
    pub max_affine_steps: usize,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        Self {
            mu0: 1.0,
            sigma: 0.1,
            eps_outer: 1e-8,
            eps_newton: 1e-9,
            alpha: 0.25,
            beta: 0.5,
            tau: 0.99,
            gabp_tol: 1e-10,
            gabp_max_rounds: None,
            linsolve: LinSolve::GabpNormal,
            max_newton_per_mu: 60,
            max_affine_steps: 500,
        }
    }
}

impl BarrierConfig {
    pub fn with_linsolve(linsolve: LinSolve) -> Self {
        Self {
            linsolve,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let checks = [
            (self.mu0 > 0.0, "mu0 must be positive"),
            (
                self.sigma > 0.0 && self.sigma < 1.0,
                "sigma must lie in (0, 1)",
            ),
            (self.eps_outer > 0.0, "eps_outer must be positive"),
            (self.eps_newton > 0.0, "eps_newton must be positive"),
            (
                self.alpha > 0.0 && self.alpha < 0.5,
                "alpha must lie in (0, 0.5)",
            ),
            (self.beta > 0.0 && self.beta < 1.0, "beta must lie in (0, 1)"),
            (self.tau > 0.0 && self.tau < 1.0, "tau must lie in (0, 1)"),
            (self.gabp_tol > 0.0, "gabp_tol must be positive"),
            (self.max_newton_per_mu >= 1, "need at least one Newton step"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(SolveError::BadConfig(msg.into()));
            }
        }
        Ok(())
    }

    /// μ-scaled message tolerance actually used for a Newton step's inner
    /// solve. Recovering Δx divides the solve residual by μ, so accuracy
    /// must tighten proportionally.
    pub fn effective_gabp_tol(&self, mu: f64) -> f64 {
        (self.gabp_tol * mu.min(1.0)).max(GABP_TOL_FLOOR)
    }
}

/// Inner linear-solve diagnostics attached to each Newton step.
#[derive(Debug, Clone, Copy)]
pub struct LinInfo {
    /// GaBP rounds used (0 for the dense path).
    pub rounds: usize,
    /// Whether the message passing converged. True (vacuously) for the
    /// dense path; false on steps recomputed through the fallback.
    pub converged: bool,
}

/// One Newton direction with its decrement and solve diagnostics.
#[derive(Debug, Clone)]
pub struct NewtonStep {
    pub dx: Vector,
    pub y: Vector,
    pub lambda2: f64,
    pub lin: LinInfo,
}

/// One row of the iterate trace: the visited point, the direction
/// diagnostics computed there and the step taken away from it.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Outer (μ stage / sweep) index.
    pub iter: usize,
    /// Newton index within the stage.
    pub newton: usize,
    pub x: Vector,
    /// Standard-form objective `cᵀx`.
    pub obj: f64,
    pub mu: f64,
    pub lambda2: f64,
    /// Accepted step length (0 on the terminal record).
    pub step: f64,
    pub gabp_rounds: usize,
    pub gabp_converged: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterateTrace {
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Clone)]
pub struct BarrierSolution {
    /// Standard-form solution.
    pub x: Vector,
    /// Standard-form objective `cᵀx`.
    pub objective: f64,
    pub trace: IterateTrace,
}

/// `F = X Aᵀ` (n×p).
fn scaled_basis(lp: &StandardLp, x: &Vector) -> DenseMatrix {
    let a = lp.a();
    DenseMatrix::from_fn(a.cols(), a.rows(), |i, j| x[i] * a.get(j, i))
}

/// Barrier gradient `f′(x) = c − μX⁻¹·1`.
fn barrier_gradient(lp: &StandardLp, x: &Vector, mu: f64) -> Vector {
    Vector::new(
        lp.c()
            .iter()
            .enumerate()
            .map(|(i, &c)| c - mu / x[i])
            .collect(),
    )
    .expect("finite gradient")
}

/// Barrier objective `cᵀx − μ·Σ log x_k` (+∞ off the positive orthant).
fn barrier_objective(lp: &StandardLp, x: &Vector, mu: f64) -> f64 {
    let mut log_sum = 0.0;
    for &v in x.iter() {
        if v <= 0.0 {
            return f64::INFINITY;
        }
        log_sum += v.ln();
    }
    lp.c().dot(x) - mu * log_sum
}

fn check_start(lp: &StandardLp, x: &Vector) -> Result<(), SolveError> {
    if x.len() != lp.num_vars() {
        return Err(SolveError::Model(ModelError::DimensionMismatch {
            expected: lp.num_vars(),
            got: x.len(),
        }));
    }
    if !x.all_positive() {
        return Err(SolveError::NotInterior);
    }
    let residual = lp.residual_inf(x)?;
    if residual > START_RESIDUAL_TOL * (1.0 + lp.b().norm_inf()) {
        return Err(SolveError::InfeasibleStart { residual });
    }
    Ok(())
}

/// Exact projector onto the affine set `{v : Av = target}`, backed by a
/// Cholesky factorization of `AAᵀ` (positive definite by the full-row-rank
/// construction invariant).
///
/// Recovering a step from the least-squares multiplier divides the solve
/// residual by μ, so even a roundoff-floor residual (~1e-14 in f64) turns
/// into step infeasibility of residual/μ near convergence. Re-projecting
/// the assembled step makes its constraint error relative to `‖Δx‖`
/// instead, which keeps iterates on `Ax = b` to machine accuracy.
pub(crate) struct EqualityProjector {
    chol: DenseMatrix,
}

impl EqualityProjector {
    pub(crate) fn new(lp: &StandardLp) -> Result<Self, SolveError> {
        let a = lp.a();
        let p = a.rows();
        let aat = DenseMatrix::from_fn(p, p, |r, s| {
            let mut acc = 0.0;
            for k in 0..a.cols() {
                acc += a.get(r, k) * a.get(s, k);
            }
            acc
        });
        Ok(Self {
            chol: oracle::cholesky(&aat)?,
        })
    }

    /// Returns `v − Aᵀ(AAᵀ)⁻¹(Av − target)`; with `target = 0` this is the
    /// orthogonal projection onto `null(A)`.
    pub(crate) fn project(
        &self,
        lp: &StandardLp,
        v: &Vector,
        target: Option<&Vector>,
    ) -> Result<Vector, SolveError> {
        let mut residual = lp.a().matvec(v)?;
        if let Some(t) = target {
            residual = residual.sub(t)?;
        }
        let w = oracle::cholesky_solve(&self.chol, &residual);
        Ok(v.sub(&lp.a().t_matvec(&w)?)?)
    }
}

/// Largest step keeping `x + t·Δx` nonnegative: `min_{Δx_i < 0} (−x_i/Δx_i)`,
/// infinite when no component decreases.
pub fn max_step_to_boundary(x: &Vector, dx: &Vector) -> f64 {
    let mut t = f64::INFINITY;
    for i in 0..x.len() {
        if dx[i] < 0.0 {
            t = t.min(-x[i] / dx[i]);
        }
    }
    t
}

/// Solves the step's least-squares problem `min ‖Fy − g‖` in the requested
/// mode. GaBP non-convergence surfaces as [`SolveError::GabpDidNotConverge`]
/// so callers can decide whether to fall back.
fn solve_scaled_least_squares(
    f: &DenseMatrix,
    g: &Vector,
    mode: LinSolve,
    tol: f64,
    max_rounds: Option<usize>,
) -> Result<(Vector, LinInfo), SolveError> {
    match mode {
        LinSolve::DenseOracle => {
            let y = oracle::dense_least_squares(f, g)?;
            Ok((
                y,
                LinInfo {
                    rounds: 0,
                    converged: true,
                },
            ))
        }
        LinSolve::GabpNormal | LinSolve::GabpAugmented => {
            let ls_mode = if mode == LinSolve::GabpNormal {
                LsMode::Normal
            } else {
                LsMode::Augmented
            };
            let cap = match max_rounds {
                Some(c) => c,
                None => {
                    let (m, _) = gabp::normal_system(f, g)?;
                    gabp::default_max_rounds(&m, tol)
                }
            };
            let sol = gabp::gabp_least_squares(f, g, ls_mode, tol, cap)?;
            if !sol.diagnostics.converged {
                return Err(SolveError::GabpDidNotConverge {
                    rounds: sol.diagnostics.rounds,
                    final_delta: sol.diagnostics.final_delta,
                });
            }
            Ok((
                sol.y,
                LinInfo {
                    rounds: sol.diagnostics.rounds,
                    converged: true,
                },
            ))
        }
    }
}

/// Newton direction of the barrier subproblem at an interior feasible `x`.
///
/// Returns the step `Δx`, the least-squares multiplier estimate `y` and the
/// decrement `λ² = μ‖X⁻¹Δx‖²`. `Δx` lies in the null space of `A` up to the
/// inner solve's accuracy, so feasibility is preserved along the step.
pub fn newton_direction(
    lp: &StandardLp,
    x: &Vector,
    mu: f64,
    mode: LinSolve,
    gabp_tol: f64,
    gabp_max_rounds: Option<usize>,
) -> Result<NewtonStep, SolveError> {
    check_start(lp, x)?;
    assert!(mu > 0.0, "barrier parameter must be positive");
    let f = scaled_basis(lp, x);
    let g = Vector::new(
        lp.c()
            .iter()
            .enumerate()
            .map(|(i, &c)| x[i] * c - mu)
            .collect(),
    )?;
    let (y, lin) = solve_scaled_least_squares(&f, &g, mode, gabp_tol, gabp_max_rounds)?;
    let aty = lp.a().t_matvec(&y)?;
    let mut dx = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let d = x[i] * x[i] * (aty[i] - lp.c()[i]) / mu + x[i];
        if !d.is_finite() {
            return Err(SolveError::Gabp(GabpError::Model(ModelError::NonFinite {
                index: i,
                value: d,
            })));
        }
        dx.push(d);
    }
    let dx = EqualityProjector::new(lp)?.project(lp, &Vector::new(dx)?, None)?;
    let mut lambda2 = 0.0;
    for i in 0..x.len() {
        lambda2 += (dx[i] / x[i]) * (dx[i] / x[i]);
    }
    lambda2 *= mu;
    Ok(NewtonStep {
        dx,
        y,
        lambda2,
        lin,
    })
}

/// Affine-scaling direction at one iterate.
struct AffineStep {
    /// Direction scaled to unit norm in the `X⁻¹` metric.
    dx: Vector,
    /// Squared scaled norm of the raw direction (decrement analogue).
    decrement2: f64,
    /// Dual objective estimate `bᵀy`.
    dual_objective: f64,
    /// `min_i (c − Aᵀy)_i`; the dual estimate is only trustworthy when
    /// this is (near) nonnegative.
    min_reduced_cost: f64,
    lin: LinInfo,
}

/// Affine-scaling direction (the μ = 0 specialization): `y` solves
/// `min ‖XAᵀy − Xc‖` and the raw direction is `X²(Aᵀy − c)`. A zero raw
/// direction returns `None` (optimal).
fn affine_direction(
    lp: &StandardLp,
    x: &Vector,
    mode: LinSolve,
    gabp_tol: f64,
    gabp_max_rounds: Option<usize>,
) -> Result<Option<AffineStep>, SolveError> {
    let f = scaled_basis(lp, x);
    let g = Vector::new(lp.c().iter().enumerate().map(|(i, &c)| x[i] * c).collect())?;
    let (y, lin) = solve_scaled_least_squares(&f, &g, mode, gabp_tol, gabp_max_rounds)?;
    let aty = lp.a().t_matvec(&y)?;
    let mut dx = Vec::with_capacity(x.len());
    let mut min_reduced_cost = f64::INFINITY;
    for i in 0..x.len() {
        dx.push(x[i] * x[i] * (aty[i] - lp.c()[i]));
        min_reduced_cost = min_reduced_cost.min(lp.c()[i] - aty[i]);
    }
    let dx = EqualityProjector::new(lp)?.project(lp, &Vector::new(dx)?, None)?;
    let mut scaled_norm2 = 0.0;
    for i in 0..x.len() {
        scaled_norm2 += (dx[i] / x[i]) * (dx[i] / x[i]);
    }
    let scale = scaled_norm2.sqrt();
    if scale <= 1e-13 * (1.0 + lp.c().norm_inf()) {
        return Ok(None);
    }
    Ok(Some(AffineStep {
        dx: dx.scale(1.0 / scale),
        decrement2: scale * scale,
        dual_objective: lp.b().dot(&y),
        min_reduced_cost,
        lin,
    }))
}

/// Backtracking on a 1-D restriction `phi(t)`: starting from `t0`, shrink
/// by `beta` until the Armijo condition
/// `phi(t) ≤ phi(0) + alpha·t·slope` holds. `None` when no step above
/// [`MIN_STEP`] is admissible.
fn armijo_backtrack(
    phi: impl Fn(f64) -> f64,
    phi0: f64,
    slope: f64,
    t0: f64,
    alpha: f64,
    beta: f64,
) -> Option<f64> {
    let mut t = t0;
    while t > MIN_STEP {
        let value = phi(t);
        if value.is_finite() && value <= phi0 + alpha * t * slope {
            return Some(t);
        }
        t *= beta;
    }
    None
}

/// Backtracking line search for the barrier objective. The step is capped
/// at `min(1, τ·t_max)` with `t_max` the largest step keeping `x + tΔx`
/// positive, then halved by `β` until the Armijo condition holds.
pub fn line_search(
    lp: &StandardLp,
    x: &Vector,
    dx: &Vector,
    mu: f64,
    alpha: f64,
    beta: f64,
    tau: f64,
) -> Result<f64, SolveError> {
    if dx.iter().all(|&d| d == 0.0) {
        return Ok(0.0);
    }
    let t_boundary = max_step_to_boundary(x, dx);
    let t0 = (tau * t_boundary).min(1.0);
    if t0 <= MIN_STEP {
        return Err(SolveError::StalledLineSearch);
    }
    let phi0 = barrier_objective(lp, x, mu);
    let slope = barrier_gradient(lp, x, mu).dot(dx);
    let phi = |t: f64| {
        let trial = x.axpy(t, dx).expect("same length");
        barrier_objective(lp, &trial, mu)
    };
    armijo_backtrack(phi, phi0, slope, t0, alpha, beta).ok_or(SolveError::StalledLineSearch)
}

/// True for failures of the message-passing path that the dense oracle can
/// absorb: non-convergence, and breakdown (a diverging run overflows into a
/// vanishing exclusive precision or a non-finite message).
pub(crate) fn is_gabp_failure(e: &SolveError) -> Option<usize> {
    match e {
        SolveError::GabpDidNotConverge { rounds, .. } => Some(*rounds),
        SolveError::Gabp(GabpError::Breakdown { round, .. }) => Some(*round),
        SolveError::Gabp(GabpError::ZeroPrecision { .. }) => Some(0),
        _ => None,
    }
}

/// Computes a Newton step, retrying once through the dense oracle when the
/// message-passing solve fails. The returned diagnostics keep the failed
/// attempt's round count with `converged = false`.
fn direction_with_fallback(
    lp: &StandardLp,
    x: &Vector,
    mu: f64,
    cfg: &BarrierConfig,
) -> Result<NewtonStep, SolveError> {
    let tol = cfg.effective_gabp_tol(mu);
    match newton_direction(lp, x, mu, cfg.linsolve, tol, cfg.gabp_max_rounds) {
        Ok(step) => Ok(step),
        Err(e) if cfg.linsolve != LinSolve::DenseOracle && is_gabp_failure(&e).is_some() => {
            let rounds = is_gabp_failure(&e).unwrap_or(0);
            let mut step =
                newton_direction(lp, x, mu, LinSolve::DenseOracle, tol, cfg.gabp_max_rounds)?;
            step.lin = LinInfo {
                rounds,
                converged: false,
            };
            Ok(step)
        }
        Err(e) => Err(e),
    }
}

/// Guard against runaway iterates on unbounded problems.
fn divergence_check(lp: &StandardLp, x: &Vector) -> Result<(), SolveError> {
    if x.norm_inf() > 1e14 || lp.c().dot(x) < -1e15 {
        return Err(SolveError::Unbounded);
    }
    Ok(())
}

/// Log-barrier solve. Without a starting point a strictly feasible one is
/// constructed first (least-norm fast path, then phase-1). For
/// `μ = μ0, σμ0, σ²μ0, …` Newton iterations run until `λ²/2 ≤ ε`; the outer
/// loop stops once `n·μ ≤ ε_outer`.
pub fn barrier_solve(
    lp: &StandardLp,
    x0: Option<&Vector>,
    cfg: &BarrierConfig,
) -> Result<BarrierSolution, SolveError> {
    cfg.validate()?;
    let x_start = match x0 {
        Some(x) => {
            check_start(lp, x)?;
            x.clone()
        }
        None => find_strictly_feasible(lp, cfg)?,
    };
    barrier_solve_from(lp, x_start, cfg)
}

fn barrier_solve_from(
    lp: &StandardLp,
    mut x: Vector,
    cfg: &BarrierConfig,
) -> Result<BarrierSolution, SolveError> {
    let n = lp.num_vars() as f64;
    let mut trace = IterateTrace::default();
    let mut mu = cfg.mu0;
    let mut outer = 0usize;
    let mut last_lambda2 = 0.0;
    let total_cap = 10_000usize;
    let mut total_steps = 0usize;

    loop {
        for newton in 0..cfg.max_newton_per_mu {
            let mut step = direction_with_fallback(lp, &x, mu, cfg)?;
            last_lambda2 = step.lambda2;
            if step.lambda2 / 2.0 <= cfg.eps_newton {
                break;
            }
            let mut searched = line_search(lp, &x, &step.dx, mu, cfg.alpha, cfg.beta, cfg.tau);
            if matches!(searched, Err(SolveError::StalledLineSearch))
                && step.lin.converged
                && step.lin.rounds > 0
            {
                // The messages converged but the recovered direction was not
                // usable at this μ's accuracy demand: same treatment as a
                // failed message-passing solve.
                let tol = cfg.effective_gabp_tol(mu);
                let rounds = step.lin.rounds;
                step = newton_direction(lp, &x, mu, LinSolve::DenseOracle, tol, None)?;
                step.lin = LinInfo {
                    rounds,
                    converged: false,
                };
                last_lambda2 = step.lambda2;
                if step.lambda2 / 2.0 <= cfg.eps_newton {
                    break;
                }
                searched = line_search(lp, &x, &step.dx, mu, cfg.alpha, cfg.beta, cfg.tau);
            }
            let t = match searched {
                Ok(t) => t,
                // No f64-representable improvement exists along the computed
                // direction: the stage is centered to machine accuracy. The
                // step recovery divides solver error by μ, so at small μ the
                // decrement itself is noise and cannot arbitrate. A stall on
                // the very first step is a genuinely stuck start instead.
                Err(SolveError::StalledLineSearch) if !(outer == 0 && newton == 0) => break,
                Err(e) => return Err(e),
            };
            if t == 0.0 {
                break;
            }
            trace.records.push(TraceRecord {
                iter: outer,
                newton,
                x: x.clone(),
                obj: lp.c().dot(&x),
                mu,
                lambda2: step.lambda2,
                step: t,
                gabp_rounds: step.lin.rounds,
                gabp_converged: step.lin.converged,
            });
            x = x.axpy(t, &step.dx)?;
            divergence_check(lp, &x)?;
            total_steps += 1;
            if total_steps > total_cap {
                return Err(SolveError::IterationLimit(total_cap));
            }
        }
        if n * mu <= cfg.eps_outer {
            break;
        }
        mu *= cfg.sigma;
        outer += 1;
    }

    let objective = lp.c().dot(&x);
    trace.records.push(TraceRecord {
        iter: outer,
        newton: 0,
        x: x.clone(),
        obj: objective,
        mu,
        lambda2: last_lambda2,
        step: 0.0,
        gabp_rounds: 0,
        gabp_converged: true,
    });
    Ok(BarrierSolution {
        x,
        objective,
        trace,
    })
}

/// Affine-scaling solve from an explicit strictly feasible interior point:
/// the same least-squares machinery with μ = 0, a fixed fraction-to-boundary
/// step `τ·t_max` per iteration, and every iterate recorded.
pub fn affine_scaling_solve(
    lp: &StandardLp,
    x0: &Vector,
    cfg: &BarrierConfig,
) -> Result<BarrierSolution, SolveError> {
    cfg.validate()?;
    check_start(lp, x0)?;
    let mut x = x0.clone();
    let mut trace = IterateTrace::default();
    let mut prev_obj = f64::INFINITY;

    for k in 0..cfg.max_affine_steps {
        let obj = lp.c().dot(&x);
        // Relative-progress stop: the step sizes collapse geometrically near
        // the optimal face.
        if k > 0 && (prev_obj - obj).abs() <= 1e-12 * (1.0 + obj.abs()) {
            break;
        }
        prev_obj = obj;

        let tol = cfg.gabp_tol.max(GABP_TOL_FLOOR);
        let direction = match affine_direction(lp, &x, cfg.linsolve, tol, cfg.gabp_max_rounds) {
            Ok(d) => d,
            Err(e) if cfg.linsolve != LinSolve::DenseOracle && is_gabp_failure(&e).is_some() => {
                let rounds = is_gabp_failure(&e).unwrap_or(0);
                affine_direction(lp, &x, LinSolve::DenseOracle, tol, cfg.gabp_max_rounds)?.map(
                    |mut step| {
                        step.lin = LinInfo {
                            rounds,
                            converged: false,
                        };
                        step
                    },
                )
            }
            Err(e) => return Err(e),
        };
        let Some(step) = direction else {
            break; // zero direction: reduced costs vanished
        };
        // The exact direction strictly decreases cᵀx; a computed ascent
        // direction is inner-solver noise, i.e. optimality at its accuracy.
        if lp.c().dot(&step.dx) >= 0.0 {
            break;
        }
        // Duality-gap stop. bᵀy only bounds the optimum when y is (near)
        // dual feasible, so the gap test is gated on the reduced costs.
        let gap = obj - step.dual_objective;
        if gap.abs() <= cfg.eps_outer * (1.0 + obj.abs())
            && step.min_reduced_cost >= -1e-7 * (1.0 + lp.c().norm_inf())
        {
            break;
        }
        let t_boundary = max_step_to_boundary(&x, &step.dx);
        if t_boundary.is_infinite() {
            return Err(SolveError::Unbounded);
        }
        let t = cfg.tau * t_boundary;
        trace.records.push(TraceRecord {
            iter: k,
            newton: 0,
            x: x.clone(),
            obj,
            mu: 0.0,
            lambda2: step.decrement2,
            step: t,
            gabp_rounds: step.lin.rounds,
            gabp_converged: step.lin.converged,
        });
        x = x.axpy(t, &step.dx)?;
        divergence_check(lp, &x)?;
    }

    let objective = lp.c().dot(&x);
    trace.records.push(TraceRecord {
        iter: trace.records.len(),
        newton: 0,
        x: x.clone(),
        obj: objective,
        mu: 0.0,
        lambda2: 0.0,
        step: 0.0,
        gabp_rounds: 0,
        gabp_converged: true,
    });
    Ok(BarrierSolution {
        x,
        objective,
        trace,
    })
}

/// Finds a strictly feasible point: first the least-norm solution of
/// `Ax = b` if it is comfortably interior, otherwise a phase-1 solve that
/// minimizes one artificial variable per violated constraint.
pub fn find_strictly_feasible(
    lp: &StandardLp,
    cfg: &BarrierConfig,
) -> Result<Vector, SolveError> {
    if let Some(x) = least_norm_interior(lp) {
        return Ok(x);
    }
    phase_one(lp, cfg)
}

/// Least-norm solution `x = Aᵀ(AAᵀ)⁻¹ b` (the projection of the origin onto
/// `Ax = b`), accepted only when strictly positive with a healthy margin.
fn least_norm_interior(lp: &StandardLp) -> Option<Vector> {
    let projector = EqualityProjector::new(lp).ok()?;
    let x = projector
        .project(lp, &Vector::zeros(lp.num_vars()), Some(lp.b()))
        .ok()?;
    let margin = 1e-3 * (1.0 + x.norm_inf());
    if x.iter().all(|&v| v > margin) {
        Some(x)
    } else {
        None
    }
}

/// Phase-1: minimize the sum of artificial variables added (one per
/// constraint whose residual at `x = 1` is nonzero), starting from the
/// trivially interior all-ones point.
fn phase_one(lp: &StandardLp, cfg: &BarrierConfig) -> Result<Vector, SolveError> {
    let n = lp.num_vars();
    let p = lp.num_constraints();
    let ones = Vector::ones(n);
    let r = lp.b().sub(&lp.a().matvec(&ones)?)?;
    let violated: Vec<usize> = (0..p).filter(|&i| r[i].abs() > 1e-12).collect();
    if violated.is_empty() {
        return Ok(ones);
    }

    let n_art = violated.len();
    let mut a1 = DenseMatrix::zeros(p, n + n_art);
    for row in 0..p {
        for col in 0..n {
            a1.set(row, col, lp.a().get(row, col));
        }
    }
    for (k, &row) in violated.iter().enumerate() {
        a1.set(row, n + k, r[row]);
    }
    let mut c1 = vec![0.0; n + n_art];
    for v in c1.iter_mut().skip(n) {
        *v = 1.0;
    }
    let provenance = crate::model::Provenance {
        var_map: (0..n + n_art)
            .map(|column| crate::model::VarOrigin::Direct { column })
            .collect(),
        num_std_vars: n + n_art,
        negated_objective: false,
        objective_offset: 0.0,
    };
    let phase1 = StandardLp::new(a1, lp.b().clone(), Vector::new(c1)?, provenance)?;

    let mut phase1_cfg = cfg.clone();
    phase1_cfg.eps_outer = cfg.eps_outer.min(1e-9);
    let start = Vector::ones(n + n_art);
    let solution = barrier_solve_from(&phase1, start, &phase1_cfg)?;
    if solution.objective > PHASE1_FEAS_TOL {
        return Err(SolveError::Infeasible {
            objective: solution.objective,
            tol: PHASE1_FEAS_TOL,
        });
    }
    // Dropping the artificial columns leaves a residual of their final
    // (tiny) values; re-anchor the point onto Ax = b exactly.
    let x = Vector::new(solution.x.as_slice()[..n].to_vec())?;
    let x = EqualityProjector::new(lp)?.project(lp, &x, Some(lp.b()))?;
    if !x.all_positive() {
        return Err(SolveError::NotInterior);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constraint, LpProblem, Relation, Sense, to_standard_form};

    fn one_var_fixed() -> StandardLp {
        let p = LpProblem {
            names: vec!["x".into()],
            sense: Sense::Minimize,
            objective: Vector::from_slice(&[1.0]),
            objective_offset: 0.0,
            constraints: vec![Constraint {
                coeffs: Vector::from_slice(&[1.0]),
                relation: Relation::Eq,
                rhs: 1.0,
            }],
            nonneg: vec![true],
        };
        to_standard_form(&p).unwrap()
    }

    fn toy_standard() -> StandardLp {
        to_standard_form(&crate::io::build_toy_problem()).unwrap()
    }

    /// Interior standard-form point of the toy problem at `x = (x1, x2)`.
    fn toy_interior(x1: f64, x2: f64) -> Vector {
        let lp = crate::io::build_toy_problem();
        let mut v = vec![x1, x2];
        for c in &lp.constraints {
            v.push(c.rhs - c.coeffs[0] * x1 - c.coeffs[1] * x2);
        }
        Vector::new(v).unwrap()
    }

    #[test]
    fn fixed_variable_gives_zero_step() {
        let lp = one_var_fixed();
        let x = Vector::from_slice(&[1.0]);
        for mu in [1.0, 0.1, 1e-3] {
            let step =
                newton_direction(&lp, &x, mu, LinSolve::DenseOracle, 1e-12, None).unwrap();
            assert!(step.dx.norm_inf() < 1e-12, "mu={mu}: {:?}", step.dx);
            assert!(step.lambda2 < 1e-20);
            assert!((step.y[0] - (1.0 - mu)).abs() < 1e-10);
        }
    }

    #[test]
    fn newton_step_stays_in_null_space() {
        let lp = toy_standard();
        let x = toy_interior(0.25, 0.25);
        for mode in [LinSolve::DenseOracle, LinSolve::GabpNormal] {
            let step = match newton_direction(&lp, &x, 1.0, mode, 1e-12, Some(2000)) {
                Ok(s) => s,
                Err(e) if is_gabp_failure(&e).is_some() => continue,
                Err(e) => panic!("{e}"),
            };
            let adx = lp.a().matvec(&step.dx).unwrap();
            assert!(
                adx.norm_inf() <= 1e-8 * lp.a().max_abs().max(1.0),
                "{mode:?}: residual {}",
                adx.norm_inf()
            );
        }
    }

    #[test]
    fn newton_direction_matches_dense_oracle_on_toy() {
        let lp = toy_standard();
        let x = toy_interior(0.25, 0.25);
        let dense = newton_direction(&lp, &x, 1.0, LinSolve::DenseOracle, 1e-12, None).unwrap();
        // Reference via an independent elimination on the normal equations.
        let f = scaled_basis(&lp, &x);
        let g = Vector::new(
            lp.c()
                .iter()
                .enumerate()
                .map(|(i, &c)| x[i] * c - 1.0)
                .collect(),
        )
        .unwrap();
        let gram = f.gram();
        let rhs = f.t_matvec(&g).unwrap();
        let y = oracle::dense_solve(&gram, &rhs).unwrap();
        for j in 0..y.len() {
            assert!((dense.y[j] - y[j]).abs() < 1e-6 * (1.0 + y.norm_inf()));
        }
    }

    #[test]
    fn lambda2_matches_gradient_form() {
        let lp = toy_standard();
        let x = toy_interior(0.3, 0.4);
        let mu = 0.5;
        let step = newton_direction(&lp, &x, mu, LinSolve::DenseOracle, 1e-12, None).unwrap();
        let grad_form = -barrier_gradient(&lp, &x, mu).dot(&step.dx);
        assert!(
            (step.lambda2 - grad_form).abs() <= 1e-8 * (1.0 + step.lambda2),
            "quadratic {} vs gradient {grad_form}",
            step.lambda2
        );
    }

    #[test]
    fn newton_requires_interior_point() {
        let lp = one_var_fixed();
        let x = Vector::from_slice(&[0.0]);
        assert!(matches!(
            newton_direction(&lp, &x, 1.0, LinSolve::DenseOracle, 1e-10, None),
            Err(SolveError::NotInterior)
        ));
    }

    #[test]
    fn armijo_accepts_unit_step_on_quadratic() {
        // phi(t) = (1 − t)² from f(x) = x² at x = 1 along Δx = −1:
        // phi(1) = 0 ≤ 1 + 0.25·1·(−2) = 0.5.
        let t = armijo_backtrack(|t| (1.0 - t) * (1.0 - t), 1.0, -2.0, 1.0, 0.25, 0.5).unwrap();
        assert_eq!(t, 1.0);
    }

    #[test]
    fn line_search_zero_direction() {
        let lp = one_var_fixed();
        let t = line_search(
            &lp,
            &Vector::from_slice(&[1.0]),
            &Vector::from_slice(&[0.0]),
            1.0,
            0.25,
            0.5,
            0.99,
        )
        .unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn line_search_respects_boundary_cap() {
        let lp = toy_standard();
        let x = toy_interior(0.25, 0.25);
        // Descent direction shrinking x1 only is not feasibility-preserving,
        // so build the cap check directly on the boundary helper.
        let mut dx = vec![0.0; 13];
        dx[0] = -2.0;
        let dx = Vector::new(dx).unwrap();
        let t_max = max_step_to_boundary(&Vector::from_slice(&[1.0]), &Vector::from_slice(&[-2.0]));
        assert!((t_max - 0.5).abs() < 1e-15);
        let cap = 0.99 * max_step_to_boundary(&x, &dx);
        assert!(cap < 0.13);
    }

    #[test]
    fn constant_objective_on_feasible_set() {
        // min x1 + x2 s.t. x1 + x2 = 1: objective is 1 everywhere feasible.
        let p = LpProblem {
            names: vec!["x1".into(), "x2".into()],
            sense: Sense::Minimize,
            objective: Vector::from_slice(&[1.0, 1.0]),
            objective_offset: 0.0,
            constraints: vec![Constraint {
                coeffs: Vector::from_slice(&[1.0, 1.0]),
                relation: Relation::Eq,
                rhs: 1.0,
            }],
            nonneg: vec![true, true],
        };
        let lp = to_standard_form(&p).unwrap();
        let sol = barrier_solve(&lp, None, &BarrierConfig::default()).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn toy_problem_barrier_reaches_oracle_optimum() {
        let lp = toy_standard();
        for mode in [LinSolve::GabpNormal, LinSolve::DenseOracle] {
            let sol = barrier_solve(&lp, None, &BarrierConfig::with_linsolve(mode)).unwrap();
            let original = lp.provenance().original_objective(sol.objective);
            assert!(
                (original - 1.25).abs() < 1e-4,
                "{mode:?}: objective {original}"
            );
        }
    }

    #[test]
    fn trace_feasibility_and_positivity_invariants() {
        let lp = toy_standard();
        let sol = barrier_solve(&lp, None, &BarrierConfig::default()).unwrap();
        let b_scale = 1.0 + lp.b().norm_inf();
        for rec in &sol.trace.records {
            assert!(rec.x.all_positive());
            assert!(rec.lambda2 >= 0.0);
            assert!(lp.residual_inf(&rec.x).unwrap() <= 1e-7 * b_scale);
        }
    }

    #[test]
    fn barrier_objective_decreases_within_stage() {
        let lp = toy_standard();
        let sol = barrier_solve(&lp, None, &BarrierConfig::default()).unwrap();
        for pair in sol.trace.records.windows(2) {
            if pair[0].iter == pair[1].iter && pair[1].step > 0.0 {
                let f0 = barrier_objective(&lp, &pair[0].x, pair[0].mu);
                let f1 = barrier_objective(&lp, &pair[1].x, pair[1].mu);
                assert!(f1 <= f0 + 1e-12 * (1.0 + f0.abs()));
            }
        }
    }

    #[test]
    fn affine_scaling_monotone_on_toy() {
        let lp = toy_standard();
        let x0 = toy_interior(0.25, 0.25);
        let sol = affine_scaling_solve(&lp, &x0, &BarrierConfig::default()).unwrap();
        let original = lp.provenance().original_objective(sol.objective);
        assert!((original - 1.25).abs() < 1e-4, "objective {original}");
        // Standard-form objective is non-increasing step to step.
        for pair in sol.trace.records.windows(2) {
            assert!(pair[1].obj <= pair[0].obj + 1e-12);
        }
        assert!(sol.trace.records.len() >= 3);
    }

    #[test]
    fn affine_scaling_zero_step_on_fixed_problem() {
        let lp = one_var_fixed();
        let x0 = Vector::from_slice(&[1.0]);
        let sol = affine_scaling_solve(&lp, &x0, &BarrierConfig::default()).unwrap();
        assert_eq!(sol.trace.records.len(), 1);
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_objective_improves_on_random_problems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let (lp, _) = crate::generate::feasible_inequality_lp(&mut rng, 3, 4);
            let std = to_standard_form(&lp).unwrap();
            let x0 = find_strictly_feasible(&std, &BarrierConfig::default()).unwrap();
            let sol = affine_scaling_solve(&std, &x0, &BarrierConfig::default()).unwrap();
            for pair in sol.trace.records.windows(2) {
                assert!(
                    pair[1].obj <= pair[0].obj + 1e-12 * (1.0 + pair[0].obj.abs()),
                    "{} -> {}",
                    pair[0].obj,
                    pair[1].obj
                );
            }
        }
    }

    #[test]
    fn infeasible_problem_detected_by_phase_one() {
        // x ≤ −1 with x ≥ 0 has no feasible point.
        let p = LpProblem {
            names: vec!["x".into()],
            sense: Sense::Minimize,
            objective: Vector::from_slice(&[1.0]),
            objective_offset: 0.0,
            constraints: vec![Constraint {
                coeffs: Vector::from_slice(&[1.0]),
                relation: Relation::Le,
                rhs: -1.0,
            }],
            nonneg: vec![true],
        };
        let lp = to_standard_form(&p).unwrap();
        assert!(matches!(
            barrier_solve(&lp, None, &BarrierConfig::default()),
            Err(SolveError::Infeasible { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let mut cfg = BarrierConfig::default();
        cfg.alpha = 0.7;
        assert!(matches!(
            cfg.validate(),
            Err(SolveError::BadConfig(_))
        ));
    }
}
