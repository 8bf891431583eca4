//! Primal-dual path-following solver: KKT residuals of the system
//! `Ax = b, Aᵀy + z = c, Xz = μ1`, the 3×3 block Newton system, its
//! symmetrization for message passing, and the explicit elimination through
//! the positive definite matrix `M = AZ⁻¹XAᵀ`:
//!
//! ```text
//! M Δy = AZ⁻¹X(c − μX⁻¹1 − Aᵀy) + b − Ax
//! Δz   = −AᵀΔy + c − Aᵀy − z
//! Δx   = XZ⁻¹(AᵀΔy + μX⁻¹1 − c + Aᵀy)
//! ```
//!
//! Back-substituting `Δz` into `ZΔx + XΔz = μ1 − Xz` forces the minus sign
//! between `μX⁻¹1` and `c` in the `Δx` line; the residual test against the
//! unsymmetrized 3×3 system pins this down.
//!
//! Iterates start at `x = z = 1, y = 0` and absorb infeasibility through
//! the residual-driven Newton steps (infeasible-start Newton); μ follows
//! `σ·(xᵀz)/n`.

use crate::barrier::{IterateTrace, LinInfo, SolveError, TraceRecord, GABP_TOL_FLOOR};
use crate::gabp;
use crate::model::{DenseMatrix, ModelError, SparseSymMatrix, StandardLp, Vector};
use crate::oracle;

/// Diagonal loading applied to the zero blocks of the symmetrized KKT
/// system in full-GaBP mode.
pub const KKT_LOADING: f64 = 1e-8;

/// One strictly interior primal-dual iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct PdIterate {
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
    pub mu: f64,
}

impl PdIterate {
    pub fn new(x: Vector, y: Vector, z: Vector, mu: f64) -> Result<Self, SolveError> {
        if !x.all_positive() || !z.all_positive() {
            return Err(SolveError::NotInterior);
        }
        if mu < 0.0 {
            return Err(SolveError::BadConfig("mu must be nonnegative".into()));
        }
        Ok(Self { x, y, z, mu })
    }

    pub fn complementarity_gap(&self) -> f64 {
        self.x.dot(&self.z)
    }
}

/// KKT residuals `(r_p, r_d, r_c) = (b − Ax, c − Aᵀy − z, μ1 − Xz)`.
pub fn kkt_residuals(
    lp: &StandardLp,
    it: &PdIterate,
) -> Result<(Vector, Vector, Vector), SolveError> {
    let r_p = lp.b().sub(&lp.a().matvec(&it.x)?)?;
    let aty = lp.a().t_matvec(&it.y)?;
    let r_d = Vector::new(
        lp.c()
            .iter()
            .enumerate()
            .map(|(i, &c)| c - aty[i] - it.z[i])
            .collect(),
    )?;
    let r_c = Vector::new(
        (0..it.x.len())
            .map(|i| it.mu - it.x[i] * it.z[i])
            .collect(),
    )?;
    Ok((r_p, r_d, r_c))
}

/// Symmetrized KKT system over `(Δx, Δy, Δz)`: multiplying the
/// complementarity row by `Z⁻¹` (valid since `z > 0`) gives
///
/// ```text
/// Ã = [ 0   Aᵀ  I     ]        b̃ = ( c − Aᵀy − z )
///     [ A   0   0     ]            ( b − Ax       )
///     [ I   0   Z⁻¹X  ]            ( μZ⁻¹1 − x    )
/// ```
///
/// of dimension `2n + p`. The right-hand side blocks are ordered to match
/// the block rows: the first (length n) is the dual residual, the second
/// (length p) the primal residual, the third (length n) is `Z⁻¹r_c`.
pub fn assemble_symmetric_kkt(
    lp: &StandardLp,
    it: &PdIterate,
    mu: f64,
) -> Result<(SparseSymMatrix, Vector), SolveError> {
    if !it.z.all_positive() {
        return Err(SolveError::NotInterior);
    }
    let n = lp.num_vars();
    let p = lp.num_constraints();
    let mut triplets = Vec::new();
    for i in 0..n {
        for j in 0..p {
            let v = lp.a().get(j, i);
            if v != 0.0 {
                triplets.push((i, n + j, v));
            }
        }
        triplets.push((i, n + p + i, 1.0));
        triplets.push((n + p + i, n + p + i, it.x[i] / it.z[i]));
    }
    let matrix = SparseSymMatrix::from_triplets(2 * n + p, triplets)?;

    let probe = PdIterate {
        mu,
        ..it.clone()
    };
    let (r_p, r_d, r_c) = kkt_residuals(lp, &probe)?;
    let mut shift = Vec::with_capacity(2 * n + p);
    shift.extend(r_d.iter());
    shift.extend(r_p.iter());
    for i in 0..n {
        shift.push(r_c[i] / it.z[i]);
    }
    Ok((matrix, Vector::new(shift)?))
}

/// Which backend solves the primal-dual Newton system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdLinSolve {
    /// GaBP on the p×p positive definite system `M = AZ⁻¹XAᵀ` followed by
    /// explicit back-substitution (default).
    ExplicitGabp,
    /// GaBP on the full symmetrized `(2n+p)` system with diagonal loading.
    FullGabp,
    /// Dense elimination of the unsymmetrized 3×3 block system.
    DenseOracle,
}

#[derive(Debug, Clone)]
pub struct PdDirection {
    pub dx: Vector,
    pub dy: Vector,
    pub dz: Vector,
    pub lin: LinInfo,
}

fn explicit_direction_from_dy(
    lp: &StandardLp,
    it: &PdIterate,
    mu: f64,
    dy: Vector,
    lin: LinInfo,
) -> Result<PdDirection, SolveError> {
    let n = lp.num_vars();
    let aty = lp.a().t_matvec(&it.y)?;
    let atdy = lp.a().t_matvec(&dy)?;
    let mut dz = Vec::with_capacity(n);
    let mut dx = Vec::with_capacity(n);
    for i in 0..n {
        dz.push(-atdy[i] + lp.c()[i] - aty[i] - it.z[i]);
        dx.push(it.x[i] / it.z[i] * (atdy[i] + mu / it.x[i] - lp.c()[i] + aty[i]));
    }
    // The x-block amplifies the Δy solve residual by x/z; re-anchor it onto
    // the primal row AΔx = r_p.
    let r_p = lp.b().sub(&lp.a().matvec(&it.x)?)?;
    let dx = crate::barrier::EqualityProjector::new(lp)?.project(
        lp,
        &Vector::new(dx)?,
        Some(&r_p),
    )?;
    Ok(PdDirection {
        dx,
        dy,
        dz: Vector::new(dz)?,
        lin,
    })
}

/// `M = AZ⁻¹XAᵀ` and the explicit right-hand side for `Δy`.
fn normal_kkt_system(
    lp: &StandardLp,
    it: &PdIterate,
    mu: f64,
) -> Result<(DenseMatrix, Vector), SolveError> {
    let a = lp.a();
    let n = lp.num_vars();
    let p = lp.num_constraints();
    let w: Vec<f64> = (0..n).map(|i| it.x[i] / it.z[i]).collect();
    let m = DenseMatrix::from_fn(p, p, |r, s| {
        let mut acc = 0.0;
        for k in 0..n {
            acc += w[k] * a.get(r, k) * a.get(s, k);
        }
        acc
    });
    let aty = a.t_matvec(&it.y)?;
    let scaled = Vector::new(
        (0..n)
            .map(|i| w[i] * (lp.c()[i] - mu / it.x[i] - aty[i]))
            .collect(),
    )?;
    let r_p = lp.b().sub(&a.matvec(&it.x)?)?;
    let mut rhs = Vec::with_capacity(p);
    for r in 0..p {
        let mut acc = 0.0;
        for k in 0..n {
            acc += a.get(r, k) * scaled[k];
        }
        rhs.push(acc + r_p[r]);
    }
    Ok((m, Vector::new(rhs)?))
}

/// Primal-dual Newton direction in the requested mode. All modes satisfy
/// the unsymmetrized 3×3 system; GaBP non-convergence surfaces as
/// [`SolveError::GabpDidNotConverge`].
pub fn pd_direction(
    lp: &StandardLp,
    it: &PdIterate,
    mu: f64,
    mode: PdLinSolve,
    gabp_tol: f64,
    gabp_max_rounds: Option<usize>,
) -> Result<PdDirection, SolveError> {
    if !it.x.all_positive() || !it.z.all_positive() {
        return Err(SolveError::NotInterior);
    }
    let n = lp.num_vars();
    let p = lp.num_constraints();
    match mode {
        PdLinSolve::ExplicitGabp => {
            let (m, rhs) = normal_kkt_system(lp, it, mu)?;
            let sparse = SparseSymMatrix::from_dense_symmetric(&m, 1e-9 * m.max_abs().max(1.0))?;
            let cap = gabp_max_rounds.unwrap_or_else(|| gabp::default_max_rounds(&sparse, gabp_tol));
            let result = gabp::gabp_solve(&sparse, &rhs, gabp_tol, cap)?;
            if !result.converged {
                return Err(SolveError::GabpDidNotConverge {
                    rounds: result.rounds,
                    final_delta: result.final_delta,
                });
            }
            explicit_direction_from_dy(
                lp,
                it,
                mu,
                result.means,
                LinInfo {
                    rounds: result.rounds,
                    converged: true,
                },
            )
        }
        PdLinSolve::FullGabp => {
            let (matrix, shift) = assemble_symmetric_kkt(lp, it, mu)?;
            // Load the zero diagonal blocks so node priors exist.
            let mut triplets = matrix.entries();
            for i in 0..n + p {
                triplets.push((i, i, KKT_LOADING));
            }
            let loaded = SparseSymMatrix::from_triplets(2 * n + p, triplets)?;
            let cap = gabp_max_rounds.unwrap_or(10 * (2 * n + p));
            let result = gabp::gabp_solve(&loaded, &shift, gabp_tol, cap)?;
            if !result.converged {
                return Err(SolveError::GabpDidNotConverge {
                    rounds: result.rounds,
                    final_delta: result.final_delta,
                });
            }
            let sol = result.means.as_slice();
            Ok(PdDirection {
                dx: Vector::new(sol[..n].to_vec())?,
                dy: Vector::new(sol[n..n + p].to_vec())?,
                dz: Vector::new(sol[n + p..].to_vec())?,
                lin: LinInfo {
                    rounds: result.rounds,
                    converged: true,
                },
            })
        }
        PdLinSolve::DenseOracle => {
            // Unsymmetrized 3×3 block system, eliminated with partial
            // pivoting: an independent route from the explicit formulas.
            let dim = 2 * n + p;
            let mut full = DenseMatrix::zeros(dim, dim);
            for i in 0..n {
                for j in 0..p {
                    full.set(i, n + j, lp.a().get(j, i));
                    full.set(n + j, i, lp.a().get(j, i));
                }
                full.set(i, n + p + i, 1.0);
                full.set(n + p + i, i, it.z[i]);
                full.set(n + p + i, n + p + i, it.x[i]);
            }
            let probe = PdIterate {
                mu,
                ..it.clone()
            };
            let (r_p, r_d, r_c) = kkt_residuals(lp, &probe)?;
            let mut rhs = Vec::with_capacity(dim);
            rhs.extend(r_d.iter());
            rhs.extend(r_p.iter());
            rhs.extend(r_c.iter());
            let sol = oracle::dense_solve(&full, &Vector::new(rhs)?)?;
            let sol = sol.as_slice();
            Ok(PdDirection {
                dx: Vector::new(sol[..n].to_vec())?,
                dy: Vector::new(sol[n..n + p].to_vec())?,
                dz: Vector::new(sol[n + p..].to_vec())?,
                lin: LinInfo {
                    rounds: 0,
                    converged: true,
                },
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct PdConfig {
    /// Centering factor: targets `μ = σ·(xᵀz)/n` each iteration.
    pub sigma: f64,
    /// Fraction-to-boundary factor applied separately to `x` and `z`.
    pub tau: f64,
    /// Stop once `max(‖r_p‖∞, ‖r_d‖∞, xᵀz/n) ≤ eps_outer`.
    pub eps_outer: f64,
    /// Message tolerance for GaBP-backed solves, scaled by `min(1, μ)`
    /// internally.
    pub gabp_tol: f64,
    pub gabp_max_rounds: Option<usize>,
    pub linsolve: PdLinSolve,
    pub max_iter: usize,
}

impl Default for PdConfig {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            tau: 0.99,
            eps_outer: 1e-8,
            gabp_tol: 1e-10,
            gabp_max_rounds: None,
            linsolve: PdLinSolve::ExplicitGabp,
            max_iter: 300,
        }
    }
}

impl PdConfig {
    pub fn with_linsolve(linsolve: PdLinSolve) -> Self {
        Self {
            linsolve,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let checks = [
            (
                self.sigma > 0.0 && self.sigma < 1.0,
                "sigma must lie in (0, 1)",
            ),
            (self.tau > 0.0 && self.tau < 1.0, "tau must lie in (0, 1)"),
            (self.eps_outer > 0.0, "eps_outer must be positive"),
            (self.gabp_tol > 0.0, "gabp_tol must be positive"),
            (self.max_iter >= 1, "need at least one iteration"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(SolveError::BadConfig(msg.into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PdSolution {
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
    /// Standard-form objective `cᵀx`.
    pub objective: f64,
    pub trace: IterateTrace,
}

fn residual_merit(lp: &StandardLp, it: &PdIterate, mu: f64) -> Result<f64, SolveError> {
    let probe = PdIterate {
        mu,
        ..it.clone()
    };
    let (r_p, r_d, r_c) = kkt_residuals(lp, &probe)?;
    Ok(r_p.norm2().powi(2) + r_d.norm2().powi(2) + r_c.norm2().powi(2))
}

fn stop_merit(lp: &StandardLp, it: &PdIterate) -> Result<f64, SolveError> {
    let probe = PdIterate {
        mu: 0.0,
        ..it.clone()
    };
    let (r_p, r_d, _) = kkt_residuals(lp, &probe)?;
    let n = lp.num_vars() as f64;
    Ok(r_p
        .norm_inf()
        .max(r_d.norm_inf())
        .max(it.complementarity_gap() / n))
}

fn direction_with_fallback(
    lp: &StandardLp,
    it: &PdIterate,
    mu: f64,
    cfg: &PdConfig,
) -> Result<PdDirection, SolveError> {
    let tol = (cfg.gabp_tol * mu.min(1.0)).max(GABP_TOL_FLOOR);
    match pd_direction(lp, it, mu, cfg.linsolve, tol, cfg.gabp_max_rounds) {
        Ok(d) => Ok(d),
        Err(e)
            if cfg.linsolve != PdLinSolve::DenseOracle
                && crate::barrier::is_gabp_failure(&e).is_some() =>
        {
            let rounds = crate::barrier::is_gabp_failure(&e).unwrap_or(0);
            let mut d = pd_direction(lp, it, mu, PdLinSolve::DenseOracle, tol, None)?;
            d.lin = LinInfo {
                rounds,
                converged: false,
            };
            Ok(d)
        }
        Err(e) => Err(e),
    }
}

/// Step multipliers keeping `x` and `z` strictly positive, capped at 1.
fn boundary_steps(it: &PdIterate, dir: &PdDirection, tau: f64) -> (f64, f64) {
    let ap = (tau * crate::barrier::max_step_to_boundary(&it.x, &dir.dx)).min(1.0);
    let ad = (tau * crate::barrier::max_step_to_boundary(&it.z, &dir.dz)).min(1.0);
    (ap, ad)
}

fn advance(it: &PdIterate, dir: &PdDirection, ap: f64, ad: f64) -> Result<PdIterate, SolveError> {
    Ok(PdIterate {
        x: it.x.axpy(ap, &dir.dx)?,
        y: it.y.axpy(ad, &dir.dy)?,
        z: it.z.axpy(ad, &dir.dz)?,
        mu: it.mu,
    })
}

/// Path-following loop: target `μ = σ·(xᵀz)/n`, Newton direction, damped
/// step with fraction-to-boundary caps and a sufficient-decrease check on
/// the residual merit that also enforces a non-increasing complementarity
/// gap.
pub fn pd_solve(
    lp: &StandardLp,
    start: Option<PdIterate>,
    cfg: &PdConfig,
) -> Result<PdSolution, SolveError> {
    cfg.validate()?;
    let n = lp.num_vars();
    let mut it = match start {
        Some(s) => {
            if s.x.len() != n || s.y.len() != lp.num_constraints() || s.z.len() != n {
                return Err(SolveError::Model(ModelError::DimensionMismatch {
                    expected: n,
                    got: s.x.len(),
                }));
            }
            if !s.x.all_positive() || !s.z.all_positive() {
                return Err(SolveError::NotInterior);
            }
            s
        }
        None => PdIterate {
            x: Vector::ones(n),
            y: Vector::zeros(lp.num_constraints()),
            z: Vector::ones(n),
            mu: 1.0,
        },
    };
    let mut trace = IterateTrace::default();

    for k in 0..cfg.max_iter {
        if stop_merit(lp, &it)? <= cfg.eps_outer {
            let objective = lp.c().dot(&it.x);
            trace.records.push(TraceRecord {
                iter: k,
                newton: 0,
                x: it.x.clone(),
                obj: objective,
                mu: it.mu,
                lambda2: residual_merit(lp, &it, it.mu)?,
                step: 0.0,
                gabp_rounds: 0,
                gabp_converged: true,
            });
            return Ok(PdSolution {
                objective,
                x: it.x,
                y: it.y,
                z: it.z,
                trace,
            });
        }

        let gap = it.complementarity_gap();
        let mu = cfg.sigma * gap / n as f64;
        it.mu = mu;
        let merit0 = residual_merit(lp, &it, mu)?;

        let try_step = |dir: &PdDirection,
                        ap: f64,
                        ad: f64,
                        s: f64|
         -> Result<Option<PdIterate>, SolveError> {
            let trial = advance(&it, dir, ap, ad)?;
            if !trial.x.all_positive() || !trial.z.all_positive() {
                return Ok(None);
            }
            let merit1 = residual_merit(lp, &trial, mu)?;
            let gap1 = trial.complementarity_gap();
            let decrease = merit1 <= merit0 * (1.0 - 1e-4 * s * ap.min(ad)) + 1e-30;
            let gap_ok = gap1 <= gap * (1.0 + 1e-12) + 1e-30;
            Ok((decrease && gap_ok).then_some(trial))
        };
        // Long separate primal/dual steps, few dampings only: a micro-step
        // can never win here.
        let separate_phase =
            |dir: &PdDirection| -> Result<Option<(PdIterate, f64)>, SolveError> {
                let (ap_cap, ad_cap) = boundary_steps(&it, dir, cfg.tau);
                for s in [1.0, 0.5, 0.25] {
                    if let Some(trial) = try_step(dir, s * ap_cap, s * ad_cap, s)? {
                        return Ok(Some((trial, s * ap_cap)));
                    }
                }
                Ok(None)
            };

        let mut dir = direction_with_fallback(lp, &it, mu, cfg)?;
        let mut accepted = separate_phase(&dir)?;
        if accepted.is_none() && dir.lin.converged && dir.lin.rounds > 0 {
            // The messages converged but the direction is too inexact to
            // clear the monotonicity checks: same treatment as a failed
            // message-passing solve.
            let rounds = dir.lin.rounds;
            let tol = (cfg.gabp_tol * mu.min(1.0)).max(GABP_TOL_FLOOR);
            dir = pd_direction(lp, &it, mu, PdLinSolve::DenseOracle, tol, None)?;
            dir.lin = LinInfo {
                rounds,
                converged: false,
            };
            accepted = separate_phase(&dir)?;
        }
        if accepted.is_none() {
            // Common step size with deep backtracking: equal block scaling
            // restores the Newton guarantee that both the merit and the gap
            // decrease for small steps.
            let (ap_cap, ad_cap) = boundary_steps(&it, &dir, cfg.tau);
            let mut s = 1.0;
            while s > 1e-12 {
                let a = s * ap_cap.min(ad_cap);
                if let Some(trial) = try_step(&dir, a, a, s)? {
                    accepted = Some((trial, a));
                    break;
                }
                s *= 0.5;
            }
        }
        let Some((next, primal_step)) = accepted else {
            return Err(SolveError::StalledLineSearch);
        };

        trace.records.push(TraceRecord {
            iter: k,
            newton: 0,
            x: it.x.clone(),
            obj: lp.c().dot(&it.x),
            mu,
            lambda2: merit0,
            step: primal_step,
            gabp_rounds: dir.lin.rounds,
            gabp_converged: dir.lin.converged,
        });
        it = next;
    }
    Err(SolveError::IterationLimit(cfg.max_iter))
}
