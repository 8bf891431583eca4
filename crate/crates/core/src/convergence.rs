//! Convergence analysis for the message-passing solver: diagonal-dominance
//! gaps, the pairwise-potential decomposition behind the rate parameter γ,
//! the round bound `⌈log ε / log γ⌉`, and the walk-summability spectral
//! condition `ρ(|I − A'|) < 1` on the unit-diagonal normalization.

use thiserror::Error;

use crate::model::{DenseMatrix, SparseSymMatrix, Vector};

#[derive(Debug, Error, PartialEq)]
pub enum ConvergenceError {
    #[error("matrix is not strictly diagonally dominant (row {row} has gap {gap})")]
    NotDominant { row: usize, gap: f64 },
    #[error("nonpositive diagonal entry {value} at row {row}")]
    NonPositiveDiagonal { row: usize, value: f64 },
    #[error("invalid accuracy eps = {0}: need 0 < eps <= 1")]
    BadAccuracy(f64),
    #[error("invalid rate gamma = {0}: need 0 <= gamma")]
    BadRate(f64),
}

/// Per-row dominance gap `ε_i = |A_ii| − Σ_{j≠i} |A_ij|`. Negative gaps are
/// returned as-is; dominance is decided by the caller.
pub fn dominance_gaps(a: &SparseSymMatrix) -> Vector {
    let mut gaps = Vec::with_capacity(a.dim());
    for i in 0..a.dim() {
        let off: f64 = a.neighbors(i).iter().map(|&(_, v)| v.abs()).sum();
        gaps.push(a.diag(i).abs() - off);
    }
    Vector::new(gaps).expect("finite gaps")
}

/// Strict dominance: every gap positive.
pub fn is_diagonally_dominant(a: &SparseSymMatrix) -> bool {
    dominance_gaps(a).iter().all(|&g| g > 0.0)
}

/// Rate parameter over all directed edges:
/// `γ = max_{i,j} |a_ij| / (|a_ij| + ε_i / |N(i)|)`, zero for diagonal
/// matrices. Requires strict dominance.
pub fn gamma(a: &SparseSymMatrix) -> Result<f64, ConvergenceError> {
    let gaps = dominance_gaps(a);
    if let Some((row, &gap)) = gaps
        .iter()
        .enumerate()
        .find(|&(_, &g)| g <= 0.0)
    {
        return Err(ConvergenceError::NotDominant { row, gap });
    }
    let mut best = 0.0_f64;
    for i in 0..a.dim() {
        best = best.max(gamma_row(a, i, gaps[i]));
    }
    Ok(best)
}

/// Node-local rate `γ_i = max_{j ∈ N(i)} |a_ij| / (|a_ij| + ε_i / |N(i)|)`;
/// the global rate is `max_i γ_i`, so each node can compute its share from
/// local data alone. Isolated nodes contribute zero.
pub fn gamma_local(a: &SparseSymMatrix, i: usize) -> f64 {
    let off: f64 = a.neighbors(i).iter().map(|&(_, v)| v.abs()).sum();
    gamma_row(a, i, a.diag(i).abs() - off)
}

fn gamma_row(a: &SparseSymMatrix, i: usize, gap: f64) -> f64 {
    let deg = a.degree(i);
    if deg == 0 {
        return 0.0;
    }
    let share = gap / deg as f64;
    a.neighbors(i)
        .iter()
        .map(|&(_, v)| v.abs() / (v.abs() + share))
        .fold(0.0, f64::max)
}

/// Round bound for a target accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationBound {
    Rounds(usize),
    /// `γ ≥ 1`: the bound gives no guarantee.
    Unbounded,
}

/// `t = ⌈log ε / log γ⌉` rounds to reach accuracy `ε‖b‖∞`. `γ = 0` (no
/// edges) converges in one round; `ε = 1` needs none; `γ ≥ 1` yields no
/// bound.
pub fn iteration_bound(gamma: f64, eps: f64) -> IterationBound {
    if !(0.0..).contains(&gamma) || gamma.is_nan() {
        return IterationBound::Unbounded;
    }
    if gamma >= 1.0 {
        return IterationBound::Unbounded;
    }
    if eps >= 1.0 {
        return IterationBound::Rounds(0);
    }
    if gamma == 0.0 {
        return IterationBound::Rounds(1);
    }
    let t = (eps.ln() / gamma.ln()).ceil();
    IterationBound::Rounds(t as usize)
}

/// Validated wrapper around [`iteration_bound`] enforcing the preconditions
/// `0 < γ` handled above and `0 < ε ≤ 1`.
pub fn iteration_bound_checked(
    gamma: f64,
    eps: f64,
) -> Result<IterationBound, ConvergenceError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(ConvergenceError::BadAccuracy(eps));
    }
    if gamma < 0.0 || gamma.is_nan() {
        return Err(ConvergenceError::BadRate(gamma));
    }
    Ok(iteration_bound(gamma, eps))
}

/// Spectral sufficient condition: normalizes to unit diagonal
/// `A' = D^{−1/2} A D^{−1/2}` and estimates `ρ(|I − A'|)` by power iteration
/// on the entrywise-absolute matrix. Walk-summable iff the estimate is
/// below one.
pub fn spectral_condition(a: &SparseSymMatrix) -> Result<(f64, bool), ConvergenceError> {
    let n = a.dim();
    for i in 0..n {
        if a.diag(i) <= 0.0 {
            return Err(ConvergenceError::NonPositiveDiagonal {
                row: i,
                value: a.diag(i),
            });
        }
    }
    if n == 0 {
        return Ok((0.0, true));
    }
    // B = |I − A'| has zero diagonal and entries |a_ij| / √(a_ii a_jj).
    let b = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            a.get(i, j).abs() / (a.diag(i) * a.diag(j)).sqrt()
        }
    });
    let mut v = Vector::ones(n);
    let mut rho = 0.0_f64;
    for _ in 0..200 {
        let w = b.matvec(&v).expect("square");
        let norm = w.norm_inf();
        if norm == 0.0 {
            return Ok((0.0, true));
        }
        let next_rho = norm / v.norm_inf();
        let v_next = w.scale(1.0 / norm);
        let done = (next_rho - rho).abs() <= 1e-10 * next_rho.max(1.0);
        rho = next_rho;
        v = v_next;
        if done {
            break;
        }
    }
    Ok((rho, rho < 1.0))
}

/// Pairwise-potential parameters for one directed edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePotential {
    pub from: usize,
    pub to: usize,
    /// `b̃_ij = A_ij`.
    pub b_tilde: f64,
    /// `c̃_ij = A_ij + ε_i / |N(i)|`.
    pub c_tilde: f64,
}

/// Pairwise-potential decomposition of a dominant matrix, plus the per-row
/// residual `|Σ_j c̃_ij − A_ii|` diagnosing how far the proposed `c̃`
/// violates the row-sum constraint (zero for nonnegative off-diagonals with
/// positive diagonal, nonzero in general).
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub edges: Vec<EdgePotential>,
    pub row_residuals: Vector,
}

pub fn decomposition(a: &SparseSymMatrix) -> Decomposition {
    let gaps = dominance_gaps(a);
    let mut edges = Vec::new();
    let mut residuals = Vec::with_capacity(a.dim());
    for i in 0..a.dim() {
        let deg = a.degree(i);
        if deg == 0 {
            residuals.push(0.0);
            continue;
        }
        let share = gaps[i] / deg as f64;
        let mut c_sum = 0.0;
        for &(j, v) in a.neighbors(i) {
            let c_tilde = v + share;
            c_sum += c_tilde;
            edges.push(EdgePotential {
                from: i,
                to: j,
                b_tilde: v,
                c_tilde,
            });
        }
        residuals.push((c_sum - a.diag(i)).abs());
    }
    Decomposition {
        edges,
        row_residuals: Vector::new(residuals).expect("finite"),
    }
}

/// Full report for one matrix, as printed by the `bound` command.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub dominant: bool,
    pub gaps: Vector,
    /// `None` when the matrix is not strictly dominant.
    pub gamma: Option<f64>,
    /// Round bound at the requested accuracy; `None` when unavailable.
    pub bound_rounds: Option<usize>,
    pub spectral_rho: f64,
    pub walk_summable: bool,
}

pub fn analyze(a: &SparseSymMatrix, eps: f64) -> Result<ConvergenceReport, ConvergenceError> {
    let gaps = dominance_gaps(a);
    let dominant = gaps.iter().all(|&g| g > 0.0);
    let gamma_value = if dominant { Some(gamma(a)?) } else { None };
    let bound_rounds = gamma_value.and_then(|g| match iteration_bound_checked(g, eps) {
        Ok(IterationBound::Rounds(t)) => Some(t),
        _ => None,
    });
    let (spectral_rho, walk_summable) = spectral_condition(a)?;
    Ok(ConvergenceReport {
        dominant,
        gaps,
        gamma: gamma_value,
        bound_rounds,
        spectral_rho,
        walk_summable,
    })
}
