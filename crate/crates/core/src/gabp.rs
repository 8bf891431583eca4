//! Gaussian belief propagation as a solver for `Ax = b` with symmetric `A`:
//! every variable is a node of the graph induced by the nonzero pattern,
//! and per-edge precision/mean messages are iterated to a fixed point whose
//! node marginals carry the solution (means) and approximate inverse
//! variances (precisions).
//!
//! The schedule is synchronous (flooding): all directed messages of a round
//! are computed from the previous round's messages. Per-node sums run over
//! neighbors in ascending index order, so results are bit-reproducible.
//! Within a round the message computations are independent; the loop here is
//! sequential but states are immutable between rounds and may be shared or
//! sent across threads.

use std::sync::Arc;

use thiserror::Error;

use crate::model::{DenseMatrix, ModelError, SparseSymMatrix, Vector};

#[derive(Debug, Error)]
pub enum GabpError {
    #[error("zero diagonal entry at index {index}: cannot form node prior")]
    SingularPrior { index: usize },
    #[error("numerical breakdown in round {round}: {quantity} vanished on edge {from}->{to}")]
    Breakdown {
        round: usize,
        from: usize,
        to: usize,
        quantity: &'static str,
    },
    #[error("zero marginal precision at node {index}")]
    ZeroPrecision { index: usize },
    #[error("states belong to different graphs")]
    MismatchedGraphs,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One directed edge `from -> to` carrying the coupling `A[from][to]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Edge {
    from: usize,
    to: usize,
    coupling: f64,
}

/// Immutable graph layout shared by all states of one solve.
#[derive(Debug)]
struct Graph {
    matrix: SparseSymMatrix,
    edges: Vec<Edge>,
    /// Edge ids leaving node i, ascending destination.
    out: Vec<Vec<usize>>,
    /// Edge ids entering node i, ascending source.
    inn: Vec<Vec<usize>>,
}

impl Graph {
    fn build(matrix: SparseSymMatrix) -> Self {
        let dim = matrix.dim();
        let mut edges = Vec::new();
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); dim];
        for i in 0..dim {
            for &(j, v) in matrix.neighbors(i) {
                let id = edges.len();
                edges.push(Edge {
                    from: i,
                    to: j,
                    coupling: v,
                });
                out[i].push(id);
            }
        }
        let mut inn: Vec<Vec<usize>> = vec![Vec::new(); dim];
        for i in 0..dim {
            let mut incoming: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.to == i)
                .map(|(id, _)| id)
                .collect();
            incoming.sort_unstable_by_key(|&id| edges[id].from);
            inn[i] = incoming;
        }
        Self {
            matrix,
            edges,
            out,
            inn,
        }
    }

    fn same_structure(&self, other: &Graph) -> bool {
        self.matrix == other.matrix
    }
}

/// Message state of one GaBP run: node priors (fixed after initialization)
/// plus one precision/mean message per directed edge, and instrumentation
/// counters for message reads and updates.
#[derive(Debug, Clone)]
pub struct GabpState {
    graph: Arc<Graph>,
    shift: Vector,
    prior_precision: Vec<f64>,
    prior_mean: Vec<f64>,
    msg_precision: Vec<f64>,
    msg_mean: Vec<f64>,
    round: usize,
    message_updates: u64,
    message_reads: u64,
}

impl GabpState {
    pub fn matrix(&self) -> &SparseSymMatrix {
        &self.graph.matrix
    }

    pub fn shift(&self) -> &Vector {
        &self.shift
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn prior_precision(&self, i: usize) -> f64 {
        self.prior_precision[i]
    }

    pub fn prior_mean(&self, i: usize) -> f64 {
        self.prior_mean[i]
    }

    pub fn num_directed_edges(&self) -> usize {
        self.graph.edges.len()
    }

    /// Message on the directed edge `from -> to`, if that edge exists.
    pub fn message(&self, from: usize, to: usize) -> Option<(f64, f64)> {
        self.graph.out[from]
            .iter()
            .find(|&&id| self.graph.edges[id].to == to)
            .map(|&id| (self.msg_precision[id], self.msg_mean[id]))
    }

    /// Total directed-message updates performed since initialization.
    pub fn message_updates(&self) -> u64 {
        self.message_updates
    }

    /// Total message reads performed since initialization. One read is one
    /// incoming (precision, mean) pair consumed while updating a message or
    /// computing a marginal.
    pub fn message_reads(&self) -> u64 {
        self.message_reads
    }
}

/// Result of a GaBP solve: marginal means (the solution of `Ax = b` when
/// converged), marginal precisions, and run diagnostics.
#[derive(Debug, Clone)]
pub struct GabpResult {
    pub means: Vector,
    pub precisions: Vector,
    pub rounds: usize,
    pub converged: bool,
    pub final_delta: f64,
    pub message_updates: u64,
}

/// Stage 1: node priors `P_ii = A_ii`, `μ_ii = b_i / A_ii`; all edge
/// messages start at zero.
pub fn gabp_init(a: &SparseSymMatrix, b: &Vector) -> Result<GabpState, GabpError> {
    if b.len() != a.dim() {
        return Err(GabpError::Model(ModelError::DimensionMismatch {
            expected: a.dim(),
            got: b.len(),
        }));
    }
    let dim = a.dim();
    let mut prior_precision = Vec::with_capacity(dim);
    let mut prior_mean = Vec::with_capacity(dim);
    for i in 0..dim {
        let d = a.diag(i);
        if d == 0.0 {
            return Err(GabpError::SingularPrior { index: i });
        }
        prior_precision.push(d);
        prior_mean.push(b[i] / d);
    }
    let graph = Arc::new(Graph::build(a.clone()));
    let n_edges = graph.edges.len();
    Ok(GabpState {
        graph,
        shift: b.clone(),
        prior_precision,
        prior_mean,
        msg_precision: vec![0.0; n_edges],
        msg_mean: vec![0.0; n_edges],
        round: 0,
        message_updates: 0,
        message_reads: 0,
    })
}

/// Stage 2: recompute every directed message from the previous round's
/// messages. For the edge `i -> j`:
///
/// ```text
/// P_i\j = P_ii + Σ_{k ∈ N(i)\j} P_ki
/// μ_i\j = (P_ii μ_ii + Σ_{k ∈ N(i)\j} P_ki μ_ki) / P_i\j
/// P_ij  = −A_ij · A_ji / P_i\j
/// μ_ij  = −A_ij · μ_i\j / P_ij
/// ```
pub fn gabp_round(s: &GabpState) -> Result<GabpState, GabpError> {
    let g = &s.graph;
    let round = s.round + 1;
    let mut msg_precision = vec![0.0; g.edges.len()];
    let mut msg_mean = vec![0.0; g.edges.len()];
    let mut reads = 0u64;

    for i in 0..g.matrix.dim() {
        for &eid in &g.out[i] {
            let edge = g.edges[eid];
            let mut sum_p = 0.0;
            let mut sum_pm = 0.0;
            for &in_id in &g.inn[i] {
                let src = g.edges[in_id].from;
                if src == edge.to {
                    continue;
                }
                sum_p += s.msg_precision[in_id];
                sum_pm += s.msg_precision[in_id] * s.msg_mean[in_id];
                reads += 1;
            }
            let p_excl = s.prior_precision[i] + sum_p;
            if p_excl == 0.0 || !p_excl.is_finite() {
                return Err(GabpError::Breakdown {
                    round,
                    from: i,
                    to: edge.to,
                    quantity: "P_i\\j",
                });
            }
            let mu_excl = (s.prior_precision[i] * s.prior_mean[i] + sum_pm) / p_excl;
            let p_ij = -edge.coupling * edge.coupling / p_excl;
            if p_ij == 0.0 || !p_ij.is_finite() {
                return Err(GabpError::Breakdown {
                    round,
                    from: i,
                    to: edge.to,
                    quantity: "P_ij",
                });
            }
            let mu_ij = -edge.coupling * mu_excl / p_ij;
            if !mu_ij.is_finite() {
                return Err(GabpError::Breakdown {
                    round,
                    from: i,
                    to: edge.to,
                    quantity: "mu_ij",
                });
            }
            msg_precision[eid] = p_ij;
            msg_mean[eid] = mu_ij;
        }
    }

    Ok(GabpState {
        graph: Arc::clone(&s.graph),
        shift: s.shift.clone(),
        prior_precision: s.prior_precision.clone(),
        prior_mean: s.prior_mean.clone(),
        msg_precision,
        msg_mean,
        round,
        message_updates: s.message_updates + g.edges.len() as u64,
        message_reads: s.message_reads + reads,
    })
}

/// Stage 3: true when no directed message moved by more than `tol` in
/// either precision or mean between the two states.
pub fn gabp_converged(prev: &GabpState, next: &GabpState, tol: f64) -> Result<bool, GabpError> {
    if !Arc::ptr_eq(&prev.graph, &next.graph) && !prev.graph.same_structure(&next.graph) {
        return Err(GabpError::MismatchedGraphs);
    }
    Ok(message_delta(prev, next) <= tol)
}

fn message_delta(prev: &GabpState, next: &GabpState) -> f64 {
    let mut delta = 0.0_f64;
    for id in 0..prev.msg_precision.len() {
        delta = delta.max((next.msg_precision[id] - prev.msg_precision[id]).abs());
        delta = delta.max((next.msg_mean[id] - prev.msg_mean[id]).abs());
    }
    delta
}

/// Stages 4–5: marginal precision `P_i = P_ii + Σ_k P_ki` and mean
/// `μ_i = (P_ii μ_ii + Σ_k P_ki μ_ki) / P_i` per node.
pub fn gabp_infer(s: &GabpState) -> Result<GabpResult, GabpError> {
    let g = &s.graph;
    let dim = g.matrix.dim();
    let mut means = Vec::with_capacity(dim);
    let mut precisions = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut sum_p = 0.0;
        let mut sum_pm = 0.0;
        for &in_id in &g.inn[i] {
            sum_p += s.msg_precision[in_id];
            sum_pm += s.msg_precision[in_id] * s.msg_mean[in_id];
        }
        let p_i = s.prior_precision[i] + sum_p;
        if p_i == 0.0 || !p_i.is_finite() {
            return Err(GabpError::ZeroPrecision { index: i });
        }
        let mu_i = (s.prior_precision[i] * s.prior_mean[i] + sum_pm) / p_i;
        if !mu_i.is_finite() {
            return Err(GabpError::ZeroPrecision { index: i });
        }
        precisions.push(p_i);
        means.push(mu_i);
    }
    Ok(GabpResult {
        means: Vector::new(means)?,
        precisions: Vector::new(precisions)?,
        rounds: s.round,
        converged: false,
        final_delta: f64::INFINITY,
        message_updates: s.message_updates,
    })
}

/// Full loop of init / iterate / check / infer. Non-convergence within
/// `max_rounds` is not an error; the result carries `converged = false`.
pub fn gabp_solve(
    a: &SparseSymMatrix,
    b: &Vector,
    tol: f64,
    max_rounds: usize,
) -> Result<GabpResult, GabpError> {
    assert!(tol > 0.0, "tolerance must be positive");
    assert!(max_rounds >= 1, "need at least one round");
    let mut state = gabp_init(a, b)?;
    let mut converged = false;
    let mut delta = f64::INFINITY;
    for _ in 0..max_rounds {
        let next = gabp_round(&state)?;
        delta = message_delta(&state, &next);
        state = next;
        if delta <= tol {
            converged = true;
            break;
        }
    }
    let mut result = gabp_infer(&state)?;
    result.converged = converged;
    result.final_delta = delta;
    result.rounds = state.round;
    Ok(result)
}

/// Default round cap: the convergence-rate bound `⌈log ε / log γ⌉` when the
/// matrix is diagonally dominant (with `ε` the message tolerance), otherwise
/// ten times the dimension.
pub fn default_max_rounds(a: &SparseSymMatrix, tol: f64) -> usize {
    use crate::convergence::{gamma, is_diagonally_dominant, iteration_bound, IterationBound};
    if is_diagonally_dominant(a) {
        if let Ok(g) = gamma(a) {
            let eps = tol.clamp(f64::MIN_POSITIVE, 1.0);
            if let IterationBound::Rounds(t) = iteration_bound(g, eps) {
                return t.max(1);
            }
        }
    }
    10 * a.dim().max(1)
}

/// Which linear system backs a least-squares solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsMode {
    /// `p×p` normal equations `(FᵀF) y = Fᵀg`. The default: its diagonal is
    /// a sum of squares, so node priors always exist.
    Normal,
    /// `(n+p)`-dimensional augmented system `[[−I, F], [Fᵀ, 0]]` over the
    /// residual and solution blocks. The zero diagonal block is loaded with
    /// `AUGMENTED_LOADING` so that priors exist; the perturbation is
    /// reported in the diagnostics.
    Augmented,
}

/// Diagonal loading applied to the zero block in augmented mode.
pub const AUGMENTED_LOADING: f64 = 1e-8;

/// Diagnostics of a least-squares solve through GaBP.
#[derive(Debug, Clone)]
pub struct LsDiagnostics {
    pub mode: LsMode,
    pub converged: bool,
    pub rounds: usize,
    pub final_delta: f64,
    pub system_dim: usize,
    /// Diagonal perturbation applied (augmented mode only).
    pub loading: Option<f64>,
    pub message_updates: u64,
}

/// Least-squares solution with its solve diagnostics.
#[derive(Debug, Clone)]
pub struct LsSolution {
    pub y: Vector,
    pub diagnostics: LsDiagnostics,
}

/// Solves `min ‖Fy − g‖₂` (`F: n×p`, `n ≥ p ≥ 1`) by GaBP on the system
/// selected by `mode`. Non-convergence is reported through the diagnostics,
/// not as an error; numerical breakdown is an error.
pub fn gabp_least_squares(
    f: &DenseMatrix,
    g: &Vector,
    mode: LsMode,
    tol: f64,
    max_rounds: usize,
) -> Result<LsSolution, GabpError> {
    let n = f.rows();
    let p = f.cols();
    if g.len() != n {
        return Err(GabpError::Model(ModelError::DimensionMismatch {
            expected: n,
            got: g.len(),
        }));
    }
    match mode {
        LsMode::Normal => {
            let (m, rhs) = normal_system(f, g)?;
            let result = gabp_solve(&m, &rhs, tol, max_rounds)?;
            Ok(LsSolution {
                y: result.means,
                diagnostics: LsDiagnostics {
                    mode,
                    converged: result.converged,
                    rounds: result.rounds,
                    final_delta: result.final_delta,
                    system_dim: p,
                    loading: None,
                    message_updates: result.message_updates,
                },
            })
        }
        LsMode::Augmented => {
            let (c, rhs) = augmented_system(f, g, AUGMENTED_LOADING)?;
            let result = gabp_solve(&c, &rhs, tol, max_rounds)?;
            let y = Vector::new(result.means.as_slice()[n..].to_vec())?;
            Ok(LsSolution {
                y,
                diagnostics: LsDiagnostics {
                    mode,
                    converged: result.converged,
                    rounds: result.rounds,
                    final_delta: result.final_delta,
                    system_dim: n + p,
                    loading: Some(AUGMENTED_LOADING),
                    message_updates: result.message_updates,
                },
            })
        }
    }
}

/// `(FᵀF, Fᵀg)` as a sparse symmetric system.
pub fn normal_system(f: &DenseMatrix, g: &Vector) -> Result<(SparseSymMatrix, Vector), GabpError> {
    let gram = f.gram();
    let rhs = f.t_matvec(g)?;
    let m = SparseSymMatrix::from_dense_symmetric(&gram, 0.0)?;
    Ok((m, rhs))
}

/// Augmented system over `(r, y)` with `r` the length-`n` residual block:
///
/// ```text
/// [ −I   F ] [r]   [g]
/// [ Fᵀ  δI ] [y] = [0]
/// ```
///
/// whose second block row gives `(FᵀF + δI) y = Fᵀ g`; the solution block is
/// the trailing `p` entries.
fn augmented_system(
    f: &DenseMatrix,
    g: &Vector,
    loading: f64,
) -> Result<(SparseSymMatrix, Vector), GabpError> {
    let n = f.rows();
    let p = f.cols();
    let mut triplets = Vec::new();
    for i in 0..n {
        triplets.push((i, i, -1.0));
        for j in 0..p {
            let v = f.get(i, j);
            if v != 0.0 {
                triplets.push((i, n + j, v));
            }
        }
    }
    for j in 0..p {
        triplets.push((n + j, n + j, loading));
    }
    let c = SparseSymMatrix::from_triplets(n + p, triplets)?;
    let mut shift = g.as_slice().to_vec();
    shift.extend(std::iter::repeat(0.0).take(p));
    Ok((c, Vector::new(shift)?))
}
