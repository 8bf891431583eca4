//! Problem representations and the vector/matrix value types shared by all
//! solver modules: dense vectors and matrices, symmetric sparse matrices for
//! the message-passing solver, user-facing LP problems and their standard
//! form `min cᵀx s.t. Ax = b, x ≥ 0`.
//!
//! The constraint matrix convention throughout the crate is `A: p×n`
//! (constraints × variables), so that `Ax = b` with `x ∈ Rⁿ`, `b ∈ Rᵖ` is
//! dimensionally consistent, and full row rank means `rank(A) = p`.

use std::fmt;

use thiserror::Error;

/// Pivot threshold for the numerical row-rank check, relative to the largest
/// entry of the matrix.
pub const RANK_PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix shape {rows}x{cols} does not match {len} entries")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },
    #[error("sparse entry ({i},{j}) out of bounds for dimension {dim}")]
    EntryOutOfBounds { i: usize, j: usize, dim: usize },
    #[error("duplicate sparse entry for pair ({i},{j})")]
    DuplicateEntry { i: usize, j: usize },
    #[error("matrix is not symmetric: |A[{i}][{j}] - A[{j}][{i}]| = {delta}")]
    NotSymmetric { i: usize, j: usize, delta: f64 },
    #[error("malformed problem: {0}")]
    MalformedProblem(String),
    #[error("constraint {index} has {got} coefficients, expected {expected}")]
    BadConstraintLength {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("constraint matrix is rank deficient: rank {rank} < {p} rows")]
    RankDeficient { rank: usize, p: usize },
}

/// A finite real vector. Construction rejects NaN and infinities so that
/// downstream arithmetic never has to re-check its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    entries: Vec<f64>,
}

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self, ModelError> {
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { index, value });
            }
        }
        Ok(Self { entries })
    }

    /// Builds a vector from entries already known to be finite, panicking
    /// otherwise. Intended for literals in tests and internal arithmetic on
    /// checked inputs.
    pub fn from_slice(entries: &[f64]) -> Self {
        Self::new(entries.to_vec()).expect("finite entries")
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: vec![0.0; n],
        }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            entries: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm2(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self + scale * other`; lengths must match.
    pub fn axpy(&self, scale: f64, other: &Vector) -> Result<Vector, ModelError> {
        if self.len() != other.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Vector::new(
            self.entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + scale * b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector, ModelError> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector {
            entries: self.entries.iter().map(|v| v * s).collect(),
        }
    }

    pub fn all_positive(&self) -> bool {
        self.entries.iter().all(|&v| v > 0.0)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, v) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Row-major dense matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, ModelError> {
        if entries.len() != rows * cols {
            return Err(ModelError::ShapeMismatch {
                rows,
                cols,
                len: entries.len(),
            });
        }
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { index, value });
            }
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries).expect("finite entries")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// `A * x`.
    pub fn matvec(&self, x: &Vector) -> Result<Vector, ModelError> {
        if x.len() != self.cols {
            return Err(ModelError::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut s = 0.0;
            for (j, &a) in self.row(i).iter().enumerate() {
                s += a * x[j];
            }
            out.push(s);
        }
        Vector::new(out)
    }

    /// `Aᵀ * y`.
    pub fn t_matvec(&self, y: &Vector) -> Result<Vector, ModelError> {
        if y.len() != self.rows {
            return Err(ModelError::DimensionMismatch {
                expected: self.rows,
                got: y.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            for (j, &a) in self.row(i).iter().enumerate() {
                out[j] += a * yi;
            }
        }
        Vector::new(out)
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Gram product `AᵀA` as a dense symmetric matrix.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..self.rows {
                    s += self.get(k, i) * self.get(k, j);
                }
                out.set(i, j, s);
                out.set(j, i, s);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Numerical row rank by Gaussian elimination with partial pivoting.
    /// A pivot counts when its magnitude exceeds `RANK_PIVOT_TOL` times the
    /// largest entry of the input matrix.
    pub fn row_rank(&self) -> usize {
        let mut work = self.clone();
        let threshold = RANK_PIVOT_TOL * work.max_abs().max(1e-300);
        let mut rank = 0;
        let mut pivot_col = 0;
        while rank < work.rows && pivot_col < work.cols {
            let mut best = rank;
            for r in rank + 1..work.rows {
                if work.get(r, pivot_col).abs() > work.get(best, pivot_col).abs() {
                    best = r;
                }
            }
            if work.get(best, pivot_col).abs() <= threshold {
                pivot_col += 1;
                continue;
            }
            if best != rank {
                for c in 0..work.cols {
                    let tmp = work.get(rank, c);
                    work.set(rank, c, work.get(best, c));
                    work.set(best, c, tmp);
                }
            }
            let pivot = work.get(rank, pivot_col);
            for r in rank + 1..work.rows {
                let factor = work.get(r, pivot_col) / pivot;
                if factor != 0.0 {
                    for c in pivot_col..work.cols {
                        let v = work.get(r, c) - factor * work.get(rank, c);
                        work.set(r, c, v);
                    }
                }
            }
            rank += 1;
            pivot_col += 1;
        }
        rank
    }
}

/// Symmetric sparse matrix stored as a diagonal plus per-row adjacency lists
/// of strictly-off-diagonal nonzeros. An unordered pair `(i, j)` is stored
/// once and visible from both rows; neighbor lists are kept in ascending
/// index order, which fixes the summation order of every consumer.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    diag: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl SparseSymMatrix {
    /// Builds from upper-triangle triplets `(i, j, v)` with `i ≤ j`, `v ≠ 0`.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, ModelError> {
        let mut diag = vec![0.0; dim];
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        let mut seen_diag = vec![false; dim];
        for (i, j, v) in triplets {
            if i > j || j >= dim {
                return Err(ModelError::EntryOutOfBounds { i, j, dim });
            }
            if !v.is_finite() {
                return Err(ModelError::NonFinite { index: i, value: v });
            }
            if v == 0.0 {
                continue;
            }
            if i == j {
                if seen_diag[i] {
                    return Err(ModelError::DuplicateEntry { i, j });
                }
                seen_diag[i] = true;
                diag[i] = v;
            } else {
                if adj[i].iter().any(|&(k, _)| k == j) {
                    return Err(ModelError::DuplicateEntry { i, j });
                }
                adj[i].push((j, v));
                adj[j].push((i, v));
            }
        }
        for row in &mut adj {
            row.sort_unstable_by_key(|&(k, _)| k);
        }
        Ok(Self { dim, diag, adj })
    }

    /// Interprets a dense square matrix as symmetric, requiring
    /// `|A[i][j] - A[j][i]| ≤ tol` for every pair. Entries of magnitude zero
    /// are dropped.
    pub fn from_dense_symmetric(m: &DenseMatrix, tol: f64) -> Result<Self, ModelError> {
        if m.rows() != m.cols() {
            return Err(ModelError::ShapeMismatch {
                rows: m.rows(),
                cols: m.cols(),
                len: m.rows() * m.cols(),
            });
        }
        let dim = m.rows();
        let mut triplets = Vec::new();
        for i in 0..dim {
            for j in i..dim {
                let delta = (m.get(i, j) - m.get(j, i)).abs();
                if delta > tol {
                    return Err(ModelError::NotSymmetric { i, j, delta });
                }
                let v = m.get(i, j);
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(dim, triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    /// Off-diagonal neighbors of node `i` in ascending index order.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Number of stored strictly-off-diagonal unordered pairs.
    pub fn nnz_off_diagonal(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            self.adj[i]
                .iter()
                .find(|&&(k, _)| k == j)
                .map_or(0.0, |&(_, v)| v)
        }
    }

    /// Upper-triangle entries including nonzero diagonal, ascending `(i, j)`.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            if self.diag[i] != 0.0 {
                out.push((i, i, self.diag[i]));
            }
            for &(j, v) in &self.adj[i] {
                if j > i {
                    out.push((i, j, v));
                }
            }
        }
        out.sort_unstable_by_key(|&(i, j, _)| (i, j));
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            m.set(i, i, self.diag[i]);
            for &(j, v) in &self.adj[i] {
                m.set(i, j, v);
            }
        }
        m
    }

    /// `A * x` with the per-row sum accumulated as diagonal term first, then
    /// neighbors in ascending order.
    pub fn matvec(&self, x: &Vector) -> Result<Vector, ModelError> {
        if x.len() != self.dim {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut out = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut s = self.diag[i] * x[i];
            for &(j, v) in &self.adj[i] {
                s += v * x[j];
            }
            out.push(s);
        }
        Vector::new(out)
    }
}

/// Objective sense of a user-facing problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Constraint relation of a user-facing problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Le => write!(f, "<="),
            Relation::Ge => write!(f, ">="),
            Relation::Eq => write!(f, "="),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vector,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program as written by the user: arbitrary senses and relations,
/// per-variable nonnegativity flags (`free` drops the default `x ≥ 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub names: Vec<String>,
    pub sense: Sense,
    pub objective: Vector,
    /// Constant term of the objective; carried through parsing and added
    /// back when reporting objective values.
    pub objective_offset: f64,
    pub constraints: Vec<Constraint>,
    pub nonneg: Vec<bool>,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.num_vars();
        if n == 0 {
            return Err(ModelError::MalformedProblem("no variables".into()));
        }
        if self.constraints.is_empty() {
            return Err(ModelError::MalformedProblem("no constraints".into()));
        }
        if self.objective.len() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                got: self.objective.len(),
            });
        }
        if self.nonneg.len() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                got: self.nonneg.len(),
            });
        }
        for (index, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(ModelError::BadConstraintLength {
                    index,
                    expected: n,
                    got: c.coeffs.len(),
                });
            }
            if !c.rhs.is_finite() {
                return Err(ModelError::NonFinite {
                    index,
                    value: c.rhs,
                });
            }
        }
        Ok(())
    }

    /// Objective value at a point in original variables, honoring sense and
    /// constant offset.
    pub fn objective_value(&self, x: &Vector) -> f64 {
        self.objective.dot(x) + self.objective_offset
    }
}

/// How one original variable appears among the standard-form columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarOrigin {
    /// Nonnegative original variable copied to one column.
    Direct { column: usize },
    /// Free original variable split as `x = x⁺ − x⁻`.
    Split { plus: usize, minus: usize },
}

/// Bookkeeping that maps standard-form solutions back to the original
/// problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub var_map: Vec<VarOrigin>,
    pub num_std_vars: usize,
    /// True when the original sense was `Maximize`, i.e. the standard-form
    /// objective is the negated original.
    pub negated_objective: bool,
    pub objective_offset: f64,
}

impl Provenance {
    /// Original objective value corresponding to a standard-form `cᵀx`.
    pub fn original_objective(&self, std_objective: f64) -> f64 {
        let v = if self.negated_objective {
            -std_objective
        } else {
            std_objective
        };
        v + self.objective_offset
    }
}

/// `min cᵀx s.t. Ax = b, x ≥ 0` with `A: p×n`, full row rank `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardLp {
    a: DenseMatrix,
    b: Vector,
    c: Vector,
    provenance: Provenance,
}

impl StandardLp {
    /// Validates shapes, finiteness and full row rank. `p < n` is not
    /// enforced: a square system pins the feasible set to one point, which
    /// the solvers handle; `underdetermined()` reports the flag.
    pub fn new(
        a: DenseMatrix,
        b: Vector,
        c: Vector,
        provenance: Provenance,
    ) -> Result<Self, ModelError> {
        if b.len() != a.rows() {
            return Err(ModelError::DimensionMismatch {
                expected: a.rows(),
                got: b.len(),
            });
        }
        if c.len() != a.cols() {
            return Err(ModelError::DimensionMismatch {
                expected: a.cols(),
                got: c.len(),
            });
        }
        if provenance.num_std_vars != a.cols() {
            return Err(ModelError::DimensionMismatch {
                expected: a.cols(),
                got: provenance.num_std_vars,
            });
        }
        let rank = a.row_rank();
        if rank < a.rows() {
            return Err(ModelError::RankDeficient { rank, p: a.rows() });
        }
        Ok(Self {
            a,
            b,
            c,
            provenance,
        })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn c(&self) -> &Vector {
        &self.c
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn num_vars(&self) -> usize {
        self.a.cols()
    }

    pub fn num_constraints(&self) -> usize {
        self.a.rows()
    }

    /// True in the regular case `p < n`; false for square systems whose
    /// feasible set is a single point.
    pub fn underdetermined(&self) -> bool {
        self.a.rows() < self.a.cols()
    }

    /// `‖Ax − b‖∞`.
    pub fn residual_inf(&self, x: &Vector) -> Result<f64, ModelError> {
        Ok(self.a.matvec(x)?.sub(&self.b)?.norm_inf())
    }
}

/// Converts a user-facing problem to standard form: maximization is negated,
/// `≤` rows gain a slack column (+1), `≥` rows a surplus column (−1), free
/// variables are split into nonnegative pairs. Original variables come
/// first (split pairs adjacent), then slack/surplus columns in constraint
/// order.
pub fn to_standard_form(p: &LpProblem) -> Result<StandardLp, ModelError> {
    p.validate()?;
    let n_orig = p.num_vars();

    let mut var_map = Vec::with_capacity(n_orig);
    let mut col = 0;
    for &nn in &p.nonneg {
        if nn {
            var_map.push(VarOrigin::Direct { column: col });
            col += 1;
        } else {
            var_map.push(VarOrigin::Split {
                plus: col,
                minus: col + 1,
            });
            col += 2;
        }
    }
    let n_struct = col;
    let n_slack = p
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();
    let n_std = n_struct + n_slack;
    let p_rows = p.constraints.len();

    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut c_std = vec![0.0; n_std];
    for (orig, origin) in var_map.iter().enumerate() {
        let coeff = sign * p.objective[orig];
        match origin {
            VarOrigin::Direct { column } => c_std[*column] = coeff,
            VarOrigin::Split { plus, minus } => {
                c_std[*plus] = coeff;
                c_std[*minus] = -coeff;
            }
        }
    }

    let mut a = DenseMatrix::zeros(p_rows, n_std);
    let mut b = Vec::with_capacity(p_rows);
    let mut slack_col = n_struct;
    for (row, cons) in p.constraints.iter().enumerate() {
        for (orig, origin) in var_map.iter().enumerate() {
            let v = cons.coeffs[orig];
            match origin {
                VarOrigin::Direct { column } => a.set(row, *column, v),
                VarOrigin::Split { plus, minus } => {
                    a.set(row, *plus, v);
                    a.set(row, *minus, -v);
                }
            }
        }
        match cons.relation {
            Relation::Le => {
                a.set(row, slack_col, 1.0);
                slack_col += 1;
            }
            Relation::Ge => {
                a.set(row, slack_col, -1.0);
                slack_col += 1;
            }
            Relation::Eq => {}
        }
        b.push(cons.rhs);
    }

    let provenance = Provenance {
        var_map,
        num_std_vars: n_std,
        negated_objective: p.sense == Sense::Maximize,
        objective_offset: p.objective_offset,
    };
    StandardLp::new(a, Vector::new(b)?, Vector::new(c_std)?, provenance)
}

/// Embeds a feasible original-space point into the standard-form layout
/// produced by [`to_standard_form`]: split variables become
/// `(max(x,0), max(−x,0))` and slack/surplus columns take up each
/// inequality's residual. The result satisfies `Ax = b`; it is nonnegative
/// exactly when `x` was feasible.
pub fn embed_feasible_point(p: &LpProblem, x: &Vector) -> Result<Vector, ModelError> {
    p.validate()?;
    if x.len() != p.num_vars() {
        return Err(ModelError::DimensionMismatch {
            expected: p.num_vars(),
            got: x.len(),
        });
    }
    let mut out = Vec::new();
    for (i, &nn) in p.nonneg.iter().enumerate() {
        if nn {
            out.push(x[i]);
        } else {
            out.push(x[i].max(0.0));
            out.push((-x[i]).max(0.0));
        }
    }
    for c in &p.constraints {
        let lhs = c.coeffs.dot(x);
        match c.relation {
            Relation::Le => out.push(c.rhs - lhs),
            Relation::Ge => out.push(lhs - c.rhs),
            Relation::Eq => {}
        }
    }
    Vector::new(out)
}

/// Maps a standard-form point back to original variables: split pairs are
/// recombined as `x⁺ − x⁻`, slack columns are dropped.
pub fn recover_original(x_std: &Vector, provenance: &Provenance) -> Result<Vector, ModelError> {
    if x_std.len() != provenance.num_std_vars {
        return Err(ModelError::DimensionMismatch {
            expected: provenance.num_std_vars,
            got: x_std.len(),
        });
    }
    let mut out = Vec::with_capacity(provenance.var_map.len());
    for origin in &provenance.var_map {
        match origin {
            VarOrigin::Direct { column } => out.push(x_std[*column]),
            VarOrigin::Split { plus, minus } => out.push(x_std[*plus] - x_std[*minus]),
        }
    }
    Vector::new(out)
}
