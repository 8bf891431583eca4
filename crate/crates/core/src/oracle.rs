//! Independent dense reference solvers: Gaussian elimination with partial
//! pivoting, least squares via normal equations and a symmetric
//! factorization, and brute-force LP vertex enumeration. These deliberately
//! use different algorithms than the message-passing path so that agreement
//! between the two is evidence rather than tautology.

use thiserror::Error;

use crate::model::{Constraint, DenseMatrix, LpProblem, ModelError, Relation, Sense, Vector};

/// Relative pivot threshold below which `dense_solve` declares singularity.
pub const SOLVE_PIVOT_TOL: f64 = 1e-12;

/// Feasibility slack used when classifying candidate vertices.
pub const VERTEX_FEAS_TOL: f64 = 1e-9;

/// Combinatorial guard: refuse enumeration when the standardized problem
/// would have more variables than this.
pub const VERTEX_MAX_STD_VARS: usize = 15;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("matrix is numerically singular at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("normal equations are rank deficient at pivot {pivot}")]
    RankDeficient { pivot: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error(
        "problem too large for vertex enumeration: {std_vars} standardized variables (max {max})"
    )]
    TooLarge { std_vars: usize, max: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Solves `Ax = b` by Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &DenseMatrix, b: &Vector) -> Result<Vector, OracleError> {
    if a.rows() != a.cols() {
        return Err(OracleError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if b.len() != n {
        return Err(OracleError::Model(ModelError::DimensionMismatch {
            expected: n,
            got: b.len(),
        }));
    }
    let mut m = a.clone();
    let mut rhs: Vec<f64> = b.as_slice().to_vec();
    let scale = m.max_abs().max(1e-300);

    for col in 0..n {
        let mut best = col;
        for r in col + 1..n {
            if m.get(r, col).abs() > m.get(best, col).abs() {
                best = r;
            }
        }
        if m.get(best, col).abs() <= SOLVE_PIVOT_TOL * scale {
            return Err(OracleError::Singular { pivot: col });
        }
        if best != col {
            for c in 0..n {
                let tmp = m.get(col, c);
                m.set(col, c, m.get(best, c));
                m.set(best, c, tmp);
            }
            rhs.swap(col, best);
        }
        let pivot = m.get(col, col);
        for r in col + 1..n {
            let factor = m.get(r, col) / pivot;
            if factor != 0.0 {
                for c in col..n {
                    let v = m.get(r, c) - factor * m.get(col, c);
                    m.set(r, c, v);
                }
                rhs[r] -= factor * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for c in row + 1..n {
            s -= m.get(row, c) * x[c];
        }
        x[row] = s / m.get(row, row);
    }
    Ok(Vector::new(x)?)
}

/// Cholesky factor `L` (lower triangular, `M = LLᵀ`) of a symmetric positive
/// definite matrix. Fails when a pivot drops below `SOLVE_PIVOT_TOL` times
/// the largest diagonal entry.
pub(crate) fn cholesky(m: &DenseMatrix) -> Result<DenseMatrix, OracleError> {
    let n = m.rows();
    let mut l = DenseMatrix::zeros(n, n);
    let scale = (0..n).fold(0.0_f64, |acc, i| acc.max(m.get(i, i).abs())).max(1e-300);
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= SOLVE_PIVOT_TOL * scale {
                    return Err(OracleError::RankDeficient { pivot: i });
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

pub(crate) fn cholesky_solve(l: &DenseMatrix, b: &Vector) -> Vector {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    Vector::new(x).expect("finite solve")
}

/// Least squares `min ‖Fy − g‖₂` via the normal equations `FᵀFy = Fᵀg`
/// solved with a Cholesky factorization. Requires full column rank.
pub fn dense_least_squares(f: &DenseMatrix, g: &Vector) -> Result<Vector, OracleError> {
    if g.len() != f.rows() {
        return Err(OracleError::Model(ModelError::DimensionMismatch {
            expected: f.rows(),
            got: g.len(),
        }));
    }
    let gram = f.gram();
    let rhs = f.t_matvec(g)?;
    let l = cholesky(&gram)?;
    Ok(cholesky_solve(&l, &rhs))
}

/// Outcome of brute-force vertex enumeration.
#[derive(Debug, Clone, PartialEq)]
pub enum VertexEnumeration {
    Optimal {
        objective: f64,
        /// All feasible basic points attaining the optimum within
        /// `VERTEX_FEAS_TOL`, deduplicated, in deterministic order.
        optima: Vec<Vector>,
    },
    /// No feasible basic point exists. For pointed feasible regions (all
    /// variables nonnegative) this is equivalent to infeasibility.
    Infeasible,
}

fn standardized_var_count(p: &LpProblem) -> usize {
    let split: usize = p.nonneg.iter().map(|&nn| if nn { 1 } else { 2 }).sum();
    let slacks = p
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();
    split + slacks
}

/// Enumerates all intersections of `num_vars` constraint boundaries (the
/// constraints as equalities plus `x_i = 0` for nonnegative variables),
/// keeps the feasible ones and returns the best objective with its argmax
/// set. Ground-truth oracle for small problems; assumes the optimum, if
/// any, is attained at such a point (true for bounded problems with all
/// variables nonnegative).
pub fn vertex_enumerate(p: &LpProblem) -> Result<VertexEnumeration, OracleError> {
    p.validate()?;
    let std_vars = standardized_var_count(p);
    if std_vars > VERTEX_MAX_STD_VARS {
        return Err(OracleError::TooLarge {
            std_vars,
            max: VERTEX_MAX_STD_VARS,
        });
    }
    let v = p.num_vars();

    // Hyperplane list: constraints first, then axis planes for nonnegative
    // variables.
    let mut planes: Vec<(Vec<f64>, f64)> = p
        .constraints
        .iter()
        .map(|c| (c.coeffs.as_slice().to_vec(), c.rhs))
        .collect();
    for (i, &nn) in p.nonneg.iter().enumerate() {
        if nn {
            let mut row = vec![0.0; v];
            row[i] = 1.0;
            planes.push((row, 0.0));
        }
    }
    if planes.len() < v {
        return Ok(VertexEnumeration::Infeasible);
    }

    let mut best: Option<f64> = None;
    let mut optima: Vec<Vector> = Vec::new();
    let mut combo: Vec<usize> = (0..v).collect();

    loop {
        if let Some(x) = intersect(&planes, &combo, v) {
            if is_feasible(p, &x) {
                let value = p.objective_value(&x);
                let improved = match (p.sense, best) {
                    (_, None) => true,
                    (Sense::Minimize, Some(b)) => value < b - VERTEX_FEAS_TOL,
                    (Sense::Maximize, Some(b)) => value > b + VERTEX_FEAS_TOL,
                };
                let ties = best.is_some_and(|b| (value - b).abs() <= VERTEX_FEAS_TOL);
                if improved {
                    best = Some(value);
                    optima.clear();
                    optima.push(x);
                } else if ties && !optima.iter().any(|o| close(o, &x)) {
                    optima.push(x);
                }
            }
        }
        if !next_combination(&mut combo, planes.len(), v) {
            break;
        }
    }

    match best {
        Some(objective) => Ok(VertexEnumeration::Optimal { objective, optima }),
        None => Ok(VertexEnumeration::Infeasible),
    }
}

fn close(a: &Vector, b: &Vector) -> bool {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .all(|(x, y)| (x - y).abs() <= 1e-7)
}

fn intersect(planes: &[(Vec<f64>, f64)], combo: &[usize], v: usize) -> Option<Vector> {
    let mut entries = Vec::with_capacity(v * v);
    let mut rhs = Vec::with_capacity(v);
    for &idx in combo {
        entries.extend_from_slice(&planes[idx].0);
        rhs.push(planes[idx].1);
    }
    let m = DenseMatrix::new(v, v, entries).ok()?;
    let b = Vector::new(rhs).ok()?;
    dense_solve(&m, &b).ok()
}

fn is_feasible(p: &LpProblem, x: &Vector) -> bool {
    for (i, &nn) in p.nonneg.iter().enumerate() {
        if nn && x[i] < -VERTEX_FEAS_TOL {
            return false;
        }
    }
    for c in &p.constraints {
        let lhs = c.coeffs.dot(x);
        let slack = VERTEX_FEAS_TOL * (1.0 + c.rhs.abs());
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs + slack,
            Relation::Ge => lhs >= c.rhs - slack,
            Relation::Eq => (lhs - c.rhs).abs() <= slack,
        };
        if !ok {
            return false;
        }
    }
    true
}

fn next_combination(combo: &mut [usize], total: usize, k: usize) -> bool {
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < total - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Convenience: a standard-form problem viewed as an `LpProblem` (equality
/// constraints, all variables nonnegative), for cross-checking conversions
/// against the enumeration oracle.
pub fn standard_as_problem(std: &crate::model::StandardLp) -> LpProblem {
    let n = std.num_vars();
    LpProblem {
        names: (0..n).map(|i| format!("s{i}")).collect(),
        sense: Sense::Minimize,
        objective: std.c().clone(),
        objective_offset: 0.0,
        constraints: (0..std.num_constraints())
            .map(|r| Constraint {
                coeffs: Vector::from_slice(std.a().row(r)),
                relation: Relation::Eq,
                rhs: std.b()[r],
            })
            .collect(),
        nonneg: vec![true; n],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::build_toy_problem;

    #[test]
    fn solve_identity_and_symmetric() {
        let i = DenseMatrix::identity(3);
        let b = Vector::from_slice(&[1.0, 2.0, 3.0]);
        assert_eq!(dense_solve(&i, &b).unwrap(), b);

        let a = DenseMatrix::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let x = dense_solve(&a, &Vector::from_slice(&[3.0, 3.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_requires_pivoting() {
        let a = DenseMatrix::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let x = dense_solve(&a, &Vector::from_slice(&[1.0, 2.0])).unwrap();
        assert_eq!(x.as_slice(), &[2.0, 1.0]);
    }

    #[test]
    fn solve_flags_singular() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(
            dense_solve(&a, &Vector::from_slice(&[1.0, 2.0])),
            Err(OracleError::Singular { .. })
        ));
    }

    #[test]
    fn solve_residual_small_on_random_systems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [3usize, 8, 20] {
            let a = DenseMatrix::from_fn(n, n, |i, j| {
                let base: f64 = rng.random_range(-1.0..1.0);
                if i == j {
                    base + 4.0
                } else {
                    base
                }
            });
            let b = Vector::new((0..n).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
            let x = dense_solve(&a, &b).unwrap();
            let resid = a.matvec(&x).unwrap().sub(&b).unwrap().norm_inf();
            assert!(resid <= 1e-10 * a.max_abs() * x.norm_inf().max(1.0));
        }
    }

    #[test]
    fn least_squares_identity_and_column() {
        let f = DenseMatrix::identity(3);
        let g = Vector::from_slice(&[1.0, 2.0, 3.0]);
        assert_eq!(dense_least_squares(&f, &g).unwrap(), g);

        let f = DenseMatrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        let y = dense_least_squares(&f, &Vector::from_slice(&[1.0, 3.0])).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn least_squares_optimality_condition() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f = DenseMatrix::from_fn(20, 6, |_, _| rng.random_range(-1.0..1.0));
        let g = Vector::new((0..20).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        let y = dense_least_squares(&f, &g).unwrap();
        // Fᵀ(Fy − g) = 0 at the minimizer.
        let resid = f.matvec(&y).unwrap().sub(&g).unwrap();
        let grad = f.t_matvec(&resid).unwrap();
        assert!(grad.norm_inf() < 1e-9);
    }

    #[test]
    fn least_squares_flags_rank_deficiency() {
        let f = DenseMatrix::new(3, 2, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0]).unwrap();
        assert!(matches!(
            dense_least_squares(&f, &Vector::from_slice(&[1.0, 2.0, 3.0])),
            Err(OracleError::RankDeficient { .. })
        ));
    }

    #[test]
    fn toy_problem_optimum() {
        let result = vertex_enumerate(&build_toy_problem()).unwrap();
        let VertexEnumeration::Optimal { objective, optima } = result else {
            panic!("toy problem is feasible");
        };
        assert!((objective - 1.25).abs() < 1e-9);
        // The optimal edge lies on the p = 0.5 constraint; both end vertices
        // are reported.
        let expect = [[0.45, 0.80], [0.55, 0.70]];
        for e in expect {
            assert!(
                optima
                    .iter()
                    .any(|v| (v[0] - e[0]).abs() < 1e-9 && (v[1] - e[1]).abs() < 1e-9),
                "missing vertex {e:?} in {optima:?}"
            );
        }
    }

    #[test]
    fn single_equality_problem() {
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
        let VertexEnumeration::Optimal { objective, .. } = vertex_enumerate(&p).unwrap() else {
            panic!("feasible");
        };
        assert!((objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_problem_detected() {
        let p = LpProblem {
            names: vec!["x".into()],
            sense: Sense::Maximize,
            objective: Vector::from_slice(&[1.0]),
            objective_offset: 0.0,
            constraints: vec![Constraint {
                coeffs: Vector::from_slice(&[1.0]),
                relation: Relation::Le,
                rhs: -1.0,
            }],
            nonneg: vec![true],
        };
        assert_eq!(vertex_enumerate(&p).unwrap(), VertexEnumeration::Infeasible);
    }

    #[test]
    fn enumeration_is_order_independent() {
        let mut p = build_toy_problem();
        let VertexEnumeration::Optimal {
            objective: o1,
            optima: v1,
        } = vertex_enumerate(&p).unwrap()
        else {
            panic!()
        };
        p.constraints.reverse();
        let VertexEnumeration::Optimal {
            objective: o2,
            optima: v2,
        } = vertex_enumerate(&p).unwrap()
        else {
            panic!()
        };
        assert!((o1 - o2).abs() < 1e-12);
        assert_eq!(v1.len(), v2.len());
        for v in &v1 {
            assert!(v2.iter().any(|w| close(v, w)));
        }
    }

    #[test]
    fn size_guard() {
        let n = 20;
        let p = LpProblem {
            names: (0..n).map(|i| format!("x{i}")).collect(),
            sense: Sense::Minimize,
            objective: Vector::ones(n),
            objective_offset: 0.0,
            constraints: vec![Constraint {
                coeffs: Vector::ones(n),
                relation: Relation::Eq,
                rhs: 1.0,
            }],
            nonneg: vec![true; n],
        };
        assert!(matches!(
            vertex_enumerate(&p),
            Err(OracleError::TooLarge { .. })
        ));
    }
}
