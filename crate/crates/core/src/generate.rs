//! Seeded instance generators backing the cross-check command, the
//! benchmarks and the test suites: strictly diagonally dominant symmetric
//! systems, and inequality-form LPs that are feasible and bounded by
//! construction.

use rand::Rng;

use crate::model::{Constraint, LpProblem, Relation, Sense, SparseSymMatrix, Vector};

/// Random strictly diagonally dominant symmetric system. Each off-diagonal
/// pair is present with probability `density`; values are positive when
/// `nonneg_offdiag` is set, otherwise sign-mixed. Diagonals exceed the
/// absolute row sums by a randomized margin, so every instance satisfies
/// the strict-dominance convergence condition.
pub fn dominant_system(
    rng: &mut impl Rng,
    n: usize,
    density: f64,
    nonneg_offdiag: bool,
) -> (SparseSymMatrix, Vector) {
    assert!(n >= 1);
    let mut triplets = Vec::new();
    let mut row_abs = vec![0.0_f64; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_range(0.0..1.0) < density {
                let v: f64 = if nonneg_offdiag {
                    rng.random_range(0.05..1.0)
                } else {
                    let mag: f64 = rng.random_range(0.05..1.0);
                    if rng.random_bool(0.5) {
                        mag
                    } else {
                        -mag
                    }
                };
                triplets.push((i, j, v));
                row_abs[i] += v.abs();
                row_abs[j] += v.abs();
            }
        }
    }
    for (i, &sum) in row_abs.iter().enumerate() {
        let slack: f64 = rng.random_range(0.05..0.5);
        let base: f64 = rng.random_range(0.1..0.5);
        triplets.push((i, i, sum * (1.0 + slack) + base));
    }
    let a = SparseSymMatrix::from_triplets(n, triplets).expect("valid triplets");
    let b = Vector::new((0..n).map(|_| rng.random_range(-5.0..5.0)).collect()).expect("finite");
    (a, b)
}

/// Random inequality-form LP `max cᵀx s.t. Ax ≤ b, x ≥ 0` that is strictly
/// feasible (the returned point satisfies every row with positive margin)
/// and bounded (`c > 0`, all constraint coefficients nonnegative, and the
/// first row caps `Σ x`). Suitable for the vertex-enumeration oracle when
/// `nvars + ncons` stays small.
pub fn feasible_inequality_lp(
    rng: &mut impl Rng,
    nvars: usize,
    ncons: usize,
) -> (LpProblem, Vector) {
    assert!(nvars >= 1 && ncons >= 1);
    let interior =
        Vector::new((0..nvars).map(|_| rng.random_range(0.5..2.0)).collect()).expect("finite");
    let mut constraints = Vec::with_capacity(ncons);
    for row in 0..ncons {
        let coeffs: Vec<f64> = if row == 0 {
            vec![1.0; nvars]
        } else {
            (0..nvars)
                .map(|_| {
                    if rng.random_bool(0.75) {
                        rng.random_range(0.1..1.5)
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let coeffs = Vector::new(coeffs).expect("finite");
        let margin: f64 = rng.random_range(0.2..1.0);
        let rhs = coeffs.dot(&interior) + margin;
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Le,
            rhs,
        });
    }
    let problem = LpProblem {
        names: (0..nvars).map(|i| format!("x{}", i + 1)).collect(),
        sense: Sense::Maximize,
        objective: Vector::new((0..nvars).map(|_| rng.random_range(0.2..1.0)).collect())
            .expect("finite"),
        objective_offset: 0.0,
        constraints,
        nonneg: vec![true; nvars],
    };
    (problem, interior)
}

/// Inequality-form LP whose standard-form normal matrix `AX²Aᵀ` stays
/// strictly diagonally dominant along the central path: one box-like row
/// per variable with a small off-diagonal coupling to the next variable.
/// On these the message-passing solver converges at every Newton step, so
/// they exercise the end-to-end iterative path rather than the fallback.
pub fn dominant_friendly_lp(rng: &mut impl Rng, nvars: usize) -> (LpProblem, Vector) {
    assert!(nvars >= 2);
    let interior =
        Vector::new((0..nvars).map(|_| rng.random_range(0.3..0.7)).collect()).expect("finite");
    let coupling = 0.1;
    let mut constraints = Vec::with_capacity(nvars);
    for i in 0..nvars {
        let mut coeffs = vec![0.0; nvars];
        coeffs[i] = 1.0;
        coeffs[(i + 1) % nvars] = coupling;
        let coeffs = Vector::new(coeffs).expect("finite");
        let rhs = coeffs.dot(&interior) + rng.random_range(0.3..0.8);
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Le,
            rhs,
        });
    }
    let problem = LpProblem {
        names: (0..nvars).map(|i| format!("x{}", i + 1)).collect(),
        sense: Sense::Maximize,
        objective: Vector::new((0..nvars).map(|_| rng.random_range(0.3..1.0)).collect())
            .expect("finite"),
        objective_offset: 0.0,
        constraints,
        nonneg: vec![true; nvars],
    };
    (problem, interior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::is_diagonally_dominant;
    use rand::SeedableRng;

    #[test]
    fn dominant_systems_are_dominant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 2, 7, 25] {
            for nonneg in [false, true] {
                let (a, b) = dominant_system(&mut rng, n, 0.4, nonneg);
                assert!(is_diagonally_dominant(&a));
                assert_eq!(b.len(), n);
                if nonneg {
                    for i in 0..n {
                        assert!(a.neighbors(i).iter().all(|&(_, v)| v > 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn generated_lps_are_strictly_feasible() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (p, interior) = feasible_inequality_lp(&mut rng, 4, 5);
            p.validate().unwrap();
            for c in &p.constraints {
                assert!(c.coeffs.dot(&interior) < c.rhs);
            }
        }
    }

    #[test]
    fn dominant_friendly_lps_are_feasible_and_gabp_solvable() {
        use crate::barrier::{barrier_solve, BarrierConfig, LinSolve};
        use crate::model::to_standard_form;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let (p, interior) = dominant_friendly_lp(&mut rng, 6);
            for c in &p.constraints {
                assert!(c.coeffs.dot(&interior) < c.rhs);
            }
            let std = to_standard_form(&p).unwrap();
            let sol =
                barrier_solve(&std, None, &BarrierConfig::with_linsolve(LinSolve::GabpNormal))
                    .unwrap();
            let powered = sol
                .trace
                .records
                .iter()
                .filter(|r| r.step > 0.0 && r.gabp_converged && r.gabp_rounds > 0)
                .count();
            let total = sol.trace.records.iter().filter(|r| r.step > 0.0).count();
            // The whole point of this family: message passing carries most
            // of the steps.
            assert!(
                powered * 2 >= total,
                "only {powered}/{total} steps used message passing"
            );
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let (m1, v1) = dominant_system(&mut a, 12, 0.5, false);
        let (m2, v2) = dominant_system(&mut b, 12, 0.5, false);
        assert_eq!(m1, m2);
        assert_eq!(v1, v2);
    }
}
