//! Property tests for the crate-wide invariants: standard-form round trips,
//! message-passing determinism and locality, rate-parameter bounds, and the
//! text-format identities.

use proptest::prelude::*;
use rand::SeedableRng;

use gabp_lp::barrier::{IterateTrace, TraceRecord};
use gabp_lp::convergence::{dominance_gaps, gamma, gamma_local, spectral_condition};
use gabp_lp::gabp::{gabp_init, gabp_round, gabp_solve};
use gabp_lp::generate::{dominant_system, feasible_inequality_lp};
use gabp_lp::io::{emit_lp, parse_lp, read_trace, write_trace};
use gabp_lp::model::{
    embed_feasible_point, recover_original, to_standard_form, Constraint, LpProblem, Relation,
    Sense, Vector,
};
use gabp_lp::oracle::dense_solve;

fn rng_from(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    /// Any feasible original point embeds into a nonnegative standard-form
    /// point satisfying Ax = b, maps back to itself, and keeps the
    /// objective value up to the sense flip.
    #[test]
    fn standard_form_round_trip(seed in 0u64..500) {
        let mut rng = rng_from(seed);
        let (p, interior) = feasible_inequality_lp(&mut rng, 4, 3);
        let std = to_standard_form(&p).unwrap();
        let x_std = embed_feasible_point(&p, &interior).unwrap();
        prop_assert!(x_std.iter().all(|&v| v >= 0.0));
        prop_assert!(std.residual_inf(&x_std).unwrap() <= 1e-9 * (1.0 + std.b().norm_inf()));
        let back = recover_original(&x_std, std.provenance()).unwrap();
        for i in 0..interior.len() {
            prop_assert!((back[i] - interior[i]).abs() <= 1e-12);
        }
        // |objective| preserved, sign flipped exactly for maximization.
        let std_obj = std.c().dot(&x_std);
        let orig_obj = p.objective_value(&interior);
        prop_assert!((std.provenance().original_objective(std_obj) - orig_obj).abs()
            <= 1e-9 * (1.0 + orig_obj.abs()));
    }

    /// A split free variable also survives the round trip.
    #[test]
    fn free_variable_round_trip(v in -3.0f64..3.0) {
        let p = LpProblem {
            names: vec!["x".into()],
            sense: Sense::Minimize,
            objective: Vector::from_slice(&[1.0]),
            objective_offset: 0.0,
            constraints: vec![Constraint {
                coeffs: Vector::from_slice(&[1.0]),
                relation: Relation::Le,
                rhs: 5.0,
            }],
            nonneg: vec![false],
        };
        let std = to_standard_form(&p).unwrap();
        let x_std = embed_feasible_point(&p, &Vector::from_slice(&[v])).unwrap();
        let back = recover_original(&x_std, std.provenance()).unwrap();
        prop_assert!((back[0] - v).abs() <= 1e-12);
    }

    /// Two runs on identical inputs produce bit-identical results, and each
    /// round performs exactly one update per directed edge while reading
    /// only messages incident to each node.
    #[test]
    fn gabp_determinism_and_locality(seed in 0u64..300) {
        let mut rng = rng_from(seed);
        let n = 2 + (seed % 20) as usize;
        let (a, b) = dominant_system(&mut rng, n, 0.4, false);
        let r1 = gabp_solve(&a, &b, 1e-10, 2000).unwrap();
        let r2 = gabp_solve(&a, &b, 1e-10, 2000).unwrap();
        prop_assert_eq!(r1.rounds, r2.rounds);
        for i in 0..n {
            prop_assert_eq!(r1.means[i].to_bits(), r2.means[i].to_bits());
            prop_assert_eq!(r1.precisions[i].to_bits(), r2.precisions[i].to_bits());
        }

        let directed_edges = 2 * a.nnz_off_diagonal() as u64;
        let s0 = gabp_init(&a, &b).unwrap();
        let s1 = gabp_round(&s0).unwrap();
        let s2 = gabp_round(&s1).unwrap();
        prop_assert_eq!(s1.message_updates(), directed_edges);
        prop_assert_eq!(s2.message_updates(), 2 * directed_edges);
        let expected_reads: u64 = (0..n)
            .map(|i| {
                let d = a.degree(i) as u64;
                d * d.saturating_sub(1)
            })
            .sum();
        prop_assert_eq!(s2.message_reads() - s1.message_reads(), expected_reads);
    }

    /// Converged runs on dominant systems solve the system: the residual is
    /// bounded by the message tolerance, and the means match elimination.
    #[test]
    fn gabp_exactness_on_convergence(seed in 0u64..200) {
        let mut rng = rng_from(seed);
        let n = 2 + (seed % 25) as usize;
        let (a, b) = dominant_system(&mut rng, n, 0.5, false);
        let tol = 1e-11;
        let r = gabp_solve(&a, &b, tol, 20_000).unwrap();
        prop_assert!(r.converged);
        let resid = a.matvec(&r.means).unwrap().sub(&b).unwrap().norm_inf();
        prop_assert!(resid <= 10.0 * tol * b.norm_inf().max(1.0) + 1e-12);
        let x = dense_solve(&a.to_dense(), &b).unwrap();
        let err = r.means.sub(&x).unwrap().norm_inf();
        prop_assert!(err <= 1e-6 * x.norm_inf().max(1e-12));
    }

    /// γ < 1 for every strictly dominant matrix with at least one edge, and
    /// the node-local computation reproduces it exactly.
    #[test]
    fn gamma_below_one_and_local_consistency(seed in 0u64..300) {
        let mut rng = rng_from(seed);
        let n = 2 + (seed % 48) as usize;
        let (a, _) = dominant_system(&mut rng, n, 0.3, false);
        prop_assert!(dominance_gaps(&a).iter().all(|&g| g > 0.0));
        let g = gamma(&a).unwrap();
        if a.nnz_off_diagonal() > 0 {
            prop_assert!(g < 1.0);
            prop_assert!(g > 0.0);
        } else {
            prop_assert_eq!(g, 0.0);
        }
        let local = (0..n).map(|i| gamma_local(&a, i)).fold(0.0, f64::max);
        prop_assert_eq!(local, g);
    }

    /// The spectral estimate is invariant under symmetric permutation.
    #[test]
    fn spectral_permutation_invariance(seed in 0u64..100) {
        let mut rng = rng_from(seed);
        let n = 3 + (seed % 10) as usize;
        let (a, _) = dominant_system(&mut rng, n, 0.5, false);
        let (rho, _) = spectral_condition(&a).unwrap();
        // Rotate indices by one.
        let permuted: Vec<(usize, usize, f64)> = a
            .entries()
            .iter()
            .map(|&(i, j, v)| {
                let (pi, pj) = ((i + 1) % n, (j + 1) % n);
                (pi.min(pj), pi.max(pj), v)
            })
            .collect();
        let p = gabp_lp::model::SparseSymMatrix::from_triplets(n, permuted).unwrap();
        let (rho_p, _) = spectral_condition(&p).unwrap();
        prop_assert!((rho - rho_p).abs() <= 1e-8 * (1.0 + rho));
    }

    /// parse ∘ emit is the identity on generator-produced problems.
    #[test]
    fn lp_text_round_trip(seed in 0u64..500) {
        let mut rng = rng_from(seed);
        let nvars = 1 + (seed % 5) as usize;
        let ncons = 1 + (seed % 4) as usize;
        let (mut p, _) = feasible_inequality_lp(&mut rng, nvars.max(1), ncons);
        // Exercise relations, free variables and offsets too.
        if seed % 3 == 0 && p.constraints.len() > 1 {
            p.constraints[1].relation = Relation::Ge;
            p.constraints[1].rhs = -p.constraints[1].rhs;
        }
        if seed % 4 == 0 {
            p.nonneg[0] = false;
        }
        if seed % 5 == 0 {
            p.objective_offset = 2.5;
        }
        let text = emit_lp(&p);
        let back = parse_lp(&text).unwrap();
        prop_assert_eq!(p, back);
    }

    /// write ∘ read is the identity on traces, bit for bit.
    #[test]
    fn trace_round_trip(
        obj in -1e12f64..1e12,
        mu in 0.0f64..10.0,
        lambda2 in 0.0f64..1e6,
        step in 0.0f64..1.0,
        xs in proptest::collection::vec(-1e9f64..1e9, 0..6),
        rounds in 0usize..100,
        converged in any::<bool>(),
    ) {
        let record = TraceRecord {
            iter: 3,
            newton: 1,
            x: Vector::new(xs).unwrap(),
            obj,
            mu,
            lambda2,
            step,
            gabp_rounds: rounds,
            gabp_converged: converged,
        };
        let trace = IterateTrace { records: vec![record.clone()] };
        let back = read_trace(&write_trace(&trace)).unwrap();
        prop_assert_eq!(back.records.len(), 1);
        let r = &back.records[0];
        prop_assert_eq!(r.obj.to_bits(), record.obj.to_bits());
        prop_assert_eq!(r.mu.to_bits(), record.mu.to_bits());
        prop_assert_eq!(r.lambda2.to_bits(), record.lambda2.to_bits());
        prop_assert_eq!(r.step.to_bits(), record.step.to_bits());
        prop_assert_eq!(&r.x, &record.x);
    }

    /// The parser never panics; arbitrary input yields Ok or a positioned
    /// error.
    #[test]
    fn parser_total_on_arbitrary_text(text in "\\PC*") {
        let _ = parse_lp(&text);
    }

    /// Same, biased towards almost-valid problem text.
    #[test]
    fn parser_total_on_near_grammar(tail in "[a-z0-9+<=>.# _-]{0,40}") {
        let _ = parse_lp(&format!("min x\nst x {tail}\n"));
        let _ = parse_lp(&format!("max {tail}"));
    }
}
