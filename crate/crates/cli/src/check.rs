//! Cross-check harness: solve each instance with the message-passing and
//! dense linear solvers under both interior-point methods, compare against
//! vertex enumeration when the size guard permits, and replay the trace to
//! compare per-step Newton directions between the two linear solvers.

use gabp_lp::barrier::{self, BarrierConfig, LinSolve};
use gabp_lp::model::{to_standard_form, LpProblem};
use gabp_lp::oracle::{self, OracleError, VertexEnumeration};
use gabp_lp::primaldual::{pd_solve, PdConfig, PdLinSolve};

use crate::fmt::sig17;

/// Agreement threshold for both objective and direction discrepancies.
pub const CHECK_TOL: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub label: String,
    /// Worst pairwise objective disagreement across solver/mode/oracle.
    pub objective_discrepancy: f64,
    /// Worst per-step relative direction disagreement on replayed iterates
    /// where the message passing converged (0 when it never did).
    pub direction_discrepancy: f64,
    /// Newton steps on which the message-passing solve converged.
    pub gabp_steps: usize,
    pub total_steps: usize,
}

/// Renders the per-instance lines plus the summary and returns the verdict.
pub fn render_report(outcomes: &[CheckOutcome]) -> (String, bool) {
    let mut out = String::new();
    let mut max_obj = 0.0_f64;
    let mut max_dir = 0.0_f64;
    for o in outcomes {
        max_obj = max_obj.max(o.objective_discrepancy);
        max_dir = max_dir.max(o.direction_discrepancy);
        out.push_str(&format!(
            "{} obj_discrepancy {} dir_discrepancy {} gabp_steps {}/{}\n",
            o.label,
            sig17(o.objective_discrepancy),
            sig17(o.direction_discrepancy),
            o.gabp_steps,
            o.total_steps,
        ));
    }
    out.push_str(&format!("max_obj_discrepancy {}\n", sig17(max_obj)));
    out.push_str(&format!("max_dir_discrepancy {}\n", sig17(max_dir)));
    let ok = max_obj <= CHECK_TOL && max_dir <= CHECK_TOL;
    out.push_str(if ok { "verdict ok\n" } else { "verdict discrepancy\n" });
    (out, ok)
}

/// Runs the full cross-check on one problem.
pub fn check_instance(label: &str, problem: &LpProblem) -> Result<CheckOutcome, String> {
    let std = to_standard_form(problem).map_err(|e| format!("standardize: {e}"))?;
    let gabp_cfg = BarrierConfig::with_linsolve(LinSolve::GabpNormal);
    let dense_cfg = BarrierConfig::with_linsolve(LinSolve::DenseOracle);

    let barrier_gabp =
        barrier::barrier_solve(&std, None, &gabp_cfg).map_err(|e| format!("solve: {e}"))?;
    let barrier_dense =
        barrier::barrier_solve(&std, None, &dense_cfg).map_err(|e| format!("solve: {e}"))?;
    let pd_gabp = pd_solve(&std, None, &PdConfig::with_linsolve(PdLinSolve::ExplicitGabp))
        .map_err(|e| format!("solve: {e}"))?;
    let pd_dense = pd_solve(&std, None, &PdConfig::with_linsolve(PdLinSolve::DenseOracle))
        .map_err(|e| format!("solve: {e}"))?;

    let prov = std.provenance();
    let mut objectives = vec![
        prov.original_objective(barrier_gabp.objective),
        prov.original_objective(barrier_dense.objective),
        prov.original_objective(pd_gabp.objective),
        prov.original_objective(pd_dense.objective),
    ];
    match oracle::vertex_enumerate(problem) {
        Ok(VertexEnumeration::Optimal { objective, .. }) => objectives.push(objective),
        Ok(VertexEnumeration::Infeasible) => {
            return Err("solve: oracle reports infeasible".into())
        }
        Err(OracleError::TooLarge { .. }) => {} // size guard: skip the oracle
        Err(e) => return Err(format!("solve: {e}")),
    }
    let lo = objectives.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = objectives.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // Replay the trace: recompute each barrier direction under both linear
    // solvers at the recorded iterate and compare where GaBP converged.
    let mut max_dir = 0.0_f64;
    let mut gabp_steps = 0usize;
    let mut total_steps = 0usize;
    for rec in &barrier_gabp.trace.records {
        if rec.step == 0.0 || rec.mu <= 0.0 {
            continue;
        }
        total_steps += 1;
        if !rec.gabp_converged || rec.gabp_rounds == 0 {
            continue;
        }
        let tol = gabp_cfg.effective_gabp_tol(rec.mu);
        let gabp_dir = match barrier::newton_direction(
            &std,
            &rec.x,
            rec.mu,
            LinSolve::GabpNormal,
            tol,
            gabp_cfg.gabp_max_rounds,
        ) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let dense_dir = barrier::newton_direction(
            &std,
            &rec.x,
            rec.mu,
            LinSolve::DenseOracle,
            tol,
            None,
        )
        .map_err(|e| format!("linsolve: {e}"))?;
        gabp_steps += 1;
        let scale = dense_dir.dx.norm_inf().max(1e-12);
        let diff = gabp_dir
            .dx
            .sub(&dense_dir.dx)
            .map_err(|e| format!("linsolve: {e}"))?
            .norm_inf();
        max_dir = max_dir.max(diff / scale);
    }

    Ok(CheckOutcome {
        label: label.to_string(),
        objective_discrepancy: hi - lo,
        direction_discrepancy: max_dir,
        gabp_steps,
        total_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injected_discrepancy_flips_verdict() {
        let good = CheckOutcome {
            label: "a".into(),
            objective_discrepancy: 2e-9,
            direction_discrepancy: 1e-8,
            gabp_steps: 3,
            total_steps: 5,
        };
        let (text, ok) = render_report(&[good.clone()]);
        assert!(ok, "{text}");
        assert!(text.contains("verdict ok"));

        let bad = CheckOutcome {
            objective_discrepancy: 1e-3,
            ..good
        };
        let (text, ok) = render_report(&[bad]);
        assert!(!ok);
        assert!(text.contains("verdict discrepancy"));
    }

    #[test]
    fn toy_instance_checks_out() {
        let outcome = check_instance("toy", &gabp_lp::io::build_toy_problem()).unwrap();
        assert!(outcome.objective_discrepancy <= CHECK_TOL);
        assert!(outcome.direction_discrepancy <= CHECK_TOL);
    }
}
