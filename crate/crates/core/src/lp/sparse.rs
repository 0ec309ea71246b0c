//! Sparse revised simplex backed by `microlp`.

use super::{Engine, LpError, LpProblem, LpResult, LpStatus, RowSense};
use microlp::{ComparisonOp, OptimizationDirection, Problem};

pub(super) fn solve(p: &LpProblem) -> Result<LpResult, LpError> {
    let mut prob = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..p.num_vars())
        .map(|j| prob.add_var(p.objective[j], (p.lower[j], p.upper[j])))
        .collect();
    for row in &p.rows {
        let op = match row.sense {
            RowSense::Le => ComparisonOp::Le,
            RowSense::Ge => ComparisonOp::Ge,
            RowSense::Eq => ComparisonOp::Eq,
        };
        let expr: Vec<_> = row.coeffs.iter().map(|&(j, a)| (vars[j], a)).collect();
        prob.add_constraint(expr, op, row.rhs);
    }
    match prob.solve() {
        Ok(outcome) => {
            let iterations = outcome.stats().lp_iterations as usize;
            let Some(sol) = outcome.solution() else {
                return Err(LpError::Stalled("sparse solve interrupted".into()));
            };
            let values: Vec<f64> = vars.iter().map(|&v| sol.var_value(v)).collect();
            Ok(LpResult {
                status: LpStatus::Optimal,
                objective: p.objective_value(&values),
                primal_violation: p.max_violation(&values),
                values,
                iterations,
                dual_violation: None,
                engine: Engine::Sparse,
            })
        }
        Err(microlp::Error::Infeasible) => Ok(LpResult::without_solution(LpStatus::Infeasible, 0, Engine::Sparse)),
        Err(microlp::Error::Unbounded) => Ok(LpResult::without_solution(LpStatus::Unbounded, 0, Engine::Sparse)),
        Err(e) => Err(LpError::Stalled(e.to_string())),
    }
}
