//! Primal-dual interior point method backed by `clarabel`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use super::{Engine, LpError, LpProblem, LpResult, LpStatus, LpTolerances, RowSense};

pub(super) fn solve(p: &LpProblem, tol: &LpTolerances) -> Result<LpResult, LpError> {
    let n = p.num_vars();
    // Equalities (rows and fixed columns) first, then `a·x <= b` rows.
    let mut eq: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    let mut le: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for row in &p.rows {
        match row.sense {
            RowSense::Eq => eq.push((row.coeffs.clone(), row.rhs)),
            RowSense::Le => le.push((row.coeffs.clone(), row.rhs)),
            RowSense::Ge => le.push((row.coeffs.iter().map(|&(j, a)| (j, -a)).collect(), -row.rhs)),
        }
    }
    for j in 0..n {
        if p.lower[j] == p.upper[j] {
            eq.push((vec![(j, 1.0)], p.lower[j]));
        } else {
            le.push((vec![(j, 1.0)], p.upper[j]));
            le.push((vec![(j, -1.0)], -p.lower[j]));
        }
    }
    let (meq, mle) = (eq.len(), le.len());
    let nnz: usize = eq.iter().chain(&le).map(|r| r.0.len()).sum();
    let (mut rows, mut cols, mut vals) = (Vec::with_capacity(nnz), Vec::with_capacity(nnz), Vec::with_capacity(nnz));
    let mut b = Vec::with_capacity(meq + mle);
    for (k, (coeffs, rhs)) in eq.iter().chain(&le).enumerate() {
        for &(j, a) in coeffs {
            if a != 0.0 {
                rows.push(k);
                cols.push(j);
                vals.push(a);
            }
        }
        b.push(*rhs);
    }
    let a = CscMatrix::new_from_triplets(meq + mle, n, rows, cols, vals);
    let q = CscMatrix::zeros((n, n));
    let cones = [SupportedConeT::ZeroConeT(meq), SupportedConeT::NonnegativeConeT(mle)];
    let eps = (tol.feasibility * 1e-2).max(1e-10);
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_feas(eps)
        .tol_gap_abs(eps)
        .tol_gap_rel(eps)
        .build()
        .map_err(|e| LpError::Stalled(format!("{e:?}")))?;
    let mut solver =
        DefaultSolver::new(&q, &p.objective, &a, &b, &cones, settings).map_err(|e| LpError::Stalled(format!("{e:?}")))?;
    solver.solve();
    let sol = &solver.solution;
    let iterations = sol.iterations as usize;
    match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            let values = sol.x.clone();
            Ok(LpResult {
                status: LpStatus::Optimal,
                objective: p.objective_value(&values),
                primal_violation: p.max_violation(&values),
                values,
                iterations,
                dual_violation: None,
                engine: Engine::Interior,
            })
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            Ok(LpResult::without_solution(LpStatus::Infeasible, iterations, Engine::Interior))
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            Ok(LpResult::without_solution(LpStatus::Unbounded, iterations, Engine::Interior))
        }
        s => Err(LpError::Stalled(format!("interior point stopped with {s:?}"))),
    }
}
