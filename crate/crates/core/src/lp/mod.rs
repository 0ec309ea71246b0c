//! Linear programs over bounded variables.
//!
//! Every relaxation, heuristic and oracle in this crate reduces to
//! `min c^T x  s.t.  rows, lower <= x <= upper` with finite bounds. Three
//! engines sit behind [`solve_lp`]: a dense bounded-variable primal simplex
//! for small problems (it also reports reduced costs, so its optima carry a
//! KKT certificate), a sparse revised simplex, and an interior point method
//! for the large node relaxations. Every result is checked for primal
//! feasibility before it is returned.

mod dense;
mod interior;
mod sparse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Constraint sense of an LP row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

/// One sparse row `sum coeffs (sense) rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A minimization LP with finite variable bounds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a column and returns its index.
    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.push(cost);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) {
        self.rows.push(LpRow { coeffs, sense, rhs });
    }

    /// Checks the structural invariants: finite bounds in order, indices in range.
    pub fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed("bound vectors do not match objective length".into()));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !l.is_finite() || !u.is_finite() {
                return Err(LpError::Malformed(format!("variable {j} has a non-finite bound")));
            }
            if l > u {
                return Err(LpError::Malformed(format!("variable {j} has lower {l} > upper {u}")));
            }
            if !self.objective[j].is_finite() {
                return Err(LpError::Malformed(format!("variable {j} has a non-finite cost")));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {r} has a non-finite rhs")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::Malformed(format!("row {r} references column {j} >= {n}")));
                }
                if !a.is_finite() {
                    return Err(LpError::Malformed(format!("row {r} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.num_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match row.sense {
                RowSense::Le => lhs - row.rhs,
                RowSense::Ge => row.rhs - lhs,
                RowSense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Solver tolerances, gathered in one place so tests can tighten them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpTolerances {
    pub feasibility: f64,
    pub optimality: f64,
    pub pivot: f64,
}

impl Default for LpTolerances {
    fn default() -> Self {
        Self {
            feasibility: 1e-7,
            optimality: 1e-9,
            pivot: 1e-10,
        }
    }
}

/// Which implementation runs a solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Dense for small problems, interior point otherwise.
    #[default]
    Auto,
    Dense,
    Sparse,
    Interior,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LpOptions {
    pub tolerances: LpTolerances,
    pub engine: Engine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    /// Only reachable through numerical trouble: all bounds are finite.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Primal values; empty unless optimal.
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Largest bound/row violation of `values`.
    pub primal_violation: f64,
    /// Largest reduced-cost sign violation, when the engine exposes reduced costs.
    pub dual_violation: Option<f64>,
    pub engine: Engine,
}

impl LpResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn without_solution(status: LpStatus, iterations: usize, engine: Engine) -> Self {
        Self {
            status,
            values: Vec::new(),
            objective: f64::NAN,
            iterations,
            primal_violation: f64::NAN,
            dual_violation: None,
            engine,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    Malformed(String),
    #[error("LP solve stalled numerically: {0}")]
    Stalled(String),
}

/// Problems with at most this many tableau entries go to the dense engine.
const DENSE_TABLEAU_LIMIT: usize = 60_000;
/// The dense engine is never used as a fallback above this size.
const DENSE_FALLBACK_LIMIT: usize = 5_000_000;

fn tableau_size(problem: &LpProblem) -> usize {
    let m = problem.num_rows();
    (m + 1) * (problem.num_vars() + 2 * m + 1)
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpResult, LpError> {
    solve_lp_with(problem, &LpOptions::default())
}

pub fn solve_lp_with(problem: &LpProblem, options: &LpOptions) -> Result<LpResult, LpError> {
    problem.check()?;
    let engine = match options.engine {
        Engine::Auto => {
            if tableau_size(problem) <= DENSE_TABLEAU_LIMIT {
                Engine::Dense
            } else {
                Engine::Interior
            }
        }
        e => e,
    };
    let first = run_engine(problem, engine, &options.tolerances);
    match first {
        Ok(res) if accept(problem, &res, &options.tolerances) => Ok(res),
        first => {
            // Retry once on a slightly relaxed copy, then fall back to the other engines.
            let perturbed = relax_rhs(problem, options.tolerances.feasibility * 0.1);
            if let Ok(res) = run_engine(&perturbed, engine, &options.tolerances) {
                if accept(problem, &res, &options.tolerances) {
                    return Ok(res);
                }
            }
            let small = tableau_size(problem) <= DENSE_FALLBACK_LIMIT;
            for other in [Engine::Interior, Engine::Sparse, Engine::Dense] {
                if other == engine || (other == Engine::Dense && !small) {
                    continue;
                }
                if let Ok(res) = run_engine(problem, other, &options.tolerances) {
                    if accept(problem, &res, &options.tolerances) {
                        return Ok(res);
                    }
                }
            }
            match first {
                Ok(res) => Err(LpError::Stalled(format!(
                    "primal violation {:.3e} after retries",
                    res.primal_violation
                ))),
                Err(e) => Err(e),
            }
        }
    }
}

fn run_engine(problem: &LpProblem, engine: Engine, tol: &LpTolerances) -> Result<LpResult, LpError> {
    let mut res = match engine {
        Engine::Dense | Engine::Auto => dense::solve(problem, tol)?,
        Engine::Sparse => sparse::solve(problem)?,
        Engine::Interior => interior::solve(problem, tol)?,
    };
    if res.status == LpStatus::Optimal {
        // Snap into the box; every engine can overshoot a bound by round-off.
        for (j, v) in res.values.iter_mut().enumerate() {
            *v = v.clamp(problem.lower[j], problem.upper[j]);
        }
        res.primal_violation = problem.max_violation(&res.values);
        res.objective = problem.objective_value(&res.values);
    }
    Ok(res)
}

fn accept(problem: &LpProblem, res: &LpResult, tol: &LpTolerances) -> bool {
    match res.status {
        LpStatus::Optimal => {
            let scale = 1.0
                + problem
                    .rows
                    .iter()
                    .map(|r| r.rhs.abs())
                    .fold(0.0f64, f64::max)
                    .min(1e3);
            res.primal_violation <= tol.feasibility * scale
        }
        LpStatus::Infeasible => true,
        LpStatus::Unbounded => false,
    }
}

fn relax_rhs(problem: &LpProblem, eps: f64) -> LpProblem {
    let mut p = problem.clone();
    for row in &mut p.rows {
        match row.sense {
            RowSense::Le => row.rhs += eps,
            RowSense::Ge => row.rhs -= eps,
            RowSense::Eq => {}
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var(rhs: f64) -> LpProblem {
        let mut p = LpProblem::new();
        let x = p.add_var(0.0, 1.0, -1.0);
        let y = p.add_var(0.0, 1.0, -1.0);
        p.add_row(vec![(x, 1.0), (y, 1.0)], RowSense::Le, rhs);
        p
    }

    #[test]
    fn simplex_corner() {
        for engine in [Engine::Dense, Engine::Sparse, Engine::Interior] {
            let opts = LpOptions { engine, ..Default::default() };
            let res = solve_lp_with(&two_var(1.0), &opts).unwrap();
            assert_eq!(res.status, LpStatus::Optimal);
            assert!((res.objective + 1.0).abs() < 1e-7, "{engine:?}: {}", res.objective);
        }
    }

    #[test]
    fn contradictory_bounds_rows() {
        for engine in [Engine::Dense, Engine::Sparse, Engine::Interior] {
            let mut p = LpProblem::new();
            let x = p.add_var(0.0, 1.0, 0.0);
            p.add_row(vec![(x, 1.0)], RowSense::Ge, 0.6);
            p.add_row(vec![(x, 1.0)], RowSense::Le, 0.4);
            let opts = LpOptions { engine, ..Default::default() };
            assert_eq!(solve_lp_with(&p, &opts).unwrap().status, LpStatus::Infeasible);
        }
    }

    #[test]
    fn rejects_infinite_bounds() {
        let mut p = LpProblem::new();
        p.add_var(0.0, f64::INFINITY, 1.0);
        assert!(matches!(solve_lp(&p), Err(LpError::Malformed(_))));
    }

    #[test]
    fn rejects_out_of_range_index() {
        let mut p = LpProblem::new();
        p.add_var(0.0, 1.0, 1.0);
        p.add_row(vec![(3, 1.0)], RowSense::Eq, 0.0);
        assert!(matches!(solve_lp(&p), Err(LpError::Malformed(_))));
    }

    #[test]
    fn fixed_variables_and_equalities() {
        let mut p = LpProblem::new();
        let x = p.add_var(0.3, 0.3, 1.0);
        let y = p.add_var(-2.0, 2.0, 1.0);
        p.add_row(vec![(x, 2.0), (y, 1.0)], RowSense::Eq, 1.0);
        let res = solve_lp(&p).unwrap();
        assert!((res.values[1] - 0.4).abs() < 1e-12);
        assert!((res.objective - 0.7).abs() < 1e-12);
    }
}
