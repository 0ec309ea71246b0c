//! Dense-tableau bounded-variable primal simplex.
//!
//! Phase 1 minimizes the sum of artificial variables attached to rows whose
//! slack cannot start basic. Pricing is Dantzig's rule; after a run of
//! degenerate pivots the solver switches to Bland's rule until the objective
//! moves again.

use super::{Engine, LpError, LpProblem, LpResult, LpStatus, LpTolerances, RowSense};

const DEGENERATE_RUN_BEFORE_BLAND: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// Row-major `m x ncols` matrix `B^-1 A`.
    t: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn row(&self, i: usize) -> &[f64] {
        &self.t[i * self.ncols..(i + 1) * self.ncols]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            State::AtUpper => self.hi[j],
            _ => self.lo[j],
        }
    }

    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
                for (dj, tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.ncols;
        let piv = self.t[r * nc + j];
        for v in &mut self.t[r * nc..(r + 1) * nc] {
            *v /= piv;
        }
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for row in before.chunks_exact_mut(nc).chain(after.chunks_exact_mut(nc)) {
            let f = row[j];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[j] = 0.0;
            }
        }
        let dj = self.d[j];
        if dj != 0.0 {
            for (v, p) in self.d.iter_mut().zip(prow.iter()) {
                *v -= dj * p;
            }
            self.d[j] = 0.0;
        }
        prow[j] = 1.0;
    }

    /// Runs primal simplex iterations for the current cost vector.
    fn optimize(&mut self, cost: &[f64], tol: &LpTolerances, max_iter: usize) -> Result<Outcome, LpError> {
        self.price(cost);
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= max_iter {
                return Err(LpError::Stalled(format!("iteration limit {max_iter} reached")));
            }
            // Entering column.
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.ncols {
                if self.lo[j] == self.hi[j] {
                    continue;
                }
                let dir = match self.state[j] {
                    State::Basic => continue,
                    State::AtLower if self.d[j] < -tol.optimality => 1.0,
                    State::AtUpper if self.d[j] > tol.optimality => -1.0,
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if self.d[j].abs() > best {
                    best = self.d[j].abs();
                    entering = Some((j, dir));
                }
            }
            let Some((j, dir)) = entering else {
                return Ok(Outcome::Optimal);
            };

            // Ratio test, including the entering column's own bound flip.
            let mut step = self.hi[j] - self.lo[j];
            let mut leave: Option<usize> = None;
            let mut leave_alpha = 0.0f64;
            for i in 0..self.m {
                let alpha = dir * self.t[i * self.ncols + j];
                if alpha.abs() <= tol.pivot {
                    continue;
                }
                let b = self.basis[i];
                let limit = if alpha > 0.0 {
                    (self.beta[i] - self.lo[b]) / alpha
                } else {
                    if self.hi[b].is_infinite() {
                        continue;
                    }
                    (self.hi[b] - self.beta[i]) / -alpha
                };
                let limit = limit.max(0.0);
                // Ties with the bound flip keep the flip; ties between rows go to
                // the larger pivot (or the lower index under Bland).
                let better = if limit < step - 1e-12 {
                    true
                } else if limit <= step + 1e-12 {
                    match leave {
                        Some(l) if bland => b < self.basis[l],
                        Some(_) => alpha.abs() > leave_alpha.abs(),
                        None => false,
                    }
                } else {
                    false
                };
                if better {
                    step = limit;
                    leave = Some(i);
                    leave_alpha = alpha;
                }
            }
            if step.is_infinite() {
                return Ok(Outcome::Unbounded);
            }

            self.iterations += 1;
            if step <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > DEGENERATE_RUN_BEFORE_BLAND {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }

            // Move basic values along the edge.
            if step > 0.0 {
                for i in 0..self.m {
                    let a = self.t[i * self.ncols + j];
                    if a != 0.0 {
                        self.beta[i] -= dir * a * step;
                    }
                }
            }
            let entering_value = self.nonbasic_value(j) + dir * step;
            match leave {
                None => {
                    self.state[j] = if dir > 0.0 { State::AtUpper } else { State::AtLower };
                }
                Some(r) => {
                    let out = self.basis[r];
                    self.state[out] = if leave_alpha > 0.0 { State::AtLower } else { State::AtUpper };
                    self.pivot(r, j);
                    self.basis[r] = j;
                    self.state[j] = State::Basic;
                    self.beta[r] = entering_value;
                }
            }
        }
    }
}

pub(super) fn solve(p: &LpProblem, tol: &LpTolerances) -> Result<LpResult, LpError> {
    let n = p.num_vars();
    let m = p.num_rows();
    let x0: Vec<f64> = p.lower.clone();

    let mut residual = Vec::with_capacity(m);
    for row in &p.rows {
        let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        residual.push(row.rhs - lhs);
    }

    // Column layout: structural | slacks | artificials.
    let n_slack = p.rows.iter().filter(|r| r.sense != RowSense::Eq).count();
    let mut slack_col = vec![usize::MAX; m];
    let mut next = n;
    for (i, row) in p.rows.iter().enumerate() {
        if row.sense != RowSense::Eq {
            slack_col[i] = next;
            next += 1;
        }
    }
    let needs_artificial: Vec<bool> = p
        .rows
        .iter()
        .zip(&residual)
        .map(|(row, &r)| match row.sense {
            RowSense::Le => r < 0.0,
            RowSense::Ge => r > 0.0,
            RowSense::Eq => true,
        })
        .collect();
    let n_art = needs_artificial.iter().filter(|&&b| b).count();
    let ncols = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut lo = vec![0.0; ncols];
    let mut hi = vec![f64::INFINITY; ncols];
    lo[..n].copy_from_slice(&p.lower);
    hi[..n].copy_from_slice(&p.upper);

    let mut t = vec![0.0; m * ncols];
    let mut beta = vec![0.0; m];
    let mut basis = vec![0usize; m];
    let mut state = vec![State::AtLower; ncols];
    let mut art = art_start;
    for (i, row) in p.rows.iter().enumerate() {
        let line = &mut t[i * ncols..(i + 1) * ncols];
        for &(j, a) in &row.coeffs {
            line[j] += a;
        }
        let slack_sign = match row.sense {
            RowSense::Le => 1.0,
            RowSense::Ge => -1.0,
            RowSense::Eq => 0.0,
        };
        if slack_sign != 0.0 {
            line[slack_col[i]] = slack_sign;
        }
        let r = residual[i];
        let (basic_col, coef) = if needs_artificial[i] {
            let sign = if r < 0.0 { -1.0 } else { 1.0 };
            line[art] = sign;
            art += 1;
            (art - 1, sign)
        } else {
            (slack_col[i], slack_sign)
        };
        if coef != 1.0 {
            for v in line.iter_mut() {
                *v /= coef;
            }
        }
        basis[i] = basic_col;
        state[basic_col] = State::Basic;
        beta[i] = r / coef;
    }

    let mut tab = Tableau {
        m,
        ncols,
        t,
        beta,
        basis,
        state,
        lo,
        hi,
        d: vec![0.0; ncols],
        iterations: 0,
    };
    let max_iter = 20_000 + 50 * (m + ncols);
    let rhs_scale = 1.0 + p.rows.iter().map(|r| r.rhs.abs()).fold(0.0f64, f64::max);

    if n_art > 0 {
        let mut phase1 = vec![0.0; ncols];
        for c in &mut phase1[art_start..] {
            *c = 1.0;
        }
        tab.optimize(&phase1, tol, max_iter)?;
        let infeas: f64 = (0..m)
            .filter(|&i| tab.basis[i] >= art_start)
            .map(|i| tab.beta[i].max(0.0))
            .sum();
        if infeas > tol.feasibility * rhs_scale {
            return Ok(LpResult::without_solution(LpStatus::Infeasible, tab.iterations, Engine::Dense));
        }
        for j in art_start..ncols {
            tab.hi[j] = 0.0;
            if tab.state[j] != State::Basic {
                tab.state[j] = State::AtLower;
            }
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        for r in 0..m {
            if tab.basis[r] < art_start {
                continue;
            }
            let row = tab.row(r);
            let mut pick = None;
            let mut best = 1e-9;
            for (j, &a) in row.iter().enumerate().take(art_start) {
                if tab.state[j] != State::Basic && a.abs() > best {
                    best = a.abs();
                    pick = Some(j);
                }
            }
            if let Some(j) = pick {
                let out = tab.basis[r];
                let value = tab.nonbasic_value(j);
                tab.pivot(r, j);
                tab.basis[r] = j;
                tab.state[j] = State::Basic;
                tab.state[out] = State::AtLower;
                tab.beta[r] = value;
            }
        }
    }

    let mut cost = vec![0.0; ncols];
    cost[..n].copy_from_slice(&p.objective);
    let outcome = tab.optimize(&cost, tol, max_iter)?;
    if let Outcome::Unbounded = outcome {
        return Ok(LpResult::without_solution(LpStatus::Unbounded, tab.iterations, Engine::Dense));
    }

    let mut values: Vec<f64> = (0..n).map(|j| tab.nonbasic_value(j)).collect();
    for i in 0..m {
        if tab.basis[i] < n {
            values[tab.basis[i]] = tab.beta[i];
        }
    }
    let mut dual_violation = 0.0f64;
    for j in 0..ncols {
        if tab.lo[j] == tab.hi[j] {
            continue;
        }
        match tab.state[j] {
            State::AtLower => dual_violation = dual_violation.max(-tab.d[j]),
            State::AtUpper => dual_violation = dual_violation.max(tab.d[j]),
            State::Basic => {}
        }
    }
    Ok(LpResult {
        status: LpStatus::Optimal,
        objective: p.objective_value(&values),
        primal_violation: p.max_violation(&values),
        values,
        iterations: tab.iterations,
        dual_violation: Some(dual_violation.max(0.0)),
        engine: Engine::Dense,
    })
}
