//! Primal points from the linear programs left after fixing one variable set.

use crate::branching::Side;
use crate::error::Result;
use crate::lp::{solve_lp_with, LpOptions, LpProblem, LpStatus, RowSense};
use crate::model::{BbpInstance, BilinearForm};

/// Non-elastic rows count as satisfied below this residual.
pub const FEAS_TOL: f64 = 1e-6;

/// `form` with the `side` variables fixed: coefficients of the free variables
/// and the constant.
fn restrict(form: &BilinearForm, side: Side, fixed: &[f64], n_free: usize) -> (Vec<f64>, f64) {
    let mut coef = vec![0.0; n_free];
    let mut constant = form.constant;
    match side {
        Side::X => {
            for &(i, j, v) in &form.q {
                coef[j] += v * fixed[i];
            }
            for &(i, v) in &form.a {
                constant += v * fixed[i];
            }
            for &(j, v) in &form.b {
                coef[j] += v;
            }
        }
        Side::Y => {
            for &(i, j, v) in &form.q {
                coef[i] += v * fixed[j];
            }
            for &(i, v) in &form.a {
                coef[i] += v;
            }
            for &(j, v) in &form.b {
                constant += v * fixed[j];
            }
        }
    }
    (coef, constant)
}

/// Minimize the elastic objective over the free variable set with `side`
/// fixed at `fixed`, inside `[lower, upper]`. Returns the free values and
/// the optimal value, or `None` when the fixed point admits no solution.
pub fn fixed_side_lp(
    inst: &BbpInstance,
    side: Side,
    fixed: &[f64],
    lower: &[f64],
    upper: &[f64],
    options: &LpOptions,
) -> Result<Option<(Vec<f64>, f64)>> {
    let (n_free, offset) = match side {
        Side::X => (inst.n2, inst.n1),
        Side::Y => (inst.n1, 0),
    };
    let mut lp = LpProblem::new();
    let (obj, obj_const) = restrict(&inst.objective, side, fixed, n_free);
    for (t, &c) in obj.iter().enumerate() {
        lp.add_var(lower[offset + t], upper[offset + t], c);
    }
    for row in &inst.rows {
        let (coef, constant) = restrict(&row.form, side, fixed, n_free);
        let mut coeffs: Vec<(usize, f64)> = coef.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(t, &v)| (t, v)).collect();
        if row.elastic {
            let (mut lo, mut hi) = (constant, constant);
            for &(t, v) in &coeffs {
                let (a, b) = (v * lower[offset + t], v * upper[offset + t]);
                lo += a.min(b);
                hi += a.max(b);
            }
            let zp = lp.add_var(0.0, hi.max(0.0), 1.0);
            let zm = lp.add_var(0.0, (-lo).max(0.0), 1.0);
            coeffs.push((zp, -1.0));
            coeffs.push((zm, 1.0));
        } else if coeffs.is_empty() {
            if constant.abs() > FEAS_TOL {
                return Ok(None);
            }
            continue;
        }
        lp.add_row(coeffs, RowSense::Eq, -constant);
    }
    if lp.num_vars() == 0 {
        return Ok(Some((Vec::new(), obj_const)));
    }
    let res = solve_lp_with(&lp, options)?;
    if res.status != LpStatus::Optimal {
        return Ok(None);
    }
    Ok(Some((res.values[..n_free].to_vec(), res.objective + obj_const)))
}

/// A point, its elastic objective and the largest non-elastic residual.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
    pub infeasibility: f64,
}

impl PrimalPoint {
    pub fn evaluate(inst: &BbpInstance, x: Vec<f64>, y: Vec<f64>) -> Self {
        let e = inst.evaluate(&x, &y);
        Self { x, y, value: e.objective, infeasibility: e.infeasibility }
    }

    pub fn is_feasible(&self) -> bool {
        self.infeasibility <= FEAS_TOL
    }
}

/// Alternate exact LPs over `y` (x fixed) and over `x` (y fixed) from
/// `(x0, y0)` inside `[lower, upper]`. Returns every visited point in order;
/// the first is the start point itself.
pub fn alternating_heuristic(
    inst: &BbpInstance,
    x0: &[f64],
    y0: &[f64],
    lower: &[f64],
    upper: &[f64],
    max_rounds: usize,
    options: &LpOptions,
) -> Result<Vec<PrimalPoint>> {
    let n1 = inst.n1;
    let clamp = |v: &[f64], off: usize| -> Vec<f64> {
        v.iter().enumerate().map(|(t, &a)| a.clamp(lower[off + t], upper[off + t])).collect()
    };
    let mut x = clamp(x0, 0);
    let mut y = clamp(y0, n1);
    let mut trail = vec![PrimalPoint::evaluate(inst, x.clone(), y.clone())];
    let mut last = f64::INFINITY;
    for _ in 0..max_rounds {
        let mut moved = false;
        for side in [Side::X, Side::Y] {
            let fixed = if side == Side::X { &x } else { &y };
            if let Some((free, _)) = fixed_side_lp(inst, side, fixed, lower, upper, options)? {
                let free = clamp(&free, if side == Side::X { n1 } else { 0 });
                match side {
                    Side::X => y = free,
                    Side::Y => x = free,
                }
                trail.push(PrimalPoint::evaluate(inst, x.clone(), y.clone()));
                moved = true;
            }
        }
        let cur = trail.last().map_or(f64::INFINITY, |p| p.value);
        if !moved || cur >= last - 1e-10 {
            break;
        }
        last = cur;
    }
    Ok(trail)
}

/// Best feasible point of a trail.
pub fn best_feasible(trail: &[PrimalPoint]) -> Option<&PrimalPoint> {
    trail.iter().filter(|p| p.is_feasible()).min_by(|a, b| a.value.total_cmp(&b.value))
}
