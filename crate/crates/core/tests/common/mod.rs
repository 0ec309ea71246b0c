//! Test-only oracles, independent of the solver code paths they check.
#![allow(dead_code)]

use bbp_core::lp::{LpProblem, RowSense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-11 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum objective over all basic feasible solutions; `None` when infeasible.
///
/// A basic solution makes a set `S` of rows active, fixes `n - |S|` variables
/// at one of their bounds, and solves for the rest. Equality rows outside `S`
/// are enforced by the final feasibility check, which also covers redundant
/// equality systems.
pub fn enumerate_lp(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    let m = p.num_rows();
    let mut best: Option<f64> = None;
    for active in 0..=m.min(n) {
        for rows in subsets(m, active) {
            for free in subsets(n, active) {
                let at_bound: Vec<usize> = (0..n).filter(|j| !free.contains(j)).collect();
                for mask in 0u32..(1u32 << at_bound.len()) {
                    let mut x = vec![0.0; n];
                    for (b, &j) in at_bound.iter().enumerate() {
                        x[j] = if mask >> b & 1 == 1 { p.upper[j] } else { p.lower[j] };
                    }
                    if active > 0 {
                        let mut a = vec![vec![0.0; active]; active];
                        let mut rhs = vec![0.0; active];
                        for (r, &i) in rows.iter().enumerate() {
                            rhs[r] = p.rows[i].rhs;
                            for &(j, c) in &p.rows[i].coeffs {
                                if let Some(pos) = free.iter().position(|&f| f == j) {
                                    a[r][pos] += c;
                                } else {
                                    rhs[r] -= c * x[j];
                                }
                            }
                        }
                        let Some(sol) = solve_dense(a, rhs) else { continue };
                        for (pos, &j) in free.iter().enumerate() {
                            x[j] = sol[pos];
                        }
                    }
                    if p.max_violation(&x) <= 1e-9 {
                        let v = p.objective_value(&x);
                        best = Some(best.map_or(v, |b: f64| b.min(v)));
                    }
                }
            }
        }
    }
    best
}

/// Random bounded LP with `n` columns and `m` rows; feasible unless `infeasible`.
pub fn random_lp(seed: u64, n: usize, m: usize, infeasible: bool) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = LpProblem::new();
    let mut x0 = Vec::new();
    for _ in 0..n {
        let lo: f64 = rng.random_range(-1.0..0.5);
        let hi = lo + rng.random_range(0.2..2.0);
        p.add_var(lo, hi, rng.random_range(-1.0..1.0));
        x0.push(rng.random_range(lo..hi));
    }
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                coeffs.push((j, rng.random_range(-1.0..1.0)));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((rng.random_range(0..n), 1.0));
        }
        let lhs: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        let sense = match rng.random_range(0..3) {
            0 => RowSense::Le,
            1 => RowSense::Ge,
            _ => RowSense::Eq,
        };
        let rhs = match sense {
            RowSense::Le => lhs + rng.random_range(0.0..0.5),
            RowSense::Ge => lhs - rng.random_range(0.0..0.5),
            RowSense::Eq => lhs,
        };
        p.add_row(coeffs, sense, rhs);
    }
    if infeasible {
        let j = 0;
        let (lo, hi) = (p.lower[j], p.upper[j]);
        p.add_row(vec![(j, 1.0)], RowSense::Ge, hi + 0.1);
        p.add_row(vec![(j, 1.0)], RowSense::Le, lo + (hi - lo) / 2.0);
    }
    p
}

/// A small unit-box instance: mostly elastic rows with random bilinear
/// coefficients, plus an occasional exact row that passes through a planted point.
pub fn random_instance(seed: u64, n1: usize, n2: usize, rows: usize) -> bbp_core::model::BbpInstance {
    use bbp_core::model::{BbpInstance, BilinearForm, BilinearRow};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef = |rng: &mut ChaCha8Rng| {
        let m: f64 = rng.random_range(0.2..1.5);
        if rng.random_bool(0.5) { m } else { -m }
    };
    let mut inst = BbpInstance::unit(n1, n2);
    let xs: Vec<f64> = (0..n1).map(|_| rng.random_range(0.0..1.0)).collect();
    let ys: Vec<f64> = (0..n2).map(|_| rng.random_range(0.0..1.0)).collect();
    for k in 0..rows {
        let mut form = BilinearForm::default();
        for i in 0..n1 {
            for j in 0..n2 {
                if rng.random_bool(0.6) {
                    form.q.push((i, j, coef(&mut rng)));
                }
            }
        }
        if form.q.is_empty() {
            form.q.push((rng.random_range(0..n1), rng.random_range(0..n2), coef(&mut rng)));
        }
        for i in 0..n1 {
            if rng.random_bool(0.5) {
                form.a.push((i, coef(&mut rng)));
            }
        }
        for j in 0..n2 {
            if rng.random_bool(0.5) {
                form.b.push((j, coef(&mut rng)));
            }
        }
        let elastic = k > 0 || rng.random_bool(0.7);
        form.constant = if elastic { rng.random_range(-1.0..1.0) } else { -form.eval(&xs, &ys) };
        inst.rows.push(BilinearRow { form: form.canonical(), elastic });
    }
    for i in 0..n1 {
        inst.objective.a.push((i, 0.3 * coef(&mut rng)));
    }
    for j in 0..n2 {
        if rng.random_bool(0.5) {
            inst.objective.b.push((j, 0.3 * coef(&mut rng)));
        }
    }
    inst.objective = inst.objective.canonical();
    inst
}

/// `min x + y` subject to `x·y = t` on the unit box.
pub fn product_instance(t: f64) -> bbp_core::model::BbpInstance {
    use bbp_core::model::{BbpInstance, BilinearForm, BilinearRow};
    let mut inst = BbpInstance::unit(1, 1);
    inst.objective = BilinearForm { a: vec![(0, 1.0)], b: vec![(0, 1.0)], ..Default::default() };
    inst.rows.push(BilinearRow { form: BilinearForm { q: vec![(0, 0, 1.0)], constant: -t, ..Default::default() }, elastic: false });
    inst
}
