//! Oracles and random inputs for the acceptance suite. Nothing here calls
//! into the solver paths being checked.
#![allow(dead_code)]

use bbp_core::lp::{LpProblem, RowSense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let m = rng.random_range(lo..hi);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// A random unit-box instance as a document. Rows are mostly elastic; an
/// exact row, when present, passes through a random point of the box.
pub fn random_instance_doc(seed: u64) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = rng.random_range(1..=2usize);
    let n2 = rng.random_range(1..=3usize);
    let rows = rng.random_range(1..=3usize);
    let xs: Vec<f64> = (0..n1).map(|_| rng.random_range(0.0..1.0)).collect();
    let ys: Vec<f64> = (0..n2).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut docs = Vec::new();
    for k in 0..rows {
        let mut q = Vec::new();
        let mut value = 0.0;
        for i in 0..n1 {
            for j in 0..n2 {
                if rng.random_bool(0.6) {
                    let c = signed(&mut rng, 0.2, 1.5);
                    value += c * xs[i] * ys[j];
                    q.push(json!([i, j, c]));
                }
            }
        }
        if q.is_empty() {
            let c = signed(&mut rng, 0.2, 1.5);
            value += c * xs[0] * ys[0];
            q.push(json!([0, 0, c]));
        }
        let mut a = Vec::new();
        for i in 0..n1 {
            if rng.random_bool(0.5) {
                let c = signed(&mut rng, 0.2, 1.5);
                value += c * xs[i];
                a.push(json!([i, c]));
            }
        }
        let mut b = Vec::new();
        for j in 0..n2 {
            if rng.random_bool(0.5) {
                let c = signed(&mut rng, 0.2, 1.5);
                value += c * ys[j];
                b.push(json!([j, c]));
            }
        }
        let elastic = k > 0 || rng.random_bool(0.7);
        let constant = if elastic { rng.random_range(-1.0..1.0) } else { -value };
        docs.push(json!({ "sense": "=", "qTriplets": q, "aLin": a, "bLin": b, "const": constant, "elastic": elastic }));
    }
    let obj_a: Vec<Value> = (0..n1).map(|i| json!([i, 0.3 * signed(&mut rng, 0.2, 1.5)])).collect();
    let mut obj_b = Vec::new();
    for j in 0..n2 {
        if rng.random_bool(0.5) {
            obj_b.push(json!([j, 0.3 * signed(&mut rng, 0.2, 1.5)]));
        }
    }
    json!({
        "n1": n1,
        "n2": n2,
        "lower": vec![0.0; n1 + n2],
        "upper": vec![1.0; n1 + n2],
        "objective": { "aLin": obj_a, "bLin": obj_b },
        "rows": docs,
    })
}

/// Coefficients `(q, a, b, c)` of a random two-variable row whose curve
/// passes through a random point of the unit square. One in five has `q = 0`.
pub fn random_row(rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
    let q = if rng.random_range(0..5) == 0 { 0.0 } else { signed(rng, 0.1, 2.0) };
    let mut a = signed(rng, 0.0, 2.0);
    let mut b = signed(rng, 0.0, 2.0);
    if q == 0.0 {
        a = signed(rng, 0.1, 2.0);
        b = signed(rng, 0.1, 2.0);
    }
    let (u, v): (f64, f64) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
    (q, a, b, -(q * u * v + a * u + b * v))
}

/// Exact points `(u, v)` of `q·u·v + a·u + b·v + c = 0` inside the unit
/// square, drawn by sweeping either coordinate and solving for the other.
pub fn curve_samples(rng: &mut ChaCha8Rng, (q, a, b, c): (f64, f64, f64, f64), count: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 200 * count {
        tries += 1;
        let t: f64 = rng.random_range(0.0..=1.0);
        // Sweep u: v = -(a·u + c) / (q·u + b); sweep v symmetrically.
        let p = if rng.random_bool(0.5) {
            let d = q * t + b;
            if d.abs() < 1e-9 {
                continue;
            }
            [t, -(a * t + c) / d]
        } else {
            let d = q * t + a;
            if d.abs() < 1e-9 {
                continue;
            }
            [-(b * t + c) / d, t]
        };
        if p.iter().all(|&s| (0.0..=1.0).contains(&s)) {
            out.push(p);
        }
    }
    out
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
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
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
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

/// Minimum objective over all basic solutions; `None` when infeasible.
pub fn enumerate_lp(p: &LpProblem) -> Option<f64> {
    let (n, m) = (p.num_vars(), p.num_rows());
    let mut best: Option<f64> = None;
    for active in 0..=m.min(n) {
        for rows in subsets(m, active) {
            for free in subsets(n, active) {
                let at_bound: Vec<usize> = (0..n).filter(|j| !free.contains(j)).collect();
                for mask in 0u32..(1u32 << at_bound.len()) {
                    let mut x = vec![0.0; n];
                    for (bit, &j) in at_bound.iter().enumerate() {
                        x[j] = if mask >> bit & 1 == 1 { p.upper[j] } else { p.lower[j] };
                    }
                    if active > 0 {
                        let mut a = vec![vec![0.0; active]; active];
                        let mut rhs = vec![0.0; active];
                        for (r, &i) in rows.iter().enumerate() {
                            rhs[r] = p.rows[i].rhs;
                            for &(j, c) in &p.rows[i].coeffs {
                                match free.iter().position(|&f| f == j) {
                                    Some(pos) => a[r][pos] += c,
                                    None => rhs[r] -= c * x[j],
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

/// Random bounded LP around a feasible point; `infeasible` adds a contradiction.
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
        let (sense, rhs) = match rng.random_range(0..3) {
            0 => (RowSense::Le, lhs + rng.random_range(0.0..0.5)),
            1 => (RowSense::Ge, lhs - rng.random_range(0.0..0.5)),
            _ => (RowSense::Eq, lhs),
        };
        p.add_row(coeffs, sense, rhs);
    }
    if infeasible {
        let (lo, hi) = (p.lower[0], p.upper[0]);
        p.add_row(vec![(0, 1.0)], RowSense::Ge, hi + 0.1);
        p.add_row(vec![(0, 1.0)], RowSense::Le, 0.5 * (lo + hi));
    }
    p
}
