//! Random row-sparse instances planted around a known zero-residual point.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{BbpInstance, BilinearForm, BilinearRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub n1: usize,
    pub n2: usize,
    pub rows: usize,
    /// Total number of bilinear terms over all rows.
    pub terms: usize,
    /// Bilinear terms in the objective.
    #[serde(default)]
    pub objective_terms: usize,
}

impl Shape {
    pub fn new(n1: usize, n2: usize, rows: usize, terms: usize) -> Self {
        Self { n1, n2, rows, terms, objective_terms: 0 }
    }
}

/// Smallest `p × q` grid (p x-variables, q y-variables) holding `t` terms.
fn grid_for(t: usize, n1: usize, n2: usize) -> (usize, usize) {
    if t == 0 {
        return (1, 1);
    }
    let mut q = (t as f64).sqrt().ceil() as usize;
    q = q.min(n2);
    let mut p = t.div_ceil(q);
    if p > n1 {
        p = n1;
        q = t.div_ceil(p);
    }
    (p, q)
}

/// Indices of the `p` x-variables whose segments of the y-line lie closest to `center`.
fn nearest_elements(center: f64, p: usize, n1: usize, n2: usize) -> Vec<usize> {
    let width = n2 as f64 / n1 as f64;
    let mut xv: Vec<usize> = (0..n1).collect();
    xv.sort_by(|&a, &b| {
        let da = ((a as f64 + 0.5) * width - center).abs();
        let db = ((b as f64 + 0.5) * width - center).abs();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    xv.truncate(p);
    xv.sort_unstable();
    xv
}

/// A reproducible elastic instance on the unit box.
///
/// The y-variables sit on a line and every x-variable owns a segment of it.
/// Row `k` couples a window of consecutive y's with the x's nearest to that
/// window, so neighbouring rows share bilinear pairs. Every row has a zero
/// residual at a hidden interior point before the constants are perturbed by
/// normal noise of variance `noise * |c|`.
pub fn generate_instance(shape: &Shape, noise: f64, seed: u64) -> Result<BbpInstance> {
    let Shape { n1, n2, rows, terms, objective_terms } = *shape;
    if n1 == 0 || n2 == 0 || rows == 0 {
        return Err(Error::InvalidInstance("shape must be positive".into()));
    }
    if terms > rows * n1 * n2 || objective_terms > n1 * n2 {
        return Err(Error::InvalidInstance("more terms than variable pairs".into()));
    }
    if noise < 0.0 {
        return Err(Error::InvalidInstance("noise must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n1).map(|_| rng.random_range(0.1..0.9)).collect();
    let ys: Vec<f64> = (0..n2).map(|_| rng.random_range(0.1..0.9)).collect();

    let mut per_row = vec![terms / rows; rows];
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut rng);
    for &k in order.iter().take(terms % rows) {
        per_row[k] += 1;
    }

    let mut inst = BbpInstance::unit(n1, n2);
    for (k, &t) in per_row.iter().enumerate() {
        let (p, q) = grid_for(t, n1, n2);
        let start = if rows == 1 { 0 } else { (k * (n2 - q) + (rows - 1) / 2) / (rows - 1) };
        let yv: Vec<usize> = (start..start + q).collect();
        let xv = nearest_elements(start as f64 + 0.5 * q as f64, p, n1, n2);
        let mut pairs: Vec<(usize, usize)> = xv.iter().flat_map(|&i| yv.iter().map(move |&j| (i, j))).collect();
        pairs.shuffle(&mut rng);
        pairs.truncate(t);
        pairs.sort_unstable();

        let mut form = BilinearForm::default();
        for (i, j) in pairs {
            form.q.push((i, j, random_magnitude(&mut rng)));
        }
        for &i in &xv {
            if t == 0 || rng.random_bool(0.5) {
                form.a.push((i, rng.random_range(-1.0..1.0)));
            }
        }
        for &j in &yv {
            form.b.push((j, rng.random_range(-1.0..1.0)));
        }
        form = form.canonical();
        let mut c = -form.eval(&xs, &ys);
        if noise > 0.0 && c != 0.0 {
            c += Normal::new(0.0, (noise * c.abs()).sqrt()).expect("finite sd").sample(&mut rng);
        }
        form.constant = c;
        inst.rows.push(BilinearRow { form, elastic: true });
    }

    if objective_terms > 0 {
        let mut pairs: Vec<(usize, usize)> = (0..n1).flat_map(|i| (0..n2).map(move |j| (i, j))).collect();
        pairs.shuffle(&mut rng);
        pairs.truncate(objective_terms);
        pairs.sort_unstable();
        for (i, j) in pairs {
            inst.objective.q.push((i, j, 0.1 * random_magnitude(&mut rng)));
        }
    }
    Ok(inst)
}

fn random_magnitude(rng: &mut ChaCha8Rng) -> f64 {
    let m = rng.random_range(0.5..2.0);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}
