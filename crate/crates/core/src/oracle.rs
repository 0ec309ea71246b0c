//! Brute-force reference optimum: a grid over `x` and an exact LP in the
//! remaining variables at every grid point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branching::Side;
use crate::error::{Error, Result};
use crate::heuristic::fixed_side_lp;
use crate::lp::LpOptions;
use crate::model::BbpInstance;

/// Default ceiling on the number of grid points.
pub const DEFAULT_POINT_CAP: u64 = 5_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// `None` when no grid point admits a feasible completion.
    pub value: Option<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub points: u64,
    pub step: f64,
}

/// Grid values of one coordinate: `lo, lo + step, ...` and always `hi`.
fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut v: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    if hi - v[n] > 1e-12 {
        v.push(hi);
    } else {
        v[n] = hi;
    }
    v
}

pub fn grid_points(inst: &BbpInstance, step: f64) -> u64 {
    (0..inst.n1)
        .map(|i| axis(inst.lower[i], inst.upper[i], step).len() as u64)
        .fold(1u64, |a, b| a.saturating_mul(b))
}

pub fn grid_oracle(inst: &BbpInstance, step: f64, cap: u64) -> Result<OracleResult> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::OracleRefused(format!("grid step {step} is not positive")));
    }
    let points = grid_points(inst, step);
    if points > cap {
        return Err(Error::OracleRefused(format!("{points} grid points exceed the cap of {cap}")));
    }
    let axes: Vec<Vec<f64>> = (0..inst.n1).map(|i| axis(inst.lower[i], inst.upper[i], step)).collect();
    let options = LpOptions::default();
    let best = (0..points)
        .into_par_iter()
        .map(|mut k| {
            let x: Vec<f64> = axes
                .iter()
                .map(|ax| {
                    let v = ax[(k % ax.len() as u64) as usize];
                    k /= ax.len() as u64;
                    v
                })
                .collect();
            match fixed_side_lp(inst, Side::X, &x, &inst.lower, &inst.upper, &options) {
                Ok(Some((y, v))) => Ok(Some((v, x, y))),
                Ok(None) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .try_fold(
            || None,
            |acc: Cand, r: Result<Cand>| {
                Ok::<_, Error>(better(acc, r?))
            },
        )
        .try_reduce(|| None, |a, b| Ok(better(a, b)))?;
    Ok(match best {
        Some((v, x, y)) => OracleResult { value: Some(v), x, y, points, step },
        None => OracleResult { value: None, x: Vec::new(), y: Vec::new(), points, step },
    })
}

type Cand = Option<(f64, Vec<f64>, Vec<f64>)>;

/// Smaller value wins; ties go to the lexicographically smaller `x`.
fn better(a: Cand, b: Cand) -> Cand {
    match (a, b) {
        (None, b) => b,
        (a, None) => a,
        (Some(a), Some(b)) => {
            let b_wins = b.0 < a.0 || (b.0 == a.0 && b.1.iter().zip(&a.1).find(|(p, q)| p != q).is_some_and(|(p, q)| p < q));
            Some(if b_wins { b } else { a })
        }
    }
}
