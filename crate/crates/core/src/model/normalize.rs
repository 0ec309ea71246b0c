use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::lp::RowSense;

use super::{BbpInstance, BilinearForm, BilinearRow};

/// Coefficients with magnitude at or below this are dropped after substitution.
const DROP: f64 = 1e-14;

/// `v = scale * v' + offset`; `index` is the position of `v'` in the normalized
/// instance, or `None` when the variable was fixed and eliminated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarMap {
    pub scale: f64,
    pub offset: f64,
    pub index: Option<usize>,
}

impl VarMap {
    pub fn apply(&self, v_norm: f64) -> f64 {
        self.scale * v_norm + self.offset
    }

    pub fn invert(&self, v: f64) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            (v - self.offset) / self.scale
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRecord {
    pub x: Vec<VarMap>,
    pub y: Vec<VarMap>,
    pub n1_reduced: usize,
    pub n2_reduced: usize,
}

impl ScalingRecord {
    pub fn identity(n1: usize, n2: usize) -> Self {
        let id = |k| VarMap { scale: 1.0, offset: 0.0, index: Some(k) };
        Self { x: (0..n1).map(id).collect(), y: (0..n2).map(id).collect(), n1_reduced: n1, n2_reduced: n2 }
    }

    /// Map a point of the normalized instance back to original coordinates.
    pub fn restore(&self, xn: &[f64], yn: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let pick = |m: &VarMap, src: &[f64]| m.apply(m.index.map_or(0.0, |k| src[k]));
        (
            self.x.iter().map(|m| pick(m, xn)).collect(),
            self.y.iter().map(|m| pick(m, yn)).collect(),
        )
    }

    /// Map an original point into normalized coordinates.
    pub fn reduce(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut xn = vec![0.0; self.n1_reduced];
        let mut yn = vec![0.0; self.n2_reduced];
        for (m, &v) in self.x.iter().zip(x) {
            if let Some(k) = m.index {
                xn[k] = m.invert(v);
            }
        }
        for (m, &v) in self.y.iter().zip(y) {
            if let Some(k) = m.index {
                yn[k] = m.invert(v);
            }
        }
        (xn, yn)
    }

    /// Rewrite a normalized instance back in original coordinates.
    pub fn unnormalize(&self, inst: &BbpInstance) -> BbpInstance {
        let n1 = self.x.len();
        let n2 = self.y.len();
        // Inverse substitution v' = (v - offset) / scale, indexed by reduced position.
        let mut xinv = vec![Affine::constant(0.0); self.n1_reduced];
        let mut yinv = vec![Affine::constant(0.0); self.n2_reduced];
        for (orig, m) in self.x.iter().enumerate() {
            if let Some(k) = m.index {
                xinv[k] = Affine { var: Some(orig), scale: 1.0 / m.scale, offset: -m.offset / m.scale };
            }
        }
        for (orig, m) in self.y.iter().enumerate() {
            if let Some(k) = m.index {
                yinv[k] = Affine { var: Some(orig), scale: 1.0 / m.scale, offset: -m.offset / m.scale };
            }
        }
        let mut lower = Vec::with_capacity(n1 + n2);
        let mut upper = Vec::with_capacity(n1 + n2);
        for m in self.x.iter().chain(&self.y) {
            lower.push(m.offset);
            upper.push(m.offset + m.scale);
        }
        BbpInstance {
            n1,
            n2,
            objective: substitute(&inst.objective, &xinv, &yinv),
            rows: inst
                .rows
                .iter()
                .map(|r| BilinearRow { form: substitute(&r.form, &xinv, &yinv), elastic: r.elastic })
                .collect(),
            lower,
            upper,
        }
    }
}

/// `scale * v[var] + offset`, or the bare constant `offset` when `var` is `None`.
#[derive(Clone, Copy, Debug)]
struct Affine {
    var: Option<usize>,
    scale: f64,
    offset: f64,
}

impl Affine {
    fn constant(c: f64) -> Self {
        Self { var: None, scale: 0.0, offset: c }
    }
}

fn substitute(f: &BilinearForm, xs: &[Affine], ys: &[Affine]) -> BilinearForm {
    let mut out = BilinearForm { constant: f.constant, ..Default::default() };
    for &(i, j, v) in &f.q {
        let (xi, yj) = (xs[i], ys[j]);
        if let (Some(p), Some(r)) = (xi.var, yj.var) {
            out.q.push((p, r, v * xi.scale * yj.scale));
        }
        if let Some(p) = xi.var {
            out.a.push((p, v * xi.scale * yj.offset));
        }
        if let Some(r) = yj.var {
            out.b.push((r, v * xi.offset * yj.scale));
        }
        out.constant += v * xi.offset * yj.offset;
    }
    for &(i, v) in &f.a {
        let xi = xs[i];
        if let Some(p) = xi.var {
            out.a.push((p, v * xi.scale));
        }
        out.constant += v * xi.offset;
    }
    for &(j, v) in &f.b {
        let yj = ys[j];
        if let Some(r) = yj.var {
            out.b.push((r, v * yj.scale));
        }
        out.constant += v * yj.offset;
    }
    out.canonical_with(DROP)
}

/// Rescale every variable to `[0, 1]` and eliminate fixed variables.
pub fn normalize_box(inst: &BbpInstance) -> Result<(BbpInstance, ScalingRecord)> {
    let diags = inst.validate();
    if let Some(d) = diags.first() {
        return Err(Error::InvalidInstance(d.to_string()));
    }
    let mut maps = Vec::with_capacity(inst.num_vars());
    let (mut nx, mut ny) = (0, 0);
    for v in 0..inst.num_vars() {
        let (l, u) = (inst.lower[v], inst.upper[v]);
        let counter = if v < inst.n1 { &mut nx } else { &mut ny };
        if u > l {
            maps.push(VarMap { scale: u - l, offset: l, index: Some(*counter) });
            *counter += 1;
        } else {
            maps.push(VarMap { scale: 0.0, offset: l, index: None });
        }
    }
    let y_maps = maps.split_off(inst.n1);
    let rec = ScalingRecord { x: maps, y: y_maps, n1_reduced: nx, n2_reduced: ny };
    let to_affine = |m: &VarMap| Affine { var: m.index, scale: m.scale, offset: m.offset };
    let xs: Vec<Affine> = rec.x.iter().map(to_affine).collect();
    let ys: Vec<Affine> = rec.y.iter().map(to_affine).collect();
    let out = BbpInstance {
        n1: nx,
        n2: ny,
        objective: substitute(&inst.objective, &xs, &ys),
        rows: inst
            .rows
            .iter()
            .map(|r| BilinearRow { form: substitute(&r.form, &xs, &ys), elastic: r.elastic })
            .collect(),
        lower: vec![0.0; nx + ny],
        upper: vec![1.0; nx + ny],
    };
    Ok((out, rec))
}

/// Turn `form <= 0` or `form >= 0` into an equality with a new slack y-variable
/// at index `slack`. Returns the equality form and the slack bounds (`None`
/// for an equality row, which is returned unchanged).
pub fn inequality_to_equality(
    form: &BilinearForm,
    sense: RowSense,
    xb: &[Interval],
    yb: &[Interval],
    slack: usize,
    row: usize,
) -> Result<(BilinearForm, Option<Interval>)> {
    if sense == RowSense::Eq {
        return Ok((form.clone(), None));
    }
    let range = form.range(xb, yb);
    if !range.is_finite() {
        return Err(Error::Overflow { row });
    }
    let mut out = form.clone();
    // Le: form + s = 0 with s = -form >= 0. Ge: form - s = 0 with s = form >= 0.
    let (coef, hi) = match sense {
        RowSense::Le => (1.0, -range.lo),
        _ => (-1.0, range.hi),
    };
    if hi < 0.0 {
        return Err(Error::InfeasibleRow { row });
    }
    out.b.push((slack, coef));
    Ok((out, Some(Interval::new(0.0, hi))))
}
