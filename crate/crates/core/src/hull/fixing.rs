//! Fix all but one pair (or one isolated variable) of a row at box endpoints.

use serde::Serialize;

use crate::model::BilinearForm;

use super::curve::{canonicalize, CanonicalCurve, CurveKind};
use super::cuts::{outer_approximate, CutSet};
use super::geometry::{intersect_box, CurveBoxGeometry};

pub const DEFAULT_PIECE_CAP: usize = 256;

/// Residual part of an elastic row: `z'` enters the rescaled row with
/// coefficient `-scale`, `z''` with `+scale`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ZPart {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZVar {
    pub part: ZPart,
    pub scale: f64,
}

impl ZVar {
    pub fn coef(&self) -> f64 {
        match self.part {
            ZPart::Plus => -self.scale,
            ZPart::Minus => self.scale,
        }
    }
}

/// One row rewritten over the node box mapped onto `[0, 1]`, with dense
/// coefficients over its variables. Coordinates of a row point are ordered
/// `x_vars, y_vars, pairs (x-major), z`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeRow {
    pub x_vars: Vec<usize>,
    pub y_vars: Vec<usize>,
    /// `q[i][j]` for local indices.
    pub q: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
    pub z: Vec<ZVar>,
}

impl NodeRow {
    /// Rescale `form` over the node box `[lower, upper]` (x bounds first, then
    /// y bounds at offset `n1`). `z_scales` are the residual bounds `(u', u'')`
    /// of an elastic row; zero bounds drop the part.
    pub fn new(form: &BilinearForm, n1: usize, lower: &[f64], upper: &[f64], z_scales: Option<(f64, f64)>) -> Self {
        let x_vars = form.x_vars();
        let y_vars = form.y_vars();
        let (p, m) = (x_vars.len(), y_vars.len());
        let xl: Vec<f64> = x_vars.iter().map(|&i| lower[i]).collect();
        let xd: Vec<f64> = x_vars.iter().map(|&i| upper[i] - lower[i]).collect();
        let yl: Vec<f64> = y_vars.iter().map(|&j| lower[n1 + j]).collect();
        let yd: Vec<f64> = y_vars.iter().map(|&j| upper[n1 + j] - lower[n1 + j]).collect();
        let xpos = |i: usize| x_vars.binary_search(&i).expect("x in row");
        let ypos = |j: usize| y_vars.binary_search(&j).expect("y in row");
        let mut q = vec![vec![0.0; m]; p];
        let mut a = vec![0.0; p];
        let mut b = vec![0.0; m];
        let mut c = form.constant;
        for &(i, j, v) in &form.q {
            let (li, lj) = (xpos(i), ypos(j));
            q[li][lj] += v * xd[li] * yd[lj];
            a[li] += v * yl[lj] * xd[li];
            b[lj] += v * xl[li] * yd[lj];
            c += v * xl[li] * yl[lj];
        }
        for &(i, v) in &form.a {
            let li = xpos(i);
            a[li] += v * xd[li];
            c += v * xl[li];
        }
        for &(j, v) in &form.b {
            let lj = ypos(j);
            b[lj] += v * yd[lj];
            c += v * yl[lj];
        }
        let mut z = Vec::new();
        if let Some((up, um)) = z_scales {
            if up > 0.0 {
                z.push(ZVar { part: ZPart::Plus, scale: up });
            }
            if um > 0.0 {
                z.push(ZVar { part: ZPart::Minus, scale: um });
            }
        }
        NodeRow { x_vars, y_vars, q, a, b, c, z }
    }

    pub fn num_pairs(&self) -> usize {
        self.x_vars.len() * self.y_vars.len()
    }

    pub fn num_coords(&self) -> usize {
        let (p, m) = (self.x_vars.len(), self.y_vars.len());
        p + m + p * m + self.z.len()
    }

    pub fn pair_coord(&self, li: usize, lj: usize) -> usize {
        self.x_vars.len() + self.y_vars.len() + li * self.y_vars.len() + lj
    }

    pub fn z_coord(&self, k: usize) -> usize {
        self.x_vars.len() + self.y_vars.len() + self.num_pairs() + k
    }

    /// Residual of the rescaled row at a full row point.
    pub fn residual(&self, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        let mut s = self.c;
        for (li, qi) in self.q.iter().enumerate() {
            for (lj, &v) in qi.iter().enumerate() {
                s += v * x[li] * y[lj];
            }
            s += self.a[li] * x[li];
        }
        for (lj, &v) in self.b.iter().enumerate() {
            s += v * y[lj];
        }
        for (k, zv) in self.z.iter().enumerate() {
            s += zv.coef() * z[k];
        }
        s
    }

    /// Lay out a full row point with products filled in.
    pub fn point(&self, x: &[f64], y: &[f64], w: impl Fn(usize, usize) -> f64, z: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_coords());
        out.extend_from_slice(x);
        out.extend_from_slice(y);
        for li in 0..x.len() {
            for lj in 0..y.len() {
                out.push(w(li, lj));
            }
        }
        out.extend_from_slice(z);
        out
    }

    /// Map a rescaled row point back to the node box; products follow
    /// `w = lx·ly + lx·dy·y' + ly·dx·x' + dx·dy·w'`.
    pub fn to_real(&self, pt: &[f64], n1: usize, lower: &[f64], upper: &[f64]) -> Vec<f64> {
        let (p, m) = (self.x_vars.len(), self.y_vars.len());
        let lx: Vec<f64> = self.x_vars.iter().map(|&i| lower[i]).collect();
        let dx: Vec<f64> = self.x_vars.iter().map(|&i| upper[i] - lower[i]).collect();
        let ly: Vec<f64> = self.y_vars.iter().map(|&j| lower[n1 + j]).collect();
        let dy: Vec<f64> = self.y_vars.iter().map(|&j| upper[n1 + j] - lower[n1 + j]).collect();
        let mut real = Vec::with_capacity(pt.len());
        for li in 0..p {
            real.push(lx[li] + dx[li] * pt[li]);
        }
        for lj in 0..m {
            real.push(ly[lj] + dy[lj] * pt[p + lj]);
        }
        for li in 0..p {
            for lj in 0..m {
                let w = pt[self.pair_coord(li, lj)];
                real.push(lx[li] * ly[lj] + lx[li] * dy[lj] * pt[p + lj] + ly[lj] * dx[li] * pt[li] + dx[li] * dy[lj] * w);
            }
        }
        for (k, zv) in self.z.iter().enumerate() {
            real.push(zv.scale * pt[self.z_coord(k)]);
        }
        real
    }

    /// Number of candidate pieces before any feasibility filtering.
    pub fn candidate_count(&self) -> u128 {
        let (p, m, nz) = (self.x_vars.len() as u32, self.y_vars.len() as u32, self.z.len() as u32);
        let pow = |e: u32| if e >= 100 { u128::MAX / 4 } else { 1u128 << e };
        let mut n: u128 = 0;
        if p > 0 && m > 0 {
            n = n.saturating_add((p as u128 * m as u128).saturating_mul(pow(p + m - 2 + nz)));
        }
        if nz > 0 {
            n = n.saturating_add((nz as u128).saturating_mul(pow(p + m + nz - 1)));
        }
        if m == 0 && p > 0 {
            n = n.saturating_add((p as u128).saturating_mul(pow(p - 1 + nz)));
        }
        if p == 0 && m > 0 {
            n = n.saturating_add((m as u128).saturating_mul(pow(m - 1 + nz)));
        }
        n
    }
}

/// The variables left free in a piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FreeSet {
    /// Local indices of the free pair `(x_{i0}, y_{j0})`.
    Pair(usize, usize),
    X(usize),
    Y(usize),
    Z(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixingPiece {
    pub free: FreeSet,
    /// Endpoint values of the fixed row variables; entries of free variables are NaN.
    pub x_fixed: Vec<f64>,
    pub y_fixed: Vec<f64>,
    pub z_fixed: Vec<f64>,
    /// Effective coefficients of the free pair's two-variable set.
    pub curve: Option<CanonicalCurve>,
    pub geometry: Option<CurveBoxGeometry>,
    pub cuts: Option<CutSet>,
    /// Vertices of the piece's outer approximation in rescaled row coordinates.
    pub points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Fixings {
    /// Feasible pieces; empty when no piece meets the box.
    Pieces(Vec<FixingPiece>),
    /// The row has no variables and a zero constant: it constrains nothing.
    Trivial,
    /// Too many candidates; the row keeps only its McCormick description.
    Fallback { candidates: u128 },
}

fn bits(mask: u64, k: usize) -> f64 {
    (mask >> k & 1) as f64
}

/// Enumerate the pieces of one rescaled row.
pub fn enumerate_fixings(row: &NodeRow, cap: usize) -> Fixings {
    let (p, m, nz) = (row.x_vars.len(), row.y_vars.len(), row.z.len());
    if p + m + nz == 0 {
        return if row.c.abs() <= 1e-12 { Fixings::Trivial } else { Fixings::Pieces(Vec::new()) };
    }
    let candidates = row.candidate_count();
    if candidates > cap as u128 {
        return Fixings::Fallback { candidates };
    }
    let mut pieces = Vec::new();
    for i0 in 0..p {
        for j0 in 0..m {
            let others = p + m - 2 + nz;
            for mask in 0..1u64 << others {
                let mut x = vec![f64::NAN; p];
                let mut y = vec![f64::NAN; m];
                let mut z = vec![0.0; nz];
                let mut k = 0;
                for (li, xv) in x.iter_mut().enumerate() {
                    if li != i0 {
                        *xv = bits(mask, k);
                        k += 1;
                    }
                }
                for (lj, yv) in y.iter_mut().enumerate() {
                    if lj != j0 {
                        *yv = bits(mask, k);
                        k += 1;
                    }
                }
                for zv in z.iter_mut() {
                    *zv = bits(mask, k);
                    k += 1;
                }
                if let Some(piece) = pair_piece(row, i0, j0, x, y, z) {
                    pieces.push(piece);
                }
            }
        }
    }
    for kz in 0..nz {
        let others = p + m + nz - 1;
        for mask in 0..1u64 << others {
            let x: Vec<f64> = (0..p).map(|li| bits(mask, li)).collect();
            let y: Vec<f64> = (0..m).map(|lj| bits(mask, p + lj)).collect();
            let mut z = vec![f64::NAN; nz];
            let mut k = p + m;
            for (t, zv) in z.iter_mut().enumerate() {
                if t != kz {
                    *zv = bits(mask, k);
                    k += 1;
                }
            }
            let mut zz = z.clone();
            zz[kz] = 0.0;
            let rest = row.residual(&x, &y, &zz);
            let v = -rest / row.z[kz].coef();
            if (-1e-12..=1.0 + 1e-12).contains(&v) {
                zz[kz] = v.clamp(0.0, 1.0);
                let pt = row.point(&x, &y, |li, lj| x[li] * y[lj], &zz);
                pieces.push(FixingPiece {
                    free: FreeSet::Z(kz),
                    x_fixed: x,
                    y_fixed: y,
                    z_fixed: z,
                    curve: None,
                    geometry: None,
                    cuts: None,
                    points: vec![pt],
                });
            }
        }
    }
    if m == 0 {
        for i0 in 0..p {
            isolated(row, true, i0, &mut pieces);
        }
    }
    if p == 0 {
        for j0 in 0..m {
            isolated(row, false, j0, &mut pieces);
        }
    }
    Fixings::Pieces(pieces)
}

/// Pieces for a variable with no partner on the other side of the row.
fn isolated(row: &NodeRow, is_x: bool, t0: usize, pieces: &mut Vec<FixingPiece>) {
    let (p, m, nz) = (row.x_vars.len(), row.y_vars.len(), row.z.len());
    let n_side = if is_x { p } else { m };
    let others = n_side - 1 + nz;
    for mask in 0..1u64 << others {
        let mut side = vec![f64::NAN; n_side];
        let mut k = 0;
        for (t, sv) in side.iter_mut().enumerate() {
            if t != t0 {
                *sv = bits(mask, k);
                k += 1;
            }
        }
        let z: Vec<f64> = (0..nz).map(|t| bits(mask, k + t)).collect();
        let coef = if is_x { row.a[t0] } else { row.b[t0] };
        let mut probe = side.clone();
        probe[t0] = 0.0;
        let rest = if is_x { row.residual(&probe, &[], &z) } else { row.residual(&[], &probe, &z) };
        let values: Vec<f64> = if coef.abs() > 1e-14 {
            let v = -rest / coef;
            if (-1e-12..=1.0 + 1e-12).contains(&v) {
                vec![v.clamp(0.0, 1.0)]
            } else {
                vec![]
            }
        } else if rest.abs() <= 1e-12 {
            vec![0.0, 1.0]
        } else {
            vec![]
        };
        if values.is_empty() {
            continue;
        }
        let points = values
            .iter()
            .map(|&v| {
                let mut full = side.clone();
                full[t0] = v;
                if is_x {
                    row.point(&full, &[], |_, _| 0.0, &z)
                } else {
                    row.point(&[], &full, |_, _| 0.0, &z)
                }
            })
            .collect();
        let (x_fixed, y_fixed) = if is_x { (side, vec![]) } else { (vec![], side) };
        pieces.push(FixingPiece {
            free: if is_x { FreeSet::X(t0) } else { FreeSet::Y(t0) },
            x_fixed,
            y_fixed,
            z_fixed: z,
            curve: None,
            geometry: None,
            cuts: None,
            points,
        });
    }
}

impl FixingPiece {
    /// Rescaled row point for free-pair values `(u, v)` with product `w`.
    pub fn lift_uvw(&self, row: &NodeRow, [u, v, w]: [f64; 3]) -> Vec<f64> {
        let FreeSet::Pair(i0, j0) = self.free else { panic!("lift_uvw on a piece without a free pair") };
        let mut x = self.x_fixed.clone();
        let mut y = self.y_fixed.clone();
        x[i0] = u;
        y[j0] = v;
        row.point(&x, &y, |li, lj| if li == i0 && lj == j0 { w } else { x[li] * y[lj] }, &self.z_fixed)
    }

    /// Rescaled row point for a point of the curve's plane.
    pub fn lift_plane(&self, row: &NodeRow, p: [f64; 2]) -> Option<Vec<f64>> {
        self.curve.map(|c| self.lift_uvw(row, c.lift(p)))
    }
}

/// Effective coefficients `(q, a, b, c)` of the free pair under an assignment.
pub fn effective_coefficients(row: &NodeRow, i0: usize, j0: usize, x: &[f64], y: &[f64], z: &[f64]) -> (f64, f64, f64, f64) {
    let q = row.q[i0][j0];
    let mut a = row.a[i0];
    let mut b = row.b[j0];
    let mut c = row.c;
    for (lj, &yv) in y.iter().enumerate() {
        if lj != j0 {
            a += row.q[i0][lj] * yv;
            c += row.b[lj] * yv;
        }
    }
    for (li, &xv) in x.iter().enumerate() {
        if li != i0 {
            b += row.q[li][j0] * xv;
            c += row.a[li] * xv;
            for (lj, &yv) in y.iter().enumerate() {
                if lj != j0 {
                    c += row.q[li][lj] * xv * yv;
                }
            }
        }
    }
    for (k, zv) in row.z.iter().enumerate() {
        c += zv.coef() * z[k];
    }
    (q, a, b, c)
}

fn pair_piece(row: &NodeRow, i0: usize, j0: usize, x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Option<FixingPiece> {
    let (q, a, b, c) = effective_coefficients(row, i0, j0, &x, &y, &z);
    let curve = canonicalize(q, a, b, c).ok()?;
    let (uvw, geometry, cuts) = match curve.kind {
        CurveKind::Product => (vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 1.0]], None, None),
        CurveKind::Line => {
            let g = intersect_box(&curve);
            if g.is_empty() {
                return None;
            }
            let pts = g.segments.iter().flatten().map(|p| curve.lift(*p)).collect();
            (pts, Some(g), None)
        }
        _ => {
            let g = intersect_box(&curve);
            if g.is_empty() {
                return None;
            }
            let cs = outer_approximate(&g);
            let pts = cs.polygon.iter().map(|p| curve.lift(*p)).collect();
            (pts, Some(g), Some(cs))
        }
    };
    let mut piece = FixingPiece {
        free: FreeSet::Pair(i0, j0),
        x_fixed: x,
        y_fixed: y,
        z_fixed: z,
        curve: Some(curve),
        geometry,
        cuts,
        points: Vec::new(),
    };
    piece.points = uvw.iter().map(|&t| piece.lift_uvw(row, t)).collect();
    Some(piece)
}
