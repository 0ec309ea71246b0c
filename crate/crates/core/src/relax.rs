//! Per-node LP relaxations in `(x, y, w, z)` plus hull-block weights.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hull::{enumerate_fixings, row_hull_points, FixingPiece, Fixings, NodeRow, ZPart, DEFAULT_PIECE_CAP};
use crate::interval::Interval;
use crate::lp::{solve_lp_with, LpOptions, LpProblem, LpStatus, RowSense};
use crate::model::{BbpInstance, BilinearForm, InteractionGraph};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relaxation {
    McCormick,
    #[default]
    Hull,
}

/// How a row's hull enters the LP.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockEncoding {
    /// One weight per distinct vertex of the pieces' outer approximations.
    #[default]
    Vertex,
    /// Weighted piece copies constrained by homogenized cuts.
    Disjunctive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxOptions {
    pub relaxation: Relaxation,
    pub encoding: BlockEncoding,
    pub piece_cap: usize,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self { relaxation: Relaxation::Hull, encoding: BlockEncoding::Vertex, piece_cap: DEFAULT_PIECE_CAP }
    }
}

/// `x_coef·x + y_coef·y + w_coef·w (sense) rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McCormickCut {
    pub x_coef: f64,
    pub y_coef: f64,
    pub w_coef: f64,
    pub sense: RowSense,
    pub rhs: f64,
}

/// The four envelope inequalities of `w = x·y` over `[xl, xu] × [yl, yu]`.
pub fn mccormick_cuts(xl: f64, xu: f64, yl: f64, yu: f64) -> [McCormickCut; 4] {
    let cut = |x_coef, y_coef, sense, rhs| McCormickCut { x_coef, y_coef, w_coef: 1.0, sense, rhs };
    [
        cut(-yl, -xl, RowSense::Ge, -xl * yl),
        cut(-yu, -xu, RowSense::Ge, -xu * yu),
        cut(-yl, -xu, RowSense::Le, -xu * yl),
        cut(-yu, -xl, RowSense::Le, -xl * yu),
    ]
}

/// Residual bounds `(u', u'')` of an elastic row over a box: the positive and
/// negative parts of the row's interval range.
pub fn tighten_z_bounds(form: &BilinearForm, n1: usize, lower: &[f64], upper: &[f64]) -> (f64, f64) {
    let n2 = lower.len() - n1;
    let xb: Vec<Interval> = (0..n1).map(|i| Interval::new(lower[i], upper[i])).collect();
    let yb: Vec<Interval> = (0..n2).map(|j| Interval::new(lower[n1 + j], upper[n1 + j])).collect();
    let r = form.range(&xb, &yb);
    (r.hi.max(0.0), (-r.lo).max(0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub enum RowBlock {
    Hull { row: NodeRow, pieces: Vec<FixingPiece>, columns: usize },
    Fallback { candidates: u128 },
    Trivial,
    /// McCormick mode: no block.
    None,
}

#[derive(Clone, Debug)]
pub struct NodeRelaxation {
    pub lp: LpProblem,
    pub x_col: Vec<usize>,
    pub y_col: Vec<usize>,
    pub w_col: BTreeMap<(usize, usize), usize>,
    /// `(z', z'')` columns of each elastic row.
    pub z_col: Vec<Option<(usize, usize)>>,
    pub objective_constant: f64,
    pub blocks: Vec<RowBlock>,
    /// Set when assembly already proved the node empty.
    pub infeasible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxSolution {
    pub feasible: bool,
    /// `+inf` when infeasible.
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub w: BTreeMap<(usize, usize), f64>,
    pub iterations: usize,
}

impl NodeRelaxation {
    pub fn solve(&self, options: &LpOptions) -> Result<RelaxSolution> {
        let infeasible = || RelaxSolution {
            feasible: false,
            value: f64::INFINITY,
            x: Vec::new(),
            y: Vec::new(),
            w: BTreeMap::new(),
            iterations: 0,
        };
        if self.infeasible {
            return Ok(infeasible());
        }
        let res = solve_lp_with(&self.lp, options)?;
        match res.status {
            LpStatus::Optimal => Ok(RelaxSolution {
                feasible: true,
                value: res.objective + self.objective_constant,
                x: self.x_col.iter().map(|&c| res.values[c]).collect(),
                y: self.y_col.iter().map(|&c| res.values[c]).collect(),
                w: self.w_col.iter().map(|(&k, &c)| (k, res.values[c])).collect(),
                iterations: res.iterations,
            }),
            _ => Ok(RelaxSolution { iterations: res.iterations, ..infeasible() }),
        }
    }

    /// The assembled LP as a JSON document.
    pub fn dump(&self) -> String {
        serde_json::to_string_pretty(&self.lp).expect("LP serializes")
    }

    pub fn hull_columns(&self) -> usize {
        self.blocks.iter().map(|b| if let RowBlock::Hull { columns, .. } = b { *columns } else { 0 }).sum()
    }
}

fn product_range(xl: f64, xu: f64, yl: f64, yu: f64) -> (f64, f64) {
    let r = Interval::new(xl, xu) * Interval::new(yl, yu);
    (r.lo, r.hi)
}

/// Assemble the relaxation of `inst` over the node box `[lower, upper]`.
pub fn build_node_relaxation(
    inst: &BbpInstance,
    graph: &InteractionGraph,
    lower: &[f64],
    upper: &[f64],
    options: &RelaxOptions,
) -> NodeRelaxation {
    let n1 = inst.n1;
    let mut lp = LpProblem::new();
    let x_col: Vec<usize> = (0..n1).map(|i| lp.add_var(lower[i], upper[i], 0.0)).collect();
    let y_col: Vec<usize> = (0..inst.n2).map(|j| lp.add_var(lower[n1 + j], upper[n1 + j], 0.0)).collect();
    let pairs = match options.relaxation {
        Relaxation::Hull => graph.product_pairs(),
        Relaxation::McCormick => graph.edges.clone(),
    };
    let mut w_col = BTreeMap::new();
    for &(i, j) in &pairs {
        let (xl, xu, yl, yu) = (lower[i], upper[i], lower[n1 + j], upper[n1 + j]);
        let (lo, hi) = product_range(xl, xu, yl, yu);
        let col = lp.add_var(lo, hi, 0.0);
        w_col.insert((i, j), col);
        for cut in mccormick_cuts(xl, xu, yl, yu) {
            lp.add_row(vec![(x_col[i], cut.x_coef), (y_col[j], cut.y_coef), (col, cut.w_coef)], cut.sense, cut.rhs);
        }
    }
    for &(i, j, v) in &inst.objective.q {
        lp.objective[w_col[&(i, j)]] += v;
    }
    for &(i, v) in &inst.objective.a {
        lp.objective[x_col[i]] += v;
    }
    for &(j, v) in &inst.objective.b {
        lp.objective[y_col[j]] += v;
    }

    let mut infeasible = false;
    let mut z_col = Vec::with_capacity(inst.rows.len());
    let mut z_scales = Vec::with_capacity(inst.rows.len());
    for row in &inst.rows {
        let form = &row.form;
        let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(form.q.len() + form.a.len() + form.b.len() + 2);
        coeffs.extend(form.q.iter().map(|&(i, j, v)| (w_col[&(i, j)], v)));
        coeffs.extend(form.a.iter().map(|&(i, v)| (x_col[i], v)));
        coeffs.extend(form.b.iter().map(|&(j, v)| (y_col[j], v)));
        if row.elastic {
            let (up, um) = tighten_z_bounds(form, n1, lower, upper);
            let zp = lp.add_var(0.0, up, 1.0);
            let zm = lp.add_var(0.0, um, 1.0);
            coeffs.push((zp, -1.0));
            coeffs.push((zm, 1.0));
            z_col.push(Some((zp, zm)));
            z_scales.push(Some((up, um)));
        } else {
            let xb: Vec<Interval> = (0..n1).map(|i| Interval::new(lower[i], upper[i])).collect();
            let yb: Vec<Interval> = (0..inst.n2).map(|j| Interval::new(lower[n1 + j], upper[n1 + j])).collect();
            let r = form.range(&xb, &yb);
            if r.lo > 1e-9 || r.hi < -1e-9 {
                infeasible = true;
            }
            z_col.push(None);
            z_scales.push(None);
        }
        lp.add_row(coeffs, RowSense::Eq, -form.constant);
    }

    let mut blocks = Vec::with_capacity(inst.rows.len());
    for (k, row) in inst.rows.iter().enumerate() {
        if options.relaxation == Relaxation::McCormick {
            blocks.push(RowBlock::None);
            continue;
        }
        let node_row = NodeRow::new(&row.form, n1, lower, upper, z_scales[k]);
        match enumerate_fixings(&node_row, options.piece_cap) {
            Fixings::Trivial => blocks.push(RowBlock::Trivial),
            Fixings::Fallback { candidates } => blocks.push(RowBlock::Fallback { candidates }),
            Fixings::Pieces(pieces) => {
                if pieces.is_empty() {
                    infeasible = true;
                }
                let coord_cols = coordinate_columns(&node_row, &x_col, &y_col, &w_col, z_col[k]);
                let columns = match options.encoding {
                    BlockEncoding::Vertex => add_vertex_block(&mut lp, &node_row, &pieces, n1, lower, upper, &coord_cols),
                    BlockEncoding::Disjunctive => {
                        add_disjunctive_block(&mut lp, &node_row, &pieces, n1, lower, upper, &coord_cols)
                    }
                };
                blocks.push(RowBlock::Hull { row: node_row, pieces, columns });
            }
        }
    }
    NodeRelaxation { lp, x_col, y_col, w_col, z_col, objective_constant: inst.objective.constant, blocks, infeasible }
}

fn coordinate_columns(
    row: &NodeRow,
    x_col: &[usize],
    y_col: &[usize],
    w_col: &BTreeMap<(usize, usize), usize>,
    z: Option<(usize, usize)>,
) -> Vec<usize> {
    let mut cols = Vec::with_capacity(row.num_coords());
    cols.extend(row.x_vars.iter().map(|&i| x_col[i]));
    cols.extend(row.y_vars.iter().map(|&j| y_col[j]));
    for &i in &row.x_vars {
        for &j in &row.y_vars {
            cols.push(w_col[&(i, j)]);
        }
    }
    for zv in &row.z {
        let (zp, zm) = z.expect("residual parts only on elastic rows");
        cols.push(if zv.part == ZPart::Plus { zp } else { zm });
    }
    cols
}

fn add_vertex_block(
    lp: &mut LpProblem,
    row: &NodeRow,
    pieces: &[FixingPiece],
    n1: usize,
    lower: &[f64],
    upper: &[f64],
    coord_cols: &[usize],
) -> usize {
    let points = row_hull_points(row, pieces, n1, lower, upper);
    if points.is_empty() {
        return 0;
    }
    let mu: Vec<usize> = points.iter().map(|_| lp.add_var(0.0, 1.0, 0.0)).collect();
    lp.add_row(mu.iter().map(|&c| (c, 1.0)).collect(), RowSense::Eq, 1.0);
    for (t, &col) in coord_cols.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> =
            mu.iter().zip(&points).filter(|(_, p)| p[t].abs() > 1e-15).map(|(&c, p)| (c, p[t])).collect();
        coeffs.push((col, -1.0));
        lp.add_row(coeffs, RowSense::Eq, 0.0);
    }
    mu.len()
}

fn add_disjunctive_block(
    lp: &mut LpProblem,
    row: &NodeRow,
    pieces: &[FixingPiece],
    n1: usize,
    lower: &[f64],
    upper: &[f64],
    coord_cols: &[usize],
) -> usize {
    let ncoord = coord_cols.len();
    let mut agg: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ncoord];
    let mut weights = Vec::new();
    let mut columns = 0;
    for piece in pieces {
        let polygon = piece.cuts.as_ref().map(|c| &c.polygon);
        match (polygon, piece.cuts.as_ref()) {
            (Some(poly), Some(cs)) if poly.len() >= 3 => {
                let lam = lp.add_var(0.0, 1.0, 0.0);
                let bound = |k: usize| {
                    let lo = poly.iter().map(|p| p[k]).fold(0.0f64, f64::min);
                    let hi = poly.iter().map(|p| p[k]).fold(0.0f64, f64::max);
                    (lo, hi)
                };
                let (b0, b1) = (bound(0), bound(1));
                let xi0 = lp.add_var(b0.0, b0.1, 0.0);
                let xi1 = lp.add_var(b1.0, b1.1, 0.0);
                columns += 3;
                for tc in &cs.cuts {
                    lp.add_row(
                        vec![(xi0, tc.cut.coef[0]), (xi1, tc.cut.coef[1]), (lam, -tc.cut.rhs)],
                        RowSense::Ge,
                        0.0,
                    );
                }
                let at = |p: [f64; 2]| row.to_real(&piece.lift_plane(row, p).expect("curved piece"), n1, lower, upper);
                let (r0, r1, r2) = (at([0.0, 0.0]), at([1.0, 0.0]), at([0.0, 1.0]));
                for t in 0..ncoord {
                    agg[t].push((lam, r0[t]));
                    agg[t].push((xi0, r1[t] - r0[t]));
                    agg[t].push((xi1, r2[t] - r0[t]));
                }
                weights.push(lam);
            }
            _ => {
                for pt in &piece.points {
                    let real = row.to_real(pt, n1, lower, upper);
                    let mu = lp.add_var(0.0, 1.0, 0.0);
                    columns += 1;
                    for t in 0..ncoord {
                        agg[t].push((mu, real[t]));
                    }
                    weights.push(mu);
                }
            }
        }
    }
    if weights.is_empty() {
        return 0;
    }
    lp.add_row(weights.iter().map(|&c| (c, 1.0)).collect(), RowSense::Eq, 1.0);
    for (t, mut coeffs) in agg.into_iter().enumerate() {
        coeffs.retain(|(_, v)| v.abs() > 1e-15);
        coeffs.push((coord_cols[t], -1.0));
        lp.add_row(coeffs, RowSense::Eq, 0.0);
    }
    columns
}
