//! Choosing the branching variable and the point at which to split it.

use serde::{Deserialize, Serialize};

use crate::hull::{
    convex_hull, enumerate_fixings, shoelace, CanonicalCurve, CurveKind, FixingPiece, Fixings, FreeSet, GeometryCase,
    NodeRow,
};
use crate::model::BbpInstance;
use crate::relax::{tighten_z_bounds, RelaxSolution, RowBlock};

/// Variables narrower than this are never branched on.
pub const MIN_WIDTH: f64 = 1e-9;

/// Which variable set is branched on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    X,
    Y,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchRule {
    #[default]
    #[serde(rename = "alg1")]
    Alg1,
    #[serde(rename = "gap-maxdev")]
    GapMaxDev,
    #[serde(rename = "gap-incumbent")]
    GapIncumbent,
    #[serde(rename = "gap-bisect")]
    GapBisect,
    #[serde(rename = "range-bisect")]
    RangeBisect,
}

impl BranchRule {
    pub const ALL: [BranchRule; 5] =
        [Self::Alg1, Self::GapMaxDev, Self::GapIncumbent, Self::GapBisect, Self::RangeBisect];

    pub fn name(self) -> &'static str {
        match self {
            Self::Alg1 => "alg1",
            Self::GapMaxDev => "gap-maxdev",
            Self::GapIncumbent => "gap-incumbent",
            Self::GapBisect => "gap-bisect",
            Self::RangeBisect => "range-bisect",
        }
    }
}

impl std::str::FromStr for BranchRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown branching rule `{s}`"))
    }
}

/// How the branch point of a decision was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RuleTag {
    Alg1,
    Bisection,
    MaxDeviation,
    Incumbent,
}

/// Point rules usable after a variable has been selected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointRule {
    Bisection,
    MaxDeviation,
    Incumbent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchParams {
    pub rule: BranchRule,
    pub side: Side,
    pub k: usize,
    pub eps1: f64,
    pub eps2: f64,
    pub gamma: f64,
}

impl Default for BranchParams {
    fn default() -> Self {
        Self { rule: BranchRule::Alg1, side: Side::X, k: 8, eps1: 0.01, eps2: 1.0 / 16.0, gamma: 2.0 / 3.0 }
    }
}

/// One disjunction seen by the rule: a variable, a preferred interval in its
/// real domain and the area of the disjunction's outer approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjunctionStat {
    pub var: usize,
    pub lo: f64,
    pub hi: f64,
    pub area: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchDecision {
    pub side: Side,
    pub var: usize,
    pub point: f64,
    pub tag: RuleTag,
}

/// Preferred interval and area of a curve in the unit box, in rescaled
/// coordinates of the `side` variable. `None` when branching cannot cut the
/// set (empty, a single line, or a free product).
pub fn analyze_curve(curve: &CanonicalCurve, side: Side, gamma: f64) -> Option<(f64, f64, f64)> {
    if matches!(curve.kind, CurveKind::Line | CurveKind::Product) {
        return None;
    }
    let geom = crate::hull::intersect_box(curve);
    // Plane point -> coordinate of the branching variable.
    let coord = |p: [f64; 2]| match (side, curve.kind) {
        (Side::X, _) => p[0],
        (Side::Y, CurveKind::Parabola { .. }) => curve.v_of_u(p[0]),
        (Side::Y, _) => p[1],
    };
    match geom.case {
        GeometryCase::Empty => None,
        GeometryCase::DegenerateLines => {
            if geom.segments.len() < 2 {
                return None;
            }
            let CurveKind::Hyperbola { r, s, .. } = curve.kind else { return None };
            let pts: Vec<[f64; 2]> = geom.segments.iter().flatten().copied().collect();
            let t = if side == Side::X { r } else { s };
            Some((t, t, shoelace(&convex_hull(&pts))))
        }
        GeometryCase::TwoBranches => {
            let ranges: Vec<(f64, f64)> = geom
                .arcs
                .iter()
                .map(|arc| {
                    let (e0, e1) = (coord(geom.a(arc)), coord(geom.b(arc)));
                    (e0.min(e1), e0.max(e1))
                })
                .collect();
            let lo = ranges[0].1.min(ranges[1].1);
            let hi = ranges[0].0.max(ranges[1].0);
            let pts: Vec<[f64; 2]> = geom.arcs.iter().flat_map(|arc| [geom.a(arc), geom.b(arc)]).collect();
            Some((lo.min(hi), hi.max(lo), shoelace(&convex_hull(&pts))))
        }
        GeometryCase::OneBranch => {
            let arc = &geom.arcs[0];
            let (xa, xb, xc) = (coord(geom.a(arc)), coord(geom.b(arc)), coord(geom.c(arc)));
            let l = xc - gamma * (xc - xa);
            let u = xc + gamma * (xb - xc);
            let cs = crate::hull::outer_approximate(&geom);
            Some((l.min(u), l.max(u), shoelace(&cs.polygon)))
        }
    }
}

/// The statistic of one fixing piece, with its interval mapped to the real
/// domain of the branching variable.
pub fn analyze_disjunction(
    piece: &FixingPiece,
    row: &NodeRow,
    n1: usize,
    lower: &[f64],
    upper: &[f64],
    side: Side,
    gamma: f64,
) -> Option<DisjunctionStat> {
    let FreeSet::Pair(i0, j0) = piece.free else { return None };
    let (lo, hi, area) = analyze_curve(piece.curve.as_ref()?, side, gamma)?;
    let (var, offset) = match side {
        Side::X => (row.x_vars[i0], 0),
        Side::Y => (row.y_vars[j0], n1),
    };
    let (l, d) = (lower[offset + var], upper[offset + var] - lower[offset + var]);
    Some(DisjunctionStat { var, lo: l + d * lo, hi: l + d * hi, area })
}

/// Statistics of every piece at a node. Hull blocks are reused; other rows
/// are enumerated on the spot.
pub fn node_stats(
    inst: &BbpInstance,
    lower: &[f64],
    upper: &[f64],
    blocks: &[RowBlock],
    piece_cap: usize,
    side: Side,
    gamma: f64,
) -> Vec<DisjunctionStat> {
    let n1 = inst.n1;
    let mut stats = Vec::new();
    for (k, row) in inst.rows.iter().enumerate() {
        let mut push = |node_row: &NodeRow, pieces: &[FixingPiece]| {
            stats.extend(pieces.iter().filter_map(|p| analyze_disjunction(p, node_row, n1, lower, upper, side, gamma)));
        };
        match blocks.get(k) {
            Some(RowBlock::Hull { row, pieces, .. }) => push(row, pieces),
            Some(RowBlock::Fallback { .. }) | Some(RowBlock::Trivial) => {}
            _ => {
                let z = row.elastic.then(|| tighten_z_bounds(&row.form, n1, lower, upper));
                let node_row = NodeRow::new(&row.form, n1, lower, upper, z);
                if let Fixings::Pieces(pieces) = enumerate_fixings(&node_row, piece_cap) {
                    push(&node_row, &pieces);
                }
            }
        }
    }
    stats
}

/// Cell accumulation, relevance filter and argmax over `(variable, cell)`.
/// Falls back to bisecting the widest variable.
pub fn algorithm1(stats: &[DisjunctionStat], domains: &[(f64, f64)], side: Side, params: &BranchParams) -> Option<BranchDecision> {
    let n = domains.len();
    let k = params.k.max(1);
    let mut area = vec![vec![0.0; k]; n];
    let mut count = vec![0usize; n];
    let cell = |i: usize, c: usize| {
        let (lo, hi) = domains[i];
        let w = (hi - lo) / k as f64;
        (lo + c as f64 * w, if c + 1 == k { hi } else { lo + (c + 1) as f64 * w })
    };
    for st in stats {
        let i = st.var;
        if i >= n || domains[i].1 - domains[i].0 <= MIN_WIDTH {
            continue;
        }
        count[i] += 1;
        for c in 0..k {
            let (a, b) = cell(i, c);
            if st.lo.max(a) <= st.hi.min(b) {
                area[i][c] += st.area;
            }
        }
    }
    let total: usize = count.iter().sum();
    let mut best: Option<(usize, usize, f64)> = None;
    if total > 0 {
        for i in 0..n {
            if (count[i] as f64) / (total as f64) < params.eps1 {
                continue;
            }
            for (c, &a) in area[i].iter().enumerate() {
                if best.is_none_or(|(_, _, b)| a > b) {
                    best = Some((i, c, a));
                }
            }
        }
    }
    match best {
        Some((i, c, a)) if a >= params.eps2 => {
            let (lo, hi) = cell(i, c);
            Some(BranchDecision { side, var: i, point: 0.5 * (lo + hi), tag: RuleTag::Alg1 })
        }
        _ => {
            let i = widest(domains)?;
            let (lo, hi) = domains[i];
            Some(BranchDecision { side, var: i, point: 0.5 * (lo + hi), tag: RuleTag::Bisection })
        }
    }
}

/// Widest variable above [`MIN_WIDTH`], lowest index on ties.
pub fn widest(domains: &[(f64, f64)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &(lo, hi)) in domains.iter().enumerate() {
        let w = hi - lo;
        if w > MIN_WIDTH && best.is_none_or(|(_, b)| w > b) {
            best = Some((i, w));
        }
    }
    best.map(|(i, _)| i)
}

/// Variable on `side` of the edge with the largest `|w - x·y|`; the widest
/// variable when every error vanishes.
pub fn gap_error_select(relax: &RelaxSolution, domains: &[(f64, f64)], side: Side) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (&(i, j), &w) in &relax.w {
        let err = (w - relax.x[i] * relax.y[j]).abs();
        let v = if side == Side::X { i } else { j };
        if err <= 1e-12 || domains[v].1 - domains[v].0 <= MIN_WIDTH {
            continue;
        }
        if best.is_none_or(|(_, b)| err > b) {
            best = Some((v, err));
        }
    }
    best.map(|(v, _)| v).or_else(|| widest(domains))
}

/// Split point for a selected variable on `[lo, hi]`.
pub fn branch_point(rule: PointRule, lo: f64, hi: f64, relax_value: f64, incumbent: Option<f64>) -> (f64, RuleTag) {
    let margin = 1e-6 * (hi - lo);
    let maxdev = || relax_value.clamp(lo + margin, hi - margin);
    match rule {
        PointRule::Bisection => (0.5 * (lo + hi), RuleTag::Bisection),
        PointRule::MaxDeviation => (maxdev(), RuleTag::MaxDeviation),
        PointRule::Incumbent => match incumbent {
            Some(v) if v > lo + margin && v < hi - margin => (v, RuleTag::Incumbent),
            _ => (maxdev(), RuleTag::MaxDeviation),
        },
    }
}

/// Everything a rule may look at when deciding at a node.
pub struct NodeView<'a> {
    pub inst: &'a BbpInstance,
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub blocks: &'a [RowBlock],
    pub piece_cap: usize,
    pub relax: &'a RelaxSolution,
    /// Incumbent `(x, y)`.
    pub incumbent: Option<(&'a [f64], &'a [f64])>,
}

/// Domains of the variables on `side`.
pub fn side_domains(n1: usize, lower: &[f64], upper: &[f64], side: Side) -> Vec<(f64, f64)> {
    let range = match side {
        Side::X => 0..n1,
        Side::Y => n1..lower.len(),
    };
    range.map(|t| (lower[t], upper[t])).collect()
}

/// Apply `params.rule` at a node. `None` when no variable can be split.
pub fn decide(params: &BranchParams, view: &NodeView) -> Option<BranchDecision> {
    let side = params.side;
    let domains = side_domains(view.inst.n1, view.lower, view.upper, side);
    let point_rule = match params.rule {
        BranchRule::Alg1 => {
            let stats = node_stats(view.inst, view.lower, view.upper, view.blocks, view.piece_cap, side, params.gamma);
            return algorithm1(&stats, &domains, side, params);
        }
        BranchRule::RangeBisect => {
            let var = widest(&domains)?;
            let (lo, hi) = domains[var];
            return Some(BranchDecision { side, var, point: 0.5 * (lo + hi), tag: RuleTag::Bisection });
        }
        BranchRule::GapMaxDev => PointRule::MaxDeviation,
        BranchRule::GapIncumbent => PointRule::Incumbent,
        BranchRule::GapBisect => PointRule::Bisection,
    };
    let var = gap_error_select(view.relax, &domains, side)?;
    let (lo, hi) = domains[var];
    let (values, inc) = match side {
        Side::X => (&view.relax.x, view.incumbent.map(|(x, _)| x[var])),
        Side::Y => (&view.relax.y, view.incumbent.map(|(_, y)| y[var])),
    };
    let (point, tag) = branch_point(point_rule, lo, hi, values[var], inc);
    Some(BranchDecision { side, var, point, tag })
}
