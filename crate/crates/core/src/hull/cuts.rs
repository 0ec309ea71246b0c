//! Certified polyhedral outer approximations of a curve inside the unit box.

use serde::Serialize;

use super::curve::CurveKind;
use super::geometry::{convex_hull, Arc, CurveBoxGeometry};

/// Minimum admissible slack of a unit-normal cut over the exact set.
pub const CUT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CutTag {
    Chord,
    Tangent,
    Box,
    McCormick,
}

/// `coef · p >= rhs` in the curve's plane coordinates, with `|coef| = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cut2 {
    pub coef: [f64; 2],
    pub rhs: f64,
}

impl Cut2 {
    pub fn new(coef: [f64; 2], rhs: f64) -> Self {
        let n = coef[0].hypot(coef[1]);
        Self { coef: [coef[0] / n, coef[1] / n], rhs: rhs / n }
    }

    pub fn slack(&self, p: [f64; 2]) -> f64 {
        self.coef[0] * p[0] + self.coef[1] * p[1] - self.rhs
    }

    /// The cut whose boundary passes through `p` and `q`, keeping the left
    /// side of the direction `p -> q`.
    pub fn through(p: [f64; 2], q: [f64; 2]) -> Self {
        let coef = [-(q[1] - p[1]), q[0] - p[0]];
        Self::new(coef, coef[0] * p[0] + coef[1] * p[1])
    }
}

/// Smallest slack over the set and a point attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub min_slack: f64,
    pub witness: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TaggedCut {
    pub cut: Cut2,
    pub tag: CutTag,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutSet {
    /// Counter-clockwise vertices of the approximating polygon.
    pub polygon: Vec<[f64; 2]>,
    pub cuts: Vec<TaggedCut>,
    /// Set when some arc needed its bounding rectangle instead of tangents.
    pub fallback: bool,
}

fn arc_minimum(geom: &CurveBoxGeometry, arc: &Arc, cut: &Cut2) -> Certificate {
    let [c0, c1] = cut.coef;
    let mut cands = vec![arc.u0, arc.u1];
    match geom.curve.kind {
        // c0 + c1·g'(u) = 0 with g'(u) = -tau / (u - r)²
        CurveKind::Hyperbola { r, tau, .. } if c0 != 0.0 => {
            let d2 = c1 * tau / c0;
            if d2 > 0.0 {
                cands.push(r + f64::from(arc.side) * d2.sqrt());
            }
        }
        // c0 + c1·(alpha + 2·beta·u) = 0
        CurveKind::Parabola { alpha, beta } if c1 != 0.0 && beta != 0.0 => {
            cands.push((-c0 / c1 - alpha) / (2.0 * beta));
        }
        _ => {}
    }
    let mut best = Certificate { min_slack: f64::INFINITY, witness: [f64::NAN; 2] };
    for u in cands {
        if u >= arc.u0 && u <= arc.u1 {
            let p = geom.point(u);
            let s = cut.slack(p);
            if s < best.min_slack {
                best = Certificate { min_slack: s, witness: p };
            }
        }
    }
    best
}

/// Minimize the cut's slack over the exact set by a 1-D scan of each arc
/// (closed-form stationary points plus endpoints) and each segment endpoint.
pub fn min_slack(geom: &CurveBoxGeometry, cut: &Cut2) -> Certificate {
    let mut best = Certificate { min_slack: f64::INFINITY, witness: [f64::NAN; 2] };
    for arc in &geom.arcs {
        let c = arc_minimum(geom, arc, cut);
        if c.min_slack < best.min_slack {
            best = c;
        }
    }
    for seg in &geom.segments {
        for &p in seg {
            let s = cut.slack(p);
            if s < best.min_slack {
                best = Certificate { min_slack: s, witness: p };
            }
        }
    }
    best
}

/// Accept the cut iff its slack over the exact set is at least `-CUT_TOL`.
pub fn validate_cut(geom: &CurveBoxGeometry, cut: &Cut2) -> Result<Certificate, Certificate> {
    let c = min_slack(geom, cut);
    if c.min_slack >= -CUT_TOL {
        Ok(c)
    } else {
        Err(c)
    }
}

fn tangent_meet(geom: &CurveBoxGeometry, ua: f64, ub: f64) -> Option<[f64; 2]> {
    let (ga, gb) = (geom.curve.g(ua), geom.curve.g(ub));
    let (da, db) = (geom.curve.dg(ua), geom.curve.dg(ub));
    let den = da - db;
    if den.abs() <= 1e-12 * (1.0 + da.abs().max(db.abs())) {
        return None;
    }
    let s = (gb - ga + da * ua - db * ub) / den;
    let p = [s, ga + da * (s - ua)];
    (p[0].is_finite() && p[1].is_finite()).then_some(p)
}

fn edge_cuts(poly: &[[f64; 2]]) -> Vec<Cut2> {
    match poly.len() {
        0 | 1 => Vec::new(),
        2 => {
            let (p, q) = (poly[0], poly[1]);
            vec![Cut2::through(p, q), Cut2::through(q, p)]
        }
        n => (0..n).map(|k| Cut2::through(poly[k], poly[(k + 1) % n])).collect(),
    }
}

/// Chord plus tangents at both endpoints and at the slope-matched point.
fn tangent_polygon(geom: &CurveBoxGeometry, arc: &Arc) -> Vec<[f64; 2]> {
    let (a, b) = (geom.a(arc), geom.b(arc));
    if arc.u1 - arc.u0 <= 1e-12 {
        return vec![a];
    }
    let uc = geom.c_u(arc);
    let mut pts = vec![a, b];
    let inner = uc - arc.u0 > 1e-9 && arc.u1 - uc > 1e-9;
    if inner {
        pts.extend(tangent_meet(geom, arc.u0, uc));
        pts.extend(tangent_meet(geom, uc, arc.u1));
    } else {
        pts.extend(tangent_meet(geom, arc.u0, arc.u1));
    }
    convex_hull(&pts)
}

fn bounding_rectangle(geom: &CurveBoxGeometry, arc: &Arc) -> Vec<[f64; 2]> {
    let mut gs = vec![geom.curve.g(arc.u0), geom.curve.g(arc.u1)];
    if let CurveKind::Parabola { alpha, beta } = geom.curve.kind {
        let u = -alpha / (2.0 * beta);
        if u > arc.u0 && u < arc.u1 {
            gs.push(geom.curve.g(u));
        }
    }
    let lo = gs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    convex_hull(&[[arc.u0, lo], [arc.u1, lo], [arc.u1, hi], [arc.u0, hi]])
}

fn arc_inside(geom: &CurveBoxGeometry, arc: &Arc, poly: &[[f64; 2]]) -> bool {
    if poly.len() == 1 {
        return arc.u1 - arc.u0 <= 1e-12;
    }
    edge_cuts(poly).iter().all(|c| arc_minimum(geom, arc, c).min_slack >= -CUT_TOL)
}

fn on_set(geom: &CurveBoxGeometry, p: [f64; 2]) -> bool {
    geom.arcs
        .iter()
        .any(|a| p[0] >= a.u0 - 1e-12 && p[0] <= a.u1 + 1e-12 && (geom.curve.g(p[0]) - p[1]).abs() <= 1e-9)
        || geom.segments.iter().any(|s| {
            let c = Cut2::through(s[0], s[1]);
            c.slack(p).abs() <= 1e-9
        })
}

fn is_box_line(geom: &CurveBoxGeometry, cut: &Cut2) -> bool {
    let axis = |k: usize| cut.coef[1 - k].abs() <= 1e-12 && [0.0, 1.0, -1.0].iter().any(|&v| (cut.rhs - v).abs() <= 1e-12);
    match geom.curve.kind {
        CurveKind::Parabola { .. } => axis(0),
        _ => axis(0) || axis(1),
    }
}

fn assemble(geom: &CurveBoxGeometry, rectangles: bool) -> (Vec<[f64; 2]>, bool) {
    let mut pts = Vec::new();
    let mut fallback = rectangles;
    for arc in &geom.arcs {
        let poly = if rectangles {
            bounding_rectangle(geom, arc)
        } else {
            let t = tangent_polygon(geom, arc);
            if arc_inside(geom, arc, &t) {
                t
            } else {
                fallback = true;
                bounding_rectangle(geom, arc)
            }
        };
        pts.extend(poly);
    }
    for seg in &geom.segments {
        pts.extend_from_slice(seg);
    }
    (convex_hull(&pts), fallback)
}

/// Polygon containing the curve's part of the box, described by its vertices
/// and by certified edge cuts.
pub fn outer_approximate(geom: &CurveBoxGeometry) -> CutSet {
    for rectangles in [false, true] {
        let (polygon, fallback) = assemble(geom, rectangles);
        let n = polygon.len();
        let mut cuts = Vec::with_capacity(n);
        let mut ok = true;
        for (k, cut) in edge_cuts(&polygon).into_iter().enumerate() {
            match validate_cut(geom, &cut) {
                Ok(certificate) => {
                    let (p, q) = (polygon[k % n], polygon[(k + 1) % n]);
                    let tag = if is_box_line(geom, &cut) {
                        CutTag::Box
                    } else if on_set(geom, p) && on_set(geom, q) {
                        CutTag::Chord
                    } else {
                        CutTag::Tangent
                    };
                    cuts.push(TaggedCut { cut, tag, certificate });
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok || rectangles {
            return CutSet { polygon, cuts, fallback };
        }
    }
    unreachable!("loop returns on the rectangle pass")
}
