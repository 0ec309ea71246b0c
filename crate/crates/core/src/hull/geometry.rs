//! Where a canonical curve meets the unit box, plus small planar helpers.

use serde::Serialize;

use super::curve::{CanonicalCurve, CurveKind};

const TOL: f64 = 1e-12;

/// A connected piece of the curve over `u ∈ [u0, u1]`. `side` is the hyperbola
/// branch (`-1` left of the asymptote `u = r`, `+1` right) and `0` for a parabola.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Arc {
    pub side: i8,
    pub u0: f64,
    pub u1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GeometryCase {
    Empty,
    OneBranch,
    TwoBranches,
    DegenerateLines,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveBoxGeometry {
    pub curve: CanonicalCurve,
    pub case: GeometryCase,
    /// Ordered by `u`.
    pub arcs: Vec<Arc>,
    /// Segments in the `(u, v)` plane for `tau = 0` hyperbolas and axis lines.
    pub segments: Vec<[[f64; 2]; 2]>,
}

impl CurveBoxGeometry {
    pub fn point(&self, u: f64) -> [f64; 2] {
        [u, self.curve.g(u)]
    }

    pub fn a(&self, arc: &Arc) -> [f64; 2] {
        self.point(arc.u0)
    }

    pub fn b(&self, arc: &Arc) -> [f64; 2] {
        self.point(arc.u1)
    }

    /// `u` where the tangent is parallel to the chord of `arc`.
    pub fn c_u(&self, arc: &Arc) -> f64 {
        if arc.u1 - arc.u0 <= TOL {
            return arc.u0;
        }
        match self.curve.kind {
            CurveKind::Hyperbola { r, tau, .. } => {
                let m = (self.curve.g(arc.u1) - self.curve.g(arc.u0)) / (arc.u1 - arc.u0);
                let d = (-tau / m).sqrt();
                (r + f64::from(arc.side) * d).clamp(arc.u0, arc.u1)
            }
            _ => 0.5 * (arc.u0 + arc.u1),
        }
    }

    pub fn c(&self, arc: &Arc) -> [f64; 2] {
        self.point(self.c_u(arc))
    }

    pub fn is_empty(&self) -> bool {
        self.case == GeometryCase::Empty
    }
}

/// Intersect a curve with `[0, 1]²`. A `Product` curve has no boundary curve
/// and yields `Empty`; callers treat it separately.
pub fn intersect_box(curve: &CanonicalCurve) -> CurveBoxGeometry {
    let mut arcs = Vec::new();
    let mut segments = Vec::new();
    match curve.kind {
        CurveKind::Hyperbola { r, s, tau } if tau != 0.0 => {
            for side in [-1i8, 1] {
                let mut cands = vec![0.0, 1.0];
                if s != 0.0 {
                    cands.push(r - tau / s);
                }
                if s != 1.0 {
                    cands.push(r + tau / (1.0 - s));
                }
                let ok: Vec<f64> = cands
                    .into_iter()
                    .filter(|&u| {
                        f64::from(side) * (u - r) > 0.0
                            && (-TOL..=1.0 + TOL).contains(&u)
                            && (-TOL..=1.0 + TOL).contains(&curve.g(u))
                    })
                    .map(|u| u.clamp(0.0, 1.0))
                    .collect();
                if !ok.is_empty() {
                    let u0 = ok.iter().copied().fold(f64::INFINITY, f64::min);
                    let u1 = ok.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    arcs.push(Arc { side, u0, u1 });
                }
            }
        }
        CurveKind::Hyperbola { r, s, .. } => {
            if (-TOL..=1.0 + TOL).contains(&r) {
                let r = r.clamp(0.0, 1.0);
                segments.push([[r, 0.0], [r, 1.0]]);
            }
            if (-TOL..=1.0 + TOL).contains(&s) {
                let s = s.clamp(0.0, 1.0);
                segments.push([[0.0, s], [1.0, s]]);
            }
        }
        CurveKind::Parabola { .. } => {
            // v(u) = p0 + p1·u must stay in [0, 1].
            let p0 = -curve.c / curve.b;
            let p1 = -curve.a / curve.b;
            let (e0, e1) = ((0.0 - p0) / p1, (1.0 - p0) / p1);
            let lo = e0.min(e1).max(0.0);
            let hi = e0.max(e1).min(1.0);
            if lo <= hi + TOL {
                let hi = hi.max(lo);
                arcs.push(Arc { side: 0, u0: lo, u1: hi });
            }
        }
        CurveKind::Line => {
            if curve.a != 0.0 {
                let u = -curve.c / curve.a;
                if (-TOL..=1.0 + TOL).contains(&u) {
                    let u = u.clamp(0.0, 1.0);
                    segments.push([[u, 0.0], [u, 1.0]]);
                }
            } else {
                let v = -curve.c / curve.b;
                if (-TOL..=1.0 + TOL).contains(&v) {
                    let v = v.clamp(0.0, 1.0);
                    segments.push([[0.0, v], [1.0, v]]);
                }
            }
        }
        CurveKind::Product => {}
    }
    let case = if !segments.is_empty() {
        GeometryCase::DegenerateLines
    } else {
        match arcs.len() {
            0 => GeometryCase::Empty,
            1 => GeometryCase::OneBranch,
            _ => GeometryCase::TwoBranches,
        }
    };
    CurveBoxGeometry { curve: *curve, case, arcs, segments }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull without collinear points.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
    pts.dedup_by(|p, q| (p[0] - q[0]).abs() <= 1e-13 && (p[1] - q[1]).abs() <= 1e-13);
    if pts.len() <= 2 {
        return pts;
    }
    let scale = pts.iter().fold(1e-300f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
    let eps = 1e-14 * scale * scale;
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= eps {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        // All points collinear: keep the two extremes.
        return vec![pts[0], pts[pts.len() - 1]];
    }
    hull
}

/// Unsigned polygon area from ordered vertices.
pub fn shoelace(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 0..n {
        let (p, q) = (poly[k], poly[(k + 1) % n]);
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::curve::canonicalize;

    #[test]
    fn quarter_hyperbola() {
        let g = intersect_box(&canonicalize(1.0, 0.0, 0.0, -0.25).unwrap());
        assert_eq!(g.case, GeometryCase::OneBranch);
        let arc = g.arcs[0];
        assert_eq!(g.a(&arc), [0.25, 1.0]);
        assert_eq!(g.b(&arc), [1.0, 0.25]);
        assert_eq!(g.c(&arc), [0.5, 0.5]);
    }

    #[test]
    fn centered_two_branches() {
        // (u - 0.5)(v - 0.5) = 0.04  <=>  uv - 0.5u - 0.5v + 0.21 = 0
        let g = intersect_box(&canonicalize(1.0, -0.5, -0.5, 0.21).unwrap());
        assert_eq!(g.case, GeometryCase::TwoBranches);
        assert!((g.arcs[0].u0 - 0.0).abs() < 1e-12 && (g.arcs[0].u1 - 0.42).abs() < 1e-12);
        assert!((g.arcs[1].u0 - 0.58).abs() < 1e-12 && (g.arcs[1].u1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn misses_box() {
        assert!(intersect_box(&canonicalize(1.0, 0.0, 0.0, -2.0).unwrap()).is_empty());
    }

    #[test]
    fn hull_and_area_of_square() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.5], [1.0, 1.0], [0.0, 1.0], [0.5, 0.0]];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((shoelace(&h) - 1.0).abs() < 1e-15);
    }
}
