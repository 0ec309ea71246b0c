use std::fmt::Write;

use super::cuts::outer_approximate;
use super::curve::{canonicalize, CurveKind};
use super::geometry::intersect_box;
use crate::error::Result;

/// CSV with curve samples, the named points A, B, C of each arc, polygon
/// vertices and cuts of the set `q·u·v + a·u + b·v + c = 0` in the unit box.
///
/// Columns are `record,label,c1,c2,c3`; for a cut `c1·p1 + c2·p2 >= c3`.
/// Plane coordinates are `(u, v)` for a hyperbola and `(u, w)` for a parabola.
pub fn figure_data(q: f64, a: f64, b: f64, c: f64, samples: usize) -> Result<String> {
    let curve = canonicalize(q, a, b, c)?;
    let geom = intersect_box(&curve);
    let mut out = String::from("record,label,c1,c2,c3\n");
    let plane = match curve.kind {
        CurveKind::Parabola { .. } => "uw",
        _ => "uv",
    };
    writeln!(out, "meta,plane,{plane},,").unwrap();
    writeln!(out, "meta,case,{:?},,", geom.case).unwrap();
    for (k, arc) in geom.arcs.iter().enumerate() {
        let n = samples.max(2);
        for t in 0..n {
            let u = arc.u0 + (arc.u1 - arc.u0) * t as f64 / (n - 1) as f64;
            let p = geom.point(u);
            writeln!(out, "curve,arc{k},{},{},", p[0], p[1]).unwrap();
        }
        for (name, p) in [("A", geom.a(arc)), ("B", geom.b(arc)), ("C", geom.c(arc))] {
            writeln!(out, "point,{name}{k},{},{},", p[0], p[1]).unwrap();
        }
    }
    for (k, seg) in geom.segments.iter().enumerate() {
        for p in seg {
            writeln!(out, "curve,segment{k},{},{},", p[0], p[1]).unwrap();
        }
    }
    if !geom.is_empty() {
        let cs = outer_approximate(&geom);
        for (k, v) in cs.polygon.iter().enumerate() {
            writeln!(out, "vertex,{k},{},{},", v[0], v[1]).unwrap();
        }
        for tc in &cs.cuts {
            let tag = format!("{:?}", tc.tag).to_lowercase();
            writeln!(out, "cut,{tag},{},{},{}", tc.cut.coef[0], tc.cut.coef[1], tc.cut.rhs).unwrap();
        }
    }
    Ok(out)
}
