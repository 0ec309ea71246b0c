//! Single-row convexification: canonical curves, their box geometry, certified
//! cuts, fixing enumeration and the per-row hull description.

mod csv;
mod curve;
mod cuts;
mod fixing;
mod geometry;

pub use csv::figure_data;
pub use curve::{canonicalize, CanonicalCurve, CurveKind};
pub use cuts::{min_slack, outer_approximate, validate_cut, Certificate, Cut2, CutSet, CutTag, TaggedCut, CUT_TOL};
pub use fixing::{
    effective_coefficients, enumerate_fixings, FixingPiece, Fixings, FreeSet, NodeRow, ZPart, ZVar, DEFAULT_PIECE_CAP,
};
pub use geometry::{convex_hull, intersect_box, shoelace, Arc, CurveBoxGeometry, GeometryCase};

use std::collections::HashSet;

/// Map rescaled row points back to the node box and drop duplicates.
///
/// `lower`/`upper` hold the node bounds of all variables (x first, then y at
/// offset `n1`).
pub fn row_hull_points(row: &NodeRow, pieces: &[FixingPiece], n1: usize, lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for piece in pieces {
        for pt in &piece.points {
            let real = row.to_real(pt, n1, lower, upper);
            let key: Vec<i64> = real.iter().map(|v| (v * 1e11).round() as i64).collect();
            if seen.insert(key) {
                out.push(real);
            }
        }
    }
    out
}
