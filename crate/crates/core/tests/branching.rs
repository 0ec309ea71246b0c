use std::collections::BTreeMap;

use bbp_core::branching::{
    algorithm1, analyze_curve, branch_point, gap_error_select, BranchParams, DisjunctionStat, PointRule, RuleTag, Side,
};
use bbp_core::hull::canonicalize;
use bbp_core::relax::RelaxSolution;
use proptest::prelude::*;

const GAMMA: f64 = 2.0 / 3.0;

fn relax_point(x: Vec<f64>, y: Vec<f64>, w: &[((usize, usize), f64)]) -> RelaxSolution {
    RelaxSolution { feasible: true, value: 0.0, x, y, w: w.iter().copied().collect::<BTreeMap<_, _>>(), iterations: 0 }
}

fn shoelace(p: &[(f64, f64)]) -> f64 {
    let n = p.len();
    (0..n).map(|k| p[k].0 * p[(k + 1) % n].1 - p[(k + 1) % n].0 * p[k].1).sum::<f64>().abs() / 2.0
}

/// Intersection of `a1 x + b1 y = c1` and `a2 x + b2 y = c2`.
fn meet(l1: (f64, f64, f64), l2: (f64, f64, f64)) -> (f64, f64) {
    let det = l1.0 * l2.1 - l1.1 * l2.0;
    ((l1.2 * l2.1 - l1.1 * l2.2) / det, (l1.0 * l2.2 - l1.2 * l2.0) / det)
}

#[test]
fn quarter_hyperbola_gamma_interval() {
    // A = (1/4, 1), B = (1, 1/4); chord slope -1 meets -1/(4x^2) at x = 1/2.
    let (xa, xb, xc) = (0.25, 1.0, (0.25f64).sqrt());
    let expect = (xc - GAMMA * (xc - xa), xc + GAMMA * (xb - xc));
    let curve = canonicalize(1.0, 0.0, 0.0, -0.25).unwrap();
    let (lo, hi, _) = analyze_curve(&curve, Side::X, GAMMA).unwrap();
    assert!((lo - expect.0).abs() < 1e-9 && (lo - 1.0 / 3.0).abs() < 1e-9, "{lo}");
    assert!((hi - expect.1).abs() < 1e-9 && (hi - 5.0 / 6.0).abs() < 1e-9, "{hi}");
}

#[test]
fn quarter_hyperbola_area_is_tangent_polygon() {
    // Tangent to xy = 1/4 at (t, 1/(4t)): x/(4t) + t y = 1/2.
    let tangent = |t: f64| (1.0 / (4.0 * t), t, 0.5);
    let (ta, tc, tb) = (tangent(0.25), tangent(0.5), tangent(1.0));
    let poly = [(0.25, 1.0), meet(ta, tc), meet(tc, tb), (1.0, 0.25)];
    let curve = canonicalize(1.0, 0.0, 0.0, -0.25).unwrap();
    let (_, _, area) = analyze_curve(&curve, Side::X, GAMMA).unwrap();
    assert!((area - shoelace(&poly)).abs() < 1e-12, "{area} vs {}", shoelace(&poly));
}

#[test]
fn two_branches_interval_between_inner_intersections() {
    // (x - 0.5)(y - 0.5) = 0.04 expanded.
    let curve = canonicalize(1.0, -0.5, -0.5, 0.21).unwrap();
    let left = 0.5 + 0.04 / (0.0 - 0.5);
    let right = 0.5 + 0.04 / (1.0 - 0.5);
    let (lo, hi, area) = analyze_curve(&curve, Side::X, GAMMA).unwrap();
    assert!((lo - left).abs() < 1e-12 && (lo - 0.42).abs() < 1e-12, "{lo}");
    assert!((hi - right).abs() < 1e-12 && (hi - 0.58).abs() < 1e-12, "{hi}");
    // Quadrilateral (0, 0.42), (0.42, 0), (1, 0.58), (0.58, 1).
    let quad = [(0.42, 0.0), (1.0, 0.58), (0.58, 1.0), (0.0, 0.42)];
    assert!((area - shoelace(&quad)).abs() < 1e-12);
}

#[test]
fn y_side_of_symmetric_curve_matches_x_side() {
    let curve = canonicalize(1.0, 0.0, 0.0, -0.25).unwrap();
    let x = analyze_curve(&curve, Side::X, GAMMA).unwrap();
    let y = analyze_curve(&curve, Side::Y, GAMMA).unwrap();
    assert!((x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12);
}

#[test]
fn parabola_interval_maps_through_affine_link() {
    // q = 0: x y - ... with v = (-c - a u)/b = 0.2 + 0.6 u.
    let (a, b, c) = (0.6, -1.0, 0.2);
    let curve = canonicalize(0.0, a, b, c).unwrap();
    let (ul, uh, _) = analyze_curve(&curve, Side::X, GAMMA).unwrap();
    let (vl, vh, _) = analyze_curve(&curve, Side::Y, GAMMA).unwrap();
    let v = |u: f64| (-c - a * u) / b;
    assert!((vl - v(ul)).abs() < 1e-12 && (vh - v(uh)).abs() < 1e-12);
    // Midpoint C; interval shrinks around it by gamma.
    assert!((ul - (0.5 - GAMMA * 0.5)).abs() < 1e-12 && (uh - (0.5 + GAMMA * 0.5)).abs() < 1e-12);
}

#[test]
fn hand_trace_three_stats() {
    let stats = [
        DisjunctionStat { var: 0, lo: 0.3, hi: 0.4, area: 0.2 },
        DisjunctionStat { var: 0, lo: 0.35, hi: 0.6, area: 0.1 },
        DisjunctionStat { var: 1, lo: 0.0, hi: 0.05, area: 0.5 },
    ];
    let d = algorithm1(&stats, &[(0.0, 1.0); 2], Side::X, &BranchParams::default()).unwrap();
    assert_eq!((d.var, d.point, d.tag), (1, 0.0625, RuleTag::Alg1));
}

#[test]
fn single_stat_ties_to_lowest_cell() {
    let stats = [DisjunctionStat { var: 0, lo: 0.3, hi: 0.4, area: 1.0 }];
    let d = algorithm1(&stats, &[(0.0, 1.0)], Side::X, &BranchParams::default()).unwrap();
    assert_eq!((d.var, d.point), (0, 0.3125));
}

#[test]
fn gap_error_examples() {
    let one = relax_point(vec![0.5], vec![0.5], &[((0, 0), 0.4)]);
    assert_eq!(gap_error_select(&one, &[(0.0, 1.0)], Side::X), Some(0));
    let two = relax_point(vec![0.5, 0.5], vec![0.5], &[((0, 0), 0.45), ((1, 0), 0.15)]);
    assert_eq!(gap_error_select(&two, &[(0.0, 1.0); 2], Side::X), Some(0));
    let exact = relax_point(vec![0.5, 0.2], vec![0.4], &[((0, 0), 0.2), ((1, 0), 0.08)]);
    assert_eq!(gap_error_select(&exact, &[(0.0, 0.5), (0.0, 1.0)], Side::X), Some(1));
}

#[test]
fn max_deviation_is_clamped_inside() {
    let (p, tag) = branch_point(PointRule::MaxDeviation, 0.2, 0.6, 0.2, None);
    assert_eq!(tag, RuleTag::MaxDeviation);
    assert!((p - (0.2 + 1e-6 * 0.4)).abs() < 1e-15);
    let (p, tag) = branch_point(PointRule::Incumbent, 0.2, 0.6, 0.2, Some(0.7));
    assert_eq!(tag, RuleTag::MaxDeviation);
    assert!(p > 0.2 && p < 0.6);
}

fn stat_strategy(n: usize) -> impl Strategy<Value = DisjunctionStat> {
    (0..n, 0.0..1.0f64, 0.0..0.5f64, 0.0..0.5f64)
        .prop_map(|(var, a, w, area)| DisjunctionStat { var, lo: a * (1.0 - w), hi: a * (1.0 - w) + w, area })
}

proptest! {
    #[test]
    fn algorithm1_is_deterministic_and_interior(
        stats in prop::collection::vec(stat_strategy(3), 0..12),
        los in prop::collection::vec(-1.0..0.5f64, 3),
        widths in prop::collection::vec(0.01..2.0f64, 3),
    ) {
        let domains: Vec<(f64, f64)> = los.iter().zip(&widths).map(|(&l, &w)| (l, l + w)).collect();
        let mapped: Vec<DisjunctionStat> = stats.iter().map(|s| {
            let (l, h) = domains[s.var];
            DisjunctionStat { lo: l + (h - l) * s.lo, hi: l + (h - l) * s.hi, ..*s }
        }).collect();
        let p = BranchParams::default();
        let d1 = algorithm1(&mapped, &domains, Side::X, &p).unwrap();
        let d2 = algorithm1(&mapped, &domains, Side::X, &p).unwrap();
        prop_assert_eq!(d1, d2);
        let (l, h) = domains[d1.var];
        prop_assert!(d1.point > l && d1.point < h);
        // The same stats on unit domains pick the same variable at the preimage of the point.
        let u = algorithm1(&stats, &[(0.0, 1.0); 3], Side::X, &p).unwrap();
        if u.tag == RuleTag::Alg1 {
            prop_assert_eq!(u.var, d1.var);
            prop_assert!((l + (h - l) * u.point - d1.point).abs() < 1e-9);
        }
    }

    #[test]
    fn gamma_interval_brackets_c(t in 0.01..0.99f64, q in 0.2..3.0f64) {
        // q·x·y = t·q passes through (t, 1) and (1, t).
        let curve = canonicalize(q, 0.0, 0.0, -t * q).unwrap();
        let (lo, hi, area) = analyze_curve(&curve, Side::X, GAMMA).unwrap();
        let xc = t.sqrt();
        prop_assert!(lo <= xc + 1e-12 && xc <= hi + 1e-12);
        prop_assert!(lo >= t - 1e-12 && hi <= 1.0 + 1e-12);
        prop_assert!(area >= 0.0);
    }
}
