//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p bbp-cli --test acceptance`.

mod support;

use std::process::{Command, ExitCode};
use std::time::Instant;

use bbp_core::bnb::{check_invariants, solve, RunConfig, SolveResult};
use bbp_core::branching::{algorithm1, analyze_curve, BranchParams, BranchRule, DisjunctionStat, Side};
use bbp_core::format::parse_instance;
use bbp_core::hull::{canonicalize, intersect_box, outer_approximate, CurveKind};
use bbp_core::lp::{solve_lp, LpStatus};
use bbp_core::model::{build_graph, generate_instance, BbpInstance, Shape};
use bbp_core::relax::{build_node_relaxation, RelaxOptions, Relaxation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use support::{curve_samples, enumerate_lp, median, random_instance_doc, random_lp, random_row};

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, what: &str, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} C{id} {what}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn bbp(args: &[&str]) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_bbp")).args(args).output().expect("binary runs");
    assert!(out.status.success(), "bbp {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

/// Logged runs feeding the invariant check.
type Runs = Vec<(String, SolveResult, BbpInstance)>;

fn oracle_optimality(r: &mut Report, runs: &mut Runs) {
    let dir = tempfile::tempdir().unwrap();
    let (mut worst, mut slowest, mut bad) = (0.0f64, 0.0f64, Vec::new());
    for seed in 0..25u64 {
        let doc = random_instance_doc(seed);
        let path = dir.path().join(format!("inst{seed}.json"));
        std::fs::write(&path, doc.to_string()).unwrap();
        let p = path.to_str().unwrap();
        let start = Instant::now();
        let sol = bbp(&["solve", p, "--branch", "alg1", "--relaxation", "hull"]);
        let secs = start.elapsed().as_secs_f64();
        let orc = bbp(&["oracle", p, "--grid", "1e-3"]);
        slowest = slowest.max(secs);
        let diff = match (sol["primal"].as_f64(), orc["value"].as_f64()) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        worst = worst.max(diff);
        if diff > 2e-3 || secs >= 10.0 {
            bad.push(format!("seed {seed}: diff {diff:.2e} in {secs:.2}s"));
        }
        // The same run in-process, for its node log.
        let inst = parse_instance(&doc.to_string()).unwrap();
        let res = solve(&inst, &RunConfig::with(Relaxation::Hull, BranchRule::Alg1)).unwrap();
        if res.primal != sol["primal"].as_f64() {
            bad.push(format!("seed {seed}: in-process primal {:?} differs from the binary", res.primal));
        }
        runs.push((format!("oracle seed {seed}"), res, inst));
    }
    r.line(
        1,
        bad.is_empty(),
        "oracle optimality",
        format!("25 instances, max |solve - oracle| = {worst:.2e} (tol 2e-3), slowest solve {slowest:.2}s (limit 10s) {bad:?}"),
    );
}

fn cut_validity(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut rows, mut cuts, mut samples, mut worst) = (0, 0, 0usize, f64::INFINITY);
    while rows < 200 {
        let coefs = random_row(&mut rng);
        let curve = canonicalize(coefs.0, coefs.1, coefs.2, coefs.3).unwrap();
        let geom = intersect_box(&curve);
        if geom.is_empty() {
            continue;
        }
        let set = outer_approximate(&geom);
        let pts = curve_samples(&mut rng, coefs, 1000);
        rows += 1;
        cuts += set.cuts.len();
        samples += pts.len();
        for [u, v] in pts {
            // Parabola cuts live in the (u, u·v) plane.
            let p = match curve.kind {
                CurveKind::Parabola { .. } => [u, u * v],
                _ => [u, v],
            };
            for c in &set.cuts {
                worst = worst.min(c.cut.slack(p));
            }
        }
    }
    r.line(
        2,
        worst >= -1e-8 && samples == 200 * 1000,
        "hull-cut validity",
        format!("{rows} rows, {cuts} cuts, {samples} curve samples, min slack {worst:.3e} (tol -1e-8)"),
    );
}

fn root_dominance(r: &mut Report) {
    let shape = Shape::new(6, 180, 312, 990);
    let (mut violations, mut curved, mut strict, mut min_diff) = (0, 0, 0, f64::INFINITY);
    for seed in 0..20u64 {
        let inst = generate_instance(&shape, 0.02, seed).unwrap();
        let graph = build_graph(&inst);
        let value = |relaxation| {
            let opts = RelaxOptions { relaxation, ..RelaxOptions::default() };
            build_node_relaxation(&inst, &graph, &inst.lower, &inst.upper, &opts).solve(&Default::default()).unwrap().value
        };
        let (m, h) = (value(Relaxation::McCormick), value(Relaxation::Hull));
        min_diff = min_diff.min(h - m);
        if h < m - 1e-7 {
            violations += 1;
        }
        if inst.rows.iter().any(|row| !row.form.q.is_empty()) {
            curved += 1;
            if h > m + 1e-7 {
                strict += 1;
            }
        }
    }
    r.line(
        3,
        violations == 0 && 2 * strict >= curved,
        "root-bound dominance",
        format!(
            "20 instances, min(hull - mccormick) = {min_diff:.3e}, strictly greater on {strict}/{curved} with curved rows (need >= 50%)"
        ),
    );
}

fn worked_geometry(r: &mut Report) {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let pt = |p: [f64; 2], q: [f64; 2]| close(p[0], q[0]) && close(p[1], q[1]);
    let curve = canonicalize(1.0, 0.0, 0.0, -0.25).unwrap();
    let geom = intersect_box(&curve);
    let arc = geom.arcs[0];
    let (a, b, c) = (geom.a(&arc), geom.b(&arc), geom.c(&arc));
    let set = outer_approximate(&geom);
    // Cuts are stored as unit-normal `coef · p >= rhs`.
    let has = |coef: [f64; 2], rhs: f64| {
        let n = coef[0].hypot(coef[1]);
        set.cuts.iter().any(|t| pt(t.cut.coef, [coef[0] / n, coef[1] / n]) && close(t.cut.rhs, rhs / n))
    };
    let tangent = has([4.0, 1.0], 2.0);
    let chord = has([-1.0, -1.0], -1.25);
    let (lo, hi, _) = analyze_curve(&curve, Side::X, 2.0 / 3.0).unwrap();
    let ok = geom.arcs.len() == 1
        && pt(a, [0.25, 1.0])
        && pt(b, [1.0, 0.25])
        && pt(c, [0.5, 0.5])
        && tangent
        && chord
        && close(lo, 1.0 / 3.0)
        && close(hi, 5.0 / 6.0);
    r.line(
        4,
        ok,
        "worked geometry xy = 0.25",
        format!("A = {a:?}, B = {b:?}, C = {c:?}, tangent 4x+y>=2 {tangent}, chord x+y<=1.25 {chord}, interval [{lo}, {hi}]"),
    );
}

fn rule_ordering(r: &mut Report, runs: &mut Runs) {
    let shape = Shape::new(4, 20, 40, 60);
    let configs = [
        ("hull+alg1", Relaxation::Hull, BranchRule::Alg1),
        ("hull+gap-bisect", Relaxation::Hull, BranchRule::GapBisect),
        ("mccormick+gap-bisect", Relaxation::McCormick, BranchRule::GapBisect),
        ("mccormick+alg1", Relaxation::McCormick, BranchRule::Alg1),
    ];
    let mut gaps = vec![Vec::new(); configs.len()];
    let mut slowest = 0.0f64;
    for seed in 0..10u64 {
        let inst = generate_instance(&shape, 0.02, seed).unwrap();
        let start = Instant::now();
        for (k, &(name, relaxation, rule)) in configs.iter().enumerate() {
            let cfg = RunConfig { node_limit: 2000, time_limit: 300.0, gap_tol: 0.0, ..RunConfig::with(relaxation, rule) };
            let res = solve(&inst, &cfg).unwrap();
            gaps[k].push(res.gap.unwrap_or(f64::INFINITY));
            runs.push((format!("medium seed {seed} {name}"), res, inst.clone()));
        }
        slowest = slowest.max(start.elapsed().as_secs_f64());
    }
    let med: Vec<f64> = gaps.iter().map(|g| median(g)).collect();
    let summary: Vec<String> = configs.iter().zip(&med).map(|(c, m)| format!("{} {m:.4e}", c.0)).collect();
    r.line(
        5,
        med[0] <= med[1] && med[0] <= med[2] && slowest < 300.0,
        "branching-rule ordering",
        format!("median gaps [{}], slowest instance {slowest:.1}s (limit 300s)", summary.join(", ")),
    );
    r.line(
        6,
        med[3] > med[0],
        "relaxation-vs-rule ablation",
        format!("median gap mccormick+alg1 {:.4e} vs hull+alg1 {:.4e} (need strictly worse)", med[3], med[0]),
    );
}

fn invariants(r: &mut Report, runs: &Runs) {
    let mut bad = Vec::new();
    let mut nodes = 0;
    for (name, res, inst) in runs {
        nodes += res.log.len();
        for e in check_invariants(res, &inst.lower, &inst.upper) {
            bad.push(format!("{name}: {e}"));
        }
    }
    r.line(
        7,
        bad.is_empty() && !runs.is_empty(),
        "branch-and-bound invariants",
        format!("{} runs, {nodes} logged nodes, {} violations {:?}", runs.len(), bad.len(), bad.iter().take(5).collect::<Vec<_>>()),
    );
}

fn lp_oracle(r: &mut Report) {
    let (mut worst, mut bad) = (0.0f64, 0);
    for seed in 0..200u64 {
        let n = 2 + (seed % 6) as usize;
        let m = 1 + (seed % 5) as usize;
        let p = random_lp(10_000 + seed, n, m, seed % 23 == 7);
        let res = solve_lp(&p).unwrap();
        match enumerate_lp(&p) {
            None if res.status == LpStatus::Infeasible => {}
            Some(v) if res.status == LpStatus::Optimal => {
                let d = (res.objective - v).abs();
                worst = worst.max(d);
                if d > 1e-6 {
                    bad += 1;
                }
            }
            _ => bad += 1,
        }
    }
    r.line(8, bad == 0, "LP core oracle", format!("200 LPs, {bad} mismatches, max objective error {worst:.2e} (tol 1e-6)"));
}

fn hand_trace(r: &mut Report) {
    let stats = [
        DisjunctionStat { var: 0, lo: 0.3, hi: 0.4, area: 0.2 },
        DisjunctionStat { var: 0, lo: 0.35, hi: 0.6, area: 0.1 },
        DisjunctionStat { var: 1, lo: 0.0, hi: 0.05, area: 0.5 },
    ];
    let d = algorithm1(&stats, &[(0.0, 1.0); 2], Side::X, &BranchParams::default()).unwrap();
    r.line(
        9,
        d.var == 1 && d.point == 0.0625,
        "algorithm-1 hand trace",
        format!("branch on x{} at {}", d.var + 1, d.point),
    );
}

fn main() -> ExitCode {
    // Accept and ignore libtest flags passed through by `cargo test`.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut r = Report { failed: 0 };
    let mut runs = Runs::new();
    oracle_optimality(&mut r, &mut runs);
    cut_validity(&mut r);
    root_dominance(&mut r);
    worked_geometry(&mut r);
    rule_ordering(&mut r, &mut runs);
    invariants(&mut r, &runs);
    lp_oracle(&mut r);
    hand_trace(&mut r);
    println!("{} of 9 criteria passed", 9 - r.failed);
    if r.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
