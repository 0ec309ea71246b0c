//! Best-bound-first spatial branch and bound over rectangular boxes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branching::{decide, side_domains, widest, BranchDecision, BranchParams, BranchRule, NodeView, RuleTag, Side};
use crate::error::Result;
use crate::heuristic::{alternating_heuristic, best_feasible, PrimalPoint};
use crate::hull::DEFAULT_PIECE_CAP;
use crate::lp::LpOptions;
use crate::model::{build_graph, BbpInstance, InteractionGraph};
use crate::relax::{build_node_relaxation, BlockEncoding, RelaxOptions, Relaxation};

/// Relative pruning tolerance.
pub const PRUNE_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum HeuristicMode {
    /// At the root and at nodes that raise the global dual bound.
    #[default]
    Improving,
    EveryNode,
    Off,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub relaxation: Relaxation,
    pub encoding: BlockEncoding,
    pub branch: BranchParams,
    pub piece_cap: usize,
    pub time_limit: f64,
    pub node_limit: usize,
    pub gap_tol: f64,
    pub seed: u64,
    pub parallel: bool,
    pub heuristic: HeuristicMode,
    pub heuristic_rounds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            relaxation: Relaxation::Hull,
            encoding: BlockEncoding::Vertex,
            branch: BranchParams::default(),
            piece_cap: DEFAULT_PIECE_CAP,
            time_limit: 60.0,
            node_limit: 100_000,
            gap_tol: 1e-4,
            seed: 0,
            parallel: false,
            heuristic: HeuristicMode::Improving,
            heuristic_rounds: 10,
        }
    }
}

impl RunConfig {
    pub fn with(relaxation: Relaxation, rule: BranchRule) -> Self {
        let mut c = Self { relaxation, ..Self::default() };
        c.branch.rule = rule;
        c
    }

    /// Problems with the limits or the rule parameters.
    pub fn check(&self) -> std::result::Result<(), String> {
        let b = &self.branch;
        if !(self.time_limit > 0.0) || self.node_limit == 0 || !(self.gap_tol >= 0.0) {
            return Err("limits must be positive".into());
        }
        if b.k < 2 {
            return Err("K must be at least 2".into());
        }
        if !(b.gamma > 0.0 && b.gamma < 1.0) {
            return Err("gamma must lie in (0, 1)".into());
        }
        if !(b.eps1 >= 0.0 && b.eps2 >= 0.0) {
            return Err("eps1 and eps2 must be nonnegative".into());
        }
        if self.piece_cap == 0 {
            return Err("piece cap must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Termination {
    GapTol,
    TimeLimit,
    NodeLimit,
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NodeFate {
    Branched,
    Infeasible,
    /// Bound reached the incumbent after the node's own solve.
    Pruned,
    /// Discarded on removal from the queue.
    PrunedOnPop,
    /// No variable left to split.
    Leaf,
    /// The LP failed numerically on a box that cannot be split further.
    LpFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeLog {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Bound inherited from the parent.
    pub parent_bound: f64,
    /// Bound after the node's own relaxation; `inf` when infeasible.
    pub bound: f64,
    pub fate: NodeFate,
    pub decision: Option<BranchDecision>,
    /// Domain of the split variable.
    pub split_domain: Option<(f64, f64)>,
    pub children: Vec<usize>,
    pub dual: f64,
    pub primal: Option<f64>,
    #[serde(skip)]
    pub lower: Vec<f64>,
    #[serde(skip)]
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveResult {
    pub status: Status,
    pub termination: Termination,
    pub primal: Option<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dual: f64,
    /// `None` without an incumbent.
    pub gap: Option<f64>,
    pub root_bound: f64,
    pub nodes: usize,
    pub wall_time: f64,
    pub config: RunConfig,
    pub log: Vec<NodeLog>,
}

impl SolveResult {
    /// One line per node: id, bound and decision.
    pub fn log_lines(&self) -> String {
        let mut out = String::new();
        for n in &self.log {
            let dec = match (&n.decision, n.split_domain) {
                (Some(d), Some((lo, hi))) => {
                    let s = if d.side == Side::X { "x" } else { "y" };
                    format!("{s}{} at {:.6} in [{lo:.6}, {hi:.6}] ({:?})", d.var, d.point, d.tag)
                }
                _ => format!("{:?}", n.fate),
            };
            writeln!(out, "node {} bound {:.9} dual {:.9} {dec}", n.id, n.bound, n.dual).unwrap();
        }
        out
    }
}

/// Gap `(primal - dual) / max(|primal|, 1e-9)`.
pub fn gap(primal: Option<f64>, dual: f64) -> Option<f64> {
    primal.map(|p| if dual >= p { 0.0 } else { (p - dual) / p.abs().max(1e-9) })
}

/// Global dual bound and gap from the open-node bounds and the incumbent.
pub fn update_global_bound(open: &[f64], incumbent: Option<f64>) -> (f64, Option<f64>) {
    let dual = match open.iter().copied().reduce(f64::min) {
        Some(d) => incumbent.map_or(d, |p| d.min(p)),
        None => incumbent.unwrap_or(f64::INFINITY),
    };
    (dual, gap(incumbent, dual))
}

fn prune_threshold(incumbent: Option<f64>) -> f64 {
    incumbent.map_or(f64::INFINITY, |p| p - PRUNE_TOL * p.abs().max(1.0))
}

#[derive(Clone, Debug)]
struct Node {
    id: usize,
    parent: Option<usize>,
    depth: usize,
    bound: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Min-heap entry: least bound first, then lowest id.
struct Entry(Node);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.bound.total_cmp(&self.0.bound).then(other.0.id.cmp(&self.0.id))
    }
}

/// Everything a node evaluation produces; computed without touching shared state.
struct Outcome {
    bound: f64,
    fate: NodeFate,
    decision: Option<BranchDecision>,
    points: Vec<PrimalPoint>,
}

struct Ctx<'a> {
    inst: &'a BbpInstance,
    graph: InteractionGraph,
    config: &'a RunConfig,
    lp: LpOptions,
}

impl Ctx<'_> {
    /// `dual` is the global bound when the node was taken from the queue.
    fn evaluate(&self, node: &Node, incumbent: Option<&PrimalPoint>, dual: f64) -> Outcome {
        let opts = RelaxOptions {
            relaxation: self.config.relaxation,
            encoding: self.config.encoding,
            piece_cap: self.config.piece_cap,
        };
        let relax = build_node_relaxation(self.inst, &self.graph, &node.lower, &node.upper, &opts);
        let sol = match relax.solve(&self.lp) {
            Ok(s) => s,
            Err(_) => {
                // Keep the region: bisect it under the inherited bound.
                let side = self.config.branch.side;
                let domains = side_domains(self.inst.n1, &node.lower, &node.upper, side);
                let decision = widest(&domains).map(|var| BranchDecision {
                    side,
                    var,
                    point: 0.5 * (domains[var].0 + domains[var].1),
                    tag: RuleTag::Bisection,
                });
                let fate = if decision.is_some() { NodeFate::Branched } else { NodeFate::LpFailure };
                return Outcome { bound: node.bound, fate, decision, points: Vec::new() };
            }
        };
        if !sol.feasible {
            return Outcome { bound: f64::INFINITY, fate: NodeFate::Infeasible, decision: None, points: Vec::new() };
        }
        let bound = sol.value.max(node.bound);
        let run_heuristic = match self.config.heuristic {
            HeuristicMode::Off => false,
            HeuristicMode::EveryNode => true,
            HeuristicMode::Improving => node.id == 0 || bound > dual + 1e-9 * dual.abs().max(1.0),
        };
        let mut points = Vec::new();
        if run_heuristic {
            // Starts: the relaxation point and the centre of the node box.
            let n1 = self.inst.n1;
            let mid: Vec<f64> = node.lower.iter().zip(&node.upper).map(|(l, u)| 0.5 * (l + u)).collect();
            for (x0, y0) in [(&sol.x[..], &sol.y[..]), (&mid[..n1], &mid[n1..])] {
                let trail = alternating_heuristic(
                    self.inst,
                    x0,
                    y0,
                    &node.lower,
                    &node.upper,
                    self.config.heuristic_rounds,
                    &self.lp,
                )
                .unwrap_or_default();
                points.extend(best_feasible(&trail).cloned());
            }
        }
        let view = NodeView {
            inst: self.inst,
            lower: &node.lower,
            upper: &node.upper,
            blocks: &relax.blocks,
            piece_cap: self.config.piece_cap,
            relax: &sol,
            incumbent: incumbent.map(|p| (p.x.as_slice(), p.y.as_slice())),
        };
        let decision = decide(&self.config.branch, &view);
        if decision.is_none() {
            // Nothing left to split: the LP over the remaining box is exact.
            let trail =
                alternating_heuristic(self.inst, &sol.x, &sol.y, &node.lower, &node.upper, 2, &self.lp).unwrap_or_default();
            points.extend(best_feasible(&trail).cloned());
            return Outcome { bound, fate: NodeFate::Leaf, decision: None, points };
        }
        Outcome { bound, fate: NodeFate::Branched, decision, points }
    }
}

/// Run branch and bound on `inst` under `config`.
pub fn solve(inst: &BbpInstance, config: &RunConfig) -> Result<SolveResult> {
    let start = Instant::now();
    let ctx = Ctx { inst, graph: build_graph(inst), config, lp: LpOptions::default() };
    let mut incumbent: Option<PrimalPoint> = None;
    let offer = |inc: &mut Option<PrimalPoint>, p: PrimalPoint| {
        if p.is_feasible() && inc.as_ref().is_none_or(|q| p.value < q.value) {
            *inc = Some(p);
        }
    };

    // A seeded random start complements the relaxation-point start at the root.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let x0: Vec<f64> = (0..inst.n1).map(|i| rng.random_range(inst.lower[i]..=inst.upper[i])).collect();
    let y0: Vec<f64> = (0..inst.n2).map(|j| rng.random_range(inst.lower[inst.n1 + j]..=inst.upper[inst.n1 + j])).collect();
    if config.heuristic != HeuristicMode::Off {
        let trail = alternating_heuristic(inst, &x0, &y0, &inst.lower, &inst.upper, config.heuristic_rounds, &ctx.lp)?;
        if let Some(p) = best_feasible(&trail) {
            offer(&mut incumbent, p.clone());
        }
    }

    let mut queue = BinaryHeap::new();
    queue.push(Entry(Node {
        id: 0,
        parent: None,
        depth: 0,
        bound: f64::NEG_INFINITY,
        lower: inst.lower.clone(),
        upper: inst.upper.clone(),
    }));
    let mut next_id = 1;
    let mut log: Vec<NodeLog> = Vec::new();
    let mut processed = 0usize;
    let mut root_bound = f64::NEG_INFINITY;
    let mut dual_seen = f64::NEG_INFINITY;
    let batch = if config.parallel { rayon::current_num_threads().max(1) } else { 1 };

    let open_dual = |queue: &BinaryHeap<Entry>, inc: &Option<PrimalPoint>| {
        let open: Vec<f64> = queue.iter().map(|e| e.0.bound).collect();
        update_global_bound(&open, inc.as_ref().map(|p| p.value))
    };

    let termination = loop {
        let (dual, g) = open_dual(&queue, &incumbent);
        if queue.is_empty() {
            break Termination::Exhausted;
        }
        if g.is_some_and(|g| g <= config.gap_tol) {
            break Termination::GapTol;
        }
        if processed >= config.node_limit {
            break Termination::NodeLimit;
        }
        if start.elapsed().as_secs_f64() >= config.time_limit {
            break Termination::TimeLimit;
        }

        // Pop a batch of live nodes; stale ones are logged and dropped.
        let threshold = prune_threshold(incumbent.as_ref().map(|p| p.value));
        let mut nodes = Vec::new();
        while nodes.len() < batch.min(config.node_limit - processed) {
            let Some(Entry(node)) = queue.pop() else { break };
            if node.bound >= threshold {
                log.push(node_log(&node, node.bound, NodeFate::PrunedOnPop, None, Vec::new(), f64::NAN, None));
                continue;
            }
            nodes.push(node);
        }
        if nodes.is_empty() {
            let (d, _) = open_dual(&queue, &incumbent);
            patch_dual(&mut log, &mut dual_seen, d, &incumbent);
            continue;
        }
        let inc_snapshot = incumbent.clone();
        let outcomes: Vec<Outcome> = if nodes.len() > 1 {
            nodes.par_iter().map(|n| ctx.evaluate(n, inc_snapshot.as_ref(), dual)).collect()
        } else {
            nodes.iter().map(|n| ctx.evaluate(n, inc_snapshot.as_ref(), dual)).collect()
        };

        for (node, out) in nodes.into_iter().zip(outcomes) {
            processed += 1;
            if node.id == 0 {
                root_bound = out.bound;
            }
            for p in out.points {
                offer(&mut incumbent, p);
            }
            let threshold = prune_threshold(incumbent.as_ref().map(|p| p.value));
            let mut fate = out.fate;
            let mut children = Vec::new();
            let mut split = None;
            if fate == NodeFate::Branched && out.bound >= threshold {
                fate = NodeFate::Pruned;
            }
            if fate == NodeFate::Branched {
                let d = out.decision.expect("branched nodes carry a decision");
                let t = match d.side {
                    Side::X => d.var,
                    Side::Y => inst.n1 + d.var,
                };
                split = Some((node.lower[t], node.upper[t]));
                for half in 0..2 {
                    let mut lower = node.lower.clone();
                    let mut upper = node.upper.clone();
                    if half == 0 {
                        upper[t] = d.point;
                    } else {
                        lower[t] = d.point;
                    }
                    children.push(next_id);
                    queue.push(Entry(Node {
                        id: next_id,
                        parent: Some(node.id),
                        depth: node.depth + 1,
                        bound: out.bound,
                        lower,
                        upper,
                    }));
                    next_id += 1;
                }
            }
            let decision = if fate == NodeFate::Branched { out.decision } else { None };
            let mut entry = node_log(&node, out.bound, fate, decision, children, f64::NAN, None);
            entry.split_domain = split;
            log.push(entry);
        }
        let (d, _) = open_dual(&queue, &incumbent);
        patch_dual(&mut log, &mut dual_seen, d, &incumbent);
    };

    let (dual, g) = open_dual(&queue, &incumbent);
    let dual = if queue.is_empty() { incumbent.as_ref().map_or(f64::INFINITY, |p| p.value) } else { dual };
    let dual = match &incumbent {
        Some(p) => dual.max(dual_seen).min(p.value),
        None => dual.max(dual_seen),
    };
    patch_dual(&mut log, &mut dual_seen, dual, &incumbent);
    let status = match (&incumbent, termination) {
        (None, Termination::Exhausted) => Status::Infeasible,
        (None, _) => Status::Unknown,
        (Some(_), Termination::Exhausted | Termination::GapTol) => Status::Optimal,
        (Some(_), _) => Status::Feasible,
    };
    let gap = if queue.is_empty() { incumbent.as_ref().map(|_| 0.0) } else { g };
    Ok(SolveResult {
        status,
        termination,
        primal: incumbent.as_ref().map(|p| p.value),
        x: incumbent.as_ref().map_or_else(Vec::new, |p| p.x.clone()),
        y: incumbent.as_ref().map_or_else(Vec::new, |p| p.y.clone()),
        dual,
        gap,
        root_bound,
        nodes: processed,
        wall_time: start.elapsed().as_secs_f64(),
        config: config.clone(),
        log,
    })
}

fn node_log(
    node: &Node,
    bound: f64,
    fate: NodeFate,
    decision: Option<BranchDecision>,
    children: Vec<usize>,
    dual: f64,
    primal: Option<f64>,
) -> NodeLog {
    NodeLog {
        id: node.id,
        parent: node.parent,
        depth: node.depth,
        parent_bound: node.bound,
        bound,
        fate,
        decision,
        split_domain: None,
        children,
        dual,
        primal,
        lower: node.lower.clone(),
        upper: node.upper.clone(),
    }
}

/// Stamp the current global bounds on log entries that do not have them yet.
fn patch_dual(log: &mut [NodeLog], dual_seen: &mut f64, dual: f64, incumbent: &Option<PrimalPoint>) {
    *dual_seen = dual_seen.max(dual);
    for e in log.iter_mut().rev() {
        if !e.dual.is_nan() {
            break;
        }
        e.dual = *dual_seen;
        e.primal = incumbent.as_ref().map(|p| p.value);
    }
}

/// Violations of the run invariants: non-decreasing dual, dual at most
/// primal, child bounds at least the parent bound, children splitting the
/// parent box exactly at the branch point.
pub fn check_invariants(result: &SolveResult, root_lower: &[f64], root_upper: &[f64]) -> Vec<String> {
    let mut errs = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for e in &result.log {
        if e.dual < prev - 1e-9 {
            errs.push(format!("node {}: dual decreased {} -> {}", e.id, prev, e.dual));
        }
        prev = prev.max(e.dual);
        if let Some(p) = e.primal {
            if e.dual > p + 1e-7 * p.abs().max(1.0) {
                errs.push(format!("node {}: dual {} above primal {p}", e.id, e.dual));
            }
        }
        if e.bound.is_finite() && e.parent_bound.is_finite() && e.bound < e.parent_bound - 1e-7 {
            errs.push(format!("node {}: bound {} below parent bound {}", e.id, e.bound, e.parent_bound));
        }
        for t in 0..e.lower.len() {
            if e.lower[t] < root_lower[t] - 1e-12 || e.upper[t] > root_upper[t] + 1e-12 {
                errs.push(format!("node {}: box leaves the root box", e.id));
                break;
            }
        }
    }
    let by_id: std::collections::HashMap<usize, &NodeLog> = result.log.iter().map(|e| (e.id, e)).collect();
    for e in &result.log {
        let (Some(d), false) = (&e.decision, e.children.is_empty()) else { continue };
        let kids: Vec<&NodeLog> = e.children.iter().filter_map(|c| by_id.get(c).copied()).collect();
        if kids.len() != 2 {
            // Children still open at termination are not logged.
            continue;
        }
        let mut ok = true;
        let (a, b) = (kids[0], kids[1]);
        let mut split_dims = 0;
        for s in 0..e.lower.len() {
            let same_a = a.lower[s] == e.lower[s] && a.upper[s] == e.upper[s];
            let same_b = b.lower[s] == e.lower[s] && b.upper[s] == e.upper[s];
            if same_a && same_b {
                continue;
            }
            split_dims += 1;
            let covers = a.lower[s] == e.lower[s] && a.upper[s] == d.point && b.lower[s] == d.point && b.upper[s] == e.upper[s];
            if !covers || !(e.lower[s] < d.point && d.point < e.upper[s]) {
                ok = false;
            }
        }
        if !ok || split_dims != 1 {
            errs.push(format!("node {}: children do not partition the parent box", e.id));
        }
    }
    if let Some(p) = result.primal {
        if result.dual > p + 1e-7 * p.abs().max(1.0) {
            errs.push(format!("final dual {} above primal {p}", result.dual));
        }
    }
    errs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_bound_examples() {
        let (d, g) = update_global_bound(&[1.2, 0.9], Some(2.0));
        assert_eq!(d, 0.9);
        assert!((g.unwrap() - 0.55).abs() < 1e-15);
        assert_eq!(update_global_bound(&[], Some(2.0)), (2.0, Some(0.0)));
        assert_eq!(update_global_bound(&[0.5], None), (0.5, None));
    }

    #[test]
    fn heap_pops_least_bound_then_lowest_id() {
        let mk = |id, bound| Entry(Node { id, parent: None, depth: 0, bound, lower: vec![], upper: vec![] });
        let mut h = BinaryHeap::new();
        h.push(mk(3, 1.0));
        h.push(mk(1, 2.0));
        h.push(mk(2, 1.0));
        let order: Vec<usize> = std::iter::from_fn(|| h.pop().map(|e| e.0.id)).collect();
        assert_eq!(order, vec![2, 3, 1]);
    }

    #[test]
    fn config_checks() {
        assert!(RunConfig::default().check().is_ok());
        let mut c = RunConfig::default();
        c.branch.gamma = 1.0;
        assert!(c.check().is_err());
        c = RunConfig::default();
        c.branch.k = 1;
        assert!(c.check().is_err());
    }
}
