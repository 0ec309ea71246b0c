//! Problem data: bilinear forms, rows, instances and their diagnostics.

mod fe;
mod generate;
mod graph;
mod normalize;

pub use fe::{from_fe, FeInput, FeMode};
pub use generate::{generate_instance, Shape};
pub use graph::{build_graph, InteractionGraph, RowVars};
pub use normalize::{inequality_to_equality, normalize_box, ScalingRecord, VarMap};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::interval::Interval;

/// `Σ q_ij x_i y_j + Σ a_i x_i + Σ b_j y_j + constant`, stored sparsely.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BilinearForm {
    pub q: Vec<(usize, usize, f64)>,
    pub a: Vec<(usize, f64)>,
    pub b: Vec<(usize, f64)>,
    pub constant: f64,
}

impl BilinearForm {
    /// Merge duplicate entries, drop zeros and sort by index.
    pub fn canonical(&self) -> BilinearForm {
        self.canonical_with(0.0)
    }

    /// Like [`canonical`](Self::canonical) but also drops entries with `|v| <= drop`.
    pub fn canonical_with(&self, drop: f64) -> BilinearForm {
        let mut q: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, v) in &self.q {
            *q.entry((i, j)).or_default() += v;
        }
        let mut a: BTreeMap<usize, f64> = BTreeMap::new();
        for &(i, v) in &self.a {
            *a.entry(i).or_default() += v;
        }
        let mut b: BTreeMap<usize, f64> = BTreeMap::new();
        for &(j, v) in &self.b {
            *b.entry(j).or_default() += v;
        }
        let keep = |v: &f64| v.abs() > drop && *v != 0.0;
        BilinearForm {
            q: q.into_iter().filter(|(_, v)| keep(v)).map(|((i, j), v)| (i, j, v)).collect(),
            a: a.into_iter().filter(|(_, v)| keep(v)).collect(),
            b: b.into_iter().filter(|(_, v)| keep(v)).collect(),
            constant: self.constant,
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = self.constant;
        for &(i, j, v) in &self.q {
            s += v * x[i] * y[j];
        }
        for &(i, v) in &self.a {
            s += v * x[i];
        }
        for &(j, v) in &self.b {
            s += v * y[j];
        }
        s
    }

    pub fn is_linear(&self) -> bool {
        self.q.is_empty()
    }

    /// Range of the form over a box, by interval arithmetic term by term.
    pub fn range(&self, xb: &[Interval], yb: &[Interval]) -> Interval {
        let mut r = Interval::point(self.constant);
        for &(i, j, v) in &self.q {
            r = r + (xb[i] * yb[j]).scale(v);
        }
        for &(i, v) in &self.a {
            r = r + xb[i].scale(v);
        }
        for &(j, v) in &self.b {
            r = r + yb[j].scale(v);
        }
        r
    }

    /// Sorted, deduplicated x indices appearing in the form.
    pub fn x_vars(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.q.iter().map(|t| t.0).chain(self.a.iter().map(|t| t.0)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Sorted, deduplicated y indices appearing in the form.
    pub fn y_vars(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.q.iter().map(|t| t.1).chain(self.b.iter().map(|t| t.0)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// One equality row `form = 0`. An elastic row instead reads `form = z' - z''`
/// with both residual parts charged to the objective.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BilinearRow {
    pub form: BilinearForm,
    #[serde(default)]
    pub elastic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BbpInstance {
    pub n1: usize,
    pub n2: usize,
    pub objective: BilinearForm,
    pub rows: Vec<BilinearRow>,
    /// Bounds of `x` followed by bounds of `y`.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    IndexOutOfRange,
    BoundOrder,
    NonFiniteValue,
    DuplicateTerm,
    ExplicitZero,
    LengthMismatch,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// `None` for the objective or for instance-level problems.
    pub row: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.row {
            Some(k) => write!(f, "row {k}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// Value of a point under the elastic formulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    /// Objective form plus the absolute residual of every elastic row.
    pub objective: f64,
    /// Largest absolute residual among non-elastic rows.
    pub infeasibility: f64,
}

impl BbpInstance {
    /// An instance with the unit box and no rows.
    pub fn unit(n1: usize, n2: usize) -> Self {
        Self {
            n1,
            n2,
            objective: BilinearForm::default(),
            rows: Vec::new(),
            lower: vec![0.0; n1 + n2],
            upper: vec![1.0; n1 + n2],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn x_interval(&self, i: usize) -> Interval {
        Interval::new(self.lower[i], self.upper[i])
    }

    pub fn y_interval(&self, j: usize) -> Interval {
        Interval::new(self.lower[self.n1 + j], self.upper[self.n1 + j])
    }

    pub fn is_unit_box(&self) -> bool {
        self.lower.iter().all(|&l| l == 0.0) && self.upper.iter().all(|&u| u == 1.0)
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            out.push(Diagnostic {
                kind: DiagnosticKind::LengthMismatch,
                row: None,
                message: format!(
                    "bounds have lengths {} and {}, expected {n}",
                    self.lower.len(),
                    self.upper.len()
                ),
            });
        } else {
            for v in 0..n {
                let (l, u) = (self.lower[v], self.upper[v]);
                if !l.is_finite() || !u.is_finite() {
                    out.push(Diagnostic {
                        kind: DiagnosticKind::NonFiniteValue,
                        row: None,
                        message: format!("bounds of {} are not finite", var_name(self.n1, v)),
                    });
                } else if l > u {
                    out.push(Diagnostic {
                        kind: DiagnosticKind::BoundOrder,
                        row: None,
                        message: format!("{} has lower {l} above upper {u}", var_name(self.n1, v)),
                    });
                }
            }
        }
        self.check_form(&self.objective, None, &mut out);
        for (k, row) in self.rows.iter().enumerate() {
            self.check_form(&row.form, Some(k), &mut out);
        }
        out
    }

    fn check_form(&self, f: &BilinearForm, row: Option<usize>, out: &mut Vec<Diagnostic>) {
        let mut push = |kind, message: String| out.push(Diagnostic { kind, row, message });
        let mut seen_q = std::collections::HashSet::new();
        for &(i, j, v) in &f.q {
            if i >= self.n1 || j >= self.n2 {
                push(DiagnosticKind::IndexOutOfRange, format!("bilinear term ({i}, {j}) outside {}x{}", self.n1, self.n2));
            }
            if !seen_q.insert((i, j)) {
                push(DiagnosticKind::DuplicateTerm, format!("bilinear term ({i}, {j}) listed twice"));
            }
            check_value(v, &format!("bilinear term ({i}, {j})"), &mut push);
        }
        for (terms, side, bound) in [(&f.a, "x", self.n1), (&f.b, "y", self.n2)] {
            let mut seen = std::collections::HashSet::new();
            for &(i, v) in terms {
                if i >= bound {
                    push(DiagnosticKind::IndexOutOfRange, format!("linear term {side}{i} outside 0..{bound}"));
                }
                if !seen.insert(i) {
                    push(DiagnosticKind::DuplicateTerm, format!("linear term {side}{i} listed twice"));
                }
                check_value(v, &format!("linear term {side}{i}"), &mut push);
            }
        }
        if !f.constant.is_finite() {
            push(DiagnosticKind::NonFiniteValue, "constant is not finite".into());
        }
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Evaluation {
        let mut objective = self.objective.eval(x, y);
        let mut infeasibility: f64 = 0.0;
        for row in &self.rows {
            let r = row.form.eval(x, y);
            if row.elastic {
                objective += r.abs();
            } else {
                infeasibility = infeasibility.max(r.abs());
            }
        }
        Evaluation { objective, infeasibility }
    }

    pub fn num_elastic(&self) -> usize {
        self.rows.iter().filter(|r| r.elastic).count()
    }
}

fn check_value(v: f64, what: &str, push: &mut impl FnMut(DiagnosticKind, String)) {
    if !v.is_finite() {
        push(DiagnosticKind::NonFiniteValue, format!("{what} is not finite"));
    } else if v == 0.0 {
        push(DiagnosticKind::ExplicitZero, format!("{what} is stored as zero"));
    }
}

fn var_name(n1: usize, v: usize) -> String {
    if v < n1 {
        format!("x{v}")
    } else {
        format!("y{}", v - n1)
    }
}
