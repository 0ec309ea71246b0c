use std::collections::BTreeSet;

use super::BbpInstance;

/// Variables of one row; its edge set is the complete bipartite `x_vars × y_vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowVars {
    pub x_vars: Vec<usize>,
    pub y_vars: Vec<usize>,
}

impl RowVars {
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.x_vars.iter().flat_map(move |&i| self.y_vars.iter().map(move |&j| (i, j)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionGraph {
    pub n1: usize,
    pub n2: usize,
    /// Pairs with a nonzero bilinear coefficient in some row or the objective.
    pub edges: BTreeSet<(usize, usize)>,
    pub rows: Vec<RowVars>,
    pub objective_edges: BTreeSet<(usize, usize)>,
}

impl InteractionGraph {
    /// Every pair that gets a product column: `E`, all row edge sets and the objective edges.
    pub fn product_pairs(&self) -> BTreeSet<(usize, usize)> {
        let mut all = self.edges.clone();
        for r in &self.rows {
            all.extend(r.edges());
        }
        all
    }
}

pub fn build_graph(inst: &BbpInstance) -> InteractionGraph {
    let mut edges = BTreeSet::new();
    let mut objective_edges = BTreeSet::new();
    for &(i, j, v) in &inst.objective.q {
        if v != 0.0 {
            edges.insert((i, j));
            objective_edges.insert((i, j));
        }
    }
    let rows = inst
        .rows
        .iter()
        .map(|r| {
            for &(i, j, v) in &r.form.q {
                if v != 0.0 {
                    edges.insert((i, j));
                }
            }
            RowVars { x_vars: r.form.x_vars(), y_vars: r.form.y_vars() }
        })
        .collect();
    InteractionGraph { n1: inst.n1, n2: inst.n2, edges, rows, objective_edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BilinearForm, BilinearRow};

    #[test]
    fn linear_member_joins_row_edges() {
        let mut inst = BbpInstance::unit(2, 1);
        inst.rows.push(BilinearRow {
            form: BilinearForm { q: vec![(0, 0, 1.0)], a: vec![(1, 1.0)], b: vec![], constant: 0.0 },
            elastic: false,
        });
        let g = build_graph(&inst);
        assert_eq!(g.edges.iter().copied().collect::<Vec<_>>(), vec![(0, 0)]);
        assert_eq!(g.rows[0].x_vars, vec![0, 1]);
        assert_eq!(g.rows[0].y_vars, vec![0]);
        assert_eq!(g.rows[0].edges().collect::<Vec<_>>(), vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn linear_instance_has_no_edges() {
        let mut inst = BbpInstance::unit(2, 2);
        inst.rows.push(BilinearRow {
            form: BilinearForm { a: vec![(0, 1.0)], b: vec![(1, 1.0)], ..Default::default() },
            elastic: true,
        });
        assert!(build_graph(&inst).edges.is_empty());
    }
}
