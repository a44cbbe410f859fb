//! Systems of difference constraints `x[to] - x[from] <= weight` with `x[0] = 0`.
//!
//! The feasible set is closed under componentwise max, so when it is
//! nonempty it has a greatest element: the shortest-path distances from
//! node 0. That element maximizes every objective with nonnegative weights.

use crate::rational::Rational;

#[derive(Clone, Debug, Default)]
pub struct DifferenceSystem {
    nodes: usize,
    // dist[i][j]: tightest known bound on x[j] - x[i]
    bound: Vec<Vec<Option<Rational>>>,
}

impl DifferenceSystem {
    pub fn new(nodes: usize) -> Self {
        Self {
            nodes,
            bound: vec![vec![None; nodes]; nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Adds `x[to] - x[from] <= weight`.
    pub fn add(&mut self, from: usize, to: usize, weight: Rational) {
        let slot = &mut self.bound[from][to];
        match slot {
            Some(w) if *w <= weight => {}
            _ => *slot = Some(weight),
        }
    }

    /// Greatest solution with `x[0] = 0`, or `None` when infeasible.
    ///
    /// Entries are `None` for nodes with no upper bound (unreachable from 0).
    pub fn greatest_solution(&self) -> Option<Vec<Option<Rational>>> {
        let n = self.nodes;
        let mut d = self.bound.clone();
        for i in 0..n {
            match &d[i][i] {
                Some(w) if *w < Rational::from_integer(0.into()) => return None,
                _ => d[i][i] = Some(Rational::from_integer(0.into())),
            }
        }
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = d[i][k].clone() else { continue };
                for j in 0..n {
                    let Some(kj) = &d[k][j] else { continue };
                    let through = &ik + kj;
                    match &d[i][j] {
                        Some(cur) if *cur <= through => {}
                        _ => d[i][j] = Some(through),
                    }
                }
            }
        }
        if (0..n).any(|i| {
            d[i][i]
                .as_ref()
                .is_some_and(|w| *w < Rational::from_integer(0.into()))
        }) {
            return None;
        }
        Some(d.swap_remove(0))
    }
}
