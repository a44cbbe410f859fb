//! Dense two-phase tableau simplex over exact rationals with Bland's rule.

use num_traits::{Signed, Zero};

use super::{Bounds, LinearProgram, LpResult, LpStatus, Relation};
use crate::rational::Rational;

/// How an original variable is expressed through nonnegative tableau columns.
struct VarMap {
    offset: Rational,
    terms: Vec<(usize, bool)>, // (column, negated)
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    cost: Vec<Rational>,
    cost_rhs: Rational,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        self.rhs[r] /= &p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.cost_rhs -= &f * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    /// Installs a maximization objective and prices out the basis.
    fn set_objective(&mut self, objective: &[Rational]) {
        self.cost = objective.to_vec();
        self.cost_rhs = Rational::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            if self.cost[b].is_zero() {
                continue;
            }
            let f = self.cost[b].clone();
            for (v, rv) in self.cost.iter_mut().zip(&self.rows[r]) {
                *v -= &f * rv;
            }
            self.cost_rhs -= &f * &self.rhs[r];
        }
    }

    /// Runs primal simplex on columns `< usable`. Returns false if unbounded.
    fn optimize(&mut self, usable: usize) -> bool {
        loop {
            let Some(enter) = (0..usable).find(|&j| self.cost[j].is_positive()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

pub fn solve(lp: &LinearProgram) -> LpResult {
    let n = lp.objective.len();
    let mut columns = 0usize;
    let mut extra_rows: Vec<(Vec<(usize, bool)>, Rational)> = Vec::new();
    let maps: Vec<VarMap> = lp
        .bounds
        .iter()
        .map(|b| {
            let Bounds { lower, upper } = b;
            let col = columns;
            match (lower, upper) {
                (Some(l), u) => {
                    columns += 1;
                    if let Some(u) = u {
                        extra_rows.push((vec![(col, false)], u - l));
                    }
                    VarMap {
                        offset: l.clone(),
                        terms: vec![(col, false)],
                    }
                }
                (None, Some(u)) => {
                    columns += 1;
                    VarMap {
                        offset: u.clone(),
                        terms: vec![(col, true)],
                    }
                }
                (None, None) => {
                    columns += 2;
                    VarMap {
                        offset: Rational::zero(),
                        terms: vec![(col, false), (col + 1, true)],
                    }
                }
            }
        })
        .collect();
    let structural = columns;

    // rows over structural columns, all with nonnegative rhs
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for c in &lp.constraints {
        let mut row = vec![Rational::zero(); structural];
        let mut rhs = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            rhs -= a * &maps[j].offset;
            for &(col, neg) in &maps[j].terms {
                if neg {
                    row[col] -= a;
                } else {
                    row[col] += a;
                }
            }
        }
        rows.push((row, c.relation, rhs));
    }
    for (terms, bound) in extra_rows {
        let mut row = vec![Rational::zero(); structural];
        for (col, _) in terms {
            row[col] = Rational::from_integer(1.into());
        }
        rows.push((row, Relation::Le, bound));
    }
    for (row, rel, rhs) in rows.iter_mut() {
        if rhs.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            *rhs = -rhs.clone();
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let slacks = rows.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
    let artificials = rows.iter().filter(|(_, r, _)| *r != Relation::Le).count();
    let width = structural + slacks + artificials;
    let first_artificial = structural + slacks;
    let one = Rational::from_integer(1.into());

    let mut tab = Tableau {
        rows: Vec::with_capacity(rows.len()),
        rhs: Vec::with_capacity(rows.len()),
        basis: Vec::with_capacity(rows.len()),
        cost: Vec::new(),
        cost_rhs: Rational::zero(),
    };
    let (mut next_slack, mut next_art) = (structural, first_artificial);
    for (row, rel, rhs) in rows {
        let mut full = row;
        full.resize(width, Rational::zero());
        let basic = match rel {
            Relation::Le => {
                full[next_slack] = one.clone();
                next_slack += 1;
                next_slack - 1
            }
            Relation::Ge => {
                full[next_slack] = -one.clone();
                next_slack += 1;
                full[next_art] = one.clone();
                next_art += 1;
                next_art - 1
            }
            Relation::Eq => {
                full[next_art] = one.clone();
                next_art += 1;
                next_art - 1
            }
        };
        tab.rows.push(full);
        tab.rhs.push(rhs);
        tab.basis.push(basic);
    }

    if artificials > 0 {
        let mut phase1 = vec![Rational::zero(); width];
        for v in &mut phase1[first_artificial..] {
            *v = -one.clone();
        }
        tab.set_objective(&phase1);
        tab.optimize(width);
        if !tab.cost_rhs.is_zero() {
            return LpResult::infeasible();
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= first_artificial {
                if let Some(c) = (0..first_artificial).find(|&c| !tab.rows[r][c].is_zero()) {
                    tab.pivot(r, c);
                } else {
                    tab.rows.remove(r);
                    tab.rhs.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }
    }

    let mut phase2 = vec![Rational::zero(); width];
    for (j, c) in lp.objective.iter().enumerate() {
        for &(col, neg) in &maps[j].terms {
            if neg {
                phase2[col] -= c;
            } else {
                phase2[col] += c;
            }
        }
    }
    tab.set_objective(&phase2);
    if !tab.optimize(first_artificial) {
        return LpResult::unbounded();
    }

    let mut y = vec![Rational::zero(); width];
    for (r, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.rhs[r].clone();
    }
    let solution: Vec<Rational> = maps
        .iter()
        .map(|m| {
            let mut x = m.offset.clone();
            for &(col, neg) in &m.terms {
                if neg {
                    x -= &y[col];
                } else {
                    x += &y[col];
                }
            }
            x
        })
        .collect();
    let value = lp.objective.iter().zip(&solution).map(|(c, x)| c * x).sum();
    debug_assert_eq!(solution.len(), n);
    LpResult {
        status: LpStatus::Optimal,
        value,
        solution,
    }
}
