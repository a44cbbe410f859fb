//! Exact linear programming and the upfront-price programs built on it.
//!
//! [`solve_lp`] is a general simplex. The pricing programs (IC/IR constraints
//! with fixed contract values) are systems of difference constraints and are
//! solved by exact shortest paths in [`difference`]; [`pricing_program`]
//! writes the same program out for the simplex so the two can be compared.

pub mod difference;
mod pricing;
mod simplex;

pub use pricing::{
    indirect_profit_of_state, optimal_upfront_direct, price_assignment, pricing_program,
    Assignment, IndirectPricing, StateVector, MAX_INDIRECT_TYPES,
};

use num_traits::Zero;

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Bounds {
    pub fn nonnegative() -> Self {
        Self {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        Self {
            lower: None,
            upper: None,
        }
    }
}

/// Maximize `objective · x` subject to `constraints` and per-variable `bounds`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bounds>,
}

impl LinearProgram {
    /// `n` variables, all nonnegative, zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![Rational::zero(); n],
            constraints: Vec::new(),
            bounds: vec![Bounds::nonnegative(); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn maximize(mut self, objective: Vec<Rational>) -> Self {
        assert_eq!(objective.len(), self.num_vars(), "objective length");
        self.objective = objective;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint length");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let bounds_ok = self.bounds.iter().zip(x).all(|(b, v)| {
            b.lower.as_ref().is_none_or(|l| v >= l) && b.upper.as_ref().is_none_or(|u| v <= u)
        });
        bounds_ok
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                }
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `value` and `solution` are meaningful only when `status` is optimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpResult {
    pub status: LpStatus,
    pub value: Rational,
    pub solution: Vec<Rational>,
}

impl LpResult {
    fn infeasible() -> Self {
        Self {
            status: LpStatus::Infeasible,
            value: Rational::zero(),
            solution: Vec::new(),
        }
    }

    fn unbounded() -> Self {
        Self {
            status: LpStatus::Unbounded,
            ..Self::infeasible()
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

pub fn solve_lp(lp: &LinearProgram) -> LpResult {
    simplex::solve(lp)
}
