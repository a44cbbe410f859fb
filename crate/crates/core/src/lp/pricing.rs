use num_traits::{One, Signed, Zero};

use super::difference::DifferenceSystem;
use super::{LinearProgram, Relation};
use crate::error::{Error, Result};
use crate::model::{contract_value, Contract, Instance};
use crate::rational::Rational;

/// Largest type count for which all `(T+1)^T` assignments are enumerated.
pub const MAX_INDIRECT_TYPES: usize = 6;

/// `s[t][k] = V(t; C^k)`: the value of contract `k` to type `t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateVector {
    entries: Vec<Vec<Rational>>,
}

impl StateVector {
    pub fn zeros(types: usize) -> Self {
        Self {
            entries: vec![vec![Rational::zero(); types]; types],
        }
    }

    pub fn new(entries: Vec<Vec<Rational>>) -> Result<Self> {
        let n = entries.len();
        if entries.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("state must be square".into()));
        }
        if entries.iter().flatten().any(Signed::is_negative) {
            return Err(Error::InvalidArgument(
                "state entries must be nonnegative".into(),
            ));
        }
        Ok(Self { entries })
    }

    /// Skips the sign check; used for mandatory-usage values, which may be negative.
    pub(crate) fn from_raw(entries: Vec<Vec<Rational>>) -> Self {
        Self { entries }
    }

    /// Values of `contracts` (one per type) to every type.
    pub fn from_contracts(inst: &Instance, contracts: &[Contract]) -> Result<Self> {
        let n = inst.num_types();
        if contracts.len() != n {
            return Err(Error::MenuLength {
                expected: n,
                got: contracts.len(),
            });
        }
        let mut entries = vec![Vec::with_capacity(n); n];
        for (t, row) in entries.iter_mut().enumerate() {
            for c in contracts {
                row.push(contract_value(inst, t, c)?);
            }
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, t: usize, k: usize) -> &Rational {
        &self.entries[t][k]
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn add(&mut self, t: usize, k: usize, delta: &Rational) {
        self.entries[t][k] += delta;
    }

    pub fn set(&mut self, t: usize, k: usize, value: Rational) {
        self.entries[t][k] = value;
    }

    pub fn coordinate_sum(&self) -> Rational {
        self.entries.iter().flatten().sum()
    }
}

/// Contract chosen by each type; `None` opts out.
pub type Assignment = Vec<Option<usize>>;

/// Best upfront prices when type `t` must (weakly) prefer `assignment[t]`.
///
/// `costs[k]` is the action cost of contract `k`, or `None` if contract `k`
/// is not offered. Returns the expected profit and prices, or `None` if no
/// prices make the assignment utility-maximizing. Prices of offered
/// contracts nobody is assigned are set high enough that nobody wants them.
pub fn price_assignment(
    state: &StateVector,
    costs: &[Option<Rational>],
    mu: &[Rational],
    assignment: &[Option<usize>],
) -> Option<(Rational, Vec<Rational>)> {
    let k = costs.len();
    let mut system = DifferenceSystem::new(k + 1);
    let node = |c: usize| c + 1;
    for (c, cost) in costs.iter().enumerate() {
        if cost.is_some() {
            system.add(node(c), 0, Rational::zero());
        }
    }
    for (t, choice) in assignment.iter().enumerate() {
        let row = &state.entries[t];
        match *choice {
            Some(own) => {
                debug_assert!(costs[own].is_some(), "assigned to a missing contract");
                system.add(0, node(own), row[own].clone());
                for (j, cost) in costs.iter().enumerate() {
                    if j != own && cost.is_some() {
                        system.add(node(j), node(own), &row[own] - &row[j]);
                    }
                }
            }
            None => {
                for (j, cost) in costs.iter().enumerate() {
                    if cost.is_some() {
                        system.add(node(j), 0, -row[j].clone());
                    }
                }
            }
        }
    }
    let potentials = system.greatest_solution()?;
    let upfront: Vec<Rational> = (0..k)
        .map(|c| match (&costs[c], &potentials[node(c)]) {
            (None, _) => Rational::zero(),
            (Some(_), Some(w)) => w.clone(),
            (Some(_), None) => {
                let top = state.entries.iter().map(|row| &row[c]).max().cloned();
                top.unwrap_or_else(Rational::zero) + Rational::one()
            }
        })
        .collect();
    let mut profit = Rational::zero();
    for (t, choice) in assignment.iter().enumerate() {
        if let Some(c) = choice {
            let cost = costs[*c].as_ref().expect("assigned contract is offered");
            profit += &mu[t] * (&upfront[*c] - cost);
        }
    }
    Some((profit, upfront))
}

/// The program solved by [`price_assignment`], written out for a general LP
/// solver. Returns the program and the constant expected cost, so that
/// `profit = lp optimum - constant`.
pub fn pricing_program(
    state: &StateVector,
    costs: &[Option<Rational>],
    mu: &[Rational],
    assignment: &[Option<usize>],
) -> (LinearProgram, Rational) {
    let k = costs.len();
    let mut objective = vec![Rational::zero(); k];
    let mut constant = Rational::zero();
    for (t, choice) in assignment.iter().enumerate() {
        if let Some(c) = choice {
            objective[*c] += &mu[t];
            constant += &mu[t] * costs[*c].as_ref().expect("assigned contract is offered");
        }
    }
    let mut lp = LinearProgram::new(k).maximize(objective);
    let unit = |i: usize| {
        let mut v = vec![Rational::zero(); k];
        v[i] = Rational::one();
        v
    };
    for (c, cost) in costs.iter().enumerate() {
        if cost.is_none() {
            lp.bounds[c].upper = Some(Rational::zero());
        }
    }
    for (t, choice) in assignment.iter().enumerate() {
        let row = &state.entries[t];
        match *choice {
            Some(own) => {
                lp.constrain(unit(own), Relation::Le, row[own].clone());
                for j in (0..k).filter(|&j| j != own && costs[j].is_some()) {
                    let mut coeffs = unit(own);
                    coeffs[j] = -Rational::one();
                    lp.constrain(coeffs, Relation::Le, &row[own] - &row[j]);
                }
            }
            None => {
                for j in (0..k).filter(|&j| costs[j].is_some()) {
                    lp.constrain(unit(j), Relation::Ge, row[j].clone());
                }
            }
        }
    }
    (lp, constant)
}

/// Profit-maximizing upfront prices for a direct menu with fixed values.
///
/// `actions[t]` is the action of type `t`'s contract, `None` for a type that
/// is excluded. Returns `None` when the values admit no IC and IR prices.
pub fn optimal_upfront_direct(
    values: &StateVector,
    actions: &[Option<usize>],
    inst: &Instance,
) -> Option<(Vec<Rational>, Rational)> {
    let costs: Vec<Option<Rational>> = actions
        .iter()
        .map(|a| a.map(|a| inst.cost(a).clone()))
        .collect();
    let assignment: Assignment = actions
        .iter()
        .enumerate()
        .map(|(t, a)| a.map(|_| t))
        .collect();
    price_assignment(values, &costs, inst.mu(), &assignment).map(|(profit, w)| (w, profit))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndirectPricing {
    pub profit: Rational,
    pub upfront: Vec<Rational>,
    pub assignment: Assignment,
    /// Number of assignments whose pricing program was feasible.
    pub feasible_assignments: usize,
}

/// Best profit of an indirect menu whose contract values are `state` and
/// whose contract `k` uses `actions[k]`, maximizing over every assignment of
/// types to contracts or the opt-out.
///
/// Profit ties keep the lexicographically smallest assignment, with the
/// opt-out ordered first.
pub fn indirect_profit_of_state(
    state: &StateVector,
    actions: &[usize],
    inst: &Instance,
) -> Result<IndirectPricing> {
    let n = inst.num_types();
    if n > MAX_INDIRECT_TYPES {
        return Err(Error::SizeGuard(format!(
            "indirect pricing enumerates (T+1)^T assignments; T = {n} exceeds {MAX_INDIRECT_TYPES}"
        )));
    }
    if state.dim() != n || actions.len() != n {
        return Err(Error::InvalidArgument(format!(
            "state is {0}x{0} and {1} actions were given for {n} types",
            state.dim(),
            actions.len()
        )));
    }
    let costs: Vec<Option<Rational>> = actions
        .iter()
        .map(|&a| Some(inst.cost(a).clone()))
        .collect();
    let mut digits = vec![0usize; n];
    let mut best: Option<IndirectPricing> = None;
    let mut feasible = 0;
    loop {
        let assignment: Assignment = digits.iter().map(|&d| d.checked_sub(1)).collect();
        if let Some((profit, upfront)) = price_assignment(state, &costs, inst.mu(), &assignment) {
            feasible += 1;
            if best.as_ref().is_none_or(|b| profit > b.profit) {
                best = Some(IndirectPricing {
                    profit,
                    upfront,
                    assignment,
                    feasible_assignments: 0,
                });
            }
        }
        // next assignment in lexicographic order
        let mut pos = n;
        loop {
            if pos == 0 {
                let mut best = best.expect("the all-opt-out assignment is always feasible");
                best.feasible_assignments = feasible;
                return Ok(best);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] <= n {
                break;
            }
            digits[pos] = 0;
        }
    }
}
