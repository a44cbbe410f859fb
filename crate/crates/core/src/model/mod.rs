//! Problem primitives: instances, two-part-tariff contracts, buyer utilities.
//!
//! Types and outcomes are indexed from zero. All arithmetic is exact.

mod menu;
mod transform;

pub use menu::{
    direct_menu_profit, indirect_choice_and_profit, indirect_diagnostics, validate_menu, Choice,
    DirectMenu, IndirectMenu, MenuDiagnostics, TypeReport,
};
pub use transform::{mandatory_to_upfront, normalize_two_prices, zero_usage_for_highest};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Whether the buyer may reject a realized outcome (and skip its usage price).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Voluntary,
    Mandatory,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    mu: Vec<Rational>,
    costs: Vec<Rational>,
    transitions: Vec<Vec<Rational>>,
    valuations: Vec<Vec<Rational>>,
}

impl Instance {
    /// `transitions` is actions x outcomes, `valuations` is types x outcomes.
    pub fn new(
        mu: Vec<Rational>,
        costs: Vec<Rational>,
        transitions: Vec<Vec<Rational>>,
        valuations: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidInstance(msg));
        if mu.is_empty() {
            return invalid("there must be at least one buyer type".into());
        }
        if costs.is_empty() {
            return invalid("there must be at least one action".into());
        }
        if transitions.len() != costs.len() {
            return invalid(format!(
                "p has {} rows but there are {} actions",
                transitions.len(),
                costs.len()
            ));
        }
        if valuations.len() != mu.len() {
            return invalid(format!(
                "v has {} rows but there are {} types",
                valuations.len(),
                mu.len()
            ));
        }
        let outcomes = transitions[0].len();
        if outcomes == 0 {
            return invalid("there must be at least one outcome".into());
        }
        for (t, m) in mu.iter().enumerate() {
            if !m.is_positive() {
                return invalid(format!("mu[{t}] = {m} must be positive"));
            }
        }
        let total: Rational = mu.iter().sum();
        if !total.is_one() {
            return invalid(format!("mu sums to {total}, expected 1"));
        }
        for (a, c) in costs.iter().enumerate() {
            if c.is_negative() {
                return invalid(format!("cost of action {a} is negative ({c})"));
            }
        }
        for (a, row) in transitions.iter().enumerate() {
            if row.len() != outcomes {
                return invalid(format!(
                    "p row {a} has {} entries, expected {outcomes}",
                    row.len()
                ));
            }
            if let Some((q, p)) = row
                .iter()
                .enumerate()
                .find(|(_, p)| p.is_negative() || **p > Rational::one())
            {
                return invalid(format!("p row {a} entry {q} = {p} is outside [0, 1]"));
            }
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return invalid(format!("p row {a} sums to {sum}, expected 1"));
            }
        }
        for (t, row) in valuations.iter().enumerate() {
            if row.len() != outcomes {
                return invalid(format!(
                    "v row {t} has {} entries, expected {outcomes}",
                    row.len()
                ));
            }
            if let Some((q, v)) = row.iter().enumerate().find(|(_, v)| v.is_negative()) {
                return invalid(format!("v row {t} entry {q} = {v} is negative"));
            }
        }
        Ok(Self {
            mu,
            costs,
            transitions,
            valuations,
        })
    }

    pub fn num_types(&self) -> usize {
        self.mu.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.transitions[0].len()
    }

    pub fn num_actions(&self) -> usize {
        self.costs.len()
    }

    pub fn mu(&self) -> &[Rational] {
        &self.mu
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn transitions(&self) -> &[Vec<Rational>] {
        &self.transitions
    }

    pub fn valuations(&self) -> &[Vec<Rational>] {
        &self.valuations
    }

    pub fn cost(&self, action: usize) -> &Rational {
        &self.costs[action]
    }

    pub fn prob(&self, action: usize, outcome: usize) -> &Rational {
        &self.transitions[action][outcome]
    }

    pub fn value(&self, t: usize, outcome: usize) -> &Rational {
        &self.valuations[t][outcome]
    }

    /// Expected value of action `a` to type `t` when every outcome is accepted.
    pub fn full_value(&self, t: usize, action: usize) -> Rational {
        self.transitions[action]
            .iter()
            .zip(&self.valuations[t])
            .map(|(p, v)| p * v)
            .sum()
    }

    /// The same instance with every action cost set to zero.
    pub fn with_zero_costs(&self) -> Self {
        Self {
            costs: vec![Rational::zero(); self.costs.len()],
            ..self.clone()
        }
    }

    pub(crate) fn check_type(&self, t: usize) -> Result<()> {
        if t >= self.num_types() {
            return Err(Error::IndexOutOfRange {
                what: "type",
                index: t,
                size: self.num_types(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_contract(&self, contract: &Contract) -> Result<()> {
        if contract.action >= self.num_actions() {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: contract.action,
                size: self.num_actions(),
            });
        }
        if contract.usage.len() != self.num_outcomes() {
            return Err(Error::InvalidContract(format!(
                "usage vector has {} entries but there are {} outcomes",
                contract.usage.len(),
                self.num_outcomes()
            )));
        }
        Ok(())
    }
}

/// A usage price: a finite nonnegative amount, or a price nobody accepts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UsagePrice {
    Finite(Rational),
    Exclude,
}

impl UsagePrice {
    pub fn zero() -> Self {
        UsagePrice::Finite(Rational::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, UsagePrice::Finite(x) if x.is_zero())
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            UsagePrice::Finite(x) => Some(x),
            UsagePrice::Exclude => None,
        }
    }

    /// Buyer with valuation `value` accepts; ties go to the seller.
    pub fn accepts(&self, value: &Rational) -> bool {
        match self {
            UsagePrice::Finite(x) => value >= x,
            UsagePrice::Exclude => false,
        }
    }
}

impl std::fmt::Display for UsagePrice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UsagePrice::Finite(x) => write!(f, "{x}"),
            UsagePrice::Exclude => f.write_str("EXCLUDE"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Contract {
    pub action: usize,
    pub upfront: Rational,
    pub usage: Vec<UsagePrice>,
}

impl Contract {
    pub fn new(action: usize, upfront: Rational, usage: Vec<UsagePrice>) -> Result<Self> {
        if upfront.is_negative() {
            return Err(Error::InvalidContract(format!(
                "upfront price {upfront} is negative"
            )));
        }
        if let Some(q) = usage
            .iter()
            .position(|x| x.finite().is_some_and(|x| x.is_negative()))
        {
            return Err(Error::InvalidContract(format!(
                "usage price for outcome {q} is negative"
            )));
        }
        Ok(Self {
            action,
            upfront,
            usage,
        })
    }

    /// Contract with all usage prices zero.
    pub fn upfront_only(action: usize, upfront: Rational, outcomes: usize) -> Self {
        Self {
            action,
            upfront,
            usage: vec![UsagePrice::zero(); outcomes],
        }
    }

    /// Contract in {0, EXCLUDE} form: outcome `q` is open iff `open[q]`.
    pub fn two_price(action: usize, upfront: Rational, open: &[bool]) -> Self {
        Self {
            action,
            upfront,
            usage: open
                .iter()
                .map(|&o| {
                    if o {
                        UsagePrice::zero()
                    } else {
                        UsagePrice::Exclude
                    }
                })
                .collect(),
        }
    }

    pub fn is_two_price(&self) -> bool {
        self.usage
            .iter()
            .all(|x| matches!(x, UsagePrice::Exclude) || x.is_zero())
    }
}

/// `V(t; C) = U(t; C) + w`: the buyer's expected surplus before the upfront price.
pub fn contract_value(inst: &Instance, t: usize, contract: &Contract) -> Result<Rational> {
    inst.check_type(t)?;
    inst.check_contract(contract)?;
    Ok(value_unchecked(inst, t, contract))
}

pub(crate) fn value_unchecked(inst: &Instance, t: usize, contract: &Contract) -> Rational {
    let probs = &inst.transitions[contract.action];
    let mut total = Rational::zero();
    for ((p, v), x) in probs.iter().zip(&inst.valuations[t]).zip(&contract.usage) {
        if let UsagePrice::Finite(x) = x {
            if v > x {
                total += p * (v - x);
            }
        }
    }
    total
}

pub fn buyer_utility_voluntary(inst: &Instance, t: usize, contract: &Contract) -> Result<Rational> {
    Ok(contract_value(inst, t, contract)? - &contract.upfront)
}

/// Utility when every realized outcome must be accepted and paid for.
pub fn buyer_utility_mandatory(inst: &Instance, t: usize, contract: &Contract) -> Result<Rational> {
    inst.check_type(t)?;
    inst.check_contract(contract)?;
    let probs = &inst.transitions[contract.action];
    let mut total = -contract.upfront.clone();
    for (q, x) in contract.usage.iter().enumerate() {
        let x = x.finite().ok_or(Error::ExcludeUnderMandatory {
            contract: t,
            outcome: q,
        })?;
        total += &probs[q] * (&inst.valuations[t][q] - x);
    }
    Ok(total)
}

pub fn buyer_utility(
    inst: &Instance,
    t: usize,
    contract: &Contract,
    regime: Regime,
) -> Result<Rational> {
    match regime {
        Regime::Voluntary => buyer_utility_voluntary(inst, t, contract),
        Regime::Mandatory => buyer_utility_mandatory(inst, t, contract),
    }
}

/// Expected usage payments collected from type `t` under `contract`.
pub fn usage_revenue(
    inst: &Instance,
    t: usize,
    contract: &Contract,
    regime: Regime,
) -> Result<Rational> {
    inst.check_type(t)?;
    inst.check_contract(contract)?;
    let probs = &inst.transitions[contract.action];
    let mut total = Rational::zero();
    for (q, x) in contract.usage.iter().enumerate() {
        match (x, regime) {
            (UsagePrice::Finite(x), Regime::Mandatory) => total += &probs[q] * x,
            (UsagePrice::Finite(x), Regime::Voluntary) => {
                if &inst.valuations[t][q] >= x {
                    total += &probs[q] * x;
                }
            }
            (UsagePrice::Exclude, Regime::Mandatory) => {
                return Err(Error::ExcludeUnderMandatory {
                    contract: t,
                    outcome: q,
                })
            }
            (UsagePrice::Exclude, Regime::Voluntary) => {}
        }
    }
    Ok(total)
}

/// Outcomes type `t` accepts under `contract` (voluntary usage).
pub fn accepted_outcomes(inst: &Instance, t: usize, contract: &Contract) -> Vec<usize> {
    contract
        .usage
        .iter()
        .enumerate()
        .filter(|(q, x)| x.accepts(&inst.valuations[t][*q]))
        .map(|(q, _)| q)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn coin_instance() -> Instance {
        // one type, one action, p = (1/2, 1/2), v = (3, 4)
        Instance::new(
            vec![int(1)],
            vec![int(0)],
            vec![vec![ratio(1, 2), ratio(1, 2)]],
            vec![vec![int(3), int(4)]],
        )
        .unwrap()
    }

    fn fin(n: i64) -> UsagePrice {
        UsagePrice::Finite(int(n))
    }

    #[test]
    fn value_and_utilities_by_hand() {
        let inst = coin_instance();
        let c = Contract::new(0, int(1), vec![fin(2), fin(5)]).unwrap();
        assert_eq!(contract_value(&inst, 0, &c).unwrap(), ratio(1, 2));
        assert_eq!(buyer_utility_voluntary(&inst, 0, &c).unwrap(), ratio(-1, 2));
        assert_eq!(buyer_utility_mandatory(&inst, 0, &c).unwrap(), int(-1));
    }

    #[test]
    fn all_excluded_contract_has_zero_value() {
        let inst = coin_instance();
        let c = Contract::two_price(0, int(3), &[false, false]);
        assert_eq!(contract_value(&inst, 0, &c).unwrap(), int(0));
    }

    #[test]
    fn zero_prices_give_full_surplus_in_both_regimes() {
        let inst = coin_instance();
        let c = Contract::upfront_only(0, int(0), 2);
        let full = ratio(7, 2);
        assert_eq!(buyer_utility_voluntary(&inst, 0, &c).unwrap(), full);
        assert_eq!(buyer_utility_mandatory(&inst, 0, &c).unwrap(), full);
    }

    #[test]
    fn exact_extraction_under_mandatory_usage() {
        let inst = coin_instance();
        let c = Contract::new(0, int(0), vec![fin(3), fin(4)]).unwrap();
        assert_eq!(buyer_utility_mandatory(&inst, 0, &c).unwrap(), int(0));
    }

    #[test]
    fn mandatory_rejects_exclude() {
        let inst = coin_instance();
        let c = Contract::two_price(0, int(0), &[true, false]);
        assert!(matches!(
            buyer_utility_mandatory(&inst, 0, &c),
            Err(Error::ExcludeUnderMandatory { outcome: 1, .. })
        ));
    }

    #[test]
    fn ties_are_accepted() {
        let inst = coin_instance();
        let c = Contract::new(0, int(0), vec![fin(3), fin(5)]).unwrap();
        assert_eq!(accepted_outcomes(&inst, 0, &c), vec![0]);
        assert_eq!(
            usage_revenue(&inst, 0, &c, Regime::Voluntary).unwrap(),
            ratio(3, 2)
        );
        assert_eq!(
            usage_revenue(&inst, 0, &c, Regime::Mandatory).unwrap(),
            int(4)
        );
    }

    #[test]
    fn index_errors() {
        let inst = coin_instance();
        let c = Contract::upfront_only(0, int(0), 2);
        assert!(matches!(
            contract_value(&inst, 1, &c),
            Err(Error::IndexOutOfRange { what: "type", .. })
        ));
        let bad = Contract::upfront_only(3, int(0), 2);
        assert!(contract_value(&inst, 0, &bad).is_err());
        let short = Contract::upfront_only(0, int(0), 1);
        assert!(contract_value(&inst, 0, &short).is_err());
    }

    #[test]
    fn instance_validation_names_the_problem() {
        let err = Instance::new(
            vec![int(1)],
            vec![int(0)],
            vec![vec![ratio(1, 2), ratio(2, 5)]],
            vec![vec![int(1), int(1)]],
        )
        .unwrap_err();
        assert!(err.to_string().contains("p row 0 sums to 9/10"), "{err}");
        let err = Instance::new(
            vec![ratio(1, 2), ratio(1, 2), int(0)],
            vec![int(0)],
            vec![vec![int(1)]],
            vec![vec![int(1)], vec![int(1)], vec![int(1)]],
        )
        .unwrap_err();
        assert!(err.to_string().contains("mu[2]"), "{err}");
        assert!(Contract::new(0, int(-1), vec![]).is_err());
    }
}
