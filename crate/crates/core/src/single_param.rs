//! Single-parameter instances, where `v^t_q = alpha^t * v(q)`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{
    contract_value, indirect_choice_and_profit, validate_menu, Contract, DirectMenu, IndirectMenu,
    Instance, Regime,
};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleParamInstance {
    base: Instance,
    alpha: Vec<Rational>,
    baseline: Vec<Rational>,
    groups: Vec<Vec<usize>>,
}

impl SingleParamInstance {
    /// Types are reordered by increasing `alpha`; types with equal `alpha`
    /// are merged into one whose mass is the sum of theirs.
    pub fn new(
        mu: Vec<Rational>,
        costs: Vec<Rational>,
        transitions: Vec<Vec<Rational>>,
        alpha: Vec<Rational>,
        baseline: Vec<Rational>,
    ) -> Result<Self> {
        if alpha.len() != mu.len() {
            return Err(Error::InvalidInstance(format!(
                "alpha has {} entries but there are {} types",
                alpha.len(),
                mu.len()
            )));
        }
        if let Some((t, a)) = alpha.iter().enumerate().find(|(_, a)| !a.is_positive()) {
            return Err(Error::InvalidInstance(format!(
                "alpha[{t}] = {a} must be positive"
            )));
        }
        let mut order: Vec<usize> = (0..alpha.len()).collect();
        order.sort_by(|&a, &b| alpha[a].cmp(&alpha[b]));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for t in order {
            match groups.last_mut() {
                Some(g) if alpha[g[0]] == alpha[t] => g.push(t),
                _ => groups.push(vec![t]),
            }
        }
        let merged_mu = groups
            .iter()
            .map(|g| g.iter().map(|&t| &mu[t]).sum())
            .collect();
        let merged_alpha: Vec<Rational> = groups.iter().map(|g| alpha[g[0]].clone()).collect();
        let valuations = merged_alpha
            .iter()
            .map(|a| baseline.iter().map(|v| a * v).collect())
            .collect();
        let base = Instance::new(merged_mu, costs, transitions, valuations)?;
        Ok(Self {
            base,
            alpha: merged_alpha,
            baseline,
            groups,
        })
    }

    pub fn base(&self) -> &Instance {
        &self.base
    }

    pub fn alpha(&self) -> &[Rational] {
        &self.alpha
    }

    pub fn baseline(&self) -> &[Rational] {
        &self.baseline
    }

    /// Original type indices folded into each type.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_types(&self) -> usize {
        self.alpha.len()
    }

    pub fn with_zero_costs(&self) -> Self {
        Self {
            base: self.base.with_zero_costs(),
            ..self.clone()
        }
    }
}

/// `V^t`, the value of each type's own contract.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueProfile {
    pub values: Vec<Rational>,
}

impl ValueProfile {
    pub fn new(values: Vec<Rational>) -> Self {
        Self { values }
    }

    /// Own-contract values of a direct menu; opting out counts as 0.
    pub fn of_menu(menu: &DirectMenu, inst: &SingleParamInstance) -> Result<Self> {
        let values = menu
            .contracts
            .iter()
            .enumerate()
            .map(|(t, c)| match c {
                Some(c) => contract_value(inst.base(), t, c),
                None => Ok(Rational::zero()),
            })
            .collect::<Result<_>>()?;
        Ok(Self { values })
    }
}

/// `M = max_a sum_q p^a_q v(q)` and the lowest action attaining it.
pub fn single_param_m(inst: &SingleParamInstance) -> (Rational, usize) {
    let mut best: Option<(Rational, usize)> = None;
    for (a, row) in inst.base().transitions().iter().enumerate() {
        let m: Rational = row.iter().zip(inst.baseline()).map(|(p, v)| p * v).sum();
        if best.as_ref().is_none_or(|(b, _)| m > *b) {
            best = Some((m, a));
        }
    }
    best.expect("instances have at least one action")
}

fn first_decrease(values: &[Rational], alpha: &[Rational]) -> Option<usize> {
    (1..values.len()).find(|&t| &values[t] / &alpha[t] < &values[t - 1] / &alpha[t - 1])
}

/// Revenue-maximizing upfront prices for a profile of own-contract values:
/// `w^t = V^1 + sum_{i=2..t} (V^i - alpha^i / alpha^(i-1) V^(i-1))`.
pub fn closed_form_upfront(
    profile: &ValueProfile,
    inst: &SingleParamInstance,
) -> Result<Vec<Rational>> {
    let v = &profile.values;
    let alpha = inst.alpha();
    if v.len() != alpha.len() {
        return Err(Error::MenuLength {
            expected: alpha.len(),
            got: v.len(),
        });
    }
    if let Some(t) = first_decrease(v, alpha) {
        return Err(Error::NotMonotone(t - 1, t));
    }
    let mut w = Vec::with_capacity(v.len());
    let mut acc = Rational::zero();
    for t in 0..v.len() {
        if t == 0 {
            acc = v[0].clone();
        } else {
            acc += &v[t] - &alpha[t] / &alpha[t - 1] * &v[t - 1];
        }
        w.push(acc.clone());
    }
    Ok(w)
}

/// Scans thresholds `t*` for `M alpha^(t*) sum_{t >= t*} mu^t` and returns the
/// best value with the lowest threshold attaining it.
pub fn lp_relaxation_optimum(inst: &SingleParamInstance) -> (Rational, usize) {
    let (m, _) = single_param_m(inst);
    let mu = inst.base().mu();
    let mut tail: Rational = mu.iter().sum();
    let mut best: Option<(Rational, usize)> = None;
    for (t, a) in inst.alpha().iter().enumerate() {
        let value = &m * a * &tail;
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, t));
        }
        tail -= &mu[t];
    }
    best.expect("instances have at least one type")
}

/// The single contract `(a*, M alpha^(t*), 0)`: types from `t*` up buy it,
/// the rest opt out. Returns the menu and its revenue.
pub fn best_single_contract(inst: &SingleParamInstance) -> (IndirectMenu, Rational) {
    let (m, action) = single_param_m(inst);
    let (value, t_star) = lp_relaxation_optimum(inst);
    let price = &m * &inst.alpha()[t_star];
    let menu = IndirectMenu {
        contracts: vec![Contract::upfront_only(
            action,
            price,
            inst.base().num_outcomes(),
        )],
    };
    (menu, value)
}

/// Whether `V^t / alpha^t` and `w^t` are nondecreasing across types in an IC
/// menu. An opted-out type counts as value 0 and price 0.
pub fn check_monotone(menu: &DirectMenu, inst: &SingleParamInstance) -> Result<bool> {
    let diag = validate_menu(menu, inst.base(), Regime::Voluntary)?;
    if !diag.ic_violations.is_empty() {
        return Err(Error::NotIcIr(Box::new(diag)));
    }
    let profile = ValueProfile::of_menu(menu, inst)?;
    let prices: Vec<Rational> = menu
        .contracts
        .iter()
        .map(|c| {
            c.as_ref()
                .map_or_else(Rational::zero, |c| c.upfront.clone())
        })
        .collect();
    Ok(first_decrease(&profile.values, inst.alpha()).is_none()
        && prices.windows(2).all(|w| w[0] <= w[1]))
}

/// Best profit of any single contract offered to everyone, searched over
/// every action, every 0/EXCLUDE usage pattern and every upfront price at
/// which some type is indifferent to opting out. `action` restricts the
/// search to one action.
pub fn single_contract_profit_search(
    inst: &Instance,
    action: Option<usize>,
) -> Result<(IndirectMenu, Rational)> {
    let q = inst.num_outcomes();
    if q > 16 {
        return Err(Error::SizeGuard(format!(
            "{q} outcomes give too many usage patterns"
        )));
    }
    let mut best: Option<(IndirectMenu, Rational)> = None;
    for a in (0..inst.num_actions()).filter(|&a| action.is_none_or(|b| a == b)) {
        for mask in 0u32..1 << q {
            let open: Vec<bool> = (0..q).map(|i| mask >> i & 1 == 1).collect();
            let probe = Contract::two_price(a, Rational::zero(), &open);
            let mut prices: Vec<Rational> = (0..inst.num_types())
                .map(|t| contract_value(inst, t, &probe))
                .collect::<Result<_>>()?;
            prices.sort();
            prices.dedup();
            for w in prices {
                let mut c = probe.clone();
                c.upfront = w;
                let menu = IndirectMenu { contracts: vec![c] };
                let (_, profit) = indirect_choice_and_profit(&menu, inst)?;
                if best.as_ref().is_none_or(|(_, b)| profit > *b) {
                    best = Some((menu, profit));
                }
            }
        }
    }
    let Some((menu, profit)) = best else {
        return Err(Error::IndexOutOfRange {
            what: "action",
            index: action.unwrap_or(0),
            size: inst.num_actions(),
        });
    };
    // offering nothing is always possible
    if profit < Rational::zero() {
        return Ok((IndirectMenu::default(), Rational::zero()));
    }
    Ok((menu, profit))
}
