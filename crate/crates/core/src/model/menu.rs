use num_traits::{Signed, Zero};

use super::{accepted_outcomes, buyer_utility, usage_revenue, Contract, Instance, Regime};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// One entry per type. `None` is the opt-out: no contract, no action, no payment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectMenu {
    pub contracts: Vec<Option<Contract>>,
}

impl DirectMenu {
    pub fn new(contracts: Vec<Option<Contract>>) -> Self {
        Self { contracts }
    }

    pub fn from_contracts(contracts: Vec<Contract>) -> Self {
        Self {
            contracts: contracts.into_iter().map(Some).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.contracts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contracts.is_empty()
    }
}

/// Contracts a buyer picks from freely; opting out is always available.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndirectMenu {
    pub contracts: Vec<Contract>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Choice {
    OptOut,
    Contract(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeReport {
    pub choice: Choice,
    pub utility: Rational,
    /// Payments collected from this type (upfront plus usage).
    pub revenue: Rational,
    /// Revenue minus the cost of the chosen action.
    pub profit: Rational,
    pub accepted: Vec<usize>,
}

impl TypeReport {
    fn opt_out() -> Self {
        Self {
            choice: Choice::OptOut,
            utility: Rational::zero(),
            revenue: Rational::zero(),
            profit: Rational::zero(),
            accepted: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MenuDiagnostics {
    pub types: Vec<TypeReport>,
    /// `(t, t')` where type `t` strictly prefers contract `t'` to its own.
    pub ic_violations: Vec<(usize, usize)>,
    /// Types whose own contract gives negative utility.
    pub ir_violations: Vec<usize>,
}

impl MenuDiagnostics {
    pub fn is_ic_ir(&self) -> bool {
        self.ic_violations.is_empty() && self.ir_violations.is_empty()
    }

    /// Expected profit under `mu`.
    pub fn expected_profit(&self, mu: &[Rational]) -> Rational {
        self.types.iter().zip(mu).map(|(r, m)| m * &r.profit).sum()
    }
}

fn check_menu(menu: &DirectMenu, inst: &Instance) -> Result<()> {
    if menu.len() != inst.num_types() {
        return Err(Error::MenuLength {
            expected: inst.num_types(),
            got: menu.len(),
        });
    }
    for c in menu.contracts.iter().flatten() {
        inst.check_contract(c)?;
    }
    Ok(())
}

fn report(
    inst: &Instance,
    t: usize,
    idx: usize,
    c: &Contract,
    regime: Regime,
) -> Result<TypeReport> {
    let utility = buyer_utility(inst, t, c, regime)?;
    let revenue = &c.upfront + usage_revenue(inst, t, c, regime)?;
    let profit = &revenue - inst.cost(c.action);
    let accepted = match regime {
        Regime::Voluntary => accepted_outcomes(inst, t, c),
        Regime::Mandatory => (0..inst.num_outcomes()).collect(),
    };
    Ok(TypeReport {
        choice: Choice::Contract(idx),
        utility,
        revenue,
        profit,
        accepted,
    })
}

/// Checks every IC pair and IR constraint exactly.
pub fn validate_menu(
    menu: &DirectMenu,
    inst: &Instance,
    regime: Regime,
) -> Result<MenuDiagnostics> {
    check_menu(menu, inst)?;
    let mut types = Vec::with_capacity(menu.len());
    let mut ic_violations = Vec::new();
    let mut ir_violations = Vec::new();
    for t in 0..menu.len() {
        let own = match &menu.contracts[t] {
            Some(c) => report(inst, t, t, c, regime)?,
            None => TypeReport::opt_out(),
        };
        if own.utility.is_negative() {
            ir_violations.push(t);
        }
        for (other, c) in menu.contracts.iter().enumerate() {
            let Some(c) = c else { continue };
            if other != t && buyer_utility(inst, t, c, regime)? > own.utility {
                ic_violations.push((t, other));
            }
        }
        types.push(own);
    }
    Ok(MenuDiagnostics {
        types,
        ic_violations,
        ir_violations,
    })
}

/// Expected seller profit of an IC and IR direct menu.
pub fn direct_menu_profit(menu: &DirectMenu, inst: &Instance, regime: Regime) -> Result<Rational> {
    let diag = validate_menu(menu, inst, regime)?;
    if !diag.is_ic_ir() {
        return Err(Error::NotIcIr(Box::new(diag)));
    }
    Ok(diag.expected_profit(inst.mu()))
}

/// Per-type choices under voluntary usage.
///
/// Among utility-maximal options (opt-out has utility 0) the buyer picks the
/// one most profitable for the seller, then the lowest index, with opt-out
/// ranked before every contract.
pub fn indirect_diagnostics(menu: &IndirectMenu, inst: &Instance) -> Result<MenuDiagnostics> {
    for c in &menu.contracts {
        inst.check_contract(c)?;
    }
    let mut types = Vec::with_capacity(inst.num_types());
    for t in 0..inst.num_types() {
        let mut best = TypeReport::opt_out();
        for (k, c) in menu.contracts.iter().enumerate() {
            let r = report(inst, t, k, c, Regime::Voluntary)?;
            if r.utility > best.utility || (r.utility == best.utility && r.profit > best.profit) {
                best = r;
            }
        }
        types.push(best);
    }
    Ok(MenuDiagnostics {
        types,
        ic_violations: Vec::new(),
        ir_violations: Vec::new(),
    })
}

pub fn indirect_choice_and_profit(
    menu: &IndirectMenu,
    inst: &Instance,
) -> Result<(Vec<Choice>, Rational)> {
    let diag = indirect_diagnostics(menu, inst)?;
    let profit = diag.expected_profit(inst.mu());
    Ok((diag.types.into_iter().map(|r| r.choice).collect(), profit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::model::UsagePrice;
    use crate::rational::{int, ratio};

    fn a10_menu(w2: i64) -> DirectMenu {
        DirectMenu::from_contracts(vec![
            Contract::upfront_only(0, int(1), 2),
            Contract::upfront_only(1, int(w2), 2),
        ])
    }

    #[test]
    fn a10_menu_is_ic_ir_with_profit_seven_sixths() {
        let inst = instances::gen_single_param_counterexample();
        let diag = validate_menu(&a10_menu(3), inst.base(), Regime::Voluntary).unwrap();
        assert!(diag.is_ic_ir());
        assert_eq!(
            direct_menu_profit(&a10_menu(3), inst.base(), Regime::Voluntary).unwrap(),
            ratio(7, 6)
        );
    }

    #[test]
    fn raising_second_price_breaks_ic() {
        let inst = instances::gen_single_param_counterexample();
        let diag = validate_menu(&a10_menu(4), inst.base(), Regime::Voluntary).unwrap();
        assert_eq!(diag.ic_violations, vec![(1, 0)]);
        assert_eq!(diag.types[1].utility, int(0));
        assert!(diag.ir_violations.is_empty());
        assert!(matches!(
            direct_menu_profit(&a10_menu(4), inst.base(), Regime::Voluntary),
            Err(Error::NotIcIr(_))
        ));
    }

    #[test]
    fn identical_contracts_never_violate_ic() {
        let inst = instances::gen_usage_gap();
        let c = Contract::upfront_only(0, ratio(3, 4), 2);
        let menu = DirectMenu::from_contracts(vec![c.clone(), c]);
        let diag = validate_menu(&menu, &inst, Regime::Voluntary).unwrap();
        assert!(diag.ic_violations.is_empty());
        assert_eq!(diag.types[0].utility, int(0));
    }

    #[test]
    fn shared_a1_contract_earns_three_halves() {
        let inst = instances::gen_hmu_worstcase(&[ratio(1, 2), ratio(1, 2)]).unwrap();
        let c = Contract::new(
            0,
            int(0),
            vec![UsagePrice::Finite(int(4)), UsagePrice::Finite(int(2))],
        )
        .unwrap();
        let menu = DirectMenu::from_contracts(vec![c.clone(), c]);
        assert_eq!(
            direct_menu_profit(&menu, &inst, Regime::Voluntary).unwrap(),
            ratio(3, 2)
        );
    }

    #[test]
    fn zero_payment_menu_loses_expected_cost() {
        let inst = instances::gen_single_param_counterexample();
        let menu = DirectMenu::from_contracts(vec![
            Contract::upfront_only(1, int(0), 2),
            Contract::upfront_only(1, int(0), 2),
        ]);
        assert_eq!(
            direct_menu_profit(&menu, inst.base(), Regime::Voluntary).unwrap(),
            ratio(-3, 2)
        );
    }

    #[test]
    fn wrong_menu_length() {
        let inst = instances::gen_usage_gap();
        let menu = DirectMenu::from_contracts(vec![Contract::upfront_only(0, int(0), 2)]);
        assert!(matches!(
            validate_menu(&menu, &inst, Regime::Voluntary),
            Err(Error::MenuLength {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn opt_out_entry_checks_ir_of_others() {
        let inst = instances::gen_usage_gap();
        // type 0 opts out although the contract offered to type 1 is free
        let menu = DirectMenu::new(vec![None, Some(Contract::upfront_only(0, int(0), 2))]);
        let diag = validate_menu(&menu, &inst, Regime::Voluntary).unwrap();
        assert_eq!(diag.ic_violations, vec![(0, 1)]);
    }

    #[test]
    fn empty_indirect_menu_everyone_opts_out() {
        let inst = instances::gen_usage_gap();
        let (choices, profit) =
            indirect_choice_and_profit(&IndirectMenu::default(), &inst).unwrap();
        assert_eq!(choices, vec![Choice::OptOut; 2]);
        assert_eq!(profit, int(0));
    }

    #[test]
    fn indirect_buyers_pick_the_cheaper_twin() {
        let inst = instances::gen_usage_gap();
        let menu = IndirectMenu {
            contracts: vec![
                Contract::upfront_only(0, ratio(1, 2), 2),
                Contract::upfront_only(0, ratio(1, 4), 2),
            ],
        };
        let (choices, profit) = indirect_choice_and_profit(&menu, &inst).unwrap();
        assert_eq!(choices, vec![Choice::Contract(1); 2]);
        assert_eq!(profit, ratio(1, 4));
    }

    #[test]
    fn indirect_ties_go_to_the_seller() {
        let inst = instances::gen_usage_gap();
        // both contracts leave utility 0 for every type; the pricier one wins
        // and beats opting out
        let menu = IndirectMenu {
            contracts: vec![
                Contract::two_price(0, int(0), &[false, false]),
                Contract::upfront_only(0, ratio(3, 4), 2),
            ],
        };
        let (choices, profit) = indirect_choice_and_profit(&menu, &inst).unwrap();
        assert_eq!(choices, vec![Choice::Contract(1); 2]);
        assert_eq!(profit, ratio(3, 4));
        // identical twins: lowest index
        let twin = Contract::upfront_only(0, ratio(3, 4), 2);
        let menu = IndirectMenu {
            contracts: vec![twin.clone(), twin],
        };
        let (choices, _) = indirect_choice_and_profit(&menu, &inst).unwrap();
        assert_eq!(choices, vec![Choice::Contract(0); 2]);
    }
}
