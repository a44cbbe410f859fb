//! Menu rewrites that preserve (or weakly improve) the seller's position.

use num_traits::Zero;

use super::{
    buyer_utility_voluntary, validate_menu, Contract, DirectMenu, Instance, Regime, UsagePrice,
};
use crate::error::{Error, Result};
use crate::rational::Rational;

fn require_ic(menu: &DirectMenu, inst: &Instance) -> Result<()> {
    let diag = validate_menu(menu, inst, Regime::Voluntary)?;
    if !diag.ic_violations.is_empty() {
        return Err(Error::NotIcIr(Box::new(diag)));
    }
    Ok(())
}

/// Folds every accepted usage price into the upfront price and excludes the
/// rest, so all usage prices become 0 or EXCLUDE.
///
/// Each type's own utility and the seller's profit are unchanged; other types
/// only lose utility from contracts that are not theirs.
pub fn normalize_two_prices(menu: &DirectMenu, inst: &Instance) -> Result<DirectMenu> {
    require_ic(menu, inst)?;
    let contracts = menu
        .contracts
        .iter()
        .enumerate()
        .map(|(t, c)| {
            c.as_ref().map(|c| {
                let probs = &inst.transitions()[c.action];
                let mut upfront = c.upfront.clone();
                let usage = c
                    .usage
                    .iter()
                    .enumerate()
                    .map(|(q, x)| match x {
                        UsagePrice::Finite(price) if inst.value(t, q) >= price => {
                            upfront += &probs[q] * price;
                            UsagePrice::zero()
                        }
                        _ => UsagePrice::Exclude,
                    })
                    .collect();
                Contract {
                    action: c.action,
                    upfront,
                    usage,
                }
            })
        })
        .collect();
    Ok(DirectMenu { contracts })
}

/// Drops the exclusions from the contracts with the highest upfront price.
///
/// Any type that then strictly prefers one of those contracts is moved onto
/// the best of them for it (ties: seller profit, then lowest index).
pub fn zero_usage_for_highest(menu: &DirectMenu, inst: &Instance) -> Result<DirectMenu> {
    if menu.contracts.iter().flatten().any(|c| !c.is_two_price()) {
        return Err(Error::NotTwoPriceForm);
    }
    require_ic(menu, inst)?;
    let Some(top) = menu
        .contracts
        .iter()
        .flatten()
        .map(|c| &c.upfront)
        .max()
        .cloned()
    else {
        return Ok(menu.clone());
    };
    let highest: Vec<(usize, Contract)> = menu
        .contracts
        .iter()
        .enumerate()
        .filter_map(|(t, c)| c.as_ref().filter(|c| c.upfront == top).map(|c| (t, c)))
        .map(|(t, c)| {
            (
                t,
                Contract::upfront_only(c.action, c.upfront.clone(), inst.num_outcomes()),
            )
        })
        .collect();

    let mut out = menu.clone();
    for (t, zeroed) in &highest {
        out.contracts[*t] = Some(zeroed.clone());
    }
    for t in 0..inst.num_types() {
        let current = match &out.contracts[t] {
            Some(c) => buyer_utility_voluntary(inst, t, c)?,
            None => Rational::zero(),
        };
        let mut best: Option<(Rational, Rational, &Contract)> = None;
        for (_, c) in &highest {
            let u = buyer_utility_voluntary(inst, t, c)?;
            let profit = &c.upfront - inst.cost(c.action);
            let better = match &best {
                None => true,
                Some((bu, bp, _)) => u > *bu || (u == *bu && profit > *bp),
            };
            if better {
                best = Some((u, profit, c));
            }
        }
        if let Some((u, _, c)) = best {
            if u > current {
                out.contracts[t] = Some(c.clone());
            }
        }
    }
    Ok(out)
}

/// Moves every usage price into the upfront price (mandatory usage only).
pub fn mandatory_to_upfront(menu: &DirectMenu, inst: &Instance) -> Result<DirectMenu> {
    let mut out = menu.clone();
    for (t, c) in out.contracts.iter_mut().enumerate() {
        let Some(c) = c else { continue };
        inst.check_contract(c)?;
        let probs = &inst.transitions()[c.action];
        for (q, x) in c.usage.iter_mut().enumerate() {
            let price = x.finite().ok_or(Error::ExcludeUnderMandatory {
                contract: t,
                outcome: q,
            })?;
            c.upfront += &probs[q] * price;
            *x = UsagePrice::zero();
        }
    }
    Ok(out)
}
