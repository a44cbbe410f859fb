//! Exact optima by enumeration for the four payment schemes.
//!
//! Direct menus are searched type by type: each type either opts out or gets
//! a contract (action plus usage prices) from a finite candidate list, and
//! the upfront prices are then set optimally by the difference-constraint
//! pricing program.

use std::collections::HashSet;

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{price_assignment, solve_lp, LinearProgram, Relation, StateVector};
use crate::model::{
    mandatory_to_upfront, validate_menu, Contract, DirectMenu, IndirectMenu, Instance,
    MenuDiagnostics, Regime, UsagePrice,
};
use crate::rational::Rational;

/// Largest `T * Q` accepted by [`solve_exact`].
pub const MAX_TYPE_OUTCOMES: usize = 20;
/// Largest number of per-type action choices `(A + 1)^T`.
pub const MAX_ACTION_ASSIGNMENTS: u64 = 100_000;
/// Largest `T^2 * Q` accepted by [`solve_usage_only`].
pub const MAX_USAGE_PATTERN_BITS: usize = 16;
/// Largest candidate count for the price-grid and redistribution checks.
pub const MAX_GRID_MENUS: u64 = 200_000;
/// Candidate direct menus (one pricing program each) a direct search may examine.
pub const MAX_DIRECT_MENUS: u64 = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Upfront and usage prices.
    TwoPart,
    UpfrontOnly,
    UsageOnly,
    /// Upfront and usage prices, every outcome paid for.
    Mandatory,
}

impl Scheme {
    pub fn regime(self) -> Regime {
        match self {
            Scheme::Mandatory => Regime::Mandatory,
            _ => Regime::Voluntary,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Direct(DirectMenu),
    Indirect(IndirectMenu),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Pricing programs and LPs solved.
    pub programs: u64,
    /// Candidate menus (or DP states) examined.
    pub patterns: u64,
}

impl Counters {
    fn merge(self, other: Counters) -> Counters {
        Counters {
            programs: self.programs + other.programs,
            patterns: self.patterns + other.patterns,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub scheme: Scheme,
    pub profit: Rational,
    pub witness: Witness,
    pub diagnostics: MenuDiagnostics,
    pub counters: Counters,
    /// Independent recomputation of the profit, when one was run.
    pub cross_check: Option<Rational>,
}

fn product_size(base: u64, exp: usize) -> Option<u64> {
    (0..exp).try_fold(1u64, |acc, _| acc.checked_mul(base))
}

fn check_action_guard(inst: &Instance) -> Result<u64> {
    let choices = inst.num_actions() as u64 + 1;
    match product_size(choices, inst.num_types()) {
        Some(n) if n <= MAX_ACTION_ASSIGNMENTS => Ok(n),
        _ => Err(Error::SizeGuard(format!(
            "(A+1)^T = {choices}^{} action choices exceeds {MAX_ACTION_ASSIGNMENTS}",
            inst.num_types()
        ))),
    }
}

/// Decodes the `index`-th per-type action choice in lexicographic order,
/// type 0 most significant, opt-out first.
fn action_choice(index: u64, types: usize, actions: usize) -> Vec<Option<usize>> {
    let base = actions as u64 + 1;
    let mut digits = vec![None; types];
    let mut rest = index;
    for t in (0..types).rev() {
        let d = (rest % base) as usize;
        rest /= base;
        digits[t] = d.checked_sub(1);
    }
    digits
}

/// Steps `digits` to the next tuple in lexicographic order (last digit
/// fastest). Returns false after the last tuple.
fn advance(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// A contract without its upfront price, with its value to every type and
/// the usage revenue it collects from every type.
#[derive(Clone, Debug)]
struct Candidate {
    usage: Vec<UsagePrice>,
    values: Vec<Rational>,
    usage_revenue: Vec<Rational>,
}

fn candidate(inst: &Instance, action: usize, usage: Vec<UsagePrice>) -> Candidate {
    let probs = &inst.transitions()[action];
    let mut values = Vec::with_capacity(inst.num_types());
    let mut usage_revenue = Vec::with_capacity(inst.num_types());
    for row in inst.valuations() {
        let mut value = Rational::zero();
        let mut revenue = Rational::zero();
        for ((p, v), x) in probs.iter().zip(row).zip(&usage) {
            if p.is_zero() {
                continue;
            }
            if let UsagePrice::Finite(x) = x {
                if v >= x {
                    value += p * (v - x);
                    revenue += p * x;
                }
            }
        }
        values.push(value);
        usage_revenue.push(revenue);
    }
    Candidate {
        usage,
        values,
        usage_revenue,
    }
}

/// Keeps the first candidate for every distinct (values, revenue) pair.
fn dedup(candidates: Vec<Candidate>) -> Vec<Candidate> {
    let mut seen = HashSet::new();
    candidates
        .into_iter()
        .filter(|c| seen.insert((c.values.clone(), c.usage_revenue.clone())))
        .collect()
}

fn two_price_candidates(inst: &Instance, action: usize) -> Vec<Candidate> {
    let q = inst.num_outcomes();
    let all = (0u32..1 << q)
        .map(|mask| {
            let usage = (0..q)
                .map(|i| {
                    if mask >> (q - 1 - i) & 1 == 1 {
                        UsagePrice::Exclude
                    } else {
                        UsagePrice::zero()
                    }
                })
                .collect();
            candidate(inst, action, usage)
        })
        .collect();
    dedup(all)
}

fn upfront_candidates(inst: &Instance, action: usize) -> Vec<Candidate> {
    vec![candidate(
        inst,
        action,
        vec![UsagePrice::zero(); inst.num_outcomes()],
    )]
}

/// Usage prices from `{0} ∪ {v^u_q} ∪ {EXCLUDE}` per outcome.
fn grid_candidates(inst: &Instance, action: usize) -> Vec<Candidate> {
    let grids: Vec<Vec<UsagePrice>> = (0..inst.num_outcomes())
        .map(|q| {
            let mut vals: Vec<Rational> =
                inst.valuations().iter().map(|row| row[q].clone()).collect();
            vals.push(Rational::zero());
            vals.sort();
            vals.dedup();
            let mut grid: Vec<UsagePrice> = vals.into_iter().map(UsagePrice::Finite).collect();
            grid.push(UsagePrice::Exclude);
            grid
        })
        .collect();
    let mut all = Vec::new();
    let mut idx = vec![0usize; grids.len()];
    loop {
        let usage = idx.iter().zip(&grids).map(|(&i, g)| g[i].clone()).collect();
        all.push(candidate(inst, action, usage));
        if !advance(&mut idx, |q| grids[q].len()) {
            return dedup(all);
        }
    }
}

struct Best {
    profit: Rational,
    picks: Vec<usize>,
    upfront: Vec<Rational>,
}

/// Best direct menu for one per-type action choice, iterating the product
/// of candidate lists in lexicographic order.
fn best_for_actions(
    inst: &Instance,
    actions: &[Option<usize>],
    candidates: &[Vec<Candidate>],
) -> (Option<Best>, Counters) {
    let n = inst.num_types();
    let lists: Vec<&[Candidate]> = actions
        .iter()
        .map(|a| match a {
            Some(a) => candidates[*a].as_slice(),
            None => &[],
        })
        .collect();
    let assignment: Vec<Option<usize>> = actions
        .iter()
        .enumerate()
        .map(|(t, a)| a.map(|_| t))
        .collect();
    let mut state = StateVector::zeros(n);
    let mut costs: Vec<Option<Rational>> = vec![None; n];
    let mut picks = vec![0usize; n];
    let served: Vec<usize> = (0..n).filter(|&t| actions[t].is_some()).collect();
    let install =
        |state: &mut StateVector, costs: &mut [Option<Rational>], t: usize, c: &Candidate| {
            for u in 0..n {
                state.set(u, t, c.values[u].clone());
            }
            let a = actions[t].expect("served type");
            costs[t] = Some(inst.cost(a) - &c.usage_revenue[t]);
        };
    for &t in &served {
        install(&mut state, &mut costs, t, &lists[t][0]);
    }
    let mut counters = Counters::default();
    let mut best: Option<Best> = None;
    loop {
        counters.patterns += 1;
        counters.programs += 1;
        if let Some((profit, upfront)) = price_assignment(&state, &costs, inst.mu(), &assignment) {
            if best.as_ref().is_none_or(|b| profit > b.profit) {
                best = Some(Best {
                    profit,
                    picks: picks.clone(),
                    upfront,
                });
            }
        }
        let mut i = served.len();
        loop {
            if i == 0 {
                return (best, counters);
            }
            i -= 1;
            let t = served[i];
            picks[t] += 1;
            if picks[t] < lists[t].len() {
                install(&mut state, &mut costs, t, &lists[t][picks[t]]);
                break;
            }
            picks[t] = 0;
            install(&mut state, &mut costs, t, &lists[t][0]);
        }
    }
}

fn search_direct(
    inst: &Instance,
    scheme: Scheme,
    make: impl Fn(&Instance, usize) -> Vec<Candidate>,
) -> Result<SolveResult> {
    let choices = check_action_guard(inst)?;
    let candidates: Vec<Vec<Candidate>> = (0..inst.num_actions()).map(|a| make(inst, a)).collect();
    let n = inst.num_types();
    // every type picks the opt-out or one (action, candidate) pair
    let per_type = 1 + candidates.iter().map(|c| c.len() as u64).sum::<u64>();
    match product_size(per_type, n) {
        Some(m) if m <= MAX_DIRECT_MENUS => {}
        _ => {
            return Err(Error::SizeGuard(format!(
                "{per_type}^{n} candidate direct menus exceeds {MAX_DIRECT_MENUS}"
            )))
        }
    }
    let a = inst.num_actions();
    let results: Vec<(Option<Best>, Counters)> = (0..choices)
        .into_par_iter()
        .map(|i| best_for_actions(inst, &action_choice(i, n, a), &candidates))
        .collect();
    let mut counters = Counters::default();
    let mut best: Option<(u64, Best)> = None;
    for (i, (b, c)) in results.into_iter().enumerate() {
        counters = counters.merge(c);
        if let Some(b) = b {
            if best.as_ref().is_none_or(|(_, cur)| b.profit > cur.profit) {
                best = Some((i as u64, b));
            }
        }
    }
    let (index, best) = best.expect("the all-opt-out menu is always feasible");
    let actions = action_choice(index, n, a);
    let contracts = (0..n)
        .map(|t| {
            actions[t].map(|a| {
                let c = &candidates[a][best.picks[t]];
                Contract {
                    action: a,
                    upfront: best.upfront[t].clone(),
                    usage: c.usage.clone(),
                }
            })
        })
        .collect();
    finish_direct(
        inst,
        scheme,
        DirectMenu::new(contracts),
        best.profit,
        counters,
    )
}

fn finish_direct(
    inst: &Instance,
    scheme: Scheme,
    menu: DirectMenu,
    profit: Rational,
    counters: Counters,
) -> Result<SolveResult> {
    let diagnostics = validate_menu(&menu, inst, scheme.regime())?;
    debug_assert!(diagnostics.is_ic_ir());
    debug_assert_eq!(diagnostics.expected_profit(inst.mu()), profit);
    Ok(SolveResult {
        scheme,
        profit,
        witness: Witness::Direct(menu),
        diagnostics,
        counters,
        cross_check: None,
    })
}

/// `R`: the best direct menu with upfront and usage prices in `{0, EXCLUDE}`.
pub fn solve_exact(inst: &Instance) -> Result<SolveResult> {
    let size = inst.num_types() * inst.num_outcomes();
    if size > MAX_TYPE_OUTCOMES {
        return Err(Error::SizeGuard(format!(
            "T*Q = {size} exceeds {MAX_TYPE_OUTCOMES}"
        )));
    }
    search_direct(inst, Scheme::TwoPart, two_price_candidates)
}

/// `R_upfront`: every usage price is zero.
pub fn solve_upfront_only(inst: &Instance) -> Result<SolveResult> {
    search_direct(inst, Scheme::UpfrontOnly, upfront_candidates)
}

/// `R` recomputed with usage prices ranging over `{0} ∪ {v^u_q} ∪ {EXCLUDE}`.
/// A sanity check on the 0/EXCLUDE search space for tiny instances.
pub fn solve_exact_price_grid(inst: &Instance) -> Result<SolveResult> {
    check_action_guard(inst)?;
    let per_outcome: u64 = (0..inst.num_outcomes())
        .map(|q| {
            let mut vals: Vec<&Rational> = inst.valuations().iter().map(|row| &row[q]).collect();
            vals.sort();
            vals.dedup();
            vals.len() as u64 + 2
        })
        .try_fold(1u64, |acc, k| acc.checked_mul(k))
        .unwrap_or(u64::MAX);
    let menus = product_size(
        per_outcome.saturating_mul(inst.num_actions() as u64 + 1),
        inst.num_types(),
    );
    if menus.is_none_or(|m| m > MAX_GRID_MENUS) {
        return Err(Error::SizeGuard(format!(
            "price grid has more than {MAX_GRID_MENUS} candidate menus"
        )));
    }
    search_direct(inst, Scheme::TwoPart, grid_candidates)
}

/// `R_mandatory`, which equals `R_upfront`. On small instances the value is
/// recomputed by [`mandatory_redistribution_check`] and stored in
/// `cross_check`.
pub fn solve_mandatory(inst: &Instance) -> Result<SolveResult> {
    let mut result = solve_upfront_only(inst)?;
    result.scheme = Scheme::Mandatory;
    result.diagnostics = validate_menu(
        match &result.witness {
            Witness::Direct(m) => m,
            Witness::Indirect(_) => unreachable!("upfront search returns direct menus"),
        },
        inst,
        Regime::Mandatory,
    )?;
    result.cross_check = match mandatory_redistribution_check(inst) {
        Ok(v) => Some(v),
        Err(Error::SizeGuard(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(result)
}

/// Best mandatory-usage profit over usage prices from `{0} ∪ {v^u_q}`, with
/// optimal upfront prices. Every improving menu is moved to upfront-only
/// form and re-evaluated under voluntary usage; the returned value is that
/// re-evaluation.
///
/// Under mandatory usage a usage vector only matters through its expected
/// payment, so usage vectors are deduplicated by that payment per action.
pub fn mandatory_redistribution_check(inst: &Instance) -> Result<Rational> {
    let choices = check_action_guard(inst)?;
    let n = inst.num_types();
    let grids: Vec<Vec<Rational>> = (0..inst.num_outcomes())
        .map(|q| {
            let mut vals: Vec<Rational> =
                inst.valuations().iter().map(|row| row[q].clone()).collect();
            vals.push(Rational::zero());
            vals.sort();
            vals.dedup();
            vals
        })
        .collect();
    let per_contract = grids
        .iter()
        .try_fold(1u64, |acc, g| acc.checked_mul(g.len() as u64))
        .filter(|&k| k <= MAX_GRID_MENUS)
        .ok_or_else(|| Error::SizeGuard("too many usage vectors per contract".into()))?;
    // (usage vector, expected payment) per action, first vector per payment
    let mut options: Vec<Vec<(Vec<Rational>, Rational)>> = Vec::with_capacity(inst.num_actions());
    for probs in inst.transitions() {
        let mut seen = HashSet::new();
        let mut list = Vec::new();
        let mut idx = vec![0usize; grids.len()];
        for _ in 0..per_contract {
            let x: Vec<Rational> = idx.iter().zip(&grids).map(|(&i, g)| g[i].clone()).collect();
            let paid: Rational = probs.iter().zip(&x).map(|(p, x)| p * x).sum();
            if seen.insert(paid.clone()) {
                list.push((x, paid));
            }
            advance(&mut idx, |q| grids[q].len());
        }
        options.push(list);
    }
    let menus: u64 = (0..choices)
        .map(|i| {
            action_choice(i, n, inst.num_actions())
                .iter()
                .flatten()
                .map(|&a| options[a].len() as u64)
                .product::<u64>()
        })
        .sum();
    if menus > MAX_GRID_MENUS {
        return Err(Error::SizeGuard(format!(
            "redistribution check has {menus} candidate menus, more than {MAX_GRID_MENUS}"
        )));
    }
    let gross: Vec<Vec<Rational>> = (0..n)
        .map(|u| {
            (0..inst.num_actions())
                .map(|a| inst.full_value(u, a))
                .collect()
        })
        .collect();
    let mut best = Rational::zero();
    for i in 0..choices {
        let actions = action_choice(i, n, inst.num_actions());
        let served: Vec<usize> = (0..n).filter(|&t| actions[t].is_some()).collect();
        let assignment: Vec<Option<usize>> = actions
            .iter()
            .enumerate()
            .map(|(t, a)| a.map(|_| t))
            .collect();
        let option =
            |k: usize, pick: usize| &options[actions[served[k]].expect("served type")][pick];
        let mut picks = vec![0usize; served.len()];
        loop {
            let mut entries = vec![vec![Rational::zero(); n]; n];
            let mut costs: Vec<Option<Rational>> = vec![None; n];
            for (k, &t) in served.iter().enumerate() {
                let a = actions[t].expect("served type");
                let (_, paid) = option(k, picks[k]);
                for (u, row) in entries.iter_mut().enumerate() {
                    row[t] = &gross[u][a] - paid;
                }
                costs[t] = Some(inst.cost(a) - paid);
            }
            let state = StateVector::from_raw(entries);
            if let Some((profit, upfront)) =
                price_assignment(&state, &costs, inst.mu(), &assignment)
            {
                if profit > best {
                    let contracts = (0..n)
                        .map(|t| {
                            let k = served.iter().position(|&s| s == t)?;
                            let usage = option(k, picks[k])
                                .0
                                .iter()
                                .cloned()
                                .map(UsagePrice::Finite)
                                .collect();
                            Some(Contract {
                                action: actions[t].expect("served type"),
                                upfront: upfront[t].clone(),
                                usage,
                            })
                        })
                        .collect();
                    let menu = DirectMenu::new(contracts);
                    let moved = mandatory_to_upfront(&menu, inst)?;
                    let diag = validate_menu(&moved, inst, Regime::Voluntary)?;
                    if !diag.is_ic_ir() {
                        return Err(Error::NotIcIr(Box::new(diag)));
                    }
                    best = diag.expected_profit(inst.mu());
                }
            }
            if !advance(&mut picks, |k| {
                options[actions[served[k]].expect("served type")].len()
            }) {
                break;
            }
        }
    }
    Ok(best)
}

/// One threshold interval for the usage price of a (contract, outcome):
/// `lower <= x <= upper` with the types in `accepting` buying the outcome.
#[derive(Clone, Debug)]
struct Region {
    lower: Rational,
    upper: Option<Rational>,
    accepting: Vec<bool>,
}

fn regions(inst: &Instance, q: usize) -> Vec<Region> {
    let column: Vec<&Rational> = inst.valuations().iter().map(|row| &row[q]).collect();
    let mut cuts: Vec<Rational> = column.iter().map(|v| (*v).clone()).collect();
    cuts.sort();
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut lower = Rational::zero();
    for cut in &cuts {
        out.push(Region {
            lower: lower.clone(),
            upper: Some(cut.clone()),
            accepting: column.iter().map(|v| *v >= cut).collect(),
        });
        lower = cut.clone();
    }
    out.push(Region {
        lower,
        upper: None,
        accepting: vec![false; column.len()],
    });
    out
}

/// `R_usage`: upfront prices are zero and usage prices are free.
///
/// Within a choice of threshold interval for every usage price, acceptance
/// is fixed and utilities, IC constraints and profit are linear, so each
/// interval combination is one LP.
pub fn solve_usage_only(inst: &Instance) -> Result<SolveResult> {
    let n = inst.num_types();
    let q = inst.num_outcomes();
    let bits = n * n * q;
    if bits > MAX_USAGE_PATTERN_BITS {
        return Err(Error::SizeGuard(format!(
            "T^2*Q = {bits} exceeds {MAX_USAGE_PATTERN_BITS}"
        )));
    }
    let choices = check_action_guard(inst)?;
    let outcome_regions: Vec<Vec<Region>> = (0..q).map(|q| regions(inst, q)).collect();
    let results: Vec<(Option<(Rational, DirectMenu)>, Counters)> = (0..choices)
        .into_par_iter()
        .map(|i| {
            let actions = action_choice(i, n, inst.num_actions());
            usage_only_for_actions(inst, &actions, &outcome_regions)
        })
        .collect::<Result<_>>()?;
    let mut counters = Counters::default();
    let mut best: Option<(Rational, DirectMenu)> = None;
    for (b, c) in results {
        counters = counters.merge(c);
        if let Some((profit, menu)) = b {
            if best.as_ref().is_none_or(|(cur, _)| profit > *cur) {
                best = Some((profit, menu));
            }
        }
    }
    let (profit, menu) = best.expect("the all-opt-out menu is always feasible");
    finish_direct(inst, Scheme::UsageOnly, menu, profit, counters)
}

fn usage_only_for_actions(
    inst: &Instance,
    actions: &[Option<usize>],
    outcome_regions: &[Vec<Region>],
) -> Result<(Option<(Rational, DirectMenu)>, Counters)> {
    let n = inst.num_types();
    let nq = inst.num_outcomes();
    // LP variables: x[t][q] for served t and positive-probability q
    let mut vars: Vec<(usize, usize)> = Vec::new();
    for t in 0..n {
        if let Some(a) = actions[t] {
            for q in 0..nq {
                if inst.prob(a, q).is_positive() {
                    vars.push((t, q));
                }
            }
        }
    }
    let var_of = |t: usize, q: usize| vars.iter().position(|&v| v == (t, q));
    let mut picks = vec![0usize; vars.len()];
    let mut counters = Counters::default();
    let mut best: Option<(Rational, DirectMenu)> = None;
    loop {
        counters.patterns += 1;
        counters.programs += 1;
        let region = |t: usize, q: usize| var_of(t, q).map(|i| &outcome_regions[q][picks[i]]);
        let mut lp = LinearProgram::new(vars.len());
        let mut objective = vec![Rational::zero(); vars.len()];
        for (i, &(t, q)) in vars.iter().enumerate() {
            let r = &outcome_regions[q][picks[i]];
            lp.bounds[i].lower = Some(r.lower.clone());
            lp.bounds[i].upper = r.upper.clone();
            if r.accepting[t] {
                let a = actions[t].expect("served type");
                objective[i] += &inst.mu()[t] * inst.prob(a, q);
            }
        }
        lp = lp.maximize(objective);
        // utility of type u for contract t as (coefficients, constant)
        let utility = |u: usize, t: usize| {
            let mut coeffs = vec![Rational::zero(); vars.len()];
            let mut constant = Rational::zero();
            let a = actions[t].expect("served type");
            for q in 0..nq {
                if let Some(r) = region(t, q) {
                    if r.accepting[u] {
                        let p = inst.prob(a, q);
                        constant += p * inst.value(u, q);
                        coeffs[var_of(t, q).expect("has variable")] -= p;
                    }
                }
            }
            (coeffs, constant)
        };
        for u in 0..n {
            let own = actions[u].map(|_| utility(u, u));
            for t in (0..n).filter(|&t| t != u && actions[t].is_some()) {
                let (other, other_const) = utility(u, t);
                let (mut coeffs, own_const) = own
                    .clone()
                    .unwrap_or_else(|| (vec![Rational::zero(); vars.len()], Rational::zero()));
                for (c, o) in coeffs.iter_mut().zip(&other) {
                    *c -= o;
                }
                lp.constrain(coeffs, Relation::Ge, other_const - own_const);
            }
        }
        let solved = solve_lp(&lp);
        if solved.is_optimal() {
            let contracts = (0..n)
                .map(|t| {
                    actions[t].map(|a| Contract {
                        action: a,
                        upfront: Rational::zero(),
                        usage: (0..nq)
                            .map(|q| {
                                let x = var_of(t, q)
                                    .map_or_else(Rational::zero, |i| solved.solution[i].clone());
                                UsagePrice::Finite(x)
                            })
                            .collect(),
                    })
                })
                .collect();
            let menu = DirectMenu::new(contracts);
            let diag = validate_menu(&menu, inst, Regime::Voluntary)?;
            debug_assert!(diag.is_ic_ir());
            let profit = diag.expected_profit(inst.mu());
            if best.as_ref().is_none_or(|(b, _)| profit > *b) {
                best = Some((profit, menu));
            }
        }
        if !advance(&mut picks, |i| outcome_regions[vars[i].1].len()) {
            return Ok((best, counters));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_hmu_worstcase, gen_random, gen_usage_gap};
    use crate::model::direct_menu_profit;
    use crate::rational::{int, ratio};

    fn single(value: i64, cost: i64) -> Instance {
        Instance::new(
            vec![int(1)],
            vec![int(cost)],
            vec![vec![int(1)]],
            vec![vec![int(value)]],
        )
        .unwrap()
    }

    fn witness_profit(r: &SolveResult, inst: &Instance) -> Rational {
        match &r.witness {
            Witness::Direct(m) => direct_menu_profit(m, inst, r.scheme.regime()).unwrap(),
            Witness::Indirect(_) => panic!("expected a direct menu"),
        }
    }

    #[test]
    fn one_type_full_extraction() {
        let inst = single(5, 1);
        for r in [
            solve_exact(&inst).unwrap(),
            solve_upfront_only(&inst).unwrap(),
            solve_usage_only(&inst).unwrap(),
            solve_mandatory(&inst).unwrap(),
        ] {
            assert_eq!(r.profit, int(4), "{:?}", r.scheme);
            assert_eq!(witness_profit(&r, &inst), int(4));
        }
    }

    #[test]
    fn unprofitable_action_is_skipped() {
        let inst = single(1, 3);
        let r = solve_exact(&inst).unwrap();
        assert_eq!(r.profit, int(0));
        assert!(matches!(&r.witness, Witness::Direct(m) if m.contracts[0].is_none()));
    }

    #[test]
    fn usage_gap_values() {
        let inst = gen_usage_gap();
        assert_eq!(solve_exact(&inst).unwrap().profit, ratio(3, 4));
        assert_eq!(solve_upfront_only(&inst).unwrap().profit, ratio(3, 4));
        let usage = solve_usage_only(&inst).unwrap();
        assert_eq!(usage.profit, ratio(1, 2));
        assert_eq!(witness_profit(&usage, &inst), ratio(1, 2));
    }

    #[test]
    fn hmu_instance_usage_only_matches_full() {
        let inst = gen_hmu_worstcase(&[ratio(1, 2), ratio(1, 2)]).unwrap();
        assert_eq!(solve_usage_only(&inst).unwrap().profit, ratio(3, 2));
        let m = solve_mandatory(&inst).unwrap();
        assert_eq!(m.profit, int(1));
        assert_eq!(m.cross_check, Some(int(1)));
    }

    #[test]
    fn witnesses_reproduce_profit() {
        for seed in 0..10 {
            let inst = gen_random(2, 2, 2, seed, 6).unwrap();
            let r = solve_exact(&inst).unwrap();
            assert_eq!(witness_profit(&r, &inst), r.profit);
            assert!(r.diagnostics.is_ic_ir());
            let u = solve_upfront_only(&inst).unwrap();
            assert!(u.profit <= r.profit);
            let usage = solve_usage_only(&inst).unwrap();
            assert!(usage.profit <= r.profit, "seed {seed}");
            assert_eq!(witness_profit(&usage, &inst), usage.profit);
        }
    }

    #[test]
    fn price_grid_agrees_with_two_price_search() {
        for seed in 0..6 {
            let inst = gen_random(2, 1, 2, seed, 5).unwrap();
            let grid = solve_exact_price_grid(&inst).unwrap();
            assert_eq!(
                grid.profit,
                solve_exact(&inst).unwrap().profit,
                "seed {seed}"
            );
            assert_eq!(witness_profit(&grid, &inst), grid.profit);
        }
    }

    #[test]
    fn mandatory_cross_check_matches_upfront() {
        for seed in 0..6 {
            let inst = gen_random(2, 2, 2, seed, 5).unwrap();
            let m = solve_mandatory(&inst).unwrap();
            assert_eq!(m.cross_check.as_ref(), Some(&m.profit), "seed {seed}");
        }
    }

    #[test]
    fn guards_refuse_large_inputs() {
        let mu = vec![ratio(1, 3); 3];
        let inst = Instance::new(
            mu,
            vec![int(0)],
            vec![vec![ratio(1, 7); 7]],
            vec![vec![int(1); 7]; 3],
        )
        .unwrap();
        assert!(matches!(solve_exact(&inst), Err(Error::SizeGuard(_))));
        assert!(matches!(solve_usage_only(&inst), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn action_choices_are_lexicographic() {
        assert_eq!(action_choice(0, 2, 2), vec![None, None]);
        assert_eq!(action_choice(1, 2, 2), vec![None, Some(0)]);
        assert_eq!(action_choice(3, 2, 2), vec![Some(0), None]);
        assert_eq!(action_choice(8, 2, 2), vec![Some(1), Some(1)]);
    }
}
