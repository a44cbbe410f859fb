//! Randomized invariants over small seeded instances.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use proptest::prelude::*;

use tariff_core::exact::{solve_exact, solve_upfront_only, solve_usage_only, Witness};
use tariff_core::fptas::{fptas_solve, fptas_solve_with, trim_states, DpState, TrimConfig};
use tariff_core::instances::{compute_hmu, gen_random, gen_random_single_param};
use tariff_core::lottery::{gen_random_lottery, lottery_equiv_check, strip_usage_lottery};
use tariff_core::lp::{
    indirect_profit_of_state, price_assignment, solve_lp, LinearProgram, Relation, StateVector,
};
use tariff_core::model::{
    buyer_utility_mandatory, mandatory_to_upfront, normalize_two_prices, validate_menu, Contract,
    DirectMenu, Instance, Regime, UsagePrice,
};
use tariff_core::rational::{int, parse, ratio, to_decimal, Rational};
use tariff_core::single_param::{best_single_contract, check_monotone};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn usage_price(code: u8, top: &Rational) -> UsagePrice {
    match code {
        0 => UsagePrice::Exclude,
        k => UsagePrice::Finite(top * ratio(i64::from(k - 1), 4)),
    }
}

/// Contracts from `(action, usage codes)` pairs, usage codes in `0..=5`.
fn contracts(inst: &Instance, raw: &[(usize, Vec<u8>)]) -> Vec<Contract> {
    let top = inst
        .valuations()
        .iter()
        .flatten()
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero);
    raw.iter()
        .map(|(a, codes)| Contract {
            action: a % inst.num_actions(),
            upfront: Rational::zero(),
            usage: codes
                .iter()
                .take(inst.num_outcomes())
                .map(|&c| usage_price(c, &top))
                .collect(),
        })
        .collect()
}

/// The given contracts with the highest upfront prices that keep every type
/// on its own contract.
fn priced_menu(inst: &Instance, contracts: Vec<Contract>) -> Option<DirectMenu> {
    let n = inst.num_types();
    let state = StateVector::from_contracts(inst, &contracts).ok()?;
    let assignment: Vec<Option<usize>> = (0..n).map(Some).collect();
    let (_, upfront) = price_assignment(
        &state,
        &vec![Some(Rational::zero()); n],
        inst.mu(),
        &assignment,
    )?;
    Some(DirectMenu::from_contracts(
        contracts
            .into_iter()
            .zip(upfront)
            .map(|(c, w)| Contract { upfront: w, ..c })
            .collect(),
    ))
}

fn raw_contracts() -> impl Strategy<Value = Vec<(usize, Vec<u8>)>> {
    prop::collection::vec((0usize..2, prop::collection::vec(0u8..=5, 3)), 3)
}

fn small_instance() -> impl Strategy<Value = Instance> {
    (1usize..=3, 1usize..=2, 1usize..=3, any::<u64>())
        .prop_map(|(t, a, q, seed)| gen_random(t, a, q, seed, 8).expect("valid dimensions"))
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn rationals_round_trip(n in -10_000i64..10_000, d in 1i64..1_000) {
        let r = ratio(n, d);
        prop_assert_eq!(parse(&r.to_string()).unwrap(), r.clone());
        let shown = to_decimal(&r, 6);
        let back = parse(&shown).unwrap();
        prop_assert!((back - r).abs() <= ratio(1, 2_000_000));
    }

    #[test]
    fn lp_optimum_beats_every_integer_point(
        objective in prop::collection::vec(-3i64..=5, 2),
        rows in prop::collection::vec((prop::collection::vec(-2i64..=4, 2), 0i64..=12), 1..=3),
    ) {
        let mut lp = LinearProgram::new(2).maximize(objective.iter().map(|&c| int(c)).collect());
        for (coeffs, rhs) in &rows {
            lp.constrain(coeffs.iter().map(|&c| int(c)).collect(), Relation::Le, int(*rhs));
        }
        for i in 0..2 {
            let mut unit = vec![int(0); 2];
            unit[i] = int(1);
            lp.constrain(unit, Relation::Le, int(10));
        }
        let result = solve_lp(&lp);
        prop_assert!(result.is_optimal());
        prop_assert!(lp.is_feasible_point(&result.solution));
        let value: Rational = lp.objective.iter().zip(&result.solution).map(|(c, x)| c * x).sum();
        prop_assert_eq!(&value, &result.value);
        for x in 0..=10 {
            for y in 0..=10 {
                let point = [int(x), int(y)];
                if lp.is_feasible_point(&point) {
                    prop_assert!(int(objective[0] * x + objective[1] * y) <= result.value);
                }
            }
        }
    }

    #[test]
    fn normalization_preserves_utilities_and_profit(inst in small_instance(), raw in raw_contracts()) {
        let n = inst.num_types();
        let Some(menu) = priced_menu(&inst, contracts(&inst, &raw[..n])) else { return Ok(()) };
        let before = validate_menu(&menu, &inst, Regime::Voluntary).unwrap();
        prop_assert!(before.is_ic_ir());
        let out = normalize_two_prices(&menu, &inst).unwrap();
        let after = validate_menu(&out, &inst, Regime::Voluntary).unwrap();
        prop_assert!(after.is_ic_ir());
        for (b, a) in before.types.iter().zip(&after.types) {
            prop_assert_eq!(&b.utility, &a.utility);
        }
        prop_assert_eq!(before.expected_profit(inst.mu()), after.expected_profit(inst.mu()));
        prop_assert!(out.contracts.iter().flatten().all(Contract::is_two_price));
    }

    #[test]
    fn mandatory_usage_moves_into_the_upfront_price(inst in small_instance(), raw in raw_contracts()) {
        let n = inst.num_types();
        let finite: Vec<(usize, Vec<u8>)> = raw[..n]
            .iter()
            .map(|(a, codes)| (*a, codes.iter().map(|&c| c.max(1)).collect()))
            .collect();
        let menu = DirectMenu::from_contracts(contracts(&inst, &finite));
        let out = mandatory_to_upfront(&menu, &inst).unwrap();
        for (c, d) in menu.contracts.iter().flatten().zip(out.contracts.iter().flatten()) {
            prop_assert!(d.usage.iter().all(UsagePrice::is_zero));
            for u in 0..n {
                prop_assert_eq!(
                    buyer_utility_mandatory(&inst, u, c).unwrap(),
                    buyer_utility_mandatory(&inst, u, d).unwrap()
                );
            }
        }
        let before = validate_menu(&menu, &inst, Regime::Mandatory).unwrap();
        let after = validate_menu(&out, &inst, Regime::Voluntary).unwrap();
        prop_assert_eq!(before.is_ic_ir(), after.is_ic_ir());
        prop_assert_eq!(before.expected_profit(inst.mu()), after.expected_profit(inst.mu()));
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn regimes_are_ordered(inst in small_instance()) {
        let r = solve_exact(&inst).unwrap().profit;
        let up = solve_upfront_only(&inst).unwrap().profit;
        prop_assert!(up <= r);
        if inst.num_types().pow(2) * inst.num_outcomes() <= 16 {
            prop_assert!(solve_usage_only(&inst).unwrap().profit <= r);
        }
        if up.is_positive() {
            prop_assert!(r <= compute_hmu(inst.mu()) * up);
        }
    }

    #[test]
    fn fptas_is_within_its_factor(a in 1usize..=2, q in 1usize..=3, seed in any::<u64>(), eps in 1i64..=5) {
        let inst = gen_random(2, a, q, seed, 8).unwrap();
        let r = solve_exact(&inst).unwrap().profit;
        prop_assert_eq!(&fptas_solve_with(&inst, &TrimConfig::disabled()).unwrap().profit, &r);
        let eps = ratio(eps, 10);
        let p = fptas_solve(&inst, &eps).unwrap().profit;
        prop_assert!(p <= r);
        prop_assert!(p >= (int(1) - eps) * r);
    }

    #[test]
    fn trimming_keeps_the_heaviest_state_per_bucket(
        entries in prop::collection::vec(prop::collection::vec(0i64..=40, 4), 1..=30),
        eps in 1i64..=5,
    ) {
        let cfg = TrimConfig::for_epsilon(&ratio(eps, 10), 4).unwrap();
        let states: Vec<DpState> = entries
            .iter()
            .map(|e| DpState {
                state: StateVector::new(vec![
                    vec![ratio(e[0], 4), ratio(e[1], 4)],
                    vec![ratio(e[2], 4), ratio(e[3], 4)],
                ])
                .unwrap(),
                trace: Vec::new(),
            })
            .collect();
        let signature = |s: &StateVector| -> Vec<Option<i64>> {
            s.entries().iter().flatten().map(|v| cfg.bucket(v)).collect()
        };
        let kept = trim_states(states.clone(), &cfg);
        let kept_signatures: BTreeSet<_> = kept.iter().map(|s| signature(&s.state)).collect();
        prop_assert_eq!(kept_signatures.len(), kept.len());
        let input_signatures: BTreeSet<_> = states.iter().map(|s| signature(&s.state)).collect();
        prop_assert_eq!(&kept_signatures, &input_signatures);
        for s in &states {
            let rep = kept.iter().find(|k| signature(&k.state) == signature(&s.state)).unwrap();
            prop_assert!(states.contains(rep));
            prop_assert!(rep.state.coordinate_sum() >= s.state.coordinate_sum());
        }
    }

    #[test]
    fn lowering_an_entry_costs_at_most_the_decrease(
        t in 1usize..=3,
        seed in any::<u64>(),
        actions in prop::collection::vec(0usize..2, 3),
        entries in prop::collection::vec(0i64..=40, 9),
        (u, k, step) in (0usize..3, 0usize..3, 1i64..=20),
    ) {
        let inst = gen_random(t, 2, 2, seed, 8).unwrap();
        let rows: Vec<Vec<Rational>> = (0..t).map(|i| (0..t).map(|j| ratio(entries[3 * i + j], 4)).collect()).collect();
        let s = StateVector::new(rows).unwrap();
        let (u, k) = (u % t, k % t);
        let base = indirect_profit_of_state(&s, &actions[..t], &inst).unwrap().profit;
        let shifted = (s.get(u, k) - ratio(step, 10)).max(Rational::zero());
        let decrease = s.get(u, k) - &shifted;
        let mut moved = s.clone();
        moved.set(u, k, shifted);
        let after = indirect_profit_of_state(&moved, &actions[..t], &inst).unwrap().profit;
        prop_assert!(base - after <= decrease);
    }

    #[test]
    fn single_contract_is_optimal_without_costs(
        (t, a, q) in (1usize..=3, 1usize..=2, 1usize..=3),
        seed in any::<u64>(),
    ) {
        let sp = gen_random_single_param(t, a, q, seed, 6).unwrap().with_zero_costs();
        let (_, revenue) = best_single_contract(&sp);
        let exact = solve_exact(sp.base()).unwrap();
        prop_assert_eq!(&revenue, &exact.profit);
        if let Witness::Direct(menu) = &exact.witness {
            prop_assert!(check_monotone(menu, &sp).unwrap());
        }
    }

    #[test]
    fn stripping_lottery_prices_is_neutral(
        (types, items) in (1usize..=3, 1usize..=4),
        seed in any::<u64>(),
        mandatory in any::<bool>(),
    ) {
        let mode = if mandatory { Regime::Mandatory } else { Regime::Voluntary };
        let (menu, values, mu) = gen_random_lottery(types, items, seed, 6, !mandatory).unwrap();
        let out = strip_usage_lottery(&menu, &values, mode).unwrap();
        prop_assert!(lottery_equiv_check(&menu, &out, &values, &mu, mode).unwrap());
        prop_assert!(out.lotteries.iter().all(|l| l.item_prices.iter().all(UsagePrice::is_zero)));
    }
}
