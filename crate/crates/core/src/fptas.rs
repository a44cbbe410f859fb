//! Dynamic program over contract-value states with multiplicative trimming.
//!
//! For a fixed action per contract, every input `(t, q)` either opens
//! outcome `q` on contract `t` (usage price 0) or excludes it. The state is
//! the matrix of contract values; after every step, states whose entries
//! fall in the same geometric buckets are collapsed to one representative.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{Counters, Scheme, SolveResult, Witness};
use crate::lp::{indirect_profit_of_state, StateVector};
use crate::model::{indirect_diagnostics, Contract, IndirectMenu, Instance, UsagePrice};
use crate::rational::{rational_below, to_f64, Rational};

/// Largest type count the dynamic program accepts.
pub const MAX_FPTAS_TYPES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transition {
    /// Usage price 0 on this outcome.
    F0,
    /// Outcome excluded.
    FInf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpState {
    pub state: StateVector,
    pub trace: Vec<Transition>,
}

impl DpState {
    /// Rebuilds the state by applying the trace to the zero state.
    pub fn replay(&self, inst: &Instance, actions: &[usize]) -> StateVector {
        let inputs = dp_inputs(inst, actions);
        let mut s = StateVector::zeros(inst.num_types());
        for (&input, step) in inputs.iter().zip(&self.trace) {
            s = match step {
                Transition::F0 => transition_f0(&s, input, inst, actions),
                Transition::FInf => transition_finf(&s, input),
            };
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrimConfig {
    pub epsilon: Rational,
    /// Grid ratio; `None` keeps every distinct state.
    pub delta: Option<Rational>,
}

impl TrimConfig {
    /// `delta` just below `(1 + epsilon)^(1 / 2n)` for `n` inputs.
    pub fn for_epsilon(epsilon: &Rational, inputs: usize) -> Result<Self> {
        if !epsilon.is_positive() || *epsilon >= Rational::one() {
            return Err(Error::InvalidArgument(format!(
                "epsilon = {epsilon} must lie in (0, 1)"
            )));
        }
        let exact = (1.0 + to_f64(epsilon)).powf(1.0 / (2.0 * inputs.max(1) as f64));
        Ok(Self {
            epsilon: epsilon.clone(),
            delta: Some(rational_below(exact)),
        })
    }

    pub fn disabled() -> Self {
        Self {
            epsilon: Rational::zero(),
            delta: None,
        }
    }

    /// Bucket of one entry: `None` for zero, else `floor(log_delta v)`.
    pub fn bucket(&self, value: &Rational) -> Option<i64> {
        let delta = self.delta.as_ref()?;
        if value.is_zero() {
            return None;
        }
        Some((to_f64(value).ln() / to_f64(delta).ln()).floor() as i64)
    }

    fn signature(&self, s: &StateVector) -> Vec<Option<i64>> {
        s.entries()
            .iter()
            .flatten()
            .map(|v| self.bucket(v))
            .collect()
    }
}

/// Inputs in lexicographic `(t, q)` order.
pub fn dp_inputs(inst: &Instance, _actions: &[usize]) -> Vec<(usize, usize)> {
    let q = inst.num_outcomes();
    (0..inst.num_types())
        .flat_map(|t| (0..q).map(move |o| (t, o)))
        .collect()
}

/// Opens outcome `q` on contract `t`: column `t` gains `p^(a_t)_q v^(t')_q`.
pub fn transition_f0(
    s: &StateVector,
    (t, q): (usize, usize),
    inst: &Instance,
    actions: &[usize],
) -> StateVector {
    let p = inst.prob(actions[t], q);
    let mut next = s.clone();
    if p.is_zero() {
        return next;
    }
    for u in 0..inst.num_types() {
        let v = inst.value(u, q);
        if !v.is_zero() {
            next.add(u, t, &(p * v));
        }
    }
    next
}

/// Excludes outcome `q` on contract `t`; the state is unchanged.
pub fn transition_finf(s: &StateVector, _input: (usize, usize)) -> StateVector {
    s.clone()
}

/// Keeps one state per bucket signature: the one with the largest
/// coordinate sum, ties by the lexicographically smallest state. With
/// trimming disabled, only exact duplicates are dropped.
pub fn trim_states(states: Vec<DpState>, cfg: &TrimConfig) -> Vec<DpState> {
    if cfg.delta.is_none() {
        let mut kept: BTreeMap<StateVector, DpState> = BTreeMap::new();
        for s in states {
            kept.entry(s.state.clone()).or_insert(s);
        }
        return kept.into_values().collect();
    }
    let mut kept: BTreeMap<Vec<Option<i64>>, (Rational, DpState)> = BTreeMap::new();
    for s in states {
        let key = cfg.signature(&s.state);
        let sum = s.state.coordinate_sum();
        match kept.get(&key) {
            Some((best, rep)) if *best > sum || (*best == sum && rep.state <= s.state) => {}
            _ => {
                kept.insert(key, (sum, s));
            }
        }
    }
    kept.into_values().map(|(_, s)| s).collect()
}

/// Upper bound on the number of states left after any trim: every entry lies
/// in one of `2 + log_delta(V_max / V_min)` buckets (zero included).
pub fn state_count_bound(inst: &Instance, actions: &[usize], cfg: &TrimConfig) -> Option<f64> {
    let delta = to_f64(cfg.delta.as_ref()?);
    let mut smallest: Option<Rational> = None;
    let mut largest = Rational::zero();
    for u in 0..inst.num_types() {
        for &a in actions {
            let mut full = Rational::zero();
            for q in 0..inst.num_outcomes() {
                let inc = inst.prob(a, q) * inst.value(u, q);
                if inc.is_positive() && smallest.as_ref().is_none_or(|s| inc < *s) {
                    smallest = Some(inc.clone());
                }
                full += inc;
            }
            largest = largest.max(full);
        }
    }
    let per_entry = match smallest {
        Some(s) => 2.0 + (to_f64(&largest) / to_f64(&s)).ln() / delta.ln(),
        None => 1.0,
    };
    let entries = (inst.num_types() * inst.num_types()) as i32;
    Some(per_entry.ceil().powi(entries))
}

#[derive(Clone, Debug, Default)]
pub struct DpRun {
    pub finals: Vec<DpState>,
    /// State count after each trim.
    pub sizes: Vec<usize>,
}

/// Runs the dynamic program for one action per contract.
pub fn run_dp(inst: &Instance, actions: &[usize], cfg: &TrimConfig) -> DpRun {
    let mut states = vec![DpState {
        state: StateVector::zeros(inst.num_types()),
        trace: Vec::new(),
    }];
    let mut sizes = Vec::new();
    for input in dp_inputs(inst, actions) {
        let mut next = Vec::with_capacity(states.len() * 2);
        for s in &states {
            let mut open = s.trace.clone();
            open.push(Transition::F0);
            next.push(DpState {
                state: transition_f0(&s.state, input, inst, actions),
                trace: open,
            });
            let mut closed = s.trace.clone();
            closed.push(Transition::FInf);
            next.push(DpState {
                state: transition_finf(&s.state, input),
                trace: closed,
            });
        }
        states = trim_states(next, cfg);
        sizes.push(states.len());
    }
    DpRun {
        finals: states,
        sizes,
    }
}

fn menu_from_trace(
    inst: &Instance,
    actions: &[usize],
    trace: &[Transition],
    upfront: &[Rational],
) -> IndirectMenu {
    let q = inst.num_outcomes();
    let contracts = actions
        .iter()
        .enumerate()
        .map(|(t, &a)| Contract {
            action: a,
            upfront: upfront[t].clone(),
            usage: trace[t * q..(t + 1) * q]
                .iter()
                .map(|step| match step {
                    Transition::F0 => UsagePrice::zero(),
                    Transition::FInf => UsagePrice::Exclude,
                })
                .collect(),
        })
        .collect();
    IndirectMenu { contracts }
}

fn decode_actions(index: u64, types: usize, actions: usize) -> Vec<usize> {
    let mut digits = vec![0; types];
    let mut rest = index;
    for d in digits.iter_mut().rev() {
        *d = (rest % actions as u64) as usize;
        rest /= actions as u64;
    }
    digits
}

/// A `(1 - epsilon)`-approximate indirect menu.
pub fn fptas_solve(inst: &Instance, epsilon: &Rational) -> Result<SolveResult> {
    let cfg = TrimConfig::for_epsilon(epsilon, inst.num_types() * inst.num_outcomes())?;
    fptas_solve_with(inst, &cfg)
}

pub fn fptas_solve_with(inst: &Instance, cfg: &TrimConfig) -> Result<SolveResult> {
    let n = inst.num_types();
    if n > MAX_FPTAS_TYPES {
        return Err(Error::SizeGuard(format!(
            "the dynamic program handles at most {MAX_FPTAS_TYPES} types, got {n}"
        )));
    }
    let a = inst.num_actions();
    let choices = (0..n)
        .try_fold(1u64, |acc, _| acc.checked_mul(a as u64))
        .filter(|&c| c <= crate::exact::MAX_ACTION_ASSIGNMENTS)
        .ok_or_else(|| Error::SizeGuard(format!("A^T = {a}^{n} action choices is too many")))?;
    type Scored = (Rational, Vec<usize>, Vec<Transition>, Vec<Rational>);
    let runs: Vec<(Option<Scored>, Counters)> = (0..choices)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let actions = decode_actions(i, n, a);
            let run = run_dp(inst, &actions, cfg);
            let mut counters = Counters::default();
            let mut best: Option<Scored> = None;
            for s in run.finals {
                let priced = indirect_profit_of_state(&s.state, &actions, inst)?;
                counters.patterns += 1;
                counters.programs += (n as u64 + 1).pow(n as u32);
                if best.as_ref().is_none_or(|b| priced.profit > b.0) {
                    best = Some((priced.profit, actions.clone(), s.trace, priced.upfront));
                }
            }
            Ok((best, counters))
        })
        .collect::<Result<_>>()?;
    let mut counters = Counters::default();
    let mut best: Option<Scored> = None;
    for (b, c) in runs {
        counters.patterns += c.patterns;
        counters.programs += c.programs;
        if let Some(b) = b {
            if best.as_ref().is_none_or(|cur| b.0 > cur.0) {
                best = Some(b);
            }
        }
    }
    let (_, actions, trace, upfront) = best.expect("at least one action choice");
    let menu = menu_from_trace(inst, &actions, &trace, &upfront);
    let diagnostics = indirect_diagnostics(&menu, inst)?;
    let profit = diagnostics.expected_profit(inst.mu());
    Ok(SolveResult {
        scheme: Scheme::TwoPart,
        profit,
        witness: Witness::Indirect(menu),
        diagnostics,
        counters,
        cross_check: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::solve_exact;
    use crate::instances::{gen_hmu_worstcase, gen_partition_instance, gen_random, Multiset};
    use crate::model::indirect_choice_and_profit;
    use crate::rational::{int, ratio};

    fn a1() -> Instance {
        gen_hmu_worstcase(&[ratio(1, 2), ratio(1, 2)]).unwrap()
    }

    #[test]
    fn inputs_are_lexicographic() {
        let inst = a1();
        assert_eq!(
            dp_inputs(&inst, &[0, 0]),
            vec![(0, 0), (0, 1), (1, 0), (1, 1)]
        );
        let wide = gen_random(2, 1, 3, 0, 5).unwrap();
        assert_eq!(dp_inputs(&wide, &[0, 0]).len(), 6);
        let one = gen_random(1, 1, 3, 0, 5).unwrap();
        assert_eq!(dp_inputs(&one, &[0]).len(), 3);
    }

    #[test]
    fn f0_adds_to_one_column() {
        let inst = a1();
        let s = transition_f0(&StateVector::zeros(2), (0, 0), &inst, &[0, 0]);
        assert_eq!(s.get(0, 0), &int(2));
        assert_eq!(s.get(1, 0), &int(0));
        assert_eq!(s.get(0, 1), &int(0));
        let z = StateVector::zeros(2);
        assert_eq!(transition_finf(&z, (0, 0)), z);
    }

    #[test]
    fn f0_is_identity_on_zero_probability() {
        let inst = Instance::new(
            vec![int(1)],
            vec![int(0)],
            vec![vec![int(1), int(0)]],
            vec![vec![int(3), int(5)]],
        )
        .unwrap();
        let s = StateVector::zeros(1);
        assert_eq!(transition_f0(&s, (0, 1), &inst, &[0]), s);
    }

    #[test]
    fn trimming_merges_nearby_states() {
        let cfg = TrimConfig {
            epsilon: ratio(1, 10),
            delta: Some(ratio(105, 100)),
        };
        let make = |v: Rational| DpState {
            state: StateVector::new(vec![vec![v]]).unwrap(),
            trace: vec![],
        };
        let kept = trim_states(vec![make(int(1)), make(int(1))], &cfg);
        assert_eq!(kept.len(), 1);
        let kept = trim_states(vec![make(int(1)), make(ratio(104, 100))], &cfg);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].state.get(0, 0), &ratio(104, 100));
        let kept = trim_states(vec![make(int(1)), make(int(2)), make(int(0))], &cfg);
        assert_eq!(kept.len(), 3);
    }

    #[test]
    fn traces_replay() {
        let inst = gen_random(2, 2, 3, 3, 6).unwrap();
        let actions = [1, 0];
        let cfg = TrimConfig::for_epsilon(&ratio(1, 10), 6).unwrap();
        for s in run_dp(&inst, &actions, &cfg).finals {
            assert_eq!(s.replay(&inst, &actions), s.state);
        }
    }

    #[test]
    fn a1_approximation() {
        let inst = a1();
        let r = fptas_solve(&inst, &ratio(1, 10)).unwrap();
        assert!(r.profit >= ratio(135, 100));
        let Witness::Indirect(menu) = &r.witness else {
            panic!("indirect")
        };
        assert_eq!(indirect_choice_and_profit(menu, &inst).unwrap().1, r.profit);
    }

    #[test]
    fn one_type_is_exact() {
        for seed in 0..5 {
            let inst = gen_random(1, 2, 3, seed, 8).unwrap();
            let exact = solve_exact(&inst).unwrap().profit;
            assert_eq!(fptas_solve(&inst, &ratio(3, 10)).unwrap().profit, exact);
        }
    }

    #[test]
    fn partition_pair() {
        let inst = gen_partition_instance(&Multiset::new(vec![1, 1]).unwrap());
        let r = fptas_solve(&inst, &ratio(1, 100)).unwrap();
        assert!(r.profit >= ratio(99, 100) * ratio(9, 2));
    }

    #[test]
    fn untrimmed_matches_exact() {
        for seed in 0..8 {
            let inst = gen_random(2, 2, 2, seed, 6).unwrap();
            let dp = fptas_solve_with(&inst, &TrimConfig::disabled()).unwrap();
            assert_eq!(dp.profit, solve_exact(&inst).unwrap().profit, "seed {seed}");
        }
    }

    #[test]
    fn state_counts_respect_bound() {
        for seed in 0..5 {
            let inst = gen_random(2, 1, 3, seed, 9).unwrap();
            let cfg = TrimConfig::for_epsilon(&ratio(3, 10), 6).unwrap();
            let bound = state_count_bound(&inst, &[0, 0], &cfg).unwrap();
            for size in run_dp(&inst, &[0, 0], &cfg).sizes {
                assert!(size as f64 <= bound);
            }
        }
    }

    #[test]
    fn rejects_bad_epsilon_and_large_t() {
        assert!(TrimConfig::for_epsilon(&int(0), 4).is_err());
        assert!(TrimConfig::for_epsilon(&int(1), 4).is_err());
        let mu = vec![ratio(1, 5); 5];
        let inst =
            Instance::new(mu, vec![int(0)], vec![vec![int(1)]], vec![vec![int(1)]; 5]).unwrap();
        assert!(matches!(
            fptas_solve(&inst, &ratio(1, 2)),
            Err(Error::SizeGuard(_))
        ));
    }
}
