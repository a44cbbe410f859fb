//! Instance families: the H_mu worst case, the usage gap, the Partition
//! gadget, the single-parameter counterexample and seeded random instances.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::solve_exact;
use crate::model::Instance;
use crate::rational::{int, ratio, Rational};
use crate::single_param::SingleParamInstance;

/// Indices of `mu` sorted ascending by mass, ties by index.
fn ascending_order(mu: &[Rational]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..mu.len()).collect();
    order.sort_by(|&a, &b| mu[a].cmp(&mu[b]));
    order
}

/// `H_mu = sum_t mu_(t) / (mu_(1) + ... + mu_(t))` over the masses in ascending order.
pub fn compute_hmu(mu: &[Rational]) -> Rational {
    let mut prefix = Rational::zero();
    let mut total = Rational::zero();
    for t in ascending_order(mu) {
        prefix += &mu[t];
        total += &mu[t] / &prefix;
    }
    total
}

/// One free action with uniform outcomes; type `t` values only outcome `t`,
/// at `T / (prefix mass up to t in ascending order)`.
pub fn gen_hmu_worstcase(mu: &[Rational]) -> Result<Instance> {
    let n = mu.len();
    if n == 0 {
        return Err(Error::InvalidInstance(
            "there must be at least one buyer type".into(),
        ));
    }
    let order = ascending_order(mu);
    let mut prefix = Rational::zero();
    let mut valuations = vec![vec![Rational::zero(); n]; n];
    for t in order {
        prefix += &mu[t];
        if prefix.is_zero() {
            return Err(Error::InvalidInstance(format!(
                "mu[{t}] = 0 must be positive"
            )));
        }
        valuations[t][t] = int(n as i64) / &prefix;
    }
    Instance::new(
        mu.to_vec(),
        vec![Rational::zero()],
        vec![vec![ratio(1, n as i64); n]],
        valuations,
    )
}

/// Two symmetric types over two equally likely outcomes.
pub fn gen_usage_gap() -> Instance {
    Instance::new(
        vec![ratio(1, 2), ratio(1, 2)],
        vec![Rational::zero()],
        vec![vec![ratio(1, 2), ratio(1, 2)]],
        vec![vec![int(1), ratio(1, 2)], vec![ratio(1, 2), int(1)]],
    )
    .expect("fixed instance is valid")
}

/// A Partition input: positive integers `n_1, ..., n_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiset {
    items: Vec<u64>,
}

impl Multiset {
    pub fn new(items: Vec<u64>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidArgument("multiset must be nonempty".into()));
        }
        if items.contains(&0) {
            return Err(Error::InvalidArgument(
                "multiset items must be positive".into(),
            ));
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `M`, the sum of the items.
    pub fn sum(&self) -> u64 {
        self.items.iter().sum()
    }
}

/// Two equally likely types, one free action, `k + 1` uniform outcomes.
/// Outcome 0 is worth `M(k+1)` to type 0 and nothing to type 1; outcome `q`
/// is worth `n_q(k+1)` and `3 n_q(k+1)`.
pub fn gen_partition_instance(ms: &Multiset) -> Instance {
    let k = ms.len() as i64;
    let scale = |n: u64| int(n as i64 * (k + 1));
    let mut low = vec![scale(ms.sum())];
    let mut high = vec![Rational::zero()];
    for &n in ms.items() {
        low.push(scale(n));
        high.push(scale(n) * int(3));
    }
    Instance::new(
        vec![ratio(1, 2), ratio(1, 2)],
        vec![Rational::zero()],
        vec![vec![ratio(1, k + 1); ms.len() + 1]],
        vec![low, high],
    )
    .expect("partition instance is valid")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionOutcome {
    pub exists: bool,
    pub profit: Rational,
    /// `9M/4`, reached exactly when an equal split exists.
    pub threshold: Rational,
}

pub fn solve_partition_reduction(ms: &Multiset) -> Result<PartitionOutcome> {
    let inst = gen_partition_instance(ms);
    let profit = solve_exact(&inst)?.profit;
    let threshold = int(9 * ms.sum() as i64) / int(4);
    Ok(PartitionOutcome {
        exists: profit == threshold,
        profit,
        threshold,
    })
}

/// Whether `ms` splits into two halves of equal sum, decided through the
/// optimal profit of the reduction instance.
pub fn decide_partition(ms: &Multiset) -> Result<bool> {
    Ok(solve_partition_reduction(ms)?.exists)
}

/// Two deterministic actions (the second costs 3/2), values `(1, 2)` and
/// `(2, 4)`, prior `(2/3, 1/3)`.
pub fn gen_single_param_counterexample() -> SingleParamInstance {
    SingleParamInstance::new(
        vec![ratio(2, 3), ratio(1, 3)],
        vec![Rational::zero(), ratio(3, 2)],
        vec![vec![int(1), int(0)], vec![int(0), int(1)]],
        vec![int(1), int(2)],
        vec![int(1), int(2)],
    )
    .expect("fixed instance is valid")
}

fn random_distribution(
    rng: &mut ChaCha8Rng,
    len: usize,
    bound: u32,
    positive: bool,
) -> Vec<Rational> {
    let lo = u32::from(positive);
    let mut weights: Vec<u32> = (0..len).map(|_| rng.gen_range(lo..=bound.max(1))).collect();
    if weights.iter().all(|&w| w == 0) {
        let i = rng.gen_range(0..len);
        weights[i] = 1;
    }
    let total: u32 = weights.iter().sum();
    weights
        .into_iter()
        .map(|w| ratio(i64::from(w), i64::from(total)))
        .collect()
}

/// Seeded random instance: integer valuations in `[0, value_bound]`, costs
/// in halves up to `value_bound / 2`, and prior and outcome distributions
/// with denominators bounded by `T * value_bound` and `Q * value_bound`.
pub fn gen_random(
    types: usize,
    actions: usize,
    outcomes: usize,
    seed: u64,
    value_bound: u32,
) -> Result<Instance> {
    if types == 0 || actions == 0 || outcomes == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = random_distribution(&mut rng, types, value_bound, true);
    let costs = (0..actions)
        .map(|_| ratio(i64::from(rng.gen_range(0..=value_bound)), 2))
        .collect();
    let transitions = (0..actions)
        .map(|_| random_distribution(&mut rng, outcomes, value_bound, false))
        .collect();
    let valuations = (0..types)
        .map(|_| {
            (0..outcomes)
                .map(|_| int(i64::from(rng.gen_range(0..=value_bound))))
                .collect()
        })
        .collect();
    Instance::new(mu, costs, transitions, valuations)
}

/// Seeded single-parameter instance with distinct integer `alpha` in
/// `[1, value_bound + types]` and integer baseline values in `[0, value_bound]`.
pub fn gen_random_single_param(
    types: usize,
    actions: usize,
    outcomes: usize,
    seed: u64,
    value_bound: u32,
) -> Result<SingleParamInstance> {
    if types == 0 || actions == 0 || outcomes == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = random_distribution(&mut rng, types, value_bound, true);
    let costs = (0..actions)
        .map(|_| ratio(i64::from(rng.gen_range(0..=value_bound)), 2))
        .collect();
    let transitions = (0..actions)
        .map(|_| random_distribution(&mut rng, outcomes, value_bound, false))
        .collect();
    let top = i64::from(value_bound) + types as i64;
    let mut alpha: Vec<i64> = Vec::with_capacity(types);
    while alpha.len() < types {
        let a = rng.gen_range(1..=top);
        if !alpha.contains(&a) {
            alpha.push(a);
        }
    }
    alpha.sort_unstable();
    let baseline = (0..outcomes)
        .map(|_| int(i64::from(rng.gen_range(0..=value_bound))))
        .collect();
    SingleParamInstance::new(
        mu,
        costs,
        transitions,
        alpha.into_iter().map(int).collect(),
        baseline,
    )
}

/// The `T`-th harmonic number.
pub fn harmonic(n: usize) -> Rational {
    (1..=n)
        .map(|i| ratio(1, i as i64))
        .fold(Rational::zero(), |a, b| a + b)
}

/// The prior `mu_t = e^(T-t) - e^(T-t+1)` (1-indexed) with the leftover
/// mass on the last type, which drives `H_mu` toward `T` as `e -> 0`.
pub fn geometric_prior(types: usize, e: &Rational) -> Vec<Rational> {
    let mut mu: Vec<Rational> = (1..types)
        .map(|t| {
            let k = (types - t) as i32;
            num_traits::pow::Pow::pow(e, k) - num_traits::pow::Pow::pow(e, k + 1)
        })
        .collect();
    let rest: Rational = Rational::one() - mu.iter().sum::<Rational>();
    mu.push(rest);
    mu
}
