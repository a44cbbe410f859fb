//! Lottery menus with per-item prices, and folding those prices into the
//! lottery price.
//!
//! Item 0 is the trivial item: it is worth nothing to every type.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Regime, UsagePrice};
use crate::rational::{int, ratio, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lottery {
    pub price: Rational,
    pub probs: Vec<Rational>,
    pub item_prices: Vec<UsagePrice>,
}

/// One lottery per type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LotteryMenu {
    pub lotteries: Vec<Lottery>,
}

/// Type-by-item valuations with the trivial item in column 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemValues {
    rows: Vec<Vec<Rational>>,
}

impl ItemValues {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let items = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || items == 0 {
            return Err(Error::InvalidArgument("valuations must be nonempty".into()));
        }
        for (t, row) in rows.iter().enumerate() {
            if row.len() != items {
                return Err(Error::InvalidArgument(format!(
                    "valuation row {t} has the wrong length"
                )));
            }
            if !row[0].is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "type {t} values the trivial item"
                )));
            }
            if row.iter().any(Signed::is_negative) {
                return Err(Error::InvalidArgument(format!(
                    "valuation row {t} is negative"
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Prepends a trivial item to valuations that lack one.
    pub fn with_trivial_item(rows: Vec<Vec<Rational>>) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .map(|row| std::iter::once(Rational::zero()).chain(row).collect())
                .collect(),
        )
    }

    pub fn num_types(&self) -> usize {
        self.rows.len()
    }

    pub fn num_items(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }
}

impl LotteryMenu {
    pub fn validate(&self, values: &ItemValues) -> Result<()> {
        if self.lotteries.len() != values.num_types() {
            return Err(Error::MenuLength {
                expected: values.num_types(),
                got: self.lotteries.len(),
            });
        }
        for (t, l) in self.lotteries.iter().enumerate() {
            let bad = |msg: &str| Err(Error::InvalidContract(format!("lottery {t}: {msg}")));
            if l.probs.len() != values.num_items() || l.item_prices.len() != values.num_items() {
                return bad("length does not match the item count");
            }
            if l.price.is_negative() || l.probs.iter().any(Signed::is_negative) {
                return bad("negative price or probability");
            }
            if l.probs.iter().sum::<Rational>() != int(1) {
                return bad("probabilities do not sum to 1");
            }
            if l.item_prices
                .iter()
                .any(|x| x.finite().is_some_and(Signed::is_negative))
            {
                return bad("negative item price");
            }
        }
        Ok(())
    }
}

fn accepts(mode: Regime, x: &UsagePrice, v: &Rational) -> Result<bool> {
    match (mode, x) {
        (Regime::Mandatory, UsagePrice::Exclude) => Err(Error::InvalidContract(
            "EXCLUDE item price under mandatory usage".into(),
        )),
        (Regime::Mandatory, UsagePrice::Finite(_)) => Ok(true),
        (Regime::Voluntary, x) => Ok(x.accepts(v)),
    }
}

/// Utility of type `t` for `lottery`.
pub fn lottery_utility(
    lottery: &Lottery,
    values: &ItemValues,
    t: usize,
    mode: Regime,
) -> Result<Rational> {
    let mut total = -lottery.price.clone();
    for ((p, v), x) in lottery
        .probs
        .iter()
        .zip(&values.rows[t])
        .zip(&lottery.item_prices)
    {
        if accepts(mode, x, v)? {
            let x = x.finite().expect("accepted prices are finite");
            total += p * (v - x);
        }
    }
    Ok(total)
}

/// Payments collected from type `t` buying `lottery`.
pub fn lottery_revenue(
    lottery: &Lottery,
    values: &ItemValues,
    t: usize,
    mode: Regime,
) -> Result<Rational> {
    let mut total = lottery.price.clone();
    for ((p, v), x) in lottery
        .probs
        .iter()
        .zip(&values.rows[t])
        .zip(&lottery.item_prices)
    {
        if accepts(mode, x, v)? {
            total += p * x.finite().expect("accepted prices are finite");
        }
    }
    Ok(total)
}

/// Whether every type weakly prefers its own lottery to every other and to
/// buying nothing.
pub fn lottery_is_ic(menu: &LotteryMenu, values: &ItemValues, mode: Regime) -> Result<bool> {
    menu.validate(values)?;
    for t in 0..values.num_types() {
        let own = lottery_utility(&menu.lotteries[t], values, t, mode)?;
        if own.is_negative() {
            return Ok(false);
        }
        for l in &menu.lotteries {
            if lottery_utility(l, values, t, mode)? > own {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Moves all item payments into the lottery price.
///
/// Mandatory: the price grows by the expected item payment. Voluntary: the
/// price grows by the expected payment on items the type accepts, and the
/// probability of every rejected item moves to the trivial item.
pub fn strip_usage_lottery(
    menu: &LotteryMenu,
    values: &ItemValues,
    mode: Regime,
) -> Result<LotteryMenu> {
    menu.validate(values)?;
    let lotteries = menu
        .lotteries
        .iter()
        .enumerate()
        .map(|(t, l)| {
            let mut price = l.price.clone();
            let mut probs = l.probs.clone();
            for (q, x) in l.item_prices.iter().enumerate() {
                if accepts(mode, x, &values.rows[t][q])? {
                    price += &l.probs[q] * x.finite().expect("accepted prices are finite");
                } else if q != 0 {
                    let moved = std::mem::take(&mut probs[q]);
                    probs[0] += moved;
                }
            }
            Ok(Lottery {
                price,
                probs,
                item_prices: vec![UsagePrice::zero(); l.item_prices.len()],
            })
        })
        .collect::<Result<_>>()?;
    Ok(LotteryMenu { lotteries })
}

/// True iff every type's utility for its own lottery and the expected
/// revenue agree exactly.
pub fn lottery_equiv_check(
    before: &LotteryMenu,
    after: &LotteryMenu,
    values: &ItemValues,
    mu: &[Rational],
    mode: Regime,
) -> Result<bool> {
    before.validate(values)?;
    after.validate(values)?;
    let mut revenue_before = Rational::zero();
    let mut revenue_after = Rational::zero();
    for t in 0..values.num_types() {
        let (b, a) = (&before.lotteries[t], &after.lotteries[t]);
        if lottery_utility(b, values, t, mode)? != lottery_utility(a, values, t, mode)? {
            return Ok(false);
        }
        revenue_before += &mu[t] * lottery_revenue(b, values, t, mode)?;
        revenue_after += &mu[t] * lottery_revenue(a, values, t, mode)?;
    }
    Ok(revenue_before == revenue_after)
}

/// Seeded random lottery menu over `items` real items plus the trivial one,
/// with about a quarter of the item prices excluded when `allow_exclude`.
pub fn gen_random_lottery(
    types: usize,
    items: usize,
    seed: u64,
    bound: u32,
    allow_exclude: bool,
) -> Result<(LotteryMenu, ItemValues, Vec<Rational>)> {
    if types == 0 || items == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |lo: u32| int(i64::from(rng.gen_range(lo..=bound.max(1))));
    let rows = (0..types)
        .map(|_| (0..items).map(|_| draw(0)).collect())
        .collect();
    let values = ItemValues::with_trivial_item(rows)?;
    let weights: Vec<Rational> = (0..types).map(|_| draw(1)).collect();
    let total: Rational = weights.iter().sum();
    let mu = weights.into_iter().map(|w| w / &total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9));
    let lotteries = (0..types)
        .map(|_| {
            let w: Vec<u32> = (0..=items)
                .map(|_| rng.gen_range(0..=bound.max(1)))
                .collect();
            let sum: u32 = w.iter().sum::<u32>().max(1);
            let mut probs: Vec<Rational> = w
                .iter()
                .map(|&w| ratio(i64::from(w), i64::from(sum)))
                .collect();
            if w.iter().all(|&w| w == 0) {
                probs[0] = int(1);
            }
            let item_prices = (0..=items)
                .map(|_| {
                    if allow_exclude && rng.gen_ratio(1, 4) {
                        UsagePrice::Exclude
                    } else {
                        UsagePrice::Finite(ratio(i64::from(rng.gen_range(0..=2 * bound)), 2))
                    }
                })
                .collect();
            Lottery {
                price: ratio(i64::from(rng.gen_range(0..=bound)), 2),
                probs,
                item_prices,
            }
        })
        .collect();
    Ok((LotteryMenu { lotteries }, values, mu))
}
