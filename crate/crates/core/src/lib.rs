//! Exact and approximate solvers for menus of two-part-tariff service
//! contracts.
//!
//! A seller offers contracts `(action, upfront price, usage prices)`. Buyers
//! of privately known type pick a contract, see the realized outcome and
//! decide whether to pay its usage price. All arithmetic is exact over
//! arbitrary-precision rationals.

pub mod error;
pub mod exact;
pub mod fptas;
pub mod instances;
pub mod lottery;
pub mod lp;
pub mod model;
pub mod rational;
pub mod single_param;

pub use error::{Error, Result};
pub use rational::Rational;
