use thiserror::Error;

use crate::model::MenuDiagnostics;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid contract: {0}")]
    InvalidContract(String),

    #[error("{what} index {index} out of range (size {size})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("menu has {got} contracts but the instance has {expected} types")]
    MenuLength { expected: usize, got: usize },

    #[error("usage price of contract {contract} for outcome {outcome} is EXCLUDE, which is not allowed under mandatory usage")]
    ExcludeUnderMandatory { contract: usize, outcome: usize },

    #[error("menu is not incentive compatible and individually rational ({} IC and {} IR violations)", .0.ic_violations.len(), .0.ir_violations.len())]
    NotIcIr(Box<MenuDiagnostics>),

    #[error("usage prices must all be 0 or EXCLUDE")]
    NotTwoPriceForm,

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("value profile is not realizable by an IC menu: V/alpha decreases between types {0} and {1}")]
    NotMonotone(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
}
