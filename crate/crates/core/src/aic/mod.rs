//! Time-bounded algorithmic information content.
//!
//! A program is the Gödel code of a machine in a fixed class, run on a blank
//! tape. `K_t` of a target string is the smallest code (in ascending code order)
//! whose machine halts within the step budget with exactly the target as output.
//! The search is exhaustive, so the answer is exact relative to the class and
//! its ordering; verifying any one candidate costs at most the budget.

mod census;
mod kt;
mod writer;

use thiserror::Error;

use crate::machine::MachineError;

pub use census::{census_csv, halting_census, CensusCounts, CensusReport, CensusRow};
pub use kt::{
    curve_csv, kt_budget_curve, kt_search, kt_search_budget, verify_candidate, BudgetRule,
    CurvePoint, Found, KtCertificate, KtQuery, SearchLimits, Verification,
};
pub use writer::{embed_machine, literal_upper_bound, LiteralWriter};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AicError {
    #[error(transparent)]
    Machine(#[from] MachineError),

    #[error("budget rule needs c0 >= 1 (got c2={c2}, c0={c0})")]
    InvalidBudgetRule { c2: u64, c0: u64 },

    #[error("budget c2*(n+1)^2 + c0 overflows for target length {length}")]
    BudgetOverflow { length: usize },

    #[error("target cannot be a halting output: {0}")]
    UnrepresentableTarget(String),

    #[error("class has {cardinality} machines, above the cap of {cap}")]
    ClassOverCap { cardinality: u128, cap: u128 },

    #[error("budgets must be positive and strictly ascending")]
    BudgetsNotAscending,

    #[error("literal writer for a target of length {length} does not fit a 128-bit code")]
    WriterTooLarge { length: usize },
}
