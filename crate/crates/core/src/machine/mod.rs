//! Deterministic Turing machines: semantics, Gödel codes, enumeration,
//! budgeted runs and non-halting certificates.

mod code;
mod cycle;
pub mod library;
mod run;
mod tape;
mod text;
mod tm;

use thiserror::Error;

pub use code::{decode, encode, enumerate_machines, Enumeration, MachineClass, MachineCode};
pub use cycle::{detect_cycle, CycleCertificate, CycleKind};
pub use run::{run, run_with, trace, Outcome, RunOptions, RunRecord, DEFAULT_VISITED_CAP};
pub use text::{format_symbols, parse_machine, parse_symbols};
pub use tm::{
    step, Configuration, HeadState, Move, Next, Symbol, Transition, TuringMachine, BLANK,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error(
        "input symbol {symbol} at position {position} is not below num_symbols = {num_symbols}"
    )]
    InvalidInput {
        position: usize,
        symbol: Symbol,
        num_symbols: u32,
    },

    #[error("configuration is already in the stop state")]
    AlreadyStopped,

    #[error("budget must be at least one step")]
    ZeroBudget,

    #[error("invalid class ({num_states}, {num_symbols}): {reason}")]
    InvalidClass {
        num_states: u32,
        num_symbols: u32,
        reason: String,
    },

    #[error(
        "class ({num_states}, {num_symbols}) is too large: it has (2*k*(s+1))^(s*k) = \
         (2*{num_symbols}*({num_states}+1))^({num_states}*{num_symbols}) machines, whose codes \
         do not fit in 128 bits"
    )]
    ClassTooLarge { num_states: u32, num_symbols: u32 },

    #[error("code {code} is invalid: {field} field out of range at entry {state:?}/{symbol:?}")]
    InvalidCode {
        code: u128,
        state: Option<u32>,
        symbol: Option<u32>,
        field: &'static str,
    },

    #[error("machine of class {found:?} does not belong to class {expected:?}")]
    ClassMismatch {
        expected: (u32, u32),
        found: (u32, u32),
    },

    #[error("rank {rank} is outside the class (size {total})")]
    RankOutOfRange { rank: u128, total: u128 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("character {found:?} at position {position} is not a digit symbol")]
    BadSymbolString { position: usize, found: char },
}
