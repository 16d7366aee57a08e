use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::MachineError;

/// Tape symbol. Symbol 0 is the blank.
pub type Symbol = u8;

pub const BLANK: Symbol = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    Left,
    Right,
}

impl Move {
    pub fn delta(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Right => 1,
        }
    }
}

/// Where a transition sends the head: another head state, or the distinguished stop state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Next {
    State(u32),
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub write: Symbol,
    pub movement: Move,
    pub next: Next,
}

impl Transition {
    pub const fn new(write: Symbol, movement: Move, next: Next) -> Self {
        Self {
            write,
            movement,
            next,
        }
    }
}

/// A deterministic single-tape Turing machine with a total transition table.
///
/// `num_states` counts the working states only; the stop state is implicit.
/// The table is stored row-major over `(state, symbol)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TuringMachine {
    num_states: u32,
    num_symbols: u32,
    table: Vec<Transition>,
}

impl TuringMachine {
    /// Builds a machine from a row-major table, validating totality and ranges.
    pub fn new(
        num_states: u32,
        num_symbols: u32,
        table: Vec<Transition>,
    ) -> Result<Self, MachineError> {
        if num_states == 0 {
            return Err(MachineError::InvalidMachine(
                "num_states must be positive".into(),
            ));
        }
        if !(2..=256).contains(&num_symbols) {
            return Err(MachineError::InvalidMachine(format!(
                "num_symbols must be in 2..=256, got {num_symbols}"
            )));
        }
        let expected = num_states as usize * num_symbols as usize;
        if table.len() != expected {
            return Err(MachineError::InvalidMachine(format!(
                "transition table has {} entries, expected {expected}",
                table.len()
            )));
        }
        for (i, t) in table.iter().enumerate() {
            let state = i / num_symbols as usize;
            let symbol = i % num_symbols as usize;
            if u32::from(t.write) >= num_symbols {
                return Err(MachineError::InvalidMachine(format!(
                    "entry ({state}, {symbol}) writes symbol {} outside 0..{num_symbols}",
                    t.write
                )));
            }
            if let Next::State(q) = t.next {
                if q >= num_states {
                    return Err(MachineError::InvalidMachine(format!(
                        "entry ({state}, {symbol}) enters state {q} outside 0..{num_states}"
                    )));
                }
            }
        }
        Ok(Self {
            num_states,
            num_symbols,
            table,
        })
    }

    /// Builds a machine from a closure over `(state, symbol)`.
    pub fn from_fn(
        num_states: u32,
        num_symbols: u32,
        mut f: impl FnMut(u32, Symbol) -> Transition,
    ) -> Result<Self, MachineError> {
        let mut table = Vec::with_capacity(num_states as usize * num_symbols as usize);
        for q in 0..num_states {
            for s in 0..num_symbols {
                table.push(f(q, s as Symbol));
            }
        }
        Self::new(num_states, num_symbols, table)
    }

    pub fn num_states(&self) -> u32 {
        self.num_states
    }

    pub fn num_symbols(&self) -> u32 {
        self.num_symbols
    }

    pub fn class(&self) -> (u32, u32) {
        (self.num_states, self.num_symbols)
    }

    #[inline]
    pub fn transition(&self, state: u32, symbol: Symbol) -> Transition {
        self.table[state as usize * self.num_symbols as usize + symbol as usize]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.table
    }

    /// Checks that every symbol of `input` belongs to this machine's alphabet.
    pub fn check_input(&self, input: &[Symbol]) -> Result<(), MachineError> {
        match input.iter().position(|&s| u32::from(s) >= self.num_symbols) {
            Some(position) => Err(MachineError::InvalidInput {
                position,
                symbol: input[position],
                num_symbols: self.num_symbols,
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for TuringMachine {
    /// Renders the machine in the text description format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states={} symbols={}", self.num_states, self.num_symbols)?;
        for (i, t) in self.table.iter().enumerate() {
            let q = i / self.num_symbols as usize;
            let s = i % self.num_symbols as usize;
            let mv = match t.movement {
                Move::Left => 'L',
                Move::Right => 'R',
            };
            match t.next {
                Next::State(n) => writeln!(f, "{q} {s} -> {} {mv} {n}", t.write)?,
                Next::Stop => writeln!(f, "{q} {s} -> {} {mv} STOP", t.write)?,
            }
        }
        Ok(())
    }
}

/// Head state of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HeadState {
    Running(u32),
    Stopped,
}

/// Full machine configuration with a sparse tape that never stores blanks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub head_state: HeadState,
    pub head_position: i64,
    tape: BTreeMap<i64, Symbol>,
    pub step_count: u64,
}

impl Configuration {
    /// Input written from square 0, head on square 0 in state 0.
    pub fn initial(input: &[Symbol]) -> Self {
        let tape = input
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != BLANK)
            .map(|(i, &s)| (i as i64, s))
            .collect();
        Self {
            head_state: HeadState::Running(0),
            head_position: 0,
            tape,
            step_count: 0,
        }
    }

    pub fn read(&self, square: i64) -> Symbol {
        self.tape.get(&square).copied().unwrap_or(BLANK)
    }

    pub fn write(&mut self, square: i64, symbol: Symbol) {
        if symbol == BLANK {
            self.tape.remove(&square);
        } else {
            self.tape.insert(square, symbol);
        }
    }

    /// Non-blank squares in ascending order.
    pub fn tape(&self) -> &BTreeMap<i64, Symbol> {
        &self.tape
    }

    /// Symbols from the leftmost to the rightmost non-blank square.
    pub fn tape_segment(&self) -> Vec<Symbol> {
        match (self.tape.first_key_value(), self.tape.last_key_value()) {
            (Some((&lo, _)), Some((&hi, _))) => (lo..=hi).map(|x| self.read(x)).collect(),
            _ => Vec::new(),
        }
    }

    /// State and tape relative to the head position.
    pub fn normalized(&self) -> (HeadState, Vec<(i64, Symbol)>) {
        let shifted = self
            .tape
            .iter()
            .map(|(&x, &s)| (x - self.head_position, s))
            .collect();
        (self.head_state, shifted)
    }
}

/// Applies one transition. The input configuration is left untouched.
pub fn step(
    machine: &TuringMachine,
    config: &Configuration,
) -> Result<Configuration, MachineError> {
    let state = match config.head_state {
        HeadState::Running(q) => q,
        HeadState::Stopped => return Err(MachineError::AlreadyStopped),
    };
    if state >= machine.num_states() {
        return Err(MachineError::InvalidMachine(format!(
            "configuration state {state} outside machine with {} states",
            machine.num_states()
        )));
    }
    let symbol = config.read(config.head_position);
    if u32::from(symbol) >= machine.num_symbols() {
        return Err(MachineError::InvalidInput {
            position: config.head_position.max(0) as usize,
            symbol,
            num_symbols: machine.num_symbols(),
        });
    }
    let t = machine.transition(state, symbol);
    let mut next = config.clone();
    next.write(config.head_position, t.write);
    next.head_position += t.movement.delta();
    next.head_state = match t.next {
        Next::State(q) => HeadState::Running(q),
        Next::Stop => HeadState::Stopped,
    };
    next.step_count += 1;
    Ok(next)
}
