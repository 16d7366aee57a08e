//! Gödel numbering of machines within a fixed `(states, symbols)` class.
//!
//! Each `(state, symbol)` entry occupies a fixed-width bit field. Inside an
//! entry the fields are packed little-endian in the order write, move, next:
//!
//! ```text
//!   bit 0 ........................................... bit w-1
//!   | write: ceil(log2 k) | move: 1 | next: ceil(log2(s+1)) |
//! ```
//!
//! Entries are concatenated in row-major `(state, symbol)` order starting at
//! the least significant bit. Move 0 is Left, 1 is Right. Next values
//! `0..s` name working states and `s` names STOP. Codes whose write field is
//! `>= k` or whose next field is `> s` are invalid.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::tm::{Move, Next, Transition, TuringMachine};
use super::MachineError;

/// Codes are held in 128 bits; classes whose layout is wider are rejected.
pub const MAX_CODE_BITS: u32 = 128;

/// A Gödel number of a machine within its class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MachineCode(pub u128);

impl MachineCode {
    /// Number of binary digits needed to write the code (code 0 is the one-digit string "0").
    pub fn bit_length(self) -> u32 {
        (u128::BITS - self.0.leading_zeros()).max(1)
    }
}

impl fmt::Display for MachineCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn ceil_log2(n: u32) -> u32 {
    debug_assert!(n >= 1);
    u32::BITS - (n - 1).leading_zeros()
}

/// A `(num_states, num_symbols)` machine class together with its bit layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MachineClass {
    pub num_states: u32,
    pub num_symbols: u32,
}

impl MachineClass {
    pub fn new(num_states: u32, num_symbols: u32) -> Result<Self, MachineError> {
        if num_states == 0 || !(2..=256).contains(&num_symbols) {
            return Err(MachineError::InvalidClass {
                num_states,
                num_symbols,
                reason: "need states >= 1 and 2 <= symbols <= 256".into(),
            });
        }
        let class = Self {
            num_states,
            num_symbols,
        };
        let bits = u64::from(class.entry_bits()) * u64::from(num_states) * u64::from(num_symbols);
        if bits > u64::from(MAX_CODE_BITS) {
            return Err(MachineError::ClassTooLarge {
                num_states,
                num_symbols,
            });
        }
        Ok(class)
    }

    pub fn write_bits(&self) -> u32 {
        ceil_log2(self.num_symbols)
    }

    pub fn next_bits(&self) -> u32 {
        ceil_log2(self.num_states + 1)
    }

    pub fn entry_bits(&self) -> u32 {
        self.write_bits() + 1 + self.next_bits()
    }

    pub fn num_entries(&self) -> u32 {
        self.num_states * self.num_symbols
    }

    /// Total width of a code in this class.
    pub fn code_bits(&self) -> u32 {
        self.entry_bits() * self.num_entries()
    }

    /// Values each entry can take: writes x moves x (states + STOP).
    pub fn entry_radix(&self) -> u128 {
        2 * u128::from(self.num_symbols) * (u128::from(self.num_states) + 1)
    }

    /// Number of valid machines, `(2 k (s+1))^(s k)`.
    pub fn cardinality(&self) -> Result<u128, MachineError> {
        self.entry_radix()
            .checked_pow(self.num_entries())
            .ok_or(MachineError::ClassTooLarge {
                num_states: self.num_states,
                num_symbols: self.num_symbols,
            })
    }

    fn pack_entry(&self, t: Transition) -> u128 {
        let mv = match t.movement {
            Move::Left => 0u128,
            Move::Right => 1,
        };
        let next = match t.next {
            Next::State(q) => u128::from(q),
            Next::Stop => u128::from(self.num_states),
        };
        u128::from(t.write) | mv << self.write_bits() | next << (self.write_bits() + 1)
    }

    /// Decodes one entry; the error names the out-of-range field.
    fn unpack_entry(&self, bits: u128) -> Result<Transition, &'static str> {
        let wb = self.write_bits();
        let write = bits & ((1u128 << wb) - 1);
        let mv = (bits >> wb) & 1;
        let next = bits >> (wb + 1);
        if write >= u128::from(self.num_symbols) {
            return Err("write");
        }
        if next > u128::from(self.num_states) {
            return Err("next");
        }
        let next = if next == u128::from(self.num_states) {
            Next::Stop
        } else {
            Next::State(next as u32)
        };
        let movement = if mv == 0 { Move::Left } else { Move::Right };
        Ok(Transition::new(write as u8, movement, next))
    }

    pub fn encode(&self, machine: &TuringMachine) -> Result<MachineCode, MachineError> {
        if machine.class() != (self.num_states, self.num_symbols) {
            return Err(MachineError::ClassMismatch {
                expected: (self.num_states, self.num_symbols),
                found: machine.class(),
            });
        }
        let eb = self.entry_bits();
        let code = machine
            .transitions()
            .iter()
            .enumerate()
            .fold(0u128, |acc, (i, &t)| {
                acc | self.pack_entry(t) << (eb * i as u32)
            });
        Ok(MachineCode(code))
    }

    pub fn decode(&self, code: MachineCode) -> Result<TuringMachine, MachineError> {
        let width = self.code_bits();
        if width < u128::BITS && code.0 >> width != 0 {
            return Err(MachineError::InvalidCode {
                code: code.0,
                state: None,
                symbol: None,
                field: "width",
            });
        }
        let eb = self.entry_bits();
        let mask = (1u128 << eb) - 1;
        let mut table = Vec::with_capacity(self.num_entries() as usize);
        for i in 0..self.num_entries() {
            let bits = (code.0 >> (eb * i)) & mask;
            let t = self
                .unpack_entry(bits)
                .map_err(|field| MachineError::InvalidCode {
                    code: code.0,
                    state: Some(i / self.num_symbols),
                    symbol: Some(i % self.num_symbols),
                    field,
                })?;
            table.push(t);
        }
        TuringMachine::new(self.num_states, self.num_symbols, table)
    }

    /// The code of the machine at position `rank` in ascending code order.
    ///
    /// Valid field values form a prefix of each field's bit range, so ascending
    /// numeric order of valid codes is mixed-radix counting over entries, with
    /// the last entry most significant.
    pub fn code_at_rank(&self, rank: u128) -> Result<MachineCode, MachineError> {
        let radix = self.entry_radix();
        let total = self.cardinality()?;
        if rank >= total {
            return Err(MachineError::RankOutOfRange { rank, total });
        }
        let eb = self.entry_bits();
        let mut rest = rank;
        let mut code = 0u128;
        for i in 0..self.num_entries() {
            let digit = rest % radix;
            rest /= radix;
            code |= self.digit_to_bits(digit) << (eb * i);
        }
        Ok(MachineCode(code))
    }

    /// Inverse of [`code_at_rank`](Self::code_at_rank) for valid codes.
    pub fn rank_of(&self, code: MachineCode) -> Result<u128, MachineError> {
        self.decode(code)?;
        let radix = self.entry_radix();
        let eb = self.entry_bits();
        let mask = (1u128 << eb) - 1;
        let mut rank = 0u128;
        for i in (0..self.num_entries()).rev() {
            let bits = (code.0 >> (eb * i)) & mask;
            rank = rank * radix + self.bits_to_digit(bits);
        }
        Ok(rank)
    }

    // digit = write + k * (move + 2 * next)
    fn digit_to_bits(&self, digit: u128) -> u128 {
        let k = u128::from(self.num_symbols);
        let write = digit % k;
        let mv = (digit / k) % 2;
        let next = digit / (2 * k);
        write | mv << self.write_bits() | next << (self.write_bits() + 1)
    }

    fn bits_to_digit(&self, bits: u128) -> u128 {
        let k = u128::from(self.num_symbols);
        let wb = self.write_bits();
        let write = bits & ((1u128 << wb) - 1);
        let mv = (bits >> wb) & 1;
        let next = bits >> (wb + 1);
        write + k * (mv + 2 * next)
    }

    /// Every valid machine, in ascending code order.
    pub fn enumerate(&self) -> Result<Enumeration, MachineError> {
        self.enumerate_range(0, self.cardinality()?)
    }

    /// Machines with ranks in `start..end`, in ascending code order.
    pub fn enumerate_range(&self, start: u128, end: u128) -> Result<Enumeration, MachineError> {
        let total = self.cardinality()?;
        let end = end.min(total);
        let start = start.min(end);
        let radix = self.entry_radix();
        let mut digits = Vec::with_capacity(self.num_entries() as usize);
        let mut rest = start;
        for _ in 0..self.num_entries() {
            digits.push(rest % radix);
            rest /= radix;
        }
        Ok(Enumeration {
            class: *self,
            digits,
            remaining: end - start,
        })
    }
}

/// Restartable ascending-order stream of `(code, machine)` pairs.
#[derive(Debug, Clone)]
pub struct Enumeration {
    class: MachineClass,
    // least significant entry first
    digits: Vec<u128>,
    remaining: u128,
}

impl Enumeration {
    fn current_code(&self) -> MachineCode {
        let eb = self.class.entry_bits();
        let code = self.digits.iter().enumerate().fold(0u128, |acc, (i, &d)| {
            acc | self.class.digit_to_bits(d) << (eb * i as u32)
        });
        MachineCode(code)
    }

    fn advance(&mut self) {
        let radix = self.class.entry_radix();
        for d in self.digits.iter_mut() {
            *d += 1;
            if *d < radix {
                return;
            }
            *d = 0;
        }
    }
}

impl Iterator for Enumeration {
    type Item = (MachineCode, TuringMachine);

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        let code = self.current_code();
        let machine = self
            .class
            .decode(code)
            .expect("odometer digits always decode to a valid machine");
        self.remaining -= 1;
        if self.remaining > 0 {
            self.advance();
        }
        Some((code, machine))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match usize::try_from(self.remaining) {
            Ok(n) => (n, Some(n)),
            Err(_) => (usize::MAX, None),
        }
    }
}

/// Encodes a machine within its own class.
pub fn encode(machine: &TuringMachine) -> Result<MachineCode, MachineError> {
    let (s, k) = machine.class();
    MachineClass::new(s, k)?.encode(machine)
}

pub fn decode(code: MachineCode, class: (u32, u32)) -> Result<TuringMachine, MachineError> {
    MachineClass::new(class.0, class.1)?.decode(code)
}

/// Ascending-order stream over every valid machine of the class.
pub fn enumerate_machines(class: (u32, u32)) -> Result<Enumeration, MachineError> {
    let class = MachineClass::new(class.0, class.1)?;
    // surfaces the overflow error (with its count formula) before any output
    class.cardinality()?;
    class.enumerate()
}
