//! Plain-text machine descriptions.
//!
//! ```text
//! states=2 symbols=2
//! 0 0 -> 1 R 1
//! 0 1 -> 1 L 1
//! 1 0 -> 1 L 0
//! 1 1 -> 1 R STOP
//! ```
//!
//! Blank lines and `#` comments are ignored.

use super::tm::{Move, Next, Symbol, Transition, TuringMachine};
use super::MachineError;

fn err(line: usize, message: impl Into<String>) -> MachineError {
    MachineError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: usize, text: &str) -> Result<(u32, u32), MachineError> {
    let mut states = None;
    let mut symbols = None;
    for field in text.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key=value, got `{field}`")))?;
        let value: u32 = value
            .parse()
            .map_err(|_| err(line, format!("`{value}` is not a non-negative integer")))?;
        match key {
            "states" => states = Some(value),
            "symbols" => symbols = Some(value),
            other => return Err(err(line, format!("unknown header key `{other}`"))),
        }
    }
    match (states, symbols) {
        (Some(s), Some(k)) => Ok((s, k)),
        _ => Err(err(line, "header must be `states=<s> symbols=<k>`")),
    }
}

pub fn parse_machine(text: &str) -> Result<TuringMachine, MachineError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines.next().ok_or_else(|| err(1, "empty machine file"))?;
    let (s, k) = parse_header(header_line, header)?;
    if s == 0 || !(2..=256).contains(&k) {
        return Err(err(header_line, "need states >= 1 and 2 <= symbols <= 256"));
    }

    let mut table: Vec<Option<Transition>> = vec![None; (s * k) as usize];
    let mut last_line = header_line;
    for (n, line) in lines {
        last_line = n;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [state, symbol, "->", write, mv, next] = parts[..] else {
            return Err(err(
                n,
                "expected `<state> <symbol> -> <write> <L|R> <next|STOP>`",
            ));
        };
        let num = |field: &str, what: &str, limit: u32| -> Result<u32, MachineError> {
            let v: u32 = field
                .parse()
                .map_err(|_| err(n, format!("{what} `{field}` is not an integer")))?;
            if v >= limit {
                return Err(err(n, format!("{what} {v} out of range 0..{limit}")));
            }
            Ok(v)
        };
        let q = num(state, "state", s)?;
        let sym = num(symbol, "symbol", k)?;
        let w = num(write, "write symbol", k)?;
        let movement = match mv {
            "L" => Move::Left,
            "R" => Move::Right,
            other => return Err(err(n, format!("move must be L or R, got `{other}`"))),
        };
        let next = if next == "STOP" {
            Next::Stop
        } else {
            Next::State(num(next, "next state", s)?)
        };
        let slot = &mut table[(q * k + sym) as usize];
        if slot.is_some() {
            return Err(err(n, format!("duplicate entry for ({q}, {sym})")));
        }
        *slot = Some(Transition::new(w as Symbol, movement, next));
    }

    let mut complete = Vec::with_capacity(table.len());
    for (i, t) in table.into_iter().enumerate() {
        match t {
            Some(t) => complete.push(t),
            None => {
                let (q, sym) = (i as u32 / k, i as u32 % k);
                return Err(err(
                    last_line + 1,
                    format!("missing entry for ({q}, {sym}); table declared on line {header_line}"),
                ));
            }
        }
    }
    TuringMachine::new(s, k, complete)
}

/// Parses a symbol string such as `"1021"`; each character is one digit symbol.
pub fn parse_symbols(text: &str) -> Result<Vec<Symbol>, MachineError> {
    text.chars()
        .enumerate()
        .map(|(i, c)| {
            c.to_digit(10)
                .map(|d| d as Symbol)
                .ok_or(MachineError::BadSymbolString {
                    position: i,
                    found: c,
                })
        })
        .collect()
}

pub fn format_symbols(symbols: &[Symbol]) -> String {
    symbols
        .iter()
        .map(|&s| if s < 10 { char::from(b'0' + s) } else { '?' })
        .collect()
}
