use serde::{Deserialize, Serialize};

use super::AicError;
use crate::machine::{
    MachineClass, MachineCode, Move, Next, Symbol, Transition, TuringMachine, BLANK,
};

/// A straight-line machine that prints a fixed string and stops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiteralWriter {
    pub machine: TuringMachine,
    pub code: MachineCode,
    pub code_bit_length: u32,
    /// Steps to halt on a blank tape.
    pub runtime: u64,
}

fn check_target(target: &[Symbol]) -> Result<(), AicError> {
    if target.first() == Some(&BLANK) || target.last() == Some(&BLANK) {
        return Err(AicError::UnrepresentableTarget(
            "outputs never start or end with a blank".into(),
        ));
    }
    Ok(())
}

/// State `i` writes `target[i]` and steps right; the last state stops.
///
/// Unused `(state, symbol)` entries hold code 0 (write blank, left, state 0),
/// which keeps the writer's code as small as its layout allows.
pub fn literal_upper_bound(target: &[Symbol]) -> Result<LiteralWriter, AicError> {
    check_target(target)?;
    let num_states = target.len().max(1);
    let num_symbols = target
        .iter()
        .map(|&s| u32::from(s) + 1)
        .max()
        .unwrap_or(2)
        .max(2);
    let too_large = || AicError::WriterTooLarge {
        length: target.len(),
    };
    let states = u32::try_from(num_states).map_err(|_| too_large())?;
    let class = MachineClass::new(states, num_symbols).map_err(|_| too_large())?;

    let filler = Transition::new(BLANK, Move::Left, Next::State(0));
    let machine = TuringMachine::from_fn(states, num_symbols, |q, s| {
        if s != BLANK {
            return filler;
        }
        let write = target.get(q as usize).copied().unwrap_or(BLANK);
        let next = if q + 1 == states {
            Next::Stop
        } else {
            Next::State(q + 1)
        };
        Transition::new(write, Move::Right, next)
    })?;
    let code = class.encode(&machine)?;
    Ok(LiteralWriter {
        machine,
        code,
        code_bit_length: code.bit_length(),
        runtime: u64::from(states),
    })
}

/// Copies `machine` into a class with at least as many states and symbols.
///
/// Added table entries are code-0 entries, so behaviour on the original
/// alphabet is unchanged.
pub fn embed_machine(
    machine: &TuringMachine,
    class: MachineClass,
) -> Result<TuringMachine, AicError> {
    let (s, k) = machine.class();
    if class.num_states < s || class.num_symbols < k {
        return Err(AicError::Machine(
            crate::machine::MachineError::ClassMismatch {
                expected: (class.num_states, class.num_symbols),
                found: (s, k),
            },
        ));
    }
    let filler = Transition::new(BLANK, Move::Left, Next::State(0));
    Ok(TuringMachine::from_fn(
        class.num_states,
        class.num_symbols,
        |q, sym| {
            if q < s && u32::from(sym) < k {
                machine.transition(q, sym)
            } else {
                filler
            }
        },
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{run, Outcome};

    #[test]
    fn single_symbol_writer() {
        let w = literal_upper_bound(&[1]).unwrap();
        assert_eq!(w.machine.class(), (1, 2));
        let r = run(&w.machine, &[], 10).unwrap();
        assert_eq!(r.outcome, Outcome::Halted { steps: 1 });
        assert_eq!(r.output.unwrap(), vec![1]);
        // (q0, 0) -> 1 R STOP packs to 0b111
        assert_eq!(w.code, MachineCode(0b111));
        assert_eq!(w.code_bit_length, 3);
    }

    #[test]
    fn three_state_writer() {
        let w = literal_upper_bound(&[1, 0, 1]).unwrap();
        assert_eq!(w.machine.class(), (3, 2));
        let r = run(&w.machine, &[], 100).unwrap();
        assert_eq!(r.outcome, Outcome::Halted { steps: 3 });
        assert_eq!(r.output.unwrap(), vec![1, 0, 1]);
        assert_eq!(w.runtime, 3);
    }

    #[test]
    fn wider_alphabets_and_empty_target() {
        let w = literal_upper_bound(&[2, 1, 2]).unwrap();
        assert_eq!(w.machine.class(), (3, 3));
        assert_eq!(
            run(&w.machine, &[], 10).unwrap().output.unwrap(),
            vec![2, 1, 2]
        );

        let w = literal_upper_bound(&[]).unwrap();
        let r = run(&w.machine, &[], 10).unwrap();
        assert_eq!(r.outcome, Outcome::Halted { steps: 1 });
        assert_eq!(r.output.unwrap(), Vec::<Symbol>::new());
    }

    #[test]
    fn rejects_unrepresentable_or_huge_targets() {
        assert!(literal_upper_bound(&[0, 1]).is_err());
        assert!(literal_upper_bound(&[1, 0]).is_err());
        assert!(matches!(
            literal_upper_bound(&[1; 40]),
            Err(AicError::WriterTooLarge { length: 40 })
        ));
    }

    #[test]
    fn embedding_preserves_runs() {
        let w = literal_upper_bound(&[1, 1]).unwrap();
        let big = embed_machine(&w.machine, MachineClass::new(3, 3).unwrap()).unwrap();
        assert_eq!(big.class(), (3, 3));
        assert_eq!(
            run(&big, &[], 50).unwrap(),
            run(&w.machine, &[], 50).unwrap()
        );
        assert!(embed_machine(&big, MachineClass::new(2, 2).unwrap()).is_err());
    }
}
