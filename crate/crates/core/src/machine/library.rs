//! Small named machines used by tests, examples and the CLI.

use super::tm::{Move, Next, Transition, TuringMachine};

use Move::{Left as L, Right as R};

fn t(write: u8, movement: Move, next: Next) -> Transition {
    Transition::new(write, movement, next)
}

/// The 2-state, 2-symbol busy beaver: halts after 6 steps leaving four 1s.
pub fn champion_2x2() -> TuringMachine {
    const A: Next = Next::State(0);
    const B: Next = Next::State(1);
    TuringMachine::new(
        2,
        2,
        vec![t(1, R, B), t(1, L, B), t(1, L, A), t(1, R, Next::Stop)],
    )
    .expect("valid table")
}

/// One state; every transition enters STOP after writing `write`.
pub fn immediate_halt(write: u8) -> TuringMachine {
    TuringMachine::from_fn(1, 2, |_, _| t(write, R, Next::Stop)).expect("valid table")
}

/// One state moving right forever over blanks, writing `write`.
pub fn rightward_cycler(write: u8) -> TuringMachine {
    TuringMachine::from_fn(1, 2, |_, _| t(write, R, Next::State(0))).expect("valid table")
}

/// Writes 1 and steps right, then steps back and clears the square, and repeats.
pub fn blinker() -> TuringMachine {
    const A: Next = Next::State(0);
    const B: Next = Next::State(1);
    TuringMachine::new(2, 2, vec![t(1, R, B), t(0, R, B), t(0, L, A), t(0, L, A)])
        .expect("valid table")
}

/// Binary counter on the tape: never halts and its footprint grows without bound.
pub fn binary_counter() -> TuringMachine {
    // state 0: walk right to the end of the number; state 1: increment going left
    const WALK: Next = Next::State(0);
    const INC: Next = Next::State(1);
    TuringMachine::new(
        2,
        3,
        vec![
            // walk: blank -> turn around, 1 / 2 -> keep walking
            t(0, L, INC),
            t(1, R, WALK),
            t(2, R, WALK),
            // inc: blank (past the left end) -> write 2, flip to walking
            t(2, R, WALK),
            t(2, R, WALK),
            t(1, L, INC),
        ],
    )
    .expect("valid table")
}
