use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::cycle::{translated_match, CycleCertificate, CycleKind, Side};
use super::tape::Tape;
use super::tm::{step, Configuration, HeadState, Next, Symbol, TuringMachine, BLANK};
use super::MachineError;

/// Default number of visited-set entries and records kept for cycle detection.
pub const DEFAULT_VISITED_CAP: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Halted { steps: u64 },
    CycleCertified(CycleCertificate),
    BudgetExhausted { budget: u64 },
}

impl Outcome {
    pub fn is_halted(&self) -> bool {
        matches!(self, Outcome::Halted { .. })
    }

    pub fn is_cycle(&self) -> bool {
        matches!(self, Outcome::CycleCertified(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunRecord {
    pub outcome: Outcome,
    /// Steps executed plus one (the initial configuration).
    pub trace_length: u64,
    /// Leftmost to rightmost non-blank square, present only when halted.
    pub output: Option<Vec<Symbol>>,
    /// Set when the visited-set cap was hit and cycle detection was switched off.
    pub cycle_detection_disabled: bool,
}

impl RunRecord {
    pub fn steps(&self) -> u64 {
        self.trace_length - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub budget: u64,
    pub detect_cycles: bool,
    pub visited_cap: usize,
}

impl RunOptions {
    pub fn with_budget(budget: u64) -> Self {
        Self {
            budget,
            detect_cycles: true,
            visited_cap: DEFAULT_VISITED_CAP,
        }
    }
}

/// Runs `machine` on `input` for at most `budget` steps with cycle detection on.
pub fn run(
    machine: &TuringMachine,
    input: &[Symbol],
    budget: u64,
) -> Result<RunRecord, MachineError> {
    run_with(machine, input, &RunOptions::with_budget(budget))
}

pub fn run_with(
    machine: &TuringMachine,
    input: &[Symbol],
    options: &RunOptions,
) -> Result<RunRecord, MachineError> {
    if options.budget == 0 {
        return Err(MachineError::ZeroBudget);
    }
    machine.check_input(input)?;
    Ok(Runner::new(machine, input, options).execute())
}

/// Configurations `0..=steps` of a run, stopping early at STOP.
pub fn trace(
    machine: &TuringMachine,
    input: &[Symbol],
    steps: u64,
) -> Result<Vec<Configuration>, MachineError> {
    machine.check_input(input)?;
    let mut config = Configuration::initial(input);
    let mut out = vec![config.clone()];
    for _ in 0..steps {
        if config.head_state == HeadState::Stopped {
            break;
        }
        config = step(machine, &config)?;
        out.push(config.clone());
    }
    Ok(out)
}

// Rolling hash of the tape, sum over squares of symbol * BASE^square mod 2^61-1.
const MODULUS: u64 = (1 << 61) - 1;
const BASE: u64 = 0x1d8e_4e27_c47d_124f % MODULUS;

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    let p = u128::from(a) * u128::from(b);
    let lo = (p as u64) & MODULUS;
    let hi = (p >> 61) as u64;
    let s = lo + hi;
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b);
        }
        b = mul_mod(b, b);
        e >>= 1;
    }
    acc
}

struct Record {
    step: u64,
    state: u32,
    pos: i64,
    // tape squares `lo..lo + cells.len()` at record time; squares outside are blank
    lo: i64,
    cells: Vec<Symbol>,
}

impl Record {
    fn read(&self, x: i64) -> Symbol {
        let i = x - self.lo;
        if i < 0 || i as usize >= self.cells.len() {
            BLANK
        } else {
            self.cells[i as usize]
        }
    }
}

/// Monotonic stack answering "extreme head position since step i".
struct Extremes {
    // (step, pos) with pos strictly increasing (for min) from bottom to top
    min_stack: Vec<(u64, i64)>,
    max_stack: Vec<(u64, i64)>,
}

impl Extremes {
    fn push(&mut self, step: u64, pos: i64) {
        while self.min_stack.last().is_some_and(|&(_, p)| p >= pos) {
            self.min_stack.pop();
        }
        self.min_stack.push((step, pos));
        while self.max_stack.last().is_some_and(|&(_, p)| p <= pos) {
            self.max_stack.pop();
        }
        self.max_stack.push((step, pos));
    }

    fn min_since(&self, step: u64) -> i64 {
        let k = self.min_stack.partition_point(|&(s, _)| s < step);
        self.min_stack[k].1
    }

    fn max_since(&self, step: u64) -> i64 {
        let k = self.max_stack.partition_point(|&(s, _)| s < step);
        self.max_stack[k].1
    }
}

struct Runner<'a> {
    machine: &'a TuringMachine,
    input: &'a [Symbol],
    options: &'a RunOptions,
    tape: Tape,
    state: u32,
    pos: i64,
    steps: u64,
    // cycle detection
    detecting: bool,
    disabled: bool,
    hash: u64,
    pow_pos: u64,
    inv_pow_pos: u64,
    inv_base: u64,
    visited: FxHashMap<(u32, u64), u64>,
    extremes: Extremes,
    right_records: Vec<Record>,
    left_records: Vec<Record>,
    max_pos: i64,
    min_pos: i64,
    input_lo: i64,
    input_hi: i64,
}

impl<'a> Runner<'a> {
    fn new(machine: &'a TuringMachine, input: &'a [Symbol], options: &'a RunOptions) -> Self {
        let mut hash = 0;
        let mut p = 1;
        for &s in input {
            hash = (hash + mul_mod(u64::from(s), p)) % MODULUS;
            p = mul_mod(p, BASE);
        }
        let input_lo = input.iter().position(|&s| s != BLANK).unwrap_or(0) as i64;
        let input_hi = input.iter().rposition(|&s| s != BLANK).unwrap_or(0) as i64;
        Self {
            machine,
            input,
            options,
            tape: Tape::new(input),
            state: 0,
            pos: 0,
            steps: 0,
            detecting: options.detect_cycles,
            disabled: false,
            hash,
            pow_pos: 1,
            inv_pow_pos: 1,
            inv_base: pow_mod(BASE, MODULUS - 2),
            visited: FxHashMap::default(),
            extremes: Extremes {
                min_stack: Vec::new(),
                max_stack: Vec::new(),
            },
            right_records: Vec::new(),
            left_records: Vec::new(),
            max_pos: i64::MIN,
            min_pos: i64::MAX,
            input_lo,
            input_hi,
        }
    }

    fn record(&self, outcome: Outcome, output: Option<Vec<Symbol>>) -> RunRecord {
        RunRecord {
            outcome,
            trace_length: self.steps + 1,
            output,
            cycle_detection_disabled: self.disabled,
        }
    }

    fn execute(mut self) -> RunRecord {
        if let Some(cert) = self.observe() {
            return self.record(Outcome::CycleCertified(cert), None);
        }
        while self.steps < self.options.budget {
            let symbol = self.tape.read(self.pos);
            let t = self.machine.transition(self.state, symbol);
            if t.write != symbol {
                let delta = (u64::from(t.write) + MODULUS - u64::from(symbol)) % MODULUS;
                self.hash = (self.hash + mul_mod(delta, self.pow_pos)) % MODULUS;
                self.tape.write(self.pos, t.write);
            }
            self.pos += t.movement.delta();
            if t.movement.delta() > 0 {
                self.pow_pos = mul_mod(self.pow_pos, BASE);
                self.inv_pow_pos = mul_mod(self.inv_pow_pos, self.inv_base);
            } else {
                self.pow_pos = mul_mod(self.pow_pos, self.inv_base);
                self.inv_pow_pos = mul_mod(self.inv_pow_pos, BASE);
            }
            self.steps += 1;
            match t.next {
                Next::Stop => {
                    let output = self.tape.segment();
                    return self.record(Outcome::Halted { steps: self.steps }, Some(output));
                }
                Next::State(q) => self.state = q,
            }
            if let Some(cert) = self.observe() {
                return self.record(Outcome::CycleCertified(cert), None);
            }
        }
        self.record(
            Outcome::BudgetExhausted {
                budget: self.options.budget,
            },
            None,
        )
    }

    /// Feeds the current configuration to the detector.
    fn observe(&mut self) -> Option<CycleCertificate> {
        if !self.detecting {
            return None;
        }
        let j = self.steps;
        let mut best: Option<CycleCertificate> = None;

        let key = (self.state, mul_mod(self.hash, self.inv_pow_pos));
        match self.visited.get(&key) {
            Some(&i) => {
                if let Some(drift) = self.verify_stationary(i, j) {
                    best = Some(CycleCertificate {
                        entry_step: i,
                        period: j - i,
                        drift,
                        kind: CycleKind::Stationary,
                    });
                }
            }
            None => {
                self.visited.insert(key, j);
            }
        }

        self.extremes.push(j, self.pos);
        let is_right = self.pos > self.max_pos && self.pos >= self.input_hi;
        let is_left = self.pos < self.min_pos && self.pos <= self.input_lo;
        self.max_pos = self.max_pos.max(self.pos);
        self.min_pos = self.min_pos.min(self.pos);

        for side in [Side::Right, Side::Left] {
            let is_record = match side {
                Side::Right => is_right,
                Side::Left => is_left,
            };
            if !is_record {
                continue;
            }
            if let Some(cert) = self.match_records(side, j) {
                if best.is_none_or(|b| cert.entry_step < b.entry_step) {
                    best = Some(cert);
                }
            }
            let snapshot = self.snapshot(side, j);
            match side {
                Side::Right => self.right_records.push(snapshot),
                Side::Left => self.left_records.push(snapshot),
            }
        }

        if best.is_none()
            && self.visited.len() + self.right_records.len() + self.left_records.len()
                > self.options.visited_cap
        {
            self.detecting = false;
            self.disabled = true;
            self.visited = FxHashMap::default();
            self.right_records.clear();
            self.left_records.clear();
        }
        best
    }

    fn snapshot(&self, side: Side, step: u64) -> Record {
        // every square that can be compared later: visited squares plus the input
        let (lo, hi) = match side {
            Side::Right => (self.min_pos.min(self.input_lo), self.pos),
            Side::Left => (self.pos, self.max_pos.max(self.input_hi)),
        };
        Record {
            step,
            state: self.state,
            pos: self.pos,
            lo,
            cells: self.tape.window(lo, hi),
        }
    }

    fn match_records(&self, side: Side, j: u64) -> Option<CycleCertificate> {
        let records = match side {
            Side::Right => &self.right_records,
            Side::Left => &self.left_records,
        };
        records
            .iter()
            .filter(|r| r.state == self.state)
            .find(|r| {
                let reach = match side {
                    Side::Right => r.pos - self.extremes.min_since(r.step),
                    Side::Left => self.extremes.max_since(r.step) - r.pos,
                };
                translated_match(
                    side,
                    reach,
                    r.pos,
                    self.pos,
                    |x| r.read(x),
                    |x| self.tape.read(x),
                )
            })
            .map(|r| CycleCertificate {
                entry_step: r.step,
                period: j - r.step,
                drift: self.pos - r.pos,
                kind: CycleKind::Translated,
            })
    }

    /// Replays the run to confirm a hash hit exactly; returns the drift.
    fn verify_stationary(&self, i: u64, j: u64) -> Option<i64> {
        let mut tape = Tape::new(self.input);
        let mut state = 0u32;
        let mut pos = 0i64;
        let mut at_i = None;
        for s in 0..=j {
            if s == i {
                at_i = Some((state, pos, normalized_segment(&tape, pos)));
            }
            if s == j {
                break;
            }
            let t = self.machine.transition(state, tape.read(pos));
            tape.write(pos, t.write);
            pos += t.movement.delta();
            match t.next {
                Next::State(q) => state = q,
                Next::Stop => return None,
            }
        }
        let (state_i, pos_i, seg_i) = at_i?;
        (state_i == state && seg_i == normalized_segment(&tape, pos)).then_some(pos - pos_i)
    }
}

fn normalized_segment(tape: &Tape, head: i64) -> Option<(i64, Vec<Symbol>)> {
    tape.extent()
        .map(|(lo, hi)| (lo - head, tape.window(lo, hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::cycle::detect_cycle;
    use crate::machine::{library, MachineClass, Move};

    #[test]
    fn immediate_stop() {
        let r = run(&library::immediate_halt(1), &[1, 0, 1], 10).unwrap();
        assert_eq!(r.outcome, Outcome::Halted { steps: 1 });
        assert_eq!(r.trace_length, 2);
    }

    #[test]
    fn champion_output_and_budget() {
        let m = library::champion_2x2();
        let r = run(&m, &[], 100).unwrap();
        assert_eq!(r.outcome, Outcome::Halted { steps: 6 });
        assert_eq!(r.output.as_deref(), Some(&[1, 1, 1, 1][..]));
        let short = run(&m, &[], 5).unwrap();
        assert_eq!(short.outcome, Outcome::BudgetExhausted { budget: 5 });
        assert_eq!(short.trace_length, 6);
        assert_eq!(short.output, None);
    }

    #[test]
    fn blank_drift_certified_immediately() {
        let r = run(&library::rightward_cycler(0), &[], 1000).unwrap();
        match r.outcome {
            Outcome::CycleCertified(c) => assert_eq!((c.entry_step, c.period), (0, 1)),
            other => panic!("{other:?}"),
        }
        assert_eq!(r.trace_length, 2);
    }

    #[test]
    fn invalid_input_rejected_before_running() {
        let err = run(&library::champion_2x2(), &[0, 2], 10).unwrap_err();
        assert!(matches!(
            err,
            MachineError::InvalidInput { position: 1, .. }
        ));
        assert!(matches!(
            run(&library::champion_2x2(), &[], 0),
            Err(MachineError::ZeroBudget)
        ));
    }

    #[test]
    fn cap_disables_detection_and_flags_it() {
        let opts = RunOptions {
            budget: 500,
            detect_cycles: true,
            visited_cap: 16,
        };
        let r = run_with(&library::binary_counter(), &[], &opts).unwrap();
        assert!(r.cycle_detection_disabled);
        assert_eq!(r.outcome, Outcome::BudgetExhausted { budget: 500 });
    }

    #[test]
    fn rolling_hash_matches_recount() {
        let m = library::binary_counter();
        let opts = RunOptions::with_budget(1);
        let mut live = Runner::new(&m, &[1, 2, 0, 1], &opts);
        for _ in 0..200 {
            let symbol = live.tape.read(live.pos);
            let t = m.transition(live.state, symbol);
            let delta = (u64::from(t.write) + MODULUS - u64::from(symbol)) % MODULUS;
            live.hash = (live.hash + mul_mod(delta, live.pow_pos)) % MODULUS;
            live.tape.write(live.pos, t.write);
            live.pos += t.movement.delta();
            live.pow_pos = if t.movement == Move::Right {
                mul_mod(live.pow_pos, BASE)
            } else {
                mul_mod(live.pow_pos, live.inv_base)
            };
            if let Next::State(q) = t.next {
                live.state = q;
            }
        }
        let (lo, hi) = live.tape.extent().unwrap();
        let mut expected = 0;
        for x in lo..=hi {
            let p = if x >= 0 {
                pow_mod(BASE, x as u64)
            } else {
                pow_mod(live.inv_base, (-x) as u64)
            };
            expected = (expected + mul_mod(u64::from(live.tape.read(x)), p)) % MODULUS;
        }
        assert_eq!(live.hash, expected);
        let expected_pow = if live.pos >= 0 {
            pow_mod(BASE, live.pos as u64)
        } else {
            pow_mod(live.inv_base, (-live.pos) as u64)
        };
        assert_eq!(live.pow_pos, expected_pow);
    }

    #[test]
    fn online_detector_agrees_with_trace_detector_on_small_classes() {
        for (s, k) in [(1, 2), (2, 2)] {
            let class = MachineClass::new(s, k).unwrap();
            for (code, m) in class.enumerate().unwrap() {
                for input in [&[][..], &[1][..], &[0, 1, 1][..]] {
                    let r = run(&m, input, 60).unwrap();
                    let t = trace(&m, input, 60).unwrap();
                    let reference = detect_cycle(&t);
                    match r.outcome {
                        Outcome::CycleCertified(c) => {
                            assert_eq!(Some(c), reference, "code {code} input {input:?}");
                            assert_eq!(r.trace_length, c.entry_step + c.period + 1);
                        }
                        Outcome::Halted { steps } => {
                            assert_eq!(reference, None);
                            assert_eq!(t.len() as u64, steps + 1);
                            assert_eq!(r.output.clone().unwrap(), t.last().unwrap().tape_segment());
                        }
                        Outcome::BudgetExhausted { .. } => {
                            assert_eq!(reference, None, "code {code} input {input:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn certified_configurations_repeat() {
        let class = MachineClass::new(2, 2).unwrap();
        for (_, m) in class.enumerate().unwrap().step_by(7) {
            let r = run(&m, &[], 200).unwrap();
            if let Outcome::CycleCertified(c) = r.outcome {
                let t = trace(&m, &[], c.entry_step + 3 * c.period).unwrap();
                let a = &t[c.entry_step as usize];
                let b = &t[(c.entry_step + c.period) as usize];
                let b2 = &t[(c.entry_step + 2 * c.period) as usize];
                assert_eq!(a.head_state, b.head_state);
                assert_eq!(b.head_state, b2.head_state);
                assert_eq!(b.head_position - a.head_position, c.drift);
                assert_eq!(b2.head_position - b.head_position, c.drift);
                if c.kind == CycleKind::Stationary {
                    assert_eq!(a.normalized(), b.normalized());
                }
            }
        }
    }

    #[test]
    fn one_two_class_all_decided_from_blank_tape() {
        // (q0, 0) -> STOP halts at once; otherwise the head drifts over fresh
        // blanks in one direction forever.
        let class = MachineClass::new(1, 2).unwrap();
        for (_, m) in class.enumerate().unwrap() {
            let first = m.transition(0, 0);
            let r = run(&m, &[], 1).unwrap();
            match first.next {
                Next::Stop => assert_eq!(r.outcome, Outcome::Halted { steps: 1 }),
                Next::State(_) => assert!(r.outcome.is_cycle()),
            }
        }
    }

    #[test]
    fn outcome_json_round_trip() {
        let record = run(&library::rightward_cycler(1), &[], 10).unwrap();
        let text = serde_json::to_string(&record.outcome).unwrap();
        assert!(text.starts_with(r#"{"status":"cycle_certified""#), "{text}");
        assert_eq!(
            serde_json::from_str::<Outcome>(&text).unwrap(),
            record.outcome
        );
    }
}
