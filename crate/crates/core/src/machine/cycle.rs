//! Non-halting certificates.
//!
//! Two kinds of repetition are recognised, both sound:
//!
//! * **Stationary**: the configuration at step `entry` equals the one at
//!   `entry + period` once both are translated so the head sits on square 0.
//!   Dynamics are translation invariant, so the run repeats forever.
//! * **Translated**: at steps `entry` and `entry + period` the head stands on a
//!   new rightmost (or leftmost) square with only blanks beyond it, in the same
//!   state, and the stretch of tape behind the head that the machine reads in
//!   between is identical at both times. The second leg then replays the
//!   first one shifted by `drift` squares, and so on.
//!
//! The certificate reported is the earliest one: the smallest step at which
//! any repetition becomes visible, and among those the smallest entry step.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tm::{Configuration, HeadState, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleKind {
    Stationary,
    Translated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycleCertificate {
    pub entry_step: u64,
    pub period: u64,
    /// Head displacement over one period.
    pub drift: i64,
    pub kind: CycleKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Right,
    Left,
}

/// Checks the translated-cycle condition between two records on `side`.
///
/// `reach` is how far behind the record square the head travelled between the
/// two records. `before` and `after` read the tape at the two record times.
pub(crate) fn translated_match(
    side: Side,
    reach: i64,
    pos_before: i64,
    pos_after: i64,
    before: impl Fn(i64) -> Symbol,
    after: impl Fn(i64) -> Symbol,
) -> bool {
    let dir = match side {
        Side::Right => -1,
        Side::Left => 1,
    };
    (0..=reach).all(|k| before(pos_before + dir * k) == after(pos_after + dir * k))
}

/// Scans a trace of consecutive configurations for the earliest certificate.
///
/// The trace must start at the initial configuration of a run. Absence of a
/// certificate says nothing about halting.
pub fn detect_cycle(trace: &[Configuration]) -> Option<CycleCertificate> {
    let first = trace.first()?;
    // unvisited squares still hold the initial tape, so records must lie beyond it
    let input_hi = first.tape().last_key_value().map(|(&x, _)| x).unwrap_or(0);
    let input_lo = first.tape().first_key_value().map(|(&x, _)| x).unwrap_or(0);

    let mut seen: HashMap<(HeadState, Vec<(i64, Symbol)>), usize> = HashMap::new();
    let mut right_records: Vec<usize> = Vec::new();
    let mut left_records: Vec<usize> = Vec::new();
    let mut max_pos = i64::MIN;
    let mut min_pos = i64::MAX;

    for (j, config) in trace.iter().enumerate() {
        if config.head_state == HeadState::Stopped {
            return None;
        }
        let mut best: Option<CycleCertificate> = None;
        let mut offer = |cert: CycleCertificate| {
            if best.is_none_or(|b| cert.entry_step < b.entry_step) {
                best = Some(cert);
            }
        };

        let key = config.normalized();
        match seen.get(&key) {
            Some(&i) => offer(CycleCertificate {
                entry_step: i as u64,
                period: (j - i) as u64,
                drift: config.head_position - trace[i].head_position,
                kind: CycleKind::Stationary,
            }),
            None => {
                seen.insert(key, j);
            }
        }

        let pos = config.head_position;
        let is_right_record = pos > max_pos && pos >= input_hi;
        let is_left_record = pos < min_pos && pos <= input_lo;
        max_pos = max_pos.max(pos);
        min_pos = min_pos.min(pos);

        for (side, is_record, records) in [
            (Side::Right, is_right_record, &mut right_records),
            (Side::Left, is_left_record, &mut left_records),
        ] {
            if !is_record {
                continue;
            }
            for &i in records.iter() {
                let earlier = &trace[i];
                if earlier.head_state != config.head_state {
                    continue;
                }
                let span = trace[i..=j].iter().map(|c| c.head_position);
                let reach = match side {
                    Side::Right => earlier.head_position - span.min().unwrap(),
                    Side::Left => span.max().unwrap() - earlier.head_position,
                };
                if translated_match(
                    side,
                    reach,
                    earlier.head_position,
                    pos,
                    |x| earlier.read(x),
                    |x| config.read(x),
                ) {
                    offer(CycleCertificate {
                        entry_step: i as u64,
                        period: (j - i) as u64,
                        drift: pos - earlier.head_position,
                        kind: CycleKind::Translated,
                    });
                    break;
                }
            }
            records.push(j);
        }

        if best.is_some() {
            return best;
        }
    }
    None
}
