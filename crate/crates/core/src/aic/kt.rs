use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AicError;
use crate::machine::{
    run_with, MachineClass, MachineCode, Outcome, RunOptions, Symbol, DEFAULT_VISITED_CAP,
};

/// Step budget `c2 * (n + 1)^2 + c0` for a target of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetRule {
    pub c2: u64,
    pub c0: u64,
}

impl Default for BudgetRule {
    fn default() -> Self {
        Self { c2: 256, c0: 64 }
    }
}

impl BudgetRule {
    pub fn new(c2: u64, c0: u64) -> Result<Self, AicError> {
        if c0 == 0 {
            return Err(AicError::InvalidBudgetRule { c2, c0 });
        }
        Ok(Self { c2, c0 })
    }

    pub fn steps(&self, length: usize) -> Result<u64, AicError> {
        let overflow = || AicError::BudgetOverflow { length };
        let n1 = u64::try_from(length)
            .ok()
            .and_then(|n| n.checked_add(1))
            .ok_or_else(overflow)?;
        n1.checked_mul(n1)
            .and_then(|sq| sq.checked_mul(self.c2))
            .and_then(|v| v.checked_add(self.c0))
            .ok_or_else(overflow)
    }

    /// The same rule with both coefficients multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Result<Self, AicError> {
        match (self.c2.checked_mul(factor), self.c0.checked_mul(factor)) {
            (Some(c2), Some(c0)) => Self::new(c2, c0),
            _ => Err(AicError::BudgetOverflow { length: 0 }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KtQuery {
    pub target: Vec<Symbol>,
    pub class: MachineClass,
    pub budget_rule: BudgetRule,
}

/// Resource caps for exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    /// Largest number of machines a search may run.
    pub max_machines: u128,
    pub visited_cap: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_machines: 1 << 22,
            visited_cap: DEFAULT_VISITED_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Found {
    pub code: MachineCode,
    pub code_bit_length: u32,
    pub halt_steps: u64,
    /// Position of the code in ascending order within the class.
    pub rank: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KtCertificate {
    pub found: Option<Found>,
    /// Every code of at most this many bits was searched.
    pub exhaustive_up_to: u32,
    pub machines_searched: u128,
    /// The search stopped at the machine cap before covering the class.
    pub cap_reached: bool,
    pub budget: u64,
    pub class: MachineClass,
    pub target_echo: Vec<Symbol>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub reproduces: bool,
    pub steps_used: u64,
}

/// Runs one candidate on a blank tape and compares its output with `target`.
pub fn verify_candidate(
    code: MachineCode,
    class: MachineClass,
    target: &[Symbol],
    budget: u64,
    visited_cap: usize,
) -> Result<Verification, AicError> {
    let machine = class.decode(code)?;
    let options = RunOptions {
        budget,
        detect_cycles: true,
        visited_cap,
    };
    let record = run_with(&machine, &[], &options)?;
    Ok(Verification {
        reproduces: record.output.as_deref() == Some(target),
        steps_used: record.steps(),
    })
}

// Machines per sequential shard and shards per parallel batch.
const SHARD: u128 = 256;
const BATCH_SHARDS: u128 = 64;

/// Bits `b` such that every code below `code` covers all codes of at most `b` bits.
fn covered_bits(next_unsearched: MachineCode) -> u32 {
    match next_unsearched.0 {
        0 => 0,
        c => u128::BITS - c.leading_zeros() - 1,
    }
}

fn first_hit_in_shard(
    class: MachineClass,
    start: u128,
    end: u128,
    target: &[Symbol],
    options: &RunOptions,
) -> Result<Option<(u128, MachineCode, u64)>, AicError> {
    for (offset, (code, machine)) in class.enumerate_range(start, end)?.enumerate() {
        let record = run_with(&machine, &[], options)?;
        if let Outcome::Halted { steps } = record.outcome {
            if record.output.as_deref() == Some(target) {
                return Ok(Some((start + offset as u128, code, steps)));
            }
        }
    }
    Ok(None)
}

/// Exhaustive ascending search with an explicit step budget.
///
/// Shards of the code space run in parallel; a batch's answer is its smallest
/// hit, so the result does not depend on scheduling.
pub fn kt_search_budget(
    target: &[Symbol],
    class: MachineClass,
    budget: u64,
    limits: &SearchLimits,
) -> Result<KtCertificate, AicError> {
    if budget == 0 {
        return Err(AicError::Machine(crate::machine::MachineError::ZeroBudget));
    }
    if let Some(position) = target
        .iter()
        .position(|&s| u32::from(s) >= class.num_symbols)
    {
        return Err(AicError::Machine(
            crate::machine::MachineError::InvalidInput {
                position,
                symbol: target[position],
                num_symbols: class.num_symbols,
            },
        ));
    }
    let total = class.cardinality()?;
    let limit = total.min(limits.max_machines);
    let options = RunOptions {
        budget,
        detect_cycles: true,
        visited_cap: limits.visited_cap,
    };

    let certificate = |found: Option<Found>, searched: u128| -> Result<KtCertificate, AicError> {
        let exhaustive_up_to = match found {
            Some(f) => covered_bits(f.code),
            None if searched >= total => class.code_bits(),
            None => covered_bits(class.code_at_rank(searched)?),
        };
        Ok(KtCertificate {
            found,
            exhaustive_up_to,
            machines_searched: searched,
            cap_reached: found.is_none() && searched < total,
            budget,
            class,
            target_echo: target.to_vec(),
        })
    };

    let mut start = 0u128;
    while start < limit {
        let batch_end = (start + SHARD * BATCH_SHARDS).min(limit);
        let shards: Vec<(u128, u128)> = (start..batch_end)
            .step_by(SHARD as usize)
            .map(|s| (s, (s + SHARD).min(batch_end)))
            .collect();
        let hits = shards
            .par_iter()
            .map(|&(s, e)| first_hit_in_shard(class, s, e, target, &options))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some((rank, code, halt_steps)) = hits.into_iter().flatten().min_by_key(|h| h.0) {
            let found = Found {
                code,
                code_bit_length: code.bit_length(),
                halt_steps,
                rank,
            };
            return certificate(Some(found), rank + 1);
        }
        start = batch_end;
    }
    certificate(None, limit)
}

/// `K_t` of the query target with budget `t(|target|)` from the query's rule.
pub fn kt_search(query: &KtQuery, limits: &SearchLimits) -> Result<KtCertificate, AicError> {
    let budget = query.budget_rule.steps(query.target.len())?;
    kt_search_budget(&query.target, query.class, budget, limits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub budget: u64,
    pub found: Option<MachineCode>,
    pub code_bits: Option<u32>,
    pub halt_steps: Option<u64>,
}

/// Found code lengths along ascending budgets; they never increase.
pub fn kt_budget_curve(
    target: &[Symbol],
    class: MachineClass,
    budgets: &[u64],
    limits: &SearchLimits,
) -> Result<Vec<CurvePoint>, AicError> {
    if budgets.first() == Some(&0) || budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AicError::BudgetsNotAscending);
    }
    budgets
        .iter()
        .map(|&budget| {
            let cert = kt_search_budget(target, class, budget, limits)?;
            Ok(CurvePoint {
                budget,
                found: cert.found.map(|f| f.code),
                code_bits: cert.found.map(|f| f.code_bit_length),
                halt_steps: cert.found.map(|f| f.halt_steps),
            })
        })
        .collect()
}

/// CSV with header `budget,found,code_bits,halt_steps`; empty fields when nothing was found.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("budget,found,code_bits,halt_steps\n");
    for p in points {
        let opt = |v: Option<String>| v.unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{}",
            p.budget,
            opt(p.found.map(|c| c.to_string())),
            opt(p.code_bits.map(|b| b.to_string())),
            opt(p.halt_steps.map(|s| s.to_string())),
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aic::{embed_machine, literal_upper_bound};
    use crate::machine::{encode, library};

    fn class(s: u32, k: u32) -> MachineClass {
        MachineClass::new(s, k).unwrap()
    }

    #[test]
    fn budget_rule() {
        assert_eq!(BudgetRule::default().steps(4).unwrap(), 256 * 25 + 64);
        assert_eq!(BudgetRule::new(0, 1).unwrap().steps(100).unwrap(), 1);
        assert!(BudgetRule::new(3, 0).is_err());
        assert!(BudgetRule::new(u64::MAX, 1).unwrap().steps(3).is_err());
        assert_eq!(
            BudgetRule::default().scaled(4).unwrap(),
            BudgetRule::new(1024, 256).unwrap()
        );
    }

    #[test]
    fn champion_output_found_at_or_before_champion() {
        let champion = library::champion_2x2();
        let query = KtQuery {
            target: vec![1, 1, 1, 1],
            class: class(2, 2),
            budget_rule: BudgetRule::default(),
        };
        let cert = kt_search(&query, &SearchLimits::default()).unwrap();
        let found = cert.found.unwrap();
        assert!(found.code <= encode(&champion).unwrap());
        let m = query.class.decode(found.code).unwrap();
        let r = crate::machine::run(&m, &[], cert.budget).unwrap();
        assert_eq!(r.output.unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(
            r.outcome,
            Outcome::Halted {
                steps: found.halt_steps
            }
        );
        assert_eq!(cert.exhaustive_up_to, found.code_bit_length - 1);
    }

    #[test]
    fn empty_target_is_first_blank_halter() {
        for c in [class(1, 2), class(2, 2), class(1, 3)] {
            let cert = kt_search_budget(&[], c, 10, &SearchLimits::default()).unwrap();
            let found = cert.found.unwrap();
            let first = c
                .enumerate()
                .unwrap()
                .find(|(_, m)| {
                    let r = crate::machine::run(m, &[], 10).unwrap();
                    r.outcome.is_halted() && r.output.as_deref() == Some(&[][..])
                })
                .unwrap();
            assert_eq!(found.code, first.0);
        }
    }

    #[test]
    fn larger_budget_never_lengthens() {
        let target = [1, 1, 1];
        let c = class(2, 2);
        let short = kt_search_budget(&target, c, 50, &SearchLimits::default()).unwrap();
        let long = kt_search_budget(&target, c, 200, &SearchLimits::default()).unwrap();
        assert!(long.found.unwrap().code_bit_length <= short.found.unwrap().code_bit_length);
        assert!(long.found.unwrap().code <= short.found.unwrap().code);
    }

    #[test]
    fn writer_bounds_the_search() {
        for target in [vec![1], vec![1, 1]] {
            let w = literal_upper_bound(&target).unwrap();
            let (s, k) = w.machine.class();
            let cert = kt_search_budget(&target, class(s, k), w.runtime, &SearchLimits::default())
                .unwrap();
            assert!(cert.found.unwrap().code_bit_length <= w.code_bit_length);
        }
        // writer lifted into a larger class is also beaten there
        let w = literal_upper_bound(&[1]).unwrap();
        let big = class(2, 2);
        let lifted = big
            .encode(&embed_machine(&w.machine, big).unwrap())
            .unwrap();
        let cert = kt_search_budget(&[1], big, 1, &SearchLimits::default()).unwrap();
        assert!(cert.found.unwrap().code <= lifted);
    }

    #[test]
    fn cap_gives_partial_certificate() {
        let limits = SearchLimits {
            max_machines: 10,
            ..SearchLimits::default()
        };
        let cert = kt_search_budget(&[2], class(2, 3), 100, &limits).unwrap();
        assert!(cert.found.is_none());
        assert!(cert.cap_reached);
        assert_eq!(cert.machines_searched, 10);
        let next = class(2, 3).code_at_rank(10).unwrap();
        assert!(1u128 << cert.exhaustive_up_to <= next.0);
    }

    #[test]
    fn unreachable_target_exhausts_class() {
        let cert =
            kt_search_budget(&[1, 1, 1], class(1, 2), 100, &SearchLimits::default()).unwrap();
        assert!(cert.found.is_none());
        assert!(!cert.cap_reached);
        assert_eq!(cert.machines_searched, 64);
        assert_eq!(cert.exhaustive_up_to, 6);
    }

    #[test]
    fn target_outside_alphabet_rejected() {
        assert!(kt_search_budget(&[2], class(1, 2), 10, &SearchLimits::default()).is_err());
    }

    #[test]
    fn verification_cost_bounded_by_budget() {
        let c = class(2, 2);
        for (code, _) in c.enumerate().unwrap().step_by(97) {
            let v = verify_candidate(code, c, &[1, 1], 300, DEFAULT_VISITED_CAP).unwrap();
            assert!(v.steps_used <= 300);
        }
        let champ = encode(&library::champion_2x2()).unwrap();
        let v = verify_candidate(champ, c, &[1, 1, 1, 1], 300, DEFAULT_VISITED_CAP).unwrap();
        assert_eq!(
            v,
            Verification {
                reproduces: true,
                steps_used: 6
            }
        );
    }

    #[test]
    fn curve_is_monotone_and_consistent() {
        let target = [1, 1, 1, 1];
        let c = class(2, 2);
        let budgets = [1, 5, 6, 100, 6464];
        let curve = kt_budget_curve(&target, c, &budgets, &SearchLimits::default()).unwrap();
        assert_eq!(curve[0].found, None);
        let defined: Vec<u32> = curve.iter().filter_map(|p| p.code_bits).collect();
        assert!(defined.windows(2).all(|w| w[1] <= w[0]));
        let direct = kt_search_budget(&target, c, 6464, &SearchLimits::default()).unwrap();
        assert_eq!(curve.last().unwrap().found, direct.found.map(|f| f.code));
        assert!(kt_budget_curve(&target, c, &[5, 5], &SearchLimits::default()).is_err());
        let csv = curve_csv(&curve);
        assert!(csv.starts_with("budget,found,code_bits,halt_steps\n1,,,\n"));
    }

    #[test]
    fn minimal_budget_finds_nothing_long() {
        let rule = BudgetRule::new(0, 1).unwrap();
        let query = KtQuery {
            target: vec![1, 1],
            class: class(2, 2),
            budget_rule: rule,
        };
        assert!(kt_search(&query, &SearchLimits::default())
            .unwrap()
            .found
            .is_none());
    }
}
