use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AicError, SearchLimits};
use crate::machine::{run_with, MachineClass, MachineCode, Outcome, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub code: MachineCode,
    pub outcome: Outcome,
    pub steps: u64,
}

impl CensusRow {
    pub fn outcome_label(&self) -> &'static str {
        match self.outcome {
            Outcome::Halted { .. } => "halted",
            Outcome::CycleCertified(_) => "cycle",
            Outcome::BudgetExhausted { .. } => "exhausted",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusCounts {
    pub halted: u64,
    pub cycle_certified: u64,
    pub budget_exhausted: u64,
}

impl CensusCounts {
    pub fn total(&self) -> u64 {
        self.halted + self.cycle_certified + self.budget_exhausted
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub class: MachineClass,
    pub budget: u64,
    pub counts: CensusCounts,
    pub fraction_halted: f64,
    #[serde(skip)]
    pub rows: Vec<CensusRow>,
}

/// Runs every machine of the class on a blank tape and tallies the outcomes.
pub fn halting_census(
    class: MachineClass,
    budget: u64,
    limits: &SearchLimits,
) -> Result<CensusReport, AicError> {
    let total = class.cardinality()?;
    if total > limits.max_machines {
        return Err(AicError::ClassOverCap {
            cardinality: total,
            cap: limits.max_machines,
        });
    }
    if budget == 0 {
        return Err(AicError::Machine(crate::machine::MachineError::ZeroBudget));
    }
    let options = RunOptions {
        budget,
        detect_cycles: true,
        visited_cap: limits.visited_cap,
    };
    const SHARD: u128 = 512;
    let shards: Vec<(u128, u128)> = (0..total)
        .step_by(SHARD as usize)
        .map(|s| (s, (s + SHARD).min(total)))
        .collect();
    let rows = shards
        .par_iter()
        .map(|&(s, e)| -> Result<Vec<CensusRow>, AicError> {
            class
                .enumerate_range(s, e)?
                .map(|(code, machine)| {
                    let record = run_with(&machine, &[], &options)?;
                    Ok(CensusRow {
                        code,
                        outcome: record.outcome,
                        steps: record.steps(),
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();

    let mut counts = CensusCounts::default();
    for row in &rows {
        match row.outcome {
            Outcome::Halted { .. } => counts.halted += 1,
            Outcome::CycleCertified(_) => counts.cycle_certified += 1,
            Outcome::BudgetExhausted { .. } => counts.budget_exhausted += 1,
        }
    }
    Ok(CensusReport {
        class,
        budget,
        fraction_halted: counts.halted as f64 / counts.total() as f64,
        counts,
        rows,
    })
}

/// CSV with header `code,outcome,steps`, one row per machine in code order.
pub fn census_csv(report: &CensusReport) -> String {
    let mut out = String::from("code,outcome,steps\n");
    for row in &report.rows {
        writeln!(out, "{},{},{}", row.code, row.outcome_label(), row.steps).unwrap();
    }
    out
}
