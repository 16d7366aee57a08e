use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{chain_gap, SpectrumError, DEFAULT_TOL};
use crate::clock::{build_chain, hamiltonian, TridiagonalHamiltonian};
use crate::machine::{CycleCertificate, Symbol, TuringMachine};

/// Gap exponent expected for a chain that keeps growing.
pub const TARGET_EXPONENT: f64 = -2.0;
/// Half-width of the exponent band accepted as a gapless trend.
pub const CLASSIFY_EXPONENT_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub truncation: usize,
    pub length: usize,
    pub halted: bool,
    pub gap: f64,
    /// Log-log slope of gap against truncation over the points so far.
    pub exponent_so_far: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Gapped {
        halt_steps: u64,
        gap: f64,
    },
    GaplessTrend {
        exponent: f64,
        certificate: Option<CycleCertificate>,
    },
    Unknown {
        budget: usize,
    },
}

impl Verdict {
    /// One-line summary, e.g. `GAPPED T=6 gap=0.43`.
    pub fn summary(&self) -> String {
        match self {
            Verdict::Gapped { halt_steps, gap } => format!("GAPPED T={halt_steps} gap={gap}"),
            Verdict::GaplessTrend {
                exponent,
                certificate,
            } => format!(
                "GAPLESS_TREND exponent≈{exponent:.3} certificate={}",
                if certificate.is_some() {
                    "cycle"
                } else {
                    "none"
                }
            ),
            Verdict::Unknown { budget } => format!("UNKNOWN budget={budget}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapClassification {
    pub verdict: Verdict,
    pub sweep: Vec<SweepPoint>,
}

/// Ordinary least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Builds the clock chain at every truncation and classifies the gap behaviour.
///
/// Gapped when the run halts inside the largest truncation; a gapless trend when
/// it does not, there are at least three points, the gap falls strictly, and the
/// fitted exponent lies within [`CLASSIFY_EXPONENT_BAND`] of -2; unknown otherwise.
pub fn gap_sweep(
    machine: &TuringMachine,
    input: &[Symbol],
    truncations: &[usize],
) -> Result<GapClassification, SpectrumError> {
    if truncations.is_empty() {
        return Err(SpectrumError::InvalidSweep("no truncations".into()));
    }
    if truncations.iter().any(|&n| n < 2) {
        return Err(SpectrumError::InvalidSweep(
            "truncations must be >= 2".into(),
        ));
    }
    if truncations.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SpectrumError::InvalidSweep(
            "truncations must be strictly ascending".into(),
        ));
    }
    machine.check_input(input)?;

    let chains = truncations
        .par_iter()
        .map(|&n| -> Result<_, SpectrumError> {
            let chain = build_chain(machine, input, n)?;
            let gap = chain_gap(&hamiltonian(&chain), DEFAULT_TOL)?;
            Ok((chain, gap))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut sweep = Vec::with_capacity(chains.len());
    for (i, (chain, gap)) in chains.iter().enumerate() {
        let so_far: Vec<(f64, f64)> = chains[..=i]
            .iter()
            .map(|(c, g)| (c.truncation as f64, *g))
            .collect();
        sweep.push(SweepPoint {
            truncation: chain.truncation,
            length: chain.length,
            halted: chain.halted,
            gap: *gap,
            exponent_so_far: fit_loglog_slope(&so_far),
        });
    }

    let (last_chain, last_gap) = chains.last().expect("non-empty sweep");
    let budget = last_chain.truncation;
    let verdict = if last_chain.halted {
        Verdict::Gapped {
            halt_steps: last_chain
                .halt_steps
                .expect("halted chain records its step count"),
            gap: *last_gap,
        }
    } else if sweep.len() < 3 {
        Verdict::Unknown { budget }
    } else {
        let exponent = sweep.last().and_then(|p| p.exponent_so_far);
        let decreasing = sweep.windows(2).all(|w| w[1].gap < w[0].gap);
        match exponent {
            Some(e) if decreasing && (e - TARGET_EXPONENT).abs() <= CLASSIFY_EXPONENT_BAND => {
                Verdict::GaplessTrend {
                    exponent: e,
                    certificate: last_chain.certificate,
                }
            }
            _ => Verdict::Unknown { budget },
        }
    };
    Ok(GapClassification { verdict, sweep })
}

/// CSV with header `truncation,length,halted,gap,exponent_so_far`.
pub fn sweep_csv(classification: &GapClassification) -> String {
    let mut out = String::from("truncation,length,halted,gap,exponent_so_far\n");
    for p in &classification.sweep {
        let exponent = p.exponent_so_far.map(|e| e.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            p.truncation, p.length, p.halted, p.gap, exponent
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum EpsilonDecision {
    /// Some chain of length `witness` has gap below epsilon, and the true chain is at least that long.
    Yes {
        witness: usize,
        gap: f64,
        certificate: Option<CycleCertificate>,
    },
    /// The run halts and its saturated gap is at least epsilon.
    No {
        halt_steps: u64,
        gap: f64,
    },
    Unknown {
        budget: usize,
    },
}

/// Decides whether the clock-chain gap drops below `epsilon`, looking at
/// truncations up to `budget_truncation`.
///
/// A chain that is still running (or certified never to stop) at truncation `N`
/// is at least `N` long, and the gap only shrinks as the chain grows, so a gap
/// below `epsilon` at `N` settles the question.
pub fn gap_below_epsilon(
    machine: &TuringMachine,
    input: &[Symbol],
    epsilon: f64,
    budget_truncation: usize,
) -> Result<EpsilonDecision, SpectrumError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(SpectrumError::InvalidEpsilon(epsilon));
    }
    if budget_truncation == 0 {
        return Err(SpectrumError::InvalidSweep(
            "budget truncation must be >= 1".into(),
        ));
    }
    let chain = build_chain(machine, input, budget_truncation)?;
    let gap_at = |n: usize| chain_gap(&TridiagonalHamiltonian::uniform_chain(n), DEFAULT_TOL);

    if chain.halted {
        let gap = chain_gap(&hamiltonian(&chain), DEFAULT_TOL)?;
        let halt_steps = chain
            .halt_steps
            .expect("halted chain records its step count");
        return Ok(if gap < epsilon {
            EpsilonDecision::Yes {
                witness: chain.length,
                gap,
                certificate: None,
            }
        } else {
            EpsilonDecision::No { halt_steps, gap }
        });
    }
    if budget_truncation < 2 || gap_at(budget_truncation)? >= epsilon {
        return Ok(EpsilonDecision::Unknown {
            budget: budget_truncation,
        });
    }
    // smallest n in [2, budget] with gap(n) < epsilon
    let (mut lo, mut hi) = (2usize, budget_truncation);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if gap_at(mid)? < epsilon {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(EpsilonDecision::Yes {
        witness: lo,
        gap: gap_at(lo)?,
        certificate: chain.certificate,
    })
}
