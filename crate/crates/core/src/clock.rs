//! Clock picture of a computation.
//!
//! Each executed step advances a clock by one tick. Restricted to the states the
//! computation actually visits, the clock Hamiltonian is a nearest-neighbour
//! hopping chain over the clock labels `0..L`: a finished computation gives a
//! finite chain, a computation that keeps running gives a chain that grows with
//! every tick and is cut off here at a truncation length.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::machine::{
    encode, run, CycleCertificate, MachineCode, MachineError, Outcome, Symbol, TuringMachine,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockChain {
    /// Number of clock states.
    pub length: usize,
    /// The run reached STOP within the truncation.
    pub halted: bool,
    pub truncation: usize,
    /// Halting step count when `halted`.
    pub halt_steps: Option<u64>,
    /// Non-halting proof, when the run produced one inside the truncation.
    pub certificate: Option<CycleCertificate>,
    pub source: ChainSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSource {
    pub class: (u32, u32),
    pub code: Option<MachineCode>,
    pub input: Vec<Symbol>,
}

/// Runs the machine for at most `truncation - 1` steps and records the clock orbit.
pub fn build_chain(
    machine: &TuringMachine,
    input: &[Symbol],
    truncation: usize,
) -> Result<ClockChain, MachineError> {
    if truncation == 0 {
        return Err(MachineError::ZeroBudget);
    }
    machine.check_input(input)?;
    let source = ChainSource {
        class: machine.class(),
        code: encode(machine).ok(),
        input: input.to_vec(),
    };
    if truncation == 1 {
        return Ok(ClockChain {
            length: 1,
            halted: false,
            truncation,
            halt_steps: None,
            certificate: None,
            source,
        });
    }
    let record = run(machine, input, truncation as u64 - 1)?;
    let (length, halted, halt_steps, certificate) = match record.outcome {
        Outcome::Halted { steps } => (steps as usize + 1, true, Some(steps), None),
        Outcome::CycleCertified(c) => (truncation, false, None, Some(c)),
        Outcome::BudgetExhausted { .. } => (truncation, false, None, None),
    };
    Ok(ClockChain {
        length,
        halted,
        truncation,
        halt_steps,
        certificate,
        source,
    })
}

/// Real symmetric tridiagonal matrix given by its diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalHamiltonian {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

impl TridiagonalHamiltonian {
    /// Returns `None` unless `off_diagonal` is one shorter than a non-empty `diagonal`.
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Option<Self> {
        (!diagonal.is_empty() && off_diagonal.len() + 1 == diagonal.len()).then_some(Self {
            diagonal,
            off_diagonal,
        })
    }

    /// Uniform hopping chain: zero on-site energy, amplitude -1 between neighbours.
    pub fn uniform_chain(length: usize) -> Self {
        assert!(length >= 1, "chain needs at least one site");
        Self {
            diagonal: vec![0.0; length],
            off_diagonal: vec![-1.0; length - 1],
        }
    }

    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn trace(&self) -> f64 {
        self.diagonal.iter().sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.diagonal.iter().map(|d| d * d).sum::<f64>()
            + 2.0 * self.off_diagonal.iter().map(|e| e * e).sum::<f64>()
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.dimension();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 {
                self.off_diagonal[i - 1].abs()
            } else {
                0.0
            };
            let right = if i + 1 < n {
                self.off_diagonal[i].abs()
            } else {
                0.0
            };
            lo = lo.min(self.diagonal[i] - left - right);
            hi = hi.max(self.diagonal[i] + left + right);
        }
        (lo, hi)
    }

    /// Dense row-major copy, for checks on small matrices.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diagonal[i];
            if i + 1 < n {
                m[i][i + 1] = self.off_diagonal[i];
                m[i + 1][i] = self.off_diagonal[i];
            }
        }
        m
    }

    /// CSV with header `index,diagonal,offdiagonal`; the last row has an empty off-diagonal.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,diagonal,offdiagonal\n");
        for (i, d) in self.diagonal.iter().enumerate() {
            match self.off_diagonal.get(i) {
                Some(e) => writeln!(out, "{i},{d},{e}").unwrap(),
                None => writeln!(out, "{i},{d},").unwrap(),
            }
        }
        out
    }
}

pub fn hamiltonian(chain: &ClockChain) -> TridiagonalHamiltonian {
    TridiagonalHamiltonian::uniform_chain(chain.length)
}
