//! Spectra of clock chains and the halting-aware gap classifier.

mod fourier;
mod gap;
mod tridiag;

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::TridiagonalHamiltonian;
use crate::machine::MachineError;

pub use fourier::{amplitudes_from_weights, return_amplitude_series, spectral_peaks};
pub use gap::{
    fit_loglog_slope, gap_below_epsilon, gap_sweep, sweep_csv, EpsilonDecision, GapClassification,
    SweepPoint, Verdict, CLASSIFY_EXPONENT_BAND, TARGET_EXPONENT,
};
pub use tridiag::{
    eigen_weights, eigenvalues, lowest_eigenvalues, sturm_count, BISECTION_MAX_ITER, QL_MAX_ITER,
};

/// Relative tolerance used when callers do not pick one.
pub const DEFAULT_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("tolerance {0} outside (0, 1e-6]")]
    InvalidTolerance(f64),

    #[error("eigenvalue {index} did not converge")]
    NoConvergence { index: usize },

    #[error("ground gap needs at least two levels")]
    UndefinedGap,

    #[error("site {site} outside chain of dimension {dimension}")]
    SiteOutOfRange { site: usize, dimension: usize },

    #[error("invalid truncation sweep: {0}")]
    InvalidSweep(String),

    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),

    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// `-2 cos(j pi / (L + 1))` for `j = 1..=L`, ascending.
pub fn analytic_uniform_spectrum(length: usize) -> Vec<f64> {
    (1..=length)
        .map(|j| -2.0 * (j as f64 * PI / (length as f64 + 1.0)).cos())
        .collect()
}

/// Closed-form ground gap of the uniform chain, `2 (cos(pi/(L+1)) - cos(2 pi/(L+1)))`.
pub fn analytic_gap(length: usize) -> Option<f64> {
    (length >= 2).then(|| {
        let x = PI / (length as f64 + 1.0);
        2.0 * (x.cos() - (2.0 * x).cos())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub ground_gap: Option<f64>,
    pub level_spacings: Vec<f64>,
    /// Squared overlap of the reference site with each eigenvector, aligned with `eigenvalues`.
    pub ldos_weights: Vec<f64>,
    pub site: usize,
}

impl SpectrumReport {
    /// CSV with header `j,eigenvalue,ldos_weight`, `j` counting levels from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,eigenvalue,ldos_weight\n");
        for (j, (e, w)) in self.eigenvalues.iter().zip(&self.ldos_weights).enumerate() {
            writeln!(out, "{},{e},{w}", j + 1).unwrap();
        }
        out
    }
}

/// Eigenvalues, spacings and the local density of states at `site`.
pub fn spectrum(
    h: &TridiagonalHamiltonian,
    site: usize,
    tol: f64,
) -> Result<SpectrumReport, SpectrumError> {
    let eigenvalues = eigenvalues(h, tol)?;
    let ldos_weights = ldos(h, site)?.into_iter().map(|(_, w)| w).collect();
    let level_spacings: Vec<f64> = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(SpectrumReport {
        ground_gap: level_spacings.first().copied(),
        eigenvalues,
        level_spacings,
        ldos_weights,
        site,
    })
}

pub fn ground_gap(report: &SpectrumReport) -> Result<f64, SpectrumError> {
    match report.eigenvalues.as_slice() {
        [e0, e1, ..] => Ok(e1 - e0),
        _ => Err(SpectrumError::UndefinedGap),
    }
}

/// `(eigenvalue, weight)` pairs for the local density of states at `site`.
pub fn ldos(h: &TridiagonalHamiltonian, site: usize) -> Result<Vec<(f64, f64)>, SpectrumError> {
    eigen_weights(h, site)
}

/// Ground gap from the two lowest eigenvalues only.
pub fn chain_gap(h: &TridiagonalHamiltonian, tol: f64) -> Result<f64, SpectrumError> {
    match lowest_eigenvalues(h, 2, tol)?.as_slice() {
        [e0, e1] => Ok(e1 - e0),
        _ => Err(SpectrumError::UndefinedGap),
    }
}
