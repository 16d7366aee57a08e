//! Time domain side of the spectrum: return amplitudes of a clock state and
//! recovery of eigenvalues from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::tridiag::eigen_weights;
use super::SpectrumError;
use crate::clock::TridiagonalHamiltonian;

/// `a(t) = sum_j w_j exp(-i lambda_j t)` for `t = 0..num_steps`, with `w` the LDOS at `site`.
pub fn return_amplitude_series(
    h: &TridiagonalHamiltonian,
    site: usize,
    num_steps: usize,
) -> Result<Vec<Complex64>, SpectrumError> {
    let pairs = eigen_weights(h, site)?;
    Ok(amplitudes_from_weights(&pairs, num_steps))
}

pub fn amplitudes_from_weights(pairs: &[(f64, f64)], num_steps: usize) -> Vec<Complex64> {
    (0..num_steps)
        .map(|t| {
            let t = t as f64;
            pairs
                .iter()
                .map(|&(lambda, w)| Complex64::from_polar(w, -lambda * t))
                .sum()
        })
        .collect()
}

/// Locations of the `count` strongest spectral lines in a return-amplitude series.
///
/// The series is Hann-windowed and transformed on the grid `2 pi k / n`; lines are
/// the largest local maxima of the magnitude, returned as energies in `(-pi, pi]`
/// sorted ascending. Resolution is one grid step, `2 pi / n`.
pub fn spectral_peaks(series: &[Complex64], count: usize) -> Vec<f64> {
    let n = series.len();
    if n < 3 {
        return Vec::new();
    }
    let mut buf: Vec<Complex64> = series
        .iter()
        .enumerate()
        .map(|(t, &a)| a * (0.5 - 0.5 * (2.0 * PI * t as f64 / n as f64).cos()))
        .collect();
    // a(t) carries exp(-i lambda t), so the inverse transform peaks at +lambda
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|c| c.norm()).collect();

    let mut maxima: Vec<(usize, f64)> = (0..n)
        .filter(|&k| {
            let prev = mag[(k + n - 1) % n];
            let next = mag[(k + 1) % n];
            mag[k] > prev && mag[k] >= next
        })
        .map(|k| (k, mag[k]))
        .collect();
    maxima.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut energies: Vec<f64> = maxima
        .into_iter()
        .take(count)
        .map(|(k, _)| {
            let omega = 2.0 * PI * k as f64 / n as f64;
            if omega > PI {
                omega - 2.0 * PI
            } else {
                omega
            }
        })
        .collect();
    energies.sort_by(f64::total_cmp);
    energies
}
