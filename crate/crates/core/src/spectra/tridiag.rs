//! Symmetric tridiagonal eigenproblems.
//!
//! Eigenvalues come from Sturm-sequence bisection, which gives every eigenvalue
//! to a requested relative accuracy independently of the others. Eigenvector
//! weights at one site come from implicit QL iterations that carry a single row
//! of the accumulated rotation matrix, which costs O(n) per sweep instead of
//! O(n^2).

use rayon::prelude::*;

use super::SpectrumError;
use crate::clock::TridiagonalHamiltonian;

/// Bisection steps allowed per eigenvalue.
pub const BISECTION_MAX_ITER: usize = 256;
/// QL sweeps allowed per eigenvalue.
pub const QL_MAX_ITER: usize = 60;

fn check_tol(tol: f64) -> Result<(), SpectrumError> {
    if tol > 0.0 && tol <= 1e-6 {
        Ok(())
    } else {
        Err(SpectrumError::InvalidTolerance(tol))
    }
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diagonal: &[f64], off_diagonal: &[f64], x: f64) -> usize {
    let pivmin = f64::MIN_POSITIVE * off_diagonal.iter().fold(1.0f64, |m, e| m.max(e * e));
    let mut count = 0;
    let mut q = diagonal[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diagonal.len() {
        let e = off_diagonal[i - 1];
        q = diagonal[i] - x - e * e / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `index`-th smallest eigenvalue (0-based) by bisection.
fn bisect(h: &TridiagonalHamiltonian, index: usize, tol: f64) -> Result<f64, SpectrumError> {
    let (lo, hi) = h.gershgorin_bounds();
    let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    let (mut a, mut b) = (lo - pad, hi + pad);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (a + b);
        if b - a <= tol * mid.abs().max(1.0) || mid <= a || mid >= b {
            return Ok(mid);
        }
        if sturm_count(h.diagonal(), h.off_diagonal(), mid) > index {
            b = mid;
        } else {
            a = mid;
        }
    }
    Err(SpectrumError::NoConvergence { index })
}

/// All eigenvalues in ascending order, each within `tol * max(1, |lambda|)`.
pub fn eigenvalues(h: &TridiagonalHamiltonian, tol: f64) -> Result<Vec<f64>, SpectrumError> {
    check_tol(tol)?;
    (0..h.dimension())
        .into_par_iter()
        .map(|k| bisect(h, k, tol))
        .collect()
}

/// The `count` smallest eigenvalues in ascending order.
pub fn lowest_eigenvalues(
    h: &TridiagonalHamiltonian,
    count: usize,
    tol: f64,
) -> Result<Vec<f64>, SpectrumError> {
    check_tol(tol)?;
    (0..count.min(h.dimension()))
        .map(|k| bisect(h, k, tol))
        .collect()
}

/// Eigenvalues paired with the squared eigenvector component at `site`, sorted by eigenvalue.
pub fn eigen_weights(
    h: &TridiagonalHamiltonian,
    site: usize,
) -> Result<Vec<(f64, f64)>, SpectrumError> {
    let n = h.dimension();
    if site >= n {
        return Err(SpectrumError::SiteOutOfRange { site, dimension: n });
    }
    let mut d = h.diagonal().to_vec();
    let mut e = h.off_diagonal().to_vec();
    e.push(0.0);
    // row `site` of the accumulated eigenvector matrix, starting from the identity
    let mut z = vec![0.0; n];
    z[site] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(SpectrumError::NoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut pairs: Vec<(f64, f64)> = d.into_iter().zip(z.into_iter().map(|v| v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::analytic_uniform_spectrum;

    /// Roots of the characteristic polynomial by the three-term recurrence
    /// p_k(x) = (d_k - x) p_{k-1} - e^2 p_{k-2}, located by sign changes on a
    /// fine grid and polished by plain bisection on the polynomial value.
    fn charpoly_roots(h: &TridiagonalHamiltonian) -> Vec<f64> {
        let p = |x: f64| {
            let (d, e) = (h.diagonal(), h.off_diagonal());
            let mut prev = 1.0;
            let mut cur = d[0] - x;
            for k in 1..d.len() {
                let next = (d[k] - x) * cur - e[k - 1] * e[k - 1] * prev;
                prev = cur;
                cur = next;
            }
            cur
        };
        let grid = 200_000;
        let (lo, hi) = (-2.5, 2.5);
        let mut roots = Vec::new();
        for g in 0..grid {
            let mut a = lo + (hi - lo) * g as f64 / grid as f64;
            let mut b = lo + (hi - lo) * (g + 1) as f64 / grid as f64;
            let (pa, pb) = (p(a), p(b));
            if pa == 0.0 {
                roots.push(a);
                continue;
            }
            if pa * pb < 0.0 {
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if p(a) * p(m) <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
        roots
    }

    #[test]
    fn characteristic_polynomial_oracle_small_chains() {
        for l in 1..=8 {
            let h = TridiagonalHamiltonian::uniform_chain(l);
            let oracle = charpoly_roots(&h);
            assert_eq!(oracle.len(), l);
            let numeric = eigenvalues(&h, 1e-13).unwrap();
            let analytic = analytic_uniform_spectrum(l);
            for j in 0..l {
                assert!((numeric[j] - oracle[j]).abs() < 1e-10, "L={l} j={j}");
                assert!((analytic[j] - oracle[j]).abs() < 1e-10, "L={l} j={j}");
            }
        }
    }

    #[test]
    fn small_cases() {
        let ev = eigenvalues(&TridiagonalHamiltonian::uniform_chain(1), 1e-12).unwrap();
        assert_eq!(ev, vec![0.0]);
        let ev = eigenvalues(&TridiagonalHamiltonian::uniform_chain(3), 1e-12).unwrap();
        let s = 2f64.sqrt();
        for (a, b) in ev.iter().zip([-s, 0.0, s]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hundred_site_chain_matches_closed_form() {
        let ev = eigenvalues(&TridiagonalHamiltonian::uniform_chain(100), 1e-12).unwrap();
        for (j, v) in ev.iter().enumerate() {
            let exact = -2.0 * ((j + 1) as f64 * std::f64::consts::PI / 101.0).cos();
            assert!((v - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn general_tridiagonal_against_dense_oracle() {
        // [[1, 2, 0], [2, -1, 0.5], [0, 0.5, 3]]
        let h = TridiagonalHamiltonian::new(vec![1.0, -1.0, 3.0], vec![2.0, 0.5]).unwrap();
        let oracle = {
            let p = |x: f64| (1.0 - x) * ((-1.0 - x) * (3.0 - x) - 0.25) - 4.0 * (3.0 - x);
            let mut roots = Vec::new();
            let n = 100_000;
            for g in 0..n {
                let mut a = -5.0 + 10.0 * g as f64 / n as f64;
                let mut b = a + 10.0 / n as f64;
                if p(a) * p(b) < 0.0 {
                    for _ in 0..100 {
                        let m = 0.5 * (a + b);
                        if p(a) * p(m) <= 0.0 {
                            b = m
                        } else {
                            a = m
                        }
                    }
                    roots.push(a);
                }
            }
            roots
        };
        let ev = eigenvalues(&h, 1e-13).unwrap();
        let ql: Vec<f64> = eigen_weights(&h, 1)
            .unwrap()
            .into_iter()
            .map(|p| p.0)
            .collect();
        for j in 0..3 {
            assert!((ev[j] - oracle[j]).abs() < 1e-10);
            assert!((ql[j] - oracle[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn ql_weights_form_a_distribution() {
        for l in [1, 2, 5, 33, 200] {
            let h = TridiagonalHamiltonian::uniform_chain(l);
            for site in [0, l / 2, l - 1] {
                let pairs = eigen_weights(&h, site).unwrap();
                let total: f64 = pairs.iter().map(|p| p.1).sum();
                assert!((total - 1.0).abs() < 1e-12);
                assert!(pairs.iter().all(|p| p.1 >= 0.0));
            }
        }
        assert!(eigen_weights(&TridiagonalHamiltonian::uniform_chain(3), 3).is_err());
    }

    #[test]
    fn tolerance_precondition() {
        let h = TridiagonalHamiltonian::uniform_chain(4);
        assert!(eigenvalues(&h, 0.0).is_err());
        assert!(eigenvalues(&h, 1e-3).is_err());
        assert!(eigenvalues(&h, 1e-6).is_ok());
    }

    #[test]
    fn sturm_count_brackets() {
        let h = TridiagonalHamiltonian::uniform_chain(5);
        assert_eq!(sturm_count(h.diagonal(), h.off_diagonal(), -2.1), 0);
        assert_eq!(sturm_count(h.diagonal(), h.off_diagonal(), 0.5), 3);
        assert_eq!(sturm_count(h.diagonal(), h.off_diagonal(), 2.1), 5);
    }
}
