//! Closed forms for the two limiting operators.
//!
//! `H0` is the uniform chain: Chebyshev eigenpairs and the arcsine density of
//! states. `H1` is the mass-gradient part alone: its spectrum follows a
//! Laguerre-type quantization and its density of states is supported on
//! `(0, 4γN)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

fn check_index(j: usize, n: usize) -> Result<()> {
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    Ok(())
}

/// `-2 cos(jπ/(N+1))`, the `j`-th eigenvalue of `H0` in ascending order.
pub fn bloch_energy(j: usize, n: usize) -> Result<f64> {
    check_index(j, n)?;
    Ok(-2.0 * (j as f64 * PI / (n as f64 + 1.0)).cos())
}

/// Unit-norm eigenvector of `H0` for [`bloch_energy`]`(j, n)`:
/// `b_i = √(2/(N+1)) sin(ijπ/(N+1))`.
///
/// The prefactor `1/√(N+1)` that is often quoted gives squared norm `1/2`;
/// the extra `√2` makes the vector unit-norm.
pub fn bloch_state(j: usize, n: usize) -> Result<Vec<f64>> {
    check_index(j, n)?;
    let k = j as f64 * PI / (n as f64 + 1.0);
    let pref = (2.0 / (n as f64 + 1.0)).sqrt();
    Ok((1..=n).map(|i| pref * (i as f64 * k).sin()).collect())
}

/// Density of states of the infinite uniform chain, `1/(π√(4 − E²))`.
pub fn rho0(energy: f64) -> Result<f64> {
    if !(energy > -2.0 && energy < 2.0) {
        return Err(Error::Domain {
            what: "energy for rho0 (needs |E| < 2)",
            value: energy,
        });
    }
    Ok(1.0 / (PI * (4.0 - energy * energy).sqrt()))
}

/// Cumulative integral of [`rho0`], clamped to `[0, 1]` outside the band.
pub fn rho0_cdf(energy: f64) -> f64 {
    if energy <= -2.0 {
        0.0
    } else if energy >= 2.0 {
        1.0
    } else {
        0.5 + (energy / 2.0).asin() / PI
    }
}

fn check_gamma_n(gamma: f64, n: usize) -> Result<f64> {
    let gn = gamma * n as f64;
    if !(gn.is_finite() && gn > 0.0) {
        return Err(Error::Domain {
            what: "product gamma*N (must be positive)",
            value: gn,
        });
    }
    Ok(gn)
}

/// Large-`N` density of states of `H1`:
/// `√(E(4γN − E)) / (2πγN E)` on `0 < E ≤ 4γN`.
pub fn rho1(energy: f64, gamma: f64, n: usize) -> Result<f64> {
    let gn = check_gamma_n(gamma, n)?;
    if !(energy > 0.0 && energy <= 4.0 * gn) {
        return Err(Error::Domain {
            what: "energy for rho1 (needs 0 < E <= 4*gamma*N)",
            value: energy,
        });
    }
    Ok((energy * (4.0 * gn - energy)).sqrt() / (2.0 * PI * gn * energy))
}

/// Cumulative integral of [`rho1`]. With `u = E/(4γN)` it is
/// `(2/π)(√(u(1−u)) + asin √u)`.
pub fn rho1_cdf(energy: f64, gamma: f64, n: usize) -> Result<f64> {
    let gn = check_gamma_n(gamma, n)?;
    let u = (energy / (4.0 * gn)).clamp(0.0, 1.0);
    Ok((2.0 / PI) * ((u * (1.0 - u)).sqrt() + u.sqrt().asin()))
}

/// Root of the `H1` quantization condition for level `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaRoot {
    pub level_index: usize,
    pub theta: f64,
    /// `|2θ − sin 2θ − (j − 3/4)π/(N+1)|` at the returned root.
    pub residual: f64,
}

/// `x − sin x`, accurate for small `x` where direct subtraction cancels.
fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // x^3/3! − x^5/5! + x^7/7! − x^9/9! + x^11/11!
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = term;
        for k in 0..4 {
            let a = (2 * k + 4) as f64;
            term *= -x2 / (a * (a + 1.0));
            sum += term;
        }
        sum
    } else {
        x - x.sin()
    }
}

/// Solves `(N+1)(2θ − sin 2θ) = (j − 3/4)π` for `θ ∈ (0, π/2)` by bisection.
///
/// `2θ − sin 2θ` increases strictly from 0 to π on that interval and the
/// target `(j − 3/4)π/(N+1)` lies in `(0, π)` for every `1 ≤ j ≤ N`, so a
/// root always exists; level `j = 1` has the smallest angle. `tol` bounds
/// the residual of the condition divided by `N + 1`.
pub fn solve_theta(j: usize, n: usize, tol: f64) -> Result<ThetaRoot> {
    check_index(j, n)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let target = (j as f64 - 0.75) * PI / (n as f64 + 1.0);
    let f = |theta: f64| x_minus_sin(2.0 * theta) - target;
    let (mut lo, mut hi) = (0.0_f64, PI / 2.0);
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..200 {
        theta = 0.5 * (lo + hi);
        let v = f(theta);
        if v.abs() <= tol || theta <= lo || theta >= hi {
            break;
        }
        if v < 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
    }
    let residual = f(theta).abs();
    if residual > tol || !(theta > 0.0 && theta < PI / 2.0) {
        return Err(Error::NotConverged {
            lo,
            hi,
            iterations: 200,
        });
    }
    Ok(ThetaRoot {
        level_index: j,
        theta,
        residual,
    })
}

/// `4γ(N+1) cos² θ_j`. Level `j = 1` is the largest energy, so level `j`
/// pairs with the `j`-th eigenvalue of `H1` counted from the top.
pub fn laguerre_energy(j: usize, n: usize, gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {gamma}")));
    }
    let root = solve_theta(j, n, 1e-14)?;
    Ok(4.0 * gamma * (n as f64 + 1.0) * root.theta.cos().powi(2))
}

/// All `N` Laguerre energies, ascending (i.e. `j = N` first).
pub fn laguerre_spectrum(n: usize, gamma: f64) -> Result<Vec<f64>> {
    (1..=n).rev().map(|j| laguerre_energy(j, n, gamma)).collect()
}

/// Converts unit-norm eigenvector amplitudes of `H1` to the normalization of
/// the non-symmetric recurrence `(j+1) b_{j+1} + (j−1) b_{j−1} = 2(j − ε) b_j`
/// satisfied by Laguerre polynomials `L_j^(-1)`.
///
/// Symmetrizing that recurrence takes `b_j → b_j √j`, so the inverse map is
/// `b_j / √j` (site index from 1). Unit-norm amplitudes decay as `j^(-1/4)`;
/// in this normalization the decay is `j^(-3/4)`.
pub fn laguerre_normalized(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, b)| b / ((i + 1) as f64).sqrt())
        .collect()
}

/// Result of a log-log fit of an amplitude envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub slope: f64,
    pub stderr: f64,
    /// Number of envelope points used.
    pub points: usize,
    /// Slopes fitted separately on the first and second half of the points.
    pub half_slopes: (f64, f64),
    /// True when the two half-window slopes disagree by more than
    /// [`TailFit::CURVATURE_LIMIT`], i.e. the envelope is not a power law.
    pub non_polynomial: bool,
}

impl TailFit {
    pub const CURVATURE_LIMIT: f64 = 0.1;
    pub const MIN_POINTS: usize = 10;
}

/// Default fit window `[N/10, N/2]` (1-based, inclusive).
pub fn default_tail_window(n: usize) -> (usize, usize) {
    ((n / 10).max(1), (n / 2).max(1))
}

/// Least-squares line through `(x, y)`: `(slope, stderr of slope, intercept)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if x.len() > 2 {
        let ssr: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let r = b - (intercept + slope * a);
                r * r
            })
            .sum();
        (ssr / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr, intercept)
}

/// Power-law exponent of `|b_j|` over the 1-based inclusive `window`.
///
/// The fit runs on the upper envelope of `|b_j|`: sites that are local
/// maxima of `|b|` (compared with both neighbours in the full sequence).
/// A window with no interior maxima where `|b|` is strictly monotone is used
/// point by point.
pub fn tail_exponent(coeffs: &[f64], window: (usize, usize)) -> Result<TailFit> {
    let n = coeffs.len();
    let (start, end) = window;
    if start == 0 || start > end || end > n {
        return Err(Error::InvalidArgument(format!(
            "window [{start}, {end}] outside 1..={n}"
        )));
    }
    let abs: Vec<f64> = coeffs.iter().map(|b| b.abs()).collect();
    let idx: Vec<usize> = (start - 1..end).collect();
    if idx.iter().any(|&i| abs[i] == 0.0 || !abs[i].is_finite()) {
        return Err(Error::Domain {
            what: "amplitude in fit window (must be non-zero)",
            value: 0.0,
        });
    }
    let is_peak = |i: usize| {
        let left = if i > 0 { abs[i - 1] } else { 0.0 };
        let right = if i + 1 < n { abs[i + 1] } else { 0.0 };
        abs[i] >= left && abs[i] >= right && i > 0 && i + 1 < n
    };
    let peaks: Vec<usize> = idx.iter().copied().filter(|&i| is_peak(i)).collect();
    let monotone = idx.windows(2).all(|w| abs[w[1]] < abs[w[0]])
        || idx.windows(2).all(|w| abs[w[1]] > abs[w[0]]);
    let envelope = if peaks.is_empty() && monotone { idx } else { peaks };
    if envelope.len() < TailFit::MIN_POINTS {
        return Err(Error::TooFewPoints {
            got: envelope.len(),
            need: TailFit::MIN_POINTS,
        });
    }
    let x: Vec<f64> = envelope.iter().map(|&i| ((i + 1) as f64).ln()).collect();
    let y: Vec<f64> = envelope.iter().map(|&i| abs[i].ln()).collect();
    let (slope, stderr, _) = linear_fit(&x, &y);
    let half = x.len() / 2;
    let (s1, _, _) = linear_fit(&x[..half], &y[..half]);
    let (s2, _, _) = linear_fit(&x[half..], &y[half..]);
    Ok(TailFit {
        slope,
        stderr,
        points: envelope.len(),
        half_slopes: (s1, s2),
        non_polynomial: (s1 - s2).abs() > TailFit::CURVATURE_LIMIT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bloch_energies() {
        assert!(bloch_energy(2, 3).unwrap().abs() < 1e-15);
        assert!((bloch_energy(1, 2).unwrap() + 1.0).abs() < 1e-15);
        assert!((bloch_energy(2, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(bloch_energy(0, 3).is_err());
        assert!(bloch_energy(4, 3).is_err());
    }

    #[test]
    fn bloch_states() {
        let v = bloch_state(1, 1).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15);
        let v = bloch_state(2, 3).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - r).abs() < 1e-15);
        assert!(v[1].abs() < 1e-15);
        assert!((v[2] + r).abs() < 1e-15);
        for j in 1..=20 {
            let v = bloch_state(j, 20).unwrap();
            let norm: f64 = v.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn densities() {
        assert!((rho0(0.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((rho0(1.0).unwrap() - 1.0 / (PI * 3f64.sqrt())).abs() < 1e-15);
        assert!((rho0(-1.0).unwrap() - 1.0 / (PI * 3f64.sqrt())).abs() < 1e-15);
        assert!(rho0(2.0).is_err());
        assert!(rho0(-2.5).is_err());

        let n = 1000;
        let g = 1.0 / n as f64;
        assert!((rho1(2.0, g, n).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-12);
        assert_eq!(rho1(4.0, g, n).unwrap(), 0.0);
        assert!(rho1(0.0, g, n).is_err());
        assert!(rho1(4.1, g, n).is_err());
        assert!(rho1(1.0, 0.0, n).is_err());
    }

    #[test]
    fn cdfs_are_consistent() {
        assert_eq!(rho0_cdf(-3.0), 0.0);
        assert!((rho0_cdf(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(rho0_cdf(2.0), 1.0);
        assert_eq!(rho1_cdf(0.0, 0.001, 1000).unwrap(), 0.0);
        assert!((rho1_cdf(4.0, 0.001, 1000).unwrap() - 1.0).abs() < 1e-15);
        // derivative of the cdf is the density
        let h = 1e-6;
        for &e in &[-1.5, -0.3, 0.9, 1.7] {
            let d = (rho0_cdf(e + h) - rho0_cdf(e - h)) / (2.0 * h);
            assert!((d - rho0(e).unwrap()).abs() < 1e-7);
        }
        for &e in &[0.3, 1.0, 2.5, 3.8] {
            let d = (rho1_cdf(e + h, 0.002, 500).unwrap() - rho1_cdf(e - h, 0.002, 500).unwrap()) / (2.0 * h);
            assert!((d - rho1(e, 0.002, 500).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn theta_roots() {
        let n = 200;
        let mut prev = 0.0;
        for j in 1..=n {
            let r = solve_theta(j, n, 1e-12).unwrap();
            assert!(r.residual <= 1e-12);
            assert!(r.theta > prev && r.theta < PI / 2.0);
            prev = r.theta;
        }
        assert!(solve_theta(0, n, 1e-12).is_err());
        assert!(solve_theta(n + 1, n, 1e-12).is_err());
        // one-site chain still has a root
        assert!(solve_theta(1, 1, 1e-12).is_ok());
    }

    #[test]
    fn x_minus_sin_series_matches() {
        for &x in &[0.099, 0.05, 1e-3] {
            // compare the series branch against high-order direct evaluation
            let direct: f64 = {
                let mut term = x;
                let mut s = 0.0;
                for k in 1..12 {
                    term *= -x * x / ((2 * k) as f64 * (2 * k + 1) as f64);
                    s -= term;
                }
                s
            };
            assert!((x_minus_sin(x) - direct).abs() <= 1e-18 + 1e-14 * direct.abs());
        }
    }

    #[test]
    fn laguerre_energies_range() {
        let n = 100;
        for j in 1..=n {
            assert_eq!(laguerre_energy(j, n, 0.0).unwrap(), 0.0);
            let e = laguerre_energy(j, n, 0.01).unwrap();
            assert!((0.0..=4.0 * 0.01 * 101.0).contains(&e));
        }
        let spec = laguerre_spectrum(n, 0.01).unwrap();
        assert!(spec.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn tail_power_law() {
        let b: Vec<f64> = (1..=1000).map(|j| (j as f64).powf(-0.75)).collect();
        let fit = tail_exponent(&b, default_tail_window(1000)).unwrap();
        assert!((fit.slope + 0.75).abs() < 1e-10);
        assert!(!fit.non_polynomial);
    }

    #[test]
    fn tail_exponential_is_flagged() {
        let b: Vec<f64> = (1..=100).map(|j| (-(j as f64)).exp()).collect();
        let fit = tail_exponent(&b, (10, 50)).unwrap();
        assert!(fit.slope < -5.0);
        assert!(fit.non_polynomial);
        let other = tail_exponent(&b, (20, 60)).unwrap();
        assert!((other.slope - fit.slope).abs() > 1.0);
    }

    #[test]
    fn tail_oscillating_envelope() {
        // j^(-1/2) |cos(√j)|-like oscillation: envelope recovers the power
        let b: Vec<f64> = (1..=20000)
            .map(|j| {
                let x = j as f64;
                x.powf(-0.5) * (3.0 * x.sqrt()).cos()
            })
            .collect();
        let fit = tail_exponent(&b, (2000, 10000)).unwrap();
        assert!((fit.slope + 0.5).abs() < 0.02, "{fit:?}");
    }

    #[test]
    fn tail_errors() {
        let b = vec![1.0; 5];
        assert!(matches!(tail_exponent(&b, (1, 5)), Err(Error::TooFewPoints { .. })));
        assert!(tail_exponent(&b, (0, 5)).is_err());
        assert!(tail_exponent(&b, (3, 9)).is_err());
        let z = vec![0.0; 50];
        assert!(tail_exponent(&z, (1, 50)).is_err());
    }

    #[test]
    fn laguerre_normalization() {
        let v = laguerre_normalized(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(v[0], 1.0);
        assert!((v[3] - 2.0).abs() < 1e-15);
    }
}
