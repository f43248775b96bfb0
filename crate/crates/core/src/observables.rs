//! Physical observables computed from spectra: density-of-states histograms,
//! participation ratios, finite-size scaling of localization, the mobility
//! edge, the fraction of levels above it, band-edge checks and the `γN`
//! regime label.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{self, clusters, cluster_gap, eigenvalues, SolverOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_full, ChainSpec, TridiagonalOperator, Variant};
use crate::limits::{self, linear_fit};

/// Normalized eigenvalue histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct DosHistogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    /// Eigenvalues that fell outside an explicitly requested range.
    pub outside: usize,
}

impl DosHistogram {
    pub fn bins(&self) -> usize {
        self.density.len()
    }

    pub fn width(&self, b: usize) -> f64 {
        self.edges[b + 1] - self.edges[b]
    }

    /// `Σ density · width`; one when no eigenvalue was outside the range.
    pub fn integral(&self) -> f64 {
        (0..self.bins()).map(|b| self.density[b] * self.width(b)).sum()
    }
}

/// Histogram of `eigenvalues` with `bins` equal bins, normalized by
/// `N · width`. Without an explicit range the bins span `[min λ, max λ]`
/// widened by one representable step on each side. A value exactly on an
/// inner edge belongs to the bin on its right.
pub fn dos_histogram(eigenvalues: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<DosHistogram> {
    if eigenvalues.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("bins must be at least 1".into()));
    }
    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidArgument(format!("invalid range [{lo}, {hi}]")));
            }
            (lo, hi)
        }
        None => {
            let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            let max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if min == max {
                // a single distinct value gets a unit-width window
                (min - 0.5, max + 0.5)
            } else {
                (min.next_down(), max.next_up())
            }
        }
    };
    let mut edges: Vec<f64> = (0..=bins).map(|b| lo + (hi - lo) * (b as f64 / bins as f64)).collect();
    edges[bins] = hi;
    let mut counts = vec![0usize; bins];
    let mut outside = 0;
    for &x in eigenvalues {
        if !(x >= lo && x <= hi) {
            outside += 1;
            continue;
        }
        let b = edges[1..bins].partition_point(|&e| e <= x);
        counts[b] += 1;
    }
    let n = eigenvalues.len() as f64;
    let density = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| c as f64 / (n * (edges[b + 1] - edges[b])))
        .collect();
    Ok(DosHistogram { edges, density, outside })
}

/// Analytic large-`N` densities used as histogram references.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticDos {
    /// Uniform chain `H0`.
    Uniform,
    /// Mass-gradient part `H1` at `(γ, N)`.
    Gradient { gamma: f64, n: usize },
}

impl AnalyticDos {
    fn cdf(&self, e: f64) -> Result<f64> {
        match *self {
            AnalyticDos::Uniform => Ok(limits::rho0_cdf(e)),
            AnalyticDos::Gradient { gamma, n } => limits::rho1_cdf(e, gamma, n),
        }
    }

    /// Average density over each bin, from the exact cumulative integral.
    pub fn bin_averages(&self, edges: &[f64]) -> Result<Vec<f64>> {
        edges
            .windows(2)
            .map(|w| Ok((self.cdf(w[1])? - self.cdf(w[0])?) / (w[1] - w[0])))
            .collect()
    }
}

/// `Σ |h_b − r_b| · width_b`, optionally skipping the first and last bin.
pub fn l1_distance(hist: &DosHistogram, reference: &[f64], skip_edge_bins: bool) -> f64 {
    let bins = hist.bins();
    let range = if skip_edge_bins && bins > 2 { 1..bins - 1 } else { 0..bins };
    range
        .map(|b| (hist.density[b] - reference[b]).abs() * hist.width(b))
        .sum()
}

/// Per-eigenstate observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    /// 1-based position in the ascending spectrum.
    pub index: usize,
    pub energy: f64,
    pub pr: f64,
    pub pr_norm: f64,
}

/// `1 / Σ b_j⁴` for a unit-norm vector.
pub fn participation_ratio(coeffs: &[f64]) -> Result<f64> {
    let norm_sq: f64 = coeffs.iter().map(|b| b * b).sum();
    if coeffs.is_empty() || (norm_sq.sqrt() - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm_sq.sqrt()));
    }
    let s: f64 = coeffs.iter().map(|b| (b * b) * (b * b)).sum();
    Ok(1.0 / s)
}

const PR_BATCH: usize = 256;

/// Participation ratio of every eigenstate of the full operator, in energy
/// order. Eigenvectors are computed in batches of whole clusters and dropped
/// after use.
pub fn pr_profile(spec: &ChainSpec, opts: &SolverOptions) -> Result<Vec<StateRecord>> {
    let op = build_full(spec);
    let values = eigenvalues(&op, opts)?;
    pr_profile_for(&op, &values, opts)
}

pub(crate) fn pr_profile_for(op: &TridiagonalOperator, values: &[f64], opts: &SolverOptions) -> Result<Vec<StateRecord>> {
    let n = op.len() as f64;
    let groups = clusters(values, cluster_gap(op, opts));
    // batches are unions of whole clusters
    let mut batches: Vec<std::ops::Range<usize>> = Vec::new();
    for g in groups {
        match batches.last_mut() {
            Some(last) if last.len() < PR_BATCH => last.end = g.end,
            _ => batches.push(g),
        }
    }
    let mut records = Vec::with_capacity(values.len());
    for range in batches {
        let vectors = eigensolve::eigenvectors_for(op, &values[range.clone()], range.start, opts)?;
        let prs: Result<Vec<f64>> = vectors.par_iter().map(|v| participation_ratio(v)).collect();
        for (offset, pr) in prs?.into_iter().enumerate() {
            let i = range.start + offset;
            records.push(StateRecord {
                index: i + 1,
                energy: values[i],
                pr,
                pr_norm: pr / n,
            });
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Extended,
    Localized,
    Undetermined,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Extended => "Extended",
            Classification::Localized => "Localized",
            Classification::Undetermined => "Undetermined",
        }
    }
}

/// Slope limits for the log-log trend of `ζ/N` against `N`.
///
/// Above the mobility edge `ζ/N` falls only like `1/ln N` (the amplitude
/// piles up at a classical turning point inside the chain), giving slopes
/// near `−1/ln N ≈ −0.1` for `N` in the hundreds to thousands. Extended
/// states have slope `0` up to finite-size scatter of a few hundredths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingThresholds {
    /// Slopes at or below this are `Localized`.
    pub localized_max_slope: f64,
    /// Slopes at or above this are `Extended`.
    pub extended_min_slope: f64,
    /// Fewer sizes than this give `Undetermined`.
    pub min_sizes: usize,
}

impl Default for ScalingThresholds {
    fn default() -> Self {
        Self {
            localized_max_slope: -0.07,
            extended_min_slope: -0.05,
            min_sizes: 3,
        }
    }
}

impl ScalingThresholds {
    pub fn classify(&self, slope: Option<f64>, sizes: usize) -> Classification {
        match slope {
            Some(s) if sizes >= self.min_sizes => {
                if s <= self.localized_max_slope {
                    Classification::Localized
                } else if s >= self.extended_min_slope {
                    Classification::Extended
                } else {
                    Classification::Undetermined
                }
            }
            _ => Classification::Undetermined,
        }
    }
}

/// Extended/localized verdict for one target energy across chain sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingVerdict {
    pub energy_target: f64,
    /// `(N, ζ/N)` in increasing `N`.
    pub samples: Vec<(usize, f64)>,
    pub classification: Classification,
    /// Slope of `ln(ζ/N)` against `ln N`; absent with fewer than two sizes.
    pub trend: Option<f64>,
}

struct SizeSample {
    n: usize,
    op: TridiagonalOperator,
    values: Vec<f64>,
}

/// Spectra of the full operator at fixed `γN` over several sizes, reused for
/// many target energies.
pub struct ScalingStudy {
    gamma_n: f64,
    sizes: Vec<SizeSample>,
    opts: SolverOptions,
    thresholds: ScalingThresholds,
}

impl ScalingStudy {
    pub fn new(
        gamma_n: f64,
        n_list: &[usize],
        variant: Variant,
        opts: SolverOptions,
        thresholds: ScalingThresholds,
    ) -> Result<Self> {
        if n_list.is_empty() {
            return Err(Error::InvalidArgument("n_list must not be empty".into()));
        }
        if n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("n_list must be strictly increasing".into()));
        }
        if !(gamma_n.is_finite() && gamma_n >= 0.0) {
            return Err(Error::InvalidArgument(format!("gammaN must be >= 0, got {gamma_n}")));
        }
        let sizes: Result<Vec<SizeSample>> = n_list
            .par_iter()
            .map(|&n| {
                let spec = ChainSpec::with_gamma_n(n, gamma_n)?.with_variant(variant);
                let op = build_full(&spec);
                let values = eigenvalues(&op, &opts)?;
                Ok(SizeSample { n, op, values })
            })
            .collect();
        Ok(Self {
            gamma_n,
            sizes: sizes?,
            opts,
            thresholds,
        })
    }

    pub fn gamma_n(&self) -> f64 {
        self.gamma_n
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sizes.iter().map(|s| s.n).collect()
    }

    /// Common energy window `[max of minima, min of maxima]` over all sizes.
    pub fn common_window(&self) -> (f64, f64) {
        let lo = self.sizes.iter().map(|s| s.values[0]).fold(f64::NEG_INFINITY, f64::max);
        let hi = self
            .sizes
            .iter()
            .map(|s| *s.values.last().expect("non-empty spectrum"))
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    pub fn classify(&self, energy_target: f64) -> Result<ScalingVerdict> {
        let inside_any = self
            .sizes
            .iter()
            .any(|s| energy_target >= s.values[0] && energy_target <= *s.values.last().unwrap());
        if !inside_any {
            return Err(Error::Domain {
                what: "energy target (outside every spectrum)",
                value: energy_target,
            });
        }
        let samples: Result<Vec<(usize, f64)>> = self
            .sizes
            .par_iter()
            .map(|s| {
                let k = nearest_index(&s.values, energy_target);
                let v = eigensolve::eigenvector_at(&s.op, &s.values, k, &self.opts)?;
                Ok((s.n, participation_ratio(&v)? / s.n as f64))
            })
            .collect();
        let samples = samples?;
        let trend = if samples.len() >= 2 {
            let x: Vec<f64> = samples.iter().map(|(n, _)| (*n as f64).ln()).collect();
            let y: Vec<f64> = samples.iter().map(|(_, p)| p.ln()).collect();
            Some(linear_fit(&x, &y).0)
        } else {
            None
        };
        Ok(ScalingVerdict {
            energy_target,
            classification: self.thresholds.classify(trend, samples.len()),
            samples,
            trend,
        })
    }
}

/// Index of the eigenvalue closest to `x` (lower index on ties).
fn nearest_index(values: &[f64], x: f64) -> usize {
    let p = values.partition_point(|&v| v < x);
    if p == 0 {
        0
    } else if p == values.len() {
        values.len() - 1
    } else if (values[p] - x).abs() < (x - values[p - 1]).abs() {
        p
    } else {
        p - 1
    }
}

/// Finite-size verdict for one energy at fixed `γN`.
pub fn classify_state(
    energy_target: f64,
    gamma_n: f64,
    n_list: &[usize],
    opts: &SolverOptions,
    thresholds: &ScalingThresholds,
) -> Result<ScalingVerdict> {
    ScalingStudy::new(gamma_n, n_list, Variant::Canonical, *opts, *thresholds)?.classify(energy_target)
}

/// Grid `−2 + step·k`, `k ≥ 1`, strictly inside `(−2, 2 + 4γN)`.
pub fn default_energy_grid(gamma_n: f64, step: f64) -> Vec<f64> {
    let top = 2.0 + 4.0 * gamma_n;
    (1..)
        .map(|k| -2.0 + step * k as f64)
        .take_while(|e| *e < top - 1e-9)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityEdge {
    pub edge: f64,
    pub highest_extended: f64,
    pub lowest_localized: f64,
    pub profile: Vec<ScalingVerdict>,
    /// Extended energies above the lowest localized one plus localized
    /// energies below the highest extended one.
    pub violations: usize,
}

/// Mobility edge from a verdict profile: midpoint between the highest
/// `Extended` and the lowest `Localized` grid energy.
pub fn edge_from_profile(profile: Vec<ScalingVerdict>) -> Result<MobilityEdge> {
    let ext: Vec<f64> = profile
        .iter()
        .filter(|v| v.classification == Classification::Extended)
        .map(|v| v.energy_target)
        .collect();
    let loc: Vec<f64> = profile
        .iter()
        .filter(|v| v.classification == Classification::Localized)
        .map(|v| v.energy_target)
        .collect();
    let (Some(&hi_ext), Some(&lo_loc)) = (
        ext.iter().max_by(|a, b| a.total_cmp(b)),
        loc.iter().min_by(|a, b| a.total_cmp(b)),
    ) else {
        return Err(Error::NoEdge(format!(
            "{} extended and {} localized grid energies",
            ext.len(),
            loc.len()
        )));
    };
    let violations =
        ext.iter().filter(|&&e| e > lo_loc).count() + loc.iter().filter(|&&e| e < hi_ext).count();
    Ok(MobilityEdge {
        edge: 0.5 * (hi_ext + lo_loc),
        highest_extended: hi_ext,
        lowest_localized: lo_loc,
        profile,
        violations,
    })
}

/// Classifies every grid energy (within the spectra) and locates the edge.
pub fn mobility_edge(
    gamma_n: f64,
    n_list: &[usize],
    grid: &[f64],
    opts: &SolverOptions,
    thresholds: &ScalingThresholds,
) -> Result<MobilityEdge> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("energy grid must be ascending".into()));
    }
    let study = ScalingStudy::new(gamma_n, n_list, Variant::Canonical, *opts, *thresholds)?;
    mobility_edge_in(&study, grid)
}

pub fn mobility_edge_in(study: &ScalingStudy, grid: &[f64]) -> Result<MobilityEdge> {
    let profile: Result<Vec<ScalingVerdict>> = grid.iter().map(|&e| study.classify(e)).collect();
    edge_from_profile(profile?)
}

/// Fraction of eigenvalues strictly above `edge`.
pub fn fraction_above(values: &[f64], edge: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&e| e > edge).count() as f64 / values.len() as f64
}

/// Fraction of levels of the full operator above `edge` (normally 2).
pub fn localized_fraction(spec: &ChainSpec, edge: f64, opts: &SolverOptions) -> Result<f64> {
    let values = eigenvalues(&build_full(spec), opts)?;
    Ok(fraction_above(&values, edge))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionExtrapolation {
    pub gamma_n: f64,
    /// `(N, fraction)` per size.
    pub per_n: Vec<(usize, f64)>,
    /// Intercept of the fit `f = a + b/N`.
    pub limit: f64,
    pub inv_n_slope: f64,
    /// Root-mean-square residual of that fit.
    pub residual_rms: f64,
}

/// Localized fraction at fixed `γN` over `n_list` and its linear-in-`1/N`
/// extrapolation to infinite size.
pub fn fraction_extrapolate(gamma_n: f64, n_list: &[usize], edge: f64, opts: &SolverOptions) -> Result<FractionExtrapolation> {
    let per_n: Result<Vec<(usize, f64)>> = n_list
        .par_iter()
        .map(|&n| Ok((n, localized_fraction(&ChainSpec::with_gamma_n(n, gamma_n)?, edge, opts)?)))
        .collect();
    extrapolate_fractions(gamma_n, per_n?)
}

pub fn extrapolate_fractions(gamma_n: f64, per_n: Vec<(usize, f64)>) -> Result<FractionExtrapolation> {
    if per_n.len() < 3 {
        return Err(Error::TooFewPoints { got: per_n.len(), need: 3 });
    }
    let x: Vec<f64> = per_n.iter().map(|(n, _)| 1.0 / *n as f64).collect();
    let y: Vec<f64> = per_n.iter().map(|(_, f)| *f).collect();
    let (slope, _, intercept) = linear_fit(&x, &y);
    let rms = (x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / x.len() as f64)
        .sqrt();
    Ok(FractionExtrapolation {
        gamma_n,
        per_n,
        limit: intercept,
        inv_n_slope: slope,
        residual_rms: rms,
    })
}

/// Band-edge check against `[−2, 2 + 4γN]` with allowance `δ = 5γ + 1e−9`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub min: f64,
    pub max: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `min − lower_bound`; non-negative when the check passes.
    pub lower_margin: f64,
    /// `upper_bound − max`; non-negative when the check passes.
    pub upper_margin: f64,
    pub pass: bool,
}

pub fn band_bounds_check(values: &[f64], spec: &ChainSpec) -> BandReport {
    let g = spec.gamma();
    let delta = 5.0 * g + 1e-9;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lower_bound = -2.0 - delta;
    let upper_bound = 2.0 + 4.0 * spec.gamma_n() + delta;
    BandReport {
        min,
        max,
        lower_bound,
        upper_bound,
        lower_margin: min - lower_bound,
        upper_margin: upper_bound - max,
        pass: min >= lower_bound && max <= upper_bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Bloch,
    Intermediate,
    Localized,
}

/// `γN` cut points between the three regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub bloch_max: f64,
    pub intermediate_max: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            bloch_max: 0.01,
            intermediate_max: 100.0,
        }
    }
}

pub fn classify_regime(gamma: f64, n: usize, thresholds: &RegimeThresholds) -> Result<Regime> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {gamma}")));
    }
    let gn = gamma * n as f64;
    Ok(if gn <= thresholds.bloch_max {
        Regime::Bloch
    } else if gn <= thresholds.intermediate_max {
        Regime::Intermediate
    } else {
        Regime::Localized
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_two_bins() {
        let h = dos_histogram(&[-1.0, 1.0], 2, Some((-1.0, 1.0))).unwrap();
        assert_eq!(h.density, vec![0.5, 0.5]);
        assert_eq!(h.outside, 0);
    }

    #[test]
    fn histogram_inner_edge_goes_right() {
        let h = dos_histogram(&[0.0], 2, Some((-1.0, 1.0))).unwrap();
        assert_eq!(h.density, vec![0.0, 1.0]);
        let h = dos_histogram(&[-1.0, 1.0, 3.0], 2, Some((-1.0, 1.0))).unwrap();
        assert_eq!(h.outside, 1);
    }

    #[test]
    fn histogram_default_range_and_errors() {
        let h = dos_histogram(&[0.3, 0.1, 0.7], 1, None).unwrap();
        assert!((h.integral() - 1.0).abs() < 1e-12);
        assert!(h.edges[0] < 0.1 && h.edges[1] > 0.7);
        let single = dos_histogram(&[2.5], 4, None).unwrap();
        assert!((single.integral() - 1.0).abs() < 1e-12);
        assert!(matches!(dos_histogram(&[], 3, None), Err(Error::EmptySpectrum)));
        assert!(dos_histogram(&[1.0], 0, None).is_err());
        assert!(dos_histogram(&[1.0], 2, Some((1.0, 1.0))).is_err());
    }

    #[test]
    fn pr_simple_states() {
        let mut delta = vec![0.0; 10];
        delta[3] = 1.0;
        assert_eq!(participation_ratio(&delta).unwrap(), 1.0);
        let n = 64;
        let uniform = vec![1.0 / (n as f64).sqrt(); n];
        assert!((participation_ratio(&uniform).unwrap() - n as f64).abs() < 1e-10);
        assert!(participation_ratio(&[1.0, 1.0]).is_err());
        assert!(participation_ratio(&[]).is_err());
    }

    #[test]
    fn nearest_index_ties_and_ends() {
        let v = [0.0, 1.0, 2.0];
        assert_eq!(nearest_index(&v, -5.0), 0);
        assert_eq!(nearest_index(&v, 0.5), 0);
        assert_eq!(nearest_index(&v, 0.6), 1);
        assert_eq!(nearest_index(&v, 9.0), 2);
    }

    #[test]
    fn thresholds_rule() {
        let t = ScalingThresholds::default();
        assert_eq!(t.classify(Some(0.0), 3), Classification::Extended);
        assert_eq!(t.classify(Some(-0.1), 3), Classification::Localized);
        assert_eq!(t.classify(Some(-0.06), 3), Classification::Undetermined);
        assert_eq!(t.classify(Some(-1.0), 2), Classification::Undetermined);
        assert_eq!(t.classify(None, 1), Classification::Undetermined);
    }

    #[test]
    fn single_site_profile() {
        let recs = pr_profile(&ChainSpec::new(1, 0.4).unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].pr, 1.0);
        assert_eq!(recs[0].pr_norm, 1.0);
    }

    #[test]
    fn grid_is_inside_band() {
        let g = default_energy_grid(0.5, 0.2);
        assert!((g[0] + 1.8).abs() < 1e-12);
        assert!(*g.last().unwrap() < 4.0);
        assert!(g.iter().any(|e| (e - 2.0).abs() < 1e-12));
        assert_eq!(default_energy_grid(0.0, 0.2).len(), 19);
    }

    #[test]
    fn edge_needs_both_classes() {
        let v = |e: f64, c| ScalingVerdict {
            energy_target: e,
            samples: vec![],
            classification: c,
            trend: None,
        };
        let all_ext = vec![v(0.0, Classification::Extended), v(1.0, Classification::Extended)];
        assert!(matches!(edge_from_profile(all_ext), Err(Error::NoEdge(_))));
        let mixed = vec![
            v(1.0, Classification::Extended),
            v(1.5, Classification::Localized),
            v(2.0, Classification::Extended),
            v(2.5, Classification::Localized),
        ];
        let e = edge_from_profile(mixed).unwrap();
        assert_eq!(e.edge, 1.75);
        assert_eq!(e.violations, 2);
    }

    #[test]
    fn extrapolate_constant() {
        let r = extrapolate_fractions(1.0, vec![(200, 0.3), (400, 0.3), (800, 0.3)]).unwrap();
        assert!((r.limit - 0.3).abs() < 1e-15);
        assert!(r.residual_rms < 1e-15);
        assert!(extrapolate_fractions(1.0, vec![(200, 0.3)]).is_err());
    }

    #[test]
    fn regimes() {
        let t = RegimeThresholds::default();
        let n = 1000;
        assert_eq!(classify_regime(1.0 / (n * n) as f64, n, &t).unwrap(), Regime::Bloch);
        assert_eq!(classify_regime(1.0 / n as f64, n, &t).unwrap(), Regime::Intermediate);
        assert_eq!(classify_regime(1.0, n, &t).unwrap(), Regime::Localized);
        assert_eq!(classify_regime(0.0, n, &t).unwrap(), Regime::Bloch);
        assert!(classify_regime(-1.0, n, &t).is_err());
    }

    #[test]
    fn band_report_for_h0() {
        let n = 50;
        let values: Vec<f64> = (1..=n).map(|j| limits::bloch_energy(j, n).unwrap()).collect();
        let r = band_bounds_check(&values, &ChainSpec::new(n, 0.0).unwrap());
        assert!(r.pass);
        let edge = 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((r.max - edge).abs() < 1e-15 && r.max < 2.0);
    }
}
