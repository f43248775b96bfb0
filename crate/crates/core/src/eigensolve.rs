//! Eigenvalues and eigenvectors of symmetric tridiagonal operators.
//!
//! Eigenvalues come from Sturm-count bisection (the default) or implicit-shift
//! QL; eigenvectors come from inverse iteration on demand. A cyclic Jacobi
//! solver on the dense matrix is kept as an independent reference for small
//! sizes.
//!
//! All parallel work is split per eigenvalue index or per cluster, so results
//! do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::TridiagonalOperator;

/// Seed of the inverse-iteration start vectors. The start vector for
/// eigenvalue index `k` uses `INVERSE_ITERATION_SEED ^ k`.
pub const INVERSE_ITERATION_SEED: u64 = 0x5eed_7d1a_9c0f_fee5;

/// Largest size accepted by [`dense_oracle`].
pub const DENSE_ORACLE_MAX_N: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bisection,
    ImplicitShift,
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub method: Method,
    /// Tolerance relative to the Gershgorin spectral width.
    pub abs_tol: f64,
    pub max_iter: usize,
    pub compute_vectors: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            abs_tol: 1e-12,
            max_iter: 200,
            compute_vectors: false,
        }
    }
}

impl SolverOptions {
    pub fn with_vectors(mut self, on: bool) -> Self {
        self.compute_vectors = on;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Ascending eigenvalues, optionally with unit-norm eigenvectors
/// (`eigenvectors[i]` belongs to `eigenvalues[i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    pub fn eigenvector(&self, i: usize) -> Option<&[f64]> {
        self.eigenvectors.as_ref()?.get(i).map(Vec::as_slice)
    }

    /// `Σ λ_i`, accumulated with compensated summation.
    pub fn trace(&self) -> f64 {
        kahan_sum(self.eigenvalues.iter().copied())
    }

    /// `Σ λ_i²`.
    pub fn second_moment(&self) -> f64 {
        kahan_sum(self.eigenvalues.iter().map(|x| x * x))
    }
}

pub(crate) fn kahan_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in it {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Precomputed data for repeated Sturm counts on one operator.
struct Sturm<'a> {
    diag: &'a [f64],
    off_sq: Vec<f64>,
    pivmin: f64,
}

impl<'a> Sturm<'a> {
    fn new(op: &'a TridiagonalOperator) -> Self {
        let off_sq: Vec<f64> = op.off().iter().map(|e| e * e).collect();
        let max_sq = off_sq.iter().fold(1.0_f64, |m, &x| m.max(x));
        Self {
            diag: op.diag(),
            off_sq,
            pivmin: f64::MIN_POSITIVE * max_sq,
        }
    }

    fn count(&self, x: f64) -> usize {
        let guard = |q: f64| {
            if q.abs() < self.pivmin {
                if q < 0.0 {
                    -self.pivmin
                } else {
                    self.pivmin
                }
            } else {
                q
            }
        };
        let mut q = guard(self.diag[0] - x);
        let mut count = usize::from(q < 0.0);
        for (d, e2) in self.diag[1..].iter().zip(&self.off_sq) {
            q = guard((d - x) - e2 / q);
            count += usize::from(q < 0.0);
        }
        count
    }
}

/// Number of eigenvalues strictly below `x`, from the signs of the pivots of
/// the `LDLᵀ` factorization of `H - xI`. Zero pivots are replaced by a tiny
/// value of the same sign (positive for an exact zero).
pub fn sturm_count(op: &TridiagonalOperator, x: f64) -> usize {
    Sturm::new(op).count(x)
}

/// Gershgorin bounds widened by a few ulps so the Sturm counts at the ends
/// are exactly `0` and `n`.
fn padded_bounds(op: &TridiagonalOperator) -> (f64, f64) {
    let (lo, hi) = op.gershgorin_bounds();
    let pad = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
    (lo - pad, hi + pad)
}

fn bisect_index(
    sturm: &Sturm<'_>,
    k: usize,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    for _ in 0..max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if sturm.count(mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= tol {
        return Ok(lo + 0.5 * (hi - lo));
    }
    Err(Error::NotConverged {
        lo,
        hi,
        iterations: max_iter,
    })
}

/// Eigenvalues with zero-based indices in `range` (ascending), by bisection.
pub fn eigenvalues_by_index(
    op: &TridiagonalOperator,
    range: std::ops::Range<usize>,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    opts.validate()?;
    if range.end > op.len() || range.start > range.end {
        return Err(Error::InvalidArgument(format!(
            "index range {:?} outside 0..{}",
            range,
            op.len()
        )));
    }
    let (lo, hi) = padded_bounds(op);
    if op.spectral_width() == 0.0 {
        // zero-width enclosure: every eigenvalue is the common diagonal value
        return Ok(vec![op.diag()[0]; range.len()]);
    }
    let tol = opts.abs_tol * op.spectral_width();
    let sturm = Sturm::new(op);
    range
        .into_par_iter()
        .map(|k| bisect_index(&sturm, k, lo, hi, tol, opts.max_iter))
        .collect()
}

/// All eigenvalues in ascending order.
pub fn eigenvalues(op: &TridiagonalOperator, opts: &SolverOptions) -> Result<Vec<f64>> {
    opts.validate()?;
    if op.len() == 1 {
        return Ok(vec![op.diag()[0]]);
    }
    match opts.method {
        Method::Bisection | Method::Auto => eigenvalues_by_index(op, 0..op.len(), opts),
        Method::ImplicitShift => implicit_ql(op, opts.max_iter),
    }
}

/// Implicit-shift QL on the tridiagonal matrix, values only.
fn implicit_ql(op: &TridiagonalOperator, max_iter: usize) -> Result<Vec<f64>> {
    let n = op.len();
    let mut d = op.diag().to_vec();
    let mut e: Vec<f64> = op.off().iter().copied().chain(std::iter::once(0.0)).collect();
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
            if iter > max_iter {
                return Err(Error::NotConverged {
                    lo: d[l] - e[l].abs(),
                    hi: d[l] + e[l].abs(),
                    iterations: max_iter,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// `LU` factorization of `H - σI` with partial pivoting. Row swaps create a
/// second superdiagonal.
struct ShiftedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(op: &TridiagonalOperator, sigma: f64) -> Self {
        let n = op.len();
        let d = op.diag();
        let e = op.off();
        let scale = op.max_abs_entry().max(sigma.abs()).max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * scale;
        let guard = |x: f64| if x.abs() < tiny { tiny.copysign(if x == 0.0 { 1.0 } else { x }) } else { x };

        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n.saturating_sub(1)];
        let mut u2 = vec![0.0; n.saturating_sub(2)];
        let mut mult = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        let mut cur_d = d[0] - sigma;
        let mut cur_up = if n > 1 { e[0] } else { 0.0 };
        for i in 0..n.saturating_sub(1) {
            let sub = e[i];
            let next_d = d[i + 1] - sigma;
            let next_up = if i + 2 < n { e[i + 1] } else { 0.0 };
            if cur_d.abs() >= sub.abs() {
                let piv = guard(cur_d);
                let m = sub / piv;
                u0[i] = piv;
                u1[i] = cur_up;
                mult[i] = m;
                cur_d = next_d - m * cur_up;
                cur_up = next_up;
            } else {
                let m = cur_d / sub;
                u0[i] = sub;
                u1[i] = next_d;
                if i + 2 < n {
                    u2[i] = next_up;
                }
                mult[i] = m;
                swapped[i] = true;
                cur_d = cur_up - m * next_d;
                cur_up = -m * next_up;
            }
        }
        u0[n - 1] = guard(cur_d);
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve_in_place(&self, y: &mut [f64]) {
        let n = y.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.mult[i] * y[i];
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            if i + 1 < n {
                acc -= self.u1[i] * y[i + 1];
            }
            if i + 2 < n {
                acc -= self.u2[i] * y[i + 2];
            }
            y[i] = acc / self.u0[i];
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale) * (x / scale)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sign convention: the first entry of largest magnitude is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// A converged eigenvector with its Rayleigh quotient and residual.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `‖H v − value · v‖_∞`.
    pub residual: f64,
}

fn inverse_iteration(
    op: &TridiagonalOperator,
    lambda: f64,
    seed_index: u64,
    against: &[Vec<f64>],
    opts: &SolverOptions,
) -> Result<EigenPair> {
    let n = op.len();
    let target = (opts.abs_tol * op.spectral_width()).max(8.0 * f64::EPSILON * op.max_abs_entry().max(f64::MIN_POSITIVE));
    if n == 1 {
        return Ok(EigenPair {
            value: op.diag()[0],
            vector: vec![1.0],
            residual: 0.0,
        });
    }
    let lu = ShiftedLu::new(op, lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(INVERSE_ITERATION_SEED ^ seed_index);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut last_residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        lu.solve_in_place(&mut v);
        for _ in 0..2 {
            for u in against {
                let p = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
            }
        }
        let nrm = norm2(&v);
        if nrm == 0.0 || !nrm.is_finite() {
            // restart from a fresh direction
            v = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nrm);
        let hv = op.apply(&v);
        let rayleigh = dot(&v, &hv);
        last_residual = hv
            .iter()
            .zip(&v)
            .fold(0.0_f64, |m, (h, x)| m.max((h - rayleigh * x).abs()));
        if last_residual <= target {
            fix_sign(&mut v);
            return Ok(EigenPair {
                value: rayleigh,
                vector: v,
                residual: last_residual,
            });
        }
    }
    Err(Error::NotConverged {
        lo: lambda - last_residual,
        hi: lambda + last_residual,
        iterations: opts.max_iter,
    })
}

/// Unit-norm eigenvector for an eigenvalue estimate `lambda` by inverse
/// iteration, with the converged Rayleigh quotient.
pub fn eigenvector(op: &TridiagonalOperator, lambda: f64, opts: &SolverOptions) -> Result<EigenPair> {
    opts.validate()?;
    let (lo, hi) = padded_bounds(op);
    if !(lambda >= lo && lambda <= hi) {
        return Err(Error::Domain {
            what: "eigenvalue estimate (outside Gershgorin bounds)",
            value: lambda,
        });
    }
    inverse_iteration(op, lambda, 0, &[], opts)
}

/// Groups of consecutive eigenvalues closer than `10 · abs_tol · width`.
pub(crate) fn clusters(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] >= gap {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Eigenvectors for a sorted slice of eigenvalues. Members of a cluster are
/// computed in order and orthogonalized against each other; distinct
/// clusters run in parallel.
///
/// `first_index` is the global index of `values[0]`; it only selects the
/// start vectors.
pub fn eigenvectors_for(
    op: &TridiagonalOperator,
    values: &[f64],
    first_index: usize,
    opts: &SolverOptions,
) -> Result<Vec<Vec<f64>>> {
    opts.validate()?;
    let gap = cluster_gap(op, opts);
    let groups = clusters(values, gap);
    let per_group: Result<Vec<Vec<Vec<f64>>>> = groups
        .into_par_iter()
        .map(|range| {
            let mut found: Vec<Vec<f64>> = Vec::with_capacity(range.len());
            for i in range {
                let pair = inverse_iteration(op, values[i], (first_index + i) as u64, &found, opts)?;
                found.push(pair.vector);
            }
            Ok(found)
        })
        .collect();
    Ok(per_group?.into_iter().flatten().collect())
}

/// Cluster separation used by [`eigenvectors_for`].
pub(crate) fn cluster_gap(op: &TridiagonalOperator, opts: &SolverOptions) -> f64 {
    (10.0 * opts.abs_tol * op.spectral_width()).max(64.0 * f64::EPSILON * op.max_abs_entry())
}

/// Eigenvector for the zero-based index `k` of the full ascending spectrum
/// `values`. Any eigenvalues clustered with `k` are solved too so that the
/// returned vector is the same one [`full_diagonalize`] would produce.
pub fn eigenvector_at(
    op: &TridiagonalOperator,
    values: &[f64],
    k: usize,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    if k >= values.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            n: values.len(),
        });
    }
    let gap = cluster_gap(op, opts);
    let mut start = k;
    while start > 0 && values[start] - values[start - 1] < gap {
        start -= 1;
    }
    let mut end = k + 1;
    while end < values.len() && values[end] - values[end - 1] < gap {
        end += 1;
    }
    let mut vs = eigenvectors_for(op, &values[start..end], start, opts)?;
    Ok(vs.swap_remove(k - start))
}

/// All eigenvalues and, if requested, all eigenvectors.
pub fn full_diagonalize(op: &TridiagonalOperator, opts: &SolverOptions) -> Result<Spectrum> {
    let eigenvalues = eigenvalues(op, opts)?;
    let eigenvectors = if opts.compute_vectors {
        Some(eigenvectors_for(op, &eigenvalues, 0, opts)?)
    } else {
        None
    };
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Reference eigendecomposition of the dense matrix by cyclic Jacobi
/// rotations. Shares no code with the bisection and inverse-iteration path.
pub fn dense_oracle(op: &TridiagonalOperator) -> Result<Spectrum> {
    let n = op.len();
    if n > DENSE_ORACLE_MAX_N {
        return Err(Error::OracleTooLarge {
            n,
            max: DENSE_ORACLE_MAX_N,
        });
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = op.diag()[i];
        if i + 1 < n {
            a[i * n + i + 1] = op.off()[i];
            a[(i + 1) * n + i] = op.off()[i];
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    const MAX_SWEEPS: usize = 100;
    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let (lo, hi) = op.gershgorin_bounds();
        return Err(Error::NotConverged {
            lo,
            hi,
            iterations: MAX_SWEEPS,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<f64> = (0..n).map(|row| v[row * n + col]).collect();
            let nrm = norm2(&vec);
            vec.iter_mut().for_each(|x| *x /= nrm);
            fix_sign(&mut vec);
            vec
        })
        .collect();
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(eigenvectors),
    })
}
