//! Self-check suite run by `pdmchain validate`.
//!
//! Every check takes the full-operator builder as a parameter so a faulty
//! builder can be substituted in tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigensolve::{self, dense_oracle, eigenvalues, full_diagonalize, sturm_count, Method, SolverOptions};
use crate::error::Result;
use crate::hamiltonian::{build_h1, recurrence_residual, ChainSpec, TridiagonalOperator, Variant};
use crate::limits;
use crate::observables::band_bounds_check;

pub type Builder<'a> = &'a (dyn Fn(&ChainSpec) -> TridiagonalOperator + Sync);

pub const DEFAULT_SEED: u64 = 20_180_101;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

/// A random small instance: `1 ≤ N ≤ 12`, `γ ∈ [0, 2]`, either variant.
pub fn random_instance(rng: &mut ChaCha8Rng) -> ChainSpec {
    let n = rng.gen_range(1..=12);
    let gamma = rng.gen_range(0.0..=2.0);
    let variant = if rng.gen_bool(0.5) {
        Variant::Canonical
    } else {
        Variant::LiteralSum
    };
    ChainSpec::new(n, gamma)
        .expect("random instance is valid")
        .with_variant(variant)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Bisection eigenvalues against the dense Jacobi reference, and inverse
/// iteration residuals, on `count` random instances.
pub fn check_oracle(build: Builder<'_>, seed: u64, count: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = SolverOptions::default()
        .with_method(Method::Bisection)
        .with_vectors(true);
    let mut worst_value = 0.0_f64;
    let mut worst_residual = 0.0_f64;
    for _ in 0..count {
        let spec = random_instance(&mut rng);
        let op = build(&spec);
        let reference = dense_oracle(&op)?;
        let got = full_diagonalize(&op, &opts)?;
        worst_value = worst_value.max(max_abs_diff(&got.eigenvalues, &reference.eigenvalues));
        for (i, v) in got.eigenvectors.as_ref().expect("vectors requested").iter().enumerate() {
            worst_residual = worst_residual.max(recurrence_residual(&op, got.eigenvalues[i], v)?);
        }
    }
    Ok(CheckResult::new(
        "dense_oracle",
        worst_value <= 1e-10 && worst_residual <= 1e-10,
        format!("max |dλ| = {worst_value:.3e}, max residual = {worst_residual:.3e} over {count} instances"),
    ))
}

/// `Σλ = γN(N+1)` and `Σλ² = Σ diag² + 2 Σ off²` at `N = 500`, `γ = 1/N`.
pub fn check_trace(build: Builder<'_>) -> Result<CheckResult> {
    let n = 500;
    let spec = ChainSpec::new(n, 1.0 / n as f64)?;
    let op = build(&spec);
    let sp = full_diagonalize(&op, &SolverOptions::default())?;
    let expected = spec.gamma() * n as f64 * (n as f64 + 1.0);
    let trace_err = (sp.trace() - expected).abs() / expected;
    let m2: f64 = eigensolve::kahan_sum(op.diag().iter().map(|d| d * d))
        + 2.0 * eigensolve::kahan_sum(op.off().iter().map(|e| e * e));
    let m2_err = (sp.second_moment() - m2).abs() / m2;
    Ok(CheckResult::new(
        "trace_identities",
        trace_err <= 1e-8 && m2_err <= 1e-8,
        format!("trace rel err = {trace_err:.3e}, second moment rel err = {m2_err:.3e}"),
    ))
}

/// Sorted spectra of `op` and its gauge flip agree.
pub fn check_gauge(build: Builder<'_>, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let n = rng.gen_range(2..=300);
        let spec = ChainSpec::new(n, rng.gen_range(0.0..=4.0 / n as f64))?;
        let op = build(&spec);
        let opts = SolverOptions::default();
        let a = eigenvalues(&op, &opts)?;
        let b = eigenvalues(&op.gauge_flip(), &opts)?;
        worst = worst.max(max_abs_diff(&a, &b));
    }
    Ok(CheckResult::new("gauge_invariance", worst <= 1e-12, format!("max |dλ| = {worst:.3e}")))
}

/// At `γ = 0` the built operator has the Chebyshev eigenpairs.
pub fn check_chebyshev(build: Builder<'_>) -> Result<CheckResult> {
    let n = 200;
    let op = build(&ChainSpec::new(n, 0.0)?);
    let values = eigenvalues(&op, &SolverOptions::default())?;
    let mut worst_value = 0.0_f64;
    let mut worst_residual = 0.0_f64;
    for j in 1..=n {
        let e = limits::bloch_energy(j, n)?;
        worst_value = worst_value.max((values[j - 1] - e).abs());
        worst_residual = worst_residual.max(recurrence_residual(&op, e, &limits::bloch_state(j, n)?)?);
    }
    Ok(CheckResult::new(
        "chebyshev_closed_form",
        worst_value <= 1e-9 && worst_residual <= 1e-12,
        format!("max |λ − E0| = {worst_value:.3e}, max Bloch residual = {worst_residual:.3e}"),
    ))
}

/// Residual of the amplitude recurrence
/// `(γ(j+½)+1) b_{j+1} + (γ(j−½)+1) b_{j−1} − (2γj − E) b_j`, evaluated from
/// its own coefficients rather than from an operator.
pub fn direct_recurrence_residual(gamma: f64, energy: f64, b: &[f64]) -> f64 {
    let n = b.len();
    let at = |i: isize| -> f64 {
        if i < 1 || i as usize > n {
            0.0
        } else {
            b[i as usize - 1]
        }
    };
    let scale = b.iter().fold(0.0_f64, |m, x| m.max(x.abs())) * (energy.abs() + 2.0 * gamma * n as f64 + 2.0);
    (1..=n as isize)
        .map(|j| {
            let jf = j as f64;
            let lhs = (gamma * (jf + 0.5) + 1.0) * at(j + 1) + (gamma * (jf - 0.5) + 1.0) * at(j - 1);
            let rhs = (2.0 * gamma * jf - energy) * at(j);
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
        / scale
}

/// Eigenpairs of the built operator satisfy the recurrence written out from
/// its coefficients.
pub fn check_recurrence(build: Builder<'_>) -> Result<CheckResult> {
    let n = 120;
    let gamma = 1.0 / n as f64;
    let op = build(&ChainSpec::new(n, gamma)?);
    let sp = full_diagonalize(&op, &SolverOptions::default().with_vectors(true))?;
    let worst = sp
        .eigenvectors
        .as_ref()
        .expect("vectors requested")
        .iter()
        .zip(&sp.eigenvalues)
        .map(|(v, &e)| direct_recurrence_residual(gamma, e, v))
        .fold(0.0, f64::max);
    Ok(CheckResult::new("recurrence", worst <= 1e-10, format!("max residual = {worst:.3e}")))
}

/// Sturm counts against the computed spectrum and Cauchy interlacing with
/// the leading block.
pub fn check_sturm_interlacing(build: Builder<'_>, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x57);
    let mut bad = 0usize;
    for _ in 0..10 {
        let n = rng.gen_range(2..=80);
        let op = build(&ChainSpec::new(n, rng.gen_range(0.0..=0.2))?);
        let opts = SolverOptions::default();
        let values = eigenvalues(&op, &opts)?;
        let (lo, hi) = op.gershgorin_bounds();
        let tol = 1e-9 * (hi - lo);
        for _ in 0..100 {
            let x = rng.gen_range(lo - 1.0..hi + 1.0);
            // skip points within the bisection tolerance of an eigenvalue
            if values.iter().any(|v| (v - x).abs() < tol) {
                continue;
            }
            let below = values.iter().filter(|&&v| v < x).count();
            bad += usize::from(below != sturm_count(&op, x));
        }
        let inner = eigenvalues(&op.leading_block(n - 1)?, &opts)?;
        for (i, mu) in inner.iter().enumerate() {
            if !(values[i] - tol <= *mu && *mu <= values[i + 1] + tol) {
                bad += 1;
            }
        }
    }
    Ok(CheckResult::new("sturm_and_interlacing", bad == 0, format!("{bad} violations")))
}

/// Top levels of `H1` against `4γ(N+1) cos² θ_j` at `N = 2000`, `γ = 1/N`.
pub fn check_laguerre() -> Result<CheckResult> {
    let n = 2000;
    let gamma = 1.0 / n as f64;
    let values = eigenvalues(&build_h1(&ChainSpec::new(n, gamma)?), &SolverOptions::default())?;
    let worst = laguerre_interior_error(&values, n, gamma, 0.1)?;
    Ok(CheckResult::new("laguerre_orientation", worst <= 0.01, format!("max rel err = {worst:.3e}")))
}

/// Largest relative deviation between the ascending `H1` spectrum `values`
/// and the Laguerre energies, over ranks from the top in
/// `[skip·N, (1 − skip)·N]`.
pub fn laguerre_interior_error(values: &[f64], n: usize, gamma: f64, skip: f64) -> Result<f64> {
    let first = ((skip * n as f64).ceil() as usize).max(1);
    let last = ((1.0 - skip) * n as f64).floor() as usize;
    let mut worst = 0.0_f64;
    for j in first..=last {
        let predicted = limits::laguerre_energy(j, n, gamma)?;
        let numeric = values[n - j];
        worst = worst.max((predicted - numeric).abs() / numeric.abs());
    }
    Ok(worst)
}

/// Band edges of the built operator inside `[−2 − 5γ, 2 + 4γN + 5γ]`.
pub fn check_band(build: Builder<'_>) -> Result<CheckResult> {
    let mut all = true;
    let mut detail = Vec::new();
    for gn in [0.25, 1.0, 4.0] {
        let spec = ChainSpec::with_gamma_n(400, gn)?;
        let values = eigenvalues(&build(&spec), &SolverOptions::default())?;
        let report = band_bounds_check(&values, &spec);
        all &= report.pass;
        detail.push(format!("γN={gn}: margins {:.2e}/{:.2e}", report.lower_margin, report.upper_margin));
    }
    Ok(CheckResult::new("band_edges", all, detail.join(", ")))
}

/// Runs every check with the given builder.
pub fn run_suite(build: Builder<'_>, seed: u64) -> Result<Vec<CheckResult>> {
    Ok(vec![
        check_oracle(build, seed, 100)?,
        check_trace(build)?,
        check_gauge(build, seed)?,
        check_chebyshev(build)?,
        check_recurrence(build)?,
        check_sturm_interlacing(build, seed)?,
        check_laguerre()?,
        check_band(build)?,
    ])
}

pub fn render_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in results {
        out.push_str(&format!(
            "{:<width$}  {}  {}\n",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        ));
    }
    out
}
