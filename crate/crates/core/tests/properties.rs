use pdmchain::eigensolve::{dense_oracle, eigenvalues, full_diagonalize, sturm_count, Method};
use pdmchain::limits::{self, rho1, rho1_cdf};
use pdmchain::observables::{dos_histogram, participation_ratio};
use pdmchain::{build_full, build_h0, build_h1, ChainSpec, SolverOptions, TridiagonalOperator, Variant};
use proptest::prelude::*;

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Canonical), Just(Variant::LiteralSum)]
}

fn chain() -> impl Strategy<Value = ChainSpec> {
    (1usize..40, 0.0f64..2.0, variant()).prop_map(|(n, g, v)| ChainSpec::new(n, g).unwrap().with_variant(v))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauge_flip_preserves_spectrum(spec in chain()) {
        let op = build_full(&spec);
        let a = eigenvalues(&op, &SolverOptions::default()).unwrap();
        let b = eigenvalues(&op.gauge_flip(), &SolverOptions::default()).unwrap();
        prop_assert!(max_diff(&a, &b) <= 1e-12 * op.spectral_width().max(1.0));
    }

    #[test]
    fn trace_equals_diagonal_sum(spec in chain()) {
        let op = build_full(&spec);
        let values = eigenvalues(&op, &SolverOptions::default()).unwrap();
        let trace: f64 = values.iter().sum();
        let diag: f64 = op.diag().iter().sum();
        prop_assert!((trace - diag).abs() <= 1e-10 * diag.abs().max(1.0));
        if spec.variant() == Variant::Canonical {
            let n = spec.n_sites() as f64;
            prop_assert!((diag - spec.gamma() * n * (n + 1.0)).abs() <= 1e-10 * diag.abs().max(1.0));
        }
    }

    #[test]
    fn matches_dense_oracle(spec in (1usize..=12, 0.0f64..2.0, variant())
        .prop_map(|(n, g, v)| ChainSpec::new(n, g).unwrap().with_variant(v)))
    {
        let op = build_full(&spec);
        let reference = dense_oracle(&op).unwrap();
        for method in [Method::Bisection, Method::ImplicitShift] {
            let got = eigenvalues(&op, &SolverOptions::default().with_method(method)).unwrap();
            prop_assert!(max_diff(&got, &reference.eigenvalues) <= 1e-10);
        }
    }

    #[test]
    fn leading_blocks_interlace(spec in (2usize..40, 0.0f64..2.0).prop_map(|(n, g)| ChainSpec::new(n, g).unwrap())) {
        let op = build_full(&spec);
        let n = op.len();
        let big = eigenvalues(&op, &SolverOptions::default()).unwrap();
        let small = eigenvalues(&op.leading_block(n - 1).unwrap(), &SolverOptions::default()).unwrap();
        let slack = 1e-10 * op.spectral_width();
        for k in 0..n - 1 {
            prop_assert!(big[k] <= small[k] + slack && small[k] <= big[k + 1] + slack);
        }
    }

    #[test]
    fn sturm_count_is_monotone_and_counts(spec in chain(), probes in prop::collection::vec(-4.0f64..12.0, 1..20)) {
        let op = build_full(&spec);
        let values = eigenvalues(&op, &SolverOptions::default()).unwrap();
        let mut sorted = probes.clone();
        sorted.sort_by(f64::total_cmp);
        let counts: Vec<usize> = sorted.iter().map(|&x| sturm_count(&op, x)).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        let tol = 1e-9 * op.spectral_width().max(1.0);
        for (&x, &c) in sorted.iter().zip(&counts) {
            let below = values.iter().filter(|&&v| v < x - tol).count();
            let at_most = values.iter().filter(|&&v| v < x + tol).count();
            prop_assert!(below <= c && c <= at_most);
        }
    }

    #[test]
    fn participation_ratio_bounds(spec in (1usize..60, 0.0f64..1.0).prop_map(|(n, g)| ChainSpec::new(n, g).unwrap())) {
        let op = build_full(&spec);
        let sp = full_diagonalize(&op, &SolverOptions::default().with_vectors(true)).unwrap();
        for v in sp.eigenvectors.unwrap() {
            let pr = participation_ratio(&v).unwrap();
            prop_assert!(pr >= 1.0 - 1e-12 && pr <= op.len() as f64 + 1e-9);
        }
    }

    #[test]
    fn histogram_is_normalized(values in prop::collection::vec(-5.0f64..5.0, 1..200), bins in 1usize..64) {
        let h = dos_histogram(&values, bins, None).unwrap();
        prop_assert_eq!(h.outside, 0);
        prop_assert!((h.integral() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rho1_scale_identity(u in 0.01f64..0.99, g in 0.1f64..8.0, s in 0.1f64..10.0) {
        // the density depends on γ and N only through γN, and scales as 1/s
        // when both E and γN are multiplied by s
        let e = 4.0 * g * u;
        let a = rho1(e, g / 100.0, 100).unwrap();
        let b = rho1(e, g / 250.0, 250).unwrap();
        let c = rho1(s * e, s * g / 100.0, 100).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
        prop_assert!((a - s * c).abs() <= 1e-12 * a);
        let cdf_a = rho1_cdf(e, g / 100.0, 100).unwrap();
        let cdf_c = rho1_cdf(s * e, s * g / 100.0, 100).unwrap();
        prop_assert!((cdf_a - cdf_c).abs() <= 1e-12);
    }
}

/// Tanh-sinh quadrature on `[a, b]`; copes with integrable endpoint
/// singularities because the nodes never touch the ends.
fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let h = 1.0 / 64.0;
    let mut sum = 0.0;
    for k in -400i32..=400 {
        let t = k as f64 * h;
        let s = std::f64::consts::FRAC_PI_2 * t.sinh();
        let x = s.tanh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / s.cosh().powi(2);
        let offset = half * (1.0 - x.abs());
        if offset <= 0.0 || w == 0.0 {
            continue;
        }
        let point = if x < 0.0 { a + offset } else { b - offset };
        sum += w * f(point);
    }
    sum * h * half
}

#[test]
fn rho1_integrates_to_one() {
    for (gamma, n) in [(0.001, 1000), (0.01, 100), (1.0, 3)] {
        let top = 4.0 * gamma * n as f64;
        let total = tanh_sinh(|e| rho1(e, gamma, n).unwrap(), 0.0, top);
        assert!((total - 1.0).abs() < 1e-8, "∫ρ = {total}");
        let half = tanh_sinh(|e| rho1(e, gamma, n).unwrap(), 0.0, 0.3 * top);
        assert!((half - rho1_cdf(0.3 * top, gamma, n).unwrap()).abs() < 1e-8);
    }
}

#[test]
fn rho0_integrates_to_one() {
    let total = tanh_sinh(|e| limits::rho0(e).unwrap(), -2.0, 2.0);
    assert!((total - 1.0).abs() < 1e-8, "∫ρ0 = {total}");
    let part = tanh_sinh(|e| limits::rho0(e).unwrap(), -2.0, 0.7);
    assert!((part - limits::rho0_cdf(0.7)).abs() < 1e-8);
}

#[test]
fn bloch_participation_ratio_by_direct_sum() {
    // Σ sin⁴ over the lattice gives PR = 2(N+1)/3 for every interior Bloch state
    let n = 301;
    let h0 = build_h0(&ChainSpec::new(n, 0.0).unwrap());
    let sp = full_diagonalize(&h0, &SolverOptions::default().with_vectors(true)).unwrap();
    let expected = 2.0 * (n as f64 + 1.0) / 3.0;
    for j in [1, 2, 50, 100, 200, 300] {
        let pr = participation_ratio(sp.eigenvector(j - 1).unwrap()).unwrap();
        let k = j as f64 * std::f64::consts::PI / (n as f64 + 1.0);
        let fourth: f64 = (1..=n)
            .map(|i| (2.0 / (n as f64 + 1.0)) * (k * i as f64).sin().powi(2))
            .map(|p| p * p)
            .sum();
        assert!((1.0 / fourth - expected).abs() < 1e-9);
        assert!((pr - expected).abs() < 1e-6 * expected, "j={j}: {pr} vs {expected}");
    }
}

#[test]
fn gradient_spectrum_is_nonnegative() {
    for (n, g) in [(50, 0.02), (400, 0.0025), (1000, 0.5)] {
        let op = build_h1(&ChainSpec::new(n, g).unwrap());
        let values = eigenvalues(&op, &SolverOptions::default()).unwrap();
        assert!(values[0] >= -1e-12 * op.spectral_width(), "min = {}", values[0]);
        assert!(op.gershgorin_bounds().0 >= -1e-12);
    }
}

#[test]
fn literal_variant_differs_from_canonical() {
    let spec = ChainSpec::new(30, 0.1).unwrap();
    let a = eigenvalues(&build_full(&spec), &SolverOptions::default()).unwrap();
    let b = eigenvalues(&build_full(&spec.with_variant(Variant::LiteralSum)), &SolverOptions::default()).unwrap();
    assert!(max_diff(&a, &b) > 1e-3);
}

#[test]
fn operator_validation_rejects_bad_shapes() {
    assert!(TridiagonalOperator::new(vec![1.0, 2.0], vec![]).is_err());
    assert!(TridiagonalOperator::new(vec![], vec![]).is_err());
    assert!(TridiagonalOperator::new(vec![f64::NAN], vec![]).is_err());
    assert!(ChainSpec::new(0, 0.1).is_err());
    assert!(ChainSpec::new(5, -0.1).is_err());
}
