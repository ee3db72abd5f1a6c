mod common;

use nalgebra::{DMatrix, DVector};
use priorsens_core::rw1::{
    exact_sensitivity_on, logdet_precision, solve_tridiagonal, LogTauQuadrature,
    DEFAULT_TABULATION_POINTS,
};
use priorsens_core::{
    circular_sensitivity, common_support, compute_grid, hellinger_grid, ParamPoint, Rw1Model,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_precision(tau: f64, kappa: f64, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let neighbours = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            neighbours * tau + kappa
        } else if i.abs_diff(j) == 1 {
            -tau
        } else {
            0.0
        }
    })
}

fn log_sweep(k: usize) -> impl Iterator<Item = f64> {
    (0..k).map(move |i| 10f64.powf(-3.0 + 6.0 * i as f64 / (k - 1) as f64))
}

#[test]
fn product_logdet_matches_dense_cholesky() {
    for n in [3, 7, 20, 50] {
        for tau in log_sweep(7) {
            for kappa in log_sweep(7) {
                let q = dense_precision(tau, kappa, n);
                let chol = q.cholesky().expect("positive definite");
                let dense: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
                let product = logdet_precision(tau, kappa, n);
                assert!(
                    (product - dense).abs() <= 1e-8 * dense.abs().max(1.0),
                    "n={n} tau={tau} kappa={kappa}: {product} vs {dense}"
                );
            }
        }
    }
    assert!((logdet_precision(0.0, 2.0, 5) - 5.0 * 2f64.ln()).abs() < 1e-14);
    assert!(
        (logdet_precision(1.0, 1.0, 8) - dense_precision(1.0, 1.0, 8).determinant().ln()).abs()
            < 1e-9
    );
}

#[test]
fn tridiagonal_solve_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let y: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..2.0)).collect();
    let model = Rw1Model::new(y.clone(), 1.3, ParamPoint::new(1.0, 1.0)).unwrap();
    let v = model.solve_precision(0.7, &y).unwrap();
    let dense = dense_precision(0.7, 1.3, 12)
        .lu()
        .solve(&DVector::from_vec(y))
        .unwrap();
    for (a, b) in v.iter().zip(dense.iter()) {
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-3));
    }
}

#[test]
fn tridiagonal_residual_is_small_for_long_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 10_000;
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let y_max = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (tau, kappa) in [
        (0.7, 1.3),
        (1e3, 1e-3),
        (1e-3, 1e3),
        (1e3, 1e3),
        (1e8, 0.274),
    ] {
        let model = Rw1Model::new(y.clone(), kappa, ParamPoint::new(1.0, 1.0)).unwrap();
        let v = model.solve_precision(tau, &y).unwrap();
        let (off, diag) = model.precision_bands(tau);
        let residual = (0..n)
            .map(|i| {
                let mut r = diag[i] * v[i] - y[i];
                if i > 0 {
                    r += off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    r += off[i] * v[i + 1];
                }
                r.abs()
            })
            .fold(0.0, f64::max);
        // beyond the sweep, rounding in forming Q v itself is of order eps tau |v|
        let v_max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let bound = if tau <= 1e3 {
            1e-10 * y_max
        } else {
            1e-12 * tau * v_max
        };
        assert!(residual <= bound, "tau={tau} kappa={kappa}: {residual}");

        let generic = solve_tridiagonal(&off, &diag, &off, &y).unwrap();
        if tau <= 1e3 {
            for (a, b) in generic.iter().zip(&v) {
                assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
            }
        }
    }
}

#[test]
fn normalized_posterior_integrates_to_one() {
    let (y, kappa) = common::rw1_series(40, 20.0, 4.0, 5);
    let model = Rw1Model::new(y, kappa, ParamPoint::new(1.0, 0.005)).unwrap();
    let ln_c = model.normconst(1.0, 0.005).unwrap();
    let u: Vec<f64> = (0..=40_000)
        .map(|i| -20.0 + 50.0 * i as f64 / 40_000.0)
        .collect();
    let f: Vec<f64> = u
        .iter()
        .map(|&u| (model.log_unnormalized_posterior(u.exp()).unwrap() + u - ln_c).exp())
        .collect();
    let mass = priorsens_core::trapezoid(&u, &f);
    assert!((mass - 1.0).abs() < 1e-9, "mass {mass}");
    assert_eq!(model.normconst(1.0, 0.005).unwrap() - ln_c, 0.0);
}

/// For two observations the precision posterior is a double integral over
/// `d = x1 - x2` and `u = ln tau` once the level `(x1 + x2) / 2` is integrated out.
fn brute_force_log_constant(y: [f64; 2], kappa: f64, alpha: f64, beta: f64) -> f64 {
    let delta = y[0] - y[1];
    let u_grid: Vec<f64> = (0..=6000)
        .map(|i| -40.0 + 50.0 * i as f64 / 6000.0)
        .collect();
    let outer: Vec<f64> = u_grid
        .iter()
        .map(|&u| {
            let tau = u.exp();
            let precision = tau + 0.5 * kappa;
            let centre = 0.5 * kappa * delta / precision;
            let half = 14.0 / precision.sqrt();
            let d: Vec<f64> = (0..=1200)
                .map(|i| centre - half + 2.0 * half * i as f64 / 1200.0)
                .collect();
            let inner: Vec<f64> = d
                .iter()
                .map(|&d| (-0.5 * tau * d * d - 0.25 * kappa * (delta - d) * (delta - d)).exp())
                .collect();
            let integral = priorsens_core::trapezoid(&d, &inner);
            ((alpha + 0.5) * u - beta * tau).exp() * integral
        })
        .collect();
    priorsens_core::trapezoid(&u_grid, &outer).ln()
}

#[test]
fn two_observation_model_matches_brute_force() {
    let y = [1.3, -0.4];
    let kappa = 2.0;
    let model = Rw1Model::new(y.to_vec(), kappa, ParamPoint::new(1.0, 0.5)).unwrap();
    let priors = [(1.0, 0.5), (2.0, 0.5), (1.0, 2.0), (0.7, 0.1)];
    let exact: Vec<f64> = priors
        .iter()
        .map(|&(a, b)| model.normconst(a, b).unwrap())
        .collect();
    let brute: Vec<f64> = priors
        .iter()
        .map(|&(a, b)| brute_force_log_constant(y, kappa, a, b))
        .collect();
    // the two integrals differ by a prior-free constant
    let offset = brute[0] - exact[0];
    for (e, b) in exact.iter().zip(&brute) {
        assert!((b - e - offset).abs() < 1e-6, "{e} {b} {offset}");
    }

    let h = model
        .exact_posterior_hellinger(ParamPoint::new(1.0, 0.5), ParamPoint::new(2.0, 0.5))
        .unwrap();
    let mid = brute_force_log_constant(y, kappa, 1.5, 0.5);
    let h_brute = (1.0 - (mid - 0.5 * (brute[0] + brute[1])).exp()).sqrt();
    assert!((h - h_brute).abs() < 1e-6, "{h} vs {h_brute}");
}

#[test]
fn exact_distance_is_stable_under_node_doubling() {
    let (y, kappa) = common::rw1_series(96, 10.0, 2.0, 11);
    let model = Rw1Model::new(y, kappa, ParamPoint::new(1.0, 0.005)).unwrap();
    let p0 = ParamPoint::new(1.0, 0.005);
    let p1 = ParamPoint::new(1.01, 0.0052);
    let q = LogTauQuadrature::covering(&model, &[p0, p1]).unwrap();
    let (lo, hi) = q.range();
    let finer = LogTauQuadrature::build(&model, lo, hi, 2 * q.intervals()).unwrap();
    assert!((q.hellinger(p0, p1) - finer.hellinger(p0, p1)).abs() <= 1e-8);
    assert!(
        (q.log_integral(p0) - finer.log_integral(p0)).abs()
            <= 1e-10 * q.log_integral(p0).abs().max(1.0)
    );
}

#[test]
fn exact_distance_matches_grid_distance_of_tabulated_posteriors() {
    let (y, kappa) = common::rw1_series(60, 10.0, 2.0, 21);
    let model = Rw1Model::new(y, kappa, ParamPoint::new(1.0, 0.005)).unwrap();
    for p1 in [
        ParamPoint::new(1.05, 0.005),
        ParamPoint::new(1.0, 0.02),
        ParamPoint::new(3.0, 0.5),
    ] {
        let exact = model.exact_posterior_hellinger(model.prior(), p1).unwrap();
        let g0 = model.tabulate_posterior(DEFAULT_TABULATION_POINTS).unwrap();
        let g1 = model
            .with_prior(p1)
            .unwrap()
            .tabulate_posterior(DEFAULT_TABULATION_POINTS)
            .unwrap();
        let (a, b) = common_support(g0.posterior(), g1.posterior()).unwrap();
        let grid = hellinger_grid(&a, &b).unwrap();
        assert!((exact - grid).abs() < 1e-6, "{p1:?}: {exact} vs {grid}");
    }
}

#[test]
fn generic_engine_matches_exact_sensitivity() {
    let (y, kappa) = common::rw1_series(96, 5.0, 1.0, 8);
    let model = Rw1Model::new(y, kappa, ParamPoint::new(1.0, 0.005)).unwrap();
    let grid = compute_grid(&model.prior_spec(), 0.00354, 64).unwrap();
    let exact = exact_sensitivity_on(&model, &grid).unwrap();
    let coarse = circular_sensitivity(&model.tabulate_posterior(2001).unwrap(), &grid).unwrap();
    let fine = circular_sensitivity(&model.tabulate_posterior(4001).unwrap(), &grid).unwrap();
    for (e, g) in exact.entries.iter().zip(&coarse.entries) {
        assert!(
            (e.ratio - g.ratio).abs() <= 1e-4,
            "{} vs {}",
            e.ratio,
            g.ratio
        );
    }
    assert!((coarse.worst_case - fine.worst_case).abs() <= 1e-5);
    assert!(exact.worst_case > 0.0 && exact.worst_case.is_finite());
}
