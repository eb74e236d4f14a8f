mod common;

use common::{fixed_model, kalman_forecast, kalman_smooth};
use msv_core::panel::LogSqPanel;
use msv_core::smoother::{forecast, forecast_states, mmsle_smooth, SmootherOpts, SolveBackend};
use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn log_series(n: usize, seed: u64) -> LogSqPanel<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    LogSqPanel::from_log_series(Array2::from_shape_fn((n, 2), |(_, j)| rng.random_range(-4.0..1.0) - j as f64))
}

fn opts(backend: SolveBackend) -> SmootherOpts<f64> {
    SmootherOpts { backend: Some(backend), ..Default::default() }
}

fn max_abs(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[test]
fn smoother_matches_kalman_rts() {
    let model = fixed_model();
    let ylog = log_series(50, 1);
    let x = &ylog.ylog - &model.c.view().insert_axis(Axis(0));
    let oracle = kalman_smooth(&model.phi, &model.sigma_alpha, &model.sigma_zeta, &x);
    for backend in [SolveBackend::DenseCholesky, SolveBackend::ConjugateGradient] {
        let path = mmsle_smooth(&model, &ylog, &opts(backend)).unwrap();
        assert!(max_abs(&path.raw, &oracle) < 1e-8, "{backend:?}: {}", max_abs(&path.raw, &oracle));
        let last: Array1<f64> = oracle.row(49).to_owned();
        assert!((&path.terminal - &last).iter().all(|v| v.abs() < 1e-8));
    }
}

#[test]
fn forecasts_match_kalman_predictor() {
    let model = fixed_model();
    let ylog = log_series(50, 2);
    let x = &ylog.ylog - &model.c.view().insert_axis(Axis(0));
    let oracle = kalman_smooth(&model.phi, &model.sigma_alpha, &model.sigma_zeta, &x);
    let pred = kalman_forecast(&model.phi, &oracle.row(49).to_owned(), 3) + &model.c.view().insert_axis(Axis(0));
    let states = forecast_states(&model, &ylog, 3, &opts(SolveBackend::DenseCholesky)).unwrap();
    assert!(max_abs(&states, &pred) < 1e-8);
    let covs = forecast(&model, &ylog, 3, &opts(SolveBackend::DenseCholesky)).unwrap();
    assert_eq!(covs.times, vec![51, 52, 53]);
    for (l, h) in covs.matrices.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                let di = model.dbar[i] * ((pred[[l, i]] - model.c[i]) / 2.0).exp();
                let dj = model.dbar[j] * ((pred[[l, j]] - model.c[j]) / 2.0).exp();
                assert!((h[[i, j]] - di * dj * model.gamma[[i, j]]).abs() < 1e-8 * (1.0 + h[[i, j]].abs()));
            }
        }
    }
}

#[test]
fn smoother_is_linear_in_the_data() {
    let model = fixed_model();
    let base = log_series(40, 3);
    let bump = log_series(40, 4);
    let shift = |ylog: &Array2<f64>| ylog - &model.c.view().insert_axis(Axis(0));
    let o = opts(SolveBackend::DenseCholesky);
    let a = mmsle_smooth(&model, &base, &o).unwrap().raw;
    let b = mmsle_smooth(&model, &bump, &o).unwrap().raw;
    let combo = &shift(&base.ylog) * 2.0 - &shift(&bump.ylog) * 0.5 + &model.c.view().insert_axis(Axis(0));
    let c = mmsle_smooth(&model, &LogSqPanel::from_log_series(combo), &o).unwrap().raw;
    assert!(max_abs(&c, &(&a * 2.0 - &b * 0.5)) < 1e-10);
}

#[test]
fn forecast_recursion_is_exact() {
    let model = fixed_model();
    let ylog = log_series(60, 5);
    let states = forecast_states(&model, &ylog, 6, &SmootherOpts::default()).unwrap();
    for l in 0..5 {
        let lhs = &states.row(l + 1) - &model.c;
        let rhs = model.phi.dot(&(&states.row(l) - &model.c));
        assert!((lhs - rhs).iter().all(|v| v.abs() < 1e-12));
    }
}
