use poolmax::riskmodels::{
    empirical_var, evt_var, forecast_var, garch_filter, garch_filter_init, garch_fit, rolling_forecasts_multi,
    simulate_garch, skewt_cdf, skewt_quantile, GarchParams, RollingConfig, VarMethod, VarianceInit,
};
use poolmax::RngSpec;
use proptest::prelude::*;

fn skewed() -> GarchParams {
    GarchParams {
        a0: 0.02,
        a1: 0.05,
        b0: 0.05,
        b1: 0.1,
        b2: 0.85,
        nu: 6.0,
        gamma: 1.3,
    }
}

/// True one-step-ahead `(1 - theta)` quantile after `series`.
fn true_var(series: &[f64], p: &GarchParams, theta: f64) -> f64 {
    let f = garch_filter(series, p).unwrap();
    let t = series.len() - 1;
    let eps = series[t] - f.cond_mean[t];
    let s2 = p.b0 + p.b1 * eps * eps + p.b2 * f.cond_vol[t] * f.cond_vol[t];
    p.a0 + p.a1 * series[t] + s2.sqrt() * skewt_quantile(1.0 - theta, p.nu, p.gamma).unwrap()
}

#[test]
fn empirical_and_skewt_track_skewed_truth() {
    let x = simulate_garch(&skewed(), 3000, 500, RngSpec::new(31)).unwrap();
    let truth = true_var(&x, &skewed(), 0.01);
    for m in [VarMethod::empirical(), VarMethod::skewt()] {
        let v = forecast_var(&x, m, 0.01).unwrap();
        assert!((v / truth - 1.0).abs() < 0.1, "{m}: {v} vs {truth}");
    }
}

#[test]
fn errors_shrink_with_window() {
    let methods = [VarMethod::empirical(), VarMethod::skewt(), VarMethod::evt(50)];
    let reps = 12;
    let mut err = [[0.0; 3]; 2];
    for r in 0..reps {
        let x = simulate_garch(&skewed(), 3000, 500, RngSpec::new(500 + r)).unwrap();
        for (w, window) in [1000usize, 3000].into_iter().enumerate() {
            let tail = &x[x.len() - window..];
            let truth = true_var(&x, &skewed(), 0.01);
            let fit = garch_fit(tail, None).unwrap();
            for (k, &m) in methods.iter().enumerate() {
                let v = poolmax::riskmodels::forecast_from_fit(tail, &fit, m, 0.01).unwrap();
                err[w][k] += (v / truth - 1.0).abs() / reps as f64;
            }
        }
    }
    for k in 0..3 {
        assert!(err[1][k] < err[0][k], "{}: {:?}", methods[k], err);
    }
}

#[test]
fn rolling_backtest_window_and_refit_cadence() {
    let p = GarchParams::gaussian(0.0, 0.1, 0.05, 0.1, 0.85);
    let x = simulate_garch(&p, 3502, 500, RngSpec::new(77)).unwrap();
    let methods = [VarMethod::empirical(), VarMethod::skewt()];
    let daily = rolling_forecasts_multi(&x, &RollingConfig::new(3000, 502), &methods, 0.01).unwrap();
    let once = RollingConfig {
        refit_every: 502,
        ..RollingConfig::new(3000, 502)
    };
    let single = rolling_forecasts_multi(&x, &once, &methods, 0.01).unwrap();
    for k in 0..methods.len() {
        assert_eq!(daily[k].len(), 502);
        let mard = daily[k]
            .iter()
            .zip(&single[k])
            .map(|(a, b)| ((a - b) / a).abs())
            .sum::<f64>()
            / 502.0;
        assert!(mard < 0.05, "{}: {mard}", methods[k]);
    }
}

fn params() -> impl Strategy<Value = GarchParams> {
    (
        -1.0..1.0f64,
        -0.9..0.9f64,
        0.01..2.0f64,
        0.0..0.3f64,
        0.0..0.6f64,
        2.5..40.0f64,
        0.5..2.0f64,
    )
        .prop_map(|(a0, a1, b0, b1, b2, nu, gamma)| GarchParams {
            a0,
            a1,
            b0,
            b1,
            b2,
            nu,
            gamma,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filter_round_trip(p in params(), seed in 0u64..1000, scale in prop::sample::select(vec![1e-3, 1.0, 1e3])) {
        let x: Vec<f64> = simulate_garch(&p, 400, 50, RngSpec::new(seed)).unwrap().iter().map(|v| v * scale).collect();
        for init in [VarianceInit::Unconditional, VarianceInit::SampleVariance] {
            let f = garch_filter_init(&x, &p, init);
            for t in 0..x.len() {
                let back = f.cond_mean[t] + f.cond_vol[t] * f.residuals[t];
                prop_assert!((back - x[t]).abs() <= 1e-12 * x[t].abs().max(f.cond_mean[t].abs()).max(1.0));
            }
        }
    }

    #[test]
    fn skewt_cdf_inverts_quantile(nu in 2.2..60.0f64, gamma in 0.3..3.0f64, prob in 0.001..0.999f64) {
        let q = skewt_quantile(prob, nu, gamma).unwrap();
        prop_assert!((skewt_cdf(q, nu, gamma).unwrap() - prob).abs() < 1e-8);
    }

    #[test]
    fn empirical_var_monotone(xs in prop::collection::vec(-50.0..50.0f64, 100..300), a in 0.01..0.99f64, b in 0.01..0.99f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(empirical_var(&xs, hi).unwrap() <= empirical_var(&xs, lo).unwrap());
    }

    #[test]
    fn evt_translation_equivariant(seed in 0u64..500, c in -100.0..100.0f64) {
        let mut g = RngSpec::new(seed).generator();
        use rand::Rng;
        let x: Vec<f64> = (0..600).map(|_| -g.random_range(f64::EPSILON..1.0f64).ln()).collect();
        let base = evt_var(&x, 0.01, 50).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let v = evt_var(&shifted, 0.01, 50).unwrap();
        prop_assert!((v - base - c).abs() <= 1e-9 * (1.0 + c.abs()));
    }
}
