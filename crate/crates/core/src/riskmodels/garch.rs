//! AR(1)-GARCH(1,1) with standardized skew-t innovations.
//!
//! ```text
//! U_t       = mu_t + sigma_t Z_t
//! mu_t      = a0 + a1 U_{t-1}
//! sigma_t^2 = b0 + b1 (U_{t-1} - mu_{t-1})^2 + b2 sigma_{t-1}^2
//! ```

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::optim::{minimize, BfgsOptions};
use super::skewt::SkewT;
use crate::error::{Error, Result};
use crate::rng::RngSpec;

pub const MIN_GARCH_OBS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub nu: f64,
    pub gamma: f64,
}

impl GarchParams {
    /// Gaussian-innovation model (`nu = inf`, `gamma = 1`).
    pub fn gaussian(a0: f64, a1: f64, b0: f64, b1: f64, b2: f64) -> Self {
        Self {
            a0,
            a1,
            b0,
            b1,
            b2,
            nu: f64::INFINITY,
            gamma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.a0.is_finite()
            && self.a1.abs() < 1.0
            && self.b0 > 0.0
            && self.b0.is_finite()
            && self.b1 >= 0.0
            && self.b2 >= 0.0
            && self.b1 + self.b2 < 1.0
            && self.nu > 2.0
            && self.gamma > 0.0
            && self.gamma.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::BadParams(format!("{self:?}")))
        }
    }

    pub fn unconditional_mean(&self) -> f64 {
        self.a0 / (1.0 - self.a1)
    }

    pub fn unconditional_variance(&self) -> f64 {
        self.b0 / (1.0 - self.b1 - self.b2)
    }

    pub fn persistence(&self) -> f64 {
        self.b1 + self.b2
    }

    pub fn innovation(&self) -> Result<SkewT> {
        SkewT::new(self.nu, self.gamma)
    }
}

/// Starting value of the variance recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceInit {
    Unconditional,
    SampleVariance,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Filtered {
    pub cond_mean: Vec<f64>,
    pub cond_vol: Vec<f64>,
    pub residuals: Vec<f64>,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    (m, v)
}

/// Population (divisor `n`) variance.
pub fn sample_variance(x: &[f64]) -> f64 {
    mean_var(x).1
}

fn initial_variance(series: &[f64], params: &GarchParams, init: VarianceInit) -> f64 {
    match init {
        VarianceInit::Unconditional => params.unconditional_variance(),
        VarianceInit::SampleVariance => mean_var(series).1,
        VarianceInit::Value(v) => v,
    }
}

/// Runs the recursion with an explicit starting variance.
pub fn garch_filter_init(series: &[f64], params: &GarchParams, init: VarianceInit) -> Filtered {
    let n = series.len();
    let mut out = Filtered {
        cond_mean: Vec::with_capacity(n),
        cond_vol: Vec::with_capacity(n),
        residuals: Vec::with_capacity(n),
    };
    let mut mu = params.unconditional_mean();
    let mut s2 = initial_variance(series, params, init);
    for (t, &u) in series.iter().enumerate() {
        if t > 0 {
            let prev_eps = series[t - 1] - mu;
            mu = params.a0 + params.a1 * series[t - 1];
            s2 = params.b0 + params.b1 * prev_eps * prev_eps + params.b2 * s2;
        }
        let sd = s2.sqrt();
        out.cond_mean.push(mu);
        out.cond_vol.push(sd);
        out.residuals.push((u - mu) / sd);
    }
    out
}

/// Filtered means, volatilities and residuals, started at the unconditional
/// moments.
pub fn garch_filter(series: &[f64], params: &GarchParams) -> Result<Filtered> {
    params.validate()?;
    Ok(garch_filter_init(series, params, VarianceInit::Unconditional))
}

/// Log-likelihood `sum_t [ln f(Z_t) - ln sigma_t]`; `-inf` on invalid input.
pub fn garch_loglik(series: &[f64], params: &GarchParams, init: VarianceInit) -> f64 {
    if params.validate().is_err() {
        return f64::NEG_INFINITY;
    }
    let Ok(dist) = params.innovation() else {
        return f64::NEG_INFINITY;
    };
    let mut mu = params.unconditional_mean();
    let mut s2 = initial_variance(series, params, init);
    let mut ll = 0.0;
    for (t, &u) in series.iter().enumerate() {
        if t > 0 {
            let prev_eps = series[t - 1] - mu;
            mu = params.a0 + params.a1 * series[t - 1];
            s2 = params.b0 + params.b1 * prev_eps * prev_eps + params.b2 * s2;
        }
        if !(s2 > 0.0) || !s2.is_finite() {
            return f64::NEG_INFINITY;
        }
        ll += dist.ln_pdf((u - mu) / s2.sqrt()) - 0.5 * s2.ln();
    }
    if ll.is_nan() {
        f64::NEG_INFINITY
    } else {
        ll
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub params: GarchParams,
    pub loglik: f64,
    /// Starting variance of the fitted recursion.
    pub init_var: f64,
    pub iterations: usize,
    pub cond_mean: Vec<f64>,
    pub cond_vol: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl GarchFit {
    /// One-step-ahead `(mu, sigma)` after the last fitted observation.
    pub fn next_moments(&self, series: &[f64]) -> (f64, f64) {
        let p = &self.params;
        let t = series.len() - 1;
        let eps = series[t] - self.cond_mean[t];
        let s2 = p.b0 + p.b1 * eps * eps + p.b2 * self.cond_vol[t] * self.cond_vol[t];
        (p.a0 + p.a1 * series[t], s2.sqrt())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GarchOptions {
    pub bfgs: BfgsOptions,
    pub restarts: usize,
    pub rng: RngSpec,
}

impl Default for GarchOptions {
    fn default() -> Self {
        Self {
            bfgs: BfgsOptions::default(),
            restarts: 5,
            rng: RngSpec::new(0),
        }
    }
}

const A1_MAX: f64 = 0.999;
const PERS_MAX: f64 = 0.9999;
const NU_MIN: f64 = 2.1;
const NU_SPAN: f64 = 197.9;
const LN_GAMMA_SPAN: f64 = std::f64::consts::LN_10;

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-9, 1.0 - 1e-9);
    (p / (1.0 - p)).ln()
}

/// Smooth map between the unconstrained optimizer space and the admissible
/// parameter set, scaled by the sample mean and variance.
struct Transform {
    mean: f64,
    sd: f64,
    var: f64,
}

impl Transform {
    fn to_params(&self, u: &[f64]) -> GarchParams {
        let pers = PERS_MAX * logistic(u[3]);
        let share = logistic(u[4]);
        GarchParams {
            a0: self.mean + self.sd * u[0],
            a1: A1_MAX * u[1].tanh(),
            b0: self.var * u[2].exp(),
            b1: pers * share,
            b2: pers * (1.0 - share),
            nu: NU_MIN + NU_SPAN * logistic(u[5]),
            gamma: (LN_GAMMA_SPAN * (2.0 * logistic(u[6]) - 1.0)).exp(),
        }
    }

    fn unconstrained(&self, p: &GarchParams) -> Vec<f64> {
        let pers = (p.b1 + p.b2).max(1e-6);
        let nu = if p.nu.is_finite() { p.nu } else { NU_MIN + NU_SPAN };
        vec![
            (p.a0 - self.mean) / self.sd,
            (p.a1 / A1_MAX).clamp(-0.999_999, 0.999_999).atanh(),
            (p.b0 / self.var).max(1e-12).ln(),
            logit(pers / PERS_MAX),
            logit(p.b1 / pers),
            logit((nu - NU_MIN) / NU_SPAN),
            logit(0.5 * (p.gamma.ln() / LN_GAMMA_SPAN + 1.0)),
        ]
    }

    fn default_start(&self) -> Vec<f64> {
        self.unconstrained(&GarchParams {
            a0: self.mean,
            a1: 0.0,
            b0: 0.05 * self.var,
            b1: 0.1,
            b2: 0.85,
            nu: 8.0,
            gamma: 1.0,
        })
    }
}

/// Joint maximum-likelihood fit with default options.
pub fn garch_fit(series: &[f64], init: Option<&GarchParams>) -> Result<GarchFit> {
    garch_fit_with(series, init, &GarchOptions::default())
}

/// Joint maximum-likelihood fit of all seven parameters.
///
/// The variance recursion starts at the sample variance. When the first
/// BFGS run stalls, up to `opts.restarts` perturbed starts are tried and the
/// best converged one is kept.
pub fn garch_fit_with(series: &[f64], init: Option<&GarchParams>, opts: &GarchOptions) -> Result<GarchFit> {
    if series.len() < MIN_GARCH_OBS {
        return Err(Error::TooFewObservations {
            needed: MIN_GARCH_OBS,
            have: series.len(),
        });
    }
    if let Some(j) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: j, col: 0 });
    }
    let (mean, var) = mean_var(series);
    let scale = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if var == 0.0 || var.sqrt() <= 1e-12 * scale {
        return Err(Error::DegenerateSeries);
    }
    let tr = Transform {
        mean,
        sd: var.sqrt(),
        var,
    };
    let n = series.len() as f64;
    let objective = |u: &[f64]| -> f64 {
        let p = tr.to_params(u);
        -garch_loglik(series, &p, VarianceInit::Value(var)) / n
    };

    let start = init.map(|p| tr.unconstrained(p)).unwrap_or_else(|| tr.default_start());
    let mut best = minimize(objective, &start, &opts.bfgs);
    let mut iterations = best.as_ref().map_or(0, |m| m.iterations);
    if !best.as_ref().is_some_and(|m| m.converged) {
        let mut rng = opts.rng.generator();
        let base = tr.default_start();
        for _ in 0..opts.restarts {
            let trial: Vec<f64> = base.iter().map(|b| b + rng.random_range(-1.0..1.0)).collect();
            let Some(m) = minimize(objective, &trial, &opts.bfgs) else {
                continue;
            };
            iterations += m.iterations;
            let better = match &best {
                Some(b) if b.converged => m.converged && m.f < b.f,
                Some(b) => m.converged || m.f < b.f,
                None => true,
            };
            if better {
                best = Some(m);
            }
            if best.as_ref().is_some_and(|b| b.converged) {
                break;
            }
        }
    }
    let best = match best {
        Some(m) if m.converged => m,
        _ => return Err(Error::NonConvergence { iterations }),
    };
    let params = tr.to_params(&best.x);
    let f = garch_filter_init(series, &params, VarianceInit::Value(var));
    Ok(GarchFit {
        params,
        loglik: -best.f * n,
        init_var: var,
        iterations: best.iterations,
        cond_mean: f.cond_mean,
        cond_vol: f.cond_vol,
        residuals: f.residuals,
    })
}

/// Simulates `n` observations after discarding `burn` warm-up steps.
pub fn simulate_garch(params: &GarchParams, n: usize, burn: usize, rng: RngSpec) -> Result<Vec<f64>> {
    params.validate()?;
    let dist = params.innovation()?;
    let mut g = rng.generator();
    let mut mu = params.unconditional_mean();
    let mut s2 = params.unconditional_variance();
    let mut prev_u = mu;
    let mut prev_eps = 0.0;
    let mut out = Vec::with_capacity(n);
    for t in 0..n + burn {
        if t > 0 {
            mu = params.a0 + params.a1 * prev_u;
            s2 = params.b0 + params.b1 * prev_eps * prev_eps + params.b2 * s2;
        }
        let z = if params.nu.is_infinite() && params.gamma == 1.0 {
            g.sample::<f64, _>(StandardNormal)
        } else {
            let p: f64 = g.random_range(f64::EPSILON..1.0);
            dist.quantile(p)?
        };
        prev_eps = s2.sqrt() * z;
        prev_u = mu + prev_eps;
        if t >= burn {
            out.push(prev_u);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> GarchParams {
        GarchParams::gaussian(0.0, 0.1, 0.05, 0.1, 0.85)
    }

    #[test]
    fn flat_recursion() {
        let p = GarchParams::gaussian(0.3, 0.0, 4.0, 0.0, 0.0);
        let f = garch_filter(&[1.0, -2.0, 5.0, 0.5], &p).unwrap();
        assert!(f.cond_vol.iter().all(|&s| s == 2.0));
        assert!(f.cond_mean.iter().all(|&m| m == 0.3));
    }

    #[test]
    fn round_trip_identity() {
        let x = simulate_garch(&truth(), 500, 100, RngSpec::new(3)).unwrap();
        let f = garch_filter(&x, &truth()).unwrap();
        for t in 0..x.len() {
            let back = f.cond_mean[t] + f.cond_vol[t] * f.residuals[t];
            assert!((back - x[t]).abs() <= 1e-12 * x[t].abs().max(1.0));
        }
    }

    #[test]
    fn filter_with_true_params_whitens() {
        let x = simulate_garch(&truth(), 3000, 500, RngSpec::new(11)).unwrap();
        let f = garch_filter(&x, &truth()).unwrap();
        let (_, v) = mean_var(&f.residuals);
        assert!((v - 1.0).abs() < 0.05, "{v}");
    }

    #[test]
    fn guards() {
        assert_eq!(garch_fit(&vec![1.5; 400], None).unwrap_err(), Error::DegenerateSeries);
        assert!(matches!(
            garch_fit(&[0.0; 10], None),
            Err(Error::TooFewObservations { needed: 300, have: 10 })
        ));
        let bad = GarchParams::gaussian(0.0, 0.0, 1.0, 0.5, 0.5);
        assert!(garch_filter(&[1.0, 2.0], &bad).is_err());
    }

    #[test]
    fn recovers_simulated_parameters() {
        let x = simulate_garch(&truth(), 3000, 500, RngSpec::new(5)).unwrap();
        let fit = garch_fit(&x, None).unwrap();
        assert!((fit.params.persistence() - 0.95).abs() < 0.05, "{:?}", fit.params);
        assert!((fit.params.a1 - 0.1).abs() < 0.05, "{:?}", fit.params);
        for t in 0..x.len() {
            let back = fit.cond_mean[t] + fit.cond_vol[t] * fit.residuals[t];
            assert!((back - x[t]).abs() <= 1e-12 * x[t].abs().max(1.0));
        }

        let again = garch_fit(&x, Some(&fit.params)).unwrap();
        assert!((again.loglik - fit.loglik).abs() < 1e-6 * fit.loglik.abs().max(1.0));
    }

    #[test]
    fn transform_round_trip() {
        let tr = Transform {
            mean: 0.2,
            sd: 1.5,
            var: 2.25,
        };
        let p = GarchParams {
            a0: 0.1,
            a1: -0.3,
            b0: 0.2,
            b1: 0.07,
            b2: 0.9,
            nu: 6.0,
            gamma: 1.3,
        };
        let q = tr.to_params(&tr.unconstrained(&p));
        for (a, b) in [
            (p.a0, q.a0),
            (p.a1, q.a1),
            (p.b0, q.b0),
            (p.b1, q.b1),
            (p.b2, q.b2),
            (p.nu, q.nu),
            (p.gamma, q.gamma),
        ] {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
