//! Value-at-risk estimators on filtered residuals and rolling one-step-ahead
//! forecasts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::evt::evt_var;
use super::garch::{
    garch_filter_init, garch_fit_with, sample_variance, GarchFit, GarchOptions, GarchParams, VarianceInit,
};
use super::skewt::skewt_quantile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Empirical,
    SkewT,
    Evt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarMethod {
    pub kind: VarKind,
    /// Tail observations for the EVT estimator.
    pub k: usize,
}

pub const DEFAULT_EVT_K: usize = 50;

impl VarMethod {
    pub fn new(kind: VarKind) -> Self {
        Self { kind, k: DEFAULT_EVT_K }
    }

    pub fn empirical() -> Self {
        Self::new(VarKind::Empirical)
    }

    pub fn skewt() -> Self {
        Self::new(VarKind::SkewT)
    }

    pub fn evt(k: usize) -> Self {
        Self { kind: VarKind::Evt, k }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            VarKind::Empirical => "empirical",
            VarKind::SkewT => "skewt",
            VarKind::Evt => "evt",
        }
    }
}

impl fmt::Display for VarMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VarMethod {
    type Err = Error;

    /// Accepts `empirical`, `skewt` (or `sstd`), `evt` and `evt:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "empirical" | "emp" => Ok(Self::empirical()),
            "skewt" | "sstd" => Ok(Self::skewt()),
            "evt" => Ok(Self::evt(DEFAULT_EVT_K)),
            other => match other.strip_prefix("evt:").map(str::parse::<usize>) {
                Some(Ok(k)) => Ok(Self::evt(k)),
                _ => Err(Error::InvalidArgument(format!("unknown VaR method '{s}'"))),
            },
        }
    }
}

/// The `ceil((1 - theta) m)`-th order statistic.
pub fn empirical_var(residuals: &[f64], theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!("theta {theta} outside (0, 1)")));
    }
    let m = residuals.len();
    let needed = (1.0 / theta - 1e-9).ceil() as usize;
    if m < needed || m == 0 {
        return Err(Error::TooFewObservations { needed, have: m });
    }
    let rank = (((1.0 - theta) * m as f64 - 1e-9).ceil() as usize).clamp(1, m);
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[rank - 1])
}

/// Residual-scale VaR under the given method.
pub fn residual_var(residuals: &[f64], params: &GarchParams, method: VarMethod, theta: f64) -> Result<f64> {
    match method.kind {
        VarKind::Empirical => empirical_var(residuals, theta),
        VarKind::SkewT => skewt_quantile(1.0 - theta, params.nu, params.gamma),
        VarKind::Evt => evt_var(residuals, theta, method.k),
    }
}

/// One-step-ahead VaR from an existing fit of `window`.
pub fn forecast_from_fit(window: &[f64], fit: &GarchFit, method: VarMethod, theta: f64) -> Result<f64> {
    let (mu, sigma) = fit.next_moments(window);
    Ok(mu + sigma * residual_var(&fit.residuals, &fit.params, method, theta)?)
}

/// Fits the model on `window` and returns `mu_next + sigma_next VaR_Z(theta)`.
pub fn forecast_var(window: &[f64], method: VarMethod, theta: f64) -> Result<f64> {
    let fit = garch_fit_with(window, None, &GarchOptions::default())?;
    forecast_from_fit(window, &fit, method, theta)
}

#[derive(Debug, Clone, Copy)]
pub struct RollingConfig {
    pub window: usize,
    pub horizon: usize,
    /// Days between parameter refits; in between, the last parameters are
    /// re-filtered over the current window.
    pub refit_every: usize,
    pub garch: GarchOptions,
}

impl RollingConfig {
    pub fn new(window: usize, horizon: usize) -> Self {
        Self {
            window,
            horizon,
            refit_every: 1,
            garch: GarchOptions::default(),
        }
    }
}

/// Forecasts for the last `horizon` indices of `series`, one vector per
/// method. The forecast for index `t` uses `series[t - window..t]`.
pub fn rolling_forecasts_multi(
    series: &[f64],
    cfg: &RollingConfig,
    methods: &[VarMethod],
    theta: f64,
) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![Vec::with_capacity(cfg.horizon); methods.len()];
    if cfg.horizon == 0 {
        return Ok(out);
    }
    let needed = cfg.window + cfg.horizon;
    if series.len() < needed {
        return Err(Error::InsufficientHistory {
            needed,
            have: series.len(),
        });
    }
    if cfg.refit_every == 0 {
        return Err(Error::InvalidArgument("refit_every must be positive".into()));
    }
    let start = series.len() - cfg.horizon;
    let mut last: Option<GarchFit> = None;
    for (h, t) in (start..series.len()).enumerate() {
        let window = &series[t - cfg.window..t];
        let fit = match &last {
            Some(prev) if h % cfg.refit_every != 0 => {
                let init = sample_variance(window);
                let f = garch_filter_init(window, &prev.params, VarianceInit::Value(init));
                GarchFit {
                    params: prev.params,
                    loglik: f64::NAN,
                    init_var: init,
                    iterations: 0,
                    cond_mean: f.cond_mean,
                    cond_vol: f.cond_vol,
                    residuals: f.residuals,
                }
            }
            prev => {
                let warm = prev.as_ref().map(|p| p.params);
                let garch = GarchOptions {
                    rng: cfg.garch.rng.substream(t as u64),
                    ..cfg.garch
                };
                garch_fit_with(window, warm.as_ref(), &garch)?
            }
        };
        for (k, &m) in methods.iter().enumerate() {
            out[k].push(forecast_from_fit(window, &fit, m, theta)?);
        }
        if h % cfg.refit_every == 0 {
            last = Some(fit);
        }
    }
    Ok(out)
}

pub fn rolling_forecasts(series: &[f64], cfg: &RollingConfig, method: VarMethod, theta: f64) -> Result<Vec<f64>> {
    Ok(rolling_forecasts_multi(series, cfg, &[method], theta)?.remove(0))
}
