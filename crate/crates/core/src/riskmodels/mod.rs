//! AR(1)-GARCH(1,1) fitting with skew-t innovations and the empirical,
//! skew-t and EVT value-at-risk estimators.

mod evt;
mod garch;
mod optim;
mod skewt;
mod var;

pub use evt::{evt_tail, evt_var, fit_gpd, gpd_nll, EvtTail, GpdFit, GpdMethod};
pub use garch::{
    garch_filter, garch_filter_init, garch_fit, garch_fit_with, garch_loglik, sample_variance, simulate_garch,
    Filtered, GarchFit, GarchOptions, GarchParams, VarianceInit, MIN_GARCH_OBS,
};
pub use optim::{minimize, BfgsOptions, Minimum};
pub use skewt::{skewt_cdf, skewt_quantile, SkewT};
pub use var::{
    empirical_var, forecast_from_fit, forecast_var, residual_var, rolling_forecasts, rolling_forecasts_multi,
    RollingConfig, VarKind, VarMethod, DEFAULT_EVT_K,
};
