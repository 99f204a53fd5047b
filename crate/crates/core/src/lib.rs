//! High-dimensional mean-zero testing for shrinking random variables.
//!
//! The crate pools a panel `X` (n observations x p dimensions) over a family
//! of overlapping index subsets, studentizes each pooled total, and tests the
//! maximum with a Gaussian multiplier bootstrap ([`pooltest`]). Around that
//! core sit the subset designs ([`subsets`]), a Monte Carlo laboratory for
//! size/power studies ([`simlab`]), AR(1)-GARCH(1,1) risk models with three
//! VaR estimators ([`riskmodels`]), and validation/comparative VaR
//! backtests built on the pooled test ([`backtest`]).

pub mod backtest;
pub mod dist;
pub mod error;
pub mod matrix;
pub mod pooltest;
pub mod result;
pub mod riskmodels;
pub mod rng;
pub mod simlab;
pub mod subsets;

pub use error::{Error, ErrorClass, Result};
pub use matrix::{validate_matrix, DataMatrix};
pub use pooltest::{
    bootstrap_quantile, marginal_test, max_statistic, multiplier_bootstrap, naive_test, pool_test, pooled_panel,
    BootstrapConfig, PooledPanel, Sidedness,
};
pub use result::{MethodTag, TestResult};
pub use rng::{substream, RngSpec};
pub use subsets::{build_family, circular_family, gcd, random_extension, SubsetFamily};
