//! VaR backtests on top of the pooled max test.
//!
//! * validation: exceedance indicators `1{U > R} - theta0` tested for mean zero;
//! * comparative: score differences between two forecast panels tested for
//!   mean zero (two-sided) or for the direction favoured by the data;
//! * tail dependence of filtered residuals.

mod procedures;
mod report;
mod scoring;
mod taildep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use procedures::{comparative_test, exceedance_matrix, validation_test, ComparativeSide};
pub use report::{full_backtest, BacktestConfigEcho, BacktestReport, CellOutcome, ComparativeCell};
pub use scoring::{logistic, score, score_diff_matrix, var_score, ScoringSpec};
pub use taildep::{tail_dependence, tail_dependence_csv};

/// Target exceedance probabilities: one for all assets or one per asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Theta {
    Common(f64),
    PerAsset(Vec<f64>),
}

impl Theta {
    pub fn at(&self, j: usize) -> f64 {
        match self {
            Theta::Common(t) => *t,
            Theta::PerAsset(v) => v[j],
        }
    }

    /// Checks every target lies in (0, 1) and the vector length matches `p`.
    pub fn validate(&self, p: usize) -> Result<()> {
        let check = |index: usize, value: f64| {
            if value > 0.0 && value < 1.0 {
                Ok(())
            } else {
                Err(Error::BadTheta { index, value })
            }
        };
        match self {
            Theta::Common(t) => check(0, *t),
            Theta::PerAsset(v) => {
                if v.len() != p {
                    return Err(Error::DimensionMismatch(format!("{} targets for {p} assets", v.len())));
                }
                v.iter().enumerate().try_for_each(|(j, &t)| check(j, t))
            }
        }
    }
}

impl From<f64> for Theta {
    fn from(t: f64) -> Self {
        Theta::Common(t)
    }
}

impl From<Vec<f64>> for Theta {
    fn from(v: Vec<f64>) -> Self {
        Theta::PerAsset(v)
    }
}

impl From<&[f64]> for Theta {
    fn from(v: &[f64]) -> Self {
        Theta::PerAsset(v.to_vec())
    }
}
