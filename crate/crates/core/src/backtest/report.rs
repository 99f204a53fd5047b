//! Validation and pairwise comparative backtests of several forecast panels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::procedures::{comparative_test, validation_test, ComparativeSide};
use super::scoring::check_shapes;
use super::Theta;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::pooltest::BootstrapConfig;
use crate::result::TestResult;
use crate::subsets::SubsetFamily;

/// Outcome of one report cell. Flat pooled components are reported in-cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum CellOutcome {
    Test(TestResult),
    Degenerate { message: String },
}

impl CellOutcome {
    fn from_result(r: Result<TestResult>) -> Result<Self> {
        match r {
            Ok(t) => Ok(CellOutcome::Test(t)),
            Err(e @ Error::DegenerateVariance { .. }) => Ok(CellOutcome::Degenerate { message: e.to_string() }),
            Err(e) => Err(e),
        }
    }

    pub fn p_value(&self) -> Option<f64> {
        match self {
            CellOutcome::Test(t) => Some(t.p_value),
            CellOutcome::Degenerate { .. } => None,
        }
    }
}

/// Lower-triangle entry: null hypothesis "method `col` performs better than
/// method `row`".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparativeCell {
    pub row: usize,
    pub col: usize,
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfigEcho {
    pub q: usize,
    pub d: usize,
    pub alpha: f64,
    #[serde(rename = "B")]
    pub replicates: usize,
    pub seed: u64,
    pub theta0: Theta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub method_names: Vec<String>,
    pub validation: Vec<CellOutcome>,
    pub comparative: Vec<ComparativeCell>,
    pub config: BacktestConfigEcho,
}

impl BacktestReport {
    pub fn validation_p_values(&self) -> Vec<Option<f64>> {
        self.validation.iter().map(CellOutcome::p_value).collect()
    }

    pub fn comparative_p_value(&self, row: usize, col: usize) -> Option<f64> {
        self.comparative
            .iter()
            .find(|c| c.row == row && c.col == col)
            .and_then(|c| c.outcome.p_value())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Table layout: validation p-values on the diagonal, comparative
    /// p-values below it, `NA` for degenerate cells.
    pub fn to_csv(&self) -> String {
        let k = self.method_names.len();
        let mut out = String::from("method");
        for name in &self.method_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        let fmt = |p: Option<f64>| p.map_or_else(|| "NA".to_string(), |v| v.to_string());
        for i in 0..k {
            out.push_str(&self.method_names[i]);
            for j in 0..k {
                out.push(',');
                if j == i {
                    out.push_str(&fmt(self.validation[i].p_value()));
                } else if j < i {
                    let cell = self.comparative.iter().find(|c| c.row == i && c.col == j);
                    out.push_str(&fmt(cell.and_then(|c| c.outcome.p_value())));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the validation test for every method and the one-sided comparative
/// test for every ordered pair `(row, col)` with `col < row`.
///
/// All cells use the same bootstrap configuration, so each diagonal entry
/// equals a standalone [`validation_test`] with `cfg`.
pub fn full_backtest(
    u: &DataMatrix,
    forecasts: &[(String, DataMatrix)],
    theta0: impl Into<Theta>,
    fam: &SubsetFamily,
    alpha: f64,
    cfg: &BootstrapConfig,
) -> Result<BacktestReport> {
    if forecasts.is_empty() {
        return Err(Error::InvalidArgument("no forecast panels".into()));
    }
    for (_, r) in forecasts {
        check_shapes(u, r)?;
    }
    let theta0 = theta0.into();
    theta0.validate(u.n_cols())?;
    let k = forecasts.len();
    let cells: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|&(i, j)| {
            let r = if i == j {
                validation_test(u, &forecasts[i].1, theta0.clone(), fam, alpha, cfg)
            } else {
                comparative_test(
                    u,
                    &forecasts[i].1,
                    &forecasts[j].1,
                    theta0.clone(),
                    fam,
                    alpha,
                    cfg,
                    ComparativeSide::OneSidedColumnBetter,
                )
            };
            CellOutcome::from_result(r)
        })
        .collect::<Result<_>>()?;

    let mut validation = Vec::with_capacity(k);
    let mut comparative = Vec::new();
    for (&(row, col), outcome) in cells.iter().zip(outcomes) {
        if row == col {
            validation.push(outcome);
        } else {
            comparative.push(ComparativeCell { row, col, outcome });
        }
    }
    Ok(BacktestReport {
        method_names: forecasts.iter().map(|(n, _)| n.clone()).collect(),
        validation,
        comparative,
        config: BacktestConfigEcho {
            q: fam.q(),
            d: fam.d(),
            alpha,
            replicates: cfg.replicates,
            seed: cfg.rng.seed,
            theta0,
        },
    })
}
