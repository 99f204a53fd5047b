//! Validation and comparative backtests.

use serde::{Deserialize, Serialize};

use super::scoring::{check_shapes, score_diff_matrix};
use super::Theta;
use crate::error::Result;
use crate::matrix::DataMatrix;
use crate::pooltest::{pool_test, pool_test_sided, BootstrapConfig, Sidedness};
use crate::result::TestResult;
use crate::subsets::SubsetFamily;

/// `X_ij = 1{U_ij > R_ij} - theta0_j`; ties are not exceedances.
pub fn exceedance_matrix(u: &DataMatrix, r: &DataMatrix, theta0: impl Into<Theta>) -> Result<DataMatrix> {
    check_shapes(u, r)?;
    let theta0 = theta0.into();
    theta0.validate(u.n_cols())?;
    u.map_indexed(|i, j, x| if x > r.get(i, j) { 1.0 } else { 0.0 } - theta0.at(j))
}

/// Two-sided pooled test of `H0: P(U_ij > R_ij) = theta0_j` for all `j`.
pub fn validation_test(
    u: &DataMatrix,
    r: &DataMatrix,
    theta0: impl Into<Theta>,
    fam: &SubsetFamily,
    alpha: f64,
    cfg: &BootstrapConfig,
) -> Result<TestResult> {
    pool_test(&exceedance_matrix(u, r, theta0)?, fam, alpha, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComparativeSide {
    /// Equal predictive accuracy.
    TwoSided,
    /// Null: the column forecast `r_star` scores at least as well as the row
    /// forecast `r`. Rejection is evidence that `r` is better.
    OneSidedColumnBetter,
}

/// Pooled test on score differences `S(r) - S(r_star)`.
///
/// The one-sided variant applies the signed max statistic to
/// `S(r_star) - S(r)`, which is large when the row forecast `r` has the
/// lower (better) score.
#[allow(clippy::too_many_arguments)]
pub fn comparative_test(
    u: &DataMatrix,
    r: &DataMatrix,
    r_star: &DataMatrix,
    theta0: impl Into<Theta>,
    fam: &SubsetFamily,
    alpha: f64,
    cfg: &BootstrapConfig,
    sided: ComparativeSide,
) -> Result<TestResult> {
    let theta0 = theta0.into();
    match sided {
        ComparativeSide::TwoSided => pool_test(&score_diff_matrix(u, r, r_star, theta0)?, fam, alpha, cfg),
        ComparativeSide::OneSidedColumnBetter => {
            let x = score_diff_matrix(u, r_star, r, theta0)?;
            pool_test_sided(&x, fam, alpha, cfg, Sidedness::Upper)
        }
    }
}
