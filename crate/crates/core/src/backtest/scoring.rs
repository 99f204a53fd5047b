//! Quantile scoring functions.

use super::Theta;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `S(r, x, level) = (1 - level - 1{x > r}) G(r) + 1{x > r} G(x)`.
///
/// For increasing `G` the expected score is minimized at the `level`
/// quantile of `x`.
pub fn score<G: Fn(f64) -> f64>(r: f64, x: f64, level: f64, g: G) -> f64 {
    if x > r {
        -level * g(r) + g(x)
    } else {
        (1.0 - level) * g(r)
    }
}

/// Score of a VaR forecast `r` at exceedance probability `theta0`; the
/// expected score is minimized at the `1 - theta0` quantile.
pub fn var_score(r: f64, x: f64, theta0: f64) -> f64 {
    score(r, x, 1.0 - theta0, logistic)
}

/// Scoring configuration for a comparative backtest.
#[derive(Debug, Clone, Copy)]
pub struct ScoringSpec {
    pub theta0: f64,
    pub g: fn(f64) -> f64,
}

impl Default for ScoringSpec {
    fn default() -> Self {
        Self {
            theta0: 0.01,
            g: logistic,
        }
    }
}

impl ScoringSpec {
    pub fn var_score(&self, r: f64, x: f64) -> f64 {
        score(r, x, 1.0 - self.theta0, self.g)
    }
}

pub(crate) fn check_shapes(u: &DataMatrix, r: &DataMatrix) -> Result<()> {
    if u.shape() != r.shape() {
        return Err(Error::ShapeMismatch {
            left: u.shape(),
            right: r.shape(),
        });
    }
    Ok(())
}

/// `X_ij = S(R_ij, U_ij) - S(R*_ij, U_ij)`.
pub fn score_diff_matrix(
    u: &DataMatrix,
    r: &DataMatrix,
    r_star: &DataMatrix,
    theta0: impl Into<Theta>,
) -> Result<DataMatrix> {
    check_shapes(u, r)?;
    check_shapes(u, r_star)?;
    let theta0 = theta0.into();
    theta0.validate(u.n_cols())?;
    u.map_indexed(|i, j, x| {
        let t = theta0.at(j);
        var_score(r.get(i, j), x, t) - var_score(r_star.get(i, j), x, t)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        assert!((score(0.0, -1.0, 0.01, logistic) - 0.495).abs() < 1e-15);
        assert!((score(0.0, 1.0, 0.01, logistic) - 0.726_058_6).abs() < 1e-6);
        assert_eq!(var_score(0.0, -1.0, 0.99), score(0.0, -1.0, 0.01, logistic));
    }

    #[test]
    fn diff_matrix_properties() {
        let u = DataMatrix::from_rows(&[[0.5, 3.0], [-1.0, 2.2], [4.0, 0.0]]).unwrap();
        let r = DataMatrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]).unwrap();
        let rs = DataMatrix::from_rows(&[[1.5, 1.0], [0.2, 2.5], [3.0, -1.0]]).unwrap();
        let z = score_diff_matrix(&u, &r, &r, 0.01).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let a = score_diff_matrix(&u, &r, &rs, 0.01).unwrap();
        let b = score_diff_matrix(&u, &rs, &r, 0.01).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(*x, -*y);
            assert!(x.abs() < 2.0);
        }
        let bad = DataMatrix::from_rows(&[[1.0], [2.0]]).unwrap();
        assert!(matches!(
            score_diff_matrix(&u, &bad, &r, 0.01),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
