//! Data-generating processes for size/power studies.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dist::{norm_cdf, norm_quantile};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::rng::RngSpec;

/// Baseline exceedance probability of the binary models.
pub const BASE_THETA: f64 = 0.01;
const THETA_HIGH: f64 = 0.025;
const THETA_LOW: f64 = 0.005;
const MU_SHIFT: f64 = 0.0075;
const PSD_TOL: f64 = 1e-10;

/// A1/A2: thresholded Gaussians (binary, validation-like). B1/B2: the
/// continuous `g`-mixture (comparative-like). `*1` uses the paired
/// covariance, `*2` the AR(1) Toeplitz covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    A1,
    A2,
    B1,
    B2,
}

impl Model {
    pub fn is_binary(self) -> bool {
        matches!(self, Model::A1 | Model::A2)
    }

    pub fn covariance(self, p: usize) -> DMatrix<f64> {
        match self {
            Model::A1 | Model::B1 => sigma1(p),
            Model::A2 | Model::B2 => sigma2(p),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Model::A1 => "A1",
            Model::A2 => "A2",
            Model::B1 => "B1",
            Model::B2 => "B2",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A1" => Ok(Model::A1),
            "A2" => Ok(Model::A2),
            "B1" => Ok(Model::B1),
            "B2" => Ok(Model::B2),
            _ => Err(Error::InvalidArgument(format!("unknown model {s:?}"))),
        }
    }
}

fn default_alpha_n() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub model: Model,
    pub n: usize,
    pub p: usize,
    pub p0: usize,
    #[serde(default = "default_alpha_n")]
    pub alpha_n: f64,
    pub under_null: bool,
    pub rng: RngSpec,
}

impl DgpSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 1 {
            return Err(Error::TooSmall {
                rows: self.n,
                cols: self.p,
            });
        }
        let width = if self.model.is_binary() { 4 } else { 2 };
        if width * self.p0 > self.p {
            return Err(Error::ProfileOverflow { p: self.p, p0: self.p0 });
        }
        if !(self.alpha_n > 0.0 && self.alpha_n < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "alpha_n = {} must lie in (0, 0.5)",
                self.alpha_n
            )));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: DgpSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Identity with 0.7 linking coordinates (2k-1, 2k).
pub fn sigma1(p: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(p, p);
    for k in 0..p / 2 {
        s[(2 * k, 2 * k + 1)] = 0.7;
        s[(2 * k + 1, 2 * k)] = 0.7;
    }
    s
}

/// `0.5^{|i-j|}`.
pub fn sigma2(p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| 0.5f64.powi(i.abs_diff(j) as i32))
}

/// Draws i.i.d. rows from `N(0, cov)` through a fixed square-root factor.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    p: usize,
    /// Row-major `p x p` factor `L` with `L L^T = cov`.
    factor: Vec<f64>,
    lower: bool,
}

impl GaussianSampler {
    /// Cholesky when it succeeds, else a clipped symmetric eigen-factor.
    pub fn new(cov: &DMatrix<f64>) -> Result<Self> {
        let p = cov.nrows();
        if p == 0 || cov.ncols() != p {
            return Err(Error::DimensionMismatch(
                "covariance must be square and nonempty".into(),
            ));
        }
        if (0..p).any(|i| (0..i).any(|j| (cov[(i, j)] - cov[(j, i)]).abs() > PSD_TOL)) {
            return Err(Error::InvalidArgument("covariance is not symmetric".into()));
        }
        if let Some(ch) = cov.clone().cholesky() {
            let l = ch.l();
            let factor = (0..p)
                .flat_map(|i| (0..p).map(move |j| (i, j)))
                .map(|(i, j)| l[(i, j)])
                .collect();
            return Ok(Self { p, factor, lower: true });
        }
        let eig = SymmetricEigen::new(cov.clone());
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        let mut factor = vec![0.0; p * p];
        for i in 0..p {
            for k in 0..p {
                factor[i * p + k] = eig.eigenvectors[(i, k)] * eig.eigenvalues[k].max(0.0).sqrt();
            }
        }
        Ok(Self {
            p,
            factor,
            lower: false,
        })
    }

    pub fn sample(&self, n: usize, rng: RngSpec) -> Result<DataMatrix> {
        let p = self.p;
        let mut g = rng.generator();
        let mut e = vec![0.0; p];
        let mut values = Vec::with_capacity(n * p);
        for _ in 0..n {
            for v in e.iter_mut() {
                *v = g.sample(StandardNormal);
            }
            for i in 0..p {
                let width = if self.lower { i + 1 } else { p };
                let row = &self.factor[i * p..i * p + width];
                values.push(row.iter().zip(&e).map(|(a, b)| a * b).sum());
            }
        }
        DataMatrix::new(n, p, values)
    }
}

pub fn sample_gaussian(n: usize, cov: &DMatrix<f64>, rng: RngSpec) -> Result<DataMatrix> {
    GaussianSampler::new(cov)?.sample(n, rng)
}

/// Exceedance probabilities: `p0` at 0.025, `3 p0` at 0.005, the rest at
/// 0.01, deviating blocks first. Under the null every entry is 0.01.
pub fn theta_profile(p: usize, p0: usize, under_null: bool) -> Result<Vec<f64>> {
    if 4 * p0 > p {
        return Err(Error::ProfileOverflow { p, p0 });
    }
    if under_null {
        return Ok(vec![BASE_THETA; p]);
    }
    let mut t = vec![BASE_THETA; p];
    t[..p0].fill(THETA_HIGH);
    t[p0..4 * p0].fill(THETA_LOW);
    Ok(t)
}

/// Mean shifts for the B models: `p0` at -0.0075, `p0` at +0.0075, rest 0.
pub fn mu_profile(p: usize, p0: usize, under_null: bool) -> Result<Vec<f64>> {
    if 2 * p0 > p {
        return Err(Error::ProfileOverflow { p, p0 });
    }
    let mut m = vec![0.0; p];
    if !under_null {
        m[..p0].fill(-MU_SHIFT);
        m[p0..2 * p0].fill(MU_SHIFT);
    }
    Ok(m)
}

/// `X_ij = 1{Z_ij > Phi^{-1}(1 - theta_j)} - 0.01`.
pub fn model_a(z: &DataMatrix, thetas: &[f64]) -> Result<DataMatrix> {
    if thetas.len() != z.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} thetas for {} columns",
            thetas.len(),
            z.n_cols()
        )));
    }
    if let Some((index, &value)) = thetas.iter().enumerate().find(|(_, t)| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::BadTheta { index, value });
    }
    let cut: Vec<f64> = thetas.iter().map(|t| norm_quantile(1.0 - t)).collect();
    z.map_indexed(|_, j, v| if v > cut[j] { 1.0 - BASE_THETA } else { -BASE_THETA })
}

/// Piecewise-linear map sending `Uniform(0,1)` to the mixture
/// `(1 - a) U(-a, a) + a U(-1, 1)`.
pub fn g_transform(x: f64, alpha_n: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(x));
    }
    if !(alpha_n > 0.0 && alpha_n < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "alpha_n = {alpha_n} must lie in (0, 0.5)"
        )));
    }
    Ok(if x <= 1.0 - alpha_n {
        2.0 * alpha_n / (1.0 - alpha_n) * x - alpha_n
    } else {
        2.0 / alpha_n * x + 1.0 - 2.0 / alpha_n
    })
}

/// `X_ij = g(Phi(Z_ij)) - mu_j`.
pub fn model_b(z: &DataMatrix, mus: &[f64], alpha_n: f64) -> Result<DataMatrix> {
    if mus.len() != z.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} mus for {} columns",
            mus.len(),
            z.n_cols()
        )));
    }
    g_transform(0.0, alpha_n)?;
    z.map_indexed(|_, j, v| {
        // alpha_n was checked above and Phi lands in [0, 1]
        g_transform(norm_cdf(v), alpha_n).unwrap_or(f64::NAN) - mus[j]
    })
}

/// One dataset from `spec`, using `rng` for the Gaussian draws.
pub fn generate(spec: &DgpSpec, sampler: &GaussianSampler, rng: RngSpec) -> Result<DataMatrix> {
    let z = sampler.sample(spec.n, rng)?;
    if spec.model.is_binary() {
        model_a(&z, &theta_profile(spec.p, spec.p0, spec.under_null)?)
    } else {
        model_b(&z, &mu_profile(spec.p, spec.p0, spec.under_null)?, spec.alpha_n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma1_pairs() {
        assert_eq!(sigma1(2), DMatrix::from_row_slice(2, 2, &[1.0, 0.7, 0.7, 1.0]));
        let s = sigma1(3);
        assert_eq!(s[(0, 1)], 0.7);
        assert_eq!(s[(1, 0)], 0.7);
        assert_eq!(s[(2, 0)], 0.0);
        assert_eq!(s[(1, 2)], 0.0);
        assert_eq!(s[(2, 2)], 1.0);
        assert_eq!(sigma1(1), DMatrix::identity(1, 1));
    }

    #[test]
    fn sigma2_toeplitz() {
        assert_eq!(sigma2(2), DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]));
        assert_eq!(sigma2(3)[(0, 2)], 0.25);
        assert_eq!(sigma2(1), DMatrix::identity(1, 1));
    }

    fn col_stats(x: &DataMatrix, j: usize) -> (f64, f64) {
        let c = x.column(j);
        let n = c.len() as f64;
        let m = c.iter().sum::<f64>() / n;
        (m, c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n)
    }

    #[test]
    fn identity_moments() {
        let x = sample_gaussian(100_000, &DMatrix::identity(3, 3), RngSpec::new(1)).unwrap();
        for j in 0..3 {
            let (m, v) = col_stats(&x, j);
            assert!(m.abs() < 0.02 && (v - 1.0).abs() < 0.03, "{m} {v}");
        }
    }

    #[test]
    fn sigma1_correlation() {
        let x = sample_gaussian(100_000, &sigma1(4), RngSpec::new(2)).unwrap();
        let (a, b) = (x.column(0), x.column(1));
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
        let r = cov / (col_stats(&x, 0).1 * col_stats(&x, 1).1).sqrt();
        assert!((r - 0.7).abs() < 0.02, "{r}");
    }

    #[test]
    fn sampler_deterministic_and_psd_checked() {
        let a = sample_gaussian(10, &sigma2(5), RngSpec::new(3)).unwrap();
        let b = sample_gaussian(10, &sigma2(5), RngSpec::new(3)).unwrap();
        assert_eq!(a, b);
        // singular but PSD: falls back to the eigen factor
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let s = sample_gaussian(1000, &singular, RngSpec::new(4)).unwrap();
        assert!(s.rows().all(|r| (r[0] - r[1]).abs() < 1e-7));
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            sample_gaussian(5, &bad, RngSpec::new(1)),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn model_a_indicator() {
        let z = DataMatrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        let x = model_a(&z, &[0.5]).unwrap();
        assert_eq!(x.column(0), vec![0.99, -0.01]);
        assert!(matches!(model_a(&z, &[1.0]), Err(Error::BadTheta { index: 0, .. })));
    }

    #[test]
    fn model_a_null_mean() {
        let z = sample_gaussian(1_000_000, &DMatrix::identity(1, 1), RngSpec::new(5)).unwrap();
        let x = model_a(&z, &[0.01]).unwrap();
        let mean = x.values().iter().sum::<f64>() / 1e6;
        assert!(mean.abs() < 0.0005, "{mean}");
    }

    #[test]
    fn theta_profile_cases() {
        let t = theta_profile(100, 20, false).unwrap();
        assert_eq!(t.iter().filter(|&&v| v == 0.025).count(), 20);
        assert_eq!(t.iter().filter(|&&v| v == 0.005).count(), 60);
        assert_eq!(t.iter().filter(|&&v| v == 0.01).count(), 20);
        let mean = t.iter().sum::<f64>() / 100.0;
        assert!((mean - 0.01).abs() < 1e-15);
        assert!(theta_profile(100, 20, true).unwrap().iter().all(|&v| v == 0.01));
        assert_eq!(
            theta_profile(100, 30, false).unwrap_err(),
            Error::ProfileOverflow { p: 100, p0: 30 }
        );
    }

    #[test]
    fn mu_profile_sums_to_zero() {
        for (p, p0) in [(100, 20), (7, 3), (10, 5), (3, 0)] {
            let m = mu_profile(p, p0, false).unwrap();
            assert_eq!(m.iter().filter(|&&v| v < 0.0).count(), p0);
            assert_eq!(m.iter().filter(|&&v| v > 0.0).count(), p0);
            assert!(m.iter().sum::<f64>().abs() < 1e-15);
        }
        assert!(mu_profile(10, 6, false).is_err());
    }

    #[test]
    fn g_transform_points() {
        assert!((g_transform(0.0, 0.01).unwrap() + 0.01).abs() < 1e-15);
        assert!(g_transform(0.995, 0.01).unwrap().abs() < 1e-12);
        assert!((g_transform(1.0, 0.01).unwrap() - 1.0).abs() < 1e-12);
        // left piece is closed at 1 - alpha_n
        assert!((g_transform(0.99, 0.01).unwrap() - 0.01).abs() < 1e-12);
        assert_eq!(g_transform(1.5, 0.01).unwrap_err(), Error::OutOfRange(1.5));
        assert!(g_transform(0.5, 0.5).is_err());
    }

    #[test]
    fn g_mixture_moments() {
        let mut g = RngSpec::new(6).generator();
        let a = 0.01;
        let n = 1_000_000;
        let (mut sum, mut wide) = (0.0, 0usize);
        for _ in 0..n {
            let v = g_transform(g.random::<f64>(), a).unwrap();
            assert!((-1.0..=1.0).contains(&v));
            sum += v;
            if v.abs() > a {
                wide += 1;
            }
        }
        assert!((sum / n as f64).abs() < 0.001);
        assert!((wide as f64 / n as f64 - a * (1.0 - a)).abs() < 0.002);
    }

    #[test]
    fn model_b_cases() {
        let z = DataMatrix::from_rows(&[[0.0, 0.0], [0.0, 0.0]]).unwrap();
        let x = model_b(&z, &[0.0, 0.5], 0.01).unwrap();
        let g05 = 0.02 / 0.99 * 0.5 - 0.01;
        assert!((x.get(0, 0) - g05).abs() < 1e-15);
        assert!((x.get(0, 0) - 0.00010101).abs() < 1e-8);
        assert!((x.get(1, 1) - (g05 - 0.5)).abs() < 1e-15);

        let z = sample_gaussian(1_000_000, &DMatrix::identity(1, 1), RngSpec::new(7)).unwrap();
        let x = model_b(&z, &[0.0], 0.01).unwrap();
        assert!((x.values().iter().sum::<f64>() / 1e6).abs() < 0.001);
        assert!(x.values().iter().all(|v| v.abs() <= 1.0));
    }
}
