//! Mean-zero tests for panels of shrinking variables.
//!
//! Three tests share one pipeline:
//!
//! * **naive**: pool every column into a row sum `Y_i` and compare the
//!   studentized total `T = sum_i Y_i / sqrt(n * sigma_hat)` with a normal
//!   quantile;
//! * **subsets pool**: pool each subset `S_l` into `Y_i^(l)`, take
//!   `M = max_l |T^(l)|` and calibrate it with a Gaussian multiplier
//!   bootstrap;
//! * **marginal**: the same max statistic over raw columns (no pooling).
//!
//! `sigma_hat` always uses divisor `n` and is mean-centered. The bootstrap
//! multiplies the *uncentered* pooled observations by i.i.d. `N(0, 1)`
//! weights; replicate `b` draws its weights from `cfg.rng.substream(b)`, so
//! results do not depend on the rayon thread count.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{norm_quantile, norm_sf};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::result::{MethodTag, TestResult};
use crate::rng::RngSpec;
use crate::subsets::SubsetFamily;

/// Relative size below which a standard deviation counts as zero.
const DEGENERATE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub rng: RngSpec,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, rng: RngSpec) -> Self {
        Self { replicates, rng }
    }
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 1000,
            rng: RngSpec::new(0),
        }
    }
}

/// Two-sided uses `max |T|`; `Upper` uses the signed `max T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sidedness {
    TwoSided,
    Upper,
}

/// Subset-pooled observations with their studentized totals.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledPanel {
    n: usize,
    d: usize,
    /// `n x d`, row-major.
    y: Vec<f64>,
    sigma_hat: Vec<f64>,
    denom: Vec<f64>,
    t_stats: Vec<f64>,
}

impl PooledPanel {
    /// Finishes a panel from pooled values; fails if any component is flat.
    fn from_pooled(n: usize, d: usize, y: Vec<f64>) -> Result<Self> {
        let nf = n as f64;
        let mut sums = vec![0.0; d];
        let mut max_abs = vec![0.0f64; d];
        for row in y.chunks_exact(d) {
            for (l, &v) in row.iter().enumerate() {
                sums[l] += v;
                max_abs[l] = max_abs[l].max(v.abs());
            }
        }
        let means: Vec<f64> = sums.iter().map(|s| s / nf).collect();
        let mut ss = vec![0.0; d];
        for row in y.chunks_exact(d) {
            for (l, &v) in row.iter().enumerate() {
                let e = v - means[l];
                ss[l] += e * e;
            }
        }
        let sigma_hat: Vec<f64> = ss.iter().map(|s| s / nf).collect();
        if let Some(l) = (0..d).find(|&l| max_abs[l] == 0.0 || sigma_hat[l].sqrt() <= DEGENERATE_REL_TOL * max_abs[l]) {
            return Err(Error::DegenerateVariance { index: Some(l) });
        }
        let denom: Vec<f64> = sigma_hat.iter().map(|s| (nf * s).sqrt()).collect();
        let t_stats = sums.iter().zip(&denom).map(|(s, q)| s / q).collect();
        Ok(Self {
            n,
            d,
            y,
            sigma_hat,
            denom,
            t_stats,
        })
    }

    /// Panel over the raw columns of `x` (no pooling).
    pub fn identity(x: &DataMatrix) -> Result<Self> {
        Self::from_pooled(x.n_rows(), x.n_cols(), x.values().to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn y(&self, i: usize, l: usize) -> f64 {
        self.y[i * self.d + l]
    }

    pub fn sigma_hat(&self) -> &[f64] {
        &self.sigma_hat
    }

    pub fn t_stats(&self) -> &[f64] {
        &self.t_stats
    }

    /// Conditional covariance of the bootstrap vector `(T_B^(1), .., T_B^(d))`:
    /// `(1/n) sum_i Y_i^(a) Y_i^(b) / sqrt(sigma_aa * sigma_bb)`.
    pub fn bootstrap_covariance(&self) -> Vec<Vec<f64>> {
        let mut c = vec![vec![0.0; self.d]; self.d];
        for row in self.y.chunks_exact(self.d) {
            for a in 0..self.d {
                for b in a..self.d {
                    c[a][b] += row[a] * row[b];
                }
            }
        }
        for a in 0..self.d {
            for b in a..self.d {
                let v = c[a][b] / (self.denom[a] * self.denom[b]);
                c[a][b] = v;
                c[b][a] = v;
            }
        }
        c
    }
}

/// Pools `x` over every subset of `fam`: `y[i][l] = sum_{j in S_l} x[i][j]`.
pub fn pooled_panel(x: &DataMatrix, fam: &SubsetFamily) -> Result<PooledPanel> {
    if fam.p() != x.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "family is over p = {} but data has {} columns",
            fam.p(),
            x.n_cols()
        )));
    }
    let d = fam.d();
    let zero_based: Vec<Vec<usize>> = fam
        .members()
        .iter()
        .map(|m| m.iter().map(|j| j - 1).collect())
        .collect();
    let mut y = Vec::with_capacity(x.n_rows() * d);
    for row in x.rows() {
        y.extend(zero_based.iter().map(|m| m.iter().map(|&j| row[j]).sum::<f64>()));
    }
    PooledPanel::from_pooled(x.n_rows(), d, y)
}

fn reduce(values: &[f64], sided: Sidedness) -> f64 {
    match sided {
        Sidedness::TwoSided => values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        Sidedness::Upper => values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)),
    }
}

/// `M = max_l |T^(l)|`.
pub fn max_statistic(panel: &PooledPanel) -> f64 {
    reduce(&panel.t_stats, Sidedness::TwoSided)
}

/// Runs `f` on each bootstrap vector `T_B`, in replicate order.
fn bootstrap_map<T, F>(panel: &PooledPanel, cfg: &BootstrapConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    if cfg.replicates == 0 {
        return Err(Error::InvalidArgument("bootstrap needs at least one replicate".into()));
    }
    let (n, d) = (panel.n, panel.d);
    Ok((0..cfg.replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut g = cfg.rng.substream(b).generator();
            let mut acc = vec![0.0; d];
            for i in 0..n {
                let xi: f64 = g.sample(StandardNormal);
                for (a, &v) in acc.iter_mut().zip(&panel.y[i * d..(i + 1) * d]) {
                    *a += xi * v;
                }
            }
            for (a, q) in acc.iter_mut().zip(&panel.denom) {
                *a /= q;
            }
            f(&acc)
        })
        .collect())
}

/// Bootstrap draws of `M_B` (`Upper`: of `max_l T_B^(l)`).
pub fn multiplier_bootstrap(panel: &PooledPanel, cfg: &BootstrapConfig, sided: Sidedness) -> Result<Vec<f64>> {
    bootstrap_map(panel, cfg, |t| reduce(t, sided))
}

/// Full bootstrap vectors `(T_B^(1), .., T_B^(d))`, one per replicate.
pub fn bootstrap_vectors(panel: &PooledPanel, cfg: &BootstrapConfig) -> Result<Vec<Vec<f64>>> {
    bootstrap_map(panel, cfg, |t| t.to_vec())
}

/// The `ceil((1 - alpha)(B + 1))`-th order statistic, clamped to the maximum.
pub fn bootstrap_quantile(draws: &[f64], alpha: f64) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::EmptyDraws);
    }
    check_alpha(alpha)?;
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let b = sorted.len();
    // guard against (1 - alpha)(B + 1) landing a hair above an integer
    let k = ((1.0 - alpha) * (b as f64 + 1.0) - 1e-9).ceil() as usize;
    Ok(sorted[k.clamp(1, b) - 1])
}

/// `(1 + #{M_B >= M}) / (B + 1)`.
pub fn bootstrap_p_value(draws: &[f64], statistic: f64) -> f64 {
    let hits = draws.iter().filter(|&&m| m >= statistic).count();
    (1 + hits) as f64 / (draws.len() + 1) as f64
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1)")))
    }
}

fn calibrate(
    panel: &PooledPanel,
    alpha: f64,
    cfg: &BootstrapConfig,
    sided: Sidedness,
    tag: MethodTag,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    let statistic = reduce(&panel.t_stats, sided);
    let draws = multiplier_bootstrap(panel, cfg, sided)?;
    let critical_value = bootstrap_quantile(&draws, alpha)?;
    Ok(TestResult {
        statistic,
        critical_value,
        p_value: bootstrap_p_value(&draws, statistic),
        reject: statistic > critical_value,
        alpha,
        method_tag: tag,
        per_subset_t: Some(panel.t_stats.clone()),
    })
}

/// Subsets-pooled max test, two-sided.
pub fn pool_test(x: &DataMatrix, fam: &SubsetFamily, alpha: f64, cfg: &BootstrapConfig) -> Result<TestResult> {
    pool_test_sided(x, fam, alpha, cfg, Sidedness::TwoSided)
}

pub fn pool_test_sided(
    x: &DataMatrix,
    fam: &SubsetFamily,
    alpha: f64,
    cfg: &BootstrapConfig,
    sided: Sidedness,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    let panel = pooled_panel(x, fam)?;
    calibrate(&panel, alpha, cfg, sided, MethodTag::SubsetsPool)
}

/// Max test over the raw columns, bootstrap on uncentered `X`.
pub fn marginal_test(x: &DataMatrix, alpha: f64, cfg: &BootstrapConfig) -> Result<TestResult> {
    check_alpha(alpha)?;
    let panel = PooledPanel::identity(x)?;
    calibrate(&panel, alpha, cfg, Sidedness::TwoSided, MethodTag::Marginal)
}

/// Full-pool test with the normal reference: reject when `|T| > z_{1-alpha/2}`.
pub fn naive_test(x: &DataMatrix, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let y: Vec<f64> = x.rows().map(|r| r.iter().sum()).collect();
    let panel = PooledPanel::from_pooled(x.n_rows(), 1, y).map_err(|e| match e {
        Error::DegenerateVariance { .. } => Error::DegenerateVariance { index: None },
        other => other,
    })?;
    let t = panel.t_stats[0];
    let critical_value = norm_quantile(1.0 - alpha / 2.0);
    Ok(TestResult {
        statistic: t,
        critical_value,
        p_value: (2.0 * norm_sf(t.abs())).min(1.0),
        reject: t.abs() > critical_value,
        alpha,
        method_tag: MethodTag::Naive,
        per_subset_t: None,
    })
}
