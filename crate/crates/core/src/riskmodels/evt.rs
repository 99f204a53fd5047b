//! Peaks-over-threshold tail estimation with a generalized Pareto fit.

use serde::{Deserialize, Serialize};

use super::optim::{minimize, BfgsOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GpdMethod {
    MaximumLikelihood,
    Moments,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdFit {
    pub xi: f64,
    pub beta: f64,
    pub method: GpdMethod,
}

/// Negative log-likelihood of GPD excesses; `inf` outside the support.
pub fn gpd_nll(excess: &[f64], xi: f64, beta: f64) -> f64 {
    if !(beta > 0.0) {
        return f64::INFINITY;
    }
    let k = excess.len() as f64;
    let mut s = 0.0;
    if xi.abs() < 1e-12 {
        for &y in excess {
            s += y / beta;
        }
    } else {
        for &y in excess {
            let z = xi * y / beta;
            if z <= -1.0 {
                return f64::INFINITY;
            }
            s += (1.0 + 1.0 / xi) * z.ln_1p();
        }
    }
    k * beta.ln() + s
}

fn moments(excess: &[f64]) -> Option<GpdFit> {
    let k = excess.len() as f64;
    let mean = excess.iter().sum::<f64>() / k;
    let var = excess.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (k - 1.0);
    if !(mean > 0.0 && var > 0.0) {
        return None;
    }
    let r = mean * mean / var;
    Some(GpdFit {
        xi: 0.5 * (1.0 - r),
        beta: 0.5 * mean * (r + 1.0),
        method: GpdMethod::Moments,
    })
}

/// `(ln(1 + theta y) / theta, y / (1 + theta y))` averaged over `excess`.
fn profile_terms(excess: &[f64], theta: f64) -> (f64, f64) {
    let k = excess.len() as f64;
    let (mut r, mut b) = (0.0, 0.0);
    for &y in excess {
        let ty = theta * y;
        r += if ty == 0.0 { y } else { ty.ln_1p() / theta };
        b += y / (1.0 + ty);
    }
    (r / k, b / k)
}

/// Secant refinement of the profile score in `theta = xi / beta`, where
/// `xi = theta R(theta)` and `beta = R(theta)`. Pins the optimum to machine
/// precision; the line search alone stops near the square root of it.
fn polish(excess: &[f64], xi: f64, beta: f64) -> (f64, f64) {
    let y_max = excess.iter().fold(0.0f64, |a, &y| a.max(y));
    let admissible = |t: f64| t.is_finite() && 1.0 + t * y_max > 0.0;
    let score = |t: f64| {
        let (r, b) = profile_terms(excess, t);
        let d = excess
            .iter()
            .map(|&y| {
                let ty = t * y;
                if ty.abs() < 1e-8 {
                    -0.5 * t * y * y
                } else {
                    y / (1.0 + ty) - ty.ln_1p() / t
                }
            })
            .sum::<f64>()
            / excess.len() as f64;
        b + d / (t * r)
    };
    let nll = |t: f64| {
        let (r, _) = profile_terms(excess, t);
        gpd_nll(excess, t * r, r)
    };
    let t0 = if xi == 0.0 { 1e-10 } else { xi / beta };
    let (mut a, mut b) = (t0, t0 * (1.0 + 1e-6));
    let (mut ga, mut gb) = (score(a), score(b));
    for _ in 0..60 {
        if !(ga.is_finite() && gb.is_finite()) || gb == ga {
            break;
        }
        let c = b - gb * (b - a) / (gb - ga);
        if !admissible(c) || c == 0.0 {
            break;
        }
        (a, ga) = (b, gb);
        (b, gb) = (c, score(c));
        if (b - a).abs() <= 4.0 * f64::EPSILON * b.abs() {
            break;
        }
    }
    if admissible(b) && b != 0.0 && nll(b) <= gpd_nll(excess, xi, beta) + 1e-9 {
        let (r, _) = profile_terms(excess, b);
        (b * r, r)
    } else {
        (xi, beta)
    }
}

/// Maximum-likelihood GPD fit, falling back to the method of moments when
/// the likelihood search fails.
pub fn fit_gpd(excess: &[f64]) -> Result<GpdFit> {
    if excess.len() < 2 || excess.iter().any(|y| !(y.is_finite() && *y >= 0.0)) {
        return Err(Error::GpdNonConvergence(
            "need at least two finite nonnegative excesses".into(),
        ));
    }
    let mean = excess.iter().sum::<f64>() / excess.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::GpdNonConvergence("all excesses are zero".into()));
    }
    let start = moments(excess);
    let (xi0, beta0) = start.map_or((0.0, mean), |m| (m.xi.clamp(-0.4, 0.9), m.beta));
    // search over (ln(beta / mean), xi)
    let f = |v: &[f64]| gpd_nll(excess, v[1], mean * v[0].exp());
    let ml = minimize(f, &[(beta0 / mean).ln(), xi0], &BfgsOptions::default())
        .or_else(|| minimize(f, &[0.0, 0.0], &BfgsOptions::default()));
    match ml {
        Some(m) if m.converged && m.x.iter().all(|v| v.is_finite()) && m.x[1] > -1.0 => {
            let (xi, beta) = polish(excess, m.x[1], mean * m.x[0].exp());
            Ok(GpdFit {
                xi,
                beta,
                method: GpdMethod::MaximumLikelihood,
            })
        }
        _ => start.ok_or_else(|| Error::GpdNonConvergence("likelihood and moment fits both failed".into())),
    }
}

/// Threshold and GPD fit for the `k` largest observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvtTail {
    pub threshold: f64,
    pub k: usize,
    pub m: usize,
    pub gpd: GpdFit,
}

impl EvtTail {
    /// `u + beta/xi ((k/(m theta))^xi - 1)`, with the `xi -> 0` limit.
    pub fn quantile(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidArgument(format!("theta {theta} outside (0, 1)")));
        }
        let l = (self.k as f64 / (self.m as f64 * theta)).ln();
        let GpdFit { xi, beta, .. } = self.gpd;
        let scale = if xi.abs() < 1e-12 { l } else { (xi * l).exp_m1() / xi };
        Ok(self.threshold + beta * scale)
    }
}

/// Fits the tail: the threshold is the `(k+1)`-th largest observation, so
/// exactly the `k` largest contribute excesses.
pub fn evt_tail(residuals: &[f64], k: usize) -> Result<EvtTail> {
    let m = residuals.len();
    if k < 10 || k >= m {
        return Err(Error::TooFewExceedances { k, m });
    }
    if let Some(j) = residuals.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: j, col: 0 });
    }
    let mut sorted = residuals.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let threshold = sorted[k];
    let excess: Vec<f64> = sorted[..k].iter().map(|x| x - threshold).collect();
    Ok(EvtTail {
        threshold,
        k,
        m,
        gpd: fit_gpd(&excess)?,
    })
}

pub fn evt_var(residuals: &[f64], theta: f64, k: usize) -> Result<f64> {
    evt_tail(residuals, k)?.quantile(theta)
}
