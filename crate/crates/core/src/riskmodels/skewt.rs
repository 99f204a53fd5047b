//! Standardized skew-t distribution (Fernandez–Steel skewing of a
//! unit-variance Student t, recentred and rescaled to mean 0, variance 1).
//!
//! With skewness `gamma`, the unstandardized variable `z` has density
//! `2/(gamma + 1/gamma) * f(z / gamma^{sign z})`, so `P(z < 0) = 1/(1+gamma^2)`.
//! The standardized variable is `x = (z - mu) / sigma` where
//!
//! ```text
//! m1    = E|t_std| = 2 sqrt(nu-2) Gamma((nu+1)/2) / ((nu-1) sqrt(pi) Gamma(nu/2))
//! mu    = m1 (gamma - 1/gamma)
//! sigma = sqrt((1 - m1^2)(gamma^2 + 1/gamma^2) + 2 m1^2 - 1)
//! ```
//!
//! `nu = +inf` gives the skew-normal-type limit built on `N(0, 1)`.

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::dist::{norm_cdf, norm_quantile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewT {
    nu: f64,
    gamma: f64,
    mu: f64,
    sigma: f64,
    /// `ln` of the t density normalizing constant (unit-variance scale).
    ln_norm: f64,
    /// `sqrt(nu / (nu - 2))`, 1 for `nu = inf`.
    unit: f64,
}

impl SkewT {
    pub fn new(nu: f64, gamma: f64) -> Result<Self> {
        if !(nu > 2.0) || nu.is_nan() || !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::BadParams(format!(
                "need nu > 2 and gamma > 0, got nu = {nu}, gamma = {gamma}"
            )));
        }
        let (m1, ln_norm, unit) = if nu.is_infinite() {
            ((2.0 / PI).sqrt(), -0.5 * (2.0 * PI).ln(), 1.0)
        } else {
            let lg = ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0);
            let m1 = 2.0 * (nu - 2.0).sqrt() * lg.exp() / ((nu - 1.0) * PI.sqrt());
            (m1, lg - 0.5 * (PI * (nu - 2.0)).ln(), (nu / (nu - 2.0)).sqrt())
        };
        let mu = m1 * (gamma - 1.0 / gamma);
        let sigma = ((1.0 - m1 * m1) * (gamma * gamma + 1.0 / (gamma * gamma)) + 2.0 * m1 * m1 - 1.0).sqrt();
        Ok(Self {
            nu,
            gamma,
            mu,
            sigma,
            ln_norm,
            unit,
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn g(&self) -> f64 {
        2.0 / (self.gamma + 1.0 / self.gamma)
    }

    /// Log density of the unit-variance t at `y`.
    #[inline]
    fn ln_std_pdf(&self, y: f64) -> f64 {
        if self.nu.is_infinite() {
            self.ln_norm - 0.5 * y * y
        } else {
            self.ln_norm - 0.5 * (self.nu + 1.0) * (y * y / (self.nu - 2.0)).ln_1p()
        }
    }

    /// CDF of the unit-variance t, accurate in the lower tail.
    fn std_cdf_lower(&self, y: f64) -> f64 {
        if self.nu.is_infinite() {
            return norm_cdf(y);
        }
        let t = y * self.unit;
        let h = self.nu / (self.nu + t * t);
        let ib = 0.5 * beta_reg(self.nu / 2.0, 0.5, h);
        if t <= 0.0 {
            ib
        } else {
            1.0 - ib
        }
    }

    /// Quantile of the unit-variance t for `p` in (0, 0.5].
    fn std_quantile_lower(&self, p: f64) -> f64 {
        if self.nu.is_infinite() {
            return norm_quantile(p);
        }
        let mut y = if self.nu > 1e3 {
            norm_quantile(p)
        } else {
            StudentsT::new(0.0, 1.0, self.nu)
                .map(|t| t.inverse_cdf(p) / self.unit)
                .unwrap_or_else(|_| norm_quantile(p))
        };
        // Newton polish on the unit-variance scale
        for _ in 0..8 {
            let f = self.std_cdf_lower(y) - p;
            let d = self.ln_std_pdf(y).exp();
            if d <= 0.0 || !d.is_finite() {
                break;
            }
            let step = f / d;
            y -= step;
            if step.abs() <= 1e-15 * y.abs().max(1.0) {
                break;
            }
        }
        y
    }

    fn std_quantile(&self, p: f64) -> f64 {
        if p <= 0.5 {
            self.std_quantile_lower(p)
        } else {
            -self.std_quantile_lower(1.0 - p)
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = x * self.sigma + self.mu;
        let xi = if z < 0.0 { 1.0 / self.gamma } else { self.gamma };
        self.g().ln() + self.sigma.ln() + self.ln_std_pdf(z / xi)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = x * self.sigma + self.mu;
        let g = self.g();
        if z < 0.0 {
            g / self.gamma * self.std_cdf_lower(z * self.gamma)
        } else {
            1.0 - g * self.gamma * self.std_cdf_lower(-z / self.gamma)
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::BadParams(format!("probability {p} outside (0, 1)")));
        }
        let g = self.g();
        let z = if p < 1.0 / (1.0 + self.gamma * self.gamma) {
            self.std_quantile(p * self.gamma / g) / self.gamma
        } else {
            -self.gamma * self.std_quantile((1.0 - p) / (g * self.gamma))
        };
        Ok((z - self.mu) / self.sigma)
    }

    /// Location/scale constants `(mu, sigma)` of the standardization.
    pub fn standardization(&self) -> (f64, f64) {
        (self.mu, self.sigma)
    }
}

pub fn skewt_quantile(prob: f64, nu: f64, gamma: f64) -> Result<f64> {
    SkewT::new(nu, gamma)?.quantile(prob)
}

pub fn skewt_cdf(x: f64, nu: f64, gamma: f64) -> Result<f64> {
    Ok(SkewT::new(nu, gamma)?.cdf(x))
}
