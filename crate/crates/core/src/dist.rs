//! Standard-normal helpers shared across modules.

use statrs::function::erf::erfc_inv;

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail `1 - Phi(x)` without cancellation.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `Phi^{-1}(p)` for `p` in (0, 1).
pub fn norm_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((norm_quantile(0.975) - 1.959963984540054).abs() < 1e-12);
        assert!((norm_quantile(0.99) - 2.326347874040841).abs() < 1e-12);
        assert_eq!(norm_quantile(0.5), 0.0);
        assert!((norm_cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((norm_sf(5.0) - 2.866515718791939e-7).abs() < 1e-20);
    }
}
