//! Simulation laboratory: the A1/A2/B1/B2 generating processes and the
//! size/power sweep harness.

mod dgp;
mod sweep;

pub use dgp::{
    g_transform, generate, model_a, model_b, mu_profile, sample_gaussian, sigma1, sigma2, theta_profile, DgpSpec,
    GaussianSampler, Model, BASE_THETA,
};
pub use sweep::{run_sweep, SweepResult, SweepRow};
