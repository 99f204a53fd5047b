//! Monte Carlo size/power sweeps over `(q, d)` grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dgp::{generate, DgpSpec, GaussianSampler, Model};
use crate::error::{Error, Result};
use crate::pooltest::{marginal_test, naive_test, pool_test, BootstrapConfig};
use crate::result::{MethodTag, TestResult};
use crate::subsets::{build_family, gcd, SubsetFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: usize,
    pub d: usize,
    pub method: MethodTag,
    pub reject_rate: f64,
    /// Replications whose test hit a flat pooled component; these count as
    /// non-rejections in `reject_rate`.
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: Model,
    pub under_null: bool,
    pub alpha: f64,
    pub replicates: usize,
    pub mc_reps: usize,
    pub grid: Vec<(usize, usize)>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn rate(&self, q: usize, d: usize, method: MethodTag) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.q == q && r.d == d && r.method == method)
            .map(|r| r.reject_rate)
    }

    /// Long-format CSV: `model,q,d,method,alpha,mc_reps,reject_rate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,q,d,method,alpha,mc_reps,reject_rate\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.model.as_str(),
                r.q,
                r.d,
                r.method,
                self.alpha,
                self.mc_reps,
                r.reject_rate
            ));
        }
        out
    }
}

/// Outcome of one test inside one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Reject,
    Accept,
    Degenerate,
}

fn outcome(r: Result<TestResult>) -> Result<Outcome> {
    match r {
        Ok(t) if t.reject => Ok(Outcome::Reject),
        Ok(_) => Ok(Outcome::Accept),
        Err(Error::DegenerateVariance { .. }) => Ok(Outcome::Degenerate),
        Err(e) => Err(e),
    }
}

const STREAM_DATA: u64 = 0;
const STREAM_FAMILY: u64 = 1;
const STREAM_POOL: u64 = 2;
const STREAM_MARGINAL: u64 = 3;

/// Empirical rejection rates of the three tests on `mc_reps` datasets.
///
/// Grid points are the Cartesian product `q_grid x d_grid`. Every
/// replication draws one dataset from `spec.rng.substream(0).substream(rep)`
/// and evaluates all grid points and all methods on it. Each grid point's
/// random extension subsets are fixed across replications. The naive and
/// marginal tests do not depend on `(q, d)`, so their rates repeat across
/// grid rows.
pub fn run_sweep(
    spec: &DgpSpec,
    q_grid: &[usize],
    d_grid: &[usize],
    alpha: f64,
    replicates: usize,
    mc_reps: usize,
) -> Result<SweepResult> {
    spec.validate()?;
    let p = spec.p;
    let grid: Vec<(usize, usize)> = q_grid
        .iter()
        .flat_map(|&q| d_grid.iter().map(move |&d| (q, d)))
        .collect();
    for &(q, d) in &grid {
        let g = if q >= 1 && q < p { gcd(p, q) } else { 0 };
        if g != 1 {
            return Err(Error::NotCoprime { p, q, gcd: g });
        }
        if d < p {
            return Err(Error::DTooSmall { p, d });
        }
    }
    let mut result = SweepResult {
        model: spec.model,
        under_null: spec.under_null,
        alpha,
        replicates,
        mc_reps,
        grid: grid.clone(),
        rows: Vec::new(),
    };
    if mc_reps == 0 {
        return Ok(result);
    }

    let families: Vec<SubsetFamily> = grid
        .iter()
        .enumerate()
        .map(|(k, &(q, d))| build_family(p, q, d, spec.rng.substream(STREAM_FAMILY).substream(k as u64)))
        .collect::<Result<_>>()?;
    let sampler = GaussianSampler::new(&spec.model.covariance(p))?;

    // per replication: [pool outcome per grid point..., naive, marginal]
    let outcomes: Vec<Vec<Outcome>> = (0..mc_reps as u64)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Outcome>> {
            let x = generate(spec, &sampler, spec.rng.substream(STREAM_DATA).substream(rep))?;
            let mut out = Vec::with_capacity(families.len() + 2);
            for (k, fam) in families.iter().enumerate() {
                let rng = spec.rng.substream(STREAM_POOL).substream(rep).substream(k as u64);
                out.push(outcome(pool_test(
                    &x,
                    fam,
                    alpha,
                    &BootstrapConfig::new(replicates, rng),
                ))?);
            }
            out.push(outcome(naive_test(&x, alpha))?);
            let rng = spec.rng.substream(STREAM_MARGINAL).substream(rep);
            out.push(outcome(marginal_test(
                &x,
                alpha,
                &BootstrapConfig::new(replicates, rng),
            ))?);
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let tally = |col: usize| -> (f64, usize) {
        let rejects = outcomes.iter().filter(|o| o[col] == Outcome::Reject).count();
        let degenerate = outcomes.iter().filter(|o| o[col] == Outcome::Degenerate).count();
        (rejects as f64 / mc_reps as f64, degenerate)
    };
    let naive = tally(grid.len());
    let marginal = tally(grid.len() + 1);
    for (k, &(q, d)) in grid.iter().enumerate() {
        let pool = tally(k);
        for (method, (rate, degenerate)) in [
            (MethodTag::SubsetsPool, pool),
            (MethodTag::Naive, naive),
            (MethodTag::Marginal, marginal),
        ] {
            result.rows.push(SweepRow {
                q,
                d,
                method,
                reject_rate: rate,
                degenerate,
            });
        }
    }
    Ok(result)
}
