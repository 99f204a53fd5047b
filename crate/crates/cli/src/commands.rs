use std::fs;
use std::io::Write;
use std::path::Path;

use poolmax::backtest::full_backtest;
use poolmax::riskmodels::{garch_fit_with, rolling_forecasts_multi, GarchOptions, RollingConfig, VarMethod};
use poolmax::simlab::{run_sweep, DgpSpec, Model};
use poolmax::subsets::{gcd, nearest_coprime, verify_identifiability};
use poolmax::{
    build_family, marginal_test, naive_test, pool_test, BootstrapConfig, DataMatrix, Error, RngSpec, SubsetFamily,
    TestResult,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::ingest::{ingest_panel, read_groups, write_panel};
use crate::{
    BacktestArgs, CliError, Command, DesignArgs, Format, MarginalTestArgs, NaiveTestArgs, OutputArgs, PoolTestArgs,
    SimulateArgs, SubsetsCheckArgs, TaildepArgs,
};

const STREAM_FAMILY: u64 = 1;
const STREAM_BOOTSTRAP: u64 = 2;
const STREAM_GARCH: u64 = 3;

pub(crate) fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::PoolTest(a) => pool(a),
        Command::NaiveTest(a) => naive(a),
        Command::MarginalTest(a) => marginal(a),
        Command::Backtest(a) => backtest(a),
        Command::Taildep(a) => taildep(a),
        Command::SubsetsCheck(a) => subsets_check(a),
    }
}

fn emit(out: &OutputArgs, body: &str) -> Result<(), CliError> {
    match &out.out {
        Some(path) => fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Core(e.into()))?;
    s.push('\n');
    Ok(s)
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--alpha {alpha} must lie in (0, 1)")))
    }
}

fn check_replicates(b: usize) -> Result<(), CliError> {
    if b == 0 {
        Err(CliError::Usage("--B must be positive".into()))
    } else {
        Ok(())
    }
}

/// Validates the design against `p`, suggesting the nearest coprime `q`.
fn design_family(p: usize, design: &DesignArgs, seed: u64) -> Result<SubsetFamily, CliError> {
    let q = design.q;
    if q >= 1 && q < p && gcd(p, q) != 1 {
        let mut msg = Error::NotCoprime { p, q, gcd: gcd(p, q) }.to_string();
        if let Some(c) = nearest_coprime(p, q) {
            msg.push_str(&format!("; nearest coprime choice is --q {c}"));
        }
        return Err(CliError::Usage(msg));
    }
    let d = design.d.unwrap_or(2 * p);
    Ok(build_family(p, q, d, RngSpec::new(seed).substream(STREAM_FAMILY))?)
}

fn bootstrap(replicates: usize, seed: u64) -> BootstrapConfig {
    BootstrapConfig::new(replicates, RngSpec::new(seed).substream(STREAM_BOOTSTRAP))
}

fn test_csv(r: &TestResult) -> String {
    format!(
        "method,statistic,critical_value,p_value,reject,alpha\n{},{},{},{},{},{}\n",
        r.method_tag, r.statistic, r.critical_value, r.p_value, r.reject, r.alpha
    )
}

fn emit_test(out: &OutputArgs, mut r: TestResult, keep_per_subset: bool) -> Result<(), CliError> {
    if !keep_per_subset {
        r.per_subset_t = None;
    }
    let body = match out.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&r)?,
        Format::Csv => test_csv(&r),
    };
    emit(out, &body)
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let model: Model = a.model.parse()?;
    check_alpha(a.alpha)?;
    check_replicates(a.replicates)?;
    let spec = DgpSpec {
        model,
        n: a.n,
        p: a.p,
        p0: a.p0,
        alpha_n: a.alpha_n,
        under_null: a.null,
        rng: RngSpec::new(a.seed),
    };
    spec.validate()?;
    let d_grid = if a.d.is_empty() { vec![2 * a.p] } else { a.d.clone() };
    let result = run_sweep(&spec, &a.q, &d_grid, a.alpha, a.replicates, a.mc_reps)?;
    let body = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => result.to_csv(),
        Format::Json => to_json(&result)?,
    };
    emit(&a.output, &body)
}

fn pool(a: PoolTestArgs) -> Result<(), CliError> {
    check_alpha(a.alpha)?;
    check_replicates(a.design.replicates)?;
    let panel = ingest_panel(&a.input)?;
    let fam = design_family(panel.data.n_cols(), &a.design, a.seed)?;
    let r = pool_test(&panel.data, &fam, a.alpha, &bootstrap(a.design.replicates, a.seed))?;
    emit_test(&a.output, r, a.per_subset)
}

fn naive(a: NaiveTestArgs) -> Result<(), CliError> {
    check_alpha(a.alpha)?;
    let panel = ingest_panel(&a.input)?;
    emit_test(&a.output, naive_test(&panel.data, a.alpha)?, false)
}

fn marginal(a: MarginalTestArgs) -> Result<(), CliError> {
    check_alpha(a.alpha)?;
    check_replicates(a.replicates)?;
    let panel = ingest_panel(&a.input)?;
    let r = marginal_test(&panel.data, a.alpha, &bootstrap(a.replicates, a.seed))?;
    emit_test(&a.output, r, a.per_subset)
}

fn parse_forecast_flag(s: &str) -> Result<(String, &Path), CliError> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), Path::new(path))),
        _ => Err(CliError::Usage(format!("--forecast expects NAME=PATH, got '{s}'"))),
    }
}

/// Rolling forecasts per asset (in parallel) and method.
fn compute_forecasts(
    losses: &DataMatrix,
    methods: &[VarMethod],
    cfg: &RollingConfig,
    theta0: f64,
    seed: u64,
) -> Result<Vec<DataMatrix>, CliError> {
    let per_asset: Vec<Vec<Vec<f64>>> = (0..losses.n_cols())
        .into_par_iter()
        .map(|j| {
            let cfg = RollingConfig {
                garch: GarchOptions {
                    rng: RngSpec::new(seed).substream(STREAM_GARCH).substream(j as u64),
                    ..cfg.garch
                },
                ..*cfg
            };
            rolling_forecasts_multi(&losses.column(j), &cfg, methods, theta0)
        })
        .collect::<Result<_, Error>>()?;
    (0..methods.len())
        .map(|k| {
            let cols: Vec<&Vec<f64>> = per_asset.iter().map(|a| &a[k]).collect();
            DataMatrix::from_columns(&cols).map_err(CliError::from)
        })
        .collect()
}

fn backtest(a: BacktestArgs) -> Result<(), CliError> {
    check_alpha(a.alpha)?;
    check_replicates(a.design.replicates)?;
    if !(a.theta0 > 0.0 && a.theta0 < 1.0) {
        return Err(CliError::Usage(format!("--theta0 {} must lie in (0, 1)", a.theta0)));
    }
    let flags: Vec<(String, &Path)> = a
        .forecasts
        .iter()
        .map(|s| parse_forecast_flag(s))
        .collect::<Result<_, _>>()?;
    let methods: Vec<VarMethod> = if flags.is_empty() {
        a.methods
            .iter()
            .map(|m| m.parse::<VarMethod>())
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    if flags.is_empty() && methods.is_empty() {
        return Err(CliError::Usage("no forecasts: pass --forecast or --methods".into()));
    }
    if a.refit_every == 0 {
        return Err(CliError::Usage("--refit-every must be positive".into()));
    }

    let losses = ingest_panel(&a.input)?;
    let (u, forecasts) = if flags.is_empty() {
        let rows = losses.data.n_rows();
        let horizon = a.horizon.unwrap_or(rows.saturating_sub(a.window));
        let mut cfg = RollingConfig::new(a.window, horizon);
        cfg.refit_every = a.refit_every;
        let panels = compute_forecasts(&losses.data, &methods, &cfg, a.theta0, a.seed)?;
        let u = losses.data.slice_rows(rows - horizon, rows)?;
        let named: Vec<(String, DataMatrix)> = methods.iter().map(|m| m.name().to_string()).zip(panels).collect();
        if let Some(dir) = &a.save_forecasts {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            for (name, panel) in &named {
                write_panel(&dir.join(format!("{name}.csv")), &losses.ids, panel)?;
            }
        }
        (u, named)
    } else {
        let mut named = Vec::new();
        for (name, path) in flags {
            named.push((name, ingest_panel(path)?.data));
        }
        (losses.data, named)
    };

    let fam = design_family(u.n_cols(), &a.design, a.seed)?;
    let report = full_backtest(
        &u,
        &forecasts,
        a.theta0,
        &fam,
        a.alpha,
        &bootstrap(a.design.replicates, a.seed),
    )?;
    let body = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => report.to_csv(),
        Format::Json => to_json(&report)?,
    };
    emit(&a.output, &body)
}

fn taildep(a: TaildepArgs) -> Result<(), CliError> {
    let panel = ingest_panel(&a.input)?;
    let z = if a.filter {
        let cols: Vec<Vec<f64>> = (0..panel.data.n_cols())
            .into_par_iter()
            .map(|j| {
                let opts = GarchOptions {
                    rng: RngSpec::new(a.seed).substream(STREAM_GARCH).substream(j as u64),
                    ..GarchOptions::default()
                };
                garch_fit_with(&panel.data.column(j), None, &opts).map(|f| f.residuals)
            })
            .collect::<Result<_, Error>>()?;
        DataMatrix::from_columns(&cols)?
    } else {
        panel.data
    };
    let lambda = poolmax::backtest::tail_dependence(&z, a.u)?;
    let groups = a.groups.as_deref().map(|g| read_groups(g, &panel.ids)).transpose()?;
    let body = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => poolmax::backtest::tail_dependence_csv(&panel.ids, &lambda, groups.as_deref())?,
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                ids: &'a [String],
                groups: Option<&'a [String]>,
                u: f64,
                lambda: &'a [Vec<f64>],
            }
            to_json(&Out {
                ids: &panel.ids,
                groups: groups.as_deref(),
                u: a.u,
                lambda: &lambda,
            })?
        }
    };
    emit(&a.output, &body)
}

fn subsets_check(a: SubsetsCheckArgs) -> Result<(), CliError> {
    let r = verify_identifiability(a.p, a.q, a.bound)?;
    #[derive(Serialize)]
    struct Out {
        p: usize,
        q: usize,
        gcd: usize,
        identifiable: bool,
        witness: Option<Vec<f64>>,
    }
    let out = Out {
        p: a.p,
        q: a.q,
        gcd: gcd(a.p, a.q),
        identifiable: r.identifiable,
        witness: r.witness,
    };
    let body = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&out)?,
        Format::Csv => format!(
            "p,q,gcd,identifiable\n{},{},{},{}\n",
            out.p, out.q, out.gcd, out.identifiable
        ),
    };
    emit(&a.output, &body)
}
