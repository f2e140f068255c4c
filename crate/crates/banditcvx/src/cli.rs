//! Config-driven experiment runner: TOML in, trace/summary CSVs out.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::algorithm::{PenaltyEvalPoint, RunOptions, TraceRecord};
use crate::baselines::{run_baseline, BaselineKind};
use crate::error::{Error, Result};
use crate::experiments::{
    compute_metrics, fit_growth_exponent, generate, offline_optimum, SuiteSpec,
};
use crate::problem::ProblemInstance;
use crate::schedule::{Mode, ScheduleParams};

pub const TRACE_HEADER: &str =
    "t,x,lambda,alpha,gamma,eta,loss_plus,loss_minus,g_at_x,g_plus,solver_method,solver_gap";
pub const SUMMARY_HEADER: &str =
    "algorithm,seed,T,regret,v_hard,v_soft,slope_regret,slope_vhard,r2_regret,r2_vhard";

const COMPARATOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmChoice {
    Main,
    FullInfoRectified,
    UnconstrainedTwoPoint,
    ProjectedOgd,
}

impl AlgorithmChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmChoice::Main => "main",
            AlgorithmChoice::FullInfoRectified => "full_info_rectified",
            AlgorithmChoice::UnconstrainedTwoPoint => "unconstrained_two_point",
            AlgorithmChoice::ProjectedOgd => "projected_ogd",
        }
    }
}

/// Schedule knobs as they appear in the config file; horizon-dependent
/// defaults (`delta = 1/T`, `xi = delta/R`) are filled in per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub xi: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
}

fn default_mode() -> Mode {
    Mode::Convex
}
fn default_c() -> f64 {
    0.5
}
fn default_epsilon() -> f64 {
    0.05
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            c: default_c(),
            epsilon: default_epsilon(),
            delta: None,
            xi: None,
            sigma: None,
        }
    }
}

impl ScheduleConfig {
    /// Concrete per-horizon parameters. `suite_sigma` is the generator's
    /// certified modulus, used when the config does not pin one.
    pub fn resolve(
        &self,
        horizon: usize,
        radius: f64,
        suite_sigma: Option<f64>,
    ) -> ScheduleParams {
        let mut p = ScheduleParams::with_defaults(
            self.mode,
            self.sigma.or(suite_sigma),
            horizon,
            radius,
        );
        p.c = self.c;
        p.epsilon = self.epsilon;
        if let Some(delta) = self.delta {
            p.delta = delta;
            p.xi = self.xi.unwrap_or(delta / radius);
        } else if let Some(xi) = self.xi {
            p.xi = xi;
        }
        p
    }
}

/// A full experiment description. Everything has a default except the suite
/// family and the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub suite: SuiteSpec,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default = "default_algorithm")]
    pub algorithm: AlgorithmChoice,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Horizons to run; each gets its own trace file. Defaults to the
    /// suite's `t`.
    #[serde(default)]
    pub checkpoints: Option<Vec<usize>>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub penalty_eval_point: PenaltyEvalPoint,
}

fn default_algorithm() -> AlgorithmChoice {
    AlgorithmChoice::Main
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn trace_file_name(algorithm: &str, seed: u64, horizon: usize) -> String {
    format!("trace_{algorithm}_seed{seed}_T{horizon}.csv")
}

/// Writes a trace in the fixed CSV schema: LF endings, 17-significant-digit
/// floats, byte-identical for identical traces.
pub fn write_trace_csv(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for rec in trace {
        let x = rec
            .x
            .iter()
            .map(|v| fmt(*v))
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            rec.t,
            x,
            fmt(rec.lambda),
            fmt(rec.alpha),
            fmt(rec.gamma),
            fmt(rec.eta),
            fmt(rec.loss_plus),
            fmt(rec.loss_minus),
            fmt(rec.g_at_x),
            fmt(rec.g_plus),
            rec.solver_method.as_str(),
            fmt(rec.solver_gap),
        ));
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn run_once(
    choice: AlgorithmChoice,
    instance: &ProblemInstance,
    params: &ScheduleParams,
    opts: &RunOptions,
    seed: u64,
) -> Result<Vec<TraceRecord>> {
    // Stream 1 keeps the algorithm's draws independent of the generator,
    // which consumes stream 0 of the same seed.
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let x_init = instance.domain.center().to_vec();
    let result = match choice {
        AlgorithmChoice::Main => crate::algorithm::run(instance, params, &x_init, opts, &mut rng),
        AlgorithmChoice::FullInfoRectified => run_baseline(
            BaselineKind::FullInfoRectified,
            instance,
            params,
            &x_init,
            opts,
            &mut rng,
        ),
        AlgorithmChoice::UnconstrainedTwoPoint => run_baseline(
            BaselineKind::UnconstrainedTwoPoint,
            instance,
            params,
            &x_init,
            opts,
            &mut rng,
        ),
        AlgorithmChoice::ProjectedOgd => run_baseline(
            BaselineKind::ProjectedOgd,
            instance,
            params,
            &x_init,
            opts,
            &mut rng,
        ),
    };
    result.map_err(|aborted| aborted.cause)
}

struct JobResult {
    seed: u64,
    horizon: usize,
    regret: f64,
    v_hard: f64,
    v_soft: f64,
}

fn run_job(cfg: &RunConfig, seed: u64, horizon: usize, out_path: &Path) -> Result<JobResult> {
    let mut spec = cfg.suite.clone();
    spec.seed = seed;
    spec.horizon = horizon;
    let suite = generate(&spec)?;
    let instance = &suite.instance;
    let params = cfg
        .schedule
        .resolve(horizon, instance.domain.radius(), suite.sigma);
    let opts = RunOptions {
        penalty_eval_point: cfg.penalty_eval_point,
        ..RunOptions::default()
    };
    let trace = run_once(cfg.algorithm, instance, &params, &opts, seed)?;
    write_trace_csv(out_path, &trace)?;
    let (x_star, _) = offline_optimum(instance, COMPARATOR_TOL)?;
    let metrics = compute_metrics(&trace, instance, Some(&x_star))?;
    Ok(JobResult {
        seed,
        horizon,
        regret: metrics.final_regret(),
        v_hard: metrics.final_v_hard(),
        v_soft: metrics.final_v_soft(),
    })
}

fn fit_or_nan(points: &[(f64, f64)]) -> (f64, f64) {
    fit_growth_exponent(points).unwrap_or((f64::NAN, f64::NAN))
}

fn summary_line(
    algorithm: &str,
    seed: &str,
    horizon: usize,
    regret: f64,
    v_hard: f64,
    v_soft: f64,
    fits: (f64, f64, f64, f64),
) -> String {
    let (slope_r, r2_r, slope_v, r2_v) = fits;
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        algorithm,
        seed,
        horizon,
        fmt(regret),
        fmt(v_hard),
        fmt(v_soft),
        fmt(slope_r),
        fmt(slope_v),
        fmt(r2_r),
        fmt(r2_v),
    )
}

/// Runs every (seed, horizon) job, writing one trace CSV per job and a
/// summary CSV. Validates the whole config before any run starts; on any
/// failure the files created by this invocation are removed.
pub fn run_experiment(cfg: &RunConfig, parallel: Option<usize>) -> Result<()> {
    if cfg.seeds.is_empty() {
        return Err(Error::Config("seeds must be nonempty".into()));
    }
    let checkpoints = cfg
        .checkpoints
        .clone()
        .unwrap_or_else(|| vec![cfg.suite.horizon]);
    if checkpoints.is_empty() {
        return Err(Error::Config("checkpoints must be nonempty".into()));
    }

    // Validation pass: every (seed, horizon) pair must produce a valid
    // instance and schedule before anything touches the filesystem.
    for &horizon in &checkpoints {
        let mut spec = cfg.suite.clone();
        spec.horizon = horizon;
        let suite = generate(&spec)?;
        let params = cfg
            .schedule
            .resolve(horizon, suite.instance.domain.radius(), suite.sigma);
        crate::schedule::validate(&params, &suite.instance.domain)?;
    }

    fs::create_dir_all(&cfg.output_dir)?;
    let created: Mutex<Vec<PathBuf>> = Mutex::new(Vec::new());
    let cleanup = |created: &Mutex<Vec<PathBuf>>| {
        for path in created.lock().unwrap().iter() {
            let _ = fs::remove_file(path);
        }
    };

    let run_all = || -> Result<Vec<JobResult>> {
        let config_copy = cfg.output_dir.join("config.toml");
        let text = toml::to_string_pretty(cfg).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(&config_copy, text)?;
        created.lock().unwrap().push(config_copy);

        let jobs: Vec<(u64, usize, PathBuf)> = cfg
            .seeds
            .iter()
            .flat_map(|&s| {
                checkpoints.iter().map(move |&h| {
                    let name = trace_file_name(cfg.algorithm.as_str(), s, h);
                    (s, h, cfg.output_dir.join(name))
                })
            })
            .collect();

        let worker = |(seed, horizon, path): &(u64, usize, PathBuf)| -> Result<JobResult> {
            created.lock().unwrap().push(path.clone());
            run_job(cfg, *seed, *horizon, path)
        };
        let mut results: Vec<JobResult> = match parallel {
            Some(n) => {
                use rayon::prelude::*;
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::Config(e.to_string()))?;
                pool.install(|| jobs.par_iter().map(worker).collect::<Result<Vec<_>>>())?
            }
            None => jobs.iter().map(worker).collect::<Result<Vec<_>>>()?,
        };
        results.sort_by_key(|r| (r.seed, r.horizon));
        Ok(results)
    };

    let results = match run_all() {
        Ok(r) => r,
        Err(e) => {
            cleanup(&created);
            return Err(e);
        }
    };

    // Growth fits per seed across horizons; fewer than 3 checkpoints (or
    // nonpositive values) yield NaN columns.
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for &seed in &cfg.seeds {
        let rows: Vec<&JobResult> = results.iter().filter(|r| r.seed == seed).collect();
        let regret_pts: Vec<(f64, f64)> =
            rows.iter().map(|r| (r.horizon as f64, r.regret)).collect();
        let vhard_pts: Vec<(f64, f64)> =
            rows.iter().map(|r| (r.horizon as f64, r.v_hard)).collect();
        let (slope_r, r2_r) = fit_or_nan(&regret_pts);
        let (slope_v, r2_v) = fit_or_nan(&vhard_pts);
        for r in rows {
            out.push_str(&summary_line(
                cfg.algorithm.as_str(),
                &r.seed.to_string(),
                r.horizon,
                r.regret,
                r.v_hard,
                r.v_soft,
                (slope_r, r2_r, slope_v, r2_v),
            ));
            out.push('\n');
        }
    }
    let summary_path = cfg.output_dir.join("summary.csv");
    if let Err(e) = fs::write(&summary_path, out) {
        created.lock().unwrap().push(summary_path);
        cleanup(&created);
        return Err(e.into());
    }
    Ok(())
}

struct ParsedTrace {
    algorithm: String,
    seed: u64,
    horizon: usize,
    xs: Vec<Vec<f64>>,
    g_at_x: Vec<f64>,
    g_plus: Vec<f64>,
}

fn schema_err(path: &Path, detail: impl Into<String>) -> Error {
    Error::TraceSchema {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

fn parse_trace_file(path: &Path) -> Result<ParsedTrace> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| schema_err(path, "unreadable file name"))?;
    let body = stem
        .strip_prefix("trace_")
        .ok_or_else(|| schema_err(path, "trace files are named trace_<algo>_seed<s>_T<T>.csv"))?;
    let mut parts = body.rsplitn(3, '_');
    let t_part = parts.next().unwrap_or("");
    let seed_part = parts.next().unwrap_or("");
    let algorithm = parts.next().unwrap_or("").to_string();
    let horizon: usize = t_part
        .strip_prefix('T')
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| schema_err(path, "missing T<horizon> suffix"))?;
    let seed: u64 = seed_part
        .strip_prefix("seed")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| schema_err(path, "missing seed<n> component"))?;
    if algorithm.is_empty() {
        return Err(schema_err(path, "missing algorithm component"));
    }

    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| schema_err(path, "empty file"))?;
    if header != TRACE_HEADER {
        return Err(schema_err(
            path,
            format!("unexpected header: {header}"),
        ));
    }
    let mut xs = Vec::new();
    let mut g_at_x = Vec::new();
    let mut g_plus = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(schema_err(
                path,
                format!("row {} has {} fields, expected 12", i + 2, fields.len()),
            ));
        }
        let t: usize = fields[0]
            .parse()
            .map_err(|_| schema_err(path, format!("bad round index in row {}", i + 2)))?;
        if t != i + 1 {
            return Err(schema_err(path, format!("rounds out of order at row {}", i + 2)));
        }
        let x: Vec<f64> = fields[1]
            .split(';')
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| schema_err(path, format!("bad iterate in row {}", i + 2)))?;
        let ga: f64 = fields[8]
            .parse()
            .map_err(|_| schema_err(path, format!("bad g_at_x in row {}", i + 2)))?;
        let gp: f64 = fields[9]
            .parse()
            .map_err(|_| schema_err(path, format!("bad g_plus in row {}", i + 2)))?;
        xs.push(x);
        g_at_x.push(ga);
        g_plus.push(gp);
    }
    if xs.len() != horizon {
        return Err(schema_err(
            path,
            format!("file name promises T={horizon} but {} rows found", xs.len()),
        ));
    }
    Ok(ParsedTrace {
        algorithm,
        seed,
        horizon,
        xs,
        g_at_x,
        g_plus,
    })
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Reads every trace CSV in a directory and builds the summary table:
/// per (algorithm, seed, T) finals, then per-algorithm medians across seeds
/// with growth exponents fitted on the median curves. Regret needs the run
/// config (config.toml alongside the traces) to rebuild the oracles; without
/// it the regret columns are NaN.
pub fn summarize(input_dir: &Path) -> Result<String> {
    let mut paths: Vec<PathBuf> = fs::read_dir(input_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("trace_") && n.ends_with(".csv"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "no trace files found in {}",
            input_dir.display()
        )));
    }
    let traces: Vec<ParsedTrace> = paths
        .iter()
        .map(|p| parse_trace_file(p))
        .collect::<Result<_>>()?;

    let config_path = input_dir.join("config.toml");
    let cfg = if config_path.exists() {
        Some(load_config(&config_path)?)
    } else {
        None
    };

    struct Final {
        regret: f64,
        v_hard: f64,
        v_soft: f64,
    }
    // (algorithm, seed, horizon) -> finals, ordered for stable output.
    let mut finals: BTreeMap<(String, u64, usize), Final> = BTreeMap::new();
    for tr in &traces {
        let v_hard: f64 = tr.g_plus.iter().sum();
        let v_soft: f64 = tr.g_at_x.iter().sum();
        let regret = match &cfg {
            Some(cfg) => {
                let mut spec = cfg.suite.clone();
                spec.seed = tr.seed;
                spec.horizon = tr.horizon;
                let suite = generate(&spec)?;
                let instance = &suite.instance;
                let (x_star, _) = offline_optimum(instance, COMPARATOR_TOL)?;
                let mut r = 0.0;
                for (i, x) in tr.xs.iter().enumerate() {
                    let (fx, _) = instance.full_loss(i + 1, x)?;
                    let (fs_, _) = instance.full_loss(i + 1, &x_star)?;
                    r += fx - fs_;
                }
                r
            }
            None => f64::NAN,
        };
        finals.insert(
            (tr.algorithm.clone(), tr.seed, tr.horizon),
            Final {
                regret,
                v_hard,
                v_soft,
            },
        );
    }

    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');

    let algorithms: Vec<String> = {
        let mut v: Vec<String> = finals.keys().map(|k| k.0.clone()).collect();
        v.dedup();
        v
    };
    for algo in &algorithms {
        let entries: Vec<(&(String, u64, usize), &Final)> =
            finals.iter().filter(|(k, _)| &k.0 == algo).collect();

        // Per-seed fits across horizons.
        let seeds: Vec<u64> = {
            let mut v: Vec<u64> = entries.iter().map(|(k, _)| k.1).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        for &seed in &seeds {
            let rows: Vec<(usize, &Final)> = entries
                .iter()
                .filter(|(k, _)| k.1 == seed)
                .map(|(k, f)| (k.2, *f))
                .collect();
            let regret_pts: Vec<(f64, f64)> =
                rows.iter().map(|(h, f)| (*h as f64, f.regret)).collect();
            let vhard_pts: Vec<(f64, f64)> =
                rows.iter().map(|(h, f)| (*h as f64, f.v_hard)).collect();
            let (sr, r2r) = fit_or_nan(&regret_pts);
            let (sv, r2v) = fit_or_nan(&vhard_pts);
            for (h, f) in rows {
                out.push_str(&summary_line(
                    algo,
                    &seed.to_string(),
                    h,
                    f.regret,
                    f.v_hard,
                    f.v_soft,
                    (sr, r2r, sv, r2v),
                ));
                out.push('\n');
            }
        }

        // Median across seeds at each horizon, fits on the median curves.
        let horizons: Vec<usize> = {
            let mut v: Vec<usize> = entries.iter().map(|(k, _)| k.2).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let med_rows: Vec<(usize, f64, f64, f64)> = horizons
            .iter()
            .map(|&h| {
                let mut r: Vec<f64> = entries
                    .iter()
                    .filter(|(k, _)| k.2 == h)
                    .map(|(_, f)| f.regret)
                    .collect();
                let mut vh: Vec<f64> = entries
                    .iter()
                    .filter(|(k, _)| k.2 == h)
                    .map(|(_, f)| f.v_hard)
                    .collect();
                let mut vs: Vec<f64> = entries
                    .iter()
                    .filter(|(k, _)| k.2 == h)
                    .map(|(_, f)| f.v_soft)
                    .collect();
                (h, median(&mut r), median(&mut vh), median(&mut vs))
            })
            .collect();
        let regret_pts: Vec<(f64, f64)> =
            med_rows.iter().map(|(h, r, _, _)| (*h as f64, *r)).collect();
        let vhard_pts: Vec<(f64, f64)> =
            med_rows.iter().map(|(h, _, v, _)| (*h as f64, *v)).collect();
        let (sr, r2r) = fit_or_nan(&regret_pts);
        let (sv, r2v) = fit_or_nan(&vhard_pts);
        for (h, r, vh, vs) in med_rows {
            out.push_str(&summary_line(algo, "median", h, r, vh, vs, (sr, r2r, sv, r2v)));
            out.push('\n');
        }
    }
    Ok(out)
}
