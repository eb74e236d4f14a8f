use std::path::{Path, PathBuf};

use msv_core::baselines::{forecast_baseline, BaselineModel};
use msv_core::covseq::{CovKind, CovSequence};
use msv_core::dgp::{simulate as run_dgp, DgpKind, DgpSpec};
use msv_core::estimator::MsvModel;
use msv_core::eval::{frobenius_distance, mcs as run_mcs, ForecastSet, McsOpts, McsStatistic};
use msv_core::panel::log_square_transform;
use msv_core::smoother::forecast as msv_forecast;
use ndarray::{s, Array2};
use rayon::prelude::*;

use crate::config::{required, BacktestConfig, FitConfig, ForecastConfig, McsConfig, SimulateConfig};
use crate::io::{read_covs_binary, read_panel, read_table, write_covs_binary, write_covs_csv, write_json, write_panel, write_table};
use crate::manifest::Manifest;
use crate::models::{fit_model, fit_shared, smoother_opts, zero_policy, Fitted, ModelChoice};
use crate::CliError;

const DEFAULT_REFIT_EVERY: usize = 20;
const DEFAULT_BACKTEST_MODELS: &str = "dcc,ols,scad,mcp";
const DEFAULT_DISTANCE_MODELS: &str = "dcc,ccc,ols,scad,mcp";

/// Runs `f` on a pool of `jobs` threads, or on the global pool.
fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("jobs must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn rep_dir(out: &Path, rep: u64) -> PathBuf {
    out.join(format!("rep-{rep:04}"))
}

pub fn simulate(cfg: &SimulateConfig, man: &mut Manifest) -> Result<(), CliError> {
    let kind = match required(cfg.kind.clone(), "kind")?.to_ascii_lowercase().as_str() {
        "march" => DgpKind::March { q_star: cfg.q_star.unwrap_or(2) },
        "bekk" => DgpKind::Bekk,
        "msv" => DgpKind::Msv,
        other => return Err(CliError::Config(format!("unknown process `{other}` (march, bekk, msv)"))),
    };
    let out = required(cfg.out.clone(), "out")?;
    let mut spec = DgpSpec::<f64>::new(kind, required(cfg.p, "p")?, required(cfg.t, "t")?, cfg.seed.unwrap_or(0));
    if let Some(b) = cfg.burn_in {
        spec.burn_in = b;
    }
    if let Some(s) = cfg.max_pd_share {
        spec.max_pd_share = s;
    }
    let reps = cfg.reps.unwrap_or(1);
    if reps == 0 {
        return Err(CliError::Config("reps must be at least 1".into()));
    }
    man.detail("dgp_spec", &spec);
    if kind == DgpKind::Bekk {
        man.detail("bekk_initialization", "H_0 = Omega, e_0 ~ N(0, I), then burn_in discarded periods");
    }
    let sims = with_jobs(cfg.jobs, || {
        (0..reps).into_par_iter().map(|r| run_dgp(&spec.clone().replication(r))).collect::<Vec<_>>()
    })?;
    man.lap("simulate");
    let mut counts = Vec::new();
    for (rep, sim) in sims.into_iter().enumerate() {
        let sim = sim?;
        let dir = rep_dir(&out, rep as u64);
        let returns = dir.join("returns.csv");
        let truth = dir.join("truth.bin");
        let params = dir.join("params.json");
        write_panel(&returns, &sim.panel)?;
        write_covs_binary(&truth, &sim.truth)?;
        write_json(&params, &sim.params)?;
        for p in [&returns, &truth, &params] {
            man.output(p);
        }
        counts.push(serde_json::json!({
            "replication": rep,
            "param_rejections": sim.param_rejections,
            "pd_redraws": sim.pd_redraws,
        }));
    }
    man.detail("replications", counts);
    man.lap("write");
    Ok(())
}

pub fn fit(cfg: &FitConfig, man: &mut Manifest) -> Result<(), CliError> {
    let data = required(cfg.data.clone(), "data")?;
    let out = required(cfg.out.clone(), "out")?;
    let choice = ModelChoice::parse(&required(cfg.model.clone(), "model")?)?;
    let panel = read_panel(&data)?;
    man.lap("read");
    let fitted = fit_model(choice, &cfg.est, &panel)?;
    man.lap("fit");
    fitted.save(&out)?;
    man.output(&out);
    if let Some(path) = &cfg.fitted {
        write_covs_csv(path, &fitted.in_sample())?;
        man.output(path);
    }
    man.detail("model", choice.name());
    man.detail("fit", fitted.summary());
    man.lap("write");
    Ok(())
}

pub fn forecast(cfg: &ForecastConfig, man: &mut Manifest) -> Result<(), CliError> {
    let model_path = required(cfg.model.clone(), "model")?;
    let out = required(cfg.out.clone(), "out")?;
    let horizon = required(cfg.horizon, "horizon")?;
    let text = std::fs::read_to_string(&model_path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", model_path.display())))?;
    let kind = serde_json::from_str::<serde_json::Value>(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", model_path.display())))?
        .get("kind")
        .and_then(|k| k.as_str().map(str::to_string))
        .ok_or_else(|| CliError::Data(format!("{}: no model kind", model_path.display())))?;
    let covs = if kind == "msv" {
        let model = MsvModel::<f64>::from_json(text.as_bytes()).map_err(|e| CliError::in_file(&model_path, e))?;
        let data = required(cfg.data.clone(), "data")?;
        let panel = read_panel(&data)?;
        if panel.dim() != model.p {
            return Err(CliError::Data(format!("{} has {} assets, the model {}", data.display(), panel.dim(), model.p)));
        }
        man.detail("same_sample_as_fit", panel.len() == model.meta.n_obs);
        let ylog = log_square_transform(&panel, zero_policy(cfg.zero_policy.as_deref())?)?;
        let opts = smoother_opts(cfg.backend.as_deref(), cfg.dense_threshold, cfg.cg_tol)?;
        man.lap("read");
        msv_forecast(&model, &ylog, horizon, &opts)?
    } else {
        let model = BaselineModel::<f64>::from_json(text.as_bytes()).map_err(|e| CliError::in_file(&model_path, e))?;
        if horizon == 0 {
            return Err(CliError::Config("forecast horizon must be at least 1".into()));
        }
        man.lap("read");
        forecast_baseline(&model, horizon)
    };
    man.lap("forecast");
    write_covs_csv(&out, &covs)?;
    man.output(&out);
    if let Some(bin) = &cfg.binary {
        write_covs_binary(bin, &covs)?;
        man.output(bin);
    }
    man.detail("model_kind", kind);
    man.lap("write");
    Ok(())
}

pub fn backtest(cfg: &BacktestConfig, man: &mut Manifest) -> Result<(), CliError> {
    let out = required(cfg.out.clone(), "out")?;
    match (&cfg.data, &cfg.sim_dir) {
        (Some(_), Some(_)) => Err(CliError::Config("give either data or sim_dir, not both".into())),
        (None, None) => Err(CliError::Config("missing required setting `data` or `sim_dir`".into())),
        (None, Some(dir)) => distance_table(cfg, dir, &out, man),
        (Some(data), None) => out_of_sample(cfg, data, &out, man),
    }
}

/// In-sample distance to the true covariances of every simulated
/// replication; one row per replication, one column per model.
fn distance_table(cfg: &BacktestConfig, dir: &Path, out: &Path, man: &mut Manifest) -> Result<(), CliError> {
    let models = ModelChoice::list(cfg.models.as_deref().unwrap_or(DEFAULT_DISTANCE_MODELS))?;
    let mut reps: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("cannot list {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("rep-")))
        .collect();
    reps.sort();
    if reps.is_empty() {
        return Err(CliError::Data(format!("{} holds no rep-* directories", dir.display())));
    }
    let rows = with_jobs(cfg.jobs, || {
        reps.par_iter()
            .map(|rep| -> Result<Vec<f64>, CliError> {
                let panel = read_panel(&rep.join("returns.csv"))?;
                let truth = read_covs_binary(&rep.join("truth.bin"), CovKind::Truth)?;
                models
                    .iter()
                    .map(|m| {
                        let fitted = fit_shared(*m, &cfg.est, &panel)
                            .map_err(|e| context(e, format!("{} ({})", rep.display(), m.name())))?;
                        Ok(frobenius_distance(&fitted.in_sample(), &truth)?)
                    })
                    .collect()
            })
            .collect::<Vec<_>>()
    })?;
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    man.lap("fit");
    let header: Vec<String> = models.iter().map(|m| m.name()).collect();
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|v| format!("{v}")).collect()).collect();
    let path = out.join("distances.csv");
    write_table(&path, &header, &cells)?;
    man.output(&path);
    let means: Vec<f64> = (0..models.len()).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / rows.len() as f64).collect();
    man.detail("replications", reps.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
    man.detail("mean_distance", header.iter().cloned().zip(means).collect::<std::collections::BTreeMap<_, _>>());
    Ok(())
}

/// Prefixes an error with where it happened, keeping its class.
fn context(e: CliError, ctx: String) -> CliError {
    match e {
        CliError::Core { source, .. } => CliError::Core { context: Some(ctx), source },
        CliError::Config(m) => CliError::Config(format!("{ctx}: {m}")),
        CliError::Data(m) => CliError::Data(format!("{ctx}: {m}")),
        CliError::Io(m) => CliError::Io(format!("{ctx}: {m}")),
    }
}

/// Refit schedule: `(first forecast row, horizon, training rows)`.
fn schedule(n: usize, window: usize, every: usize, rolling: bool) -> Vec<(usize, usize, std::ops::Range<usize>)> {
    (window..n)
        .step_by(every)
        .map(|s| {
            let h = every.min(n - s);
            let train = if rolling { s - window..s } else { 0..s };
            (s, h, train)
        })
        .collect()
}

fn out_of_sample(cfg: &BacktestConfig, data: &Path, out: &Path, man: &mut Manifest) -> Result<(), CliError> {
    let models = ModelChoice::list(cfg.models.as_deref().unwrap_or(DEFAULT_BACKTEST_MODELS))?;
    let panel = read_panel(data)?;
    let n = panel.len();
    let window = required(cfg.window, "window")?;
    let every = cfg.refit_every.unwrap_or(DEFAULT_REFIT_EVERY);
    if every == 0 {
        return Err(CliError::Config("refit_every must be at least 1".into()));
    }
    if window < 2 || window >= n {
        return Err(CliError::Config(format!("window must lie in [2, {n}) for {n} observations")));
    }
    let plan = schedule(n, window, every, cfg.rolling.unwrap_or(false));
    let tasks: Vec<(usize, usize)> = (0..plan.len()).flat_map(|k| (0..models.len()).map(move |m| (k, m))).collect();
    let results = with_jobs(cfg.jobs, || {
        tasks
            .par_iter()
            .map(|&(k, m)| -> Result<Vec<Array2<f64>>, CliError> {
                let (start, h, train) = &plan[k];
                let sample = panel.slice_rows(train.start, train.end)?;
                let fitted: Fitted = fit_shared(models[m], &cfg.est, &sample)
                    .map_err(|e| context(e, format!("{} refit before row {start}", models[m].name())))?;
                Ok(fitted.forecast(*h)?.matrices)
            })
            .collect::<Vec<_>>()
    })?;
    man.lap("refit");
    let mut per_model: Vec<Vec<Array2<f64>>> = vec![Vec::new(); models.len()];
    for (&(_, m), r) in tasks.iter().zip(results) {
        per_model[m].extend(r?);
    }
    let names: Vec<String> = models.iter().map(|m| m.name()).collect();
    let forecasts = per_model.into_iter().map(|mats| CovSequence::new(CovKind::Forecast, window + 1, mats)).collect();
    let set = ForecastSet::new(names.clone(), forecasts, panel.data().slice(s![window.., ..]).to_owned())?;
    let losses = set.losses()?;
    let dm = set.dm_matrix(cfg.hac_lag)?;
    man.lap("evaluate");

    let loss_rows: Vec<Vec<String>> = losses.rows().into_iter().map(|r| r.iter().map(|v| format!("{v}")).collect()).collect();
    let loss_path = out.join("losses.csv");
    write_table(&loss_path, &names, &loss_rows)?;
    let mut header = vec!["model".to_string()];
    header.extend(names.iter().cloned());
    let matrix = |pick: fn(&msv_core::eval::DmResult) -> f64| -> Vec<Vec<String>> {
        dm.iter()
            .zip(&names)
            .map(|(row, name)| {
                let mut cells = vec![name.clone()];
                cells.extend(row.iter().map(|c| c.as_ref().map(|r| format!("{}", pick(r))).unwrap_or_default()));
                cells
            })
            .collect()
    };
    let dm_path = out.join("dm.csv");
    let pv_path = out.join("dm_pvalues.csv");
    write_table(&dm_path, &header, &matrix(|r| r.statistic))?;
    write_table(&pv_path, &header, &matrix(|r| r.p_value))?;
    for p in [&loss_path, &dm_path, &pv_path] {
        man.output(p);
    }
    man.detail("evaluation_periods", n - window);
    man.detail("refits", plan.len());
    Ok(())
}

pub fn mcs(cfg: &McsConfig, man: &mut Manifest) -> Result<(), CliError> {
    let path = required(cfg.losses.clone(), "losses")?;
    let out = required(cfg.out.clone(), "out")?;
    let (names, losses) = read_table(&path)?;
    let mut opts = McsOpts::default();
    opts.statistic = match cfg.statistic.as_deref() {
        None | Some("semi-quadratic") => McsStatistic::SemiQuadratic,
        Some("range") => McsStatistic::Range,
        Some(other) => return Err(CliError::Config(format!("unknown statistic `{other}` (semi-quadratic, range)"))),
    };
    if let Some(b) = cfg.bootstrap_reps {
        opts.bootstrap_reps = b;
    }
    opts.block_len = cfg.block_len;
    opts.seed = cfg.seed.unwrap_or(0);
    if let Some(levels) = &cfg.levels {
        opts.levels = levels
            .split(',')
            .map(|l| l.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad level `{l}`"))))
            .collect::<Result<_, _>>()?;
    }
    man.lap("read");
    let r = with_jobs(cfg.jobs, || run_mcs(losses.view(), &opts))??;
    man.lap("bootstrap");
    let mut header = vec!["model".to_string(), "p_value".to_string(), "eliminated".to_string()];
    header.extend(r.included.iter().map(|(level, _)| format!("{level}")));
    let rows: Vec<Vec<String>> = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let rank = r.elimination_order.iter().position(|&k| k == i).map(|k| k + 1).unwrap_or(0);
            let mut cells = vec![name.clone(), format!("{}", r.p_values[i]), rank.to_string()];
            cells.extend(
                r.included.iter().map(|(_, set)| if set.contains(&i) { format!("{}", r.p_values[i]) } else { String::new() }),
            );
            cells
        })
        .collect();
    write_table(&out, &header, &rows)?;
    man.output(&out);
    man.detail("elimination_order", r.elimination_order.iter().map(|&k| names[k].clone()).collect::<Vec<_>>());
    man.detail("options", &opts);
    Ok(())
}
