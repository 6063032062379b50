//! Command-line front end: `simulate`, `elicit`, `fit`, `summarize`.
//!
//! Data and tables go to files under the output directory; messages and
//! errors go to stderr. Every file is written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{RunConfig, SimModel};
use crate::error::{Error, Result};
use crate::eval::{diagnostics, summarize, MIN_DIAGNOSTIC_DRAWS};
use crate::io::{load_csv, save_csv, write_atomic};
use crate::priors::{
    elicit_inclusion_prior, elicit_slab_precision, slab_tau0_from_quantile, PUBLISHED_SLAB_RATE,
    PUBLISHED_SLAB_TAU0,
};
use crate::sampler::{run_chain, DrawsStore, ModelSpec};
use crate::sim::simulate_trivariate;
use crate::structure::ConnectivityLayout;

pub const DATA_FILE: &str = "data.csv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const METADATA_FILE: &str = "metadata.toml";
pub const DRAWS_FILE: &str = "draws.csv";
pub const STATES_FILE: &str = "states.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const CONFIG_FILE: &str = "config.toml";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const QUANTILE_TRACES_FILE: &str = "quantile_traces.csv";
pub const PLOT_FILE: &str = "plot.csv";
pub const REPORT_FILE: &str = "report.txt";

#[derive(Debug, Parser)]
#[command(name = "bdlm", version, about = "Sparse Bayesian DLM for fMRI connectivity")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the simulation or MCMC seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the number of chains.
    #[arg(long, global = true)]
    pub chains: Option<usize>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a dataset and its truth record.
    Simulate,
    /// Print the connectivity prior implied by elicited inputs.
    Elicit(ElicitArgs),
    /// Run the Gibbs sampler on a dataset.
    Fit,
    /// Posterior summaries, diagnostics and plot tables from a draws file.
    Summarize {
        /// Draws file; defaults to the one in the output directory.
        #[arg(long)]
        draws: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ElicitArgs {
    /// Prior mode of the slab precision.
    #[arg(long, default_value_t = PUBLISHED_SLAB_TAU0, conflicts_with = "quantile")]
    pub tau0: f64,
    /// Rate `d` of the slab precision prior.
    #[arg(long, default_value_t = PUBLISHED_SLAB_RATE)]
    pub rate: f64,
    /// Derive the mode from a left-tail statement `P(φ < quantile) = prob`.
    #[arg(long, requires = "prob", allow_hyphen_values = true)]
    pub quantile: Option<f64>,
    #[arg(long)]
    pub prob: Option<f64>,
    /// Beta shape `a` of the inclusion weight.
    #[arg(long, default_value_t = 6.0)]
    pub a: f64,
    /// Beta shape `b` of the inclusion weight.
    #[arg(long, default_value_t = 3.0)]
    pub b: f64,
}

impl Cli {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.common.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(dir) = &self.common.out_dir {
            cfg.out_dir = dir.clone();
        }
        if let Some(seed) = self.common.seed {
            cfg.mcmc.seed = seed;
            cfg.simulate.recipe.seed = seed;
            cfg.simulate.univariate.seed = seed;
        }
        if let Some(chains) = self.common.chains {
            cfg.mcmc.n_chains = chains;
        }
        Ok(cfg)
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Elicit(args) => elicit(args, &mut std::io::stdout()),
        Command::Simulate => simulate(&cli.config()?),
        Command::Fit => fit(&cli.config()?),
        Command::Summarize { draws } => {
            let cfg = cli.config()?;
            let path = draws.clone().unwrap_or_else(|| cfg.out_dir.join(DRAWS_FILE));
            summarize_run(&path, &cfg.out_dir)
        }
    }
}

pub fn elicit(args: &ElicitArgs, out: &mut dyn Write) -> Result<()> {
    let tau0 = match (args.quantile, args.prob) {
        (Some(q), Some(p)) => slab_tau0_from_quantile(q, p)?,
        _ => args.tau0,
    };
    let slab = elicit_slab_precision(tau0, args.rate)?;
    let inclusion = elicit_inclusion_prior(args.a, args.b)?;
    let io_err = |e| Error::io("<stdout>", e);
    writeln!(out, "tau0 = {tau0:.4}").map_err(io_err)?;
    writeln!(out, "slab precision ~ Gamma(shape = {:.4}, rate = {:.4})", slab.shape, slab.rate).map_err(io_err)?;
    writeln!(
        out,
        "inclusion weight ~ Beta({:.4}, {:.4}): mean {:.4}, sd {:.4}",
        inclusion.a,
        inclusion.b,
        inclusion.mean(),
        inclusion.sd()
    )
    .map_err(io_err)?;
    Ok(())
}

fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = toml::to_string(value).map_err(|e| Error::Config(e.to_string()))?;
    write_atomic(path, |w| w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e)))
}

#[derive(Serialize)]
struct SimMetadata {
    model: SimModel,
    seed: u64,
    horizon: usize,
    n_series: usize,
    sampling_interval: f64,
    obs_var: f64,
    state_var: f64,
    config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    obs_loglik: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state_loglik: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ar_coefficient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pi_mix: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_outliers: Option<usize>,
}

pub fn simulate(cfg: &RunConfig) -> Result<()> {
    let dir = &cfg.out_dir;
    let hash = cfg.hash()?;
    match cfg.simulate.model {
        SimModel::Connectivity => {
            let recipe = &cfg.simulate.recipe;
            let x = recipe.default_regressors()?;
            let (data, truth) = simulate_trivariate(recipe, &x, &x)?;
            let m = recipe.n_regions();
            write_atomic(dir.join(TRUTH_FILE), |w| {
                let mut out = csv::Writer::from_writer(w);
                let mut header = vec!["t".to_string()];
                header.extend((1..=m).map(|i| format!("theta_{i}")));
                out.write_record(&header)?;
                for t in 0..truth.activations.nrows() {
                    let mut rec = vec![t.to_string()];
                    rec.extend(truth.activations.row(t).iter().map(|v| v.to_string()));
                    out.write_record(&rec)?;
                }
                out.flush().map_err(|e| Error::io(TRUTH_FILE, e))
            })?;
            let meta = SimMetadata {
                model: SimModel::Connectivity,
                seed: recipe.seed,
                horizon: recipe.horizon,
                n_series: m,
                sampling_interval: recipe.tr,
                obs_var: truth.obs_var,
                state_var: truth.state_var,
                config_hash: hash,
                phi: Some(recipe.phi.clone()),
                alpha: Some(truth.alpha.clone()),
                obs_loglik: Some(truth.obs_loglik),
                state_loglik: Some(truth.state_loglik),
                kappa: None,
                ar_coefficient: None,
                pi_mix: None,
                n_outliers: None,
            };
            save_csv(&data, dir.join(DATA_FILE))?;
            write_toml(&dir.join(METADATA_FILE), &meta)?;
        }
        SimModel::Univariate => {
            let recipe = &cfg.simulate.univariate;
            let (data, truth) = recipe.simulate()?;
            write_atomic(dir.join(TRUTH_FILE), |w| {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(["t", "theta", "state_noise", "obs_noise", "outlier"])?;
                out.write_record(["0", &truth.theta[0].to_string(), "", "", ""])?;
                for t in 1..truth.theta.len() {
                    let outlier = truth.outliers.binary_search(&t).is_ok();
                    out.write_record([
                        t.to_string(),
                        truth.theta[t].to_string(),
                        truth.state_noise[t - 1].to_string(),
                        truth.obs_noise[t - 1].to_string(),
                        u8::from(outlier).to_string(),
                    ])?;
                }
                out.flush().map_err(|e| Error::io(TRUTH_FILE, e))
            })?;
            let meta = SimMetadata {
                model: SimModel::Univariate,
                seed: recipe.seed,
                horizon: recipe.horizon,
                n_series: 1,
                sampling_interval: data.sampling_interval,
                obs_var: truth.obs_var,
                state_var: truth.state_var,
                config_hash: hash,
                phi: None,
                alpha: None,
                obs_loglik: None,
                state_loglik: None,
                kappa: Some(truth.kappa),
                ar_coefficient: Some(truth.phi),
                pi_mix: Some(truth.pi_mix),
                n_outliers: Some(truth.outliers.len()),
            };
            save_csv(&data, dir.join(DATA_FILE))?;
            write_toml(&dir.join(METADATA_FILE), &meta)?;
        }
    }
    eprintln!("wrote {}", dir.join(DATA_FILE).display());
    Ok(())
}

#[derive(Serialize)]
struct Manifest {
    seed: u64,
    n_chains: usize,
    config_hash: String,
    config_file: String,
    data_file: String,
    wall_time_secs: f64,
    n_draws: usize,
    pinv_fallbacks: usize,
    zero_regressor_updates: usize,
    detrend_k: Option<usize>,
    standardized: bool,
    version: String,
}

pub fn fit(cfg: &RunConfig) -> Result<()> {
    let path = cfg
        .data
        .path
        .as_ref()
        .ok_or_else(|| Error::Config("fit needs data.path".into()))?;
    let mut data = load_csv(path, cfg.data.sampling_interval)?;
    data.preprocess(cfg.data.detrend_k, cfg.data.standardize)?;
    let layout = ConnectivityLayout::new(cfg.data.include_trend, data.regressors.clone(), data.regressors.clone())?;
    let spec = ModelSpec::new(data.series.clone(), layout)?
        .with_priors(cfg.priors.clone())
        .with_state_precision(cfg.state_precision.clone());
    spec.validate()?;

    let start = Instant::now();
    let store = run_chain(&spec, &cfg.mcmc)?;
    let wall = start.elapsed().as_secs_f64();

    let dir = &cfg.out_dir;
    write_atomic(dir.join(DRAWS_FILE), |w| store.write_csv(w))?;
    write_atomic(dir.join(STATES_FILE), |w| {
        let mut out = csv::Writer::from_writer(w);
        let m = store.n_regions;
        let mut header = vec!["t".to_string()];
        header.extend(data.labels.iter().map(|l| format!("theta_{l}")));
        out.write_record(&header)?;
        let act = store.activation_mean();
        for t in 0..act.nrows() {
            let mut rec = vec![(t + 1).to_string()];
            rec.extend((0..m).map(|i| act[(t, i)].to_string()));
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io(STATES_FILE, e))
    })?;
    let cfg_text = cfg.to_toml()?;
    write_atomic(dir.join(CONFIG_FILE), |w| {
        w.write_all(cfg_text.as_bytes()).map_err(|e| Error::io(CONFIG_FILE, e))
    })?;
    let manifest = Manifest {
        seed: cfg.mcmc.seed,
        n_chains: cfg.mcmc.n_chains,
        config_hash: cfg.hash()?,
        config_file: CONFIG_FILE.into(),
        data_file: path.display().to_string(),
        wall_time_secs: wall,
        n_draws: store.len(),
        pinv_fallbacks: store.warnings.pinv_fallbacks,
        zero_regressor_updates: store.warnings.zero_regressor,
        detrend_k: cfg.data.detrend_k,
        standardized: cfg.data.standardize,
        version: env!("CARGO_PKG_VERSION").into(),
    };
    write_toml(&dir.join(MANIFEST_FILE), &manifest)?;
    if store.warnings.pinv_fallbacks > 0 {
        eprintln!("warning: {} pseudo-inverse fallbacks in backward sampling", store.warnings.pinv_fallbacks);
    }
    eprintln!("{} draws in {wall:.1} s", store.len());
    Ok(())
}

pub fn summarize_run(draws_path: &Path, dir: &Path) -> Result<()> {
    let store = DrawsStore::read_csv(draws_path)?;
    let summary = summarize(&store)?;
    write_atomic(dir.join(SUMMARY_FILE), |w| summary.write_csv(w))?;

    let diags = if store.len() >= MIN_DIAGNOSTIC_DRAWS {
        diagnostics(&store)?
    } else {
        eprintln!(
            "warning: {} draws is below the {MIN_DIAGNOSTIC_DRAWS} needed for diagnostics; tables left empty",
            store.len()
        );
        Vec::new()
    };
    write_atomic(dir.join(DIAGNOSTICS_FILE), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["parameter", "ess", "lag", "acf"])?;
        for d in &diags {
            for (k, r) in d.acf.iter().enumerate() {
                out.write_record([d.name.clone(), d.ess.to_string(), k.to_string(), r.to_string()])?;
            }
        }
        out.flush().map_err(|e| Error::io(DIAGNOSTICS_FILE, e))
    })?;
    write_atomic(dir.join(QUANTILE_TRACES_FILE), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["parameter", "draws", "q2.5", "q50", "q97.5"])?;
        for d in &diags {
            for (k, q) in &d.cumulative_quantiles {
                let mut rec = vec![d.name.clone(), k.to_string()];
                rec.extend(q.iter().map(|v| v.to_string()));
                out.write_record(&rec)?;
            }
        }
        out.flush().map_err(|e| Error::io(QUANTILE_TRACES_FILE, e))
    })?;
    write_atomic(dir.join(PLOT_FILE), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["parameter", "chain", "draw", "value"])?;
        for (name, values) in store.columns() {
            let mut per_chain = std::collections::HashMap::new();
            for (d, v) in store.draws.iter().zip(values) {
                let k = per_chain.entry(d.chain).or_insert(0usize);
                *k += 1;
                out.write_record([name.clone(), d.chain.to_string(), k.to_string(), v.to_string()])?;
            }
        }
        out.flush().map_err(|e| Error::io(PLOT_FILE, e))
    })?;

    let min_ess = diags
        .iter()
        .filter(|d| !d.name.starts_with("inc_"))
        .min_by(|a, b| a.ess.total_cmp(&b.ess));
    let mut report = format!("n_draws={}\nn_chains={}\n", store.len(), store.n_chains);
    if let Some(d) = min_ess {
        report += &format!("min_ess={}\nmin_ess_parameter={}\n", d.ess, d.name);
    }
    let m = store.n_regions;
    for i in 1..=m {
        for j in 1..=m {
            if let Some(p) = summary.get(&format!("phi_{i}_{j}")) {
                report += &format!(
                    "phi_{i}_{j}.mean={}\nphi_{i}_{j}.prob_zero={}\n",
                    p.mean,
                    p.prob_zero.unwrap_or(f64::NAN)
                );
            }
        }
    }
    write_atomic(dir.join(REPORT_FILE), |w| {
        w.write_all(report.as_bytes()).map_err(|e| Error::io(REPORT_FILE, e))
    })?;
    eprintln!("wrote summaries to {}", dir.display());
    Ok(())
}
