//! The `gpsim` command-line driver.
//!
//! Every command reads an optional JSON config with the sections `data`,
//! `prior`, `mcmc`, `experiment` and `output`, writes CSV/JSON artifacts into
//! the output directory, and records them in `manifest.json`. Exit codes:
//! 0 on success, 2 for usage or configuration errors, 3 for numerical or
//! runtime failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::design::{score_candidates, Criterion};
use crate::error::{Error, Result};
use crate::experiments::{
    gen_borehole, gen_sinusoid_with, borehole_columns, inverted_cv, monte_carlo_compare, scale_to_unit_cube,
    Dataset, ExperimentConfig, Generator, UnitCubeTransform,
};
use crate::io;
use crate::kernels::FamilyKind;
use crate::mcmc::{run_chain, Chain, McmcConfig};
use crate::metrics::SixNumber;
use crate::posterior::{Model, PriorSpec};
use crate::postprocess::{implied_theta, normalized_betas, point_estimate, reconcile, ReconcileMethod};
use crate::predict::{mixture_predict_for, Target};
use crate::rng;

#[derive(Debug, Parser)]
#[command(name = "gpsim", version, about = "Gaussian-process single-index emulators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run MCMC on a dataset and write the chain.
    Fit {
        /// Training data CSV (x1..xp,y).
        #[arg(long)]
        data: Option<PathBuf>,
        /// sim, sep or iso.
        #[arg(long)]
        family: Option<String>,
    },
    /// Posterior predictive summaries at new points.
    Predict {
        #[arg(long)]
        chain: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        points: Option<PathBuf>,
        /// Sort rows by posterior mean index (SIM chains).
        #[arg(long)]
        sort_by_index: bool,
    },
    /// Compare model families by Monte Carlo or inverted cross-validation.
    Benchmark,
    /// Resolve the sign ambiguity of a SIM chain.
    Reconcile {
        #[arg(long)]
        chain: Option<PathBuf>,
        /// index, anchor or covariance.
        #[arg(long)]
        method: Option<String>,
        /// Reference points for the index method.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Score and rank candidate inputs for the next run.
    Design {
        #[arg(long)]
        chain: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        candidates: Option<PathBuf>,
        /// alm or ei.
        #[arg(long)]
        criterion: Option<String>,
        /// Target for EI; defaults to the smallest training response.
        #[arg(long)]
        f_min: Option<f64>,
    },
}

/// Where training data come from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Dataset CSV; the last column is the response.
    pub train: Option<PathBuf>,
    /// Physical input bounds; when given, inputs are rescaled to the unit cube.
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Synthetic data in place of `train`.
    pub generator: Option<Generator>,
    /// Rows to generate.
    pub n: Option<usize>,
    pub points: Option<PathBuf>,
    pub candidates: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub chain: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    #[default]
    MonteCarlo,
    InvertedCv,
}

/// Comparison settings; MCMC and priors come from their own sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub protocol: Protocol,
    pub generator: Generator,
    pub n_train: usize,
    pub n_test: usize,
    pub n_reps: usize,
    pub methods: Vec<FamilyKind>,
    pub predict_samples: Option<usize>,
    pub pilot_iters: Option<usize>,
    pub pilot_rounds: usize,
    pub target: Target,
    pub folds: usize,
    pub seed: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let d = ExperimentConfig::default();
        ExperimentSection {
            protocol: Protocol::MonteCarlo,
            generator: d.generator,
            n_train: d.n_train,
            n_test: d.n_test,
            n_reps: d.n_reps,
            methods: d.methods,
            predict_samples: d.predict_samples,
            pilot_iters: d.pilot_iters,
            pilot_rounds: d.pilot_rounds,
            target: d.target,
            folds: 10,
            seed: d.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    /// Lower and upper predictive quantiles.
    pub quantiles: (f64, f64),
    pub sort_by_index: bool,
    pub criterion: Option<String>,
    pub f_min: Option<f64>,
    pub reconcile_method: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: None,
            quantiles: (0.05, 0.95),
            sort_by_index: false,
            criterion: None,
            f_min: None,
            reconcile_method: None,
        }
    }
}

/// A parsed config file. The `mcmc` section additionally accepts `family`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub data: DataSection,
    pub prior: PriorSpec,
    pub family: FamilyKind,
    pub mcmc: McmcConfig,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
    /// Directory relative paths in the file are resolved against.
    pub base: PathBuf,
    /// The file as read, echoed into the manifest.
    pub raw: Value,
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn section<T: serde::de::DeserializeOwned + Default>(root: &serde_json::Map<String, Value>, name: &str) -> Result<T> {
    match root.get(name) {
        None => Ok(T::default()),
        Some(v) => serde_path_to_error::deserialize(v.clone()).map_err(|e| {
            let inner = e.path().to_string();
            let path = if inner == "." { name.to_string() } else { format!("{name}.{inner}") };
            config_err(path, e.inner().to_string())
        }),
    }
}

impl Config {
    pub fn parse(text: &str, base: PathBuf) -> Result<Config> {
        let raw: Value = serde_json::from_str(text).map_err(|e| config_err(".", e.to_string()))?;
        let root = raw
            .as_object()
            .ok_or_else(|| config_err(".", "top level must be an object"))?;
        const SECTIONS: [&str; 5] = ["data", "prior", "mcmc", "experiment", "output"];
        if let Some(k) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(config_err(k.clone(), format!("unknown section, expected one of {SECTIONS:?}")));
        }
        let mut mcmc_obj = root.get("mcmc").cloned().unwrap_or_else(|| json!({}));
        let family = match mcmc_obj.as_object_mut().and_then(|m| m.remove("family")) {
            None => FamilyKind::Sim,
            Some(Value::String(s)) => FamilyKind::from_label(&s)
                .ok_or_else(|| config_err("mcmc.family", format!("unknown family `{s}`; use sim, sep or iso")))?,
            Some(_) => return Err(config_err("mcmc.family", "expected a string")),
        };
        let mut stripped = root.clone();
        stripped.insert("mcmc".into(), mcmc_obj);
        let cfg = Config {
            data: section(&stripped, "data")?,
            prior: section(&stripped, "prior")?,
            family,
            mcmc: section(&stripped, "mcmc")?,
            experiment: section(&stripped, "experiment")?,
            output: section(&stripped, "output")?,
            base,
            raw: raw.clone(),
        };
        cfg.prior.validate().map_err(|e| config_err("prior", e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(path.display().to_string(), format!("cannot read config: {e}")))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Config::parse(&text, base)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

/// Record of one command's run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: Value,
    pub outputs: Vec<String>,
    /// Wall-clock seconds per stage.
    pub durations: BTreeMap<String, f64>,
}

struct Run {
    out: PathBuf,
    manifest: RunManifest,
    clock: Instant,
}

impl Run {
    fn new(command: &str, out: PathBuf, seed: u64, config: Value) -> Result<Self> {
        fs::create_dir_all(&out)?;
        Ok(Run {
            out,
            manifest: RunManifest {
                command: command.into(),
                version: env!("CARGO_PKG_VERSION").into(),
                seed,
                config,
                outputs: Vec::new(),
                durations: BTreeMap::new(),
            },
            clock: Instant::now(),
        })
    }

    fn file(&mut self, name: &str) -> PathBuf {
        self.manifest.outputs.push(name.to_string());
        self.out.join(name)
    }

    fn lap(&mut self, stage: &str) {
        self.manifest
            .durations
            .insert(stage.into(), self.clock.elapsed().as_secs_f64());
        self.clock = Instant::now();
    }

    fn finish(mut self) -> Result<()> {
        let path = self.file("manifest.json");
        fs::write(path, serde_json::to_string_pretty(&self.manifest)? + "\n")?;
        Ok(())
    }
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(v)? + "\n")?;
    Ok(())
}

fn pick(flag: &Option<PathBuf>, cfg: &Config, from_cfg: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    match (flag, from_cfg) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(p)) => Ok(cfg.resolve(p)),
        (None, None) => Err(config_err(what, format!("no {what} given (flag or config)"))),
    }
}

/// Training data from a file (optionally rescaled) or a generator.
fn load_training(cfg: &Config, flag: &Option<PathBuf>, seed: u64) -> Result<(Dataset, bool)> {
    if flag.is_some() || cfg.data.train.is_some() {
        let path = pick(flag, cfg, &cfg.data.train, "data.train")?;
        let (raw, y) = io::read_dataset(&path)?;
        let (x, transform) = match &cfg.data.bounds {
            Some(b) => scale_to_unit_cube(&raw, b)?,
            None => (raw.clone(), UnitCubeTransform::identity(raw.ncols())),
        };
        return Ok((
            Dataset {
                x,
                y,
                transform,
                truth: None,
            },
            false,
        ));
    }
    let generator = cfg
        .data
        .generator
        .as_ref()
        .ok_or_else(|| config_err("data", "give either `train` or `generator`"))?;
    let n = cfg.data.n.ok_or_else(|| config_err("data.n", "a generator needs `n`"))?;
    Ok((generate(generator, n, seed)?, true))
}

fn generate(generator: &Generator, n: usize, seed: u64) -> Result<Dataset> {
    let mut r = rng::substream(seed, 0);
    match generator {
        Generator::Sinusoid { noise_sd } => Ok(gen_sinusoid_with(n, *noise_sd, &mut r)),
        Generator::Borehole { drop_columns } => gen_borehole(n, &borehole_columns(drop_columns)?, &mut r),
        Generator::External(d) => Ok(d.clone()),
    }
}

fn check_chain_dim(chain: &Chain, p: usize) -> Result<()> {
    if chain.kind != FamilyKind::Isotropic && chain.dim != p {
        return Err(Error::dim("chain vs data inputs", p, chain.dim));
    }
    Ok(())
}

fn check_points(points: &DMatrix<f64>, p: usize, what: &'static str) -> Result<()> {
    if points.ncols() != p {
        return Err(Error::dim(what, p, points.ncols()));
    }
    Ok(())
}

fn cmd_fit(cli: &Cli, cfg: &Config, data: &Option<PathBuf>, family: &Option<String>, out: PathBuf) -> Result<()> {
    let mut mcmc = cfg.mcmc.clone();
    if let Some(s) = cli.seed {
        mcmc.seed = s;
    }
    let kind = match family {
        Some(f) => FamilyKind::from_label(f)
            .ok_or_else(|| config_err("--family", format!("unknown family `{f}`; use sim, sep or iso")))?,
        None => cfg.family,
    };
    let mut run = Run::new("fit", out, mcmc.seed, cfg.raw.clone())?;
    let (train, generated) = load_training(cfg, data, rng::derive_seed(mcmc.seed, 0))?;
    mcmc.validate(train.p()).map_err(|e| config_err("mcmc", e.to_string()))?;
    if generated {
        io::write_dataset(&run.file("train.csv"), &train.x, &train.y)?;
    }
    run.lap("load");

    let model = Model::new(train.x.clone(), train.y.clone(), cfg.prior.clone())?;
    let chain = run_chain(&model, kind, &mcmc)?;
    run.lap("mcmc");

    io::write_chain(&run.file("chain.csv"), &chain, None)?;
    let acceptance = json!({
        "family": kind.label(),
        "samples": chain.len(),
        "eta": chain.accept_eta,
        "main": chain.accept_main,
    });
    write_json(&run.file("acceptance.json"), &acceptance)?;
    if kind == FamilyKind::Sim {
        let pos = chain.positive_fraction()?;
        let keys: Vec<usize> = (1..=pos.len()).collect();
        let rows: Vec<Vec<f64>> = pos.iter().map(|f| vec![*f, 1.0 - f]).collect();
        io::write_keyed(
            &run.file("straddle.csv"),
            &["component", "frac_positive", "frac_negative"],
            &keys,
            &rows,
        )?;
        for (j, f) in pos.iter().enumerate() {
            if (0.1..=0.9).contains(f) {
                log::warn!("beta_{} straddles zero: {:.0}% of samples positive", j + 1, 100.0 * f);
            }
        }
    }
    run.lap("write");
    eprintln!(
        "fit: {} samples, acceptance eta {:.3}, {} {:.3}",
        chain.len(),
        chain.accept_eta,
        if kind == FamilyKind::Sim { "beta" } else { "theta" },
        chain.accept_main
    );
    run.finish()
}

fn cmd_predict(
    cli: &Cli,
    cfg: &Config,
    chain: &Option<PathBuf>,
    data: &Option<PathBuf>,
    points: &Option<PathBuf>,
    sort: bool,
    out: PathBuf,
) -> Result<()> {
    let seed = cli.seed.unwrap_or(cfg.mcmc.seed);
    let mut run = Run::new("predict", out, seed, cfg.raw.clone())?;
    let chain = io::read_chain(&pick(chain, cfg, &cfg.data.chain, "data.chain")?)?;
    let (train, _) = load_training(cfg, data, rng::derive_seed(seed, 0))?;
    let points = io::read_points(&pick(points, cfg, &cfg.data.points, "data.points")?)?;
    check_chain_dim(&chain, train.p())?;
    check_points(&points, train.p(), "prediction points")?;
    let xstar = match &cfg.data.bounds {
        Some(_) => train.transform.forward(&points)?,
        None => points.clone(),
    };
    let model = Model::new(train.x, train.y, cfg.prior.clone())?;
    let (lo, hi) = cfg.output.quantiles;
    let pred = mixture_predict_for(&xstar, &model, &chain, &[lo, hi], seed, cfg.experiment.target)?;
    run.lap("predict");
    let mut order: Vec<usize> = (0..points.nrows()).collect();
    if sort || cfg.output.sort_by_index {
        let mi = pred
            .mean_index
            .as_ref()
            .ok_or_else(|| config_err("--sort-by-index", "only SIM chains have an index"))?;
        order.sort_by(|a, b| mi[*a].total_cmp(&mi[*b]));
    }
    io::write_predictions(&run.file("predictions.csv"), &points, &pred, &order)?;
    run.lap("write");
    run.finish()
}

fn cmd_benchmark(cli: &Cli, cfg: &Config, out: PathBuf) -> Result<()> {
    let e = &cfg.experiment;
    let seed = cli.seed.unwrap_or(e.seed);
    let mut exp = ExperimentConfig {
        generator: e.generator.clone(),
        n_train: e.n_train,
        n_test: e.n_test,
        n_reps: e.n_reps,
        methods: e.methods.clone(),
        mcmc: cfg.mcmc.clone(),
        priors: cfg.prior.clone(),
        seed,
        predict_samples: e.predict_samples,
        pilot_iters: e.pilot_iters,
        pilot_rounds: e.pilot_rounds,
        target: e.target,
    };
    let mut run = Run::new("benchmark", out, seed, cfg.raw.clone())?;
    let external = if cfg.data.train.is_some() {
        Some(load_training(cfg, &None, seed)?.0)
    } else {
        None
    };
    if let Some(d) = &external {
        exp.generator = Generator::External(d.clone());
    }
    let summary = match e.protocol {
        Protocol::MonteCarlo => monte_carlo_compare(&exp)?,
        Protocol::InvertedCv => {
            let data = match external {
                Some(d) => d,
                None => generate(&exp.generator, e.n_train, rng::derive_seed(seed, u64::MAX - 1))?,
            };
            inverted_cv(&data, e.folds, &exp)?
        }
    };
    run.lap("benchmark");
    io::write_results(&run.file("results.csv"), &summary)?;
    io::write_summary(&run.file("summary.csv"), &summary)?;
    let table = summary.table();
    fs::write(run.file("summary.txt"), &table)?;
    for (m, f) in summary.methods.iter().zip(&summary.failures) {
        if !f.is_empty() {
            eprintln!("benchmark: {m} failed on replicates {f:?}");
        }
    }
    print!("{table}");
    run.lap("write");
    run.finish()
}

fn fallback_hint(method: ReconcileMethod) -> &'static str {
    match method {
        ReconcileMethod::IndexCluster => "anchor",
        ReconcileMethod::AnchorComponent => "covariance",
        ReconcileMethod::CovarianceSign => "index",
    }
}

fn cmd_reconcile(
    cli: &Cli,
    cfg: &Config,
    chain: &Option<PathBuf>,
    method: &Option<String>,
    reference: &Option<PathBuf>,
    out: PathBuf,
) -> Result<()> {
    let seed = cli.seed.unwrap_or(cfg.mcmc.seed);
    let flag = method
        .clone()
        .or_else(|| cfg.output.reconcile_method.clone())
        .ok_or_else(|| config_err("--method", "no reconciliation method given"))?;
    let method = ReconcileMethod::from_flag(&flag)
        .ok_or_else(|| config_err("--method", format!("unknown method `{flag}`; use index, anchor or covariance")))?;
    let reference = match method {
        ReconcileMethod::IndexCluster => Some(io::read_points(&pick(
            reference,
            cfg,
            &cfg.data.reference,
            "data.reference",
        )?)?),
        _ => None,
    };
    let chain = io::read_chain(&pick(chain, cfg, &cfg.data.chain, "data.chain")?)?;
    if let Some(r) = &reference {
        check_points(r, chain.dim, "reference points")?;
    }
    let mut run = Run::new("reconcile", out, seed, cfg.raw.clone())?;
    let rc = reconcile(&chain, method, reference.as_ref()).map_err(|e| match e {
        Error::Reconcile(m) => Error::Reconcile(format!("{m} (fall back to --method {})", fallback_hint(method))),
        other => other,
    })?;
    run.lap("reconcile");

    io::write_chain(&run.file("reconciled_chain.csv"), &rc.chain, Some(&rc.flips))?;
    let iters = &rc.chain.iters;
    let flips: Vec<Vec<f64>> = rc.flips.iter().map(|f| vec![f64::from(u8::from(*f))]).collect();
    io::write_keyed(&run.file("flips.csv"), &["iter", "flipped"], iters, &flips)?;

    let betas = rc.chain.betas()?;
    let p = rc.chain.dim;
    let components: Vec<usize> = (1..=p).collect();
    let mut header = vec!["component"];
    header.extend(SixNumber::ROW_LABELS);
    let rows: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let col: Vec<f64> = betas.iter().map(|b| b[j]).collect();
            SixNumber::of(&col).expect("chain is non-empty").rows().to_vec()
        })
        .collect();
    io::write_keyed(&run.file("beta_summary.csv"), &header, &components, &rows)?;

    let units = normalized_betas(&rc.chain)?;
    let names: Vec<String> = (1..=p).map(|j| format!("u_{j}")).collect();
    let mut header = vec!["iter"];
    header.extend(names.iter().map(String::as_str));
    io::write_keyed(&run.file("normalized_beta.csv"), &header, iters, &units)?;

    let theta: Vec<Vec<f64>> = implied_theta(&rc.chain)?.into_iter().map(|t| vec![t]).collect();
    io::write_keyed(&run.file("implied_theta.csv"), &["iter", "theta"], iters, &theta)?;

    let est: Vec<Vec<f64>> = point_estimate(&rc.chain)?.into_iter().map(|v| vec![v]).collect();
    io::write_keyed(&run.file("point_estimate.csv"), &["component", "value"], &components, &est)?;
    run.lap("write");
    eprintln!(
        "reconcile: {} of {} samples flipped, {} ambiguous",
        rc.n_flips(),
        rc.chain.len(),
        rc.ambiguous.len()
    );
    run.finish()
}

#[allow(clippy::too_many_arguments)]
fn cmd_design(
    cli: &Cli,
    cfg: &Config,
    chain: &Option<PathBuf>,
    data: &Option<PathBuf>,
    candidates: &Option<PathBuf>,
    criterion: &Option<String>,
    f_min: Option<f64>,
    out: PathBuf,
) -> Result<()> {
    let seed = cli.seed.unwrap_or(cfg.mcmc.seed);
    let flag = criterion
        .clone()
        .or_else(|| cfg.output.criterion.clone())
        .unwrap_or_else(|| "alm".into());
    let criterion = Criterion::from_flag(&flag)
        .ok_or_else(|| config_err("--criterion", format!("unknown criterion `{flag}`; use alm or ei")))?;
    let mut run = Run::new("design", out, seed, cfg.raw.clone())?;
    let chain = io::read_chain(&pick(chain, cfg, &cfg.data.chain, "data.chain")?)?;
    let (train, _) = load_training(cfg, data, rng::derive_seed(seed, 0))?;
    let cands = io::read_points(&pick(candidates, cfg, &cfg.data.candidates, "data.candidates")?)?;
    check_chain_dim(&chain, train.p())?;
    check_points(&cands, train.p(), "candidates")?;
    let xstar = match &cfg.data.bounds {
        Some(_) => train.transform.forward(&cands)?,
        None => cands.clone(),
    };
    let model = Model::new(train.x, train.y, cfg.prior.clone())?;
    let ranked = score_candidates(&xstar, criterion, &model, &chain, f_min.or(cfg.output.f_min))?;
    run.lap("score");
    let mut physical = ranked.clone();
    physical.candidates = cands.select_rows(ranked.order.iter());
    io::write_candidates(&run.file("candidates.csv"), &physical)?;
    run.lap("write");
    run.finish()
}

fn dispatch(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => {
            if matches!(cli.command, Command::Fit { .. } | Command::Benchmark) && cli.config.is_none() {
                return Err(config_err("--config", "this command needs a config file"));
            }
            Config::default()
        }
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(|d| cfg.resolve(d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    match &cli.command {
        Command::Fit { data, family } => cmd_fit(cli, &cfg, data, family, out),
        Command::Predict {
            chain,
            data,
            points,
            sort_by_index,
        } => cmd_predict(cli, &cfg, chain, data, points, *sort_by_index, out),
        Command::Benchmark => cmd_benchmark(cli, &cfg, out),
        Command::Reconcile {
            chain,
            method,
            reference,
        } => cmd_reconcile(cli, &cfg, chain, method, reference, out),
        Command::Design {
            chain,
            data,
            candidates,
            criterion,
            f_min,
        } => cmd_design(cli, &cfg, chain, data, candidates, criterion, *f_min, out),
    }
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_usage() {
        2
    } else {
        3
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let pool = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    match pool.install(|| dispatch(cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    run(&cli)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_sections_and_paths() {
        let cfg = Config::parse(
            r#"{"data": {"train": "d.csv"}, "mcmc": {"family": "sep", "n_iter": 10, "burn_in": 2}}"#,
            PathBuf::from("/tmp/x"),
        )
        .unwrap();
        assert_eq!(cfg.family, FamilyKind::Separable);
        assert_eq!(cfg.mcmc.n_iter, 10);
        assert_eq!(cfg.resolve(Path::new("d.csv")), PathBuf::from("/tmp/x/d.csv"));
    }

    #[test]
    fn config_errors_name_the_field() {
        let cases = [
            (r#"{"mcmc": {"n_itr": 10}}"#, "mcmc.n_itr"),
            (r#"{"prior": {"a_eta": "x"}}"#, "prior.a_eta"),
            (r#"{"extra": {}}"#, "extra"),
            (r#"{"mcmc": {"family": "gp"}}"#, "mcmc.family"),
            (r#"{"experiment": {"methods": ["sim", "rbf"]}}"#, "experiment.methods[1]"),
        ];
        for (text, want) in cases {
            match Config::parse(text, PathBuf::new()) {
                Err(Error::Config { path, .. }) => assert_eq!(path, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn generator_section() {
        let cfg = Config::parse(
            r#"{"data": {"generator": {"kind": "borehole", "drop_columns": ["r"]}, "n": 5}}"#,
            PathBuf::new(),
        )
        .unwrap();
        let (d, generated) = load_training(&cfg, &None, 3).unwrap();
        assert!(generated);
        assert_eq!((d.n(), d.p()), (5, 7));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["gpsim", "fit", "--config", "/nonexistent/c.json"]), 2);
        assert_eq!(main_with_args(["gpsim", "frobnicate"]), 2);
        assert_eq!(main_with_args(["gpsim", "fit"]), 2);
    }
}
