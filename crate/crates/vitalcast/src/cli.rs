//! Command-line surface. Exit codes: 0 success, 1 runtime failure,
//! 2 usage or configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vitalcast_core::data::{impute_locf, make_windows, Cohort, MinMaxScaler, TargetSpec, Vital};
use vitalcast_core::evaluation::{
    kernel_models, lstm_direct_models, mlp_models, prepare_seed, score_horizon, Method, PreparedSeed, SuiteConfig,
};
use vitalcast_core::micluster::{group_and_sample, score_cohort};
use vitalcast_core::models::arima::{arima_fit, arima_forecast};
use vitalcast_core::models::checkpoint::ModelParams;
use vitalcast_core::numerics::Rng;
use vitalcast_core::synthgen::{archetype_name, generate_cohort, CohortSpec};

use crate::config::ExperimentConfig;
use crate::csvio::{export_csv, format_timestamp, ingest_csv, range_warnings};
use crate::error::{AppError, AppResult};
use crate::files::{export_windows, load_checkpoint, save_checkpoint, ModelMeta, ScalerMeta};
use crate::report::{emit_report, ReportFormat};
use crate::runner::{load_cohort, run_suite_threaded, thread_count, write_reports};

#[derive(Debug, Parser)]
#[command(name = "vitalcast", version, about = "Long-range vital-sign forecasting with generative boosting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort in the patient CSV format.
    GenData(GenDataArgs),
    /// Check a patient CSV: ingestion, imputation and value ranges.
    Validate(ValidateArgs),
    /// Run the benchmark suite described by a config file.
    Experiment(ExperimentArgs),
    /// Write MI scores, score groups and the sampled generator subset.
    MiReport(MiReportArgs),
    /// Fit one benchmark model for one horizon and save a checkpoint.
    Train(TrainArgs),
    /// Forecast from the last window of every patient with a checkpoint.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub patients: u64,
    #[arg(long, default_value_t = 288)]
    pub steps: usize,
    #[arg(long, default_value_t = 3)]
    pub archetypes: usize,
    #[arg(long, default_value_t = 0.0)]
    pub missing_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Also write `patient_id,archetype` ground truth here.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
    /// Export windows (scaled on the whole file) in the binary layout.
    #[arg(long)]
    pub windows_out: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub window: usize,
    #[arg(long, default_value_t = 1)]
    pub horizon: usize,
    #[arg(long, default_value = "heart_rate", value_parser = parse_vital)]
    pub target: Vital,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(short, long)]
    pub config: PathBuf,
    /// Comma-separated method names overriding the config.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Comma-separated horizons overriding the config.
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
    /// Seeds overriding the config list (comma-separated or repeated).
    #[arg(long, value_delimiter = ',')]
    pub seed: Option<Vec<u64>>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MiReportArgs {
    #[arg(short, long)]
    pub config: PathBuf,
    /// Seed of the jitter and the sampling (default: first config seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV (default: `<output dir>/<stem>-mi.csv`).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Lstm,
    Mlp,
    Gpr,
    Krr,
    Arima,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 1)]
    pub horizon: usize,
    #[arg(long, value_parser = parse_vital)]
    pub target: Option<Vital>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Experiment config supplying hyperparameters and split fractions
    /// (default: the standard configuration).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV (default: stdout).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

fn parse_vital(s: &str) -> Result<Vital, String> {
    Vital::from_name(s).ok_or_else(|| format!("unknown vital '{s}'"))
}

/// Parse arguments and run; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Validate(a) => validate(a),
        Command::Experiment(a) => experiment(a),
        Command::MiReport(a) => mi_report(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> AppResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

fn gen_data(a: GenDataArgs) -> AppResult<()> {
    let spec = CohortSpec {
        n_patients: usize::try_from(a.patients).map_err(|_| AppError::Usage("--patients too large".into()))?,
        steps_per_patient: a.steps,
        n_archetypes: a.archetypes,
        missing_rate: a.missing_rate,
        seed: a.seed,
    };
    spec.validate().map_err(|e| AppError::Usage(e.to_string()))?;
    let synth = generate_cohort(&spec)?;
    export_csv(&synth.cohort, &a.out)?;
    if let Some(meta) = &a.meta {
        let mut s = String::from("patient_id,archetype\n");
        for (r, &arch) in synth.cohort.records().iter().zip(&synth.archetypes) {
            s += &format!("{},{}\n", r.patient_id, archetype_name(arch));
        }
        write_file(meta, s.as_bytes())?;
    }
    let missing: usize = synth.cohort.records().iter().map(|r| r.missing_count()).sum();
    println!(
        "generated {} patients x {} steps, {} missing cells -> {}",
        synth.cohort.len(),
        spec.steps_per_patient,
        missing,
        a.out.display()
    );
    Ok(())
}

fn validate(a: ValidateArgs) -> AppResult<()> {
    let cohort = ingest_csv(&a.path)?;
    let mut imputed = Vec::with_capacity(cohort.len());
    let mut errors = Vec::new();
    println!("{}: {} patients", a.path.display(), cohort.len());
    for r in cohort.records() {
        println!("  {}: p={} missing={}", r.patient_id, r.len(), r.missing_count());
        match impute_locf(r) {
            Ok(i) => imputed.push(i),
            Err(e) => errors.push(e),
        }
    }
    for w in range_warnings(&cohort) {
        eprintln!(
            "warning: {} step {}: {} = {} outside [{}, {}]",
            w.patient_id,
            w.step,
            w.vital.name(),
            w.value,
            w.vital.clip_range().0,
            w.vital.clip_range().1
        );
    }
    if let Some(first) = errors.into_iter().next() {
        return Err(first.into());
    }
    if let Some(path) = &a.windows_out {
        let scaler = MinMaxScaler::fit(imputed.iter(), "whole-file")?;
        let series = imputed.iter().map(|r| scaler.series(r)).collect::<vitalcast_core::Result<Vec<_>>>()?;
        let ds = make_windows(&series, a.window, &[a.horizon], &TargetSpec::vital(a.target))?;
        export_windows(path, &ds)?;
        println!("wrote {} windows -> {}", ds.len(), path.display());
    }
    println!("ok");
    Ok(())
}

fn experiment(a: ExperimentArgs) -> AppResult<()> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(m) = a.methods {
        cfg.methods = m;
    }
    if let Some(h) = a.horizons {
        cfg.horizons = h;
    }
    if let Some(s) = a.seed {
        cfg.seeds = s;
    }
    if let Some(d) = a.out_dir {
        cfg.output.dir = d;
    }
    let suite = cfg.suite()?;
    let threads = thread_count()?;
    let cohort = load_cohort(&cfg.data)?;
    let started = Instant::now();
    eprintln!(
        "running {} methods x {} horizons x {} seeds on {} patients ({} threads)",
        suite.methods.len(),
        suite.horizons.len(),
        suite.seeds.len(),
        cohort.len(),
        threads
    );
    let report = run_suite_threaded(&suite, &cohort, threads)?;
    let paths = write_reports(&report, &cfg)?;
    std::io::stdout()
        .write_all(&emit_report(&report, ReportFormat::Markdown))
        .map_err(|e| AppError::io("<stdout>", e))?;
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
    eprintln!("finished in {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

/// Rows `patient_id,J_nats,group,selected` in descending score order.
pub fn mi_report_csv(cohort: &Cohort, k: usize, groups: usize, g_fraction: f64, seed: u64) -> AppResult<String> {
    if cohort.len() < groups {
        return Err(AppError::Usage(format!("cohort has {} patients, fewer than the {groups} groups", cohort.len())));
    }
    let imputed = cohort.records().iter().map(impute_locf).collect::<vitalcast_core::Result<Vec<_>>>()?;
    let scaler = MinMaxScaler::fit(imputed.iter(), "cohort")?;
    let series = imputed.iter().map(|r| scaler.series(r)).collect::<vitalcast_core::Result<Vec<_>>>()?;
    let root = Rng::new(seed);
    let table = score_cohort(&series, k, Some(&root.substream_named("jitter")))?;
    let split = group_and_sample(&table, groups, g_fraction, &mut root.substream_named("sample"))?;
    let mut out = String::from("patient_id,J_nats,group,selected\n");
    for i in table.descending_order() {
        let selected = split.generative.binary_search(&i).is_ok();
        out += &format!(
            "{},{},{},{}\n",
            table.patient_ids[i],
            table.scores[i],
            split.assignment.labels[i],
            u8::from(selected)
        );
    }
    Ok(out)
}

fn mi_report(a: MiReportArgs) -> AppResult<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let suite = cfg.suite()?;
    let cohort = load_cohort(&cfg.data)?;
    let seed = a.seed.unwrap_or(suite.seeds[0]);
    let csv = mi_report_csv(&cohort, suite.models.mi_k, suite.models.mi_groups, suite.generative_share(), seed)?;
    let out = a.out.unwrap_or_else(|| cfg.output.dir.join(format!("{}-mi.csv", cfg.output.stem)));
    write_file(&out, csv.as_bytes())?;
    println!("wrote {} patients -> {}", cohort.len(), out.display());
    Ok(())
}

/// Scaled one-value forecast of `params` from a flat M × K window.
pub fn predict_scaled(params: &ModelParams, window: &[f64], k: usize, column: usize, horizon: usize) -> AppResult<f64> {
    Ok(match params {
        ModelParams::Lstm(p) => p.predict_slice(window)?[0],
        ModelParams::Mlp(p) => p.predict_slice(window)?[0],
        ModelParams::Gpr(m) | ModelParams::Krr(m) => m.predict_slice(window)?,
        ModelParams::Arima(c) => {
            let series: Vec<f64> = window.chunks(k).map(|row| row[column]).collect();
            arima_forecast(c, &series, horizon)?
        }
    })
}

fn fit_model(kind: ModelKind, p: &PreparedSeed, suite: &SuiteConfig, seed: u64) -> AppResult<(ModelParams, Option<f64>)> {
    let h = suite.horizons[0];
    let root = Rng::new(seed);
    let method = match kind {
        ModelKind::Lstm => Method::LstmDirect,
        ModelKind::Mlp => Method::Mlp,
        ModelKind::Gpr => Method::Gpr,
        ModelKind::Krr => Method::Krr,
        ModelKind::Arima => Method::Arima,
    };
    let rng = root.substream_named(&method.name());
    Ok(match kind {
        ModelKind::Lstm => {
            let mut m = lstm_direct_models(p, suite, &rng)?;
            let t = m.remove(&h).expect("horizon trained");
            (ModelParams::Lstm(t.fit.params), Some(t.validation_mse))
        }
        ModelKind::Mlp => {
            let mut m = mlp_models(p, suite, &rng)?;
            let t = m.remove(&h).expect("horizon trained");
            (ModelParams::Mlp(t.fit.params), Some(t.validation_mse))
        }
        ModelKind::Gpr | ModelKind::Krr => {
            let mut m = kernel_models(p, suite, method, &rng)?;
            let s = m.remove(&h).expect("horizon trained");
            let mse = Some(s.validation_mse);
            (if kind == ModelKind::Gpr { ModelParams::Gpr(s.model) } else { ModelParams::Krr(s.model) }, mse)
        }
        ModelKind::Arima => {
            let col = suite.target.feature_index();
            let pooled: Vec<f64> = p.train.iter().flat_map(|s| s.scaled.column(col)).collect();
            (ModelParams::Arima(arima_fit(&pooled)?), None)
        }
    })
}

fn train(a: TrainArgs) -> AppResult<()> {
    let cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::standard(),
    };
    let mut suite = cfg.suite()?;
    suite.horizons = vec![a.horizon];
    suite.seeds = vec![a.seed];
    if let Some(t) = a.target {
        suite.target = t;
    }
    if let Some(w) = a.window {
        suite.window = w;
    }
    if a.horizon == 0 || suite.window == 0 {
        return Err(AppError::Usage("--horizon and --window must be at least 1".into()));
    }
    let cohort = ingest_csv(&a.data)?;
    let p = prepare_seed(&suite, &cohort, a.seed)?;
    let (params, validation_mse) = fit_model(a.model, &p, &suite, a.seed)?;
    let test = &p.test_windows;
    let k = test.n_features();
    let col = suite.target.feature_index();
    let preds = (0..test.len())
        .map(|i| predict_scaled(&params, test.window(i), k, col, a.horizon))
        .collect::<AppResult<Vec<_>>>()?;
    let cell = score_horizon(&preds, test.actuals(a.horizon).expect("horizon windowed"), &p.scaler, suite.target)?;
    let meta = ModelMeta {
        kind: params.kind_name().into(),
        target: suite.target.name().into(),
        window: suite.window,
        horizon: a.horizon,
        seed: a.seed,
        validation_mse,
        scaler: ScalerMeta::from(&p.scaler),
    };
    save_checkpoint(&a.out, &params, &meta)?;
    println!(
        "{} t+{}: test MSE {:.4}, MAPE {:.4}% over {} windows -> {}",
        params.kind_name(),
        a.horizon,
        cell.mse,
        cell.mape,
        cell.n_predictions,
        a.out.display()
    );
    Ok(())
}

fn predict(a: PredictArgs) -> AppResult<()> {
    let (params, meta) = load_checkpoint(&a.checkpoint)?;
    let scaler = meta.scaler.scaler()?;
    let target = meta.target_vital()?;
    let col = target.feature_index();
    let cohort = ingest_csv(&a.data)?;
    let mut out = String::from("patient_id,timestamp,horizon,prediction\n");
    for r in cohort.records() {
        if r.len() < meta.window {
            eprintln!("warning: {} has {} steps, fewer than the window {}; skipped", r.patient_id, r.len(), meta.window);
            continue;
        }
        let series = scaler.series(&impute_locf(r)?)?;
        let k = series.scaled.cols();
        let start = (series.len() - meta.window) * k;
        let y = predict_scaled(&params, &series.scaled.as_slice()[start..], k, col, meta.horizon)?;
        let when = r.start_minute + (r.len() - 1 + meta.horizon) as i64 * vitalcast_core::data::STEP_MINUTES;
        out += &format!("{},{},{},{}\n", r.patient_id, format_timestamp(when), meta.horizon, scaler.invert_value(col, y));
    }
    match &a.out {
        Some(path) => write_file(path, out.as_bytes()),
        None => std::io::stdout().write_all(out.as_bytes()).map_err(|e| AppError::io("<stdout>", e)),
    }
}
