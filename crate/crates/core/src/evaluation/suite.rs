//! Benchmark suite: per seed, split patients, fit the scaler on the
//! training patients, train every configured method and score it on the
//! shared test windows; then average over seeds.
//!
//! Every random choice of a seed draws from a substream of `Rng::new(seed)`
//! keyed by a label naming its purpose, so results are independent of the
//! order in which methods, horizons or seeds are run.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::data::{
    impute_locf, make_windows, split_patients, Cohort, MinMaxScaler, PatientSeries, PatientSplit, SplitPlan,
    TargetSpec, Vital, WindowedDataset,
};
use crate::error::{Error, Result};
use crate::evaluation::{aggregate, mape, mse, Method, MetricsReport, SeedCell, SeedResult};
use crate::micluster::{group_and_sample, score_cohort, SampledSplit};
use crate::models::arima::{arima_fit, arima_forecast_path};
use crate::models::kernel::{select_by_validation, Centering, GridPoint, Selection};
use crate::models::lstm::{lstm_tune, LstmConfig, LstmGrid, LstmTuned};
use crate::models::mlp::{mlp_tune, MlpConfig, MlpTuned, DEFAULT_HIDDEN};
use crate::models::{gpr, krr, SupervisedSet};
use crate::numerics::Rng;
use crate::strategies::{
    evaluate_glstm, train_generator, train_glstm_predictors, FeatureLayout, GlstmConfig, PredictorWindows,
    StrategyKind, StrategyPlan,
};

/// Settings of the kernel benchmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSettings {
    /// Training windows are subsampled to at most this many per seed.
    pub max_train: usize,
    /// Validation windows used for grid selection, at most this many.
    pub max_validation: usize,
    pub gpr_grid: Vec<GridPoint>,
    pub krr_grid: Vec<GridPoint>,
}

impl Default for KernelSettings {
    fn default() -> Self {
        Self {
            max_train: 500,
            max_validation: 500,
            gpr_grid: gpr::default_grid(),
            krr_grid: krr::default_grid(),
        }
    }
}

/// Hyperparameters of every method.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSettings {
    pub generator: LstmConfig,
    pub generator_grid: LstmGrid,
    /// GLSTM predictors and the direct LSTM benchmark.
    pub predictor: LstmConfig,
    pub predictor_grid: LstmGrid,
    pub predictor_windows: PredictorWindows,
    pub mlp: MlpConfig,
    pub mlp_learning_rates: Vec<f64>,
    pub kernel: KernelSettings,
    /// Neighbour count of the MI estimator.
    pub mi_k: usize,
    /// Number of MI score groups (L).
    pub mi_groups: usize,
}

impl Default for ModelSettings {
    fn default() -> Self {
        let glstm = GlstmConfig::standard();
        Self {
            generator: glstm.generator,
            generator_grid: glstm.generator_grid,
            predictor: glstm.predictor.clone(),
            predictor_grid: glstm.predictor_grid,
            predictor_windows: glstm.predictor_windows,
            mlp: MlpConfig { hidden: DEFAULT_HIDDEN.to_vec(), train: glstm.predictor.train },
            mlp_learning_rates: Vec::new(),
            kernel: KernelSettings::default(),
            mi_k: 3,
            mi_groups: 10,
        }
    }
}

/// A complete suite run description.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub methods: Vec<Method>,
    pub horizons: Vec<usize>,
    pub target: Vital,
    pub window: usize,
    pub seeds: Vec<u64>,
    /// Split fractions; the shuffle seed is the run seed unless
    /// `fixed_split_seed` holds every run on one split.
    pub split: SplitPlan,
    pub fixed_split_seed: Option<u64>,
    pub models: ModelSettings,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            methods: Method::default_suite(),
            horizons: (1..=12).collect(),
            target: Vital::HeartRate,
            window: 20,
            seeds: (0..10).collect(),
            split: SplitPlan::default(),
            fixed_split_seed: None,
            models: ModelSettings::default(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods configured"));
        }
        let mut m = self.methods.clone();
        m.sort();
        if m.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("methods must be unique"));
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(Error::invalid("horizons must be nonempty and all ≥ 1"));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("horizons must be strictly increasing"));
        }
        if self.window == 0 {
            return Err(Error::invalid("window length must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("at least one seed is required"));
        }
        let mut s = self.seeds.clone();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("seeds must be unique"));
        }
        for method in &self.methods {
            if method.generated_depth() >= *self.horizons.last().unwrap() {
                return Err(Error::invalid(format!(
                    "{method} generates every configured horizon; nothing would be scored"
                )));
            }
        }
        self.split.validate()?;
        self.models.generator.train.validate()?;
        self.models.predictor.train.validate()?;
        self.models.mlp.train.validate()?;
        if self.models.mi_k == 0 || self.models.mi_groups == 0 {
            return Err(Error::invalid("mi_k and mi_groups must be at least 1"));
        }
        if self.models.kernel.max_train == 0 || self.models.kernel.max_validation == 0 {
            return Err(Error::invalid("kernel subsample caps must be at least 1"));
        }
        Ok(())
    }

    fn glstm_config(&self) -> GlstmConfig {
        GlstmConfig {
            window: self.window,
            layout: FeatureLayout::default(),
            generator: self.models.generator.clone(),
            generator_grid: self.models.generator_grid.clone(),
            predictor: self.models.predictor.clone(),
            predictor_grid: self.models.predictor_grid.clone(),
            predictor_windows: self.models.predictor_windows,
        }
    }

    /// Fraction of the training patients that train the generator.
    pub fn generative_share(&self) -> f64 {
        self.split.generative / self.split.train
    }
}

/// Score scaled predictions of the target vital against original-unit actuals.
pub fn score_horizon(predictions: &[f64], actuals: &[f64], scaler: &MinMaxScaler, target: Vital) -> Result<SeedCell> {
    let f = target.feature_index();
    let inverted: Vec<f64> = predictions.iter().map(|&p| scaler.invert_value(f, p)).collect();
    let m = mape(&inverted, actuals)?;
    Ok(SeedCell {
        mse: mse(&inverted, actuals)?,
        mape: m.percent,
        mape_excluded: m.excluded,
        n_predictions: inverted.len(),
    })
}

/// Data of one seed: split, scaler and scaled series per role.
#[derive(Debug, Clone)]
pub struct PreparedSeed {
    pub seed: u64,
    pub split: PatientSplit,
    pub scaler: MinMaxScaler,
    pub train: Vec<PatientSeries>,
    pub validation: Vec<PatientSeries>,
    pub test: Vec<PatientSeries>,
    pub predictive: Vec<PatientSeries>,
    pub generative: Vec<PatientSeries>,
    /// Windows with every configured horizon, target vital only.
    pub train_windows: WindowedDataset,
    pub validation_windows: WindowedDataset,
    pub test_windows: WindowedDataset,
}

/// Impute, split, fit the scaler on training patients and window.
pub fn prepare_seed(config: &SuiteConfig, cohort: &Cohort, seed: u64) -> Result<PreparedSeed> {
    let records = cohort.records().iter().map(impute_locf).collect::<Result<Vec<_>>>()?;
    let plan = SplitPlan { seed: config.fixed_split_seed.unwrap_or(seed), ..config.split.clone() };
    let split = split_patients(records.len(), &plan)?;
    let label = format!("train/seed-{}", plan.seed);
    let scaler = MinMaxScaler::fit(split.train.iter().map(|&i| &records[i]), &label)?;
    let series = |idx: &[usize]| idx.iter().map(|&i| scaler.series(&records[i])).collect::<Result<Vec<_>>>();
    let (train, validation, test) = (series(&split.train)?, series(&split.validation)?, series(&split.test)?);
    let (predictive, generative) = (series(&split.predictive)?, series(&split.generative)?);
    let spec = TargetSpec::vital(config.target);
    let w = |s: &[PatientSeries]| make_windows(s, config.window, &config.horizons, &spec);
    let (train_windows, validation_windows, test_windows) = (w(&train)?, w(&validation)?, w(&test)?);
    for (name, ds) in [("train", &train_windows), ("validation", &validation_windows), ("test", &test_windows)] {
        if ds.is_empty() {
            return Err(Error::invalid(format!(
                "{name} patients are too short for window {} and horizon {}",
                config.window,
                config.horizons.last().unwrap()
            )));
        }
    }
    Ok(PreparedSeed {
        seed,
        split,
        scaler,
        train,
        validation,
        test,
        predictive,
        generative,
        train_windows,
        validation_windows,
        test_windows,
    })
}

fn subsample(ds: &WindowedDataset, cap: usize, rng: &mut Rng) -> WindowedDataset {
    if ds.len() <= cap {
        return ds.clone();
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    rng.shuffle(&mut idx);
    idx.truncate(cap);
    idx.sort_unstable();
    ds.select(&idx)
}

fn run_arima(p: &PreparedSeed, config: &SuiteConfig) -> Result<BTreeMap<usize, SeedCell>> {
    let col = config.target.feature_index();
    let h_max = *config.horizons.last().unwrap();
    let test = &p.test_windows;
    let mut preds: BTreeMap<usize, Vec<f64>> = config.horizons.iter().map(|&h| (h, Vec::with_capacity(test.len()))).collect();
    for i in 0..test.len() {
        let series = test.window_matrix(i).column(col);
        let coeffs = arima_fit(&series)?;
        let path = arima_forecast_path(&coeffs, &series, h_max)?;
        for &h in &config.horizons {
            preds.get_mut(&h).unwrap().push(path[h - 1]);
        }
    }
    score_all(&preds, test, &p.scaler, config.target)
}

fn score_all(
    preds: &BTreeMap<usize, Vec<f64>>,
    test: &WindowedDataset,
    scaler: &MinMaxScaler,
    target: Vital,
) -> Result<BTreeMap<usize, SeedCell>> {
    preds
        .iter()
        .map(|(&h, p)| {
            let actuals = test.actuals(h).ok_or_else(|| Error::invalid(format!("test windows lack horizon {h}")))?;
            Ok((h, score_horizon(p, actuals, scaler, target)?))
        })
        .collect()
}

/// Kernel benchmark (`Method::Gpr` or `Method::Krr`): subsample the
/// training and validation windows, then grid-select one model per horizon.
pub fn kernel_models(p: &PreparedSeed, config: &SuiteConfig, method: Method, rng: &Rng) -> Result<BTreeMap<usize, Selection>> {
    let ks = &config.models.kernel;
    let (grid, centering) = match method {
        Method::Gpr => (&ks.gpr_grid, Centering::Mean),
        Method::Krr => (&ks.krr_grid, Centering::None),
        other => return Err(Error::invalid(format!("{other} is not a kernel method"))),
    };
    let train = subsample(&p.train_windows, ks.max_train, &mut rng.substream_named("train-subsample"));
    let val = subsample(&p.validation_windows, ks.max_validation, &mut rng.substream_named("validation-subsample"));
    let mut out = BTreeMap::new();
    for &h in &config.horizons {
        let sel = select_by_validation(
            &SupervisedSet::from_windows(&train, h)?,
            &SupervisedSet::from_windows(&val, h)?,
            grid,
            centering,
        )?;
        out.insert(h, sel);
    }
    Ok(out)
}

fn run_kernel(p: &PreparedSeed, config: &SuiteConfig, method: Method, rng: &Rng) -> Result<BTreeMap<usize, SeedCell>> {
    let test = &p.test_windows;
    let mut preds = BTreeMap::new();
    for (h, sel) in kernel_models(p, config, method, rng)? {
        let v = (0..test.len()).map(|i| sel.model.predict_slice(test.window(i))).collect::<Result<Vec<_>>>()?;
        preds.insert(h, v);
    }
    score_all(&preds, test, &p.scaler, config.target)
}

/// MLP benchmark: one tuned network per horizon on the flattened windows.
pub fn mlp_models(p: &PreparedSeed, config: &SuiteConfig, rng: &Rng) -> Result<BTreeMap<usize, MlpTuned>> {
    let mut out = BTreeMap::new();
    for &h in &config.horizons {
        let tuned = mlp_tune(
            &SupervisedSet::from_windows(&p.train_windows, h)?,
            &SupervisedSet::from_windows(&p.validation_windows, h)?,
            &config.models.mlp,
            &config.models.mlp_learning_rates,
            &rng.substream_named(&format!("h{h}")),
        )?;
        out.insert(h, tuned);
    }
    Ok(out)
}

fn run_mlp(p: &PreparedSeed, config: &SuiteConfig, rng: &Rng) -> Result<BTreeMap<usize, SeedCell>> {
    let test = &p.test_windows;
    let mut preds = BTreeMap::new();
    for (h, tuned) in mlp_models(p, config, rng)? {
        let v = (0..test.len())
            .map(|i| Ok(tuned.fit.params.predict_slice(test.window(i))?[0]))
            .collect::<Result<Vec<_>>>()?;
        preds.insert(h, v);
    }
    score_all(&preds, test, &p.scaler, config.target)
}

/// Direct LSTM benchmark: one tuned network per horizon, trained on all
/// training patients.
pub fn lstm_direct_models(p: &PreparedSeed, config: &SuiteConfig, rng: &Rng) -> Result<BTreeMap<usize, LstmTuned>> {
    let mut out = BTreeMap::new();
    for &h in &config.horizons {
        let tuned = lstm_tune(
            &SupervisedSet::from_windows(&p.train_windows, h)?,
            &SupervisedSet::from_windows(&p.validation_windows, h)?,
            p.train_windows.n_features(),
            &config.models.predictor,
            &config.models.predictor_grid,
            &rng.substream_named(&format!("h{h}")),
        )?;
        out.insert(h, tuned);
    }
    Ok(out)
}

fn run_lstm_direct(p: &PreparedSeed, config: &SuiteConfig, rng: &Rng) -> Result<BTreeMap<usize, SeedCell>> {
    let models = lstm_direct_models(p, config, rng)?;
    let test = &p.test_windows;
    let mut preds = BTreeMap::new();
    for (&h, m) in &models {
        let v = (0..test.len())
            .map(|i| Ok(m.fit.params.predict_slice(test.window(i))?[0]))
            .collect::<Result<Vec<_>>>()?;
        preds.insert(h, v);
    }
    score_all(&preds, test, &p.scaler, config.target)
}

/// MI-based selection of the generative patients among the training ones.
pub fn mi_selection(p: &PreparedSeed, config: &SuiteConfig, rng: &Rng) -> Result<SampledSplit> {
    let table = score_cohort(&p.train, config.models.mi_k, Some(&rng.substream_named("jitter")))?;
    group_and_sample(&table, config.models.mi_groups, config.generative_share(), &mut rng.substream_named("sample"))
}

/// Train and score every configured method for one seed.
pub fn run_seed(config: &SuiteConfig, cohort: &Cohort, seed: u64) -> Result<SeedResult> {
    config.validate()?;
    let stage = |what: &str| format!("{what} (seed {seed})");
    let p = prepare_seed(config, cohort, seed).map_err(|e| e.in_stage(stage("data preparation")))?;
    let root = Rng::new(seed);
    let glstm = config.glstm_config();
    let mut generators: BTreeMap<bool, LstmTuned> = BTreeMap::new();
    let mut mi_sets: Option<(Vec<PatientSeries>, Vec<PatientSeries>)> = None;
    let mut cells = BTreeMap::new();
    for &method in &config.methods {
        let name = method.name();
        let rng = root.substream_named(&name);
        let result = match method {
            Method::Arima => run_arima(&p, config),
            Method::Krr | Method::Gpr => run_kernel(&p, config, method, &rng),
            Method::Mlp => run_mlp(&p, config, &rng),
            Method::LstmDirect => run_lstm_direct(&p, config, &rng),
            Method::Glstm { depth, mi } => (|| {
                if mi && mi_sets.is_none() {
                    let sel = mi_selection(&p, config, &root.substream_named("mi-selection"))
                        .map_err(|e| e.in_stage("MI selection"))?;
                    let pick = |idx: &[usize]| idx.iter().map(|&i| p.train[i].clone()).collect::<Vec<_>>();
                    mi_sets = Some((pick(&sel.generative), pick(&sel.predictive)));
                }
                let (gen_set, pred_set): (&[PatientSeries], &[PatientSeries]) = match (&mi_sets, mi) {
                    (Some((g, pr)), true) => (g, pr),
                    _ => (&p.generative, &p.predictive),
                };
                if !generators.contains_key(&mi) {
                    let label = if mi { "generator-mi" } else { "generator" };
                    let g = train_generator(gen_set, &p.validation, &glstm, &root.substream_named(label))
                        .map_err(|e| e.in_stage("generator training"))?;
                    generators.insert(mi, g);
                }
                let generator = &generators[&mi].fit.params;
                let plan = StrategyPlan {
                    kind: StrategyKind::GenerativeBoosting,
                    depth,
                    horizons: config.horizons.clone(),
                    target: config.target,
                };
                let predictors = train_glstm_predictors(generator, pred_set, &p.validation, &plan, &glstm, &rng)
                    .map_err(|e| e.in_stage("predictor training"))?;
                let params = predictors.iter().map(|(&h, t)| (h, &t.fit.params)).collect();
                evaluate_glstm(generator, &params, &p.test_windows, &plan, &p.scaler, &glstm.layout)
                    .map_err(|e| e.in_stage("evaluation"))
            })(),
        };
        let by_h = result.map_err(|e| e.in_stage(stage(&name)))?;
        cells.insert(method, by_h);
    }
    Ok(SeedResult { seed, cells })
}

/// Run every seed in order and average. Any failure aborts the suite.
pub fn run_suite(config: &SuiteConfig, cohort: &Cohort) -> Result<MetricsReport> {
    config.validate()?;
    let results = config.seeds.iter().map(|&s| run_seed(config, cohort, s)).collect::<Result<Vec<_>>>()?;
    aggregate(config.target, &config.methods, &config.horizons, &results)
}
