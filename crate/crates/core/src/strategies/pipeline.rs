//! The GLSTM training and testing procedure.
//!
//! 1. Train (and tune on validation) a one-step generator of the vitals on
//!    the generative patients.
//! 2. Augment every predictive, validation and test window by `g` generated
//!    steps (drop the oldest row, append the generated one).
//! 3. Train (and tune) one predictor per reported horizon `h > g` on the
//!    augmented predictive windows, with targets at the original `t + h`.
//! 4. Score the predictors on the augmented test windows in original units.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::data::{make_windows, make_windows_led, MinMaxScaler, PatientSeries, TargetSpec, WindowedDataset};
use crate::error::{Error, Result};
use crate::evaluation::{score_horizon, Method, MetricsReport, SeedResult};
use crate::models::lstm::{lstm_tune, LstmConfig, LstmGrid, LstmParams, LstmTuned};
use crate::models::{Predictor, SupervisedSet, TrainConfig};
use crate::numerics::Rng;
use crate::strategies::{augment, FeatureLayout, StrategyKind, StrategyPlan};

/// Windows the predictors are trained and tuned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorWindows {
    /// Windows augmented by the generator, matching the test windows.
    Generated,
    /// Real windows ending `g` steps later, with targets still anchored to
    /// the un-shifted window.
    Clean,
}

/// Generator and predictor settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GlstmConfig {
    pub window: usize,
    pub layout: FeatureLayout,
    pub generator: LstmConfig,
    pub generator_grid: LstmGrid,
    pub predictor: LstmConfig,
    pub predictor_grid: LstmGrid,
    pub predictor_windows: PredictorWindows,
}

impl GlstmConfig {
    /// One LSTM unit, batches of 20; the generator runs 300 epochs at
    /// 0.0005 and the predictors 100 epochs at 0.001.
    pub fn standard() -> Self {
        Self {
            window: 20,
            layout: FeatureLayout::default(),
            generator: LstmConfig {
                hidden: 1,
                train: TrainConfig { epochs: 300, batch_size: 20, learning_rate: 0.0005 },
            },
            generator_grid: LstmGrid::default(),
            predictor: LstmConfig {
                hidden: 1,
                train: TrainConfig { epochs: 100, batch_size: 20, learning_rate: 0.001 },
            },
            predictor_grid: LstmGrid::default(),
            predictor_windows: PredictorWindows::Generated,
        }
    }
}

/// Patients for each role, already scaled by a scaler fitted on training.
#[derive(Debug, Clone, Copy)]
pub struct GenerativeSplits<'a> {
    pub generative: &'a [PatientSeries],
    pub predictive: &'a [PatientSeries],
    pub validation: &'a [PatientSeries],
    pub test: &'a [PatientSeries],
    /// Whether the generative/predictive patients came from MI selection.
    pub mi_selected: bool,
}

/// A trained generator with its per-horizon predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct GlstmBundle {
    pub depth: usize,
    pub generator: LstmTuned,
    pub predictors: BTreeMap<usize, LstmTuned>,
}

impl GlstmBundle {
    pub fn predictor_params(&self) -> BTreeMap<usize, &LstmParams> {
        self.predictors.iter().map(|(&h, t)| (h, &t.fit.params)).collect()
    }
}

/// Step 1: fit one-step generators of the layout's generated columns on
/// `generative` and keep the grid candidate with the lowest validation MSE.
pub fn train_generator(
    generative: &[PatientSeries],
    validation: &[PatientSeries],
    config: &GlstmConfig,
    rng: &Rng,
) -> Result<LstmTuned> {
    let spec = TargetSpec::columns(&config.layout.generated);
    let train = make_windows(generative, config.window, &[1], &spec)?;
    let val = make_windows(validation, config.window, &[1], &spec)?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::invalid(format!(
            "generator needs windows in both sets (train {}, validation {})",
            train.len(),
            val.len()
        )));
    }
    lstm_tune(
        &SupervisedSet::from_windows(&train, 1)?,
        &SupervisedSet::from_windows(&val, 1)?,
        config.layout.n_features,
        &config.generator,
        &config.generator_grid,
        rng,
    )
}

/// Step 2: replace every window of `ds` by its `g`-step augmentation.
pub fn augment_dataset<G: Predictor + ?Sized>(
    generator: &G,
    ds: &WindowedDataset,
    g: usize,
    layout: &FeatureLayout,
) -> Result<WindowedDataset> {
    let mut windows = Vec::with_capacity(ds.windows().len());
    for i in 0..ds.len() {
        let (w, _) = augment(generator, &ds.window_matrix(i), g, layout)?;
        windows.extend_from_slice(w.as_slice());
    }
    ds.with_windows(windows)
}

fn predictor_windows<G: Predictor + ?Sized>(
    generator: &G,
    series: &[PatientSeries],
    horizons: &[usize],
    spec: &TargetSpec,
    g: usize,
    config: &GlstmConfig,
) -> Result<WindowedDataset> {
    match config.predictor_windows {
        PredictorWindows::Generated => {
            let ds = make_windows(series, config.window, horizons, spec)?;
            augment_dataset(generator, &ds, g, &config.layout)
        }
        PredictorWindows::Clean => make_windows_led(series, config.window, horizons, spec, g),
    }
}

/// Step 3: one tuned predictor per horizon `h > g`. Horizon `h` draws from
/// `rng.substream_named("h{h}")`, so results do not depend on the order or
/// parallelism of the fits.
pub fn train_glstm_predictors<G: Predictor + ?Sized>(
    generator: &G,
    predictive: &[PatientSeries],
    validation: &[PatientSeries],
    plan: &StrategyPlan,
    config: &GlstmConfig,
    rng: &Rng,
) -> Result<BTreeMap<usize, LstmTuned>> {
    let spec = TargetSpec::vital(plan.target);
    let g = plan.depth;
    let train = predictor_windows(generator, predictive, &plan.horizons, &spec, g, config)?;
    let val = predictor_windows(generator, validation, &plan.horizons, &spec, g, config)?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::invalid(format!(
            "predictors need windows in both sets (train {}, validation {})",
            train.len(),
            val.len()
        )));
    }
    let mut out = BTreeMap::new();
    for h in plan.reported_horizons() {
        let tuned = lstm_tune(
            &SupervisedSet::from_windows(&train, h)?,
            &SupervisedSet::from_windows(&val, h)?,
            config.layout.n_features,
            &config.predictor,
            &config.predictor_grid,
            &rng.substream_named(&format!("h{h}")),
        )?;
        out.insert(h, tuned);
    }
    Ok(out)
}

/// Step 4: score predictors on augmented test windows, in original units.
pub fn evaluate_glstm<G: Predictor + ?Sized>(
    generator: &G,
    predictors: &BTreeMap<usize, &LstmParams>,
    test: &WindowedDataset,
    plan: &StrategyPlan,
    scaler: &MinMaxScaler,
    layout: &FeatureLayout,
) -> Result<BTreeMap<usize, crate::evaluation::SeedCell>> {
    let augmented = augment_dataset(generator, test, plan.depth, layout)?;
    let mut out = BTreeMap::new();
    for h in plan.reported_horizons() {
        let model = predictors
            .get(&h)
            .ok_or_else(|| Error::invalid(format!("no predictive model for horizon {h}")))?;
        let mut preds = Vec::with_capacity(augmented.len());
        for i in 0..augmented.len() {
            preds.push(model.predict_slice(augmented.window(i))?[0]);
        }
        let actuals = augmented
            .actuals(h)
            .ok_or_else(|| Error::invalid(format!("test windows lack horizon {h}")))?;
        out.insert(h, score_horizon(&preds, actuals, scaler, plan.target)?);
    }
    Ok(out)
}

/// Run the full procedure for one generative-boosting plan.
pub fn run_glstm_pipeline(
    splits: &GenerativeSplits<'_>,
    plan: &StrategyPlan,
    config: &GlstmConfig,
    scaler: &MinMaxScaler,
    rng: &Rng,
) -> Result<(GlstmBundle, MetricsReport)> {
    plan.validate()?;
    if plan.kind != StrategyKind::GenerativeBoosting {
        return Err(Error::invalid("run_glstm_pipeline needs a generative-boosting plan"));
    }
    let generator = train_generator(splits.generative, splits.validation, config, &rng.substream_named("generator"))
        .map_err(|e| e.in_stage("generator training"))?;
    let predictors = train_glstm_predictors(
        &generator.fit.params,
        splits.predictive,
        splits.validation,
        plan,
        config,
        &rng.substream_named("predictors"),
    )
    .map_err(|e| e.in_stage("predictor training"))?;
    let bundle = GlstmBundle { depth: plan.depth, generator, predictors };
    let test = make_windows(splits.test, config.window, &plan.horizons, &TargetSpec::vital(plan.target))
        .map_err(|e| e.in_stage("test windows"))?;
    if test.is_empty() {
        return Err(Error::invalid("test patients produce no windows").in_stage("test windows"));
    }
    let cells = evaluate_glstm(&bundle.generator.fit.params, &bundle.predictor_params(), &test, plan, scaler, &config.layout)
        .map_err(|e| e.in_stage("evaluation"))?;
    let method = Method::Glstm { depth: plan.depth, mi: splits.mi_selected };
    let result = SeedResult { seed: rng.seed(), cells: [(method, cells)].into_iter().collect() };
    let mut horizons = plan.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    let report = crate::evaluation::aggregate(plan.target, &[method], &horizons, &[result])?;
    Ok((bundle, report))
}
