//! Forecasting regimes over one `M × K` window.
//!
//! - [`direct_forecast`]: one model per horizon, each reading the window.
//! - [`iterative_forecast`]: one one-step model fed back on its own output.
//! - [`generative_boost`]: `g` generated steps by window surgery, then
//!   per-horizon direct models read the augmented window.
//!
//! Values are returned in the models' (scaled) units; the pipeline inverts
//! them to original units before scoring.

mod pipeline;

pub use pipeline::{
    augment_dataset, evaluate_glstm, run_glstm_pipeline, train_generator, train_glstm_predictors, GenerativeSplits,
    GlstmBundle, GlstmConfig, PredictorWindows,
};

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::data::{Vital, N_FEATURES, N_VITALS, STATIC_FEATURES};
use crate::error::{Error, Result};
use crate::models::Predictor;
use crate::numerics::Matrix;

/// Which columns of a window a generator writes when a step is appended;
/// every other column is carried forward from the previous last row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLayout {
    pub n_features: usize,
    pub generated: Vec<usize>,
}

impl Default for FeatureLayout {
    /// Seven features with the five vitals generated and age and gender
    /// carried forward.
    fn default() -> Self {
        Self {
            n_features: N_FEATURES,
            generated: (STATIC_FEATURES..STATIC_FEATURES + N_VITALS).collect(),
        }
    }
}

impl FeatureLayout {
    fn check_window(&self, window: &Matrix) -> Result<()> {
        if window.cols() != self.n_features || window.rows() == 0 {
            return Err(Error::shape(
                "forecast window",
                alloc::format!("M x {}", self.n_features),
                alloc::format!("{}x{}", window.rows(), window.cols()),
            ));
        }
        Ok(())
    }

    /// Position of `column` among the generated columns.
    pub fn generated_position(&self, column: usize) -> Result<usize> {
        self.generated
            .iter()
            .position(|&c| c == column)
            .ok_or_else(|| Error::invalid(alloc::format!("column {column} is not generated by this layout")))
    }
}

/// Drop the oldest row and append `generated` (written into the generated
/// columns of a copy of the previous last row). The result keeps shape M × K.
pub fn window_surgery(window: &Matrix, generated: &[f64], layout: &FeatureLayout) -> Result<Matrix> {
    layout.check_window(window)?;
    if generated.len() != layout.generated.len() {
        return Err(Error::shape("generated step", layout.generated.len(), generated.len()));
    }
    let (m, k) = window.shape();
    let mut data = Vec::with_capacity(m * k);
    data.extend_from_slice(&window.as_slice()[k..]);
    let mut next = window.row(m - 1).to_vec();
    for (&c, &v) in layout.generated.iter().zip(generated) {
        next[c] = v;
    }
    data.extend_from_slice(&next);
    Matrix::from_vec(m, k, data)
}

/// Apply `g` generation steps. Returns the augmented window and the
/// generated rows (each in generated-column order).
pub fn augment<G: Predictor + ?Sized>(
    generator: &G,
    window: &Matrix,
    g: usize,
    layout: &FeatureLayout,
) -> Result<(Matrix, Vec<Vec<f64>>)> {
    layout.check_window(window)?;
    let mut w = window.clone();
    let mut steps = Vec::with_capacity(g);
    for _ in 0..g {
        let out = generator.predict(&w)?;
        w = window_surgery(&w, &out, layout)?;
        steps.push(out);
    }
    Ok((w, steps))
}

/// One forecast value and whether it came from the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastValue {
    pub value: f64,
    pub generated: bool,
}

/// Forecasts keyed by horizon.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Forecast {
    pub values: BTreeMap<usize, ForecastValue>,
}

impl Forecast {
    pub fn get(&self, h: usize) -> Option<f64> {
        self.values.get(&h).map(|v| v.value)
    }

    pub fn horizons(&self) -> Vec<usize> {
        self.values.keys().copied().collect()
    }

    /// Horizons whose value came from the generator.
    pub fn generated_horizons(&self) -> Vec<usize> {
        self.values.iter().filter(|(_, v)| v.generated).map(|(&h, _)| h).collect()
    }

    /// Apply `f` to every value (e.g. inverse scaling).
    pub fn map_values(&self, mut f: impl FnMut(f64) -> f64) -> Forecast {
        Forecast {
            values: self
                .values
                .iter()
                .map(|(&h, v)| (h, ForecastValue { value: f(v.value), generated: v.generated }))
                .collect(),
        }
    }
}

fn single_output<P: Predictor + ?Sized>(model: &P, window: &Matrix, context: &'static str) -> Result<f64> {
    let out = model.predict(window)?;
    match out[..] {
        [v] => Ok(v),
        _ => Err(Error::shape(context, 1, out.len())),
    }
}

/// `X̂_{t+h} = f_h(window)` for every `h` in `horizons`.
pub fn direct_forecast<P: Predictor>(models: &BTreeMap<usize, P>, window: &Matrix, horizons: &[usize]) -> Result<Forecast> {
    let mut f = Forecast::default();
    for &h in horizons {
        let model = models
            .get(&h)
            .ok_or_else(|| Error::invalid(alloc::format!("no direct model for horizon {h}")))?;
        f.values.insert(h, ForecastValue { value: single_output(model, window, "direct model output")?, generated: false });
    }
    Ok(f)
}

/// Feed a one-step generator back `n` times; horizon `h` reports the target
/// column of the `h`-th generated step.
pub fn iterative_forecast<G: Predictor + ?Sized>(
    model: &G,
    window: &Matrix,
    n: usize,
    layout: &FeatureLayout,
    target_column: usize,
) -> Result<Forecast> {
    if n < 1 {
        return Err(Error::invalid("iterative forecasting needs N ≥ 1"));
    }
    let pos = layout.generated_position(target_column)?;
    let (_, steps) = augment(model, window, n, layout)?;
    let mut f = Forecast::default();
    for (i, s) in steps.iter().enumerate() {
        f.values.insert(i + 1, ForecastValue { value: s[pos], generated: false });
    }
    Ok(f)
}

/// Generative boosting: `g` generated steps, then `X̂_{t+h} = f_h(augmented)`
/// for `h > g`. Horizons `1..=g` in `horizons` report the generated value of
/// the target column and are flagged as generated.
pub fn generative_boost<G: Predictor + ?Sized, P: Predictor>(
    generator: &G,
    predictors: &BTreeMap<usize, P>,
    window: &Matrix,
    g: usize,
    horizons: &[usize],
    layout: &FeatureLayout,
    target_column: usize,
) -> Result<Forecast> {
    if g == 0 {
        return Err(Error::invalid(
            "generative boosting needs depth g ≥ 1; use direct_forecast for g = 0",
        ));
    }
    let pos = layout.generated_position(target_column)?;
    let (augmented, steps) = augment(generator, window, g, layout)?;
    let mut f = Forecast::default();
    for &h in horizons {
        if h == 0 {
            return Err(Error::invalid("horizons must be ≥ 1"));
        }
        let v = if h <= g {
            ForecastValue { value: steps[h - 1][pos], generated: true }
        } else {
            let model = predictors
                .get(&h)
                .ok_or_else(|| Error::invalid(alloc::format!("no predictive model for horizon {h}")))?;
            ForecastValue { value: single_output(model, &augmented, "predictive model output")?, generated: false }
        };
        f.values.insert(h, v);
    }
    Ok(f)
}

/// Forecasting regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Direct,
    Iterative,
    GenerativeBoosting,
}

/// Declarative description of a forecasting run.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyPlan {
    pub kind: StrategyKind,
    pub depth: usize,
    pub horizons: Vec<usize>,
    pub target: Vital,
}

impl StrategyPlan {
    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(Error::invalid("plan horizons must be nonempty and ≥ 1"));
        }
        match self.kind {
            StrategyKind::Direct if self.depth != 0 => Err(Error::invalid("direct plans have depth 0")),
            StrategyKind::GenerativeBoosting if self.depth == 0 => Err(Error::invalid(
                "generative boosting needs depth g ≥ 1; use a direct plan for g = 0",
            )),
            _ => Ok(()),
        }
    }

    /// Horizons that are scored (generated horizons excluded).
    pub fn reported_horizons(&self) -> Vec<usize> {
        let g = if self.kind == StrategyKind::GenerativeBoosting { self.depth } else { 0 };
        self.horizons.iter().copied().filter(|&h| h > g).collect()
    }
}
