//! Single-layer LSTM with a linear readout of the final hidden state.
//!
//! Per step, with gates stacked in the order input, forget, cell, output:
//!
//! ```text
//! a   = W_x x_t + W_h h_{t-1} + b
//! i   = σ(a_i)   f = σ(a_f)   g = tanh(a_g)   o = σ(a_o)
//! c_t = f ⊙ c_{t-1} + i ⊙ g
//! h_t = o ⊙ tanh(c_t)
//! y   = W_y h_M + b_y
//! ```
//!
//! States start at zero. Gradients are exact BPTT over the whole window.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{sigmoid, tanh};
use crate::models::train::{fit_minibatch, GradientModel};
use crate::models::{Predictor, SupervisedSet, TrainConfig, TrainHistory, INIT_RANGE};
use crate::numerics::{Matrix, Rng};

/// LSTM weights in one flat buffer.
///
/// Layout: `W_x` (4H × K, row `q·H + j` is gate `q`, unit `j`), `W_h`
/// (4H × H), `b` (4H), `W_y` (D × H), `b_y` (D).
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    input: usize,
    hidden: usize,
    output: usize,
    values: Vec<f64>,
}

/// Activations kept from a forward pass for [`lstm_backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCache {
    steps: usize,
    window: Vec<f64>,
    ws: Workspace,
    fingerprint: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Workspace {
    /// Activated gates, steps × 4H.
    gates: Vec<f64>,
    /// Cell states, (steps + 1) × H, row 0 is the zero initial state.
    cells: Vec<f64>,
    hidden: Vec<f64>,
    tanh_cells: Vec<f64>,
    out: Vec<f64>,
    dh: Vec<f64>,
    dc: Vec<f64>,
    da: Vec<f64>,
}

pub fn param_count(input: usize, hidden: usize, output: usize) -> usize {
    4 * hidden * (input + hidden + 1) + output * (hidden + 1)
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize, output: usize) -> Self {
        Self {
            input,
            hidden,
            output,
            values: vec![0.0; param_count(input, hidden, output)],
        }
    }

    /// Every parameter uniform in `[-0.08, 0.08]`.
    pub fn init(input: usize, hidden: usize, output: usize, rng: &mut Rng) -> Self {
        let mut p = Self::zeros(input, hidden, output);
        for v in p.values.iter_mut() {
            *v = rng.uniform_range(-INIT_RANGE, INIT_RANGE);
        }
        p
    }

    pub fn from_values(input: usize, hidden: usize, output: usize, values: Vec<f64>) -> Result<Self> {
        let n = param_count(input, hidden, output);
        if values.len() != n {
            return Err(Error::shape("LstmParams::from_values", n, values.len()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "LstmParams",
                index,
            });
        }
        if input == 0 || hidden == 0 || output == 0 {
            return Err(Error::invalid("LSTM dimensions must be nonzero"));
        }
        Ok(Self {
            input,
            hidden,
            output,
            values,
        })
    }

    pub fn input_size(&self) -> usize {
        self.input
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn output_size(&self) -> usize {
        self.output
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn offsets(&self) -> [usize; 5] {
        let (k, h, d) = (self.input, self.hidden, self.output);
        let wx = 0;
        let wh = wx + 4 * h * k;
        let b = wh + 4 * h * h;
        let wy = b + 4 * h;
        let by = wy + d * h;
        [wx, wh, b, wy, by]
    }

    /// View of `W_x`, `W_h`, `b`, `W_y`, `b_y`.
    pub fn split(&self) -> (&[f64], &[f64], &[f64], &[f64], &[f64]) {
        split_buffer(&self.values, self.offsets())
    }

    fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.values {
            h ^= v.to_bits();
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }

    fn workspace_for(&self, steps: usize) -> Workspace {
        let h = self.hidden;
        Workspace {
            gates: vec![0.0; steps * 4 * h],
            cells: vec![0.0; (steps + 1) * h],
            hidden: vec![0.0; (steps + 1) * h],
            tanh_cells: vec![0.0; steps * h],
            out: vec![0.0; self.output],
            dh: vec![0.0; h],
            dc: vec![0.0; h],
            da: vec![0.0; 4 * h],
        }
    }

    fn check_window(&self, len: usize) -> Result<usize> {
        if len == 0 || len % self.input != 0 {
            return Err(Error::shape(
                "lstm window",
                alloc::format!("steps x {}", self.input),
                alloc::format!("{len} values"),
            ));
        }
        Ok(len / self.input)
    }

    /// Forward over a flat `steps × K` window into `ws`.
    fn forward_ws(&self, x: &[f64], ws: &mut Workspace) {
        let (k, h) = (self.input, self.hidden);
        let steps = x.len() / k;
        if ws.cells.len() != (steps + 1) * h {
            *ws = self.workspace_for(steps);
        }
        let (wx, wh, b, wy, by) = self.split();
        ws.cells[..h].iter_mut().for_each(|v| *v = 0.0);
        ws.hidden[..h].iter_mut().for_each(|v| *v = 0.0);
        for t in 0..steps {
            let xt = &x[t * k..(t + 1) * k];
            let gates = &mut ws.gates[t * 4 * h..(t + 1) * 4 * h];
            let h_prev = &ws.hidden[t * h..(t + 1) * h];
            for r in 0..4 * h {
                let mut a = b[r];
                for (w, xv) in wx[r * k..(r + 1) * k].iter().zip(xt) {
                    a += w * xv;
                }
                for (w, hv) in wh[r * h..(r + 1) * h].iter().zip(h_prev) {
                    a += w * hv;
                }
                gates[r] = if r / h == 2 { tanh(a) } else { sigmoid(a) };
            }
            for j in 0..h {
                let (i, f, g, o) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                let c = f * ws.cells[t * h + j] + i * g;
                let tc = tanh(c);
                ws.cells[(t + 1) * h + j] = c;
                ws.tanh_cells[t * h + j] = tc;
                ws.hidden[(t + 1) * h + j] = o * tc;
            }
        }
        let h_last = &ws.hidden[steps * h..(steps + 1) * h];
        for d in 0..self.output {
            let mut y = by[d];
            for (w, hv) in wy[d * h..(d + 1) * h].iter().zip(h_last) {
                y += w * hv;
            }
            ws.out[d] = y;
        }
    }

    /// BPTT for the pass stored in `ws`, adding into `grad`.
    fn backward_ws(&self, x: &[f64], dy: &[f64], ws: &mut Workspace, grad: &mut [f64]) {
        let (k, h) = (self.input, self.hidden);
        let steps = x.len() / k;
        let offsets = self.offsets();
        let (_, wh, _, wy, _) = self.split();
        let (gwx, gwh, gb, gwy, gby) = split_buffer_mut(grad, offsets);
        let h_last = &ws.hidden[steps * h..(steps + 1) * h];
        for j in 0..h {
            ws.dh[j] = 0.0;
            ws.dc[j] = 0.0;
        }
        for d in 0..self.output {
            gby[d] += dy[d];
            for j in 0..h {
                gwy[d * h + j] += dy[d] * h_last[j];
                ws.dh[j] += wy[d * h + j] * dy[d];
            }
        }
        for t in (0..steps).rev() {
            let gates = &ws.gates[t * 4 * h..(t + 1) * 4 * h];
            for j in 0..h {
                let (i, f, g, o) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                let tc = ws.tanh_cells[t * h + j];
                let c_prev = ws.cells[t * h + j];
                let dh = ws.dh[j];
                let d_o = dh * tc;
                let dc = ws.dc[j] + dh * o * (1.0 - tc * tc);
                ws.da[j] = dc * g * i * (1.0 - i);
                ws.da[h + j] = dc * c_prev * f * (1.0 - f);
                ws.da[2 * h + j] = dc * i * (1.0 - g * g);
                ws.da[3 * h + j] = d_o * o * (1.0 - o);
                ws.dc[j] = dc * f;
            }
            let xt = &x[t * k..(t + 1) * k];
            let h_prev = &ws.hidden[t * h..(t + 1) * h];
            for j in 0..h {
                ws.dh[j] = 0.0;
            }
            for r in 0..4 * h {
                let da = ws.da[r];
                if da == 0.0 {
                    continue;
                }
                gb[r] += da;
                for (g, xv) in gwx[r * k..(r + 1) * k].iter_mut().zip(xt) {
                    *g += da * xv;
                }
                for j in 0..h {
                    gwh[r * h + j] += da * h_prev[j];
                    ws.dh[j] += wh[r * h + j] * da;
                }
            }
        }
    }

    /// Output for a flat window without building a cache.
    pub fn predict_slice(&self, window: &[f64]) -> Result<Vec<f64>> {
        let steps = self.check_window(window.len())?;
        let mut ws = self.workspace_for(steps);
        self.forward_ws(window, &mut ws);
        Ok(ws.out)
    }

    /// Mean squared error over a supervised set.
    pub fn mse(&self, data: &SupervisedSet<'_>) -> Result<f64> {
        if data.input_len % self.input != 0 || data.target_dim != self.output {
            return Err(Error::shape("LstmParams::mse", self.output, data.target_dim));
        }
        let mut ws = self.workspace_for(data.input_len / self.input);
        let mut sse = 0.0;
        for i in 0..data.len() {
            self.forward_ws(data.input(i), &mut ws);
            sse += ws.out.iter().zip(data.target(i)).map(|(y, t)| (y - t) * (y - t)).sum::<f64>();
        }
        Ok(sse / (data.len() * self.output) as f64)
    }
}

fn split_buffer(v: &[f64], o: [usize; 5]) -> (&[f64], &[f64], &[f64], &[f64], &[f64]) {
    (&v[o[0]..o[1]], &v[o[1]..o[2]], &v[o[2]..o[3]], &v[o[3]..o[4]], &v[o[4]..])
}

fn split_buffer_mut(v: &mut [f64], o: [usize; 5]) -> (&mut [f64], &mut [f64], &mut [f64], &mut [f64], &mut [f64]) {
    let (wx, rest) = v.split_at_mut(o[1]);
    let (wh, rest) = rest.split_at_mut(o[2] - o[1]);
    let (b, rest) = rest.split_at_mut(o[3] - o[2]);
    let (wy, by) = rest.split_at_mut(o[4] - o[3]);
    (wx, wh, b, wy, by)
}

/// Run the recurrence over an M × K window from zero states.
pub fn lstm_forward(params: &LstmParams, window: &Matrix) -> Result<(Vec<f64>, LstmCache)> {
    if window.cols() != params.input || window.rows() == 0 {
        return Err(Error::shape("lstm_forward window", alloc::format!("M x {}", params.input), alloc::format!("{}x{}", window.rows(), window.cols())));
    }
    let mut ws = params.workspace_for(window.rows());
    params.forward_ws(window.as_slice(), &mut ws);
    let out = ws.out.clone();
    Ok((
        out,
        LstmCache {
            steps: window.rows(),
            window: window.as_slice().to_vec(),
            ws,
            fingerprint: params.fingerprint(),
        },
    ))
}

/// Gradients of `output_grad · y` with respect to every parameter, in the
/// [`LstmParams`] layout.
pub fn lstm_backward(params: &LstmParams, cache: &LstmCache, output_grad: &[f64]) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; params.values.len()];
    lstm_backward_into(params, cache, output_grad, &mut grad)?;
    Ok(grad)
}

/// Like [`lstm_backward`] but adds into `grad`, for batch accumulation.
pub fn lstm_backward_into(params: &LstmParams, cache: &LstmCache, output_grad: &[f64], grad: &mut [f64]) -> Result<()> {
    if cache.fingerprint != params.fingerprint() || cache.ws.out.len() != params.output || cache.window.len() != cache.steps * params.input {
        return Err(Error::invalid("stale LSTM cache: parameters changed since the forward pass"));
    }
    if output_grad.len() != params.output {
        return Err(Error::shape("lstm_backward output_grad", params.output, output_grad.len()));
    }
    if grad.len() != params.values.len() {
        return Err(Error::shape("lstm_backward grad", params.values.len(), grad.len()));
    }
    let mut ws = cache.ws.clone();
    params.backward_ws(&cache.window, output_grad, &mut ws, grad);
    Ok(())
}

impl GradientModel for LstmParams {
    type Workspace = Workspace;

    fn workspace(&self) -> Workspace {
        self.workspace_for(1)
    }

    fn params(&self) -> &[f64] {
        &self.values
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn accumulate(&self, input: &[f64], target: &[f64], scale: f64, grad: &mut [f64], ws: &mut Workspace) -> f64 {
        self.forward_ws(input, ws);
        let mut sse = 0.0;
        let mut dy = [0.0f64; 16];
        let mut dy_vec;
        let dy: &mut [f64] = if self.output <= dy.len() {
            &mut dy[..self.output]
        } else {
            dy_vec = vec![0.0; self.output];
            &mut dy_vec
        };
        for d in 0..self.output {
            let e = ws.out[d] - target[d];
            sse += e * e;
            dy[d] = scale * e;
        }
        self.backward_ws(input, dy, ws, grad);
        sse
    }
}

impl Predictor for LstmParams {
    fn output_dim(&self) -> usize {
        self.output
    }

    fn predict(&self, window: &Matrix) -> Result<Vec<f64>> {
        if window.cols() != self.input {
            return Err(Error::shape("LSTM predict window features", self.input, window.cols()));
        }
        self.predict_slice(window.as_slice())
    }
}

/// Network size plus optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmConfig {
    pub hidden: usize,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmFit {
    pub params: LstmParams,
    pub history: TrainHistory,
}

/// Fit an LSTM on windows of `features` columns.
pub fn lstm_fit(data: &SupervisedSet<'_>, features: usize, config: &LstmConfig, rng: &mut Rng) -> Result<LstmFit> {
    if features == 0 || data.input_len % features != 0 {
        return Err(Error::shape("lstm_fit input", alloc::format!("steps x {features}"), data.input_len));
    }
    if config.hidden == 0 {
        return Err(Error::invalid("hidden size must be at least 1"));
    }
    let mut params = LstmParams::init(features, config.hidden, data.target_dim, rng);
    let history = fit_minibatch(&mut params, data, &config.train, rng)?;
    Ok(LstmFit { params, history })
}

/// Candidate settings for validation tuning; an empty list keeps the base
/// value for that field.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LstmGrid {
    pub hidden: Vec<usize>,
    pub learning_rates: Vec<f64>,
}

impl LstmGrid {
    /// Every configuration the grid expands to, hidden size major.
    pub fn candidates(&self, base: &LstmConfig) -> Vec<LstmConfig> {
        let hs = if self.hidden.is_empty() { vec![base.hidden] } else { self.hidden.clone() };
        let lrs = if self.learning_rates.is_empty() {
            vec![base.train.learning_rate]
        } else {
            self.learning_rates.clone()
        };
        let mut out = Vec::with_capacity(hs.len() * lrs.len());
        for &hidden in &hs {
            for &learning_rate in &lrs {
                out.push(LstmConfig {
                    hidden,
                    train: TrainConfig { learning_rate, ..base.train.clone() },
                });
            }
        }
        out
    }
}

/// The candidate with the lowest validation MSE.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmTuned {
    pub fit: LstmFit,
    pub config: LstmConfig,
    pub validation_mse: f64,
}

/// Fit every grid candidate on `train` (candidate `i` draws from
/// `rng.substream(i)`) and keep the best on `validation`; the first
/// candidate wins ties.
pub fn lstm_tune(
    train: &SupervisedSet<'_>,
    validation: &SupervisedSet<'_>,
    features: usize,
    base: &LstmConfig,
    grid: &LstmGrid,
    rng: &Rng,
) -> Result<LstmTuned> {
    if validation.is_empty() {
        return Err(Error::invalid("tuning needs validation windows"));
    }
    let mut best: Option<LstmTuned> = None;
    for (i, config) in grid.candidates(base).into_iter().enumerate() {
        let fit = lstm_fit(train, features, &config, &mut rng.substream(i as u64))?;
        let validation_mse = fit.params.mse(validation)?;
        if best.as_ref().map_or(true, |b| validation_mse < b.validation_mse) {
            best = Some(LstmTuned { fit, config, validation_mse });
        }
    }
    Ok(best.expect("grid expands to at least one candidate"))
}
