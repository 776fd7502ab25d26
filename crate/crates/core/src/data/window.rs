use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::record::{Vital, N_VITALS, STATIC_FEATURES};
use crate::data::scaler::PatientSeries;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Leading bytes of the binary window export.
pub const WINDOWS_MAGIC: [u8; 4] = *b"VCWD";
pub const WINDOWS_VERSION: u32 = 1;

/// Which feature columns a window's targets are read from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSpec {
    pub columns: Vec<usize>,
}

impl TargetSpec {
    pub fn vital(v: Vital) -> Self {
        Self {
            columns: alloc::vec![v.feature_index()],
        }
    }

    /// All five time-varying vitals, the generative model's output.
    pub fn all_vitals() -> Self {
        Self {
            columns: (STATIC_FEATURES..STATIC_FEATURES + N_VITALS).collect(),
        }
    }

    pub fn columns(cols: &[usize]) -> Self {
        Self { columns: cols.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }
}

/// Where a window came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    /// Index into [`WindowedDataset::patient_ids`].
    pub patient: usize,
    /// First row of the un-led window in that patient's series.
    pub start: usize,
}

/// S windows of M × K scaled features with per-horizon targets.
///
/// For a window starting at `start`, the last observed step is
/// `t = start + M − 1` and the horizon-`h` target is row `t + h`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    m: usize,
    k: usize,
    windows: Vec<f64>,
    horizons: Vec<usize>,
    target: TargetSpec,
    targets: BTreeMap<usize, Vec<f64>>,
    actuals: BTreeMap<usize, Vec<f64>>,
    provenance: Vec<Provenance>,
    patient_ids: Vec<String>,
}

/// Stride-1 windows over each patient.
pub fn make_windows(series: &[PatientSeries], m: usize, horizons: &[usize], target: &TargetSpec) -> Result<WindowedDataset> {
    make_windows_led(series, m, horizons, target, 0)
}

/// Like [`make_windows`], but each window's rows are taken `lead` steps
/// later while targets stay anchored to the un-led window's last step.
pub fn make_windows_led(
    series: &[PatientSeries],
    m: usize,
    horizons: &[usize],
    target: &TargetSpec,
    lead: usize,
) -> Result<WindowedDataset> {
    if m == 0 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(Error::invalid("horizons must be nonempty and all >= 1"));
    }
    let mut hs = horizons.to_vec();
    hs.sort_unstable();
    hs.dedup();
    let h_max = *hs.last().unwrap();
    let k = series.first().map_or(0, |s| s.scaled.cols());
    if let Some(bad) = target.columns.iter().find(|&&c| c >= k.max(1)) {
        return Err(Error::shape("make_windows target column", alloc::format!("< {k}"), bad));
    }
    let d = target.dim();
    let mut ds = WindowedDataset {
        m,
        k,
        windows: Vec::new(),
        horizons: hs.clone(),
        target: target.clone(),
        targets: hs.iter().map(|&h| (h, Vec::new())).collect(),
        actuals: hs.iter().map(|&h| (h, Vec::new())).collect(),
        provenance: Vec::new(),
        patient_ids: series.iter().map(|s| s.patient_id.clone()).collect(),
    };
    for (pi, s) in series.iter().enumerate() {
        if s.scaled.cols() != k || s.original.shape() != s.scaled.shape() {
            return Err(Error::shape("make_windows series", k, s.scaled.cols()));
        }
        let p = s.len();
        let span = m + h_max.max(lead);
        if p + 1 <= span {
            continue;
        }
        let count = p + 1 - span;
        for start in 0..count {
            let rows = start + lead..start + lead + m;
            ds.windows
                .extend_from_slice(&s.scaled.as_slice()[rows.start * k..rows.end * k]);
            let last = start + m - 1;
            for &h in &hs {
                let (scaled, orig) = (s.scaled.row(last + h), s.original.row(last + h));
                let tv = ds.targets.get_mut(&h).unwrap();
                tv.extend(target.columns.iter().map(|&c| scaled[c]));
                let av = ds.actuals.get_mut(&h).unwrap();
                av.extend(target.columns.iter().map(|&c| orig[c]));
            }
            ds.provenance.push(Provenance { patient: pi, start });
        }
    }
    debug_assert!(ds.targets.values().all(|t| t.len() == ds.provenance.len() * d));
    Ok(ds)
}

impl WindowedDataset {
    /// Number of windows (S).
    pub fn len(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    pub fn window_len(&self) -> usize {
        self.m
    }

    pub fn n_features(&self) -> usize {
        self.k
    }

    pub fn horizons(&self) -> &[usize] {
        &self.horizons
    }

    pub fn target_spec(&self) -> &TargetSpec {
        &self.target
    }

    pub fn target_dim(&self) -> usize {
        self.target.dim()
    }

    /// Flat S × M × K buffer.
    pub fn windows(&self) -> &[f64] {
        &self.windows
    }

    pub fn window(&self, i: usize) -> &[f64] {
        let n = self.m * self.k;
        &self.windows[i * n..(i + 1) * n]
    }

    pub fn window_matrix(&self, i: usize) -> Matrix {
        Matrix::from_vec(self.m, self.k, self.window(i).to_vec()).expect("window shape")
    }

    /// Scaled targets for horizon `h`, S × d row-major.
    pub fn targets(&self, h: usize) -> Option<&[f64]> {
        self.targets.get(&h).map(Vec::as_slice)
    }

    /// Targets in original units.
    pub fn actuals(&self, h: usize) -> Option<&[f64]> {
        self.actuals.get(&h).map(Vec::as_slice)
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn patient_ids(&self) -> &[String] {
        &self.patient_ids
    }

    /// Same targets and provenance over replacement windows (window surgery).
    pub fn with_windows(&self, windows: Vec<f64>) -> Result<WindowedDataset> {
        if windows.len() != self.windows.len() {
            return Err(Error::shape("WindowedDataset::with_windows", self.windows.len(), windows.len()));
        }
        let mut out = self.clone();
        out.windows = windows;
        Ok(out)
    }

    /// The windows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> WindowedDataset {
        let n = self.m * self.k;
        let d = self.target_dim();
        let mut out = WindowedDataset {
            m: self.m,
            k: self.k,
            windows: Vec::with_capacity(indices.len() * n),
            horizons: self.horizons.clone(),
            target: self.target.clone(),
            targets: self.horizons.iter().map(|&h| (h, Vec::new())).collect(),
            actuals: self.horizons.iter().map(|&h| (h, Vec::new())).collect(),
            provenance: Vec::with_capacity(indices.len()),
            patient_ids: self.patient_ids.clone(),
        };
        for &i in indices {
            out.windows.extend_from_slice(self.window(i));
            for &h in &self.horizons {
                out.targets.get_mut(&h).unwrap().extend_from_slice(&self.targets[&h][i * d..(i + 1) * d]);
                out.actuals.get_mut(&h).unwrap().extend_from_slice(&self.actuals[&h][i * d..(i + 1) * d]);
            }
            out.provenance.push(self.provenance[i]);
        }
        out
    }

    /// Binary export: magic `VCWD`, version, S, M, K as little-endian u32,
    /// then the S × M × K windows as little-endian f64.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let count = |v: usize| u32::try_from(v).map_err(|_| Error::invalid("window count exceeds u32"));
        let mut out = Vec::with_capacity(20 + self.windows.len() * 8);
        out.extend_from_slice(&WINDOWS_MAGIC);
        out.extend_from_slice(&WINDOWS_VERSION.to_le_bytes());
        for v in [self.len(), self.m, self.k] {
            out.extend_from_slice(&count(v)?.to_le_bytes());
        }
        for x in &self.windows {
            out.extend_from_slice(&x.to_le_bytes());
        }
        Ok(out)
    }
}
