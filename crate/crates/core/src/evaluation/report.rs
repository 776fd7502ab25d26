use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::data::Vital;
use crate::error::{Error, Result};
use crate::evaluation::Method;
use crate::math;

/// Scores of one method at one horizon in one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedCell {
    pub mse: f64,
    pub mape: f64,
    pub mape_excluded: usize,
    pub n_predictions: usize,
}

/// Everything one seed produced: `cells[method][horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedResult {
    pub seed: u64,
    pub cells: BTreeMap<Method, BTreeMap<usize, SeedCell>>,
}

/// Run-averaged scores of one (method, horizon).
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub mse: f64,
    pub mape: f64,
    /// Sample standard deviations across runs (0 for a single run).
    pub mse_std: f64,
    pub mape_std: f64,
    /// Per-run values in seed order.
    pub mse_per_seed: Vec<f64>,
    pub mape_per_seed: Vec<f64>,
    pub mape_excluded: usize,
    pub n_predictions: usize,
}

/// One table row; `cells[i]` belongs to `MetricsReport::horizons[i]` and is
/// `None` for generated horizons.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: Method,
    pub cells: Vec<Option<Cell>>,
}

/// Which metric a best-cell query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mse,
    Mape,
}

/// Per-method, per-horizon MSE/MAPE in original units, averaged over runs.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub target: Vital,
    pub horizons: Vec<usize>,
    pub seeds: Vec<u64>,
    pub rows: Vec<ReportRow>,
}

impl MetricsReport {
    pub fn empty(target: Vital, horizons: Vec<usize>) -> Self {
        Self {
            target,
            horizons,
            seeds: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn n_runs(&self) -> usize {
        self.seeds.len()
    }

    pub fn row(&self, method: Method) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn cell(&self, method: Method, horizon: usize) -> Option<&Cell> {
        let i = self.horizons.iter().position(|&h| h == horizon)?;
        self.row(method)?.cells[i].as_ref()
    }

    /// Per-horizon flags marking generated (blank) cells of `method`.
    pub fn generated_mask(&self, method: Method) -> Vec<bool> {
        self.horizons.iter().map(|&h| h <= method.generated_depth()).collect()
    }

    /// Row index of the lowest mean in the given column (first row on ties).
    pub fn best_row(&self, horizon_index: usize, metric: Metric) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            if let Some(c) = row.cells.get(horizon_index).and_then(Option::as_ref) {
                let v = match metric {
                    Metric::Mse => c.mse,
                    Metric::Mape => c.mape,
                };
                if best.map_or(true, |(_, b)| v < b) {
                    best = Some((r, v));
                }
            }
        }
        best.map(|(r, _)| r)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, math::sqrt(var))
}

/// Average per-seed results into a report. Results are ordered by seed
/// first, so the output does not depend on the order runs finished in.
pub fn aggregate(target: Vital, methods: &[Method], horizons: &[usize], results: &[SeedResult]) -> Result<MetricsReport> {
    let mut sorted: Vec<&SeedResult> = results.iter().collect();
    sorted.sort_by_key(|r| r.seed);
    if sorted.windows(2).any(|w| w[0].seed == w[1].seed) {
        return Err(Error::invalid("duplicate seed in results"));
    }
    let mut report = MetricsReport {
        target,
        horizons: horizons.to_vec(),
        seeds: sorted.iter().map(|r| r.seed).collect(),
        rows: Vec::with_capacity(methods.len()),
    };
    if sorted.is_empty() {
        return Ok(report);
    }
    for &method in methods {
        let mut cells = Vec::with_capacity(horizons.len());
        for &h in horizons {
            if h <= method.generated_depth() {
                cells.push(None);
                continue;
            }
            let mut per: Vec<SeedCell> = Vec::with_capacity(sorted.len());
            for r in &sorted {
                let c = r.cells.get(&method).and_then(|m| m.get(&h)).ok_or_else(|| {
                    Error::invalid(alloc::format!("seed {} has no result for {method} at horizon {h}", r.seed))
                })?;
                per.push(*c);
            }
            let mse_per_seed: Vec<f64> = per.iter().map(|c| c.mse).collect();
            let mape_per_seed: Vec<f64> = per.iter().map(|c| c.mape).collect();
            let (mse, mse_std) = mean_std(&mse_per_seed);
            let (mape, mape_std) = mean_std(&mape_per_seed);
            cells.push(Some(Cell {
                mse,
                mape,
                mse_std,
                mape_std,
                mse_per_seed,
                mape_per_seed,
                mape_excluded: per.iter().map(|c| c.mape_excluded).sum(),
                n_predictions: per.iter().map(|c| c.n_predictions).sum(),
            }));
        }
        report.rows.push(ReportRow { method, cells });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn seed_result(seed: u64, methods: &[(Method, &[(usize, f64)])]) -> SeedResult {
        let mut cells = BTreeMap::new();
        for (m, hs) in methods {
            let mut by_h = BTreeMap::new();
            for &(h, v) in *hs {
                by_h.insert(h, SeedCell { mse: v, mape: v / 10.0, mape_excluded: 0, n_predictions: 5 });
            }
            cells.insert(*m, by_h);
        }
        SeedResult { seed, cells }
    }

    #[test]
    fn identical_runs_average_to_either() {
        let a = seed_result(0, &[(Method::Arima, &[(1, 3.7)])]);
        let mut b = a.clone();
        b.seed = 1;
        let r = aggregate(Vital::HeartRate, &[Method::Arima], &[1], &[a, b]).unwrap();
        let c = r.cell(Method::Arima, 1).unwrap();
        assert_eq!(c.mse, 3.7);
        assert_eq!(c.mse_std, 0.0);
        assert_eq!(r.n_runs(), 2);
    }

    #[test]
    fn order_independent() {
        let a = seed_result(3, &[(Method::Gpr, &[(1, 1.0), (2, 2.0)])]);
        let b = seed_result(1, &[(Method::Gpr, &[(1, 0.1), (2, 0.3)])]);
        let r1 = aggregate(Vital::Sbp, &[Method::Gpr], &[1, 2], &[a.clone(), b.clone()]).unwrap();
        let r2 = aggregate(Vital::Sbp, &[Method::Gpr], &[1, 2], &[b, a]).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.seeds, vec![1, 3]);
        assert_eq!(r1.cell(Method::Gpr, 1).unwrap().mse_per_seed, vec![0.1, 1.0]);
    }

    #[test]
    fn generated_horizons_blank_and_best_cell() {
        let g1 = Method::Glstm { depth: 1, mi: false };
        let a = seed_result(0, &[(Method::LstmDirect, &[(1, 51.37), (2, 60.0)]), (g1, &[(2, 47.31)])]);
        let r = aggregate(Vital::HeartRate, &[Method::LstmDirect, g1], &[1, 2], &[a]).unwrap();
        assert!(r.rows[1].cells[0].is_none());
        assert_eq!(r.generated_mask(g1), vec![true, false]);
        assert_eq!(r.best_row(1, Metric::Mse), Some(1));
        assert_eq!(r.best_row(0, Metric::Mse), Some(0));
    }

    #[test]
    fn missing_cell_is_an_error() {
        let a = seed_result(0, &[(Method::Arima, &[(1, 1.0)])]);
        assert!(aggregate(Vital::HeartRate, &[Method::Arima], &[1, 2], &[a]).is_err());
    }
}
