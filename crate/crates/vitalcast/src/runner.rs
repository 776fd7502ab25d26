//! Threaded experiment driver: seeds run on a small pool of scoped worker
//! threads and are aggregated in seed order, so the report does not depend
//! on the thread count or on which seed finishes first.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use vitalcast_core::data::Cohort;
use vitalcast_core::evaluation::{aggregate, run_seed, MetricsReport, SeedResult, SuiteConfig};
use vitalcast_core::synthgen::{generate_cohort, CohortSpec};

use crate::config::{DataSource, ExperimentConfig};
use crate::csvio::ingest_csv;
use crate::error::{AppError, AppResult};
use crate::report::emit_report;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "VITALCAST_THREADS";

/// Worker count from [`THREADS_ENV`], else the available parallelism.
pub fn thread_count() -> AppResult<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(AppError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Run every configured seed on up to `threads` workers and average.
/// The first failing seed (in seed-list order) aborts the suite.
pub fn run_suite_threaded(config: &SuiteConfig, cohort: &Cohort, threads: usize) -> AppResult<MetricsReport> {
    config.validate()?;
    let n = config.seeds.len();
    let workers = threads.clamp(1, n);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<vitalcast_core::Result<SeedResult>>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let result = run_seed(config, cohort, config.seeds[i]);
                *slots[i].lock().expect("slot lock") = Some(result);
            });
        }
    });
    let results = slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("every seed ran"))
        .collect::<vitalcast_core::Result<Vec<_>>>()?;
    Ok(aggregate(config.target, &config.methods, &config.horizons, &results)?)
}

/// Load or generate the cohort a config names.
pub fn load_cohort(source: &DataSource) -> AppResult<Cohort> {
    match source {
        DataSource::Csv { path } => ingest_csv(path),
        DataSource::Synthetic(s) => Ok(generate_cohort(&CohortSpec::from(s))?.cohort),
    }
}

/// Run the experiment and write one report file per configured format.
/// Returns the report and the written paths.
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> AppResult<(MetricsReport, Vec<std::path::PathBuf>)> {
    let suite = config.suite()?;
    let cohort = load_cohort(&config.data)?;
    let report = run_suite_threaded(&suite, &cohort, threads)?;
    let paths = write_reports(&report, config)?;
    Ok((report, paths))
}

/// Write `<dir>/<stem>.<ext>` for each configured format.
pub fn write_reports(report: &MetricsReport, config: &ExperimentConfig) -> AppResult<Vec<std::path::PathBuf>> {
    let dir: &Path = &config.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let mut formats = config.output.formats.clone();
    formats.sort();
    formats.dedup();
    let mut paths = Vec::with_capacity(formats.len());
    for f in formats {
        let path = dir.join(format!("{}.{}", config.output.stem, f.extension()));
        std::fs::write(&path, emit_report(report, f)).map_err(|e| AppError::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use vitalcast_core::evaluation::Method;

    fn small() -> (SuiteConfig, Cohort) {
        let cohort = generate_cohort(&CohortSpec { n_patients: 10, steps_per_patient: 60, ..Default::default() })
            .unwrap()
            .cohort;
        let config = SuiteConfig {
            methods: vec![Method::Arima],
            horizons: vec![1, 2],
            seeds: vec![0, 1, 2],
            ..Default::default()
        };
        (config, cohort)
    }

    #[test]
    fn thread_count_does_not_change_the_report() {
        let (config, cohort) = small();
        let one = run_suite_threaded(&config, &cohort, 1).unwrap();
        let three = run_suite_threaded(&config, &cohort, 3).unwrap();
        assert_eq!(one, three);
        assert_eq!(one.seeds, vec![0, 1, 2]);
    }

    #[test]
    fn failing_seed_aborts() {
        let (mut config, cohort) = small();
        config.window = 59;
        let err = run_suite_threaded(&config, &cohort, 2).unwrap_err();
        assert!(err.to_string().contains("seed 0"), "{err}");
    }
}
